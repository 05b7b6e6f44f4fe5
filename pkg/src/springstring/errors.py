"""Exception hierarchy shared by all modules."""


class SpringStringError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(SpringStringError, ValueError):
    """Invalid model, grid or run parameters."""


class PoleError(SpringStringError, ArithmeticError):
    """A closed-form expression was evaluated exactly on one of its poles."""


class BranchPointError(PoleError):
    """Evaluation at the threshold frequency ``omega == omega0``."""


class ResonanceError(SpringStringError):
    """No resonance exists, or its width could not be bracketed."""


class BracketError(SpringStringError):
    """A root finder could not isolate a sign change."""


class CFLError(ParameterError):
    """Time step too large for the explicit scheme."""


class InternalConsistencyError(SpringStringError, AssertionError):
    """Two independent routes to the same quantity disagree."""
