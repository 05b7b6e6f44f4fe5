"""Classical oscillator coupled to an infinite (or clamped) elastic string.

Submodules: :mod:`model`, :mod:`scattering`, :mod:`spectral`, :mod:`modes`,
:mod:`timedomain`, :mod:`cavity` and :mod:`cli`.
"""

from .errors import (BracketError, BranchPointError, CFLError, InternalConsistencyError,
                     ParameterError, PoleError, ResonanceError, SpringStringError)
from .model import FieldState, ModelParams, dispersion_k, dispersion_omega, total_energy
from .scattering import coefficients, resonance_quality, s_matrix, t_matrix
from .spectral import bound_mode, dalembert_poles, kg_poles
from .cavity import cavity_spectrum, even_spectrum, free_spectrum, odd_spectrum

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "FieldState", "dispersion_k", "dispersion_omega", "total_energy",
    "coefficients", "resonance_quality", "s_matrix", "t_matrix",
    "dalembert_poles", "kg_poles", "bound_mode",
    "even_spectrum", "odd_spectrum", "free_spectrum", "cavity_spectrum",
    "SpringStringError", "ParameterError", "PoleError", "BranchPointError", "ResonanceError",
    "BracketError", "CFLError", "InternalConsistencyError",
]
