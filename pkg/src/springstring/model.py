"""Model parameters, dispersion relation and energy bookkeeping.

Everything is dimensionless: the oscillator mass, the wave speed, the linear
mass density and the tension of the string are all set to one.  A
configuration is then fixed by three numbers,

* ``kappa``  -- stiffness of the spring that couples the oscillator to the string,
* ``Omega0`` -- natural frequency of the uncoupled oscillator,
* ``omega0`` -- mass gap of the string (``0`` for a d'Alembert string).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = [
    "ModelParams",
    "FieldState",
    "shifted_frequency",
    "dispersion_k",
    "dispersion_omega",
    "mean_energy_current",
    "trapezoid_weights",
    "total_energy",
    "oscillator_energy",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration of the oscillator + string system."""

    kappa: float
    Omega0: float
    omega0: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "Omega0", "omega0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")
        if self.omega0 < 0:
            raise ParameterError(f"omega0 must be >= 0, got {self.omega0}")
        if self.Omega0 <= 0:
            raise ParameterError(f"Omega0 must be > 0, got {self.Omega0}")

    @property
    def Omega_kappa(self) -> float:
        """Oscillator frequency shifted by the coupling spring."""
        return math.sqrt(self.Omega0**2 + self.kappa)

    @property
    def is_dalembert(self) -> bool:
        return self.omega0 == 0.0

    def replace(self, **changes) -> ModelParams:
        values = {"kappa": self.kappa, "Omega0": self.Omega0, "omega0": self.omega0}
        values.update(changes)
        return ModelParams(**values)


def shifted_frequency(p: ModelParams) -> float:
    return p.Omega_kappa


def dispersion_k(omega: float, p: ModelParams) -> complex:
    """Wavenumber of a monochromatic wave of frequency ``omega``.

    Real and non-negative above the gap; purely imaginary with a positive
    imaginary part below it, so that ``exp(i k |x|)`` decays away from the
    oscillator.
    """
    if omega < 0:
        raise ParameterError(f"omega must be >= 0, got {omega}")
    d = omega * omega - p.omega0 * p.omega0
    if d >= 0:
        return complex(math.sqrt(d), 0.0)
    return complex(0.0, math.sqrt(-d))


def dispersion_omega(k: float, p: ModelParams) -> float:
    return math.hypot(p.omega0, k)


def outgoing_k(omega: complex, p: ModelParams) -> complex:
    """Wavenumber continued to complex frequencies along outgoing waves.

    The branch cuts hang vertically down from ``+-omega0``.  On the real axis
    this agrees with :func:`dispersion_k` for ``omega >= 0`` (approached from
    above) and gives ``k < 0`` for ``omega < -omega0``.  For ``omega0 == 0``
    it reduces to ``k = omega``.
    """
    omega = complex(omega)
    return _sqrt_cut_down(omega - p.omega0) * _sqrt_cut_down(omega + p.omega0)


def _sqrt_cut_down(w: complex) -> complex:
    # arg(w) taken in (-pi/2, 3pi/2]
    r = abs(w)
    if r == 0:
        return 0j
    theta = cmath.phase(w)
    if theta <= -math.pi / 2:
        theta += 2 * math.pi
    return cmath.rect(math.sqrt(r), theta / 2)


def mean_energy_current(amplitude: complex, omega: float, direction: int,
                        p: ModelParams) -> float:
    """Period-averaged energy current of ``a exp(i(+-kx - omega t))``."""
    if direction not in (1, -1):
        raise ParameterError("direction must be +1 or -1")
    if omega <= p.omega0:
        return 0.0
    k = dispersion_k(omega, p).real
    return direction * k * omega * abs(amplitude) ** 2 / 2


@dataclass
class FieldState:
    """Discretised string plus oscillator at one instant.

    ``xi`` and ``pi`` are node values on a uniform grid whose middle node sits
    at ``x = 0``; ``p_osc`` is the oscillator velocity (unit mass).
    """

    xi: np.ndarray
    pi: np.ndarray
    x_osc: float = 0.0
    p_osc: float = 0.0
    t: float = 0.0
    _center: int = field(init=False, repr=False)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        self.pi = np.asarray(self.pi, dtype=float)
        if self.xi.ndim != 1 or self.xi.shape != self.pi.shape:
            raise ParameterError(
                f"xi and pi must be 1-D arrays of equal length, got "
                f"{self.xi.shape} and {self.pi.shape}")
        if self.xi.size < 3 or self.xi.size % 2 == 0:
            raise ParameterError("grid needs an odd number (>= 3) of nodes")
        self._center = self.xi.size // 2

    @property
    def center(self) -> int:
        return self._center

    @property
    def xi0(self) -> float:
        return float(self.xi[self._center])

    def copy(self) -> FieldState:
        return FieldState(self.xi.copy(), self.pi.copy(), self.x_osc, self.p_osc, self.t)

    def scaled(self, factor: float) -> FieldState:
        return FieldState(factor * self.xi, factor * self.pi,
                          factor * self.x_osc, factor * self.p_osc, self.t)


def trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def oscillator_energy(x_osc: float, p_osc: float, xi0: float, p: ModelParams) -> float:
    """Oscillator kinetic + potential energy, coupling spring included."""
    return (0.5 * p_osc**2 + 0.5 * p.Omega0**2 * x_osc**2
            + 0.5 * p.kappa * (x_osc - xi0) ** 2)


def total_energy(state: FieldState, p: ModelParams, dx: float) -> float:
    """Discrete Hamiltonian of the whole system.

    The string gradient is the difference quotient between neighbouring
    nodes (centred on the cell midpoints) and the node sums use trapezoid
    weights, which is exactly the quadratic form conserved by
    :func:`springstring.timedomain.step`.
    """
    if dx <= 0:
        raise ParameterError("dx must be positive")
    xi, pi = state.xi, state.pi
    w = trapezoid_weights(xi.size)
    grad = np.diff(xi) / dx
    string = 0.5 * dx * (np.dot(w, pi * pi) + np.dot(grad, grad)
                         + p.omega0**2 * np.dot(w, xi * xi))
    return float(string + oscillator_energy(state.x_osc, state.p_osc, state.xi0, p))
