"""Normal modes of the coupled system and their orthonormality checks.

A state is the pair (string profile ``xi(x, t)``, oscillator displacement
``X(t)``).  Travelling modes carry the prefactor ``1/sqrt(2 pi)``, the real
parity-symmetric modes ``1/sqrt(pi)``, and the bound mode is normalised to
one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import ParameterError, PoleError
from .model import ModelParams, dispersion_omega
from .scattering import coefficients
from .spectral import bound_mode

__all__ = [
    "ModeKind",
    "ModeSpec",
    "ModeSample",
    "eval_mode",
    "r_matrix",
    "check_coefficient_identities",
    "check_pv_identity",
    "check_pv_identity_cross",
    "bound_mode_norm",
    "bound_mode_norm_quadrature",
    "windowed_inner_product",
]

INV_SQRT_2PI = 1 / math.sqrt(2 * math.pi)
INV_SQRT_PI = 1 / math.sqrt(math.pi)


class ModeKind(enum.Enum):
    FREE_RIGHT = "FreeRight"
    FREE_LEFT = "FreeLeft"
    IN_RIGHT = "InRight"
    IN_LEFT = "InLeft"
    OUT_RIGHT = "OutRight"
    OUT_LEFT = "OutLeft"
    SYM_EVEN = "SymEven"
    SYM_ODD = "SymOdd"
    BOUND = "Bound"


@dataclass(frozen=True)
class ModeSpec:
    kind: ModeKind
    k: float = 0.0

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", ModeKind(self.kind))
        if self.kind is not ModeKind.BOUND and not self.k > 0:
            raise ParameterError(f"{self.kind.value} needs k > 0, got {self.k}")


@dataclass(frozen=True)
class ModeSample:
    xi: complex | np.ndarray
    x_osc: complex


def _in_right(x, k, c):
    return np.where(x <= 0, np.exp(1j * k * x) + c.rho * np.exp(-1j * k * x),
                    c.tau * np.exp(1j * k * x))


def eval_mode(spec: ModeSpec, x, t: float, p: ModelParams) -> ModeSample:
    """Evaluate a mode at position(s) ``x`` and time ``t``.

    ``x`` may be a scalar or an array; ``xi`` has the same shape.
    """
    x = np.asarray(x, dtype=float)
    kind = spec.kind
    if kind is ModeKind.BOUND:
        bm = bound_mode(p)
        if bm is None:
            raise ParameterError("no bound mode for these parameters (needs omega0 > Omega0)")
        phase = np.exp(-1j * bm.omega_b * t)
        xi = bm.c_b * np.exp(-np.abs(x) / bm.decay_length) * phase
        return ModeSample(_squeeze(xi), complex(bm.x_amplitude * phase))

    k = spec.k
    omega = dispersion_omega(k, p)
    phase = np.exp(-1j * omega * t)
    if kind is ModeKind.FREE_RIGHT:
        return ModeSample(_squeeze(INV_SQRT_2PI * np.exp(1j * k * x) * phase), 0j)
    if kind is ModeKind.FREE_LEFT:
        return ModeSample(_squeeze(INV_SQRT_2PI * np.exp(-1j * k * x) * phase), 0j)
    if kind is ModeKind.SYM_ODD:
        return ModeSample(_squeeze(INV_SQRT_PI * np.sin(k * x) * phase), 0j)

    c = coefficients(omega, p)
    if kind is ModeKind.IN_RIGHT:
        xi = INV_SQRT_2PI * _in_right(x, k, c) * phase
        return ModeSample(_squeeze(xi), complex(c.chi * phase))
    if kind is ModeKind.IN_LEFT:
        xi = INV_SQRT_2PI * _in_right(-x, k, c) * phase
        return ModeSample(_squeeze(xi), complex(c.chi * phase))
    if kind is ModeKind.OUT_RIGHT:
        # time reverse and conjugate of the left in-mode
        xi = INV_SQRT_2PI * np.conj(_in_right(-x, k, c)) * phase
        return ModeSample(_squeeze(xi), complex(np.conj(c.chi) * phase))
    if kind is ModeKind.OUT_LEFT:
        xi = INV_SQRT_2PI * np.conj(_in_right(x, k, c)) * phase
        return ModeSample(_squeeze(xi), complex(np.conj(c.chi) * phase))
    if kind is ModeKind.SYM_EVEN:
        eta = c.eta.real
        gap = p.Omega_kappa**2 - omega * omega
        if p.kappa > 0 and gap == 0:
            raise PoleError("even mode oscillator amplitude is singular at Omega_kappa")
        x_amp = p.kappa * INV_SQRT_PI * math.cos(eta) / gap if p.kappa > 0 else 0.0
        xi = INV_SQRT_PI * np.cos(k * np.abs(x) - eta) * phase
        return ModeSample(_squeeze(xi), complex(x_amp * phase))
    raise ParameterError(f"unknown mode kind {kind}")


def _squeeze(a):
    a = np.asarray(a)
    return complex(a) if a.ndim == 0 else a


def r_matrix(omega: float, p: ModelParams) -> np.ndarray:
    """Unitary change of basis from (in-right, in-left) to (even, odd) modes."""
    c = coefficients(omega, p)
    if not c.propagating:
        raise ParameterError("R is defined for omega > omega0 only")
    e = np.exp(1j * c.eta.real)
    return np.array([[e, e], [-1j, 1j]], dtype=complex) / math.sqrt(2)


def check_coefficient_identities(omega: float, p: ModelParams) -> dict[str, float]:
    """Residuals of the algebraic relations between ``rho`` and ``tau``."""
    c = coefficients(omega, p)
    if not c.propagating:
        raise ParameterError("identities hold for omega > omega0 only")
    r, t = c.rho, c.tau
    return {
        "continuity": abs(1 + r - t),
        "energy": abs(abs(r) ** 2 + abs(t) ** 2 - 1),
        "rho_real_part": abs(r + r.conjugate() + 2 * abs(r) ** 2),
        "tau_conjugate": abs(t.conjugate() - t / (r + t)),
        "rho_conjugate": abs(r.conjugate() + r / (r + t)),
    }


def _pv_inputs(k1, k2, p):
    if not (k1 > 0 and k2 > 0):
        raise ParameterError("both wavenumbers must be positive")
    if k1 == k2:
        raise ParameterError("coincident wavenumbers: the principal-value terms are singular")
    c1 = coefficients(dispersion_omega(k1, p), p)
    c2 = coefficients(dispersion_omega(k2, p), p)
    return c1, c2


def check_pv_identity(k1: float, k2: float, p: ModelParams) -> float:
    """Residual of the principal-value coefficient against ``-chi1* chi2``.

    This is the finite part of the overlap of two right-moving in-modes; it
    must cancel the oscillator contribution for the modes to be orthogonal.
    """
    c1, c2 = _pv_inputs(k1, k2, p)
    r1c, r2 = c1.rho.conjugate(), c2.rho
    lhs = (1j / (2 * math.pi)) * ((r2 - r1c) / (k2 + k1)
                                  + (r1c + r2 + 2 * r1c * r2) / (k2 - k1))
    return abs(lhs + c1.chi.conjugate() * c2.chi)


def check_pv_identity_cross(k1: float, k2: float, p: ModelParams) -> float:
    """Same check for a right-moving against a left-moving in-mode."""
    c1, c2 = _pv_inputs(k1, k2, p)
    t1c, t2 = c1.tau.conjugate(), c2.tau
    lhs = (1j / (2 * math.pi)) * ((2 * t2 * t1c - t2 - t1c) / (k2 - k1)
                                  + (t2 - t1c) / (k2 + k1))
    return abs(lhs + c1.chi.conjugate() * c2.chi)


def bound_mode_norm(p: ModelParams, c_b: float | None = None) -> float:
    """``|X_b|^2 + integral |xi_b|^2 dx`` in closed form.

    ``c_b`` overrides the amplitude (default: the normalised one).
    """
    bm = bound_mode(p)
    if bm is None:
        raise ParameterError("no bound mode for these parameters")
    amp = bm.c_b if c_b is None else c_b
    x_amp = p.kappa * amp / (p.Omega_kappa**2 - bm.omega_b**2)
    return x_amp**2 + amp**2 * bm.decay_length


def bound_mode_norm_quadrature(p: ModelParams, span: float = 40.0, n: int = 200_001) -> float:
    bm = bound_mode(p)
    if bm is None:
        raise ParameterError("no bound mode for these parameters")
    half = np.linspace(0.0, span * bm.decay_length, n)
    profile = bm.c_b**2 * np.exp(-2 * half / bm.decay_length)
    return bm.x_amplitude**2 + 2 * simpson(profile, x=half)


def _step_for(specs, p):
    scales = []
    for s in specs:
        if s.kind is ModeKind.BOUND:
            scales.append(bound_mode(p).decay_length)
        else:
            scales.append(2 * math.pi / s.k)
    return min(scales) / 40


def windowed_inner_product(spec1: ModeSpec, spec2: ModeSpec, half_width: float,
                           p: ModelParams, t: float = 0.0,
                           points_per_wavelength: int = 40) -> complex:
    """``X1* X2 + integral_{-L}^{L} xi1* xi2 dx`` by composite Simpson.

    The two halves of the window are integrated separately so that the kink
    of the modes at ``x = 0`` falls on a panel boundary.
    """
    if half_width <= 0:
        raise ParameterError("half_width must be positive")
    h = _step_for((spec1, spec2), p) * 40 / points_per_wavelength
    n = int(math.ceil(half_width / h))
    n += n % 2  # Simpson wants an even number of panels
    total = 0j
    for sign in (-1.0, 1.0):
        xs = sign * np.linspace(0.0, half_width, n + 1)
        a = eval_mode(spec1, xs, t, p)
        b = eval_mode(spec2, xs, t, p)
        integrand = np.conj(a.xi) * b.xi
        part = simpson(integrand, x=xs)
        total += part if sign > 0 else -part
    m1 = eval_mode(spec1, 0.0, t, p)
    m2 = eval_mode(spec2, 0.0, t, p)
    return complex(np.conj(m1.x_osc) * m2.x_osc + total)
