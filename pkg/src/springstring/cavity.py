"""Spectrum of a finite string of length ``l`` clamped at ``x = +-l/2``.

Odd standing waves vanish at the attachment point and never feel the
oscillator.  Even standing waves ``cos(k|x| - eta)`` must vanish at the walls,
which gives ``k l / 2 - eta(omega(k)) = pi/2 + n pi``.  Rather than bracket
this equation between the jumps of ``eta`` across the resonance, the roots
are located on the smooth function

    H(k) = 2k (omega^2 - Omega_kappa^2) cos(k l/2) + kappa (omega^2 - Omega0^2) sin(k l/2),

which vanishes exactly where ``cos(k l/2 - eta) = 0`` and has no poles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ParameterError
from .model import ModelParams, dispersion_omega
from .scattering import coefficients

__all__ = [
    "CavitySpectrum",
    "even_spectrum",
    "odd_spectrum",
    "free_spectrum",
    "cavity_spectrum",
    "even_residual",
    "count_levels",
    "graphical_curves",
    "write_cavity_csv",
    "CAVITY_HEADER",
]


@dataclass
class CavitySpectrum:
    """Even (interacting), odd and free reference levels of one cavity."""

    length: float
    params: ModelParams
    even_k: list[float]
    odd_k: list[float] = field(default_factory=list)
    free_omega: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    missing_branches: list[int] = field(default_factory=list)

    @property
    def even_omega(self) -> list[float]:
        return [dispersion_omega(k, self.params) for k in self.even_k]

    @property
    def odd_omega(self) -> list[float]:
        return [dispersion_omega(k, self.params) for k in self.odd_k]


def _check_length(l: float) -> None:
    if not (l > 0 and math.isfinite(l)):
        raise ParameterError(f"cavity length must be positive, got {l}")


def _h(k, l: float, p: ModelParams):
    w2 = p.omega0**2 + k * k
    return (2 * k * (w2 - p.Omega_kappa**2) * np.cos(0.5 * k * l)
            + p.kappa * (w2 - p.Omega0**2) * np.sin(0.5 * k * l))


def _phase(k, l: float, p: ModelParams):
    """Continuous phase ``phi`` with ``H = R cos(k l/2 - phi)``."""
    w2 = p.omega0**2 + k * k
    return np.unwrap(np.arctan2(p.kappa * (w2 - p.Omega0**2), 2 * k * (w2 - p.Omega_kappa**2)))


def even_residual(k: float, l: float, p: ModelParams) -> float:
    """Distance of ``k l/2 - eta - pi/2`` to the nearest multiple of ``pi``."""
    omega = dispersion_omega(k, p)
    if p.kappa == 0:
        eta = 0.0
    elif omega == p.Omega_kappa:
        eta = 0.5 * math.pi
    else:
        eta = coefficients(omega, p).eta.real
    f = 0.5 * k * l - eta - 0.5 * math.pi
    return abs(f - math.pi * round(f / math.pi))


def _scan_grid(l: float, k_max: float, p: ModelParams) -> np.ndarray:
    step = 2 * math.pi / l / 32
    grid = np.arange(step, k_max + step, step)
    if p.Omega_kappa > p.omega0:
        k_res = math.sqrt(p.Omega_kappa**2 - p.omega0**2)
        # |tan eta| = 1 half width around the resonance, in k
        dk = p.kappa**2 / (4 * k_res * k_res)
        if dk < step:
            lo = max(step, k_res - 20 * dk)
            dense = np.arange(lo, k_res + 20 * dk, dk / 10)
            grid = np.union1d(grid, dense[dense <= k_max])
    return grid


def even_spectrum(l: float, n_max: int, p: ModelParams) -> CavitySpectrum:
    """The ``n_max + 1`` lowest even levels above the gap.

    Roots are bracketed on a scan of ``H`` (refined across the resonance)
    and polished with Brent's method.  Branches of the phase condition that
    end up without a root are listed in ``missing_branches``; a tangential
    double root is reported there rather than guessed.
    """
    _check_length(l)
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    if p.kappa == 0:
        ks = [math.pi * (2 * n + 1) / l for n in range(n_max + 1)]
        return CavitySpectrum(l, p, ks, residuals=[0.0] * len(ks))

    roots: list[float] = []
    k_max = math.pi * (2 * n_max + 6) / l
    while True:
        grid = _scan_grid(l, k_max, p)
        vals = _h(grid, l, p)
        roots = []
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if fa == 0:
                roots.append(float(a))
            elif fa * fb < 0:
                roots.append(brentq(lambda k: _h(k, l, p), a, b, xtol=1e-15, rtol=1e-15))
        if len(roots) > n_max + 1:
            break
        k_max *= 2
    roots = roots[:n_max + 1]

    # branch index of each root from the continuous phase
    fine = np.union1d(grid, roots)
    phi = np.interp(roots, fine, _phase(fine, l, p))
    branch = [round((0.5 * k * l - ph - 0.5 * math.pi) / math.pi) for k, ph in zip(roots, phi)]
    missing = sorted(set(range(branch[0], branch[-1] + 1)) - set(branch))
    residuals = [even_residual(k, l, p) for k in roots]
    return CavitySpectrum(l, p, roots, residuals=residuals, missing_branches=missing)


def odd_spectrum(l: float, n_max: int) -> list[float]:
    """``k_n = 2 pi n / l`` for ``n = 1..n_max``, whatever the coupling."""
    _check_length(l)
    return [2 * math.pi * n / l for n in range(1, n_max + 1)]


def free_spectrum(l: float, n_max: int, p: ModelParams) -> list[float]:
    """Even-level frequencies of the string without the oscillator."""
    _check_length(l)
    return [math.sqrt(p.omega0**2 + (math.pi * (2 * n + 1) / l) ** 2) for n in range(n_max + 1)]


def cavity_spectrum(l: float, n_max: int, p: ModelParams) -> CavitySpectrum:
    spec = even_spectrum(l, n_max, p)
    spec.odd_k = odd_spectrum(l, n_max)
    spec.free_omega = free_spectrum(l, n_max, p)
    return spec


def count_levels(omegas, lo: float, hi: float) -> int:
    """Number of levels with ``lo < omega < hi``."""
    return sum(1 for w in omegas if lo < w < hi)


def graphical_curves(l: float, p: ModelParams, ks) -> dict[str, np.ndarray]:
    """The two sides of the even-level condition sampled on ``ks``.

    ``tan_eta`` and ``tan_wall = tan(k l/2 - pi/2)`` intersect at the even
    levels; both have poles, so plots should mask large values.
    """
    _check_length(l)
    ks = np.asarray(ks, dtype=float)
    w2 = p.omega0**2 + ks * ks
    with np.errstate(divide="ignore", invalid="ignore"):
        tan_eta = p.kappa * (w2 - p.Omega0**2) / (2 * ks * (w2 - p.Omega_kappa**2))
        tan_wall = np.tan(0.5 * ks * l - 0.5 * math.pi)
    return {"k": ks, "omega": np.sqrt(w2), "tan_eta": tan_eta, "tan_wall": tan_wall}


CAVITY_HEADER = ["n", "branch", "k", "omega", "residual"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_cavity_csv(spec: CavitySpectrum, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CAVITY_HEADER)
    for n, (k, r) in enumerate(zip(spec.even_k, spec.residuals)):
        writer.writerow([n, "even", _fmt(k), _fmt(dispersion_omega(k, spec.params)), _fmt(r)])
    for n, k in enumerate(spec.odd_k, start=1):
        writer.writerow([n, "odd", _fmt(k), _fmt(dispersion_omega(k, spec.params)), _fmt(0.0)])
    for n, w in enumerate(spec.free_omega):
        k = math.pi * (2 * n + 1) / spec.length
        writer.writerow([n, "free", _fmt(k), _fmt(w), _fmt(0.0)])
