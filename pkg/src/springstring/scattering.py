"""Scattering of monochromatic string waves by the coupled oscillator.

Conventions: an in-mode coming from the left is
``exp(ikx) + rho exp(-ikx)`` for ``x < 0`` and ``tau exp(ikx)`` for ``x > 0``
(times ``exp(-i omega t) / sqrt(2 pi)``) and drives the oscillator with
amplitude ``chi``.  Matrices are returned as ``(2, 2)`` complex numpy arrays.
"""

from __future__ import annotations

import cmath
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (BracketError, BranchPointError, InternalConsistencyError,
                     ParameterError, PoleError, ResonanceError)
from .model import ModelParams, dispersion_k

__all__ = [
    "ScatteringCoefficients",
    "coefficients",
    "solve_scattering_direct",
    "reflection_probability",
    "s_matrix",
    "t_matrix",
    "coefficients_from_t",
    "translate_transfer",
    "compose_transfer",
    "resonance_quality",
    "SweepRow",
    "sweep",
    "write_sweep_csv",
    "SWEEP_HEADER",
]

SQRT_2PI = math.sqrt(2 * math.pi)
_ETA_CROSSCHECK_TOL = 1e-10


@dataclass(frozen=True)
class ScatteringCoefficients:
    omega: float
    k: complex
    rho: complex
    tau: complex
    eta: complex
    chi: complex

    @property
    def propagating(self) -> bool:
        return self.k.imag == 0.0


def _check_frequency(omega: float, p: ModelParams) -> None:
    if not omega > 0 or not math.isfinite(omega):
        raise ParameterError(f"omega must be positive and finite, got {omega}")
    if omega == p.omega0:
        raise BranchPointError(f"omega = omega0 = {omega} is the branch point of k(omega)")
    if p.kappa > 0 and omega == p.Omega_kappa:
        raise PoleError(f"omega = Omega_kappa = {omega}: use the limit rho -> -1, tau -> 0")


def coefficients(omega: float, p: ModelParams) -> ScatteringCoefficients:
    """Reflection, transmission, phase shift and susceptibility at ``omega``.

    Below the gap the same closed forms are continued with ``Im k > 0``; the
    phase shift is then complex.
    """
    _check_frequency(omega, p)
    k = dispersion_k(omega, p)
    if p.kappa == 0:
        return ScatteringCoefficients(omega, k, 0j, 1 + 0j, 0j, 0j)

    w2 = omega * omega
    num = w2 - p.Omega0**2
    den = w2 - p.Omega_kappa**2
    # g = tan(eta), the ratio of the driving-spring force to the string's radiation impedance
    g = p.kappa * num / (2 * k * den)
    try:
        tau = 1 / (1 + 1j * g)
        rho = -1 / (1 - 1j * (2 * k / p.kappa) * (den / num)) if num != 0 else 0j
        chi = (p.kappa / SQRT_2PI) / (-den - 1j * p.kappa * num / (2 * k))
    except ZeroDivisionError:
        raise PoleError(f"tau has a pole at omega={omega} (bound-state frequency)") from None

    if k.imag == 0.0:
        eta = complex(math.atan(g.real))
        phase = cmath.exp(-2j * eta.real)
        rho_eta = -0.5 + 0.5 * phase
        tau_eta = 0.5 + 0.5 * phase
        if abs(rho_eta - rho) > _ETA_CROSSCHECK_TOL or abs(tau_eta - tau) > _ETA_CROSSCHECK_TOL:
            raise InternalConsistencyError(
                f"phase-shift and rational forms disagree at omega={omega}: "
                f"rho={rho} vs {rho_eta}")
    else:
        try:
            eta = cmath.atan(g)
        except (ValueError, ZeroDivisionError):
            raise PoleError(f"tau has a pole at omega={omega} (bound-state frequency)") from None
    return ScatteringCoefficients(omega, k, rho, tau, eta, chi)


def solve_scattering_direct(omega: float, p: ModelParams) -> tuple[complex, complex, complex]:
    """Solve the matching conditions at ``x = 0`` as a 2x2 linear system.

    Unknowns are ``rho`` and the oscillator amplitude ``chi``; continuity
    gives ``tau = 1 + rho``.  Independent of the closed forms used in
    :func:`coefficients`.
    """
    if not omega > p.omega0:
        raise ParameterError("the direct solve needs a travelling wave, omega > omega0")
    k = math.sqrt(omega * omega - p.omega0**2)
    a = 1 / SQRT_2PI
    kap = p.kappa
    # slope jump: 2ik a rho = kappa (a (1 + rho) - chi)
    # oscillator: (Omega_kappa^2 - omega^2) chi = kappa a (1 + rho)
    m = np.array([[2j * k * a - kap * a, kap],
                  [-kap * a, p.Omega_kappa**2 - omega * omega]], dtype=complex)
    rhs = np.array([kap * a, kap * a], dtype=complex)
    try:
        rho, chi = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        raise PoleError(f"matching system is singular at omega={omega}") from None
    return complex(rho), complex(1 + rho), complex(chi)


def reflection_probability(omega: float, p: ModelParams) -> float:
    """``|rho|^2``, continued to its limit 1 at the resonance."""
    if p.kappa > 0 and omega == p.Omega_kappa:
        return 1.0
    return abs(coefficients(omega, p).rho) ** 2


def s_matrix(omega: float, p: ModelParams) -> np.ndarray:
    c = coefficients(omega, p)
    if not c.propagating:
        raise ParameterError("the S matrix is defined for omega > omega0 only")
    t, r = c.tau.conjugate(), c.rho.conjugate()
    return np.array([[t, r], [r, t]], dtype=complex)


def t_matrix(omega: float, p: ModelParams) -> np.ndarray:
    """Transfer matrix mapping left-side amplitudes (C-, D-) to right-side (C+, D+)."""
    if p.kappa > 0 and omega == p.Omega_kappa:
        raise ResonanceError("tau = 0 at the resonance: the transfer matrix does not exist")
    c = coefficients(omega, p)
    if not c.propagating:
        raise ParameterError("the transfer matrix is defined for omega > omega0 only")
    r = c.rho / c.tau
    return np.array([[1 + r, r], [-r, 1 / c.tau]], dtype=complex)


def coefficients_from_t(t: np.ndarray) -> tuple[complex, complex]:
    """Recover ``(rho, tau)`` from a single-scatterer transfer matrix."""
    tau = 1 / t[1, 1]
    return complex(t[0, 1] * tau), complex(tau)


def translate_transfer(t: np.ndarray, k: float, position: float) -> np.ndarray:
    """Transfer matrix of the same scatterer moved from ``x = 0`` to ``x = position``."""
    phase = np.diag([np.exp(1j * k * position), np.exp(-1j * k * position)])
    return np.linalg.inv(phase) @ t @ phase


def compose_transfer(ts: Sequence[np.ndarray], det_tol: float = 1e-10) -> np.ndarray:
    """Chain transfer matrices ordered from left to right along the string.

    The wave meets ``ts[0]`` first, so the result is ``ts[-1] @ ... @ ts[0]``.
    """
    ts = list(ts)
    if not ts:
        raise ParameterError("compose_transfer needs at least one matrix")
    out = np.eye(2, dtype=complex)
    for i, t in enumerate(ts):
        t = np.asarray(t, dtype=complex)
        if t.shape != (2, 2):
            raise ParameterError(f"matrix {i} has shape {t.shape}")
        if abs(np.linalg.det(t) - 1) > det_tol:
            raise ParameterError(f"matrix {i} is not unimodular (det={np.linalg.det(t)})")
        out = t @ out
    return out


def _abs_rho(omega: float, p: ModelParams) -> float:
    return abs(coefficients(omega, p).rho)


def _half_width_edge(p: ModelParams, direction: int, xtol: float = 1e-12) -> float:
    target = 1 / math.sqrt(2)
    w_res = p.Omega_kappa
    step = 1e-9 * w_res
    inner = w_res
    while True:
        outer = w_res + direction * step
        if direction < 0 and outer <= p.omega0:
            raise ResonanceError("width bracket reached the threshold omega0")
        if abs(outer - w_res) > 1e6 * w_res:
            raise BracketError("could not bracket the resonance width")
        if _abs_rho(outer, p) < target:
            break
        inner = outer
        step *= 2
    lo, hi = sorted((inner, outer))
    f = lambda w: _abs_rho(w, p) - target if w != w_res else 1 - target
    flo = f(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def resonance_quality(p: ModelParams) -> dict:
    """Quality factor of the scattering resonance at ``Omega_kappa``.

    ``q_numeric`` is ``Omega_kappa / width`` with the full width measured
    where ``|rho| = 1/sqrt(2)``; ``q_perturbative`` is the small-coupling
    estimate ``2 Omega0^2 sqrt(Omega0^2 - omega0^2) / kappa^2``.
    """
    if p.kappa <= 0:
        raise ResonanceError("no coupling, no resonance")
    if p.omega0 >= p.Omega0:
        raise ResonanceError("omega0 >= Omega0: no sharp scattering resonance")
    lo = _half_width_edge(p, -1)
    hi = _half_width_edge(p, +1)
    width = hi - lo
    q_pert = 2 * p.Omega0**2 * math.sqrt(p.Omega0**2 - p.omega0**2) / p.kappa**2
    return {"q_numeric": p.Omega_kappa / width, "q_perturbative": q_pert,
            "omega_low": lo, "omega_high": hi, "width": width}


@dataclass(frozen=True)
class SweepRow:
    coeffs: ScatteringCoefficients
    shifted: bool  # sample moved off an excluded pole by half a grid step


SWEEP_HEADER = ["omega", "k", "re_rho", "im_rho", "abs_rho", "re_tau", "im_tau",
                "abs_tau", "eta", "re_chi", "im_chi"]


def sweep(omega_min: float, omega_max: float, n_points: int, p: ModelParams,
          workers: int = 1) -> list[SweepRow]:
    """Uniform frequency sweep above the gap.

    Samples landing exactly on ``Omega_kappa`` are moved by half a grid
    step and flagged.  Rows are always returned in frequency order.
    """
    if n_points < 2:
        raise ParameterError("n_points must be >= 2")
    if not (p.omega0 < omega_min < omega_max):
        raise ParameterError(f"need omega0 < omega_min < omega_max, got "
                             f"{p.omega0}, {omega_min}, {omega_max}")
    grid = np.linspace(omega_min, omega_max, n_points)
    half = 0.5 * (grid[1] - grid[0])

    def one(w: float) -> SweepRow:
        shifted = False
        if p.kappa > 0 and w == p.Omega_kappa:
            w, shifted = w + half, True
        return SweepRow(coefficients(float(w), p), shifted)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, grid))
    return [one(w) for w in grid]


def _fmt(x: float) -> str:
    return format(x, ".17g")


def sweep_rows_as_records(rows: Iterable[SweepRow]) -> list[list[str]]:
    out = []
    for row in rows:
        c = row.coeffs
        out.append([_fmt(c.omega), _fmt(c.k.real), _fmt(c.rho.real), _fmt(c.rho.imag),
                    _fmt(abs(c.rho)), _fmt(c.tau.real), _fmt(c.tau.imag), _fmt(abs(c.tau)),
                    _fmt(c.eta.real), _fmt(c.chi.real), _fmt(c.chi.imag)])
    return out


def write_sweep_csv(rows: Iterable[SweepRow], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(sweep_rows_as_records(rows))
