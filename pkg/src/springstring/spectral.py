"""Complex characteristic frequencies, decay rates and the bound mode.

Three polynomial problems live here:

* the d'Alembert string (``omega0 = 0``): ``X ~ exp(z t)`` with
  ``z^3 + kappa/2 z^2 + Omega_kappa^2 z + kappa Omega0^2 / 2 = 0``;
* the Klein-Gordon string, with ``Z = -omega^2`` a root of
  ``(Z + omega0^2)(Z + Omega_kappa^2)^2 - kappa^2/4 (Z + Omega0^2)^2 = 0``;
* the bound mode, ``u = |k| / sqrt(kappa)`` the positive root of
  ``2u(u^2 + Y + 1) + sqrt(kappa)(u^2 + Y) = 0`` with
  ``Y = (Omega0^2 - omega0^2) / kappa``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .cubic import cubic_residuals, eval_poly, solve_cubic
from .errors import BracketError, ParameterError
from .model import ModelParams, outgoing_k

__all__ = [
    "PoleSet",
    "BoundMode",
    "dalembert_cubic",
    "kg_cubic",
    "u_cubic",
    "dalembert_poles",
    "kg_poles",
    "physical_frequency",
    "scattering_bracket",
    "poles_match_scattering",
    "bound_mode",
    "abraham_lorentz_rhs",
    "abraham_lorentz_residual",
    "xi0_x_residual",
    "perturbative_dalembert",
    "perturbative_kg",
    "perturbative_omega_b",
    "perturbative_gamma",
]


@dataclass(frozen=True)
class PoleSet:
    """Roots of one characteristic cubic.

    For ``kind == "dalembert"`` the roots are growth exponents ``z`` (``X ~
    exp(z t)``); for ``kind == "klein-gordon"`` they are ``Z = -omega^2``.
    ``root0`` is the real root and ``root_plus`` the member of the complex
    pair with positive imaginary part (``z``) or negative imaginary part (``Z``),
    matching the usual labelling of ``z+`` and ``Z+``.
    """

    kind: str
    root0: complex
    root_plus: complex
    root_minus: complex
    gamma: float
    frequencies: tuple[complex, complex, complex]
    physical: tuple[bool, bool, bool]
    residuals: tuple[float, float, float]
    coefficients: tuple[float, float, float, float]
    uncoupled: bool = False

    @property
    def roots(self) -> tuple[complex, complex, complex]:
        return (self.root0, self.root_plus, self.root_minus)

    @property
    def omega_min(self) -> complex | None:
        """Decaying physical frequency closest to the real axis."""
        decaying = [w for w, ok in zip(self.frequencies, self.physical) if ok and w.imag < 0]
        return max(decaying, key=lambda w: w.imag) if decaying else None


@dataclass(frozen=True)
class BoundMode:
    omega_b: float
    u_b: float
    upsilon: float
    decay_length: float
    c_b: float
    x_amplitude: float
    u_residual: float
    u_roots: tuple[complex, complex, complex] = field(repr=False, default=())

    @property
    def alpha(self) -> float:
        """Spatial decay constant, ``sqrt(omega0^2 - omega_b^2)``."""
        return 1 / self.decay_length


def dalembert_cubic(p: ModelParams) -> tuple[float, float, float, float]:
    return (1.0, 0.5 * p.kappa, p.Omega_kappa**2, 0.5 * p.kappa * p.Omega0**2)


def kg_cubic(p: ModelParams) -> tuple[float, float, float, float]:
    a = p.omega0**2
    b = p.Omega_kappa**2
    c = p.Omega0**2
    q = p.kappa**2 / 4
    return (1.0, 2 * b + a - q, b * b + 2 * a * b - 2 * q * c, a * b * b - q * c * c)


def u_cubic(p: ModelParams) -> tuple[float, float, float, float]:
    s = math.sqrt(p.kappa)
    y = (p.Omega0**2 - p.omega0**2) / p.kappa
    return (2.0, s, 2 * (y + 1), s * y)


def scattering_bracket(omega: complex, k: complex, p: ModelParams) -> complex:
    """``kappa (omega^2 - Omega0^2) - 2 i k (omega^2 - Omega_kappa^2)``.

    Vanishes exactly where ``1/tau`` does (for the same branch of ``k``).
    """
    w2 = omega * omega
    return p.kappa * (w2 - p.Omega0**2) - 2j * k * (w2 - p.Omega_kappa**2)


def physical_frequency(Z: complex) -> complex:
    """``i sqrt(Z)`` on the branch with ``Im <= 0``, ties broken toward ``Re >= 0``."""
    w = 1j * cmath.sqrt(Z)
    if w.imag > 0 or (w.imag == 0 and w.real < 0):
        w = -w
    return w


def _split_real_and_pair(roots, prefer_positive_imag: bool):
    """Return (real_root, pair_plus, pair_minus) from three cubic roots."""
    pair = [r for r in roots if r.imag != 0]
    if len(pair) == 2:
        real = next(r for r in roots if r.imag == 0)
        plus = max(pair, key=lambda r: r.imag) if prefer_positive_imag else min(pair, key=lambda r: r.imag)
        minus = pair[1] if plus is pair[0] else pair[0]
        return real, plus, minus
    return None


def _is_physical(omega: complex, p: ModelParams) -> bool:
    k = outgoing_k(omega, p)
    scale = abs(p.kappa * (omega * omega - p.Omega0**2)) + abs(2 * k * (omega * omega - p.Omega_kappa**2))
    if scale == 0:
        return True
    return abs(scattering_bracket(omega, k, p)) <= abs(scattering_bracket(omega, -k, p))


def _gamma(freqs, physical) -> float:
    decaying = [w.imag for w, ok in zip(freqs, physical) if ok and w.imag < 0]
    return -2 * max(decaying) if decaying else 0.0


def dalembert_poles(p: ModelParams) -> PoleSet:
    """Exponents of ``X(t)`` for the dispersionless string.

    All three roots have a negative real part once ``kappa > 0``; the energy
    decay rate is ``-2 Re z+``.
    """
    if p.omega0 != 0:
        raise ParameterError("dalembert_poles needs omega0 == 0")
    coeffs = dalembert_cubic(p)
    if p.kappa == 0:
        roots = (0j, 1j * p.Omega0, -1j * p.Omega0)
        return PoleSet("dalembert", *roots, gamma=0.0,
                       frequencies=tuple(1j * z for z in roots),
                       physical=(True, True, True), residuals=(0.0, 0.0, 0.0),
                       coefficients=coeffs, uncoupled=True)
    roots = solve_cubic(*coeffs)
    split = _split_real_and_pair(roots, prefer_positive_imag=True)
    if split is None:
        # overdamped: three real exponents, the most negative plays z0
        z0, zp, zm = roots[0], roots[2], roots[1]
    else:
        z0, zp, zm = split
    ordered = (z0, zp, zm)
    freqs = tuple(1j * z for z in ordered)
    gamma = -2 * max(zp.real, zm.real)
    return PoleSet("dalembert", z0, zp, zm, gamma=gamma, frequencies=freqs,
                   physical=(True, True, True),
                   residuals=tuple(cubic_residuals(coeffs, ordered)),
                   coefficients=coeffs)


def kg_poles(p: ModelParams) -> PoleSet:
    """Roots ``Z`` of the Klein-Gordon characteristic cubic.

    ``frequencies`` holds ``i sqrt(Z)`` with non-positive imaginary part and
    ``physical`` tells whether that frequency is a pole of ``tau`` reached by
    continuing outgoing waves (rather than a root introduced by squaring the
    radiation condition).  ``gamma`` is ``-2 Im`` of the decaying physical
    frequency nearest the real axis.
    """
    coeffs = kg_cubic(p)
    roots = solve_cubic(*coeffs)
    split = _split_real_and_pair(roots, prefer_positive_imag=False)
    if split is None:
        estimate = -p.omega0**2 + p.kappa**2 / 4
        z0 = min(roots, key=lambda r: abs(r - estimate))
        rest = [r for r in roots if r is not z0]
        ordered = (z0, rest[0], rest[1])
    else:
        ordered = split
    if p.kappa > 0:
        ordered = _polish_kg_roots(ordered, p, coeffs, paired=split is not None)
    freqs = tuple(physical_frequency(Z) for Z in ordered)
    if p.kappa == 0:
        physical = (True, True, True)
    else:
        physical = tuple(_is_physical(w, p) for w in freqs)
    return PoleSet("klein-gordon", *ordered, gamma=_gamma(freqs, physical),
                   frequencies=freqs, physical=physical,
                   residuals=tuple(cubic_residuals(coeffs, ordered)),
                   coefficients=coeffs, uncoupled=p.kappa == 0)


def _polish_on_bracket(omega: complex, p: ModelParams, steps: int = 4) -> complex:
    """Newton steps on the radiation bracket, on whichever branch of ``k`` it vanishes.

    At weak coupling the cubic in ``Z`` has a nearly double pair of roots
    and loses about half the digits; the bracket has simple zeros in ``omega``.
    """
    k = outgoing_k(omega, p)
    if abs(k) < 1e-6:  # next to the branch point the bracket is not smooth
        return omega
    sign = 1 if abs(scattering_bracket(omega, k, p)) <= abs(scattering_bracket(omega, -k, p)) else -1
    for _ in range(steps):
        k = sign * outgoing_k(omega, p)
        if abs(k) < 1e-6:
            break
        f = scattering_bracket(omega, k, p)
        w2 = omega * omega
        df = 2 * p.kappa * omega - 2j * ((omega / k) * (w2 - p.Omega_kappa**2) + 2 * omega * k)
        if f == 0 or df == 0:
            break
        new = omega - f / df
        k_new = sign * outgoing_k(new, p)
        if abs(scattering_bracket(new, k_new, p)) >= abs(f):
            break
        omega = new
    return omega


def _polish_kg_roots(roots, p, coeffs, paired: bool):
    out = []
    for Z in roots:
        w = _polish_on_bracket(physical_frequency(Z), p)
        Zn = -w * w
        # the cubic is flat near a double root, so only ask that it still be tiny there
        before, after = cubic_residuals(coeffs, [Z, Zn])
        if after <= max(before, 1e-14):
            out.append(Zn)
        else:
            out.append(Z)
    if paired:
        z0, zp, _ = out
        out = [complex(z0.real), zp, zp.conjugate()]
    return tuple(out)


def poles_match_scattering(p: ModelParams, pole: complex) -> dict:
    """Check that a complex frequency is a zero of the radiation bracket.

    Both branches ``+k`` and ``-k`` are tried; the report gives the bracket
    residual (scaled by the size of its two terms) on the better branch,
    whether that branch is the outgoing one, and ``|1/tau|`` there.
    """
    pole = complex(pole)
    k = outgoing_k(pole, p)
    w2 = pole * pole
    scale = abs(p.kappa * (w2 - p.Omega0**2)) + abs(2 * k * (w2 - p.Omega_kappa**2))
    scale = scale or 1.0
    res_out = abs(scattering_bracket(pole, k, p)) / scale
    res_in = abs(scattering_bracket(pole, -k, p)) / scale
    branch_k = k if res_out <= res_in else -k
    denom = 2 * branch_k * (w2 - p.Omega_kappa**2)
    inv_tau = (1j * scattering_bracket(pole, branch_k, p) / denom) if denom != 0 else complex("inf")
    return {"residual": min(res_out, res_in), "outgoing": res_out <= res_in,
            "k": branch_k, "inv_tau": abs(inv_tau)}


def _newton_bisect(f, df, lo, hi, xtol=1e-15, maxiter=200):
    """Safeguarded Newton iteration on a sign-changing bracket."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError("no sign change on the bracket")
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        d = df(x)
        xn = x - fx / d if d != 0 else lo - 1.0
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= xtol * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def bound_mode(p: ModelParams) -> BoundMode | None:
    """Localised non-radiating mode, present iff ``omega0 > Omega0``."""
    if p.kappa <= 0 or p.omega0 <= p.Omega0:
        return None
    coeffs = u_cubic(p)
    y = coeffs[3] / coeffs[1]
    f = lambda u: eval_poly(coeffs, u).real
    df = lambda u: (6 * u * u + 2 * coeffs[1] * u + coeffs[2])
    u_max = 1 + abs(y) + 1 / math.sqrt(p.kappa)
    u_b = _newton_bisect(f, df, 0.0, u_max)
    roots = tuple(solve_cubic(*coeffs))
    positive = [r.real for r in roots if r.imag == 0 and r.real > 0]
    if len(positive) != 1 or abs(positive[0] - u_b) > 1e-8 * max(1.0, u_b):
        raise BracketError(f"bound-mode root mismatch: bisection {u_b}, cubic {roots}")

    omega_b = math.sqrt(p.omega0**2 - p.kappa * u_b * u_b)
    alpha = math.sqrt(p.kappa) * u_b
    gap = p.Omega_kappa**2 - omega_b**2
    c_b = (1 / alpha + p.kappa**2 / gap**2) ** -0.5
    return BoundMode(omega_b=omega_b, u_b=u_b, upsilon=y, decay_length=1 / alpha,
                     c_b=c_b, x_amplitude=p.kappa * c_b / gap,
                     u_residual=abs(f(u_b)) / max(abs(c) for c in coeffs),
                     u_roots=roots)


def abraham_lorentz_rhs(x, xdot, xdddot, p: ModelParams):
    """Radiation-reaction force on the oscillator for a d'Alembert string."""
    if p.kappa == 0:
        raise ParameterError("the radiation-reaction form needs kappa > 0")
    if p.omega0 != 0:
        raise ParameterError("the radiation-reaction form holds for omega0 == 0 only")
    return -(2 * p.Omega_kappa**2 / p.kappa) * xdot - (2 / p.kappa) * xdddot


def abraham_lorentz_residual(z: complex, p: ModelParams) -> complex:
    """Residual of ``X'' + Omega0^2 X = rhs`` for ``X = exp(z t)`` at ``t = 0``."""
    return z * z + p.Omega0**2 - abraham_lorentz_rhs(1.0, z, z**3, p)


def xi0_x_residual(xi0, xi0dot, x, p: ModelParams):
    """``2 xi0' + kappa xi0 - kappa X``, zero for purely outgoing radiation."""
    return 2 * xi0dot + p.kappa * xi0 - p.kappa * x


def perturbative_dalembert(p: ModelParams) -> tuple[complex, complex]:
    """Second-order expansions of ``z0`` and ``z+``."""
    k, w = p.kappa, p.Omega0
    z0 = -k / 2 + k * k / (2 * w * w)
    zp = complex(-k * k / (4 * w * w), w + k / (2 * w) - k * k / (8 * w**3))
    return complex(z0), zp


def perturbative_kg(p: ModelParams) -> tuple[complex, complex]:
    """Expansions of ``Z0`` (third order) and ``Z+`` (second order)."""
    k, w, g = p.kappa, p.Omega0, p.omega0
    z0 = -g * g + k * k / 4 - k**3 / (2 * (w * w - g * g))
    zp = complex(-w * w - k, -k * k / (2 * math.sqrt(w * w - g * g)))
    return complex(z0), zp


def perturbative_omega_b(p: ModelParams) -> float:
    k, w, g = p.kappa, p.Omega0, p.omega0
    s = math.sqrt(g * g - w * w)
    return w + k / (2 * w) - (2 * w * w + s) / (w**3 * s) * k * k / 8


def perturbative_gamma(p: ModelParams) -> float:
    return p.kappa**2 / (2 * p.Omega0 * math.sqrt(p.Omega0**2 - p.omega0**2))
