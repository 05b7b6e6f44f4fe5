"""Closed-form cubic root finder with Newton polishing."""

from __future__ import annotations

import cmath
import math

from .errors import ParameterError

__all__ = ["solve_cubic", "eval_poly", "cubic_residuals"]

_OMEGA3 = complex(-0.5, math.sqrt(3) / 2)  # primitive cube root of unity


def eval_poly(coeffs, z):
    """Horner evaluation, highest degree first."""
    acc = 0j
    for c in coeffs:
        acc = acc * z + c
    return acc


def _derivative(coeffs):
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def _cbrt(w: complex) -> complex:
    if w == 0:
        return 0j
    if w.imag == 0 and w.real > 0:
        return complex(w.real ** (1 / 3))
    return cmath.exp(cmath.log(w) / 3)


def _newton_polish(coeffs, z, steps=2):
    d = _derivative(coeffs)
    for _ in range(steps):
        f = eval_poly(coeffs, z)
        fp = eval_poly(d, z)
        if fp == 0 or f == 0:
            break
        znew = z - f / fp
        if abs(eval_poly(coeffs, znew)) <= abs(f):
            z = znew
        else:
            break
    return z


def _sort_key(z: complex):
    return (z.real, z.imag)


def solve_cubic(a, b, c, d) -> list[complex]:
    """All three roots of ``a z^3 + b z^2 + c z + d``.

    Cardano's formula on the depressed cubic, then two Newton steps per root.
    For real coefficients, near-real roots are snapped to the real axis when
    the polynomial has a single real root, and complex roots are returned as
    exact conjugate pairs.  Roots are ordered by real part, then imaginary
    part.
    """
    if a == 0:
        raise ParameterError("leading coefficient of the cubic is zero")
    coeffs = [complex(a), complex(b), complex(c), complex(d)]
    real_coeffs = all(v.imag == 0 for v in coeffs)
    b, c, d = (v / coeffs[0] for v in coeffs[1:])

    shift = b / 3
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + d
    disc = cmath.sqrt(q * q / 4 + p**3 / 27)
    # pick the larger of the two Cardano radicands to avoid cancellation
    w1, w2 = -q / 2 + disc, -q / 2 - disc
    w = w1 if abs(w1) >= abs(w2) else w2
    u = _cbrt(w)
    roots = []
    for j in range(3):
        uj = u * _OMEGA3**j
        t = uj - p / (3 * uj) if uj != 0 else 0j
        roots.append(t - shift)

    roots = [_newton_polish(coeffs, z) for z in roots]
    if real_coeffs:
        roots = _symmetrize(roots, coeffs)
    return sorted(roots, key=_sort_key)


def _symmetrize(roots, coeffs):
    """Restore the conjugate structure lost to rounding for real polynomials."""
    scale = max(abs(v) for v in coeffs)
    # the root closest to the real axis is real whenever the other two pair up
    roots = sorted(roots, key=lambda z: abs(z.imag))
    r0, r1, r2 = roots
    pair_like = abs(r1 - r2.conjugate()) <= 1e-8 * max(1.0, abs(r1))
    if pair_like and abs(r1.imag) > abs(r0.imag):
        real_root = complex(r0.real)
        if abs(eval_poly(coeffs, real_root)) <= abs(eval_poly(coeffs, r0)) + 1e-14 * scale:
            r0 = real_root
        m = 0.5 * (r1 + r2.conjugate())
        if m.imag < 0:
            m = m.conjugate()
        r1, r2 = m, m.conjugate()
        if r1.imag == 0:
            r1 = r2 = complex(r1.real)
        return [r0, r1, r2]
    # three real roots: drop the spurious imaginary parts
    if all(abs(z.imag) <= 1e-8 * max(1.0, abs(z)) for z in roots):
        return [complex(z.real) for z in roots]
    return roots


def cubic_residuals(coeffs, roots) -> list[float]:
    """``|p(r)| / max|coeff|`` for each root."""
    scale = max(abs(complex(v)) for v in coeffs)
    return [abs(eval_poly([complex(v) for v in coeffs], r)) / scale for r in roots]
