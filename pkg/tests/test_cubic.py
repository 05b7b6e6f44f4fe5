import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from springstring.cubic import cubic_residuals, eval_poly, solve_cubic
from springstring.errors import ParameterError

coef = st.floats(-10, 10).filter(lambda v: abs(v) > 1e-3)


def _match(found, expected, tol):
    left = list(expected)
    for r in found:
        j = min(range(len(left)), key=lambda i: abs(left[i] - r))
        assert abs(left[j] - r) < tol
        left.pop(j)


def test_roots_of_unity():
    roots = solve_cubic(1, 0, 0, -1)
    _match(roots, [1, cmath.exp(2j * cmath.pi / 3), cmath.exp(-2j * cmath.pi / 3)], 1e-14)
    assert roots[-1] == 1  # ordering by real part


def test_constructed_factorisation():
    a, b, c = 0.3, -2.0, 5.5
    coeffs = (1, -(a + b + c), a * b + b * c + a * c, -a * b * c)
    _match(solve_cubic(*coeffs), [a, b, c], 1e-12)


def test_complex_coefficients():
    rts = [1 + 2j, -0.5j, 3]
    c = np.poly(rts)
    _match(solve_cubic(*c), rts, 1e-12)


def test_zero_leading_coefficient():
    with pytest.raises(ParameterError):
        solve_cubic(0, 1, 2, 3)


@given(coef, st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_random_cubic_against_companion_matrix(a, b, c, d):
    roots = solve_cubic(a, b, c, d)
    assert max(cubic_residuals((a, b, c, d), roots)) <= 1e-10
    oracle = np.roots([a, b, c, d])
    _match(roots, oracle, 1e-5 * max(1.0, max(abs(oracle))))


@given(coef, st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_conjugate_pairs_and_vieta(a, b, c, d):
    roots = solve_cubic(a, b, c, d)
    nonreal = [r for r in roots if r.imag != 0]
    for r in nonreal:
        assert any(abs(s - r.conjugate()) <= 1e-12 * max(1, abs(r)) for s in roots)
    scale = max(1.0, max(abs(r) for r in roots))
    assert abs(sum(roots) + b / a) <= 1e-10 * scale
    assert abs(roots[0] * roots[1] * roots[2] + d / a) <= 1e-10 * scale**3


def test_eval_poly_horner():
    assert eval_poly([2, -3, 0, 5], 2) == 2 * 8 - 3 * 4 + 5
