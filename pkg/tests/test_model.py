import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from springstring.errors import ParameterError
from springstring.model import (FieldState, ModelParams, dispersion_k, dispersion_omega,
                                mean_energy_current, outgoing_k, shifted_frequency, total_energy)

positive = st.floats(0.01, 10.0)


def test_shifted_frequency_examples():
    assert shifted_frequency(ModelParams(0, 1)) == 1
    assert shifted_frequency(ModelParams(0.25, 1)) == pytest.approx(1.1180339887, abs=1e-10)
    assert shifted_frequency(ModelParams(3, 2)) == pytest.approx(math.sqrt(7), rel=1e-15)


@pytest.mark.parametrize("kw", [dict(kappa=-1, Omega0=1), dict(kappa=1, Omega0=0),
                                dict(kappa=1, Omega0=1, omega0=-0.1),
                                dict(kappa=float("nan"), Omega0=1)])
def test_params_rejected(kw):
    with pytest.raises(ParameterError):
        ModelParams(**kw)


@given(st.floats(0, 10), positive)
def test_omega_kappa_at_least_omega0(kappa, Omega0):
    p = ModelParams(kappa, Omega0)
    assert p.Omega_kappa >= Omega0
    assert (p.Omega_kappa == Omega0) == (kappa == 0 or Omega0**2 + kappa == Omega0**2)


def test_dispersion_examples():
    p = ModelParams(0.1, 1, 3)
    assert dispersion_k(3, p) == 0
    assert dispersion_k(5, p) == 4
    assert dispersion_k(0.5, ModelParams(0.1, 1, 1.3)) == pytest.approx(1.2j, abs=1e-15)
    assert dispersion_omega(0, ModelParams(0, 1, 2)) == 2
    assert dispersion_omega(4, p) == 5


@given(st.floats(-50, 50), st.floats(0, 5))
def test_dispersion_round_trip(k, omega0):
    p = ModelParams(0.1, 1, omega0)
    w = dispersion_omega(k, p)
    assert dispersion_omega(-k, p) == w
    assert dispersion_k(w, p).real == pytest.approx(abs(k), rel=1e-12, abs=1e-7)


def test_evanescent_branch_has_positive_imaginary_part():
    k = dispersion_k(0.2, ModelParams(0.1, 1, 0.9))
    assert k.real == 0 and k.imag > 0


def test_outgoing_k_on_real_axis():
    p = ModelParams(0.1, 1, 0.5)
    for w in (0.7, 1.3, 4.0):
        assert outgoing_k(w, p) == pytest.approx(dispersion_k(w, p), abs=1e-14)
    assert outgoing_k(-2.0, p).real < 0


def test_mean_energy_current_examples():
    p = ModelParams(0.1, 1, 3)
    assert mean_energy_current(1, 1.5, 1, p) == 0
    assert mean_energy_current(1, 1.5, -1, p) == 0
    assert mean_energy_current(1, 5, 1, p) == pytest.approx(10)
    assert mean_energy_current(2j, 5, -1, p) == pytest.approx(-40)


@given(st.complex_numbers(max_magnitude=10), st.floats(0, 10), st.floats(0, 3))
def test_mean_energy_current_properties(a, omega, omega0):
    p = ModelParams(0.1, 1, omega0)
    right = mean_energy_current(a, omega, 1, p)
    assert mean_energy_current(a, omega, -1, p) == -right
    assert mean_energy_current(2 * a, omega, 1, p) == pytest.approx(4 * right)
    if omega <= omega0:
        assert right == 0


def _state(n, xi=0.0, x=0.0, pi=0.0, p_osc=0.0):
    return FieldState(np.full(n, xi, float), np.full(n, pi, float), x, p_osc)


def test_total_energy_examples():
    p = ModelParams(0.3, 1.2, 0.7)
    assert total_energy(_state(11), p, 0.1) == 0
    assert total_energy(_state(11, x=2.0), p, 0.1) == pytest.approx(0.5 * p.Omega_kappa**2 * 4)
    c, n, dx = 0.4, 101, 0.05
    length = (n - 1) * dx
    # no gradient and an unstretched coupling spring: mattress term plus the bare oscillator
    expected = 0.5 * p.omega0**2 * c * c * length + 0.5 * p.Omega0**2 * c * c
    assert total_energy(_state(n, xi=c, x=c), p, dx) == pytest.approx(expected)


@given(st.integers(1, 20), st.floats(-3, 3), st.integers(0, 2**31 - 1))
def test_total_energy_nonnegative_and_quadratic(half, lam, seed):
    rng = np.random.default_rng(seed)
    n = 2 * half + 1
    s = FieldState(rng.normal(size=n), rng.normal(size=n), rng.normal(), rng.normal())
    p = ModelParams(0.5, 1.0, 0.3)
    e = total_energy(s, p, 0.1)
    assert e >= 0
    assert total_energy(s.scaled(lam), p, 0.1) == pytest.approx(lam * lam * e, rel=1e-12, abs=1e-300)


def test_field_state_validation():
    with pytest.raises(ParameterError):
        FieldState(np.zeros(4), np.zeros(4))
    with pytest.raises(ParameterError):
        FieldState(np.zeros(5), np.zeros(7))
