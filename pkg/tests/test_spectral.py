import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from springstring.cubic import cubic_residuals
from springstring.errors import ParameterError
from springstring.model import ModelParams
from springstring.spectral import (abraham_lorentz_residual, abraham_lorentz_rhs, bound_mode,
                                   dalembert_cubic, dalembert_poles, kg_cubic, kg_poles,
                                   perturbative_dalembert, perturbative_gamma, perturbative_kg,
                                   perturbative_omega_b, poles_match_scattering, u_cubic,
                                   xi0_x_residual)


def test_dalembert_examples():
    p = ModelParams(0.1, 1.0)
    ps = dalembert_poles(p)
    assert abs(ps.root0 - (-0.045)) < 1e-3
    assert abs(ps.root_plus.real + 0.0025) < 1e-3
    assert abs(ps.root_plus.imag - 1.05) < 2e-3
    assert ps.gamma == pytest.approx(0.005, abs=1e-3)
    assert ps.root_minus == ps.root_plus.conjugate()
    assert max(ps.residuals) < 1e-10


def test_dalembert_uncoupled():
    ps = dalembert_poles(ModelParams(0.0, 1.3))
    assert ps.uncoupled and ps.gamma == 0
    assert set(ps.roots) == {0j, 1.3j, -1.3j}


def test_dalembert_requires_massless_string():
    with pytest.raises(ParameterError):
        dalembert_poles(ModelParams(0.1, 1, 0.2))


@given(st.floats(1e-3, 5), st.floats(0.1, 5))
def test_dalembert_roots_decay(kappa, Omega0):
    ps = dalembert_poles(ModelParams(kappa, Omega0))
    assert all(z.real < 0 for z in ps.roots)
    assert max(ps.residuals) <= 1e-10
    coeffs = dalembert_cubic(ModelParams(kappa, Omega0))
    assert abs(sum(ps.roots) + coeffs[1]) <= 1e-10 * max(1, abs(ps.root_plus))


def test_kg_examples():
    p = ModelParams(0.1, 1.0, 0.5)
    ps = kg_poles(p)
    z0p, zpp = perturbative_kg(p)
    assert abs(ps.root0 - z0p) < 1e-3
    assert abs(ps.root_plus - zpp) < 1e-3
    assert ps.gamma == pytest.approx(perturbative_gamma(p), abs=1e-3)
    assert max(ps.residuals) < 1e-10
    # the real root sits below the gap and is not reached by outgoing waves
    assert not ps.physical[0] and ps.physical[1] and ps.physical[2]


def test_kg_reduces_to_dalembert():
    p = ModelParams(0.1, 1.0, 1e-6)
    kg, da = kg_poles(p), dalembert_poles(p.replace(omega0=0.0))
    assert abs(kg.root0 - da.root0**2) < 1e-6
    zz = [da.root_plus**2, da.root_minus**2]
    assert min(abs(kg.root_plus - z) for z in zz) < 1e-6
    assert min(abs(kg.root_minus - z) for z in zz) < 1e-6


@given(st.floats(1e-3, 2), st.floats(0.2, 3), st.floats(0, 3))
def test_kg_roots_zero_the_radiation_bracket(kappa, Omega0, omega0):
    # omega0 == Omega0 puts a root on the branch point k = 0, where the
    # square root amplifies rounding; that coincidence is checked separately
    assume(abs(omega0 - Omega0) > 1e-3)
    p = ModelParams(kappa, Omega0, omega0)
    ps = kg_poles(p)
    assert max(cubic_residuals(kg_cubic(p), ps.roots)) <= 1e-10
    for w, ok in zip(ps.frequencies, ps.physical):
        assert w.imag <= 0
        m = poles_match_scattering(p, w)
        assert m["residual"] < 1e-8
        assert m["outgoing"] == ok
        if ok:
            assert m["inv_tau"] < 1e-6


def test_threshold_coincidence_root_sits_at_the_gap():
    p = ModelParams(1.0, 1.0, 1.0)
    ps = kg_poles(p)
    assert min(abs(Z + p.omega0**2) for Z in ps.roots) < 1e-12
    assert max(ps.residuals) < 1e-12


def test_non_root_is_rejected():
    p = ModelParams(0.1, 1.0, 0.5)
    assert poles_match_scattering(p, p.Omega_kappa + 1)["residual"] > 1e-2


def test_dalembert_roots_satisfy_massless_bracket():
    p = ModelParams(0.3, 1.0)
    for z in dalembert_poles(p).roots:
        assert poles_match_scattering(p, 1j * z)["residual"] < 1e-10


def test_bound_mode_example():
    p = ModelParams(0.3, 1.0, 1.5)
    bm = bound_mode(p)
    assert bm is not None
    assert bm.u_residual < 1e-12
    assert p.Omega0 < bm.omega_b < min(p.omega0, p.Omega_kappa)
    assert bm.omega_b == pytest.approx(math.sqrt(p.omega0**2 - p.kappa * bm.u_b**2), rel=1e-15)
    assert bm.decay_length == pytest.approx(1 / math.sqrt(p.omega0**2 - bm.omega_b**2), rel=1e-12)
    assert bm.x_amplitude == pytest.approx(p.kappa * bm.c_b / (p.Omega_kappa**2 - bm.omega_b**2))
    # Vieta: the other two roots sum to a negative number, so u_b is the only positive root
    c = u_cubic(p)
    assert abs(sum(bm.u_roots) + c[1] / c[0]) < 1e-12
    assert sum(1 for r in bm.u_roots if r.imag == 0 and r.real > 0) == 1


@pytest.mark.parametrize("kappa", [0.01, 0.3, 3.0])
def test_no_bound_mode_below_threshold(kappa):
    assert bound_mode(ModelParams(kappa, 1.0, 0.5)) is None


def test_bound_mode_needs_coupling():
    assert bound_mode(ModelParams(0.0, 1.0, 1.5)) is None


@given(st.floats(1e-3, 3), st.floats(0.2, 3), st.floats(1.001, 3))
def test_bound_mode_window(kappa, Omega0, ratio):
    p = ModelParams(kappa, Omega0, ratio * Omega0)
    bm = bound_mode(p)
    assert bm is not None and bm.u_b > 0
    assert p.Omega0 < bm.omega_b < p.omega0
    assert bm.omega_b < p.Omega_kappa
    assert bm.u_residual < 1e-12


def _ratio(f_exact, f_pert, p1, p2):
    return abs(f_exact(p1) - f_pert(p1)) / abs(f_exact(p2) - f_pert(p2))


def test_perturbative_orders():
    pairs = [
        (ModelParams(0.1, 1.0), ModelParams(0.05, 1.0),
         lambda p: dalembert_poles(p).root0, lambda p: perturbative_dalembert(p)[0]),
        (ModelParams(0.1, 1.0), ModelParams(0.05, 1.0),
         lambda p: dalembert_poles(p).root_plus, lambda p: perturbative_dalembert(p)[1]),
        (ModelParams(0.1, 1.0, 0.5), ModelParams(0.05, 1.0, 0.5),
         lambda p: kg_poles(p).root_plus, lambda p: perturbative_kg(p)[1]),
        (ModelParams(0.1, 1.0, 1.5), ModelParams(0.05, 1.0, 1.5),
         lambda p: bound_mode(p).omega_b, perturbative_omega_b),
    ]
    for p1, p2, exact, pert in pairs:
        assert 4 <= _ratio(exact, pert, p1, p2) <= 16


def test_kg_real_root_is_fourth_order():
    r = _ratio(lambda p: kg_poles(p).root0, lambda p: perturbative_kg(p)[0],
               ModelParams(0.1, 1.0, 0.5), ModelParams(0.05, 1.0, 0.5))
    assert 8 <= r <= 32


def test_abraham_lorentz():
    p = ModelParams(0.2, 1.0)
    assert abraham_lorentz_rhs(1.0, 0.0, 0.0, p) == 0
    for z in dalembert_poles(p).roots:
        assert abs(abraham_lorentz_residual(z, p)) < 1e-10
    with pytest.raises(ParameterError):
        abraham_lorentz_rhs(0, 1, 1, ModelParams(0.0, 1.0))
    with pytest.raises(ParameterError):
        abraham_lorentz_rhs(0, 1, 1, ModelParams(0.1, 1.0, 0.5))


def test_strong_coupling_limit_is_damped_oscillator():
    # divide the characteristic cubic by kappa/2 and let kappa grow: z^2 + 2z + Omega0^2
    p = ModelParams(1e8, 1.5)
    ps = dalembert_poles(p)
    expected = np.roots([1, 2, p.Omega0**2])
    slow = sorted(ps.roots, key=abs)[:2]
    for r in expected:
        assert min(abs(r - s) for s in slow) < 1e-6


def test_xi0_residual_zero_for_outgoing_wave():
    p = ModelParams(0.4, 1.0)
    z = dalembert_poles(p).root_plus
    # outgoing radiation: xi0 = kappa X / (2z + kappa)
    x = 1.0
    xi0 = p.kappa * x / (2 * z + p.kappa)
    assert abs(xi0_x_residual(xi0, z * xi0, x, p)) < 1e-14
