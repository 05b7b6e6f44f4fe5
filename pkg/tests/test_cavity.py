import io
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from springstring.cavity import (CAVITY_HEADER, cavity_spectrum, count_levels, even_residual,
                                 even_spectrum, free_spectrum, graphical_curves, odd_spectrum,
                                 write_cavity_csv)
from springstring.errors import ParameterError
from springstring.model import ModelParams, dispersion_omega
from springstring.timedomain import GridSpec, simulate_cavity, spectrum_from_timeseries

# resonance with numeric Q close to 15, below which the string has a gap at 0.3
Q15 = ModelParams(0.477, 1.0, 0.3)


def test_uncoupled_even_roots_are_free_dirichlet_roots():
    p = ModelParams(0.0, 1.0, 0.4)
    spec = even_spectrum(7.0, 10, p)
    assert spec.even_k == [math.pi * (2 * n + 1) / 7.0 for n in range(11)]
    assert spec.even_omega == pytest.approx(free_spectrum(7.0, 10, p), rel=1e-15)


def test_free_spectrum_examples():
    assert free_spectrum(math.pi, 3, ModelParams(0, 1, 0)) == pytest.approx([1, 3, 5, 7])
    assert free_spectrum(math.pi, 0, ModelParams(0, 1, 2))[0] == pytest.approx(math.sqrt(5))


def test_odd_spectrum_is_coupling_blind():
    assert odd_spectrum(2 * math.pi, 3) == pytest.approx([1, 2, 3])
    assert odd_spectrum(5.0, 8) == odd_spectrum(5.0, 8)
    a = cavity_spectrum(5.0, 8, ModelParams(0.0, 1.0)).odd_k
    b = cavity_spectrum(5.0, 8, ModelParams(5.0, 1.0)).odd_k
    assert a == b


def test_invalid_length():
    for bad in (0.0, -1.0, math.inf):
        with pytest.raises(ParameterError):
            even_spectrum(bad, 3, Q15)
    with pytest.raises(ParameterError):
        odd_spectrum(0.0, 3)


# below kappa ~ 0.03 the resonance is so narrow that eta moves by ~1e-10 within
# one ulp of k, so no double-precision root can meet the residual bound there
@given(st.floats(0.03, 2.0), st.floats(0.3, 3.0), st.floats(0.0, 2.0), st.floats(2.0, 40.0))
def test_roots_satisfy_level_condition(kappa, Omega0, omega0, length):
    p = ModelParams(kappa, Omega0, omega0)
    spec = even_spectrum(length, 12, p)
    assert len(spec.even_k) == 13
    assert all(a < b for a, b in zip(spec.even_k, spec.even_k[1:]))
    assert all(k > 0 for k in spec.even_k)
    assert max(spec.residuals) < 1e-10
    assert spec.residuals == [even_residual(k, length, p) for k in spec.even_k]


def test_residual_floor_for_very_narrow_resonance():
    spec = even_spectrum(11.0, 12, ModelParams(0.01, 2.875, 0.0))
    assert max(spec.residuals) < 1e-9


@given(st.floats(0.05, 1.0), st.floats(0.5, 2.0), st.floats(0.0, 0.4), st.floats(5.0, 30.0))
def test_interlacing(kappa, Omega0, omega0, length):
    p = ModelParams(kappa, Omega0, omega0)
    assume(p.Omega_kappa > p.omega0)
    spec = cavity_spectrum(length, 15, p)
    free = spec.free_omega
    # the inserted level may leave one gap empty next to the resonance
    width = max(kappa**2 / Omega0, 2 * math.pi / length)
    for lo, hi in zip(free, free[1:]):
        if hi < spec.even_omega[-1] and not (lo - width < p.Omega_kappa < hi + width):
            assert count_levels(spec.even_omega, lo, hi) >= 1


def test_inserted_level_near_resonance():
    spec = cavity_spectrum(20.0, 20, Q15)
    for half in (0.2, 0.4, 1.0):
        lo, hi = Q15.Omega_kappa - half, Q15.Omega_kappa + half
        assert count_levels(spec.even_omega, lo, hi) == count_levels(spec.free_omega, lo, hi) + 1
    assert spec.missing_branches == []


def test_far_levels_follow_free_levels():
    spec = cavity_spectrum(20.0, 30, Q15)
    top = spec.even_omega[-1]
    far = [w for w in spec.free_omega if abs(w - Q15.Omega_kappa) > 2.0 and w < top]
    offsets = [min(abs(np.array(spec.even_omega) - w)) for w in far]
    spacing = math.pi / 20.0
    assert max(offsets) < 0.2 * spacing


def test_weak_coupling_continuity():
    worst = []
    for kappa in (0.2, 0.1, 0.05):
        spec = cavity_spectrum(20.0, 20, ModelParams(kappa, 1.0, 0.3))
        even = np.array(spec.even_omega)
        worst.append(max(min(abs(even - w)) for w in spec.free_omega[:-1]))
    assert worst[0] > worst[1] > worst[2]
    assert worst[2] < 0.01


def test_graphical_curves_intersect_at_levels():
    spec = even_spectrum(20.0, 10, Q15)
    curves = graphical_curves(20.0, Q15, spec.even_k)
    sel = np.abs(curves["tan_eta"]) < 50
    assert np.allclose(curves["tan_eta"][sel], curves["tan_wall"][sel], rtol=1e-7, atol=1e-9)
    assert np.allclose(curves["omega"], spec.even_omega)


def test_csv_layout():
    buf = io.StringIO()
    spec = cavity_spectrum(20.0, 3, Q15)
    write_cavity_csv(spec, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == CAVITY_HEADER
    branches = [ln.split(",")[1] for ln in lines[1:]]
    assert branches == ["even"] * 4 + ["odd"] * 3 + ["free"] * 4
    assert lines[1].split(",")[2] == format(spec.even_k[0], ".17g")


def test_fdtd_cavity_matches_levels():
    length, duration = 10.0, 400.0
    grid = GridSpec.from_length(length, 0.02, 0.01)
    bin_width = 2 * math.pi / duration
    spec = cavity_spectrum(length, 20, Q15)
    for kick, levels in (("oscillator", spec.even_omega), ("odd", spec.odd_omega)):
        ts = simulate_cavity(Q15, duration, grid, kick=kick, record_every=4)
        signal = ts.x_osc if kick == "oscillator" else ts.probes["quarter"]
        peaks = spectrum_from_timeseries(ts.times, signal, rel_threshold=0.01)
        assert peaks
        for pk in peaks:
            assert min(abs(np.array(levels) - pk.frequency)) <= bin_width
    assert dispersion_omega(spec.even_k[0], Q15) == spec.even_omega[0]
