import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvholonomy.gyro import (
    ABELIAN_REFERENCE_SENSITIVITY,
    GyroParams,
    holonomy_consistency_check,
    min_detectable_rotation,
    nominal_slope,
    shot_noise,
    signal,
    signal_curve,
    signal_slope,
)

BASE = dict(n_centers=1e6, collection_eff=0.1, contrast=0.2, t1=1e-3, t2_star=1e-6, tau=1.0)


def test_signal_extremes():
    p = GyroParams(**BASE)
    assert signal(p) == pytest.approx(1e5, rel=1e-15)
    q = GyroParams(**BASE, omega=np.pi / np.sqrt(2), t=1.0)
    assert signal(q) == pytest.approx(1e5 * 0.8, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 20))
def test_signal_period(x):
    p = GyroParams(**BASE)
    a, b = signal_curve(p, [x, x + np.sqrt(2) * np.pi])
    assert abs(a - b) <= 1e-12 * abs(a)
    assert 1e5 * 0.8 - 1e-9 <= a <= 1e5 + 1e-9


def test_alpha_example():
    p = GyroParams(**BASE)
    assert p.alpha == pytest.approx(np.sqrt(2000))
    assert p.alpha > 10


def test_abelian_ratio_and_tau_scaling():
    p = GyroParams(**BASE)
    dw, a = min_detectable_rotation(p)
    dw1, one = min_detectable_rotation(p, alpha=1.0)
    assert one == 1.0 and dw / dw1 == pytest.approx(1 / a, rel=1e-15)
    q = GyroParams(**{**BASE, "tau": 4.0})
    assert min_detectable_rotation(q)[0] == pytest.approx(dw / 2, rel=1e-15)
    assert dw1 == pytest.approx(1 / (0.2 * np.sqrt(1e6 * 0.1 * 1e-6 * 1.0)), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["n_centers", "collection_eff", "contrast", "tau", "t1"]), st.floats(1.01, 5))
def test_sensitivity_improves_with_resources(name, factor):
    lo = dict(BASE, collection_eff=0.1, contrast=0.1)
    hi = dict(lo, **{name: lo[name] * factor})
    assert min_detectable_rotation(GyroParams(**hi))[0] < min_detectable_rotation(GyroParams(**lo))[0]


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-7, 1e-3))
def test_sensitivity_independent_of_t2_star(t2):
    # alpha grows as 1/sqrt(T2*) while the Ramsey root shrinks as sqrt(T2*)
    ref = min_detectable_rotation(GyroParams(**BASE))[0]
    dw = min_detectable_rotation(GyroParams(**{**BASE, "t2_star": t2}))[0]
    assert dw == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("wt,expect", [(0.0, 1.0), (np.sqrt(2) * np.pi / 2, 0.0)])
def test_holonomy_check_values(wt, expect):
    assert holonomy_consistency_check(wt, 1.0) == pytest.approx(expect, abs=1e-15)


def test_holonomy_check_matches_signal_shape():
    p = GyroParams(**{**BASE, "contrast": 1.0})
    wt = np.linspace(0, 2 * np.sqrt(2) * np.pi, 101)
    shape = signal_curve(p, wt) / (p.n_centers * p.collection_eff)
    pops = np.array([holonomy_consistency_check(x, 1.0) for x in wt])
    assert np.max(np.abs(shape - pops)) < 1e-12


def test_slope_and_noise():
    p = GyroParams(**BASE, omega=0.3, t=1e-3)
    h = 1e-2  # F ~ 1e5, so a smaller step drowns in cancellation
    fd = (signal(GyroParams(**BASE, omega=0.3 + h, t=1e-3)) - signal(GyroParams(**BASE, omega=0.3 - h, t=1e-3))) / (2 * h)
    assert signal_slope(p) == pytest.approx(fd, rel=1e-4)
    assert nominal_slope(p) == pytest.approx(np.sqrt(2) * 1e5 * 0.2 * 1e-3)
    assert shot_noise(p) == pytest.approx(np.sqrt(1e5))


@pytest.mark.parametrize("bad", [
    {"n_centers": 0}, {"collection_eff": 1.5}, {"contrast": 0}, {"t2_star": 1e-2}, {"omega": -1.0},
])
def test_validation(bad):
    with pytest.raises(ValueError):
        GyroParams(**{**BASE, **bad})


def test_reference_constant():
    assert ABELIAN_REFERENCE_SENSITIVITY == 5.4e-3
