import numpy as np
import pytest
from hypothesis import given, strategies as st

from geoment.appendix import (FhsSpec, constrained_log_min, fhs, fhs_grid_min, fhs_minimum,
                              gt_concavity_counterexample, gt_isotropic_closed, log_min_objective)
from geoment.families import IsotropicSpec, make_isotropic
from geoment.mixed import gt

E = np.e


@pytest.mark.parametrize("d", [2, 3, 5])
def test_gt_iso_endpoints(d):
    assert gt_isotropic_closed(d, 0.0) == pytest.approx(1 - 1 / d, abs=1e-15)
    assert gt_isotropic_closed(d, 1.0) == pytest.approx((1 - 1 / d**2) ** 2, abs=1e-15)


def test_gt_iso_half_point():
    # direct evaluation: (1/4)(sqrt(1.25) + 0.25)^2
    v = gt_isotropic_closed(2, 0.5)
    assert v == pytest.approx(0.25 * (np.sqrt(1.25) + 0.25) ** 2, abs=1e-15)
    assert v == pytest.approx(0.467879248594, abs=1e-12)
    assert gt(make_isotropic(IsotropicSpec.from_p(2, 0.5))).value == pytest.approx(v, abs=1e-6)


def test_gt_iso_rejects_bad_input():
    with pytest.raises(ValueError):
        gt_isotropic_closed(1, 0.5)
    with pytest.raises(ValueError):
        gt_isotropic_closed(2, 1.5)


def test_concavity_counterexample():
    lhs, rhs, bad = gt_concavity_counterexample(2, 0.5)
    assert bad and rhs - lhs > 1e-3
    assert gt_concavity_counterexample(3, 0.1).violated
    end = gt_concavity_counterexample(3, 0.0)
    assert not end.violated and end.lhs == pytest.approx(end.rhs, abs=1e-15)


@given(st.integers(2, 8), st.floats(0.01, 0.99))
def test_concavity_fails_everywhere(d, p):
    assert gt_concavity_counterexample(d, p).violated


def test_logmin_examples():
    r = constrained_log_min(3, 1.0, 1.0, 1.0)
    assert r.value == pytest.approx(2.0, abs=1e-15) and r.ok
    assert constrained_log_min(1, 2.0, 0.3, 0.4).value == pytest.approx(0.7 * np.log2(2 * (1 + 0.4 / 0.3)))
    assert constrained_log_min(4, 3.0, 0.5, 0.0).value == pytest.approx(0.5 * np.log2(3))
    with pytest.raises(ValueError):
        constrained_log_min(0, 1.0, 1.0, 1.0)


def test_logmin_equal_split_attains():
    x = np.full(4, 0.25)
    y = np.full(4, 0.5)
    assert log_min_objective(x, y, 2.0) == pytest.approx(constrained_log_min(4, 2.0, 1.0, 2.0).value)


@pytest.mark.parametrize("m,n,q,want,arg,case", [
    (2, 2, 0.5, 1.0, (0, 0), 1),
    (1, 3, 0.95, np.log2(1 / 0.95), ((1 - 0.95) / 0.95, 0), 2),
    (1, 3, 0.5, np.log2(3) - 0.5 * 3 * np.log2(E) / E, (3 / E - 1, 0), 3),
])
def test_fhs_minimum_examples(m, n, q, want, arg, case):
    fm = fhs_minimum(FhsSpec(m, n, q))
    assert fm.value == pytest.approx(want, abs=1e-14)
    assert np.allclose(fm.argmin, arg)
    assert fm.case == case
    assert fhs(FhsSpec(m, n, q), *fm.argmin) == pytest.approx(want, abs=1e-12)


def test_fhs_spec_validation():
    with pytest.raises(ValueError):
        FhsSpec(3, 2, 0.5)
    with pytest.raises(ValueError):
        FhsSpec(1, 2, 1.0)


@pytest.mark.parametrize("m,n,q", [(1, 2, 0.4), (1, 4, 0.9), (1, 4, 0.3)])
def test_fhs_closed_form_below_grid(m, n, q):
    spec = FhsSpec(m, n, q)
    h = np.linspace(0, spec.h_max, 300)[:, None]
    s = np.linspace(0, spec.s_max, 300)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = fhs(spec, h, s)
    vals[-1, -1] = np.inf
    assert fhs_minimum(spec).value <= np.min(vals) + 1e-12
    gv, _ = fhs_grid_min(spec, 400)
    assert gv == pytest.approx(fhs_minimum(spec).value, abs=2e-3)


@given(st.floats(1.0, 5.0), st.floats(0.05, 0.95))
def test_fhs_continuous_at_first_boundary(m, q):
    n = E * m
    lo, hi = FhsSpec(m, n * (1 - 1e-12), q), FhsSpec(m, n * (1 + 1e-12), q)
    assert fhs_minimum(lo).value == pytest.approx(fhs_minimum(hi).value, abs=1e-9)


@given(st.floats(0.2, 2.0), st.floats(0.2, 0.95))
def test_fhs_continuous_at_second_boundary(m, q):
    n = E * m / q  # q = e m / n, with m/n < 1/e
    a, b = fhs_minimum(FhsSpec(m, n * (1 + 1e-12), q)), fhs_minimum(FhsSpec(m, n * (1 - 1e-12), q))
    assert {a.case, b.case} == {2, 3}
    assert a.value == pytest.approx(b.value, abs=1e-9)
