import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geoment.core import (DensityMatrix, apply_local, computational_basis_state, mixture,
                          random_density, random_product, random_unitary, tensor_assemble)
from geoment.errors import DimensionError
from geoment.families import (ClassLabel, IsotropicSpec, MaxCorrSpec, classify,
                              concurrence, detect_isotropic, detect_maxcorr, iso_closed_forms,
                              make_dicke, make_ghz, make_isotropic, make_maxcorr, make_mes,
                              make_w, maxcorr_closed_forms, rank2_case, rank2_label,
                              rank2_log_roof, two_qubit_closed_forms)
from geoment.mixed import lambda2_mixed
from geoment.roof import RoofOptions, convex_roof

E = np.e


def test_pure_constructors():
    assert np.allclose(make_mes(2).amplitudes, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])
    w = np.zeros(8)
    w[[1, 2, 4]] = 1 / np.sqrt(3)
    assert np.allclose(make_w(3).amplitudes, w)
    dk = make_dicke(4, 2).amplitudes
    assert np.count_nonzero(np.abs(dk) > 1e-12) == 6
    assert np.linalg.norm(dk) == pytest.approx(1)
    g = make_ghz(3, 3).amplitudes
    assert np.count_nonzero(np.abs(g) > 1e-12) == 3


def test_isotropic_parameters():
    spec = IsotropicSpec.from_F(3, 0.9)
    assert spec.p == pytest.approx(9 / 8 * 0.1)
    assert IsotropicSpec.from_p(3, spec.p).F == pytest.approx(0.9)
    with pytest.raises(ValueError):
        IsotropicSpec.from_F(3, 1.2)


def test_isotropic_closed_examples():
    bell = iso_closed_forms(IsotropicSpec.from_F(2, 1.0))
    assert bell.g_fc == pytest.approx(0.5) and bell.g_c_log == pytest.approx(1.0)
    edge = iso_closed_forms(IsotropicSpec.from_F(3, 1 / 3))
    assert edge.separable
    assert edge.g_fc == pytest.approx(0, abs=1e-12)
    assert edge.g_c_log == pytest.approx(0, abs=1e-12)
    assert edge.g_f_log == pytest.approx(0, abs=1e-12)
    cf = iso_closed_forms(IsotropicSpec.from_F(3, 0.9))
    want = 1 - (np.sqrt(0.9) + np.sqrt(0.2)) ** 2 / 3
    assert cf.g_fc == pytest.approx(want, abs=1e-15)
    assert cf.g_fc == pytest.approx(0.35049062, abs=1e-8)


@pytest.mark.parametrize("m,n,q,want,case", [
    (2, 2, 0.5, 1.0, 1),
    (1, 3, 0.95, np.log2(1 / 0.95), 2),
    (1, 3, 0.5, np.log2(3) - 0.5 * 3 * np.log2(E) / E, 3),
])
def test_rank2_log_roof_examples(m, n, q, want, case):
    assert rank2_log_roof(m, n, q) == (pytest.approx(want, abs=1e-14), case)
    assert rank2_case(m, n, q) == case


def test_rank2_numeric_values():
    assert rank2_log_roof(1, 3, 0.95)[0] == pytest.approx(0.0740, abs=1e-4)
    assert rank2_log_roof(1, 3, 0.5)[0] == pytest.approx(0.7888, abs=1e-4)


def test_rank2_case3_against_decomposition_grid():
    # the roof optimizer knows nothing about the three cases
    rho = make_maxcorr(MaxCorrSpec.rank2(1, 3, 0.5))
    assert convex_roof(rho, "log").value == pytest.approx(rank2_log_roof(1, 3, 0.5)[0], abs=1e-5)


@pytest.mark.parametrize("m,n,q,label", [(2, 2, 0.3, "D2"), (1, 3, 0.95, "D3"),
                                          (1, 3, 0.5, "D1"), (2, 3, 0.9, "D1"),
                                          (1, 4, 0.8, "D3"), (1, 4, 0.6, "D1")])
def test_rank2_label(m, n, q, label):
    assert rank2_label(m, n, q) == label


def test_maxcorr_closed_forms():
    spec = MaxCorrSpec(6, (0, 2, 6), (0.5, 0.5))
    cf = maxcorr_closed_forms(spec)
    assert cf.g_c == pytest.approx(1 - 0.5 / 2 - 0.5 / 4)
    assert cf.g_f_log == pytest.approx(-np.log2(0.375))
    assert cf.lambda2_m == pytest.approx(0.25)
    assert cf.decomposition is not None


def test_maxcorr_spec_validation():
    with pytest.raises(ValueError):
        MaxCorrSpec(3, (0, 2, 2, 3), (0.5, 0.25, 0.25))
    with pytest.raises(ValueError):
        MaxCorrSpec(3, (0, 1, 3), (0.5, 0.6))


@given(st.integers(1, 4), st.integers(0, 5), st.floats(0.05, 0.95))
def test_closed_form_log_inequalities(m, extra, q):
    n = m + extra
    cf = maxcorr_closed_forms(MaxCorrSpec.rank2(m, n, q))
    if cf.g_c_log is None:
        return
    # -log2(1 - G) <= log roof <= max-overlap log value, all exact here
    assert cf.g_f_log <= cf.g_c_log + 1e-9
    assert cf.g_f_log == pytest.approx(-np.log2(1 - cf.g_c), abs=1e-12)
    assert cf.g_c_log <= cf.g_m_log + 1e-9


@pytest.mark.parametrize("d", [2, 3, 4])
def test_isotropic_closed_inequalities(d):
    for F in np.linspace(1 / d, 1, 7):
        cf = iso_closed_forms(IsotropicSpec.from_F(d, F))
        assert cf.g_f_log <= cf.g_c_log + 1e-9
        assert cf.g_c_log <= cf.g_m_log + 1e-9
        assert cf.g_fc <= cf.g_m + 1e-12


def test_concurrence_examples():
    assert concurrence(make_mes(2).density()) == pytest.approx(1)
    sep = mixture([0.5, 0.5], [computational_basis_state((2, 2), (0, 1)),
                               tensor_assemble(random_product((2, 2), np.random.default_rng(0)))])
    assert concurrence(sep) == pytest.approx(0, abs=1e-9)
    werner = DensityMatrix.from_matrix((2, 2), 0.8 * make_mes(2).density().matrix
                                       + 0.2 * np.eye(4) / 4)
    cf = two_qubit_closed_forms(werner)
    assert cf.concurrence == pytest.approx(0.7, abs=1e-12)
    assert cf.g_c_log == pytest.approx(-np.log2((1 + np.sqrt(0.51)) / 2), abs=1e-12)
    assert convex_roof(werner, "log").value == pytest.approx(cf.g_c_log, abs=1e-6)
    with pytest.raises(DimensionError):
        two_qubit_closed_forms(make_isotropic(IsotropicSpec.from_p(3, 0.5)))


def test_detectors_find_families():
    spec = IsotropicSpec.from_p(3, 0.4)
    assert detect_isotropic(make_isotropic(spec)).F == pytest.approx(spec.F)
    mc = MaxCorrSpec(5, (0, 2, 5), (0.3, 0.7))
    found, ua = detect_maxcorr(make_maxcorr(mc))
    assert found.partition == mc.partition
    assert np.allclose(found.weights, mc.weights)
    rng = np.random.default_rng(3)
    assert detect_maxcorr(random_density((3, 3), rng)) is None
    assert detect_isotropic(random_density((3, 3), rng)) is None


def test_detect_maxcorr_with_phases():
    mc = MaxCorrSpec(3, (0, 1, 3), (0.5, 0.5))
    ph = np.diag(np.exp(1j * np.array([0.3, 1.1, -0.7])))
    moved = apply_local(make_maxcorr(mc), [ph, np.eye(3)])
    label, ev = classify(moved)
    assert label is ClassLabel.D1
    assert "local_phases" in ev


@pytest.mark.parametrize("state, label", [
    (computational_basis_state((2, 2), (0, 0)), ClassLabel.A),
    (make_mes(2), ClassLabel.B),
    (DensityMatrix.from_matrix((2, 2), np.eye(4) / 4), ClassLabel.C),
    (make_isotropic(IsotropicSpec.from_F(3, 0.9)), ClassLabel.D2),
    (make_maxcorr(MaxCorrSpec.rank2(1, 3, 0.95)), ClassLabel.D3),
    (make_maxcorr(MaxCorrSpec.rank2(1, 3, 0.5)), ClassLabel.D1),
    (make_maxcorr(MaxCorrSpec.rank2(2, 2, 0.5)), ClassLabel.D2),
])
def test_classify_examples(state, label):
    assert classify(state)[0] is label


def test_classify_two_qubit_entangled_mixed():
    werner = DensityMatrix.from_matrix((2, 2), 0.8 * make_mes(2).density().matrix
                                       + 0.2 * np.eye(4) / 4)
    assert classify(werner)[0] is ClassLabel.D2


def test_classify_separable_maxcorr_blocks():
    rho = make_maxcorr(MaxCorrSpec(3, (0, 1, 2, 3), (0.2, 0.3, 0.5)))
    assert classify(rho)[0] is ClassLabel.C


def test_classify_unequal_blocks_rank3_is_d1():
    rho = make_maxcorr(MaxCorrSpec(4, (0, 1, 2, 4), (0.25, 0.25, 0.5)))
    label, ev = classify(rho)
    assert label is ClassLabel.D1
    assert ev["g_c_log_upper"] < ev["g_m_log"]


def test_classify_with_given_family_and_unitaries():
    rng = np.random.default_rng(1)
    ua, ub = random_unitary(3, rng), random_unitary(3, rng)
    spec = IsotropicSpec.from_F(3, 0.6)
    base = make_isotropic(spec)
    moved = apply_local(base, [ua.conj().T, ub.conj().T])
    assert classify(moved, family=spec, local_unitaries=[ua, ub])[0] is ClassLabel.D2
    with pytest.raises(ValueError):
        classify(moved, family=IsotropicSpec.from_F(3, 0.7), local_unitaries=[ua, ub])


def test_classify_generic_state_is_undecidable():
    rho = random_density((2, 3), np.random.default_rng(2), 2)
    fast = RoofOptions(starts=1, hops=0, k_schedule=(1,), max_iter=80, search_restarts=4)
    label, ev = classify(rho, roof_opts=fast)
    assert label is ClassLabel.UNDECIDABLE
    assert ev["g_c_log_upper"] <= ev["g_m_log_upper"] + 5e-6


def test_equal_blocks_roof_members_equally_entangled():
    rho = make_maxcorr(MaxCorrSpec(6, (0, 2, 4, 6), (0.2, 0.3, 0.5)))
    r = convex_roof(rho, "log")
    lams = [lam for (p, _), lam in zip(r.decomposition.members, r.per_member_lambda2) if p > 1e-9]
    assert max(lams) - min(lams) < 1e-6
    assert r.value == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=10)
@given(st.sampled_from([(1, 2), (1, 3), (2, 3), (2, 5)]), st.floats(0.1, 0.9))
def test_max_overlap_bounds_roof_on_families(mn, q):
    m, n = mn
    rho = make_maxcorr(MaxCorrSpec.rank2(m, n, q))
    lm = lambda2_mixed(rho).lambda2m
    assert -np.log2(lm) >= rank2_log_roof(m, n, q)[0] - 5e-6
    assert 1 - lm >= maxcorr_closed_forms(MaxCorrSpec.rank2(m, n, q)).g_c - 5e-6
