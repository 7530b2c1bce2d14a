import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geoment.core import (ProductState, PureState, apply_local, computational_basis_state,
                          partial_trace, random_product, random_pure, random_unitary,
                          tensor_assemble)
from geoment.errors import DimensionError
from geoment.families import make_dicke, make_ghz, make_mes, make_w
from geoment.mixed import lambda2_mixed
from geoment.pure import OptimizerOptions, gm_pure, lambda2_pure

seeds = st.integers(0, 2**31 - 1)


def symmetric_grid_oracle(psi: PureState, steps: int = 1571) -> float:
    """max |<phi|^(x3) psi>|^2 over qubit factors cos t|0> + e^{ip} sin t|1>, by grid search."""
    t = np.linspace(0, np.pi / 2, steps)[:, None]
    p = np.linspace(0, 2 * np.pi, 64, endpoint=False)[None, :]
    a, b = np.cos(t), np.exp(1j * p) * np.sin(t)
    amp = psi.amplitudes.reshape(2, 2, 2)
    ov = 0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                f = (a if i == 0 else b) * (a if j == 0 else b) * (a if k == 0 else b)
                ov = ov + np.conj(f) * amp[i, j, k]
    return float(np.max(np.abs(ov) ** 2))


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_mes_both_paths(d):
    psi = make_mes(d)
    assert lambda2_pure(psi).lambda2 == pytest.approx(1 / d, abs=1e-9)
    assert lambda2_pure(psi, exact_bipartite=False).lambda2 == pytest.approx(1 / d, abs=1e-9)


def test_product_state_is_its_own_cps(rng):
    ps = random_product((2, 3, 2), rng)
    r = lambda2_pure(tensor_assemble(ps))
    assert r.lambda2 == pytest.approx(1, abs=1e-12)
    assert abs(np.vdot(r.cps.vector(), ps.vector())) == pytest.approx(1, abs=1e-9)
    assert gm_pure(tensor_assemble(ps)) == (pytest.approx(0, abs=1e-12), pytest.approx(0, abs=1e-11))


def test_w_state_against_grid_oracle():
    w = make_w(3)
    oracle = symmetric_grid_oracle(w)
    assert oracle == pytest.approx(4 / 9, abs=1e-5)
    assert lambda2_pure(w).lambda2 == pytest.approx(4 / 9, abs=1e-9)


def test_ghz_against_grid_oracle():
    g = make_ghz(3)
    assert symmetric_grid_oracle(g) == pytest.approx(0.5, abs=1e-5)
    assert gm_pure(g) == (pytest.approx(0.5, abs=1e-9), pytest.approx(1, abs=1e-8))


def test_bell_gm():
    assert gm_pure(make_mes(2)) == (pytest.approx(0.5), pytest.approx(1.0))


def test_dicke_four_two():
    # symmetric optimum at sin^2 t = 1/2: (sqrt(6) / 4)^2
    assert lambda2_pure(make_dicke(4, 2)).lambda2 == pytest.approx(3 / 8, abs=1e-9)


def test_single_party_rejected():
    with pytest.raises(DimensionError):
        lambda2_pure(computational_basis_state((3,), (0,)))


def test_bipartite_top_matches_svd(rng):
    psi = random_pure((3, 4), rng)
    sv = np.linalg.svd(psi.amplitudes.reshape(3, 4), compute_uv=False)
    assert lambda2_pure(psi).lambda2 == pytest.approx(sv[0] ** 2, abs=1e-12)


def test_restart_monotone():
    psi = random_pure((2, 2, 2, 2), np.random.default_rng(5))
    vals = [lambda2_pure(psi, OptimizerOptions(restarts=k, seed=3)).lambda2 for k in (1, 2, 4, 8, 16)]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_deterministic():
    psi = random_pure((3, 3, 2), np.random.default_rng(9))
    a, b = lambda2_pure(psi), lambda2_pure(psi)
    assert a.lambda2 == b.lambda2
    assert all(np.array_equal(x, y) for x, y in zip(a.cps.factors, b.cps.factors))


def test_init_is_used():
    w = make_w(3)
    good = ProductState.from_vectors([np.array([np.sqrt(2 / 3), np.sqrt(1 / 3)])] * 3)
    r = lambda2_pure(w, OptimizerOptions(restarts=1, seed=11), init=[good])
    assert r.lambda2 == pytest.approx(4 / 9, abs=1e-12)


@settings(max_examples=10)
@given(seeds)
def test_lu_invariance(seed):
    rng = np.random.default_rng(seed)
    psi = random_pure((2, 2, 2), rng)
    moved = apply_local(psi, [random_unitary(2, rng) for _ in range(3)])
    assert lambda2_pure(moved).lambda2 == pytest.approx(lambda2_pure(psi).lambda2, abs=1e-8)


@settings(max_examples=10)
@given(seeds, st.integers(0, 2))
def test_marginal_invariance(seed, traced):
    psi = random_pure((2, 2, 2), np.random.default_rng(seed))
    kept = [j for j in range(3) if j != traced]
    lm = lambda2_mixed(partial_trace(psi, kept)).lambda2m
    assert lm == pytest.approx(lambda2_pure(psi).lambda2, abs=1e-6)


@given(seeds)
def test_bounds(seed):
    psi = random_pure((2, 3, 2), np.random.default_rng(seed))
    lam = lambda2_pure(psi, OptimizerOptions(restarts=8)).lambda2
    assert np.max(np.abs(psi.amplitudes)) ** 2 - 1e-12 <= lam <= 1.0
    # fixing basis vectors on the two smaller parties leaves 4 orthogonal blocks
    assert lam >= 1 / 4 - 1e-12
