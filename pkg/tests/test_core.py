import numpy as np
import pytest
from hypothesis import given, strategies as st

from geoment.core import (DensityMatrix, MultipartiteSpace, ProductState, PureState, apply_local,
                          bures_distance, check_budget, computational_basis_state, entropies,
                          fidelity, mixture, partial_trace, projector, random_density,
                          random_pure, random_unitary, relative_entropy, same_space_tensor,
                          tensor_assemble, trace_distance)
from geoment.errors import BudgetError, DimensionError, InvalidStateError
from geoment.families import make_ghz, make_mes, make_w
from geoment.pure import lambda2_pure

seeds = st.integers(0, 2**31 - 1)


def dm(dims, m):
    return DensityMatrix.from_matrix(dims, np.asarray(m, dtype=complex))


def test_space_validation():
    assert MultipartiteSpace((2, 3)).total_dim == 6
    with pytest.raises(DimensionError):
        MultipartiteSpace((2, 1))
    with pytest.raises(DimensionError):
        MultipartiteSpace(())


def test_pure_state_validation():
    with pytest.raises(InvalidStateError):
        PureState.from_vector((2,), [1.0, 1.0], normalize=False)
    with pytest.raises(DimensionError):
        PureState.from_vector((2, 2), [1.0, 0.0, 0.0])
    psi = PureState.from_vector((2,), [3.0, 4.0])
    assert np.allclose(psi.amplitudes, [0.6, 0.8])


def test_density_validation():
    with pytest.raises(InvalidStateError):
        dm((2,), [[1, 0], [0, 1]])  # trace 2
    with pytest.raises(InvalidStateError):
        dm((2,), [[1.5, 0], [0, -0.5]])
    with pytest.raises(InvalidStateError):
        dm((2,), [[0.5, 0.5], [0.1, 0.5]])


def test_budget():
    check_budget((64, 64))
    with pytest.raises(BudgetError):
        check_budget((64, 64, 2))


@pytest.mark.parametrize("factors, amps", [
    (([1, 0], [1, 0]), [1, 0, 0, 0]),
    (([1, 0], [0, 1]), [0, 1, 0, 0]),
    ((np.ones(2) / np.sqrt(2), np.ones(2) / np.sqrt(2)), [0.5, 0.5, 0.5, 0.5]),
])
def test_tensor_assemble(factors, amps):
    psi = tensor_assemble(ProductState(tuple(np.asarray(f, dtype=complex) for f in factors)))
    assert np.allclose(psi.amplitudes, amps, atol=1e-15)


def test_tensor_assemble_space_mismatch():
    with pytest.raises(DimensionError):
        tensor_assemble(ProductState(([1, 0], [1, 0])), MultipartiteSpace((2, 3)))


def test_partial_trace_examples():
    assert np.allclose(partial_trace(make_mes(2), [0]).matrix, np.eye(2) / 2)
    assert np.allclose(partial_trace(computational_basis_state((2, 2), (0, 0)), [0]).matrix,
                       np.diag([1, 0]))
    # oracle: explicit sum over the traced index of the W vector
    w = np.zeros((2, 2, 2))
    w[0, 0, 1] = w[0, 1, 0] = w[1, 0, 0] = 1 / np.sqrt(3)
    red = np.einsum("abk,cdk->abcd", w, w).reshape(4, 4)
    ours = partial_trace(make_w(3), [0, 1]).matrix
    assert np.allclose(ours, red, atol=1e-14)
    ev = np.sort(np.linalg.eigvalsh(ours))[::-1]
    assert np.allclose(ev, [2 / 3, 1 / 3, 0, 0], atol=1e-12)


@given(seeds)
def test_partial_trace_roundtrip_product(seed):
    rng = np.random.default_rng(seed)
    fs = [rng.normal(size=d) + 1j * rng.normal(size=d) for d in (2, 3, 2)]
    fs = [f / np.linalg.norm(f) for f in fs]
    psi = tensor_assemble(ProductState(tuple(fs)))
    for j, f in enumerate(fs):
        assert np.allclose(partial_trace(psi, [j]).matrix, np.outer(f, f.conj()), atol=1e-12)


def test_trace_distance_examples():
    r = random_density((2, 2), np.random.default_rng(0))
    assert trace_distance(r, r) == pytest.approx(0, abs=1e-14)
    z0, z1 = computational_basis_state((2,), (0,)), computational_basis_state((2,), (1,))
    assert trace_distance(z0, z1) == pytest.approx(1)


def test_fidelity_examples():
    z0, z1 = computational_basis_state((2,), (0,)), computational_basis_state((2,), (1,))
    half = dm((2,), np.eye(2) / 2)
    assert fidelity(half, half) == pytest.approx(1, abs=1e-12)
    assert fidelity(z0, half) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    sig = dm((2, 2), np.diag([0.5, 0, 0, 0.5]))
    # pure formula F = sqrt(<psi|sigma|psi>)
    assert fidelity(make_mes(2), sig) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert bures_distance(z0, z0) == pytest.approx(0, abs=1e-7)
    assert bures_distance(z0, z1) == pytest.approx(np.sqrt(2))
    assert bures_distance(z0, half) == pytest.approx(np.sqrt(2 - np.sqrt(2)), abs=1e-12)


def test_relative_entropy_examples():
    r = random_density((2, 2), np.random.default_rng(3))
    assert relative_entropy(r, r) == pytest.approx(0, abs=1e-9)
    z0, z1 = computational_basis_state((2,), (0,)), computational_basis_state((2,), (1,))
    assert relative_entropy(z0, z1) == float("inf")
    delta = dm((2, 2), np.diag([0.5, 0, 0, 0.5]))
    assert relative_entropy(make_mes(2), delta) == pytest.approx(1, abs=1e-12)


def test_entropies_examples():
    s, l = entropies(computational_basis_state((2,), (0,)))
    assert (s, l) == (pytest.approx(0, abs=1e-15), pytest.approx(0, abs=1e-15))
    assert entropies(dm((2,), np.eye(2) / 2)) == (pytest.approx(1), pytest.approx(0.5))
    s, l = entropies(dm((2,), np.diag([0.75, 0.25])))
    # h(1/4) = 2 - (3/4) log2 3
    assert s == pytest.approx(2 - 0.75 * np.log2(3), abs=1e-12)
    assert s == pytest.approx(0.811278, abs=1e-6)
    assert l == pytest.approx(0.375, abs=1e-15)


def test_same_space_tensor():
    b = same_space_tensor(make_mes(2), make_mes(2))
    assert isinstance(b, PureState) and b.dims == (4, 4)
    assert lambda2_pure(b).lambda2 == pytest.approx(0.25, abs=1e-9)
    wg = same_space_tensor(make_w(3), make_ghz(3))
    assert wg.dims == (4, 4, 4)
    assert lambda2_pure(wg).lambda2 == pytest.approx(4 / 9 * 0.5, abs=1e-6)


def test_mixture_checks_spaces():
    with pytest.raises(DimensionError):
        mixture([0.5, 0.5], [make_mes(2), make_mes(3)])
    with pytest.raises(ValueError):
        mixture([1.0], [])


@given(seeds)
def test_trace_distance_joint_convexity(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(3))
    rs = [random_density((2, 2), rng) for _ in range(3)]
    ss = [random_density((2, 2), rng) for _ in range(3)]
    lhs = trace_distance(mixture(p, rs), mixture(p, ss))
    assert lhs <= sum(pi * trace_distance(r, s) for pi, r, s in zip(p, rs, ss)) + 1e-9


@given(seeds, st.integers(1, 4))
def test_fidelity_trace_distance_sandwich(seed, rank):
    rng = np.random.default_rng(seed)
    a, b = random_density((2, 2), rng, rank), random_density((2, 2), rng)
    f, t = fidelity(a, b), trace_distance(a, b)
    assert 1 - f <= t + 1e-9
    assert t <= np.sqrt(1 - f * f) + 1e-9
    assert f == pytest.approx(fidelity(b, a), abs=1e-7)


@given(seeds)
def test_pure_pair_identities(seed):
    rng = np.random.default_rng(seed)
    a, b = random_pure((2, 3), rng), random_pure((2, 3), rng)
    ov = abs(np.vdot(a.amplitudes, b.amplitudes))
    assert fidelity(a, b) == pytest.approx(ov, abs=1e-10)
    assert trace_distance(a, b) == pytest.approx(np.sqrt(1 - ov ** 2), abs=1e-10)


@given(seeds)
def test_linear_entropy_below_entropy(seed):
    rho = random_density((2, 3), np.random.default_rng(seed))
    s, l = entropies(rho)
    assert l <= s + 1e-12


@given(seeds)
def test_local_unitaries_preserve_spectrum(seed):
    rng = np.random.default_rng(seed)
    rho = random_density((2, 3), rng, 2)
    out = apply_local(rho, [random_unitary(2, rng), random_unitary(3, rng)])
    assert np.allclose(np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(rho.matrix), atol=1e-12)


def test_projector_normalizes():
    p = projector([1, 1, 0, 0], (2, 2))
    assert p.purity() == pytest.approx(1)
