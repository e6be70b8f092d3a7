import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdsynth.linalg import (
    DegenerateEnvironmentError,
    closest_unitary,
    euler_to_su2,
    gates_from_angles,
    haar_random_unitary,
    kron,
    partial_trace_to_qubit,
    polar_2x2,
    su2_to_euler,
    unitarity_error,
)

from oracles import X, dense_on, euler

angle = st.floats(-20, 20, allow_nan=False)


def random_su2(rng):
    u = haar_random_unitary(1, rng)
    return u / np.sqrt(np.linalg.det(u))


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_ordering_first_factor_is_qubit0():
    ket00 = np.zeros(4)
    ket00[0] = 1
    out = kron(X, np.eye(2)) @ ket00
    assert out[0b10] == 1 and np.count_nonzero(out) == 1


def test_kron_mixed_product(rng):
    a, b, c, d = (haar_random_unitary(1, rng) for _ in range(4))
    err = np.max(np.abs(kron(a, b) @ kron(c, d) - kron(a @ c, b @ d)))
    assert err <= 1e-12


@pytest.mark.parametrize("n", range(1, 7))
def test_haar_unitary(n, rng):
    assert unitarity_error(haar_random_unitary(n, rng)) <= 1e-12


def test_haar_determinism():
    a = haar_random_unitary(3, np.random.default_rng(5))
    b = haar_random_unitary(3, np.random.default_rng(5))
    c = haar_random_unitary(3, np.random.default_rng(6))
    assert np.array_equal(a, b)
    assert np.max(np.abs(a - c)) > 0.1


def test_haar_first_moment():
    rng = np.random.default_rng(2024)
    m = np.mean([abs(haar_random_unitary(1, rng)[0, 0]) ** 2 for _ in range(10_000)])
    assert abs(m - 0.5) <= 0.02


def test_haar_phase_moment():
    # without the diagonal phase fix the diagonal entries have a biased phase
    rng = np.random.default_rng(7)
    z = np.mean([haar_random_unitary(1, rng)[0, 0] for _ in range(10_000)])
    assert abs(z) < 0.03


def test_closest_unitary_fixed_points(rng):
    u = haar_random_unitary(2, rng)
    assert np.max(np.abs(closest_unitary(u) - u)) <= 1e-12
    assert np.allclose(closest_unitary(np.diag([2.0, 3.0])), np.eye(2), atol=1e-15)


def test_closest_unitary_beats_random_probes(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    best = np.trace(closest_unitary(a).conj().T @ a).real
    probes = np.array([haar_random_unitary(1, rng) for _ in range(10_000)])
    vals = np.einsum("kij,ij->k", probes.conj(), a).real
    assert best >= vals.max()


def test_closest_unitary_degenerate():
    with pytest.raises(DegenerateEnvironmentError):
        closest_unitary(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_polar_2x2_matches_svd_in_su2(rng):
    for _ in range(200):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        g, s = polar_2x2(a)
        assert abs(np.linalg.det(g) - 1) <= 1e-12
        assert unitarity_error(g) <= 1e-12
        sv = np.linalg.svd(a, compute_uv=False)
        assert s == pytest.approx(sv.sum(), rel=1e-12)
        # optimal overlap among SU(2): |Tr(G^dagger A)| equals the singular value sum
        assert abs(np.trace(g.conj().T @ a)) == pytest.approx(sv.sum(), rel=1e-12)
        w = closest_unitary(a)
        assert abs(abs(np.vdot(w, g)) - 2) <= 1e-12  # same up to phase


def test_euler_closed_forms():
    assert np.allclose(euler_to_su2((0, 0, 0)), np.eye(2), atol=1e-15)
    assert np.allclose(euler_to_su2((np.pi, 0, 0)), [[0, -1], [1, 0]], atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(angle, angle, angle)
def test_euler_matches_rotation_product(t1, t2, t3):
    assert np.max(np.abs(euler_to_su2((t1, t2, t3)) - euler(t1, t2, t3))) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(angle, angle, angle)
def test_euler_gate_is_special_unitary(t1, t2, t3):
    g = euler_to_su2((t1, t2, t3))
    assert unitarity_error(g) <= 1e-12
    assert abs(np.linalg.det(g) - 1) <= 1e-12


def test_vectorized_gates(rng):
    ang = rng.uniform(-7, 7, size=(50, 3))
    ref = np.array([euler(*a) for a in ang])
    assert np.max(np.abs(gates_from_angles(ang) - ref)) <= 1e-12


def test_euler_round_trip(rng):
    for _ in range(1000):
        u = random_su2(rng)
        v = euler_to_su2(su2_to_euler(u))
        assert min(np.max(np.abs(v - u)), np.max(np.abs(v + u))) <= 1e-10


def test_su2_to_euler_rejects_non_special():
    with pytest.raises(ValueError):
        su2_to_euler(1j * np.eye(2))
    with pytest.raises(ValueError):
        su2_to_euler(np.diag([1.0, 2.0]))


def test_partial_trace_identity():
    for q in range(3):
        assert np.allclose(partial_trace_to_qubit(np.eye(8), q, 3), 4 * np.eye(2))


def test_partial_trace_product(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(partial_trace_to_qubit(np.kron(g, np.eye(2)), 0, 2), 2 * g, atol=1e-14)


def test_partial_trace_defining_identity(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        q = int(rng.integers(0, n))
        dim = 2**n
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        lhs = np.trace(dense_on(q, g, n).conj().T @ m)
        rhs = np.trace(g.conj().T @ partial_trace_to_qubit(m, q, n))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_partial_trace_out_of_range():
    with pytest.raises(IndexError):
        partial_trace_to_qubit(np.eye(4), 2, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_products_stay_unitary(n, seed):
    rng = np.random.default_rng(seed)
    u = haar_random_unitary(n, rng) @ haar_random_unitary(n, rng)
    assert unitarity_error(u) <= 1e-12
