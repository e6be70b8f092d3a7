import numpy as np
import pytest

from gdsynth import kernels
from gdsynth.circuit import Dressing, Skeleton, make_kernel
from gdsynth.linalg import haar_random_unitary, partial_trace_to_qubit
from gdsynth.skeletons import full_skeleton, sequential_skeleton, star_skeleton

from oracles import dense_circuit, dense_cnot, dense_on, euler

BACKENDS = kernels.available_backends()
SKELETONS = [
    full_skeleton(2),
    full_skeleton(4, 3),
    sequential_skeleton(3, [(0, 1), (1, 2), (0, 2), (2, 1)]),
    star_skeleton(2, [0, 1, 3], 4),
    Skeleton(3, [[(2, 0)], [(1, 2)]], Dressing.FULL),
]


def test_backend_selection():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("s", SKELETONS, ids=lambda s: f"n{s.n_qubits}_{s.n_cnots}cx_{s.dressing.value}")
def test_evaluate_and_environments(name, s, rng):
    ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
    goal = haar_random_unitary(s.n_qubits, rng)
    kernel, gates, _ = make_kernel(s, ang, goal, backend=BACKENDS[name])
    u = kernel.evaluate()
    assert np.max(np.abs(u - dense_circuit(s, ang))) <= 1e-12
    envs = kernel.environments()
    t = np.trace(goal @ u.conj().T)
    for k in range(s.n_slots):
        # the overlap as a function of gate k is Tr(G^dagger A_k)
        assert abs(np.vdot(gates[k], envs[k]) - t) <= 1e-11


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_environment_explicit_left_right(name, rng):
    s = full_skeleton(2)
    ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
    goal = haar_random_unitary(2, rng)
    kernel, gates, _ = make_kernel(s, ang, goal, backend=BACKENDS[name])
    envs = kernel.environments()
    for k, (_, q) in enumerate(s.slots):
        # R: everything before slot k, L: everything after
        r_part = dense_circuit_prefix(s, ang, k)
        l_part = dense_circuit(s, ang) @ np.linalg.inv(r_part) @ np.linalg.inv(_embed(gates[k], q))
        ref = partial_trace_to_qubit(l_part.conj().T @ goal @ r_part.conj().T, q, 2)
        assert np.max(np.abs(envs[k] - ref)) <= 1e-11


def _embed(g, q):
    return np.kron(g, np.eye(2)) if q == 0 else np.kron(np.eye(2), g)


def dense_circuit_prefix(s, ang, k):
    """Product of all operations strictly before slot ``k``."""
    n = s.n_qubits
    u = np.eye(2**n, dtype=complex)
    idx = 0
    for i, qubits in enumerate(s.s_layers):
        for q in qubits:
            if idx == k:
                return u
            u = dense_on(q, euler(*ang[idx]), n) @ u
            idx += 1
        if i < s.n_cnot_layers:
            for c, t in s.cnot_layers[i]:
                u = dense_cnot(c, t, n) @ u
    return u


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
@pytest.mark.parametrize("s", SKELETONS[:4], ids=lambda s: f"n{s.n_qubits}_{s.n_cnots}cx")
def test_backends_agree_on_sweeps(s, rng):
    ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
    goal = haar_random_unitary(s.n_qubits, rng)
    out = {}
    for name, cls in BACKENDS.items():
        kernel, _, a = make_kernel(s, ang.copy(), goal, backend=cls)
        costs = [kernel.sweep_svd() for _ in range(5)]
        costs += [kernel.sweep_gradient(0.05) for _ in range(3)]
        out[name] = (np.array(costs), a.copy(), kernel.suffix_products())
    (c1, a1, s1), (c2, a2, s2) = out.values()
    assert np.max(np.abs(c1 - c2)) <= 1e-10
    assert np.max(np.abs(a1 - a2)) <= 1e-8
    assert np.max(np.abs(s1 - s2)) <= 1e-8


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_suffix_products(name, rng):
    s = SKELETONS[2]
    ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
    kernel, gates, _ = make_kernel(s, ang, backend=BACKENDS[name])
    suffix = kernel.suffix_products()
    u = dense_circuit(s, ang)
    for k, (_, q) in enumerate(s.slots):
        pre = dense_circuit_prefix(s, ang, k)
        ref = u @ np.linalg.inv(dense_on(q, gates[k], s.n_qubits) @ pre)
        assert np.max(np.abs(suffix[k] - ref)) <= 1e-11
