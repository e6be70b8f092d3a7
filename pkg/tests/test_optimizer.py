import numpy as np
import pytest

from gdsynth.circuit import Skeleton, evaluate, make_kernel
from gdsynth.kernels import available_backends
from gdsynth.linalg import closest_unitary, euler_to_su2, haar_random_unitary, polar_2x2
from gdsynth.optimizer import (
    OptimizerConfig,
    Status,
    Variant,
    cost,
    environment,
    environments,
    gradient,
    multistart,
    read_trace_csv,
    sweep_euler_gradient,
    sweep_svd,
    synthesize,
    write_trace_csv,
)
from gdsynth.skeletons import full_skeleton, sequential_random_skeleton, sequential_skeleton

from oracles import dense_circuit, overlap_cost

NOISE = 1e-12  # rounding noise allowed between consecutive logged costs


def test_cost_examples(rng):
    u = haar_random_unitary(3, rng)
    assert abs(cost(u, u)) <= 1e-12
    assert abs(cost(u, np.exp(0.7j) * u)) <= 1e-12
    assert cost(np.eye(2), np.array([[0, 1], [1, 0]])) == 2.0
    with pytest.raises(ValueError):
        cost(np.eye(2), np.eye(4))


def test_cost_matches_oracle(rng):
    a, b = haar_random_unitary(2, rng), haar_random_unitary(2, rng)
    assert cost(a, b) == pytest.approx(overlap_cost(a, b), abs=1e-12)
    assert 0 <= cost(a, b) <= 8


def test_single_slot_environment(rng):
    u = haar_random_unitary(1, rng)
    u = u / np.sqrt(np.linalg.det(u))
    a = environment(Skeleton(1, []), np.zeros((1, 3)), 0, u)
    assert np.max(np.abs(a - u)) <= 1e-12
    assert np.max(np.abs(closest_unitary(a) - u)) <= 1e-12


def test_environment_defining_identity(rng):
    for case in range(100):
        n = int(rng.integers(1, 4))
        s = sequential_random_skeleton(n, int(rng.integers(0, 5)), rng) if n > 1 else Skeleton(1, [])
        ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
        goal = haar_random_unitary(n, rng)
        k = int(rng.integers(0, s.n_slots))
        a = environment(s, ang, k, goal)
        probe = ang.copy()
        probe[k] = rng.uniform(0, 2 * np.pi, 3)
        g = euler_to_su2(probe[k])
        lhs = abs(np.trace(goal @ dense_circuit(s, probe).conj().T))
        assert abs(lhs - abs(np.trace(g.conj().T @ a))) <= 1e-11


def test_environment_von_neumann_bound(rng):
    s = full_skeleton(2)
    goal = haar_random_unitary(2, rng)
    ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
    for k, a in enumerate(environments(s, ang, goal)):
        g = euler_to_su2(ang[k])
        assert np.linalg.svd(a, compute_uv=False).sum() >= abs(np.trace(g.conj().T @ a)) - 1e-12
    with pytest.raises(IndexError):
        environment(s, ang, s.n_slots, goal)


@pytest.mark.parametrize("name", sorted(available_backends()))
def test_sweep_fixed_point(rng, name):
    s = full_skeleton(2)
    ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
    target = evaluate(s, ang)
    kernel, _, _ = make_kernel(s, ang.copy(), target, backend=available_backends()[name])
    assert kernel.rebuild() <= 1e-12
    assert kernel.sweep_svd() <= 1e-12


@pytest.mark.parametrize("name", sorted(available_backends()))
def test_per_slot_monotone_descent(name):
    rng = np.random.default_rng(3)
    s = full_skeleton(2)
    cfg = OptimizerConfig(convergence_threshold=1e-13)
    recorded = 0
    for seed in range(4):
        log = []
        r = synthesize(haar_random_unitary(2, rng), s, cfg, seed=seed, log_updates=log,
                       backend=available_backends()[name])
        assert np.count_nonzero(np.diff(log) > NOISE) == 0
        assert r.converged
        recorded += len(log)
    assert recorded >= 500


def test_monotone_descent_larger_circuits():
    rng = np.random.default_rng(8)
    for s in (sequential_random_skeleton(3, 16, rng), full_skeleton(4, 8)):
        log = []
        synthesize(haar_random_unitary(s.n_qubits, rng), s, OptimizerConfig(max_sweeps=40), seed=1,
                   log_updates=log)
        assert np.count_nonzero(np.diff(log) > NOISE * 16) == 0


def test_local_update_optimality(rng):
    s = full_skeleton(2)
    goal = haar_random_unitary(2, rng)
    ang, _ = sweep_svd(s, rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3)), goal)
    # the right-to-left pass ends by updating slot 0
    a = environment(s, ang, 0, goal)
    current = abs(np.trace(euler_to_su2(ang[0]).conj().T @ a))
    probes = np.array([haar_random_unitary(1, rng) for _ in range(1000)])
    best = np.abs(np.einsum("kij,ij->k", probes.conj(), a)).max()
    assert best - current <= 1e-10
    assert current == pytest.approx(polar_2x2(a)[1], abs=1e-10)


def test_cache_coherence(rng):
    for s in (full_skeleton(4, 6), sequential_random_skeleton(3, 12, rng)):
        goal = haar_random_unitary(s.n_qubits, rng)
        kernel, _, ang = make_kernel(s, rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3)), goal)
        for _ in range(20):
            running = kernel.sweep_svd(rebuild=False)
            exact = kernel.rebuild()
            assert abs(running - exact) <= 1e-10
            assert abs(exact - overlap_cost(goal, dense_circuit(s, ang))) <= 1e-10


def test_gradient_matches_finite_differences(rng):
    s = sequential_skeleton(3, [(0, 1), (1, 2), (0, 2), (0, 1)])
    goal = haar_random_unitary(3, rng)
    worst = 0.0
    for _ in range(100):
        ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
        g = gradient(s, ang, goal)
        k, i = int(rng.integers(0, s.n_slots)), int(rng.integers(0, 3))
        h = 1e-5
        up, dn = ang.copy(), ang.copy()
        up[k, i] += h
        dn[k, i] -= h
        fd = (overlap_cost(goal, evaluate(s, up)) - overlap_cost(goal, evaluate(s, dn))) / (2 * h)
        worst = max(worst, abs(fd - g[k, i]) / max(abs(fd), 1e-3))
    assert worst <= 1e-6


def test_gradient_vanishes_at_solution(rng):
    s = full_skeleton(2)
    goal = haar_random_unitary(2, rng)
    # |dC/dtheta| scales like sqrt(C), so converge well below the default threshold
    r = synthesize(goal, s, OptimizerConfig(convergence_threshold=1e-13), seed=2)
    assert r.converged
    assert np.max(np.abs(gradient(s, r.angles, goal))) <= 1e-6


def test_sweep_functions_and_gradient_variant(rng):
    s = full_skeleton(2)
    goal = haar_random_unitary(2, rng)
    ang = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
    a1, c1 = sweep_svd(s, ang, goal)
    a2, c2 = sweep_euler_gradient(s, ang, goal)
    c0 = overlap_cost(goal, evaluate(s, ang))
    assert c1 <= c0 and c2 <= c0
    assert c1 == pytest.approx(overlap_cost(goal, evaluate(s, a1)), abs=1e-12)


@pytest.mark.parametrize("variant", list(Variant))
def test_n2_haar_converges(variant):
    rng = np.random.default_rng(21)
    for seed in range(5):
        goal = haar_random_unitary(2, rng)
        r = synthesize(goal, full_skeleton(2), OptimizerConfig(variant=variant), seed=seed)
        assert r.status is Status.CONVERGED and r.final_cost <= 1e-8
        assert r.final_cost == r.trace[-1][1]


def test_identity_target():
    for n in (1, 2):
        s = full_skeleton(n) if n == 2 else Skeleton(1, [])
        r = synthesize(np.eye(2**n), s, seed=3)
        assert r.converged and r.final_cost <= 1e-10 and r.sweeps_used <= 5


def test_reproducible_traces(rng):
    s = sequential_random_skeleton(3, 14, rng)
    goal = haar_random_unitary(3, rng)
    cfg = OptimizerConfig(max_sweeps=300)
    a, b = synthesize(goal, s, cfg, seed=9), synthesize(goal, s, cfg, seed=9)
    assert [t[:2] for t in a.trace] == [t[:2] for t in b.trace]
    assert np.array_equal(a.angles, b.angles)


def test_budget_and_plateau_status():
    rng = np.random.default_rng(0)
    goal = haar_random_unitary(2, rng)
    r = synthesize(goal, full_skeleton(2), OptimizerConfig(max_sweeps=2), seed=1)
    assert r.status is Status.BUDGET_EXHAUSTED and r.sweeps_used == 2
    r = synthesize(goal, full_skeleton(2, 2), OptimizerConfig(plateau_window=20), seed=1)
    assert r.status is Status.PLATEAUED and r.final_cost > 1e-3
    assert [s.exit_code for s in Status] == [0, 2, 3]


def test_cnot_direction_irrelevant(rng):
    layers = [[(0, 1)], [(1, 2)], [(0, 2)]] * 4 + [[(0, 1)], [(1, 2)]]
    s = Skeleton(3, layers, "support")
    flipped = Skeleton(3, [[(t, c) for c, t in x] for x in layers], "support")
    goal = haar_random_unitary(3, rng)
    for sk in (s, flipped):
        assert synthesize(goal, sk, seed=5).final_cost <= 1e-8


def test_input_validation(rng):
    s = full_skeleton(2)
    with pytest.raises(ValueError):
        synthesize(np.eye(8), s)
    with pytest.raises(ValueError):
        synthesize(2 * np.eye(4), s)
    with pytest.raises(ValueError):
        OptimizerConfig(convergence_threshold=0)
    with pytest.raises(ValueError):
        OptimizerConfig(max_sweeps=0)
    with pytest.raises(ValueError):
        OptimizerConfig.from_dict({"bogus": 1})
    cfg = OptimizerConfig(variant="euler_gradient")
    assert OptimizerConfig.from_dict(cfg.to_dict()) == cfg


def test_multistart_order(rng):
    goal = haar_random_unitary(2, rng)
    res = multistart(goal, full_skeleton(2), None, [5, 6, 7], jobs=2)
    assert [r.seed for r in res] == [5, 6, 7]
    single = synthesize(goal, full_skeleton(2), seed=6)
    assert [t[:2] for t in res[1].trace] == [t[:2] for t in single.trace]


def test_trace_csv_round_trip(tmp_path, rng):
    r = synthesize(haar_random_unitary(2, rng), full_skeleton(2), seed=1)
    write_trace_csv(tmp_path / "t.csv", r.trace)
    back = read_trace_csv(tmp_path / "t.csv")
    assert back == [(s, c) for s, c, _ in r.trace]
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "sweep,cost,wall_seconds"
    (tmp_path / "e.csv").write_text("sweep,cost,wall_seconds\n")
    with pytest.raises(ValueError):
        read_trace_csv(tmp_path / "e.csv")
