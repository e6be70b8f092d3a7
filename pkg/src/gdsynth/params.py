"""Effective-parameter analysis of skeletons.

Three independent ways to decide whether a skeleton can reach a generic
unitary (``4^n - 1`` real parameters):

* numeric rank of the parameter-to-unitary map at a random point, either by
  central finite differences (``method="fd"``) or from the exact tangent
  vectors ``A_k sigma A_k^dagger`` (``method="tangent"``, much faster);
* combinatorial counting for one-CNOT-per-layer skeletons: ``3n`` for the
  first layer plus 4 per CNOT, minus losses from redundant blocks;
* exact dynamic-programming counts over all three-qubit pair sequences.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .circuit import Dressing, Skeleton, make_kernel
from .linalg import PAULI_X, PAULI_Y, PAULI_Z, euler_to_su2
from .skeletons import sequential_random_skeleton

DEFAULT_BUDGET = 4000
DEFAULT_SEED = 20240917
FD_STEP = 1e-5
RANK_RTOL = 1e-7
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


class Method(str, enum.Enum):
    COMBINATORIAL = "combinatorial"
    JACOBIAN_RANK = "jacobian_rank"


class BudgetExceededError(ValueError):
    pass


@dataclass(frozen=True)
class ParamReport:
    nominal: int
    effective: int
    required: int
    adequate: bool
    method: Method

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


def _report(s: Skeleton, effective: int, method: Method) -> ParamReport:
    required = 4**s.n_qubits - 1
    nominal = 3 * s.n_slots
    effective = min(int(effective), nominal, required)
    return ParamReport(nominal, effective, required, effective >= required, method)


def gate_symmetry_loss(spectrum, tol: float = 1e-9) -> int:
    """Parameters lost per use of a two-qubit coupler with this spectrum.

    Sum over distinct eigenvalues of ``multiplicity - 1``: 2 for CNOT/CZ, 0 for
    Sycamore. SWAP is outside this rule (its true loss is 6); use
    :func:`coupler_loss`, which rejects it.
    """
    vals = [complex(v) for v in spectrum]
    groups: list[list[complex]] = []
    for v in vals:
        for g in groups:
            if abs(g[0] - v) <= tol:
                g.append(v)
                break
        else:
            groups.append([v])
    return sum(len(g) - 1 for g in groups)


def coupler_loss(u: np.ndarray) -> int:
    u = np.asarray(u, dtype=complex)
    if u.shape == (4, 4) and abs(abs(np.vdot(SWAP, u)) - 4) < 1e-9:
        raise ValueError("SWAP does not mix the symmetric and antisymmetric subspaces; unsupported coupler")
    return gate_symmetry_loss(np.linalg.eigvals(u))


def _rank(mat: np.ndarray) -> int:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > RANK_RTOL * sv[0]))


def _random_angles(s: Skeleton, seed, rng) -> np.ndarray:
    if rng is None:
        rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2 * np.pi, size=(s.n_slots, 3))


def jacobian_fd(s: Skeleton, angles: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Real Jacobian of angles -> (Re, Im) of ``U_circ`` with the global phase fixed.

    The phase is fixed by rotating the largest-magnitude entry (chosen at the
    base point) onto the positive real axis.
    """
    angles = np.array(angles, dtype=float)
    kernel, gates, ang = make_kernel(s, angles)
    u0 = kernel.evaluate()
    m = np.unravel_index(np.argmax(np.abs(u0)), u0.shape)

    def image():
        u = kernel.evaluate()
        u = u * (u[m].conjugate() / abs(u[m]))
        return np.concatenate([u.real.ravel(), u.imag.ravel()])

    cols = []
    for k in range(s.n_slots):
        for i in range(3):
            orig = ang[k, i]
            ang[k, i] = orig + step
            gates[k] = euler_to_su2(ang[k])
            fp = image()
            ang[k, i] = orig - step
            gates[k] = euler_to_su2(ang[k])
            fm = image()
            ang[k, i] = orig
            gates[k] = euler_to_su2(ang[k])
            cols.append((fp - fm) / (2 * step))
    return np.array(cols).T


def tangent_vectors(s: Skeleton, angles: np.ndarray) -> np.ndarray:
    """Right-translated tangent directions of every slot, as real coordinate rows.

    For slot ``k`` on qubit ``q`` with ``A_k`` the product of all later
    operations, the directions are ``A_k sigma_q A_k^dagger`` for the three
    Paulis; their span is the image of the differential at ``angles`` whenever
    every Euler chart is regular there (true for generic angles).
    """
    n = s.n_qubits
    dim = 2**n
    kernel, _, _ = make_kernel(s, np.array(angles, dtype=float))
    suffix = kernel.suffix_products()
    qubits = np.array([q for _, q in s.slots])
    iu = np.triu_indices(dim)
    iu1 = np.triu_indices(dim, 1)
    rows = []
    for q in range(n):
        sel = np.nonzero(qubits == q)[0]
        if sel.size == 0:
            continue
        a = suffix[sel]
        a5 = a.reshape(len(sel), dim, 2**q, 2, 2 ** (n - q - 1))
        ah = a.conj().transpose(0, 2, 1)
        for sigma in (PAULI_X, PAULI_Y, PAULI_Z):
            b = np.einsum("mnaib,ij->mnajb", a5, sigma).reshape(len(sel), dim, dim)
            h = b @ ah
            rows.append(np.concatenate([h.real[:, iu[0], iu[1]], h.imag[:, iu1[0], iu1[1]]], axis=1))
    return np.concatenate(rows, axis=0) if rows else np.zeros((0, dim * dim))


def effective_parameters_numeric(
    s: Skeleton,
    method: str = "fd",
    seed: int = DEFAULT_SEED,
    rng: np.random.Generator | None = None,
    budget: int = DEFAULT_BUDGET,
    angles: np.ndarray | None = None,
) -> ParamReport:
    """Numeric rank of the parameter-to-unitary map at a random point.

    ``method="fd"`` differentiates by central differences (step 1e-5);
    ``method="tangent"`` uses exact tangent vectors. Rank counts singular
    values above ``1e-7`` times the largest.
    """
    if 3 * s.n_slots > budget:
        raise BudgetExceededError(f"{3 * s.n_slots} parameters exceed the budget of {budget}")
    if angles is None:
        angles = _random_angles(s, seed, rng)
    if method == "fd":
        rank = _rank(jacobian_fd(s, angles))
    elif method == "tangent":
        rank = _rank(tangent_vectors(s, angles))
    else:
        raise ValueError(f"unknown method {method!r}")
    return _report(s, rank, Method.JACOBIAN_RANK)


def sequential_pairs(s: Skeleton) -> list[tuple[int, int]]:
    if s.dressing is not Dressing.SUPPORT or any(len(layer) != 1 for layer in s.cnot_layers):
        raise ValueError(
            "combinatorial counting needs one CNOT per layer with support dressing; "
            "use effective_parameters_numeric"
        )
    return [tuple(sorted(layer[0])) for layer in s.cnot_layers]


def run_loss(m: int) -> int:
    """Loss of a run of ``m`` CNOTs on one pair: 3 for a triple, 4 more per extra CNOT."""
    return 0 if m < 3 else 3 + 4 * (m - 3)


def _pair_run_losses(pairs: list[tuple[int, int]]) -> int:
    # CNOTs on disjoint pairs commute, so they do not interrupt a run
    loss = 0
    open_runs: dict[tuple[int, int], int] = {}
    for p in pairs:
        for q in list(open_runs):
            if q != p and set(q) & set(p):
                loss += run_loss(open_runs.pop(q))
        open_runs[p] = open_runs.get(p, 0) + 1
    return loss + sum(run_loss(m) for m in open_runs.values())


def combinatorial_effective(n: int, pairs: list[tuple[int, int]], clamp: bool = True) -> int:
    """Count for a pair sequence: ``3n + 4N`` minus block losses, clamped at ``4^n - 1``.

    A block of CNOTs confined to ``k`` qubits can contribute at most
    ``4^k - 1``; for ``k = 2`` this is the run rule, for ``k`` between 3 and
    ``n - 1`` every maximal contiguous segment inside a fixed ``k``-subset is
    capped at ``3k + 4m`` minus its inner run losses. With ``clamp=False`` the
    final cap at ``4^n - 1`` is skipped, which exposes boundary cases.
    """
    total = 3 * n + 4 * len(pairs) - _pair_run_losses(pairs)
    for k in range(3, n):
        cap = 4**k - 1
        for subset in itertools.combinations(range(n), k):
            sub = set(subset)
            seg: list[tuple[int, int]] = []
            for p in [*pairs, None]:
                if p is not None and set(p) <= sub:
                    seg.append(p)
                    continue
                if seg:
                    value = 3 * k + 4 * len(seg) - _pair_run_losses(seg)
                    total -= max(0, value - cap)
                    seg = []
    return min(total, 4**n - 1) if clamp else total


def effective_parameters_combinatorial(s: Skeleton) -> ParamReport:
    pairs = sequential_pairs(s)
    return _report(s, combinatorial_effective(s.n_qubits, pairs), Method.COMBINATORIAL)


@dataclass(frozen=True)
class AdequacyCount:
    n_cnots: int
    count: int
    total: int

    @property
    def rate(self) -> Fraction:
        return Fraction(self.count, self.total)


def count_adequate_sequences(n_cnots: int, n: int = 3) -> AdequacyCount:
    """Exact number of three-qubit pair sequences of length ``n_cnots`` judged adequate.

    Dynamic programming over (current run length, accumulated run loss); a
    sequence is adequate when ``9 + 4N - loss >= 63``. Letters are
    interchangeable, so the first letter contributes a factor 3 and every
    letter change a factor 2.
    """
    if n != 3:
        raise ValueError("exact counting is only defined for n = 3; use success_rate_monte_carlo")
    if not 0 <= n_cnots <= 30:
        raise ValueError(f"n_cnots must be in [0, 30], got {n_cnots}")
    total = 3**n_cnots
    budget = 9 + 4 * n_cnots - 63
    if budget < 0 or n_cnots == 0:
        return AdequacyCount(n_cnots, 0, total)
    cap = budget + 1
    states = {(1, 0): 3}
    for _ in range(n_cnots - 1):
        nxt: dict[tuple[int, int], int] = {}
        for (run, loss), c in states.items():
            key = (run + 1, loss)
            nxt[key] = nxt.get(key, 0) + c
            key = (1, min(cap, loss + run_loss(run)))
            nxt[key] = nxt.get(key, 0) + 2 * c
        states = nxt
    count = sum(c for (run, loss), c in states.items() if loss + run_loss(run) <= budget)
    return AdequacyCount(n_cnots, count, total)


def count_adequate_bruteforce(n_cnots: int) -> int:
    """Enumerate all ``3^N`` sequences; reference for :func:`count_adequate_sequences`."""
    letters = [(0, 1), (0, 2), (1, 2)]
    return sum(
        combinatorial_effective(3, [letters[i] for i in word]) >= 63
        for word in itertools.product(range(3), repeat=n_cnots)
    )


def _classify(n: int, n_cnots: int, seed, method: str, budget: int, samples: int) -> int:
    rng = np.random.default_rng(seed)
    ok = 0
    for _ in range(samples):
        s = sequential_random_skeleton(n, n_cnots, rng)
        if method == "combinatorial":
            ok += combinatorial_effective(n, sequential_pairs(s)) >= 4**n - 1
        else:
            ok += effective_parameters_numeric(s, method="tangent", rng=rng, budget=budget).adequate
    return ok


@dataclass(frozen=True)
class RateEstimate:
    n_qubits: int
    n_cnots: int
    samples: int
    successes: int
    method: str

    @property
    def rate(self) -> float:
        return self.successes / self.samples

    @property
    def stderr(self) -> float:
        p = self.rate
        return float(np.sqrt(p * (1 - p) / self.samples))


MC_CHUNK = 250


def success_rate_monte_carlo(
    n: int,
    n_cnots: int,
    samples: int,
    rng: np.random.Generator | int | None = None,
    method: str = "auto",
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> RateEstimate:
    """Fraction of random sequential skeletons with full effective rank.

    ``method="auto"`` counts combinatorially for ``n = 3`` and by numeric
    tangent rank for larger ``n`` while ``3 * slots`` fits the budget.
    Samples are split into fixed chunks with independent seeds, so the
    estimate does not depend on ``jobs``.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if method == "auto":
        n_params = 3 * (2 * n + 2 * n_cnots)
        method = "combinatorial" if n == 3 or n_params > budget else "numeric"
    if method not in ("combinatorial", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    sizes = [min(MC_CHUNK, samples - i) for i in range(0, samples, MC_CHUNK)]
    seeds = [int(x) for x in rng.integers(0, 2**63, size=len(sizes))]
    args = [(n, n_cnots, sd, method, budget, sz) for sd, sz in zip(seeds, sizes)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            counts = list(pool.map(_classify, *zip(*args)))
    else:
        counts = [_classify(*a) for a in args]
    return RateEstimate(n, n_cnots, samples, int(sum(counts)), method)
