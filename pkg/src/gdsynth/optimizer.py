"""Sweeping optimizer for unitary synthesis.

The cost is ``C = N - |Tr(U_goal U_circ^dagger)|``. Each sweep visits every
gate slot left to right and back; at a slot the rest of the circuit is frozen
into a 2x2 environment ``A`` so that the overlap is ``Tr(G^dagger A)``. The
SVD variant replaces ``G`` by the SU(2)-projected polar factor of ``A``, the
gradient variant takes one ascent step per Euler angle.
"""
from __future__ import annotations

import csv
import enum
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import Skeleton, make_kernel
from .linalg import is_unitary

_DIM_ATOL = 1e-10


class Variant(str, enum.Enum):
    SVD = "svd"
    EULER_GRADIENT = "euler_gradient"


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    PLATEAUED = "Plateaued"
    BUDGET_EXHAUSTED = "SweepBudgetExhausted"

    @property
    def exit_code(self) -> int:
        return {"Converged": 0, "Plateaued": 2, "SweepBudgetExhausted": 3}[self.value]


@dataclass(frozen=True)
class OptimizerConfig:
    convergence_threshold: float = 1e-8
    plateau_window: int = 200
    plateau_rel_improvement: float = 1e-4
    max_sweeps: int = 50_000
    variant: Variant = Variant.SVD
    learning_rate: float = 0.05
    rng_seed: int | None = None

    def __post_init__(self):
        if not self.convergence_threshold > 0:
            raise ValueError("convergence_threshold must be > 0")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.plateau_window < 1:
            raise ValueError("plateau_window must be >= 1")
        object.__setattr__(self, "variant", Variant(self.variant))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "OptimizerConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown optimizer fields: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class SynthesisResult:
    status: Status
    final_cost: float
    angles: np.ndarray
    trace: list = field(repr=False)  # (sweep, cost, wall_seconds)
    sweeps_used: int
    seed: int | None
    skeleton: Skeleton | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "final_cost": self.final_cost,
            "sweeps_used": self.sweeps_used,
            "seed": self.seed,
        }


def cost(u_goal: np.ndarray, u_circ: np.ndarray) -> float:
    u_goal = np.asarray(u_goal)
    u_circ = np.asarray(u_circ)
    if u_goal.shape != u_circ.shape or u_goal.ndim != 2 or u_goal.shape[0] != u_goal.shape[1]:
        raise ValueError(f"dimension mismatch: {u_goal.shape} vs {u_circ.shape}")
    # Tr(A B^dagger) = sum_ij A_ij conj(B_ij)
    return float(u_goal.shape[0] - abs(np.vdot(u_circ, u_goal)))


def _check_goal(u_goal, s: Skeleton) -> np.ndarray:
    u_goal = np.asarray(u_goal, dtype=complex)
    dim = 2**s.n_qubits
    if u_goal.shape != (dim, dim):
        raise ValueError(f"target has shape {u_goal.shape}, skeleton needs {(dim, dim)}")
    return u_goal


def environment(s: Skeleton, angles, slot: int, u_goal) -> np.ndarray:
    """2x2 matrix ``A`` with ``|Tr(U_goal U_circ^dagger)| = |Tr(G^dagger A)|`` in the gate at ``slot``."""
    if not 0 <= slot < s.n_slots:
        raise IndexError(f"slot {slot} out of range for {s.n_slots} slots")
    return environments(s, angles, u_goal)[slot]


def environments(s: Skeleton, angles, u_goal) -> np.ndarray:
    kernel, _, _ = make_kernel(s, np.array(angles, dtype=float), _check_goal(u_goal, s))
    return kernel.environments()


def _dgates(angles: np.ndarray) -> np.ndarray:
    """Derivatives of the Euler gate w.r.t. each angle, shape ``(slots, 3, 2, 2)``."""
    t1, t2, t3 = angles[:, 0], angles[:, 1], angles[:, 2]
    c, s = np.cos(0.5 * t1), np.sin(0.5 * t1)
    ea = np.exp(-0.5j * (t2 + t3))
    eb = np.exp(0.5j * (t2 - t3))
    da = np.stack([-0.5 * s * ea, -0.5j * c * ea, -0.5j * c * ea], axis=1)
    db = np.stack([0.5 * c * eb, 0.5j * s * eb, -0.5j * s * eb], axis=1)
    out = np.empty(angles.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = da
    out[..., 0, 1] = -db.conj()
    out[..., 1, 0] = db
    out[..., 1, 1] = da.conj()
    return out


def gradient(s: Skeleton, angles, u_goal) -> np.ndarray:
    """Analytic ``dC/dtheta``, shape ``(slots, 3)``."""
    angles = np.asarray(angles, dtype=float)
    kernel, gates, _ = make_kernel(s, angles.copy(), _check_goal(u_goal, s))
    envs = kernel.environments()
    t = np.einsum("kij,kij->k", gates.conj(), envs)
    dt = np.einsum("kaij,kij->ka", _dgates(angles).conj(), envs)
    mag = np.abs(t)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = -(t.conj()[:, None] * dt).real / mag[:, None]
    return np.where(mag[:, None] > 0, g, 0.0)


def sweep_svd(s: Skeleton, angles, u_goal, log: list | None = None) -> tuple[np.ndarray, float]:
    """One bidirectional SVD sweep; returns the new angles and the exact cost."""
    kernel, _, ang = make_kernel(s, np.array(angles, dtype=float), _check_goal(u_goal, s))
    c = kernel.sweep_svd(log)
    return ang, c


def sweep_euler_gradient(
    s: Skeleton, angles, u_goal, config: OptimizerConfig | None = None, log: list | None = None
) -> tuple[np.ndarray, float]:
    lr = (config or OptimizerConfig()).learning_rate
    kernel, _, ang = make_kernel(s, np.array(angles, dtype=float), _check_goal(u_goal, s))
    c = kernel.sweep_gradient(lr, log)
    return ang, c


def random_angles(s: Skeleton, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=(s.n_slots, 3))


def synthesize(
    u_goal,
    s: Skeleton,
    config: OptimizerConfig | None = None,
    seed: int | None = None,
    init: np.ndarray | None = None,
    log_updates: list | None = None,
    backend=None,
    callback=None,
) -> SynthesisResult:
    """Optimize ``s`` towards ``u_goal``.

    Angles start uniform in ``[0, 2pi)`` from ``seed`` (falling back to
    ``config.rng_seed``) unless ``init`` is given. Stops on convergence,
    on a plateau (relative improvement over ``plateau_window`` sweeps below
    ``plateau_rel_improvement``) or when ``max_sweeps`` is reached.
    ``log_updates`` collects the cost after every single slot update.
    """
    config = config or OptimizerConfig()
    u_goal = _check_goal(u_goal, s)
    if not is_unitary(u_goal, atol=_DIM_ATOL):
        raise ValueError("target is not unitary")
    seed = config.rng_seed if seed is None else seed
    if init is None:
        init = random_angles(s, np.random.default_rng(seed))
    kernel, _, angles = make_kernel(s, np.array(init, dtype=float), u_goal, backend=backend)

    if config.variant is Variant.SVD:
        step = kernel.sweep_svd
    else:
        lr = config.learning_rate
        step = lambda log: kernel.sweep_gradient(lr, log)  # noqa: E731

    t0 = time.perf_counter()
    c = kernel.rebuild()
    trace = [(0, c, 0.0)]
    status = Status.BUDGET_EXHAUSTED
    window = config.plateau_window
    if c <= config.convergence_threshold:
        status = Status.CONVERGED
    else:
        for sweep in range(1, config.max_sweeps + 1):
            c = step(log_updates)
            trace.append((sweep, c, time.perf_counter() - t0))
            if callback is not None:
                callback(sweep, c)
            if c <= config.convergence_threshold:
                status = Status.CONVERGED
                break
            if sweep >= window:
                ref = trace[sweep - window][1]
                if ref - c < config.plateau_rel_improvement * ref:
                    status = Status.PLATEAUED
                    break
    return SynthesisResult(status, float(c), angles.copy(), trace, len(trace) - 1, seed, s)


def _run_one(args):
    u_goal, s, config, seed = args
    return synthesize(u_goal, s, config, seed=seed)


def multistart(
    u_goal, s: Skeleton, config: OptimizerConfig | None, seeds, jobs: int = 1
) -> list[SynthesisResult]:
    """Independent runs from several seeds, returned in seed order."""
    config = config or OptimizerConfig()
    args = [(u_goal, s, config, int(sd)) for sd in seeds]
    if jobs > 1 and len(args) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run_one, args))
    return [_run_one(a) for a in args]


def write_trace_csv(path, trace, include_wall: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep", "cost", "wall_seconds"] if include_wall else ["sweep", "cost"])
        for sweep, c, wall in trace:
            row = [sweep, repr(float(c))]
            if include_wall:
                row.append(f"{wall:.6f}")
            w.writerow(row)


def read_trace_csv(path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace")
    return [(int(r["sweep"]), float(r["cost"])) for r in rows]


__all__ = [
    "OptimizerConfig",
    "Status",
    "SynthesisResult",
    "Variant",
    "cost",
    "environment",
    "environments",
    "gradient",
    "multistart",
    "read_trace_csv",
    "sweep_euler_gradient",
    "sweep_svd",
    "synthesize",
    "write_trace_csv",
]
