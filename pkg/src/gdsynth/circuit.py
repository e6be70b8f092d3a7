"""Circuit data model: skeletons, angle assignments, evaluation and I/O.

A circuit is ``S_L T_{L-1} ... S_2 T_1 S_1`` (``S_1`` acts first): ``S`` layers
of parameterized single-qubit gates alternating with ``T`` layers of
simultaneous, pairwise-disjoint CNOTs. The discrete part is a
:class:`Skeleton`; the continuous part is an ``(n_slots, 3)`` array of Euler
angles in canonical slot order (layer-major, then qubit-ascending).
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .kernels import SweepKernel
from .linalg import gates_from_angles, rx, rz, su2_to_euler, unitarity_error

JSON_VERSION = 1

Pair = tuple[int, int]
CnotLayer = tuple[Pair, ...]


class Dressing(str, enum.Enum):
    """Where single-qubit gate slots are placed.

    ``FULL``: every qubit in every S-layer.
    ``SUPPORT``: all qubits first, then after each CNOT layer only the qubits
    it touched, then all qubits again at the end.
    """

    FULL = "full"
    SUPPORT = "support"


class CircuitFormatError(ValueError):
    """A circuit document is malformed; the message names the offending field."""


class UnsupportedVersionError(CircuitFormatError):
    pass


@dataclass(frozen=True)
class Skeleton:
    n_qubits: int
    cnot_layers: tuple[CnotLayer, ...]
    dressing: Dressing = Dressing.FULL

    def __post_init__(self):
        layers = tuple(tuple((int(c), int(t)) for c, t in layer) for layer in self.cnot_layers)
        object.__setattr__(self, "cnot_layers", layers)
        object.__setattr__(self, "dressing", Dressing(self.dressing))
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        for i, layer in enumerate(layers):
            seen: set[int] = set()
            for c, t in layer:
                if c == t:
                    raise ValueError(f"layer {i}: CNOT control equals target ({c})")
                for q in (c, t):
                    if not 0 <= q < self.n_qubits:
                        raise ValueError(f"layer {i}: qubit {q} out of range")
                    if q in seen:
                        raise ValueError(f"layer {i}: qubit {q} used twice")
                    seen.add(q)

    @property
    def n_cnot_layers(self) -> int:
        return len(self.cnot_layers)

    @property
    def n_s_layers(self) -> int:
        if self.dressing is Dressing.FULL:
            return self.n_cnot_layers + 1
        return self.n_cnot_layers + 2

    @property
    def n_cnots(self) -> int:
        return sum(len(layer) for layer in self.cnot_layers)

    @cached_property
    def s_layers(self) -> tuple[tuple[int, ...], ...]:
        """Qubits carrying a gate slot in each S-layer, in time order."""
        every = tuple(range(self.n_qubits))
        if self.dressing is Dressing.FULL:
            return (every,) * (self.n_cnot_layers + 1)
        supports = tuple(tuple(sorted(q for pair in layer for q in pair)) for layer in self.cnot_layers)
        return (every, *supports, every)

    @cached_property
    def slots(self) -> tuple[tuple[int, int], ...]:
        """``(s_layer, qubit)`` for every slot in canonical order."""
        return tuple((i, q) for i, qs in enumerate(self.s_layers) for q in qs)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    @cached_property
    def program(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flattened time-ordered operation arrays ``(kind, qa, qb, slot)`` for the kernels."""
        kind, qa, qb, slot = [], [], [], []
        s = 0
        for i, qs in enumerate(self.s_layers):
            for q in qs:
                kind.append(0), qa.append(q), qb.append(-1), slot.append(s)
                s += 1
            if i < self.n_cnot_layers:
                for c, t in self.cnot_layers[i]:
                    kind.append(1), qa.append(c), qb.append(t), slot.append(-1)
        return tuple(np.array(x, dtype=np.int32) for x in (kind, qa, qb, slot))

    def with_layers(self, cnot_layers) -> "Skeleton":
        return Skeleton(self.n_qubits, tuple(cnot_layers), self.dressing)


def slot_count(s: Skeleton) -> int:
    return s.n_slots


def make_kernel(s: Skeleton, angles: np.ndarray, u_goal: np.ndarray | None = None, backend=None):
    """Build a sweep kernel bound to ``angles`` (updated in place by sweeps).

    Returns ``(kernel, gates, angles)``; ``gates`` and ``angles`` are the arrays
    the kernel mutates.
    """
    angles = np.ascontiguousarray(angles, dtype=float).reshape(s.n_slots, 3)
    gates = np.ascontiguousarray(gates_from_angles(angles))
    if u_goal is None:
        u_goal = np.eye(2**s.n_qubits, dtype=complex)
    cls = SweepKernel if backend is None else backend
    kernel = cls(s.n_qubits, *s.program, np.ascontiguousarray(u_goal, dtype=complex), gates, angles)
    return kernel, gates, angles


def _check_angles(s: Skeleton, angles) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (s.n_slots, 3):
        raise ValueError(f"expected angles of shape {(s.n_slots, 3)}, got {angles.shape}")
    return angles


def evaluate(s: Skeleton, angles) -> np.ndarray:
    """The circuit unitary ``U_circ``."""
    angles = _check_angles(s, angles)
    kernel, _, _ = make_kernel(s, angles.copy())
    return kernel.evaluate()


def normalize(s: Skeleton, angles) -> np.ndarray:
    """Push the CNOT-commuting rotation of every gate into the next S-layer.

    A CNOT commutes with ``Rz`` on its control and ``Rx`` on its target. Each
    gate of a non-final layer is split as ``R @ V`` with ``R`` such a rotation
    and ``V = Ry(theta1) Rz(theta3)``; ``R`` is moved past the CNOT layer and
    multiplied into the following gate on the same qubit. Qubits idle in a
    CNOT layer are treated like controls. The result has ``theta2 == 0`` on
    every non-final slot and implements the same unitary up to global phase.
    """
    if s.dressing is not Dressing.FULL:
        raise ValueError("normalize requires FULL dressing")
    angles = _check_angles(s, angles)
    n = s.n_qubits
    gates = gates_from_angles(angles).reshape(s.n_s_layers, n, 2, 2)
    out = np.zeros((s.n_s_layers, n, 3))
    carry = [np.eye(2, dtype=complex) for _ in range(n)]
    for i in range(s.n_s_layers):
        targets = {t for _, t in s.cnot_layers[i]} if i < s.n_cnot_layers else set()
        for q in range(n):
            g = gates[i, q] @ carry[q]
            if i == s.n_s_layers - 1:
                out[i, q] = su2_to_euler(_resu2(g))
                continue
            a, b = g[0, 0], g[1, 0]
            if q in targets:
                # g = Rx(c) Ry(theta1) Rz(theta3)
                c = np.arctan2(2 * (a * b.conjugate()).imag, abs(a) ** 2 - abs(b) ** 2)
                r = rx(c)
            else:
                c = np.angle(b) - np.angle(a) if abs(a) > 0 and abs(b) > 0 else 0.0
                r = rz(c)
            v = r.conj().T @ g
            out[i, q] = _yz_angles(v)
            carry[q] = r
    return out.reshape(-1, 3)


def _resu2(g: np.ndarray) -> np.ndarray:
    g = 0.5 * (g + np.array([[g[1, 1].conjugate(), -g[1, 0].conjugate()],
                             [-g[0, 1].conjugate(), g[0, 0].conjugate()]]))
    return g / np.sqrt(np.linalg.det(g))


def _yz_angles(v: np.ndarray) -> tuple[float, float, float]:
    """Angles ``(theta1, 0, theta3)`` with ``Ry(theta1) Rz(theta3) == v``."""
    ref = v[0, 0] if abs(v[0, 0]) >= abs(v[1, 0]) else v[1, 0]
    theta3 = -2 * np.angle(ref)
    ph = np.exp(0.5j * theta3)
    c, s = (v[0, 0] * ph).real, (v[1, 0] * ph).real
    return 2 * np.arctan2(s, c), 0.0, theta3


def export_qasm(s: Skeleton, angles) -> str:
    """OpenQASM 2.0 text using ``rz``/``ry``/``cx`` in time order."""
    angles = _check_angles(s, angles)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{s.n_qubits}];"]
    idx = 0
    for i, qs in enumerate(s.s_layers):
        for q in qs:
            t1, t2, t3 = (repr(float(x)) for x in angles[idx])
            lines.append(f"rz({t3}) q[{q}];")
            lines.append(f"ry({t1}) q[{q}];")
            lines.append(f"rz({t2}) q[{q}];")
            idx += 1
        if i < s.n_cnot_layers:
            for c, t in s.cnot_layers[i]:
                lines.append(f"cx q[{c}],q[{t}];")
    return "\n".join(lines) + "\n"


def circuit_to_dict(s: Skeleton, angles) -> dict:
    angles = _check_angles(s, angles)
    return {
        "version": JSON_VERSION,
        "n_qubits": s.n_qubits,
        "dressing": s.dressing.value,
        "cnot_layers": [[[c, t] for c, t in layer] for layer in s.cnot_layers],
        "angles": [[float(x) for x in row] for row in angles],
    }


def dumps(s: Skeleton, angles) -> str:
    # json writes floats with repr(), the shortest string that round-trips exactly
    return json.dumps(circuit_to_dict(s, angles))


def _field(doc, name, kind):
    if name not in doc:
        raise CircuitFormatError(f"missing field {name!r}")
    value = doc[name]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise CircuitFormatError(f"field {name!r} has wrong type {type(value).__name__}")
    return value


def circuit_from_dict(doc: dict, require_angles: bool = True) -> tuple[Skeleton, np.ndarray]:
    """Parse a circuit document; without ``require_angles`` a missing ``angles`` field means zeros."""
    if not isinstance(doc, dict):
        raise CircuitFormatError("document is not a JSON object")
    version = _field(doc, "version", int)
    if version != JSON_VERSION:
        raise UnsupportedVersionError(f"unsupported circuit version {version} (expected {JSON_VERSION})")
    n = _field(doc, "n_qubits", int)
    dressing = _field(doc, "dressing", str)
    if dressing not in {d.value for d in Dressing}:
        raise CircuitFormatError(f"field 'dressing' has unknown value {dressing!r}")
    raw_layers = _field(doc, "cnot_layers", list)
    try:
        layers = tuple(tuple((int(c), int(t)) for c, t in layer) for layer in raw_layers)
    except (TypeError, ValueError) as exc:
        raise CircuitFormatError(f"field 'cnot_layers' is malformed: {exc}") from None
    try:
        skeleton = Skeleton(n, layers, Dressing(dressing))
    except ValueError as exc:
        raise CircuitFormatError(f"field 'cnot_layers' is invalid: {exc}") from None
    if "angles" not in doc and not require_angles:
        return skeleton, np.zeros((skeleton.n_slots, 3))
    raw_angles = _field(doc, "angles", list)
    try:
        angles = np.array(raw_angles, dtype=float).reshape(len(raw_angles), -1)
    except (TypeError, ValueError) as exc:
        raise CircuitFormatError(f"field 'angles' is malformed: {exc}") from None
    if angles.shape != (skeleton.n_slots, 3):
        raise CircuitFormatError(
            f"field 'angles' has shape {angles.shape}, expected {(skeleton.n_slots, 3)}"
        )
    return skeleton, angles


def loads(text: str, require_angles: bool = True) -> tuple[Skeleton, np.ndarray]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"invalid JSON: {exc}") from None
    return circuit_from_dict(doc, require_angles)


def assert_unitary(u: np.ndarray, atol: float) -> None:
    err = unitarity_error(u)
    if err > atol:
        raise ValueError(f"matrix is not unitary: max|U^dagger U - I| = {err:.3e}")
