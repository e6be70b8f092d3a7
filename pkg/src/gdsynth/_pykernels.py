"""Pure numpy implementation of the sweep kernel.

This is the fallback used when the compiled ``_ckernels`` extension is not
available. Both implementations expose the same :class:`SweepKernel` API and
must agree to rounding error (checked in the test suite).

A circuit is flattened into a program of ``M`` operations in time order.
Operation ``k`` is either a gate slot (``kind[k] == 0``, acting on qubit
``qa[k]`` with gate index ``slot[k]``) or a single CNOT (``kind[k] == 1``,
control ``qa[k]``, target ``qb[k]``). The kernel keeps one environment
matrix ``E = L^dagger U_goal R^dagger`` where ``L``/``R`` are the products of all
operations after/before the current position, so moving one step costs two
local operations on an ``N x N`` matrix.
"""
from __future__ import annotations

import numpy as np

from .linalg import DEGENERATE_SV, DegenerateEnvironmentError

SLOT, CX = 0, 1


def _su2_angles(g: np.ndarray) -> tuple[float, float, float]:
    alpha, beta = g[0, 0], g[1, 0]
    theta1 = 2.0 * np.arctan2(abs(beta), abs(alpha))
    arg_a = np.arctan2(alpha.imag, alpha.real)
    arg_b = np.arctan2(beta.imag, beta.real)
    return theta1, arg_b - arg_a, -arg_a - arg_b


def _su2_from(theta1: float, theta2: float, theta3: float) -> np.ndarray:
    c, s = np.cos(0.5 * theta1), np.sin(0.5 * theta1)
    alpha = np.exp(-0.5j * (theta2 + theta3)) * c
    beta = np.exp(0.5j * (theta2 - theta3)) * s
    return np.array([[alpha, -beta.conjugate()], [beta, alpha.conjugate()]])


def _overlap(g: np.ndarray, a: np.ndarray) -> complex:
    return complex(np.vdot(g, a))


class SweepKernel:
    def __init__(self, n, kind, qa, qb, slot, goal, gates, angles):
        self.n = int(n)
        self.N = 2**self.n
        self.kind = np.asarray(kind, dtype=np.int32)
        self.qa = np.asarray(qa, dtype=np.int32)
        self.qb = np.asarray(qb, dtype=np.int32)
        self.slot = np.asarray(slot, dtype=np.int32)
        self.M = len(self.kind)
        self.goal = np.ascontiguousarray(goal, dtype=complex)
        self.gates = gates
        self.angles = angles
        self.E = np.empty((self.N, self.N), dtype=complex)
        self.pos = 0
        self._perm = {}

    # -- local operations -------------------------------------------------
    def _shape(self, q):
        return 2**q, 2, 2 ** (self.n - q - 1)

    def _left_gate(self, m, g, q):
        hi, _, lo = self._shape(q)
        v = m.reshape(hi, 2, lo * self.N)
        v[:] = np.einsum("ab,ibj->iaj", g, v)

    def _right_gate(self, m, g, q):
        hi, _, lo = self._shape(q)
        v = m.reshape(self.N, hi, 2, lo)
        v[:] = np.einsum("niaj,ab->nibj", v, g)

    def _cx_perm(self, c, t):
        key = (c, t)
        if key not in self._perm:
            idx = np.arange(self.N)
            cm, tm = 1 << (self.n - 1 - c), 1 << (self.n - 1 - t)
            self._perm[key] = np.where(idx & cm, idx ^ tm, idx)
        return self._perm[key]

    def _left_op(self, m, k, dagger):
        if self.kind[k] == SLOT:
            g = self.gates[self.slot[k]]
            self._left_gate(m, g.conj().T if dagger else g, self.qa[k])
        else:
            m[:] = m[self._cx_perm(self.qa[k], self.qb[k])]

    def _right_op(self, m, k, dagger):
        if self.kind[k] == SLOT:
            g = self.gates[self.slot[k]]
            self._right_gate(m, g.conj().T if dagger else g, self.qa[k])
        else:
            m[:] = m[:, self._cx_perm(self.qa[k], self.qb[k])]

    def _ptrace(self, q):
        hi, _, lo = self._shape(q)
        return np.einsum("iajibj->ab", self.E.reshape(hi, 2, lo, hi, 2, lo))

    def _step_right(self, k):
        self._left_op(self.E, k + 1, False)
        self._right_op(self.E, k, True)

    def _step_left(self, k):
        self._left_op(self.E, k, True)
        self._right_op(self.E, k - 1, False)

    # -- public API -------------------------------------------------------
    def position_cost(self) -> float:
        """Cost computed from the running environment at the current position."""
        k = self.pos
        if self.kind[k] == SLOT:
            t = _overlap(self.gates[self.slot[k]], self._ptrace(self.qa[k]))
        else:
            p = self._cx_perm(self.qa[k], self.qb[k])
            t = complex(self.E[np.arange(self.N), p].sum())
        return self.N - abs(t)

    def rebuild(self) -> float:
        """Recompute the environment at position 0 from scratch; return the exact cost."""
        self.E[:] = self.goal
        for k in range(self.M - 1, 0, -1):
            self._left_op(self.E, k, True)
        self.pos = 0
        return self.position_cost()

    def _svd_update(self, k, log):
        s = self.slot[k]
        a = self._ptrace(self.qa[k])
        old = abs(_overlap(self.gates[s], a))
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        fro2 = float(np.sum(np.abs(a) ** 2))
        adet = abs(det)
        ssum = np.sqrt(fro2 + 2 * adet)
        smax = 0.5 * (ssum + np.sqrt(max(fro2 - 2 * adet, 0.0)))
        if smax <= 0 or adet / smax <= DEGENERATE_SV:
            raise DegenerateEnvironmentError(f"degenerate environment at slot {s}")
        if ssum >= old:
            half = np.exp(-0.5j * np.angle(det))
            adj_h = np.array(
                [[a[1, 1].conjugate(), -a[1, 0].conjugate()], [-a[0, 1].conjugate(), a[0, 0].conjugate()]]
            )
            g = (half * a + adj_h / half) / ssum
            self.gates[s] = g
            self.angles[s] = _su2_angles(g)
            val = ssum
        else:
            val = old
        if log is not None:
            log.append(self.N - val)

    def _grad_update(self, k, lr, log):
        s = self.slot[k]
        a = self._ptrace(self.qa[k])
        th = [float(x) for x in self.angles[s]]
        for i in range(3):
            g = _su2_from(*th)
            t = _overlap(g, a)
            dg = _dgate(th, i)
            dt = _overlap(dg, a)
            mag = abs(t)
            if mag > 0:
                # d|t|/dtheta; cost decreases along +d|t|
                th[i] += lr * (t.conjugate() * dt).real / mag
        g = _su2_from(*th)
        self.gates[s] = g
        self.angles[s] = th
        if log is not None:
            log.append(self.N - abs(_overlap(g, a)))

    def _sweep(self, update, log, rebuild):
        self.rebuild()
        last = self.M - 1
        for k in range(self.M):
            if self.kind[k] == SLOT:
                update(k, log)
            if k < last:
                self._step_right(k)
        for k in range(last, -1, -1):
            if self.kind[k] == SLOT and k != last:
                update(k, log)
            if k > 0:
                self._step_left(k)
        self.pos = 0
        return self.rebuild() if rebuild else self.position_cost()

    def sweep_svd(self, log=None, rebuild=True) -> float:
        return self._sweep(self._svd_update, log, rebuild)

    def sweep_gradient(self, lr, log=None, rebuild=True) -> float:
        return self._sweep(lambda k, lg: self._grad_update(k, lr, lg), log, rebuild)

    def environments(self) -> np.ndarray:
        """Environment of every slot at the current parameters, in slot order."""
        out = np.empty((len(self.gates), 2, 2), dtype=complex)
        self.rebuild()
        for k in range(self.M):
            if self.kind[k] == SLOT:
                out[self.slot[k]] = self._ptrace(self.qa[k])
            if k < self.M - 1:
                self._step_right(k)
        self.pos = self.M - 1
        return out

    def evaluate(self) -> np.ndarray:
        u = np.eye(self.N, dtype=complex)
        for k in range(self.M):
            self._left_op(u, k, False)
        return u

    def suffix_products(self) -> np.ndarray:
        """For every slot, the product of all operations after it."""
        out = np.empty((len(self.gates), self.N, self.N), dtype=complex)
        x = np.eye(self.N, dtype=complex)
        for k in range(self.M - 1, -1, -1):
            if self.kind[k] == SLOT:
                out[self.slot[k]] = x
            self._right_op(x, k, False)
        return out


def _dgate(th, i) -> np.ndarray:
    t1, t2, t3 = th
    c, s = np.cos(0.5 * t1), np.sin(0.5 * t1)
    ea = np.exp(-0.5j * (t2 + t3))
    eb = np.exp(0.5j * (t2 - t3))
    if i == 0:
        da, db = -0.5 * s * ea, 0.5 * c * eb
    elif i == 1:
        da, db = -0.5j * c * ea, 0.5j * s * eb
    else:
        da, db = -0.5j * c * ea, -0.5j * s * eb
    return np.array([[da, -db.conjugate()], [db, da.conjugate()]])
