# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sweep kernel.

Same program layout and API as ``gdsynth._pykernels.SweepKernel``; see that
module for the semantics. Every local operation is a tight loop over the
``N x N`` environment.
"""
import numpy as np

from libc.math cimport atan2, cos, sin, sqrt

from .linalg import DEGENERATE_SV, DegenerateEnvironmentError

ctypedef double complex cplx

cdef int SLOT = 0
cdef double DEGENERATE_SV_C = DEGENERATE_SV


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx cexpi(double phi) nogil:
    return cos(phi) + 1j * sin(phi)


cdef inline double carg(cplx z) nogil:
    return atan2(z.imag, z.real)


cdef inline cplx conj(cplx z) nogil:
    return z.real - 1j * z.imag


cdef inline void left_gate(cplx[:, ::1] m, int N, int mask,
                           cplx g00, cplx g01, cplx g10, cplx g11) noexcept nogil:
    cdef int i, j, c
    cdef cplx x, y
    for i in range(N):
        if i & mask:
            continue
        j = i | mask
        for c in range(N):
            x = m[i, c]
            y = m[j, c]
            m[i, c] = g00 * x + g01 * y
            m[j, c] = g10 * x + g11 * y


cdef inline void right_gate(cplx[:, ::1] m, int N, int mask,
                            cplx g00, cplx g01, cplx g10, cplx g11) noexcept nogil:
    # m <- m @ g on the masked qubit
    cdef int r, i, j
    cdef cplx x, y
    for r in range(N):
        for i in range(N):
            if i & mask:
                continue
            j = i | mask
            x = m[r, i]
            y = m[r, j]
            m[r, i] = x * g00 + y * g10
            m[r, j] = x * g01 + y * g11


cdef inline void left_cx(cplx[:, ::1] m, int N, int cmask, int tmask) noexcept nogil:
    cdef int i, j, c
    cdef cplx x
    for i in range(N):
        if (i & cmask) and not (i & tmask):
            j = i | tmask
            for c in range(N):
                x = m[i, c]
                m[i, c] = m[j, c]
                m[j, c] = x


cdef inline void right_cx(cplx[:, ::1] m, int N, int cmask, int tmask) noexcept nogil:
    cdef int r, i, j
    cdef cplx x
    for r in range(N):
        for i in range(N):
            if (i & cmask) and not (i & tmask):
                j = i | tmask
                x = m[r, i]
                m[r, i] = m[r, j]
                m[r, j] = x


cdef inline void ptrace(cplx[:, ::1] m, int N, int mask, cplx* a) noexcept nogil:
    cdef int i, j
    a[0] = 0; a[1] = 0; a[2] = 0; a[3] = 0
    for i in range(N):
        if i & mask:
            continue
        j = i | mask
        a[0] += m[i, i]
        a[1] += m[i, j]
        a[2] += m[j, i]
        a[3] += m[j, j]


cdef inline cplx overlap(cplx* g, cplx* a) noexcept nogil:
    # Tr(g^dagger a)
    return conj(g[0]) * a[0] + conj(g[1]) * a[1] + conj(g[2]) * a[2] + conj(g[3]) * a[3]


cdef inline void su2_from(double t1, double t2, double t3, cplx* g) noexcept nogil:
    cdef double c = cos(0.5 * t1), s = sin(0.5 * t1)
    cdef cplx alpha = cexpi(-0.5 * (t2 + t3)) * c
    cdef cplx beta = cexpi(0.5 * (t2 - t3)) * s
    g[0] = alpha
    g[1] = -conj(beta)
    g[2] = beta
    g[3] = conj(alpha)


cdef inline void dsu2(double t1, double t2, double t3, int i, cplx* d) noexcept nogil:
    cdef double c = cos(0.5 * t1), s = sin(0.5 * t1)
    cdef cplx ea = cexpi(-0.5 * (t2 + t3))
    cdef cplx eb = cexpi(0.5 * (t2 - t3))
    cdef cplx da, db
    if i == 0:
        da = -0.5 * s * ea
        db = 0.5 * c * eb
    elif i == 1:
        da = -0.5j * c * ea
        db = 0.5j * s * eb
    else:
        da = -0.5j * c * ea
        db = -0.5j * s * eb
    d[0] = da
    d[1] = -conj(db)
    d[2] = db
    d[3] = conj(da)


cdef class SweepKernel:
    cdef readonly int n, N, M, n_slots
    cdef int[::1] kind, qa, qb, slot
    cdef cplx[:, ::1] goal, E
    cdef cplx[:, :, ::1] gates
    cdef double[:, ::1] angles
    cdef object _gates_obj, _angles_obj
    cdef readonly int pos

    def __init__(self, n, kind, qa, qb, slot, goal, gates, angles):
        self.n = n
        self.N = 1 << n
        self.kind = np.ascontiguousarray(kind, dtype=np.int32)
        self.qa = np.ascontiguousarray(qa, dtype=np.int32)
        self.qb = np.ascontiguousarray(qb, dtype=np.int32)
        self.slot = np.ascontiguousarray(slot, dtype=np.int32)
        self.M = len(kind)
        self.goal = np.ascontiguousarray(goal, dtype=complex)
        self._gates_obj = gates
        self._angles_obj = angles
        self.gates = gates
        self.angles = angles
        self.n_slots = gates.shape[0]
        self.E = np.empty((self.N, self.N), dtype=complex)
        self.pos = 0

    @property
    def gates_array(self):
        return self._gates_obj

    cdef inline int mask(self, int q) noexcept nogil:
        return 1 << (self.n - 1 - q)

    cdef void left_op(self, cplx[:, ::1] m, int k, bint dagger) noexcept nogil:
        cdef int s
        if self.kind[k] == SLOT:
            s = self.slot[k]
            if dagger:
                left_gate(m, self.N, self.mask(self.qa[k]),
                          conj(self.gates[s, 0, 0]), conj(self.gates[s, 1, 0]),
                          conj(self.gates[s, 0, 1]), conj(self.gates[s, 1, 1]))
            else:
                left_gate(m, self.N, self.mask(self.qa[k]),
                          self.gates[s, 0, 0], self.gates[s, 0, 1],
                          self.gates[s, 1, 0], self.gates[s, 1, 1])
        else:
            left_cx(m, self.N, self.mask(self.qa[k]), self.mask(self.qb[k]))

    cdef void right_op(self, cplx[:, ::1] m, int k, bint dagger) noexcept nogil:
        cdef int s
        if self.kind[k] == SLOT:
            s = self.slot[k]
            if dagger:
                right_gate(m, self.N, self.mask(self.qa[k]),
                           conj(self.gates[s, 0, 0]), conj(self.gates[s, 1, 0]),
                           conj(self.gates[s, 0, 1]), conj(self.gates[s, 1, 1]))
            else:
                right_gate(m, self.N, self.mask(self.qa[k]),
                           self.gates[s, 0, 0], self.gates[s, 0, 1],
                           self.gates[s, 1, 0], self.gates[s, 1, 1])
        else:
            right_cx(m, self.N, self.mask(self.qa[k]), self.mask(self.qb[k]))

    cdef double _position_cost(self) noexcept nogil:
        cdef int k = self.pos, i, j, cm, tm, s
        cdef cplx a[4]
        cdef cplx g[4]
        cdef cplx t = 0
        if self.kind[k] == SLOT:
            s = self.slot[k]
            ptrace(self.E, self.N, self.mask(self.qa[k]), a)
            g[0] = self.gates[s, 0, 0]; g[1] = self.gates[s, 0, 1]
            g[2] = self.gates[s, 1, 0]; g[3] = self.gates[s, 1, 1]
            t = overlap(g, a)
        else:
            cm = self.mask(self.qa[k])
            tm = self.mask(self.qb[k])
            for i in range(self.N):
                j = (i ^ tm) if (i & cm) else i
                t += self.E[i, j]
        return self.N - sqrt(cabs2(t))

    def position_cost(self):
        return self._position_cost()

    cdef double _rebuild(self) noexcept nogil:
        cdef int i, j, k
        for i in range(self.N):
            for j in range(self.N):
                self.E[i, j] = self.goal[i, j]
        for k in range(self.M - 1, 0, -1):
            self.left_op(self.E, k, True)
        self.pos = 0
        return self._position_cost()

    def rebuild(self):
        return self._rebuild()

    cdef int _svd_update(self, int k, double* val) noexcept nogil:
        cdef int s = self.slot[k]
        cdef cplx a[4]
        cdef cplx g[4]
        cdef cplx det, half
        cdef double fro2, adet, ssum, smax, old
        ptrace(self.E, self.N, self.mask(self.qa[k]), a)
        g[0] = self.gates[s, 0, 0]; g[1] = self.gates[s, 0, 1]
        g[2] = self.gates[s, 1, 0]; g[3] = self.gates[s, 1, 1]
        old = sqrt(cabs2(overlap(g, a)))
        det = a[0] * a[3] - a[1] * a[2]
        fro2 = cabs2(a[0]) + cabs2(a[1]) + cabs2(a[2]) + cabs2(a[3])
        adet = sqrt(cabs2(det))
        ssum = sqrt(fro2 + 2.0 * adet)
        smax = fro2 - 2.0 * adet
        smax = 0.5 * (ssum + (sqrt(smax) if smax > 0 else 0.0))
        if smax <= 0 or adet / smax <= DEGENERATE_SV_C:
            return -1
        if ssum >= old:
            half = cexpi(-0.5 * carg(det))
            self.gates[s, 0, 0] = (half * a[0] + conj(a[3]) / half) / ssum
            self.gates[s, 0, 1] = (half * a[1] - conj(a[2]) / half) / ssum
            self.gates[s, 1, 0] = (half * a[2] - conj(a[1]) / half) / ssum
            self.gates[s, 1, 1] = (half * a[3] + conj(a[0]) / half) / ssum
            self._store_angles(s)
            val[0] = self.N - ssum
        else:
            val[0] = self.N - old
        return 0

    cdef void _store_angles(self, int s) noexcept nogil:
        cdef cplx alpha = self.gates[s, 0, 0], beta = self.gates[s, 1, 0]
        cdef double aa = carg(alpha), ab = carg(beta)
        self.angles[s, 0] = 2.0 * atan2(sqrt(cabs2(beta)), sqrt(cabs2(alpha)))
        self.angles[s, 1] = ab - aa
        self.angles[s, 2] = -aa - ab

    cdef void _grad_update(self, int k, double lr, double* val) noexcept nogil:
        cdef int s = self.slot[k], i
        cdef cplx a[4]
        cdef cplx g[4]
        cdef cplx d[4]
        cdef cplx t, dt
        cdef double th[3]
        cdef double mag
        ptrace(self.E, self.N, self.mask(self.qa[k]), a)
        th[0] = self.angles[s, 0]; th[1] = self.angles[s, 1]; th[2] = self.angles[s, 2]
        for i in range(3):
            su2_from(th[0], th[1], th[2], g)
            t = overlap(g, a)
            dsu2(th[0], th[1], th[2], i, d)
            dt = overlap(d, a)
            mag = sqrt(cabs2(t))
            if mag > 0:
                th[i] += lr * (conj(t) * dt).real / mag
        su2_from(th[0], th[1], th[2], g)
        self.gates[s, 0, 0] = g[0]; self.gates[s, 0, 1] = g[1]
        self.gates[s, 1, 0] = g[2]; self.gates[s, 1, 1] = g[3]
        self.angles[s, 0] = th[0]; self.angles[s, 1] = th[1]; self.angles[s, 2] = th[2]
        val[0] = self.N - sqrt(cabs2(overlap(g, a)))

    cdef void step_right(self, int k) noexcept nogil:
        self.left_op(self.E, k + 1, False)
        self.right_op(self.E, k, True)

    cdef void step_left(self, int k) noexcept nogil:
        self.left_op(self.E, k, True)
        self.right_op(self.E, k - 1, False)

    cdef double _sweep(self, int mode, double lr, object log, bint rebuild) except? -1.0:
        cdef int k, last = self.M - 1, rc = 0
        cdef double val = 0.0
        cdef bint logging = log is not None
        self._rebuild()
        for k in range(self.M):
            if self.kind[k] == SLOT:
                if mode == 0:
                    rc = self._svd_update(k, &val)
                    if rc != 0:
                        raise DegenerateEnvironmentError(
                            f"degenerate environment at slot {self.slot[k]}")
                else:
                    self._grad_update(k, lr, &val)
                if logging:
                    log.append(val)
            if k < last:
                self.step_right(k)
        for k in range(last, -1, -1):
            if self.kind[k] == SLOT and k != last:
                if mode == 0:
                    rc = self._svd_update(k, &val)
                    if rc != 0:
                        raise DegenerateEnvironmentError(
                            f"degenerate environment at slot {self.slot[k]}")
                else:
                    self._grad_update(k, lr, &val)
                if logging:
                    log.append(val)
            if k > 0:
                self.step_left(k)
        self.pos = 0
        if rebuild:
            return self._rebuild()
        return self._position_cost()

    def sweep_svd(self, log=None, rebuild=True):
        return self._sweep(0, 0.0, log, rebuild)

    def sweep_gradient(self, double lr, log=None, rebuild=True):
        return self._sweep(1, lr, log, rebuild)

    def environments(self):
        out = np.empty((self.n_slots, 2, 2), dtype=complex)
        cdef cplx[:, :, ::1] o = out
        cdef cplx a[4]
        cdef int k, s
        self._rebuild()
        for k in range(self.M):
            if self.kind[k] == SLOT:
                s = self.slot[k]
                ptrace(self.E, self.N, self.mask(self.qa[k]), a)
                o[s, 0, 0] = a[0]; o[s, 0, 1] = a[1]
                o[s, 1, 0] = a[2]; o[s, 1, 1] = a[3]
            if k < self.M - 1:
                self.step_right(k)
        self.pos = self.M - 1
        return out

    def evaluate(self):
        u = np.eye(self.N, dtype=complex)
        cdef cplx[:, ::1] m = u
        cdef int k
        for k in range(self.M):
            self.left_op(m, k, False)
        return u

    def suffix_products(self):
        out = np.empty((self.n_slots, self.N, self.N), dtype=complex)
        cdef cplx[:, :, ::1] o = out
        x = np.eye(self.N, dtype=complex)
        cdef cplx[:, ::1] m = x
        cdef int k, i, j, s
        for k in range(self.M - 1, -1, -1):
            if self.kind[k] == SLOT:
                s = self.slot[k]
                for i in range(self.N):
                    for j in range(self.N):
                        o[s, i, j] = m[i, j]
            self.right_op(m, k, False)
        return out

