"""Dense complex linear algebra used throughout the synthesizer.

Conventions
-----------
Qubit 0 is the most significant bit of a basis-state index, so for an
``n``-qubit register ``kron(a, b, ...)`` places ``a`` on qubit 0.

Single-qubit gates are parameterized by Euler angles ``(theta1, theta2,
theta3)`` meaning ``Rz(theta2) @ Ry(theta1) @ Rz(theta3)`` with
``Ry(t) = exp(-i t Y / 2)`` and ``Rz(t) = exp(-i t Z / 2)``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

UNITARY_ATOL = 1e-12
DEGENERATE_SV = 1e-14

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class DegenerateEnvironmentError(ValueError):
    """Raised when a matrix is too close to singular to have a unique polar factor.

    During a sweep this means the gate slot is effectively disconnected from
    the cost: every 2x2 unitary placed there gives the same overlap.
    """


class EulerTriple(NamedTuple):
    theta1: float
    theta2: float
    theta3: float


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of the factors, first factor on the most significant qubit."""
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def unitarity_error(u: np.ndarray) -> float:
    """Return ``max|U^dagger U - I|``."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_error(u) <= atol


def haar_random_unitary(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a Haar-distributed unitary on ``n_qubits`` qubits.

    QR decomposition of a complex Ginibre matrix, with the phases of
    ``diag(R)`` moved into ``Q`` so that the distribution is exactly Haar.
    """
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    dim = 2**n_qubits
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def closest_unitary(a: np.ndarray) -> np.ndarray:
    """Unitary polar factor of a square matrix.

    For ``a = X S Y^dagger`` this returns ``X Y^dagger``, the unitary that
    maximizes ``Re Tr(U^dagger a)`` and minimizes ``||a - U||_2``.

    Raises
    ------
    DegenerateEnvironmentError
        If the smallest singular value is at most ``1e-14``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    x, s, yh = np.linalg.svd(a)
    if s[-1] <= DEGENERATE_SV:
        raise DegenerateEnvironmentError(
            f"smallest singular value {s[-1]:.3e} <= {DEGENERATE_SV:.0e}"
        )
    return x @ yh


def polar_2x2(a: np.ndarray) -> tuple[np.ndarray, float]:
    """Closed-form polar factor of a 2x2 matrix projected into SU(2).

    Returns ``(g, s)`` where ``g`` is the closest unitary divided by the
    square root of its determinant (argument in ``(-pi/2, pi/2]``) and ``s``
    is the sum of singular values of ``a``, i.e. the maximal ``|Tr(g^dagger a)|``.
    Uses ``U = (a + e^{i arg det a} adj(a)^dagger) / (s1 + s2)``.
    """
    a00, a01, a10, a11 = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
    det = a00 * a11 - a01 * a10
    fro2 = abs(a00) ** 2 + abs(a01) ** 2 + abs(a10) ** 2 + abs(a11) ** 2
    adet = abs(det)
    ssum = np.sqrt(fro2 + 2 * adet)
    sdiff = np.sqrt(max(fro2 - 2 * adet, 0.0))
    smax = 0.5 * (ssum + sdiff)
    smin = adet / smax if smax > 0 else 0.0
    if smin <= DEGENERATE_SV:
        raise DegenerateEnvironmentError(
            f"smallest singular value {smin:.3e} <= {DEGENERATE_SV:.0e}"
        )
    half = np.exp(-0.5j * np.angle(det))
    adj_h = np.array([[a11.conjugate(), -a10.conjugate()], [-a01.conjugate(), a00.conjugate()]])
    g = (half * np.asarray(a) + adj_h / half) / ssum
    return g, float(ssum)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def euler_to_su2(t) -> np.ndarray:
    """``Rz(theta2) Ry(theta1) Rz(theta3)`` as a 2x2 special unitary."""
    theta1, theta2, theta3 = t
    c, s = np.cos(theta1 / 2), np.sin(theta1 / 2)
    alpha = np.exp(-0.5j * (theta2 + theta3)) * c
    beta = np.exp(0.5j * (theta2 - theta3)) * s
    return np.array([[alpha, -beta.conjugate()], [beta, alpha.conjugate()]])


def gates_from_angles(angles: np.ndarray) -> np.ndarray:
    """Vectorized :func:`euler_to_su2` over an ``(m, 3)`` angle array."""
    angles = np.asarray(angles, dtype=float).reshape(-1, 3)
    c = np.cos(angles[:, 0] / 2)
    s = np.sin(angles[:, 0] / 2)
    alpha = np.exp(-0.5j * (angles[:, 1] + angles[:, 2])) * c
    beta = np.exp(0.5j * (angles[:, 1] - angles[:, 2])) * s
    g = np.empty((len(angles), 2, 2), dtype=complex)
    g[:, 0, 0] = alpha
    g[:, 0, 1] = -beta.conj()
    g[:, 1, 0] = beta
    g[:, 1, 1] = alpha.conj()
    return g


def su2_to_euler(u: np.ndarray, atol: float = 1e-10) -> EulerTriple:
    """Inverse of :func:`euler_to_su2` up to the SU(2) sign.

    ``theta1`` lands in ``[0, pi]``. At the poles (``theta1`` of 0 or pi) only
    the sum or difference of the outer angles is defined; the free one is
    set so that the undetermined phase reads as zero.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    if unitarity_error(u) > atol or abs(np.linalg.det(u) - 1) > atol:
        raise ValueError("input is not a special unitary matrix")
    alpha, beta = u[0, 0], u[1, 0]
    theta1 = 2 * np.arctan2(abs(beta), abs(alpha))
    arg_a = np.angle(alpha) if abs(alpha) > 0 else 0.0
    arg_b = np.angle(beta) if abs(beta) > 0 else 0.0
    return EulerTriple(float(theta1), float(arg_b - arg_a), float(-arg_a - arg_b))


def partial_trace_to_qubit(m: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Trace out every qubit except ``qubit``.

    The result ``A`` satisfies ``Tr((G (x) I)^dagger m) = Tr(G^dagger A)`` for all
    2x2 ``G`` embedded on ``qubit``.
    """
    if not 0 <= qubit < n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {n_qubits} qubits")
    m = np.asarray(m)
    dim = 2**n_qubits
    if m.shape != (dim, dim):
        raise ValueError(f"matrix shape {m.shape} does not match {n_qubits} qubits")
    hi, lo = 2**qubit, 2 ** (n_qubits - qubit - 1)
    t = m.reshape(hi, 2, lo, hi, 2, lo)
    return np.einsum("iajibj->ab", t)


def embed(g: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix of a single-qubit gate acting on ``qubit``."""
    return kron(np.eye(2**qubit), g, np.eye(2 ** (n_qubits - qubit - 1)))


def cnot_matrix(control: int, target: int, n_qubits: int) -> np.ndarray:
    """Full permutation matrix of a CNOT."""
    dim = 2**n_qubits
    cmask = 1 << (n_qubits - 1 - control)
    tmask = 1 << (n_qubits - 1 - target)
    idx = np.arange(dim)
    img = np.where(idx & cmask, idx ^ tmask, idx)
    p = np.zeros((dim, dim), dtype=complex)
    p[img, idx] = 1
    return p
