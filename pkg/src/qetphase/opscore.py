"""Dense complex linear algebra for small qubit registers.

Operators are plain ``numpy`` complex arrays of shape ``(2**n, 2**n)``.
Qubit 1 is the leftmost tensor factor (slowest index), so the two-qubit
basis order is ``|00>, |01>, |10>, |11>``.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

STRUCTURE_TOL = 1e-12
SPECTRAL_TOL = 1e-10

PAULI_LETTERS = "IXYZ"

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NotHermitian(ValueError):
    pass


class WrongDimension(ValueError):
    pass


def tensor(*ops) -> np.ndarray:
    """Kronecker product of the arguments, first argument slowest."""
    if len(ops) == 1 and not isinstance(ops[0], np.ndarray):
        ops = tuple(ops[0])
    return reduce(np.kron, [np.asarray(op, dtype=complex) for op in ops])


def pauli_strings(n: int) -> list[str]:
    """All Pauli strings on ``n`` qubits in lexicographic order (I<X<Y<Z)."""
    return ["".join(t) for t in itertools.product(PAULI_LETTERS, repeat=n)]


def pauli_matrix(p: str) -> np.ndarray:
    try:
        return tensor(*[_PAULI[c] for c in p])
    except KeyError as exc:
        raise ValueError(f"invalid Pauli string {p!r}") from exc


def n_qubits(M: np.ndarray) -> int:
    """Number of qubits for a square operator or state of dimension 2**n."""
    M = np.asarray(M)
    dim = M.shape[0]
    if M.ndim == 2 and M.shape[0] != M.shape[1]:
        raise WrongDimension(f"operator is not square: {M.shape}")
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise WrongDimension(f"dimension {dim} is not a power of two")
    return n


def dag(M: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(M)).T


def is_hermitian(M, tol: float = STRUCTURE_TOL) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.max(np.abs(M - dag(M))) <= tol


def is_unitary(M, tol: float = STRUCTURE_TOL) -> bool:
    M = np.asarray(M)
    return np.max(np.abs(M @ dag(M) - np.eye(M.shape[0]))) <= tol


def is_psd(M, tol: float = SPECTRAL_TOL) -> bool:
    return is_hermitian(M, tol) and hermitian_eigenvalues(M)[0] >= -tol


def hermitian_eigenvalues(M, tol: float = SPECTRAL_TOL, vectors: bool = False):
    """Ascending eigenvalues of a hermitian matrix.

    With ``vectors=True`` returns ``(values, V)`` where the columns of ``V``
    are orthonormal eigenvectors, ``M = V diag(values) V^dagger``.
    """
    M = np.asarray(M, dtype=complex)
    if not is_hermitian(M, tol):
        raise NotHermitian("matrix is not hermitian within %g" % tol)
    H = 0.5 * (M + dag(M))
    if vectors:
        return np.linalg.eigh(H)
    return np.linalg.eigvalsh(H)


def trace_norm(M) -> float:
    return float(np.sum(np.abs(hermitian_eigenvalues(M))))


def partial_transpose_B(rho) -> np.ndarray:
    """Transpose the second qubit's indices of a two-qubit operator."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise WrongDimension(f"partial transpose needs a 4x4 operator, got {rho.shape}")
    # indices (a, b, a', b') -> (a, b', a', b)
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def partial_trace(rho, keep: int) -> np.ndarray:
    """Reduced single-qubit operator on qubit ``keep`` (0-based)."""
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits(rho)
    if not 0 <= keep < n:
        raise WrongDimension(f"qubit index {keep} out of range for {n} qubits")
    t = rho.reshape((2,) * (2 * n))
    # move the kept ket/bra axes to the front, then trace the rest pairwise
    t = np.moveaxis(t, (keep, n + keep), (0, 1))
    rest = 2 ** (n - 1)
    t = t.reshape(2, 2, rest, rest)
    return np.trace(t, axis1=2, axis2=3)


def pauli_decompose(A) -> dict[str, complex]:
    """Coefficients ``c_P = tr[A P] / 2**n`` over all Pauli strings."""
    A = np.asarray(A, dtype=complex)
    n = n_qubits(A)
    scale = 2.0**n
    return {p: complex(np.trace(A @ pauli_matrix(p)) / scale) for p in pauli_strings(n)}


def pauli_reconstruct(coeffs: dict[str, complex]) -> np.ndarray:
    terms = list(coeffs.items())
    n = len(terms[0][0])
    out = np.zeros((2**n, 2**n), dtype=complex)
    for p, c in terms:
        if c != 0:
            out += c * pauli_matrix(p)
    return out


def state_vector(amplitudes, tol: float = STRUCTURE_TOL) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    n_qubits(psi)
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError("state vector is not normalised")
    return psi


def density_matrix(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def is_density_matrix(rho, tol: float = STRUCTURE_TOL) -> bool:
    rho = np.asarray(rho)
    return (
        is_hermitian(rho, tol)
        and abs(np.trace(rho) - 1.0) <= tol
        and hermitian_eigenvalues(rho)[0] >= -SPECTRAL_TOL
    )


def bloch_vector(rho1) -> np.ndarray:
    """Bloch vector ``(<X>, <Y>, <Z>)`` of a single-qubit operator."""
    rho1 = np.asarray(rho1)
    if rho1.shape != (2, 2):
        raise WrongDimension("Bloch vector needs a 2x2 operator")
    return np.array([np.trace(rho1 @ _PAULI[c]).real for c in "XYZ"])


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (z + dag(z))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    z = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = z @ dag(z)
    return rho / np.trace(rho).real
