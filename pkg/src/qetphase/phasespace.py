"""Stratonovich-Weyl phase space for registers of qubits.

Each qubit lives on a sphere parametrised by ``(theta, phi)``.  The
single-qubit kernel is the rotated parity operator

    Delta(theta, phi) = 1/2 U(phi, theta, Phi) (1 + sqrt(3) sigma_z) U^dagger
                      = 1/2 (1 + sqrt(3) n . sigma),

with ``n = (sin t cos p, sin t sin p, cos t)``.  Multi-qubit kernels are
tensor products.  Symbols of operators are therefore polynomials in the
per-qubit basis functions ``f_I = 1``, ``f_X = sqrt(3) sin t cos p``,
``f_Y = sqrt(3) sin t sin p``, ``f_Z = sqrt(3) cos t``, and products of
operators are handled exactly through the Pauli coefficient algebra.  The
integral formulas (inverse transform, triple-kernel star product) are kept
as independent quadrature routes.

Integrals use one of two measures per sphere: ``PAPER_HAAR``
``(1/2pi) sin t dt dp`` with mass 2, under which the kernel integrates to
the identity, and ``RAW`` ``sin t dt dp`` with mass ``4 pi``.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .opscore import (
    PAULI_LETTERS,
    n_qubits,
    pauli_decompose,
    pauli_matrix,
    pauli_strings,
    tensor,
)

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi

# Star-product integrand is degree 2 per primed sphere.
MIN_STAR_THETA = 2
MIN_STAR_PHI = 5


class SizeMismatch(ValueError):
    pass


class InsufficientQuadrature(ValueError):
    pass


class Measure(enum.Enum):
    PAPER_HAAR = "paperHaar"
    RAW = "raw"

    @property
    def sphere_mass(self) -> float:
        return 2.0 if self is Measure.PAPER_HAAR else 4.0 * math.pi

    @property
    def density(self) -> float:
        """Constant factor multiplying ``sin t dt dp``."""
        return 1.0 / TWO_PI if self is Measure.PAPER_HAAR else 1.0


@dataclass(frozen=True)
class PhasePoint:
    """Per-qubit ``(theta, phi)`` coordinates; phi is reduced modulo 2 pi."""

    thetas: tuple[float, ...]
    phis: tuple[float, ...]

    def __post_init__(self):
        thetas = tuple(float(t) for t in self.thetas)
        phis = tuple(float(p) % TWO_PI for p in self.phis)
        if len(thetas) != len(phis) or not thetas:
            raise ValueError("need one (theta, phi) pair per qubit")
        for t in thetas:
            if not -1e-12 <= t <= math.pi + 1e-12:
                raise ValueError(f"theta={t} outside [0, pi]")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)

    @classmethod
    def of(cls, *pairs) -> "PhasePoint":
        """``PhasePoint.of((t1, p1), (t2, p2))``."""
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def n_qubits(self) -> int:
        return len(self.thetas)


CoherentPoint = PhasePoint


def sphere_basis(theta, phi) -> np.ndarray:
    """Per-qubit basis functions stacked on the last axis in I, X, Y, Z order."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack(
        [
            np.ones_like(theta),
            SQRT3 * st * np.cos(phi),
            SQRT3 * st * np.sin(phi),
            SQRT3 * np.cos(theta),
        ],
        axis=-1,
    )


# -- kernels ----------------------------------------------------------------


def parity_qubit() -> np.ndarray:
    return np.eye(2, dtype=complex) + SQRT3 * pauli_matrix("Z")


def su2_rotation(phi: float, theta: float, Phi: float) -> np.ndarray:
    """``exp(-i sz phi/2) exp(-i sy theta/2) exp(-i sz Phi/2)`` (z-y-z Euler angles)."""

    def rz(a):
        return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])

    c, s = math.cos(theta / 2), math.sin(theta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return rz(phi) @ ry @ rz(Phi)


def kernel_qubit(theta: float, phi: float) -> np.ndarray:
    st, ct = math.sin(theta), math.cos(theta)
    off = SQRT3 * st * np.exp(-1j * phi)
    return 0.5 * np.array([[1 + SQRT3 * ct, off], [np.conj(off), 1 - SQRT3 * ct]], dtype=complex)


def kernel_multi(point: PhasePoint) -> np.ndarray:
    return tensor(*[kernel_qubit(t, p) for t, p in zip(point.thetas, point.phis)])


def _kernel_stack(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Single-qubit kernels for arrays of angles, shape ``(m, 2, 2)``."""
    f = sphere_basis(thetas, phis)
    paulis = np.stack([pauli_matrix(c) for c in PAULI_LETTERS])
    return 0.5 * np.einsum("ma,aij->mij", f, paulis)


def bloch_rotation(U) -> np.ndarray:
    """SO(3) matrix ``R`` with ``U (n . sigma) U^dagger = (R n) . sigma``."""
    U = np.asarray(U, dtype=complex)
    s = [pauli_matrix(c) for c in "XYZ"]
    return np.array([[0.5 * np.trace(s[i] @ U @ s[j] @ U.conj().T).real for j in range(3)]
                     for i in range(3)])


def direction(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def angles(n) -> tuple[float, float]:
    x, y, z = np.asarray(n, dtype=float) / np.linalg.norm(n)
    return math.acos(min(1.0, max(-1.0, z))), math.atan2(y, x) % TWO_PI


def rotate_point(point: PhasePoint, unitaries) -> PhasePoint:
    """Move each qubit's coordinates by the Bloch rotation of the matching unitary."""
    pairs = [angles(bloch_rotation(U) @ direction(t, p))
             for U, t, p in zip(unitaries, point.thetas, point.phis)]
    return PhasePoint.of(*pairs)


# -- symbols ----------------------------------------------------------------


def _letter_index(p: str) -> tuple[int, ...]:
    return tuple(PAULI_LETTERS.index(c) for c in p)


@dataclass(frozen=True, eq=False)
class SymbolExpansion:
    """Exact phase-space symbol as Pauli-string coefficients.

    ``coeffs`` is a dense complex array of shape ``(4,) * n_qubits`` indexed
    by letter (I=0, X=1, Y=2, Z=3).  Evaluating at a point gives
    ``sum_P c_P prod_i f_{P_i}(theta_i, phi_i)``.
    """

    n_qubits: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (4,) * self.n_qubits:
            raise SizeMismatch(f"coefficient array has shape {c.shape}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, terms: dict[str, complex], n: int | None = None) -> "SymbolExpansion":
        n = len(next(iter(terms))) if n is None else n
        c = np.zeros((4,) * n, dtype=complex)
        for p, v in terms.items():
            if len(p) != n:
                raise SizeMismatch(f"Pauli string {p!r} does not have {n} letters")
            c[_letter_index(p)] += v
        return cls(n, c)

    @classmethod
    def constant(cls, value: complex, n: int) -> "SymbolExpansion":
        return cls.from_terms({"I" * n: value}, n)

    def terms(self, tol: float = 0.0) -> dict[str, complex]:
        """Coefficient map over Pauli strings, lexicographic, dropping ``|c| <= tol``."""
        out = {}
        for p in pauli_strings(self.n_qubits):
            v = complex(self.coeffs[_letter_index(p)])
            if abs(v) > tol or tol == 0.0:
                out[p] = v
        return out

    def __getitem__(self, p: str) -> complex:
        return complex(self.coeffs[_letter_index(p)])

    def evaluate(self, thetas, phis) -> np.ndarray:
        """Vectorised evaluation; ``thetas``/``phis`` have trailing axis ``n_qubits``."""
        thetas = np.asarray(thetas, dtype=float)
        phis = np.asarray(phis, dtype=float)
        if thetas.shape[-1] != self.n_qubits or phis.shape != thetas.shape:
            raise SizeMismatch("angle arrays do not match the qubit count")
        n = self.n_qubits
        axes = "abcdefgh"[:n]
        spec = axes + "," + ",".join("..." + a for a in axes) + "->..."
        fs = [sphere_basis(thetas[..., q], phis[..., q]) for q in range(n)]
        return np.einsum(spec, self.coeffs, *fs)

    def __call__(self, point: PhasePoint) -> complex:
        return complex(self.evaluate(np.array(point.thetas), np.array(point.phis)))

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs.imag)) <= tol)

    def conj(self) -> "SymbolExpansion":
        return SymbolExpansion(self.n_qubits, self.coeffs.conj())

    def _check(self, other: "SymbolExpansion"):
        if not isinstance(other, SymbolExpansion):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise SizeMismatch("symbols act on different numbers of qubits")

    def __add__(self, other):
        self._check(other)
        return SymbolExpansion(self.n_qubits, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SymbolExpansion(self.n_qubits, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SymbolExpansion):
            raise TypeError("use star_product_exact for symbol products")
        return SymbolExpansion(self.n_qubits, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SymbolExpansion(self.n_qubits, -self.coeffs)

    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs)))


def weyl_symbol(A) -> SymbolExpansion:
    """Symbol ``W_A(Omega) = tr[A Delta(Omega)]`` as a Pauli expansion."""
    A = np.asarray(A, dtype=complex)
    return SymbolExpansion.from_terms(pauli_decompose(A), n_qubits(A))


def weyl_symbol_at(A, point: PhasePoint) -> complex:
    """Direct ``tr[A Delta(Omega)]``; kept separate from the coefficient route."""
    return complex(np.trace(np.asarray(A) @ kernel_multi(point)))


def inverse_weyl(S: SymbolExpansion) -> np.ndarray:
    n = S.n_qubits
    out = np.zeros((2**n, 2**n), dtype=complex)
    for p in pauli_strings(n):
        c = S.coeffs[_letter_index(p)]
        if c != 0:
            out += c * pauli_matrix(p)
    return out


# -- quadrature -------------------------------------------------------------


@dataclass(frozen=True)
class SphereRule:
    """Gauss-Legendre in ``cos(theta)`` times uniform ``phi`` on one sphere.

    Nodes are flattened theta-major with theta ascending.  Exact for
    polynomials of degree ``<= 2 n_theta - 1`` in ``cos(theta)`` times
    harmonics ``e^{i m phi}`` with ``|m| <= n_phi - 1``.
    """

    n_theta: int
    n_phi: int
    measure: Measure

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("quadrature orders must be positive")

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return _sphere_nodes(self.n_theta, self.n_phi, self.measure)

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi


@lru_cache(maxsize=64)
def _sphere_nodes(n_theta: int, n_phi: int, measure: Measure):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    x, w = x[::-1], w[::-1]  # theta ascending
    theta = np.arccos(x)
    phi = TWO_PI * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(w, np.full(n_phi, TWO_PI / n_phi)) * measure.density
    for a in (T, P, W):
        a.flags.writeable = False
    return T.ravel(), P.ravel(), W.ravel()


@dataclass(frozen=True)
class QuadratureGrid:
    """Product quadrature over ``n_qubits`` spheres with an explicit measure."""

    n_qubits: int
    n_theta: int = 3
    n_phi: int = 8
    measure: Measure = Measure.PAPER_HAAR

    @property
    def sphere(self) -> SphereRule:
        return SphereRule(self.n_theta, self.n_phi, self.measure)

    @property
    def exactness(self) -> tuple[int, int]:
        """(max degree in cos(theta), max harmonic order in phi) integrated exactly."""
        return 2 * self.n_theta - 1, self.n_phi - 1

    @property
    def total_mass(self) -> float:
        return self.measure.sphere_mass**self.n_qubits

    @property
    def size(self) -> int:
        return self.sphere.size**self.n_qubits

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.sphere.size,) * self.n_qubits

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Node angles of shape ``(size, n_qubits)`` and weights ``(size,)``.

        Rows follow lexicographic order of per-qubit node indices.
        """
        return _grid_nodes(self)


@lru_cache(maxsize=32)
def _grid_nodes(grid: QuadratureGrid):
    t, p, w = grid.sphere.nodes
    n = grid.n_qubits
    idx = np.array(list(itertools.product(range(t.size), repeat=n)), dtype=int).reshape(-1, n)
    thetas = t[idx]
    phis = p[idx]
    weights = np.prod(w[idx], axis=1)
    for a in (thetas, phis, weights):
        a.flags.writeable = False
    return thetas, phis, weights


@dataclass(frozen=True)
class SampleGrid:
    """Uniform plotting grid: theta in [0, pi] inclusive, phi in [0, 2pi).

    ``fixed`` pins trailing qubits to given ``(theta, phi)`` pairs, which is
    how slices are exported.
    """

    n_qubits: int
    n_theta: int
    n_phi: int
    fixed: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 2:
            raise ValueError("sample grid sizes must be at least 2")
        if len(self.fixed) >= self.n_qubits + 1:
            raise ValueError("cannot fix more qubits than exist")

    def nodes(self):
        free = self.n_qubits - len(self.fixed)
        theta = np.linspace(0.0, math.pi, self.n_theta)
        phi = TWO_PI * np.arange(self.n_phi) / self.n_phi
        pairs = [(t, p) for t in theta for p in phi]
        rows = [combo + self.fixed for combo in itertools.product(pairs, repeat=free)]
        arr = np.array(rows, dtype=float).reshape(-1, self.n_qubits, 2)
        return arr[..., 0], arr[..., 1] % TWO_PI, None


@dataclass(frozen=True, eq=False)
class SymbolField:
    """Real samples of a function at every node of a grid."""

    grid: QuadratureGrid | SampleGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        thetas, _, _ = self.grid.nodes()
        v = np.asarray(self.values)
        if v.shape != (thetas.shape[0],):
            raise SizeMismatch(f"{v.shape[0] if v.ndim else 0} values for {thetas.shape[0]} nodes")
        object.__setattr__(self, "values", v)


def sample(S, grid) -> SymbolField:
    """Evaluate a symbol (or any callable on angle arrays) on grid nodes."""
    thetas, phis, _ = grid.nodes()
    if isinstance(S, SymbolExpansion):
        vals = S.evaluate(thetas, phis)
    else:
        vals = np.asarray(S(thetas, phis))
    if np.iscomplexobj(vals) and np.max(np.abs(vals.imag), initial=0.0) <= 1e-12:
        vals = vals.real
    return SymbolField(grid, vals)


def integrate(f: SymbolField):
    if not isinstance(f.grid, QuadratureGrid):
        raise TypeError("integration needs a QuadratureGrid")
    _, _, w = f.grid.nodes()
    if w.shape != f.values.shape:
        raise SizeMismatch("field does not match grid")
    return _scalar(np.dot(w, f.values))


def _scalar(z, tol: float = 1e-12):
    z = complex(z)
    return z.real if abs(z.imag) <= tol * max(1.0, abs(z.real)) else z


def integrate_operator(fn, grid: QuadratureGrid) -> np.ndarray:
    """Integrate an operator-valued function ``fn(thetas, phis) -> (m, d, d)``."""
    thetas, phis, w = grid.nodes()
    return np.einsum("m,mij->ij", w, fn(thetas, phis))


def kernel_field(thetas, phis) -> np.ndarray:
    """Multi-qubit kernels at each row of ``thetas``/``phis``, shape ``(m, d, d)``."""
    thetas = np.atleast_2d(thetas)
    phis = np.atleast_2d(phis)
    out = _kernel_stack(thetas[:, 0], phis[:, 0])
    for q in range(1, thetas.shape[1]):
        k = _kernel_stack(thetas[:, q], phis[:, q])
        m, d, _ = out.shape
        out = np.einsum("mij,mkl->mikjl", out, k).reshape(m, 2 * d, 2 * d)
    return out


def inverse_weyl_quadrature(S: SymbolExpansion, grid: QuadratureGrid | None = None) -> np.ndarray:
    """Operator from ``int W(Omega) Delta(Omega) dOmega`` on a paperHaar grid."""
    grid = QuadratureGrid(S.n_qubits) if grid is None else grid
    _require_paper_haar(grid)
    thetas, phis, w = grid.nodes()
    vals = S.evaluate(thetas, phis)
    return np.einsum("m,m,mij->ij", w, vals, kernel_field(thetas, phis))


def overlap(S_A: SymbolExpansion, S_B: SymbolExpansion, grid: QuadratureGrid | None = None):
    """``int W_A W_B dOmega`` by quadrature; equals ``tr[A B]``."""
    if S_A.n_qubits != S_B.n_qubits:
        raise SizeMismatch("symbols act on different numbers of qubits")
    grid = QuadratureGrid(S_A.n_qubits) if grid is None else grid
    _require_paper_haar(grid)
    thetas, phis, w = grid.nodes()
    return _scalar(np.sum(w * S_A.evaluate(thetas, phis) * S_B.evaluate(thetas, phis)))


def overlap_exact(S_A: SymbolExpansion, S_B: SymbolExpansion):
    """Closed coefficient form ``2**n sum_P c_P(A) c_P(B)``."""
    if S_A.n_qubits != S_B.n_qubits:
        raise SizeMismatch("symbols act on different numbers of qubits")
    return _scalar(2.0**S_A.n_qubits * np.sum(S_A.coeffs * S_B.coeffs))


def _require_paper_haar(grid: QuadratureGrid):
    if grid.measure is not Measure.PAPER_HAAR:
        raise ValueError("this integral is defined for the paperHaar measure")


# -- star products ----------------------------------------------------------


def star_product_exact(S_A: SymbolExpansion, S_B: SymbolExpansion) -> SymbolExpansion:
    if S_A.n_qubits != S_B.n_qubits:
        raise SizeMismatch("symbols act on different numbers of qubits")
    return weyl_symbol(inverse_weyl(S_A) @ inverse_weyl(S_B))


def star_chain(*symbols: SymbolExpansion) -> SymbolExpansion:
    out = symbols[0]
    for s in symbols[1:]:
        out = star_product_exact(out, s)
    return out


@lru_cache(maxsize=16)
def _pair_products(rule: SphereRule) -> np.ndarray:
    """``Delta(O') Delta(O'')`` for every node pair on one sphere, ``(m, m, 2, 2)``."""
    t, p, _ = rule.nodes
    k = _kernel_stack(t, p)
    out = np.einsum("aij,bjk->abik", k, k)
    out.flags.writeable = False
    return out


def star_product_integral(S_A: SymbolExpansion, S_B: SymbolExpansion, at: PhasePoint,
                          grid: QuadratureGrid | None = None) -> complex:
    """Triple-kernel convolution for ``(W_A * W_B)(at)``.

    The kernel factorises over qubits, so the weight
    ``tr[Delta(O) Delta(O') Delta(O'')]`` is a product of per-sphere
    ``(m, m)`` tables which are contracted against the sampled symbols.
    """
    n = S_A.n_qubits
    if S_B.n_qubits != n or at.n_qubits != n:
        raise SizeMismatch("symbols and point act on different numbers of qubits")
    grid = QuadratureGrid(n) if grid is None else grid
    _require_paper_haar(grid)
    if grid.n_theta < MIN_STAR_THETA or grid.n_phi < MIN_STAR_PHI:
        raise InsufficientQuadrature(
            f"star product needs n_theta >= {MIN_STAR_THETA} and n_phi >= {MIN_STAR_PHI}, "
            f"got {grid.n_theta}x{grid.n_phi}"
        )
    thetas, phis, w = grid.nodes()
    a = (w * S_A.evaluate(thetas, phis)).reshape(grid.shape)
    b = (w * S_B.evaluate(thetas, phis)).reshape(grid.shape)
    pairs = _pair_products(grid.sphere)
    tables = [
        np.einsum("ji,abij->ab", kernel_qubit(t, p), pairs)
        for t, p in zip(at.thetas, at.phis)
    ]
    # einsum over primed indices i_q, double-primed j_q
    letters = "abcdefghijklmnopqrstuvwxyz"
    ii, jj = letters[:n], letters[n : 2 * n]
    spec = ",".join([ii, jj] + [ii[q] + jj[q] for q in range(n)]) + "->"
    return complex(np.einsum(spec, a, b, *tables))


def star_commutator(S_A: SymbolExpansion, S_B: SymbolExpansion) -> SymbolExpansion:
    """``(W_A * W_B - W_B * W_A) / i`` with hbar = 1."""
    return (star_product_exact(S_A, S_B) - star_product_exact(S_B, S_A)) * -1j


def moyal_stationarity_residual(S_rho: SymbolExpansion, S_H: SymbolExpansion,
                                grid: QuadratureGrid | None = None) -> float:
    """Max of ``|d W_rho / dt|`` over grid nodes, from the Moyal bracket."""
    grid = QuadratureGrid(S_rho.n_qubits) if grid is None else grid
    thetas, phis, _ = grid.nodes()
    vals = star_commutator(S_rho, S_H).evaluate(thetas, phis)
    return float(np.max(np.abs(vals)))


# -- export -----------------------------------------------------------------


def field_to_csv(f: SymbolField, stream=None) -> str:
    """Write ``theta1,phi1,...,value`` rows with 12 significant digits."""
    thetas, phis, _ = f.grid.nodes()
    n = thetas.shape[1]
    buf = io.StringIO() if stream is None else stream
    writer = csv.writer(buf, lineterminator="\n")
    header = [h for q in range(1, n + 1) for h in (f"theta{q}", f"phi{q}")] + ["value"]
    writer.writerow(header)
    vals = np.real(f.values)
    for row in range(thetas.shape[0]):
        cells = []
        for q in range(n):
            cells += [_g12(thetas[row, q]), _g12(phis[row, q])]
        cells.append(_g12(vals[row]))
        writer.writerow(cells)
    return buf.getvalue() if stream is None else ""


def _g12(x: float) -> str:
    x = float(x)
    return "0" if x == 0.0 else f"{x:.12g}"
