"""Husimi Q-function on Bloch coherent states and the Wehrl entropy of qubit B.

The single-qubit coherent state is ``e^{i phi} sin(t/2)|0> + cos(t/2)|1>``
(``theta = 0`` is ``|1>``).  Wehrl entropies use the raw sphere measure
``sin t dt dp`` with the B-marginal normalised to unit mass, so that a pure
state gives ``1/2 + ln 2 pi`` and the maximally mixed state ``ln 4 pi``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import opscore as ops
from .phasespace import (
    InsufficientQuadrature,
    Measure,
    PhasePoint,
    QuadratureGrid,
    SymbolExpansion,
    kernel_field,
    weyl_symbol,
)
from .qet import ProtocolParams, ground_density, run_stages

LOWER_BOUND = 0.5 + math.log(2 * math.pi)
UPPER_BOUND = math.log(4 * math.pi)
# the bound constant as typeset, (1/4pi)(1 + ln 4 + 2 ln pi); diagnostic only
PRINTED_LOWER_BOUND = (1 + math.log(4) + 2 * math.log(math.pi)) / (4 * math.pi)

ENTROPY_THETA = 128
ENTROPY_PHI = 128
MIN_ENTROPY_THETA = 64
MIN_ENTROPY_PHI = 128
CONVERGENCE_TOL = 1e-8
_LOG_FLOOR = 1e-300


def coherent_qubit(theta, phi) -> np.ndarray:
    """Coherent kets stacked on the last axis, shape ``(..., 2)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.exp(1j * phi) * np.sin(theta / 2), np.cos(theta / 2) + 0j], axis=-1)


def bloch_coherent(c: PhasePoint) -> np.ndarray:
    """Two-qubit coherent state, amplitudes in the order ``|00>, |01>, |10>, |11>``."""
    if c.n_qubits != 2:
        raise ValueError("bloch_coherent expects a two-qubit point")
    (t1, t2), (p1, p2) = c.thetas, c.phis
    s1, c1 = math.sin(t1 / 2), math.cos(t1 / 2)
    s2, c2 = math.sin(t2 / 2), math.cos(t2 / 2)
    return np.array(
        [
            np.exp(1j * (p1 + p2)) * s1 * s2,
            np.exp(1j * p1) * s1 * c2,
            np.exp(1j * p2) * c1 * s2,
            c1 * c2,
        ],
        dtype=complex,
    )


def _coherent_rows(thetas, phis) -> np.ndarray:
    thetas = np.atleast_2d(thetas)
    phis = np.atleast_2d(phis)
    out = coherent_qubit(thetas[:, 0], phis[:, 0])
    for q in range(1, thetas.shape[1]):
        k = coherent_qubit(thetas[:, q], phis[:, q])
        out = np.einsum("mi,mj->mij", out, k).reshape(out.shape[0], -1)
    return out


def q_function(rho, c: PhasePoint) -> float:
    psi = bloch_coherent(c)
    return float(np.real(np.vdot(psi, np.asarray(rho) @ psi)))


def q_values(rho, thetas, phis) -> np.ndarray:
    """``<Phi|rho|Phi>`` at each row of the angle arrays."""
    psi = _coherent_rows(thetas, phis)
    return np.real(np.einsum("mi,ij,mj->m", psi.conj(), np.asarray(rho), psi))


def q_function_wigner(rho, c: PhasePoint, grid: QuadratureGrid | None = None) -> float:
    """Q from ``int W_rho(O') <Phi|Delta(O')|Phi> dO'`` (paperHaar quadrature)."""
    rho = np.asarray(rho)
    n = ops.n_qubits(rho)
    grid = QuadratureGrid(n) if grid is None else grid
    thetas, phis, w = grid.nodes()
    W = weyl_symbol(rho).evaluate(thetas, phis)
    psi = bloch_coherent(c) if n == 2 else coherent_qubit(c.thetas[0], c.phis[0])
    expect = np.einsum("i,mij,j->m", psi.conj(), kernel_field(thetas, phis), psi)
    return float(np.real(np.sum(w * W * expect)))


def q_marginal_B(rho, theta2, phi2):
    """Normalised B-marginal density against ``sin t dt dp``.

    Evaluated through the reduced state: ``<O2|rho_B|O2> / 2 pi``.
    """
    rho_b = ops.partial_trace(rho, keep=1)
    psi = coherent_qubit(theta2, phi2)
    vals = np.real(np.einsum("...i,ij,...j->...", psi.conj(), rho_b, psi))
    return vals / (2 * math.pi)


def q_marginal_B_quadrature(rho, theta2, phi2, grid: QuadratureGrid | None = None) -> float:
    """Same density from ``(1/4 pi^2) int Q dmu_1`` over Alice's sphere."""
    grid = QuadratureGrid(1, 3, 8, Measure.RAW) if grid is None else grid
    if grid.measure is not Measure.RAW or grid.n_qubits != 1:
        raise ValueError("marginal quadrature needs a one-qubit raw grid")
    t1, p1, w = grid.nodes()
    thetas = np.column_stack([t1[:, 0], np.full(t1.shape[0], float(theta2))])
    phis = np.column_stack([p1[:, 0], np.full(t1.shape[0], float(phi2))])
    return float(np.dot(w, q_values(rho, thetas, phis)) / (4 * math.pi**2))


@dataclass(frozen=True, eq=False)
class QFunctionField:
    """Q sampled on a two-qubit raw grid plus its B-marginal on Bob's sphere."""

    grid: QuadratureGrid
    values: np.ndarray = field(repr=False)
    marginal: np.ndarray = field(repr=False)

    @classmethod
    def sample(cls, rho, n_theta: int = 3, n_phi: int = 8) -> "QFunctionField":
        grid = QuadratureGrid(2, n_theta, n_phi, Measure.RAW)
        thetas, phis, w = grid.nodes()
        q = q_values(rho, thetas, phis)
        m = grid.sphere.size
        w1 = grid.sphere.nodes[2]
        marginal = (w1 @ q.reshape(m, m)) / (4 * math.pi**2)
        return cls(grid, q, marginal)

    def total(self) -> float:
        return float(np.dot(self.grid.nodes()[2], self.values))

    def marginal_mass(self) -> float:
        return float(np.dot(self.grid.sphere.nodes[2], self.marginal))


def _entropy_on_grid(rho_b: np.ndarray, n_theta: int, n_phi: int) -> float:
    grid = QuadratureGrid(1, n_theta, n_phi, Measure.RAW)
    thetas, phis, w = grid.nodes()
    psi = coherent_qubit(thetas[:, 0], phis[:, 0])
    p = np.real(np.einsum("mi,ij,mj->m", psi.conj(), rho_b, psi)) / (2 * math.pi)
    p = np.clip(p, 0.0, None)
    integrand = np.where(p > 0, -p * np.log(np.maximum(p, _LOG_FLOOR)), 0.0)
    return float(np.dot(w, integrand))


def wehrl_entropy_B(rho, n_theta: int = ENTROPY_THETA, n_phi: int = ENTROPY_PHI,
                    check: bool = True) -> float:
    """Wehrl entropy (nats) of qubit B's Husimi marginal.

    With ``check`` the value is recomputed on a grid with both orders
    doubled and :class:`InsufficientQuadrature` is raised if the two differ
    by ``CONVERGENCE_TOL`` or more.
    """
    if n_theta < MIN_ENTROPY_THETA or n_phi < MIN_ENTROPY_PHI:
        raise InsufficientQuadrature(
            f"entropy grid needs n_theta >= {MIN_ENTROPY_THETA}, n_phi >= {MIN_ENTROPY_PHI}"
        )
    rho_b = ops.partial_trace(rho, keep=1)
    s = _entropy_on_grid(rho_b, n_theta, n_phi)
    if check:
        s2 = _entropy_on_grid(rho_b, 2 * n_theta, 2 * n_phi)
        if abs(s2 - s) >= CONVERGENCE_TOL:
            raise InsufficientQuadrature(
                f"entropy not converged at {n_theta}x{n_phi}: change {abs(s2 - s):.3g} on doubling"
            )
    return s


def wehrl_entropy_qubit(r: float) -> float:
    """Closed form for a single qubit with Bloch length ``r``.

    ``ln 4pi - [F(1+r) - F(1-r)] / 2r`` with ``F(t) = t^2 ln(t)/2 - t^2/4``.
    """
    r = abs(float(r))
    if r < 1e-6:
        # series: ln 4pi - r^2/6 + O(r^4)
        return UPPER_BOUND - r * r / 6.0

    def F(t):
        return 0.0 if t <= 0 else 0.5 * t * t * math.log(t) - 0.25 * t * t

    return UPPER_BOUND - (F(1 + r) - F(1 - r)) / (2 * r)


@dataclass(frozen=True)
class WehrlReport:
    params: ProtocolParams
    S_ground: float
    S_post_measurement: float
    S_post_feedback: float
    lower: float = LOWER_BOUND
    upper: float = UPPER_BOUND
    monotone: bool = True
    closed_form_value: float = float("nan")
    closed_form_flag: bool = False

    @property
    def final_gap(self) -> float:
        """How far the final entropy sits below ``ln 4 pi``."""
        return self.upper - self.S_post_feedback

    def entropies(self) -> tuple[float, float, float]:
        return self.S_ground, self.S_post_measurement, self.S_post_feedback


def entropy_chain(p: ProtocolParams, n_theta: int = ENTROPY_THETA, n_phi: int = ENTROPY_PHI) -> WehrlReport:
    stages = run_stages(p)
    s_g, s_m, s_f = (wehrl_entropy_B(s.rho, n_theta, n_phi) for s in stages)
    monotone = s_g <= s_m + 1e-9 and s_m <= s_f + 1e-9
    value, flag, _ = closed_form_entropy_ground(p, numeric=s_g)
    return WehrlReport(p, s_g, s_m, s_f, monotone=monotone,
                       closed_form_value=value, closed_form_flag=flag)


def printed_entropy_ground(p: ProtocolParams) -> float:
    """The published arctan expression for the ground-state entropy.

    Diverges to ``-inf`` as ``k -> 0``; at ``h = 0`` the first term is
    replaced by its limit ``1/4pi``.
    """
    h, k = p.h, p.k
    if k == 0:
        return float("-inf")
    n = k / (2 * p.scale)
    tail = (1 + math.log(16 + 16 * h * h / (k * k)) + 2 * math.log(math.pi)) / (4 * math.pi)
    if h == 0:
        return 1 / (4 * math.pi) - tail
    return (2 * h * h + k * k) / (2 * math.pi * h * k) * n * math.atan(2 * h / k * n) - tail


def closed_form_entropy_ground(p: ProtocolParams, numeric: float | None = None,
                               tol: float = 1e-6) -> tuple[float, bool, float]:
    """``(printed value, flag, numeric value)``; flag is set when they differ by more than ``tol``."""
    if numeric is None:
        numeric = wehrl_entropy_B(ground_density(p))
    value = printed_entropy_ground(p)
    flag = not (math.isfinite(value) and abs(value - numeric) <= tol)
    return value, flag, numeric


ENTROPY_HEADER = ["h", "k", "S_ground", "S_post_measurement", "S_post_feedback",
                  "lower_bound", "upper_bound", "monotone"]


def entropy_csv(reports, stream=None) -> str:
    buf = io.StringIO() if stream is None else stream
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ENTROPY_HEADER)
    for r in reports:
        w.writerow([f"{x:.12g}" for x in (r.params.h, r.params.k, *r.entropies(), r.lower, r.upper)]
                   + [str(r.monotone).lower()])
    return buf.getvalue() if stream is None else ""
