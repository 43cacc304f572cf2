"""Minimal two-qubit quantum energy teleportation in phase space.

Alice (qubit 1) measures ``sigma_x`` on the ground state of

    H = h Z_A + h Z_B + 2k X_A X_B + 2 sqrt(h^2 + k^2),

announces ``alpha = +-1``, and Bob (qubit 2) applies
``U_B(alpha) = cos(w) - i alpha sin(w) Y_B``.  Every expectation value is
computed twice: as a matrix trace and as a phase-space overlap of symbols
whose stage-to-stage evolution runs entirely through exact star products.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import opscore as ops
from .phasespace import (
    SQRT3,
    QuadratureGrid,
    SymbolExpansion,
    inverse_weyl_quadrature,
    overlap,
    star_chain,
    weyl_symbol,
)

OUTCOMES = (+1, -1)


class BadOutcome(ValueError):
    pass


class WrongStage(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolParams:
    """Field strength ``h`` and coupling ``k`` (energy units).

    Both must be strictly positive unless ``limit_mode`` is set, which admits
    the boundaries ``h = 0`` or ``k = 0`` (not both).
    """

    h: float
    k: float
    limit_mode: bool = False

    def __post_init__(self):
        h, k = float(self.h), float(self.k)
        if not (math.isfinite(h) and math.isfinite(k)):
            raise ValueError("h and k must be finite")
        if self.limit_mode:
            if h < 0:
                raise ValueError(f"h >= 0 required in limit mode, got h={h}")
            if k < 0:
                raise ValueError(f"k >= 0 required in limit mode, got k={k}")
            if h + k <= 0:
                raise ValueError("h + k > 0 required")
        else:
            if h <= 0:
                raise ValueError(f"h > 0 required, got h={h}")
            if k <= 0:
                raise ValueError(f"k > 0 required, got k={k}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "k", k)

    @property
    def scale(self) -> float:
        """``sqrt(h^2 + k^2)``."""
        return math.hypot(self.h, self.k)


class Stage(enum.Enum):
    GROUND = "ground"
    POST_MEASUREMENT = "post_measurement"
    POST_FEEDBACK = "post_feedback"


@dataclass(frozen=True, eq=False)
class ProtocolStage:
    """State at one protocol step, carried as matrix and as symbol.

    After the measurement, ``branches`` keeps the unnormalised per-outcome
    pieces ``P(a) rho P(a)`` (matrix, symbol) so that Bob's feedback stays
    correlated with the outcome.
    """

    tag: Stage
    params: ProtocolParams
    rho: np.ndarray = field(repr=False)
    symbol: SymbolExpansion = field(repr=False)
    branches: dict = field(default_factory=dict, repr=False)


class Hamiltonian(NamedTuple):
    H_A: np.ndarray
    H_B: np.ndarray
    V: np.ndarray
    H: np.ndarray


class PathPair(NamedTuple):
    """One scalar computed by matrix trace and by phase-space integral."""

    matrix: float
    phase_space: float

    @property
    def value(self) -> float:
        return self.matrix

    @property
    def residual(self) -> float:
        return abs(self.matrix - self.phase_space)


@dataclass(frozen=True)
class FeedbackAngle:
    """Bob's rotation angle.

    ``cos_2w``/``sin_2w`` carry the closed forms
    ``(h^2 + 2k^2) / D`` and ``h k / D`` with ``D = sqrt((h^2+2k^2)^2 + h^2 k^2)``;
    the unitary itself uses the half angle ``w``.
    """

    omega: float
    cos: float
    sin: float
    cos_2w: float
    sin_2w: float


# -- operators ----------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)


def hamiltonian(p: ProtocolParams) -> Hamiltonian:
    h, k, s = p.h, p.k, p.scale
    Z, X = ops.pauli_matrix("Z"), ops.pauli_matrix("X")
    I4 = np.eye(4, dtype=complex)
    H_A = h * ops.tensor(Z, _I2) + (h * h / s) * I4
    H_B = h * ops.tensor(_I2, Z) + (h * h / s) * I4
    V = 2 * k * ops.tensor(X, X) + (2 * k * k / s) * I4
    return Hamiltonian(H_A, H_B, V, H_A + H_B + V)


def ground_state(p: ProtocolParams) -> np.ndarray:
    r = p.h / p.scale
    a = math.sqrt(max(0.0, 1.0 - r)) / math.sqrt(2.0)
    b = -math.sqrt(1.0 + r) / math.sqrt(2.0)
    return np.array([a, 0.0, 0.0, b], dtype=complex)


def ground_density(p: ProtocolParams) -> np.ndarray:
    return ops.density_matrix(ground_state(p))


def ground_wigner(p: ProtocolParams) -> SymbolExpansion:
    return weyl_symbol(ground_density(p))


def ground_wigner_closed_form(p: ProtocolParams, thetas, phis) -> np.ndarray:
    """Trace-derived closed form of the ground-state Wigner function."""
    t1, t2, p1, p2 = _unpack(thetas, phis)
    s = p.scale
    return (
        0.25 * (1 + 3 * np.cos(t1) * np.cos(t2))
        - SQRT3 * p.h / (4 * s) * (np.cos(t1) + np.cos(t2))
        - 3 * p.k / (4 * s) * np.cos(p1 + p2) * np.sin(t1) * np.sin(t2)
    )


def ground_wigner_as_printed(p: ProtocolParams, thetas, phis) -> np.ndarray:
    """Published form, which lacks the h and k factors inside the bracket.

    It coincides with :func:`ground_wigner_closed_form` only at ``h = k = 1``;
    used for diagnostics.
    """
    t1, t2, p1, p2 = _unpack(thetas, phis)
    return (
        -SQRT3 / (4 * p.scale)
        * (SQRT3 * np.cos(p1 + p2) * np.sin(t1) * np.sin(t2) + np.cos(t1) + np.cos(t2))
        + 0.25 * (3 * np.cos(t1) * np.cos(t2) + 1)
    )


def post_measurement_wigner_closed_form(p: ProtocolParams, thetas, phis) -> np.ndarray:
    t1, t2, p1, p2 = _unpack(thetas, phis)
    s = p.scale
    return (
        -SQRT3 * p.h / (4 * s) * np.cos(t2)
        - 3 * p.k / (4 * s) * np.sin(t1) * np.sin(t2) * np.cos(p1) * np.cos(p2)
        + 0.25
    )


def post_feedback_wigner_closed_form(p: ProtocolParams, thetas, phis) -> np.ndarray:
    t1, t2, p1, p2 = _unpack(thetas, phis)
    s4 = math.sqrt(p.h**2 + 4 * p.k**2)
    return (
        -SQRT3 * p.h / (4 * s4) * np.cos(t2)
        - 3 * p.k / (2 * s4) * np.sin(t1) * np.sin(t2) * np.cos(p1) * np.cos(p2)
        + 0.25
    )


def hamiltonian_symbol_closed_form(p: ProtocolParams, thetas, phis) -> np.ndarray:
    t1, t2, p1, p2 = _unpack(thetas, phis)
    return (
        SQRT3 * p.h * (np.cos(t1) + np.cos(t2))
        + 6 * p.k * np.sin(t1) * np.sin(t2) * np.cos(p1) * np.cos(p2)
        + 2 * p.scale
    )


def _unpack(thetas, phis):
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    return thetas[..., 0], thetas[..., 1], phis[..., 0], phis[..., 1]


def _check_outcome(alpha):
    if alpha not in OUTCOMES:
        raise BadOutcome(f"measurement outcome must be +1 or -1, got {alpha!r}")


def measurement_projector(alpha: int) -> np.ndarray:
    """``P_A(alpha) = (1 + alpha X_A) / 2`` on the two-qubit space."""
    _check_outcome(alpha)
    return ops.tensor(0.5 * (_I2 + alpha * ops.pauli_matrix("X")), _I2)


def projector_symbol(alpha: int) -> SymbolExpansion:
    return weyl_symbol(measurement_projector(alpha))


def feedback_angle(p: ProtocolParams) -> FeedbackAngle:
    u = p.h**2 + 2 * p.k**2
    v = p.h * p.k
    d = math.hypot(u, v)
    omega = 0.5 * math.atan2(v, u)
    return FeedbackAngle(omega, math.cos(omega), math.sin(omega), u / d, v / d)


def feedback_unitary(alpha: int, p: ProtocolParams) -> np.ndarray:
    """``1_A (x) (cos w - i alpha sin w Y_B)``."""
    _check_outcome(alpha)
    w = feedback_angle(p)
    u_b = w.cos * _I2 - 1j * alpha * w.sin * ops.pauli_matrix("Y")
    return ops.tensor(_I2, u_b)


def feedback_symbol(alpha: int, p: ProtocolParams) -> SymbolExpansion:
    return weyl_symbol(feedback_unitary(alpha, p))


# -- stages -----------------------------------------------------------------


def ground_stage(p: ProtocolParams) -> ProtocolStage:
    rho = ground_density(p)
    return ProtocolStage(Stage.GROUND, p, rho, weyl_symbol(rho))


def apply_measurement(stage: ProtocolStage) -> ProtocolStage:
    if stage.tag is not Stage.GROUND:
        raise WrongStage(f"measurement acts on the ground stage, got {stage.tag.value}")
    branches = {}
    for a in OUTCOMES:
        P = measurement_projector(a)
        W_P = projector_symbol(a)
        branches[a] = (P @ stage.rho @ P, star_chain(W_P, stage.symbol, W_P))
    rho = sum(b[0] for b in branches.values())
    symbol = branches[+1][1] + branches[-1][1]
    return ProtocolStage(Stage.POST_MEASUREMENT, stage.params, rho, symbol, branches)


def apply_feedback(stage: ProtocolStage) -> ProtocolStage:
    if stage.tag is not Stage.POST_MEASUREMENT:
        raise WrongStage(f"feedback acts on the post-measurement stage, got {stage.tag.value}")
    p = stage.params
    rho = np.zeros((4, 4), dtype=complex)
    symbol = SymbolExpansion.constant(0.0, 2)
    for a, (rho_a, W_a) in stage.branches.items():
        U = feedback_unitary(a, p)
        W_U = feedback_symbol(a, p)
        rho = rho + U @ rho_a @ ops.dag(U)
        # the symbol of U^dagger is the complex conjugate of the symbol of U
        symbol = symbol + star_chain(W_U, W_a, W_U.conj())
    return ProtocolStage(Stage.POST_FEEDBACK, p, rho, symbol)


def run_stages(p: ProtocolParams) -> tuple[ProtocolStage, ProtocolStage, ProtocolStage]:
    g = ground_stage(p)
    m = apply_measurement(g)
    return g, m, apply_feedback(m)


# -- energies -----------------------------------------------------------------


def expectation(stage: ProtocolStage, op: np.ndarray, grid: QuadratureGrid | None = None) -> PathPair:
    """``tr[rho op]`` alongside ``int W_rho W_op dOmega``."""
    matrix = float(np.trace(stage.rho @ op).real)
    phase = float(np.real(overlap(stage.symbol, weyl_symbol(op), grid)))
    return PathPair(matrix, phase)


def energy_input(p: ProtocolParams, grid: QuadratureGrid | None = None) -> PathPair:
    """Energy Alice injects by measuring: ``<H>`` after the measurement."""
    _, m, _ = run_stages(p)
    return expectation(m, hamiltonian(p).H, grid)


def energy_output(p: ProtocolParams, grid: QuadratureGrid | None = None) -> PathPair:
    """Energy Bob extracts: ``E_A - <H>`` after the feedback."""
    _, m, f = run_stages(p)
    H = hamiltonian(p).H
    e_a = expectation(m, H, grid)
    e_f = expectation(f, H, grid)
    return PathPair(e_a.matrix - e_f.matrix, e_a.phase_space - e_f.phase_space)


def check_no_signalling(stage: ProtocolStage, grid: QuadratureGrid | None = None) -> tuple[PathPair, PathPair]:
    """``(<H_B>, <V>)`` right after Alice's measurement; both vanish."""
    if stage.tag is not Stage.POST_MEASUREMENT:
        raise WrongStage(f"no-signalling check needs the post-measurement stage, got {stage.tag.value}")
    ham = hamiltonian(stage.params)
    return expectation(stage, ham.H_B, grid), expectation(stage, ham.V, grid)


def closed_form_energy_input(p: ProtocolParams) -> float:
    return p.h**2 / p.scale


def closed_form_energy_output(p: ProtocolParams) -> float:
    u = p.h**2 + 2 * p.k**2
    return u / p.scale * (math.sqrt(1 + (p.h * p.k / u) ** 2) - 1)


def closed_form_feedback_energy(p: ProtocolParams) -> float:
    """``<H>`` after feedback: ``2 sqrt(h^2+k^2) - sqrt(h^2+4k^2)``."""
    return 2 * p.scale - math.sqrt(p.h**2 + 4 * p.k**2)


# -- entanglement ---------------------------------------------------------------


def negativity(rho) -> float:
    return (ops.trace_norm(ops.partial_transpose_B(rho)) - 1.0) / 2.0


def negativity_phase_space(stage: ProtocolStage, grid: QuadratureGrid | None = None) -> float:
    """Negativity of the operator rebuilt from the stage symbol by quadrature."""
    rho = inverse_weyl_quadrature(stage.symbol, grid)
    return negativity(0.5 * (rho + ops.dag(rho)))


def closed_form_negativity(p: ProtocolParams) -> float:
    return p.k / (2 * p.scale)


def energy_vs_negativity(p: ProtocolParams) -> float:
    """Teleported energy from the ground-state negativity.

    ``(2N/k) [sqrt(h^2 k^2 + (h^2+2k^2)^2) - (h^2+2k^2)]``; at ``k = 0`` the
    ratio ``2N/k`` is replaced by its limit ``1/sqrt(h^2+k^2)``.
    """
    u = p.h**2 + 2 * p.k**2
    bracket = math.sqrt((p.h * p.k) ** 2 + u * u) - u
    ratio = 1.0 / p.scale if p.k == 0 else 2 * negativity(ground_density(p)) / p.k
    return ratio * bracket


# -- report -------------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolReport:
    params: ProtocolParams
    E_A: PathPair
    E_B: PathPair
    H_expect: dict[str, PathPair]
    no_signalling: dict[str, PathPair]
    negativity: dict[str, PathPair]

    def pairs(self) -> dict[str, PathPair]:
        out = {"E_A": self.E_A, "E_B": self.E_B}
        for group in ("H_expect", "no_signalling", "negativity"):
            for key, v in getattr(self, group).items():
                out[f"{group}.{key}"] = v
        return out

    @property
    def residuals(self) -> dict[str, float]:
        return {key: v.residual for key, v in self.pairs().items()}

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def to_dict(self) -> dict:
        """Report in the fixed key order used for JSON output (matrix-path values)."""
        return {
            "params": {"h": self.params.h, "k": self.params.k},
            "E_A": self.E_A.value,
            "E_B": self.E_B.value,
            "H_expect": {k: v.value for k, v in self.H_expect.items()},
            "no_signalling": {k: v.value for k, v in self.no_signalling.items()},
            "negativity": {k: v.value for k, v in self.negativity.items()},
            "residuals": self.residuals,
        }


def run_protocol(p: ProtocolParams, grid: QuadratureGrid | None = None) -> ProtocolReport:
    g, m, f = run_stages(p)
    H = hamiltonian(p).H
    h_exp = {s.tag.value: expectation(s, H, grid) for s in (g, m, f)}
    e_a = h_exp["post_measurement"]
    e_b = PathPair(e_a.matrix - h_exp["post_feedback"].matrix,
                   e_a.phase_space - h_exp["post_feedback"].phase_space)
    hb, v = check_no_signalling(m, grid)
    neg = {s.tag.value: PathPair(negativity(s.rho), negativity_phase_space(s, grid)) for s in (g, m, f)}
    return ProtocolReport(p, e_a, e_b, h_exp, {"H_B": hb, "V": v}, neg)
