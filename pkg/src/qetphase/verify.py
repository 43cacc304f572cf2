"""Verification suite: every phase-space and protocol identity as a named check.

Hard checks decide the exit status.  Diagnostic checks compare published
expressions that do not hold as printed against the computed values; they
are reported and flagged but never fail the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import husimi
from . import opscore as ops
from . import phasespace as ps
from . import qet

STANDARD_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
SEED = 20240917


@dataclass(frozen=True)
class Check:
    name: str
    paper_anchor: str
    expected: float
    computed: float
    residual: float
    tol: float
    diagnostic: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_anchor": self.paper_anchor,
            "expected": float(self.expected),
            "computed": float(self.computed),
            "residual": float(self.residual),
            "tol": float(self.tol),
            "pass": self.passed,
            "diagnostic": self.diagnostic,
        }


@dataclass
class VerificationReport:
    params: qet.ProtocolParams
    checks: list[Check] = field(default_factory=list)

    @property
    def hard(self) -> list[Check]:
        return [c for c in self.checks if not c.diagnostic]

    @property
    def flagged(self) -> list[Check]:
        return [c for c in self.checks if c.diagnostic and not c.passed]

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.hard if not c.passed]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "params": {"h": self.params.h, "k": self.params.k},
            "checks": [c.to_dict() for c in self.hard],
            "summary": {
                "total": len(self.hard),
                "passed": len(self.hard) - len(self.failures),
                "failed": len(self.failures),
                "diagnostics": len(self.checks) - len(self.hard),
                "flagged": len(self.flagged),
                "status": "pass" if self.ok else "fail",
            },
            "flagged_discrepancies": [c.to_dict() for c in self.checks if c.diagnostic],
        }


class _Suite:
    def __init__(self, tol_override: float | None):
        self.tol_override = tol_override
        self.checks: list[Check] = []

    def close(self, name, anchor, expected, computed, tol):
        """Equality check on scalars or arrays (max abs deviation)."""
        e = np.asarray(expected, dtype=complex)
        c = np.asarray(computed, dtype=complex)
        res = float(np.max(np.abs(e - c))) if e.size else 0.0
        self._add(name, anchor, _rep(e), _rep(c), res, tol)

    def bound(self, name, anchor, computed, lower=-math.inf, upper=math.inf, tol=0.0):
        """Inequality check; the residual is the size of the violation."""
        c = np.asarray(computed, dtype=float)
        viol = float(max(0.0, np.max(lower - c), np.max(c - upper)))
        ref = lower if math.isfinite(lower) else upper
        self._add(name, anchor, ref, _rep(c), viol, tol)

    def diagnostic(self, name, anchor, expected, computed, tol):
        res = abs(expected - computed) if math.isfinite(expected) and math.isfinite(computed) else math.inf
        self.checks.append(Check(name, anchor, expected, computed, res, tol, diagnostic=True))

    def _add(self, name, anchor, expected, computed, residual, tol):
        tol = tol if self.tol_override is None else self.tol_override
        self.checks.append(Check(name, anchor, expected, computed, residual, tol))


def _rep(a: np.ndarray) -> float:
    """Scalar stand-in for an array in the report: the entry of largest magnitude."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    flat = a.ravel()
    v = flat[np.argmax(np.abs(flat))]
    return float(np.real(v))


def run_verification(p: qet.ProtocolParams | None = None, tol: float | None = None,
                     grid_values=STANDARD_GRID) -> VerificationReport:
    p = qet.ProtocolParams(1.0, 1.0) if p is None else p
    s = _Suite(tol)
    rng = np.random.default_rng(SEED)
    _postulates(s, rng)
    _star_products(s, rng, p)
    _protocol_point(s, p)
    _protocol_grid(s, grid_values)
    _entropies(s, p, grid_values)
    _diagnostics(s, p)
    return VerificationReport(p, s.checks)


# -- groups -------------------------------------------------------------------


def _postulates(s: _Suite, rng):
    for n in (1, 2):
        grid = ps.QuadratureGrid(n)
        s.close(f"standardization_kernel_n{n}", "int Delta dOmega = 1",
                np.eye(2**n), ps.integrate_operator(ps.kernel_field, grid), 1e-12)
        pool = [ops.random_hermitian(2**n, rng) for _ in range(10)]
        pool += [rng.standard_normal((2**n, 2**n)) + 1j * rng.standard_normal((2**n, 2**n)) for _ in range(10)]
        syms = [ps.weyl_symbol(A) for A in pool]
        exp = [np.trace(A @ B) for A in pool for B in pool]
        quad = [ps.overlap(a, b, grid) for a in syms for b in syms]
        s.close(f"traciality_pool_n{n}", "int W_A W_B dOmega = tr[AB]", exp, quad, 1e-12)
        s.close(f"standardization_trace_n{n}", "int W_A dOmega = tr A",
                [np.trace(A) for A in pool],
                [ps.integrate(ps.sample(a, grid)) for a in syms], 1e-12)
        thetas, phis, _ = grid.nodes()
        imag = max(float(np.max(np.abs(ps.weyl_symbol(A).evaluate(thetas, phis).imag))) for A in pool[:10])
        s.bound(f"reality_hermitian_symbols_n{n}", "W_A real for hermitian A", imag, upper=0.0, tol=1e-12)
        s.close(f"inverse_transform_quadrature_n{n}", "A = int W_A Delta dOmega",
                pool[0], ps.inverse_weyl_quadrature(syms[0], grid), 1e-12)

    # covariance under local rotations
    worst = 0.0
    for _ in range(50):
        rho = ops.random_density(4, rng)
        angles = rng.uniform(0, [2 * math.pi, math.pi, 4 * math.pi], size=(2, 3))
        Us = [ps.su2_rotation(*a) for a in angles]
        U = ops.tensor(*Us)
        point = ps.PhasePoint(tuple(rng.uniform(0, math.pi, 2)), tuple(rng.uniform(0, 2 * math.pi, 2)))
        back = ps.rotate_point(point, [ops.dag(u) for u in Us])
        lhs = ps.weyl_symbol(U @ rho @ ops.dag(U))(point)
        rhs = ps.weyl_symbol(rho)(back)
        worst = max(worst, abs(lhs - rhs))
    s.bound("covariance_local_rotations", "W_{U rho U+}(O) = W_rho(R^-1 O)", worst, upper=0.0, tol=1e-10)

    g1 = ps.QuadratureGrid(1)
    s.close("symbol_class_integral_3cos2", "int 3 cos^2 dOmega = 2", 2.0,
            ps.integrate(ps.sample(lambda t, p: 3 * np.cos(t[:, 0]) ** 2, g1)), 1e-13)
    s.close("raw_sphere_area", "int sin dt dp = 4 pi", 4 * math.pi,
            ps.integrate(ps.sample(lambda t, p: np.ones(t.shape[0]), ps.QuadratureGrid(1, measure=ps.Measure.RAW))),
            1e-13)
    s.close("kernel_from_rotated_parity", "Delta = 1/2 U Pi U+ (Phi independent)",
            ps.kernel_qubit(1.1, 0.4),
            [0.5 * ps.su2_rotation(0.4, 1.1, Phi) @ ps.parity_qubit() @ ops.dag(ps.su2_rotation(0.4, 1.1, Phi))
             for Phi in (0.0, 1.3, 2 * math.pi)], 1e-13)


def _star_products(s: _Suite, rng, p):
    grid = ps.QuadratureGrid(2)
    worst = 0.0
    for _ in range(25):
        A, B = ops.random_hermitian(4, rng), ops.random_hermitian(4, rng)
        SA, SB = ps.weyl_symbol(A), ps.weyl_symbol(B)
        pt = ps.PhasePoint(tuple(rng.uniform(0, math.pi, 2)), tuple(rng.uniform(0, 2 * math.pi, 2)))
        worst = max(worst, abs(ps.star_product_integral(SA, SB, pt, grid) - ps.star_product_exact(SA, SB)(pt)))
    s.bound("star_product_integral_vs_exact", "triple-kernel convolution = W_{AB}", worst, upper=0.0, tol=1e-10)

    W_H = ps.weyl_symbol(qet.hamiltonian(p).H)
    W_g = qet.ground_wigner(p)
    thetas, phis, _ = grid.nodes()
    s.close("hamiltonian_symbol_closed_form", "W_H = sqrt3 h (c1+c2) + 6k s1 s2 cp1 cp2 + 2 sqrt(h^2+k^2)",
            qet.hamiltonian_symbol_closed_form(p, thetas, phis), W_H.evaluate(thetas, phis), 1e-12)
    pts = [ps.PhasePoint(tuple(rng.uniform(0, math.pi, 2)), tuple(rng.uniform(0, 2 * math.pi, 2))) for _ in range(10)]
    s.close("star_genvalue_integral", "W_H * W_rho_g = 0 (integral form)", np.zeros(10),
            [ps.star_product_integral(W_H, W_g, pt, grid) for pt in pts], 1e-10)
    s.bound("moyal_stationarity_ground", "dW/dt = {W_rho, W_H}_* = 0",
            ps.moyal_stationarity_residual(W_g, W_H, grid), upper=0.0, tol=1e-11)


def _protocol_point(s: _Suite, p):
    g, m, f = qet.run_stages(p)
    ham = qet.hamiltonian(p)
    grid = ps.QuadratureGrid(2)
    thetas, phis, _ = grid.nodes()
    rnd = np.random.default_rng(SEED + 1)
    extra_t = rnd.uniform(0, math.pi, (100, 2))
    extra_p = rnd.uniform(0, 2 * math.pi, (100, 2))
    T = np.vstack([thetas, extra_t])
    P = np.vstack([phis, extra_p])

    s.bound("hamiltonian_psd", "H >= 0", ops.hermitian_eigenvalues(ham.H)[0], lower=0.0, tol=1e-10)
    s.close("ground_state_eigenvector", "H|g> = 0", np.zeros(4), ham.H @ qet.ground_state(p), 1e-11)
    s.close("ground_wigner_trace_form", "W_rho_g = tr[rho_g Delta_2q] (corrected closed form)",
            qet.ground_wigner_closed_form(p, T, P), g.symbol.evaluate(T, P), 1e-12)
    for st in (g, m, f):
        s.close(f"normalization_{st.tag.value}", "int W_rho dOmega1 dOmega2 = 1", 1.0,
                ps.integrate(ps.sample(st.symbol, grid)), 1e-12)
    s.close("projector_symbol", "W_P(a) = (1 + a sqrt3 s1 cp1)/2",
            [0.5 * (1 + a * ps.SQRT3 * np.sin(T[:, 0]) * np.cos(P[:, 0])) for a in qet.OUTCOMES],
            [qet.projector_symbol(a).evaluate(T, P) for a in qet.OUTCOMES], 1e-13)
    w = qet.feedback_angle(p)
    s.close("feedback_symbol", "W_U(a) = cos w - i sqrt3 a sin w s2 sp2",
            [w.cos - 1j * ps.SQRT3 * a * w.sin * np.sin(T[:, 1]) * np.sin(P[:, 1]) for a in qet.OUTCOMES],
            [qet.feedback_symbol(a, p).evaluate(T, P) for a in qet.OUTCOMES], 1e-13)
    u = p.h**2 + 2 * p.k**2
    d = math.hypot(u, p.h * p.k)
    s.close("feedback_angle_closed_form", "cos 2w = (h^2+2k^2)/D, sin 2w = hk/D",
            [u / d, p.h * p.k / d], [math.cos(2 * w.omega), math.sin(2 * w.omega)], 1e-13)
    s.close("post_measurement_symbol_star_vs_matrix", "sum_a W_P * W_g * W_P = W_{rho'}",
            ps.weyl_symbol(m.rho).coeffs, m.symbol.coeffs, 1e-12)
    s.close("post_measurement_symbol_printed", "W_rho' closed form",
            qet.post_measurement_wigner_closed_form(p, T, P), m.symbol.evaluate(T, P), 1e-12)
    s.close("post_feedback_symbol_star_vs_matrix", "sum_a W_U * W_Pg P * W_U^* = W_{rho''}",
            ps.weyl_symbol(f.rho).coeffs, f.symbol.coeffs, 1e-12)
    s.close("post_feedback_symbol_printed", "W_rho'' closed form",
            qet.post_feedback_wigner_closed_form(p, T, P), f.symbol.evaluate(T, P), 1e-12)

    rep = qet.run_protocol(p, grid)
    ea = qet.closed_form_energy_input(p)
    eb = qet.closed_form_energy_output(p)
    s.close("energy_input_matrix", "E_A = h^2/sqrt(h^2+k^2)", ea, rep.E_A.matrix, 1e-11)
    s.close("energy_input_phase_space", "E_A = int W_rho' W_H dOmega", ea, rep.E_A.phase_space, 1e-11)
    for key in ("H_B", "V"):
        pair = rep.no_signalling[key]
        s.close(f"no_signalling_{key}_matrix", f"<{key}>_rho' = 0", 0.0, pair.matrix, 1e-11)
        s.close(f"no_signalling_{key}_phase_space", f"int W_rho' W_{key} dOmega = 0", 0.0, pair.phase_space, 1e-11)
    s.close("energy_output_matrix", "E_B = E_A - <H>_rho'' closed form", eb, rep.E_B.matrix, 1e-11)
    s.close("energy_output_phase_space", "E_B from symbol overlaps", eb, rep.E_B.phase_space, 1e-11)
    s.close("negativity_ground", "N(rho_g) = k / (2 sqrt(h^2+k^2))",
            qet.closed_form_negativity(p), rep.negativity["ground"].matrix, 1e-10)
    s.bound("negativity_final", "N(rho'') = 0", abs(rep.negativity["post_feedback"].matrix), upper=0.0, tol=1e-10)
    s.close("energy_negativity_relation", "E_B = (2N/k)[sqrt(h^2k^2+(h^2+2k^2)^2) - (h^2+2k^2)]",
            eb, qet.energy_vs_negativity(p), 1e-10)
    s.bound("dual_path_agreement", "matrix trace = phase-space integral", rep.max_residual, upper=0.0, tol=1e-10)


def _protocol_grid(s: _Suite, values):
    star, e_g, ea_err, eb_err, order, negrel = [], [], [], [], [], []
    for h in values:
        for k in values:
            p = qet.ProtocolParams(h, k)
            grid = ps.QuadratureGrid(2)
            thetas, phis, _ = grid.nodes()
            W_H = ps.weyl_symbol(qet.hamiltonian(p).H)
            W_g = qet.ground_wigner(p)
            star.append(np.max(np.abs(ps.star_product_exact(W_H, W_g).evaluate(thetas, phis))))
            rep = qet.run_protocol(p, grid)
            g = rep.H_expect["ground"]
            e_g.append(max(abs(g.matrix), abs(g.phase_space)))
            ea = qet.closed_form_energy_input(p)
            eb = qet.closed_form_energy_output(p)
            ea_err.append(max(abs(rep.E_A.matrix - ea), abs(rep.E_A.phase_space - ea)))
            eb_err.append(max(abs(rep.E_B.matrix - eb), abs(rep.E_B.phase_space - eb)))
            order.append(max(0.0, -rep.E_B.matrix, rep.E_B.matrix - rep.E_A.matrix))
            negrel.append(abs(qet.energy_vs_negativity(p) - rep.E_B.matrix))
    s.bound("grid_star_genvalue", "max |W_H * W_rho_g| = 0 on the (h,k) grid", max(star), upper=0.0, tol=1e-11)
    s.bound("grid_ground_energy", "<H>_g = 0 on the (h,k) grid", max(e_g), upper=0.0, tol=1e-11)
    s.bound("grid_energy_input", "E_A closed form on the (h,k) grid", max(ea_err), upper=0.0, tol=1e-11)
    s.bound("grid_energy_output", "E_B closed form on the (h,k) grid", max(eb_err), upper=0.0, tol=1e-11)
    s.bound("grid_energy_ordering", "0 <= E_B <= E_A", max(order), upper=0.0, tol=0.0)
    s.bound("grid_energy_negativity_relation", "E_B-negativity relation on the (h,k) grid",
            max(negrel), upper=0.0, tol=1e-10)


def _entropies(s: _Suite, p, values):
    lo, hi = husimi.LOWER_BOUND, husimi.UPPER_BOUND
    k0 = husimi.wehrl_entropy_B(qet.ground_density(qet.ProtocolParams(1.0, 0.0, limit_mode=True)))
    h0 = husimi.wehrl_entropy_B(qet.ground_density(qet.ProtocolParams(0.0, 1.0, limit_mode=True)))
    s.close("wehrl_min_k0", "E^B(k=0) = 1/2 + ln 2pi = 2.3379", 2.33788, k0, 2e-4)
    s.close("wehrl_max_h0", "E^B(h=0) = ln 4pi", hi, h0, 1e-6)

    all_s, mono, conv = [], [], []
    for h in values:
        for k in values:
            rep = husimi.entropy_chain(qet.ProtocolParams(h, k))
            all_s.extend(rep.entropies())
            sg, sm, sf = rep.entropies()
            mono.append(max(0.0, sg - sm - 1e-9, sm - sf - 1e-9))
    for st in qet.run_stages(p):
        a = husimi.wehrl_entropy_B(st.rho, check=False)
        b = husimi.wehrl_entropy_B(st.rho, 2 * husimi.ENTROPY_THETA, 2 * husimi.ENTROPY_PHI, check=False)
        conv.append(abs(a - b))
    s.bound("wehrl_bounds_grid", "1/2 + ln 2pi <= E^B <= ln 4pi", all_s, lower=lo, upper=hi, tol=1e-6)
    s.bound("wehrl_monotone_chain_grid", "E^B_g <= E^B' <= E^B''", max(mono), upper=0.0, tol=0.0)
    s.bound("wehrl_quadrature_convergence", "entropy stable under grid doubling", max(conv), upper=0.0, tol=1e-8)
    g, m, f = qet.run_stages(p)
    r = abs(ops.bloch_vector(ops.partial_trace(f.rho, 1))[2])
    s.close("wehrl_final_vs_bloch_formula", "E^B'' from one-qubit Bloch length",
            husimi.wehrl_entropy_qubit(r), husimi.wehrl_entropy_B(f.rho), 1e-9)


def _diagnostics(s: _Suite, p):
    grid = ps.QuadratureGrid(2)
    thetas, phis, _ = grid.nodes()
    worst = 0.0
    for probe in (p, qet.ProtocolParams(2.0, 0.5)):
        diff = qet.ground_wigner_as_printed(probe, thetas, phis) - qet.ground_wigner_closed_form(probe, thetas, phis)
        worst = max(worst, float(np.max(np.abs(diff))))
    s.diagnostic("printed_ground_wigner_coefficients", "W_rho_g as typeset lacks h, k factors", 0.0, worst, 1e-12)

    # literal reading of the feedback angle: cos w itself equal to (h^2+2k^2)/D
    w = qet.feedback_angle(p)
    lit = qet.ProtocolParams(p.h, p.k, p.limit_mode)
    g, m, _ = qet.run_stages(lit)
    H = qet.hamiltonian(lit).H
    Y = ops.pauli_matrix("Y")
    rho2 = np.zeros((4, 4), dtype=complex)
    for a, (rho_a, _) in m.branches.items():
        U = ops.tensor(np.eye(2), w.cos_2w * np.eye(2) - 1j * a * w.sin_2w * Y)
        rho2 += U @ rho_a @ ops.dag(U)
    e_b_literal = float(np.trace(m.rho @ H).real - np.trace(rho2 @ H).real)
    s.diagnostic("feedback_angle_literal_reading", "E_B with cos w = (h^2+2k^2)/D taken literally",
                 qet.closed_form_energy_output(p), e_b_literal, 1e-11)

    rep = qet.run_protocol(p)
    s.diagnostic("energy_output_sign_as_typeset", "E_B = <H>_rho'' - E_A as typeset",
                 qet.closed_form_energy_output(p),
                 rep.H_expect["post_feedback"].matrix - rep.E_A.matrix, 1e-11)

    chain = husimi.entropy_chain(p)
    s.diagnostic("wehrl_ground_arctan_form", "typeset arctan expression for E^B_g",
                 chain.S_ground, chain.closed_form_value, 1e-6)
    s.diagnostic("wehrl_final_equals_ln4pi", "E^B'' = ln 4pi as claimed", husimi.UPPER_BOUND,
                 chain.S_post_feedback, 1e-6)
    s.diagnostic("wehrl_lower_bound_prefactor", "(1/4pi)(1 + ln 4 + 2 ln pi) vs 2.3379",
                 2.3379, husimi.PRINTED_LOWER_BOUND, 1e-4)


def with_tolerance(report: VerificationReport, tol: float) -> VerificationReport:
    return VerificationReport(report.params, [c if c.diagnostic else replace(c, tol=tol) for c in report.checks])
