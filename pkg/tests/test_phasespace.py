import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as spi

from qetphase import opscore as ops
from qetphase import phasespace as ps
from qetphase.qet import ProtocolParams, ground_wigner, hamiltonian

S3 = math.sqrt(3)
X, Y, Z = (ops.pauli_matrix(c) for c in "XYZ")
G1 = ps.QuadratureGrid(1)
G2 = ps.QuadratureGrid(2)

angles = st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi))


def random_point(rng, n=2):
    return ps.PhasePoint(tuple(rng.uniform(0, math.pi, n)), tuple(rng.uniform(0, 2 * math.pi, n)))


def sphere_quad(f, density=1 / (2 * math.pi)):
    """Adaptive scipy quadrature over one sphere; independent of the GL grid."""
    val, _ = spi.dblquad(lambda t, p: f(t, p) * math.sin(t) * density, 0, 2 * math.pi, 0, math.pi,
                         epsabs=1e-13, epsrel=1e-13)
    return val


# -- phase points --------------------------------------------------------------

def test_phase_point_normalises_phi():
    p = ps.PhasePoint((0.5,), (2 * math.pi + 0.25,))
    assert p.phis[0] == pytest.approx(0.25)
    assert ps.PhasePoint((0.5,), (-0.5,)).phis[0] == pytest.approx(2 * math.pi - 0.5)


def test_phase_point_rejects_bad_theta():
    with pytest.raises(ValueError):
        ps.PhasePoint((4.0,), (0.0,))
    with pytest.raises(ValueError):
        ps.PhasePoint((1.0, 1.0), (0.0,))


# -- parity, rotation, kernel --------------------------------------------------

def test_parity_qubit():
    P = ps.parity_qubit()
    assert np.allclose(P, np.diag([1 + S3, 1 - S3]))
    assert np.trace(P).real == pytest.approx(2)
    assert np.allclose(ops.hermitian_eigenvalues(P), [1 - S3, 1 + S3])


def test_su2_rotation_examples(rng):
    assert np.allclose(ps.su2_rotation(0, 0, 0), np.eye(2))
    assert np.allclose(ps.su2_rotation(0, math.pi, 0), [[0, -1], [1, 0]], atol=1e-15)
    for _ in range(20):
        U = ps.su2_rotation(*rng.uniform(0, 4 * math.pi, 3))
        assert np.max(np.abs(U @ U.conj().T - np.eye(2))) <= 1e-13
        assert abs(np.linalg.det(U) - 1) <= 1e-13


def test_kernel_examples():
    assert np.allclose(ps.kernel_qubit(0.0, 1.7), np.diag([(1 + S3) / 2, (1 - S3) / 2]))
    assert np.allclose(ps.kernel_qubit(math.pi / 2, 0.0), 0.5 * np.array([[1, S3], [S3, 1]]))


@pytest.mark.parametrize("Phi", [0.0, 1.3, 2 * math.pi])
def test_kernel_is_rotated_parity(Phi, rng):
    for _ in range(10):
        th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        U = ps.su2_rotation(ph, th, Phi)
        assert np.max(np.abs(0.5 * U @ ps.parity_qubit() @ U.conj().T - ps.kernel_qubit(th, ph))) <= 1e-13


@given(angles)
def test_kernel_hermitian_trace_one(a):
    K = ps.kernel_qubit(*a)
    assert ops.is_hermitian(K) and abs(np.trace(K) - 1) <= 1e-13


def test_kernel_multi(rng):
    p = ps.PhasePoint((0.0, 0.0), (0.3, 1.1))
    assert np.allclose(ps.kernel_multi(p), np.kron(ps.kernel_qubit(0, 0), ps.kernel_qubit(0, 0)))
    for _ in range(20):
        K = ps.kernel_multi(random_point(rng))
        assert ops.is_hermitian(K) and abs(np.trace(K) - 1) <= 1e-13


@pytest.mark.parametrize("n", [1, 2, 3])
def test_kernel_integrates_to_identity(n):
    got = ps.integrate_operator(ps.kernel_field, ps.QuadratureGrid(n))
    assert np.max(np.abs(got - np.eye(2**n))) <= 1e-12


def test_kernel_identity_against_scipy():
    for i in range(2):
        for j in range(2):
            re = sphere_quad(lambda t, p: ps.kernel_qubit(t, p)[i, j].real)
            im = sphere_quad(lambda t, p: ps.kernel_qubit(t, p)[i, j].imag)
            assert complex(re, im) == pytest.approx(float(i == j), abs=1e-10)


# -- symbols -------------------------------------------------------------------

def test_symbol_of_sigma_z():
    S = ps.weyl_symbol(Z)
    for th in np.linspace(0, math.pi, 7):
        assert S(ps.PhasePoint((th,), (0.4,))) == pytest.approx(S3 * math.cos(th))


def test_symbol_basis_matches_kernel_trace(rng):
    for _ in range(20):
        th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        f = ps.sphere_basis(th, ph)
        for a, c in enumerate("IXYZ"):
            assert np.trace(ops.pauli_matrix(c) @ ps.kernel_qubit(th, ph)) == pytest.approx(f[a], abs=1e-13)


def test_symbol_of_identity_is_one(rng):
    S = ps.weyl_symbol(np.eye(4))
    assert S(random_point(rng)) == pytest.approx(1)


def test_hamiltonian_symbol_printed_form(rng):
    for h, k in [(1, 1), (0.5, 2), (3, 0.25)]:
        p = ProtocolParams(h, k)
        S = ps.weyl_symbol(hamiltonian(p).H)
        for _ in range(10):
            pt = random_point(rng)
            (t1, t2), (p1, p2) = pt.thetas, pt.phis
            expected = (S3 * h * (math.cos(t1) + math.cos(t2))
                        + 6 * k * math.sin(t1) * math.sin(t2) * math.cos(p1) * math.cos(p2)
                        + 2 * math.hypot(h, k))
            assert S(pt) == pytest.approx(expected, abs=1e-12)


def test_weyl_symbol_pointwise_trace(rng):
    for _ in range(20):
        A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        pt = random_point(rng)
        assert abs(ps.weyl_symbol(A)(pt) - ps.weyl_symbol_at(A, pt)) <= 1e-12


def test_hermitian_symbols_are_real(rng):
    thetas, phis, _ = G2.nodes()
    for _ in range(20):
        S = ps.weyl_symbol(ops.random_hermitian(4, rng))
        assert S.is_real()
        assert np.max(np.abs(S.evaluate(thetas, phis).imag)) <= 1e-12


def test_inverse_weyl_roundtrip(rng):
    for _ in range(50):
        A = ops.random_hermitian(4, rng)
        assert np.max(np.abs(ps.inverse_weyl(ps.weyl_symbol(A)) - A)) <= 1e-13


def test_inverse_weyl_examples():
    assert np.allclose(ps.inverse_weyl(ps.SymbolExpansion.constant(1, 1)), np.eye(2))
    assert np.allclose(ps.inverse_weyl(ps.SymbolExpansion.from_terms({"Z": 1})), Z)


def test_inverse_weyl_quadrature_path(rng):
    for n in (1, 2):
        for _ in range(10):
            A = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
            S = ps.weyl_symbol(A)
            assert np.max(np.abs(ps.inverse_weyl_quadrature(S, ps.QuadratureGrid(n)) - A)) <= 1e-12


def test_inverse_sqrt3_cos_against_scipy():
    # sigma_z from (1/2pi) int sqrt3 cos(t) Delta sin t dt dp, by adaptive quadrature
    for i in range(2):
        v = sphere_quad(lambda t, p: (S3 * math.cos(t) * ps.kernel_qubit(t, p)[i, i]).real)
        assert v == pytest.approx(Z[i, i].real, abs=1e-10)


def test_covariance_single_qubit(rng):
    for _ in range(50):
        U = ps.su2_rotation(*rng.uniform(0, 4 * math.pi, 3))
        rho = ops.random_density(2, rng)
        pt = random_point(rng, 1)
        back = ps.rotate_point(pt, [U.conj().T])
        assert ps.weyl_symbol(U @ rho @ U.conj().T)(pt) == pytest.approx(ps.weyl_symbol(rho)(back), abs=1e-10)


# -- quadrature ----------------------------------------------------------------

@pytest.mark.parametrize("n,measure,mass", [(1, ps.Measure.PAPER_HAAR, 2), (2, ps.Measure.PAPER_HAAR, 4),
                                            (1, ps.Measure.RAW, 4 * math.pi), (2, ps.Measure.RAW, 16 * math.pi**2)])
def test_constant_integrates_to_mass(n, measure, mass):
    g = ps.QuadratureGrid(n, measure=measure)
    assert ps.integrate(ps.sample(lambda t, p: np.ones(t.shape[0]), g)) == pytest.approx(mass, abs=1e-13 * mass)
    assert g.total_mass == pytest.approx(mass)


def test_three_cos_squared():
    val = ps.integrate(ps.sample(lambda t, p: 3 * np.cos(t[:, 0]) ** 2, G1))
    assert abs(val - 2) <= 1e-13
    assert sphere_quad(lambda t, p: 3 * math.cos(t) ** 2) == pytest.approx(2, abs=1e-12)


@given(st.integers(0, 5), st.integers(-7, 7))
@settings(max_examples=40)
def test_grid_exactness(deg, m):
    # cos^deg(t) e^{i m p} integrates to 0 unless m = 0 and deg even
    g = ps.QuadratureGrid(1, 3, 8)
    val = ps.integrate(ps.sample(lambda t, p: np.cos(t[:, 0]) ** deg * np.exp(1j * m * p[:, 0]), g))
    exact = 2 / (deg + 1) if (m == 0 and deg % 2 == 0) else 0.0
    assert abs(val - exact) <= 1e-13


def test_grid_exactness_metadata():
    assert ps.QuadratureGrid(2, 3, 8).exactness == (5, 7)
    assert ps.QuadratureGrid(2).size == 24**2


def test_integrate_linear(rng):
    a, b = rng.normal(size=2)
    f = ps.weyl_symbol(ops.random_hermitian(4, rng))
    g = ps.weyl_symbol(ops.random_hermitian(4, rng))
    lhs = ps.integrate(ps.sample(f * a + g * b, G2))
    rhs = a * ps.integrate(ps.sample(f, G2)) + b * ps.integrate(ps.sample(g, G2))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_integrate_size_mismatch():
    with pytest.raises(ps.SizeMismatch):
        ps.SymbolField(G1, np.ones(3))


def test_standardization(rng):
    for _ in range(50):
        A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert abs(ps.integrate(ps.sample(ps.weyl_symbol(A), G2)) - np.trace(A)) <= 1e-12


# -- overlap ---------------------------------------------------------------------

def test_overlap_examples():
    Sx = ps.weyl_symbol(X)
    assert ps.overlap(Sx, Sx, G1) == pytest.approx(2, abs=1e-12)
    assert ps.overlap_exact(Sx, Sx) == pytest.approx(2)


def test_overlap_density_with_identity(rng):
    rho = ops.random_density(4, rng)
    assert ps.overlap(ps.weyl_symbol(rho), ps.weyl_symbol(np.eye(4)), G2) == pytest.approx(1, abs=1e-12)


def test_overlap_ground_with_hamiltonian():
    p = ProtocolParams(1, 1)
    assert abs(ps.overlap(ground_wigner(p), ps.weyl_symbol(hamiltonian(p).H), G2)) <= 1e-12


def test_traciality_pool(rng):
    pool = [rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(20)]
    syms = [ps.weyl_symbol(A) for A in pool]
    for A, SA in zip(pool, syms):
        for B, SB in zip(pool, syms):
            tr = np.trace(A @ B)
            assert abs(ps.overlap(SA, SB, G2) - tr) <= 1e-12 * max(1, abs(tr))
            assert abs(ps.overlap_exact(SA, SB) - tr) <= 1e-12 * max(1, abs(tr))


def test_overlap_against_scipy():
    A = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    B = np.array([[1.0, 0.5j], [-0.5j, -2.0]])
    SA, SB = ps.weyl_symbol(A), ps.weyl_symbol(B)
    val = sphere_quad(lambda t, p: (SA(ps.PhasePoint((t,), (p,))) * SB(ps.PhasePoint((t,), (p,)))).real)
    assert val == pytest.approx(np.trace(A @ B).real, abs=1e-10)


# -- star products -----------------------------------------------------------------

def test_star_identity_exact(rng):
    S = ps.weyl_symbol(ops.random_hermitian(4, rng))
    assert np.max(np.abs(ps.star_product_exact(ps.weyl_symbol(np.eye(4)), S).coeffs - S.coeffs)) <= 1e-14


def test_star_pauli_product():
    got = ps.star_product_exact(ps.weyl_symbol(X), ps.weyl_symbol(Y))
    assert np.allclose(got.coeffs, (1j * ps.weyl_symbol(Z)).coeffs)


def test_star_genvalue_exact():
    p = ProtocolParams(1, 1)
    prod = ps.star_product_exact(ps.weyl_symbol(hamiltonian(p).H), ground_wigner(p))
    assert prod.max_abs_coeff() <= 1e-12


def test_star_associative(rng):
    A, B, C = (ps.weyl_symbol(ops.random_hermitian(4, rng)) for _ in range(3))
    lhs = ps.star_product_exact(ps.star_product_exact(A, B), C)
    rhs = ps.star_product_exact(A, ps.star_product_exact(B, C))
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_star_integral_examples(rng):
    one = ps.weyl_symbol(np.eye(4))
    assert ps.star_product_integral(one, one, random_point(rng), G2) == pytest.approx(1, abs=1e-12)
    sz = ps.weyl_symbol(Z)
    assert ps.star_product_integral(sz, sz, ps.PhasePoint((math.pi / 3,), (0.2,)), G1) == pytest.approx(1, abs=1e-12)
    p = ProtocolParams(1, 1)
    W_H, W_g = ps.weyl_symbol(hamiltonian(p).H), ground_wigner(p)
    for _ in range(10):
        assert abs(ps.star_product_integral(W_H, W_g, random_point(rng), G2)) <= 1e-10


def test_star_integral_matches_exact(rng):
    for _ in range(25):
        A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        B = ops.random_hermitian(4, rng)
        SA, SB = ps.weyl_symbol(A), ps.weyl_symbol(B)
        pt = random_point(rng)
        assert abs(ps.star_product_integral(SA, SB, pt, G2) - ps.star_product_exact(SA, SB)(pt)) <= 1e-10


def test_star_integral_three_qubits(rng):
    SA = ps.weyl_symbol(ops.random_hermitian(8, rng))
    SB = ps.weyl_symbol(ops.random_hermitian(8, rng))
    pt = random_point(rng, 3)
    g3 = ps.QuadratureGrid(3, 2, 5)
    assert abs(ps.star_product_integral(SA, SB, pt, g3) - ps.star_product_exact(SA, SB)(pt)) <= 1e-10


@pytest.mark.parametrize("nt,nph", [(1, 8), (3, 4)])
def test_star_integral_insufficient_grid(nt, nph):
    S = ps.weyl_symbol(Z)
    with pytest.raises(ps.InsufficientQuadrature):
        ps.star_product_integral(S, S, ps.PhasePoint((0.1,), (0.0,)), ps.QuadratureGrid(1, nt, nph))


def test_star_commutator():
    Sx, Sy = ps.weyl_symbol(X), ps.weyl_symbol(Y)
    assert ps.star_commutator(Sx, Sx).max_abs_coeff() == 0
    assert np.allclose(ps.star_commutator(Sx, Sy).coeffs, (2 * ps.weyl_symbol(Z)).coeffs)
    p = ProtocolParams(1, 1)
    assert ps.star_commutator(ground_wigner(p), ps.weyl_symbol(hamiltonian(p).H)).max_abs_coeff() <= 1e-12


def test_star_commutator_antisymmetric(rng):
    A, B = (ps.weyl_symbol(ops.random_hermitian(4, rng)) for _ in range(2))
    assert np.allclose(ps.star_commutator(A, B).coeffs, -ps.star_commutator(B, A).coeffs)


def test_moyal_residual_examples():
    p = ProtocolParams(1, 1)
    W_H = ps.weyl_symbol(hamiltonian(p).H)
    assert ps.moyal_stationarity_residual(ground_wigner(p), W_H, G2) <= 1e-11
    assert ps.moyal_stationarity_residual(ps.weyl_symbol(np.eye(4) / 4), W_H, G2) <= 1e-12
    # (1/i)[|+><+|, Z] = -Y, symbol -sqrt3 sin t sin p; the default grid hits t = p = pi/2
    plus = np.full((2, 2), 0.5)
    assert ps.moyal_stationarity_residual(ps.weyl_symbol(plus), ps.weyl_symbol(Z), G1) == pytest.approx(S3, abs=1e-10)


# -- export --------------------------------------------------------------------------

def test_field_csv_header_and_rows():
    g = ps.SampleGrid(2, 3, 2, fixed=((0.0, 0.0),))
    text = ps.field_to_csv(ps.sample(ps.weyl_symbol(np.eye(4) / 4), g))
    lines = text.strip().split("\n")
    assert lines[0] == "theta1,phi1,theta2,phi2,value"
    assert len(lines) == 1 + 6
    assert lines[1] == "0,0,0,0,0.25"
    assert lines[3].startswith("1.57079632679,0,")
