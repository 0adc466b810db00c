from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

import treeshift as ts
from treeshift._util import stable_rng
from treeshift.errors import DimensionMismatch, NotInCommutant, PreconditionFailed

from conftest import oracle_shift_matrix

complex_lists = st.lists(
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    min_size=1, max_size=5)


def test_scalar_identity_symbol(t2_shift, t2):
    S, _ = t2_shift
    tree, _ = t2
    rng = stable_rng(0, "scalar-id")
    phi = ts.ScalarSymbol(np.array([1.0]))
    f = ts.L2Vector.random(tree, tree.depth, rng)
    assert (ts.scalar_mult_apply(S, S.weights, phi, f) - f).norm() < 1e-15


def test_scalar_basis_action_closed_form(t2_shift, t2):
    # action on e_u must be lambda(u|v) phi(|v|-|u|) over descendants
    S, _ = t2_shift
    tree, weights = t2
    phi = ts.ScalarSymbol(np.array([0.3, -1.0, 0.25j]))
    for u in [(0, 0), (1, 2), (2, 3)]:
        got = ts.scalar_mult_apply(S, weights, phi, ts.L2Vector.basis(tree, u))
        for v in tree.vertices:
            gap = tree.generation[v] - tree.generation[u]
            expected = 0.0
            try:
                lam = ts.lambda_product(tree, weights, u, v)
                if 0 <= gap < phi.length:
                    expected = lam * phi.coeffs[gap]
            except ts.errors.NotDescendant:
                expected = 0.0
            assert abs(got[v] - expected) < 1e-14, (u, v)


def test_scalar_shift_symbol_is_shift(t2_shift, t2):
    S, _ = t2_shift
    tree, _ = t2
    rng = stable_rng(1, "scalar-shift")
    phi = ts.ScalarSymbol(np.array([0.0, 1.0]))
    for _ in range(5):
        f = ts.L2Vector.random(tree, tree.depth - 1, rng)
        assert (ts.scalar_mult_apply(S, S.weights, phi, f)
                - ts.apply_shift(S, f)).norm() < 1e-13


def test_scalar_adjoint_pairing(t2_shift, t2):
    S, _ = t2_shift
    tree, weights = t2
    rng = stable_rng(2, "scalar-adj")
    phi = ts.ScalarSymbol(np.array([0.5, 1.0 - 0.5j, 0.1]))
    smat_phi = np.column_stack([
        ts.scalar_mult_apply(S, weights, phi, ts.L2Vector.basis(tree, v)).data
        for v in tree.vertices])
    for _ in range(10):
        f = ts.L2Vector.random(tree, tree.depth, rng)
        g = ts.L2Vector.random(tree, tree.depth, rng)
        lhs = ts.scalar_mult_apply(S, weights, phi, f).inner(g)
        rhs = f.inner(ts.scalar_mult_adjoint(S, weights, phi, g))
        assert abs(lhs - rhs) < 1e-12
        # dense-oracle adjoint
        want = smat_phi.conj().T @ g.data
        got = ts.scalar_mult_adjoint(S, weights, phi, g)
        assert np.linalg.norm(got.data - want) < 1e-12


def test_scalar_adjoint_chain_step(chain_shift, chain):
    S, _ = chain_shift
    tree, weights = chain
    phi = ts.ScalarSymbol(np.array([0.0, 1.0]))
    got = ts.scalar_mult_adjoint(S, weights, phi, ts.L2Vector.basis(tree, (3, 0)))
    assert (got - ts.L2Vector.basis(tree, (2, 0))).norm() < 1e-15


def test_convolve_unit_law():
    rng = stable_rng(3, "unit")
    for dim in (1, 2, 3):
        a = ts.OpSymbol(rng.standard_normal((4, dim, dim))
                        + 1j * rng.standard_normal((4, dim, dim)))
        unit = ts.unit_symbol(dim)
        left = ts.convolve(unit, a)
        right = ts.convolve(a, unit)
        assert np.linalg.norm(left.mats - a.mats) < 1e-15
        assert np.linalg.norm(right.mats - a.mats) < 1e-15


def test_convolve_indicator_composition():
    for m, n in ((0, 0), (1, 2), (3, 1)):
        a = ts.indicator_symbol(m, 2)
        b = ts.indicator_symbol(n, 2)
        c = ts.convolve(a, b)
        want = ts.indicator_symbol(m + n, 2)
        assert c.length == m + n + 1
        assert np.linalg.norm(c.mats - want.mats) < 1e-15


@given(a=complex_lists, b=complex_lists)
def test_convolve_matches_polymul(a, b):
    pa = ts.ScalarSymbol(np.array(a))
    pb = ts.ScalarSymbol(np.array(b))
    got = ts.convolve(pa, pb)
    want = np.polymul(np.array(a)[::-1], np.array(b)[::-1])[::-1]
    assert np.linalg.norm(got.coeffs - want) < 1e-9


@given(a=complex_lists, b=complex_lists, c=complex_lists)
def test_scalar_convolution_commutative_associative(a, b, c):
    pa, pb, pc = (ts.ScalarSymbol(np.array(x)) for x in (a, b, c))
    ab = ts.convolve(pa, pb)
    ba = ts.convolve(pb, pa)
    assert np.linalg.norm(ab.coeffs - ba.coeffs) < 1e-9
    one = ts.convolve(ts.convolve(pa, pb), pc)
    two = ts.convolve(pa, ts.convolve(pb, pc))
    assert np.linalg.norm(one.coeffs - two.coeffs) < 1e-7


def test_convolve_dimension_mismatch():
    a = ts.unit_symbol(2)
    b = ts.unit_symbol(3)
    with pytest.raises(DimensionMismatch):
        ts.convolve(a, b)


def test_convolve_with_coeffs_kernel_vector(t2_shift):
    # convolving against a kernel vector's coefficients reads off the symbol
    S, basis = t2_shift
    rng = stable_rng(4, "kernel-readout")
    phi = ts.OpSymbol(rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2)))
    for j in range(basis.dim):
        c = ts.analytic_coeffs(S, basis, basis.vector(j))
        out = ts.convolve_with_coeffs(phi, c)
        e = np.zeros(2)
        e[j] = 1
        for n in range(out.length):
            want = phi.mats[n] @ e if n < phi.length else np.zeros(2)
            assert np.linalg.norm(out.coords[n] - want) < 1e-13


def test_convolve_with_coeffs_double_loop_oracle(t2_shift):
    S, basis = t2_shift
    rng = stable_rng(5, "double-loop")
    phi = ts.OpSymbol(rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2)))
    c = ts.CoeffSeq(rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2)), 5)
    got = ts.convolve_with_coeffs(phi, c)
    want = np.zeros((9, 2), dtype=np.complex128)
    for n in range(9):
        for k in range(phi.length):
            if 0 <= n - k < c.length:
                want[n] += phi.mats[k] @ c.coords[n - k]
    assert np.linalg.norm(got.coords - want) < 1e-13
    unit = ts.unit_symbol(2)
    again = ts.convolve_with_coeffs(unit, c)
    assert np.linalg.norm(again.coords - c.coords) < 1e-15


def test_extract_symbol_identity_and_shift(t2_shift, t2):
    S, basis = t2_shift
    tree, weights = t2
    eye_op = np.eye(tree.n_vertices, dtype=np.complex128)
    phi = ts.extract_symbol(S, basis, eye_op)
    assert np.linalg.norm(phi.mats[0] - np.eye(2)) < 1e-14
    assert np.linalg.norm(phi.mats[1:]) < 1e-14
    smat = oracle_shift_matrix(tree, weights)
    phi_s = ts.extract_symbol(S, basis, smat)
    want = ts.indicator_symbol(1, 2)
    assert np.linalg.norm(phi_s.mats[:2] - want.mats) < 1e-13
    assert np.linalg.norm(phi_s.mats[2:phi_s.exact_to + 1]) < 1e-13


def test_extract_symbol_polynomial(t2_shift, t2):
    S, basis = t2_shift
    tree, weights = t2
    smat = oracle_shift_matrix(tree, weights)
    A = 2.0 * np.eye(tree.n_vertices) + 3.0 * np.linalg.matrix_power(smat, 2)
    phi = ts.extract_symbol(S, basis, A)
    coeffs = {0: 2.0, 2: 3.0}
    for m in range(phi.exact_to + 1):
        want = coeffs.get(m, 0.0) * np.eye(2)
        assert np.linalg.norm(phi.mats[m] - want) < 1e-12, m


def test_extract_symbol_linearity(t2_shift, t2):
    S, basis = t2_shift
    tree, weights = t2
    rng = stable_rng(6, "linearity")
    smat = oracle_shift_matrix(tree, weights)
    A = smat @ smat
    B = np.linalg.matrix_power(smat, 3)
    pa = ts.extract_symbol(S, basis, A)
    pb = ts.extract_symbol(S, basis, B)
    pc = ts.extract_symbol(S, basis, 1.5 * A + (2 - 1j) * B)
    assert np.linalg.norm(pc.mats - 1.5 * pa.mats - (2 - 1j) * pb.mats) < 1e-12


def test_extract_symbol_multiplicativity(t2_shift, t2):
    # commuting A, B: symbol of AB is the convolution of symbols, where exact
    S, basis = t2_shift
    tree, weights = t2
    smat = oracle_shift_matrix(tree, weights)
    A = smat + 0.5 * np.eye(tree.n_vertices)
    B = smat @ smat - np.eye(tree.n_vertices)
    pa = ts.extract_symbol(S, basis, A)
    pb = ts.extract_symbol(S, basis, B)
    pab = ts.extract_symbol(S, basis, A @ B)
    conv = ts.convolve(ts.OpSymbol(pa.mats[:4]), ts.OpSymbol(pb.mats[:4]))
    upto = min(pab.exact_to, 6)
    assert np.linalg.norm(pab.mats[:upto + 1] - conv.mats[:upto + 1]) < 1e-11


def test_commutant_check_polynomials(t2_shift, t2):
    S, basis = t2_shift
    tree, weights = t2
    smat = oracle_shift_matrix(tree, weights)
    rng = stable_rng(7, "commutant")
    eye_op = np.eye(tree.n_vertices, dtype=np.complex128)
    rep = ts.commutant_check(S, basis, eye_op, trials=5)
    assert rep.max_residual < 1e-11
    cube = np.linalg.matrix_power(smat, 3)
    rep3 = ts.commutant_check(S, basis, cube, trials=10)
    assert rep3.max_residual < 1e-10
    coeffs = rng.standard_normal(5)
    poly = sum(c * np.linalg.matrix_power(smat, k) for k, c in enumerate(coeffs))
    repp = ts.commutant_check(S, basis, poly, trials=10)
    assert repp.max_residual < 1e-10


def test_commutant_check_rejects(t2_shift, t2):
    S, basis = t2_shift
    tree, _ = t2
    proj = np.zeros((tree.n_vertices, tree.n_vertices), dtype=np.complex128)
    proj[0, 0] = 1.0
    with pytest.raises(NotInCommutant):
        ts.commutant_check(S, basis, proj)


def test_membership_identity_bounded(t2_shift):
    S, basis = t2_shift
    rep = ts.membership_diagnostic(S, basis, ts.unit_symbol(2), 12)
    assert rep.verdict == ts.BOUNDED
    assert max(rep.norms) == pytest.approx(1.0, abs=1e-12)


def test_membership_divergent_family(t2_shift):
    S, basis = t2_shift
    alpha = 0.5
    cases = [
        np.array([[1.0, 0.0], [0.0, 0.0]]),   # a != d
        np.array([[1.0, 1.0], [0.0, 1.0]]),   # b != 0
        np.array([[1.0, 0.0], [1.0, 1.0]]),   # c != 0
    ]
    for block in cases:
        sym = ts.two_ray_symbol(basis, alpha, [block])
        rep = ts.membership_diagnostic(S, basis, sym, 12)
        assert rep.verdict == ts.DIVERGENT, block


def test_membership_admissible_bounded(t2_shift):
    S, basis = t2_shift
    rng = stable_rng(8, "admissible")
    for _ in range(3):
        a0, d0, a1, d1 = rng.standard_normal(4)
        sym = ts.two_ray_admissible_symbol(basis, 0.5, a0, d0, a1, d1)
        rep = ts.membership_diagnostic(S, basis, sym, 12)
        assert rep.verdict == ts.BOUNDED, (a0, d0, a1, d1)


def test_membership_scalar_constant_identity(t2_shift):
    S, basis = t2_shift
    sym = ts.two_ray_symbol(basis, 0.5, [np.eye(2) * (1.3 - 0.2j)])
    rep = ts.membership_diagnostic(S, basis, sym, 12)
    assert rep.verdict == ts.BOUNDED


def test_divergence_witness_per_term(t2_shift, t2):
    S, basis = t2_shift
    tree, _ = t2
    alpha = 0.5
    a, d = 1.0, 0.0
    sym = ts.two_ray_symbol(basis, alpha, [np.diag([a, d]).astype(complex)])
    witness = ts.two_ray_divergence_witness(tree, alpha, tree.depth - 1)
    conv = ts.convolve_with_coeffs(sym, ts.analytic_coeffs(S, basis, witness))
    keep = conv.coords.copy()
    gen = basis.gen_index
    for n in range(keep.shape[0]):
        keep[n][gen + n > tree.depth] = 0.0
    image = ts.expand_layers(S, basis, ts.CoeffSeq(keep, conv.exact_to))
    per_term = alpha ** 4 * abs(a - d) ** 2 / (alpha ** 2 + 1) ** 2
    running = 0.0
    m = 3
    count = 0
    while m <= tree.depth - 1:
        term = abs(image[(1, m)]) ** 2
        assert abs(term - per_term) < 1e-12
        running += term
        count += 1
        m += 3
    assert abs(running - count * per_term) < 1e-12


def test_product_law(t2_shift):
    S, basis = t2_shift
    rng = stable_rng(9, "product")
    phi = ts.ScalarSymbol(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    psi = ts.ScalarSymbol(rng.standard_normal(3) + 1j * rng.standard_normal(3))
    rep = ts.product_law_check(S, basis, phi, psi, trials=10)
    assert rep.max_residual < 1e-10
    unit = ts.unit_symbol(basis.dim)
    rep2 = ts.product_law_check(S, basis, unit, unit, trials=3)
    assert rep2.max_residual == 0.0


def test_product_law_triple_sum_oracle(t4_shift):
    # brute-force triple sums on the wide tree, scalar symbols
    S, basis = t4_shift
    rng = stable_rng(10, "triple")
    phi = ts.ScalarSymbol(rng.standard_normal(3))
    psi = ts.ScalarSymbol(rng.standard_normal(3))
    f = ts.L2Vector.random(S.tree, S.tree.depth, rng)
    c = ts.analytic_coeffs(S, basis, f)
    nested = ts.convolve_with_coeffs(phi, ts.convolve_with_coeffs(psi, c))
    want = np.zeros_like(nested.coords)
    for n in range(want.shape[0]):
        for j in range(phi.length):
            for k in range(psi.length):
                m = n - j - k
                if 0 <= m < c.length:
                    want[n] += phi.coeffs[j] * psi.coeffs[k] * c.coords[m]
    assert np.linalg.norm(nested.coords - want) < 1e-12


def test_scalar_equivalence(t2_shift):
    S, basis = t2_shift
    rng = stable_rng(11, "equiv")
    for length in (1, 2, 4):
        phi = ts.ScalarSymbol(rng.standard_normal(length) + 1j * rng.standard_normal(length))
        rep = ts.scalar_equivalence_check(S, basis, phi, trials=10)
        assert rep.max_residual < 1e-10


def test_scalar_equivalence_is_shift(t2_shift, t2):
    S, basis = t2_shift
    tree, _ = t2
    rng = stable_rng(12, "equiv-shift")
    phi = ts.ScalarSymbol(np.array([0.0, 1.0]))
    f = ts.L2Vector.random(tree, tree.depth - 2, rng)
    conv = ts.convolve_with_coeffs(phi, ts.analytic_coeffs(S, basis, f, order=tree.depth - 2))
    via_model = ts.reconstruct(S, basis, conv, tree.depth)
    assert (via_model - ts.apply_shift(S, f)).norm() < 1e-11


def test_symbol_json_round_trip():
    rng = stable_rng(13, "json")
    op = ts.OpSymbol(rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2)))
    back = ts.OpSymbol.from_json(op.to_json())
    assert np.linalg.norm(back.mats - op.mats) < 1e-15
    sc = ts.ScalarSymbol(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    back_sc = ts.ScalarSymbol.from_json(sc.to_json())
    assert np.linalg.norm(back_sc.coeffs - sc.coeffs) < 1e-15


def test_membership_depth_precondition(t2_shift):
    S, basis = t2_shift
    with pytest.raises(PreconditionFailed):
        ts.membership_diagnostic(S, basis, ts.unit_symbol(2), S.tree.depth + 1)


def test_indicator_product_acts_as_cube(t2_shift):
    # chi_1 * chi_2 acts on coefficients the way the cube of the shift does
    S, basis = t2_shift
    tree = S.tree
    rng = stable_rng(14, "cube")
    sym = ts.convolve(ts.indicator_symbol(1, basis.dim), ts.indicator_symbol(2, basis.dim))
    f = ts.L2Vector.random(tree, tree.depth - 3, rng)
    cube = ts.apply_shift(S, ts.apply_shift(S, ts.apply_shift(S, f)))
    want = ts.analytic_coeffs(S, basis, cube)
    got = ts.convolve_with_coeffs(sym, ts.analytic_coeffs(S, basis, f))
    upto = want.length
    assert np.linalg.norm(got.coords[:upto] - want.coords) < 1e-11


def test_scalar_basis_action_every_vertex(t2_shift, t2):
    S, _ = t2_shift
    tree, weights = t2
    phi = ts.ScalarSymbol(np.array([0.7, -0.4 + 0.1j]))
    for u in tree.vertices:
        got = ts.scalar_mult_apply(S, weights, phi, ts.L2Vector.basis(tree, u))
        for v, val in got.as_dict().items():
            gap = tree.generation[v] - tree.generation[u]
            lam = ts.lambda_product(tree, weights, u, v)
            assert 0 <= gap < phi.length
            assert abs(val - lam * phi.coeffs[gap]) < 1e-13


def test_opsymbol_json_dim_mismatch():
    bad = '{"dim": 3, "mats": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]}'
    with pytest.raises(DimensionMismatch):
        ts.OpSymbol.from_json(bad)


def test_mixed_scalar_op_convolution(t2_shift):
    _, basis = t2_shift
    rng = stable_rng(15, "mixed")
    sa = ts.ScalarSymbol(rng.standard_normal(3) + 1j * rng.standard_normal(3))
    op = ts.OpSymbol(rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2)))
    mixed = ts.convolve(sa, op)
    promoted = ts.convolve(ts.OpSymbol.from_scalar(sa, 2), op)
    assert np.linalg.norm(mixed.mats - promoted.mats) < 1e-13
    flipped = ts.convolve(op, sa)
    assert np.linalg.norm(flipped.mats - mixed.mats) < 1e-13


def test_scalar_diagonal_detection():
    eye2 = np.eye(2)
    sym = ts.OpSymbol(np.stack([1.5 * eye2, -0.25j * eye2]))
    assert sym.is_scalar_diagonal()
    assert np.allclose(sym.scalar_part().coeffs, [1.5, -0.25j])
    off = ts.OpSymbol(np.stack([eye2, np.array([[0.0, 1.0], [0.0, 0.0]])]))
    assert not off.is_scalar_diagonal()
    with pytest.raises(DimensionMismatch):
        off.scalar_part()


def test_compressed_map_matches_literal_reconstruct(t2_shift):
    # dual route: the diagnostic's map columns equal reconstruct applied to
    # the convolved coefficients of each unit vector
    from treeshift.multiplier import _compressed_map_columns

    S, basis = t2_shift
    tree = S.tree
    phi = ts.ScalarSymbol(np.array([1.0, -0.5j, 0.25]))
    d = 4
    mat, dropped, cols = _compressed_map_columns(S, basis, phi, d)
    assert dropped == 0.0
    for ci, v in enumerate(cols):
        c = ts.analytic_coeffs(S, basis, ts.L2Vector.basis(tree, v), order=d)
        conv = ts.convolve_with_coeffs(phi, c)
        g = ts.reconstruct(S, basis, conv,
                           support_depth=d + phi.length - 1 + basis.max_generation)
        assert np.linalg.norm(mat[:, ci] - g.data) < 1e-11
