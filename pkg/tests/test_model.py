from __future__ import annotations

import numpy as np
import pytest

import treeshift as ts
from treeshift._util import stable_rng
from treeshift.errors import Inconsistent, OutsideDisc, SupportOverflow

from conftest import oracle_left_inverse_matrix, oracle_shift_matrix


def oracle_coeffs(tree, weights, basis, f, order):
    """Dense-matrix route: stack basis-projections of L^n f."""
    lmat = oracle_left_inverse_matrix(tree, weights)
    bmat = basis.matrix.toarray()
    out = np.zeros((order + 1, basis.dim), dtype=np.complex128)
    cur = f.data.copy()
    for n in range(order + 1):
        out[n] = bmat @ cur
        cur = lmat @ cur
    return out


def test_coeffs_of_kernel_vector(t2_shift):
    S, basis = t2_shift
    for j in range(basis.dim):
        c = ts.analytic_coeffs(S, basis, basis.vector(j))
        expect = np.zeros_like(c.coords)
        expect[0, j] = 1.0
        assert np.linalg.norm(c.coords - expect) < 1e-13


def test_coeffs_match_closed_form_two_ray(t2_shift, t2):
    S, basis = t2_shift
    tree, _ = t2
    alpha = 0.5
    f = ts.L2Vector.basis(tree, (1, 2))
    c = ts.analytic_coeffs(S, basis, f)
    # closed form at n=1: no root component, pair component alpha/(alpha^2+1)
    # against the unnormalized difference vector
    assert abs(c.coords[1][0]) < 1e-15
    pair_coord = alpha / (alpha ** 2 + 1) * np.sqrt(alpha ** 2 + 1)
    assert abs(abs(c.coords[1][1]) - pair_coord) < 1e-14
    back = basis.from_coords(c.coords[1])
    assert back[(1, 1)] == pytest.approx(0.4 * alpha)
    assert back[(2, 1)] == pytest.approx(-0.4)


def test_coeffs_match_dense_oracle(t4_shift, t4_depth2, random_tree_batch):
    for (tree, weights), (S, basis) in [
        (t4_depth2, t4_shift),
    ] + [((t, w), (lambda s: (s, ts.separated_kernel_basis(s)))(ts.ShiftOperator(t, w)))
         for t, w in random_tree_batch[:2]]:
        rng = stable_rng(3, "coeffs-oracle")
        f = ts.L2Vector.random(tree, tree.depth, rng)
        got = ts.analytic_coeffs(S, basis, f)
        want = oracle_coeffs(tree, weights, basis, f, tree.depth)
        assert np.linalg.norm(got.coords - want) < 1e-11


def test_coeffs_vanish_beyond_support(t2_shift, t2):
    S, basis = t2_shift
    tree, _ = t2
    rng = stable_rng(4, "vanish")
    f = ts.L2Vector.random(tree, 5, rng)
    c = ts.analytic_coeffs(S, basis, f)
    assert np.linalg.norm(c.coords[6:]) == 0.0


def test_round_trip(t2_shift, chain_shift, t4_shift):
    for S, basis in (t2_shift, chain_shift, t4_shift):
        tree = S.tree
        rng = stable_rng(5, "round-trip")
        for _ in range(20):
            f = ts.L2Vector.random(tree, tree.depth, rng)
            c = ts.analytic_coeffs(S, basis, f)
            via_lstsq = ts.reconstruct(S, basis, c, tree.depth)
            via_layers = ts.expand_layers(S, basis, c)
            assert (via_lstsq - f).norm() < 1e-10
            assert (via_layers - f).norm() < 1e-10


def test_reconstruct_kernel_coefficient(t2_shift):
    S, basis = t2_shift
    coords = np.zeros((1, basis.dim), dtype=np.complex128)
    coords[0, 1] = 1.0
    g = ts.reconstruct(S, basis, ts.CoeffSeq(coords, 0), 2)
    assert (g - basis.vector(1)).norm() < 1e-12


def test_reconstruct_forward_check(t2_shift):
    # place a unit coefficient at n=1 on the root direction and verify forward
    S, basis = t2_shift
    coords = np.zeros((2, basis.dim), dtype=np.complex128)
    coords[1, 0] = 1.0
    g = ts.reconstruct(S, basis, ts.CoeffSeq(coords, 1), 3)
    c = ts.analytic_coeffs(S, basis, g)
    assert abs(c.coords[1][0] - 1.0) < 1e-12
    assert np.linalg.norm(c.coords - np.pad(coords, ((0, c.length - 2), (0, 0)))) < 1e-12


def test_reconstruct_inconsistent(t2_shift):
    S, basis = t2_shift
    # no vector supported at the root alone has a nonzero first coefficient
    coords = np.zeros((2, basis.dim), dtype=np.complex128)
    coords[1, 0] = 1.0
    with pytest.raises(Inconsistent):
        ts.reconstruct(S, basis, ts.CoeffSeq(coords, 1), 0)


def test_expand_layers_overflow(t2_shift):
    S, basis = t2_shift
    coords = np.zeros((S.tree.depth + 1, basis.dim), dtype=np.complex128)
    coords[S.tree.depth, 1] = 1.0  # generation 1 + depth > depth
    with pytest.raises(SupportOverflow):
        ts.expand_layers(S, basis, ts.CoeffSeq(coords, S.tree.depth))


def test_coefficient_convergence_surrogate(t2_shift, t2):
    # truncations of a fixed vector converge entrywise in coefficients
    S, basis = t2_shift
    tree, _ = t2
    rng = stable_rng(6, "tomek")
    f = ts.L2Vector.random(tree, tree.depth, rng)
    c_full = ts.analytic_coeffs(S, basis, f)
    errs = []
    for d in (4, 8, 12, 14):
        fk = ts.L2Vector.zero(tree)
        n = sum(len(g) for g in tree.generations[:d + 1])
        fk.data[:n] = f.data[:n]
        ck = ts.analytic_coeffs(S, basis, fk)
        errs.append(np.abs(ck.coords - c_full.coords).max())
    assert errs[-1] == 0.0
    assert all(a >= b for a, b in zip(errs, errs[1:]))


def test_kernel_matrix_origin(t2_shift):
    S, basis = t2_shift
    k = ts.kernel_matrix(S, basis, 0.0, 0.0, order=5, rho=2.0)
    assert np.linalg.norm(k.matrix - np.eye(basis.dim)) < 1e-14


def test_kernel_matrix_chain_geometric(chain_shift):
    # oracle: brute-force geometric series for the rank-one chain kernel
    S, basis = chain_shift
    z, lam = 0.4 + 0.1j, -0.2 + 0.3j
    order = 9
    k = ts.kernel_matrix(S, basis, z, lam, order=order, rho=1.0 - 1e-12)
    expected = sum((z * np.conj(lam)) ** n for n in range(order + 1))
    assert abs(k.matrix[0, 0] - expected) < 1e-13


def test_kernel_matrix_hermitian(t2_shift):
    S, basis = t2_shift
    rng = stable_rng(7, "herm")
    for _ in range(5):
        z = complex(*rng.uniform(-0.3, 0.3, 2))
        lam = complex(*rng.uniform(-0.3, 0.3, 2))
        a = ts.kernel_matrix(S, basis, z, lam, order=8, rho=2.0)
        b = ts.kernel_matrix(S, basis, lam, z, order=8, rho=2.0)
        assert np.linalg.norm(a.matrix - b.matrix.conj().T) < 1e-12


def test_kernel_matrix_outside_disc(t2_shift):
    S, basis = t2_shift
    with pytest.raises(OutsideDisc):
        ts.kernel_matrix(S, basis, 0.9, 0.0, order=4, rho=2.0)


def test_reproducing_property(t2_shift):
    # <f(lam), e> = <f, k(., lam) e> via the vertex-space pullback
    S, basis = t2_shift
    tree = S.tree
    rng = stable_rng(8, "reprod")
    lam = 0.21 - 0.13j
    order = tree.depth - 2
    for j in range(basis.dim):
        f = ts.L2Vector.random(tree, 6, rng)
        c = ts.analytic_coeffs(S, basis, f)
        f_at_lam = sum(c.coords[n] * lam ** n for n in range(c.length))
        lhs = complex(np.vdot(np.zeros(basis.dim), np.zeros(basis.dim)))
        lhs = complex((f_at_lam * 0).sum())
        e = np.zeros(basis.dim)
        e[j] = 1.0
        lhs = complex(f_at_lam @ e.conj())
        # right side: pair f with the truncated kernel section in vertex space
        w = basis.vector(j)
        acc = w.copy()
        cur = w
        for k in range(1, order + 1):
            cur = ts.apply_left_inverse_adjoint(S, cur)
            acc = acc + (np.conj(lam) ** k) * cur
        rhs = f.inner(acc)
        assert abs(lhs - rhs) < 1e-10


def test_eigenvector_residual_chain(chain_shift):
    S, basis = chain_shift
    for order in (10, 11):
        rep = ts.eigenvector_residual(S, basis, 0.5, 0, order=order, rho=1.0)
        assert rep.residual <= rep.tail_bound
        assert rep.residual <= 2.0 ** (-order)


def test_eigenvector_residual_two_ray(t2_shift):
    S, basis = t2_shift
    for j in range(basis.dim):
        rep = ts.eigenvector_residual(S, basis, 0.3, j, rho=2.0)
        assert rep.residual <= rep.tail_bound


def test_eigenvector_residual_zero(t2_shift):
    S, basis = t2_shift
    rep = ts.eigenvector_residual(S, basis, 0.0, 0, rho=2.0)
    assert rep.residual < 1e-14


def test_eigenvector_outside_disc(t2_shift):
    S, basis = t2_shift
    with pytest.raises(OutsideDisc):
        ts.eigenvector_residual(S, basis, 0.6, 0, rho=2.0)


def test_spectral_radius_examples(chain_shift, t2_shift):
    Sc, _ = chain_shift
    est = ts.spectral_radius_estimate(Sc)
    assert est.estimate == pytest.approx(1.0, abs=1e-9)
    S2, _ = t2_shift
    est2 = ts.spectral_radius_estimate(S2)
    assert est2.estimate >= 2.0 - 1e-9
    chain2, w2 = ts.generate_example("UNILATERAL", 12, [2.0] * 12)
    est3 = ts.spectral_radius_estimate(ts.ShiftOperator(chain2, w2))
    assert est3.estimate == pytest.approx(0.5, abs=1e-9)


def test_spectral_radius_against_dense_powers(t2, t2_shift):
    # oracle: exact operator norms of dense matrix powers
    tree, weights = t2
    S, _ = t2_shift
    lmat = oracle_left_inverse_matrix(tree, weights)
    est = ts.spectral_radius_estimate(S, iterations=6)
    cur = np.eye(tree.n_vertices, dtype=np.complex128)
    for n in range(1, 7):
        cur = lmat @ cur
        exact = np.linalg.svd(cur, compute_uv=False)[0]
        assert est.norms[n - 1] <= exact + 1e-9
        assert est.norms[n - 1] >= exact * (1 - 1e-6)


def test_coeffs_t4_depth3_sparse_oracle():
    # independent sparse-matrix route on the wide tree
    import scipy.sparse as sp

    tree, weights = ts.generate_example("T4", 3, [])
    S = ts.ShiftOperator(tree, weights)
    basis = ts.separated_kernel_basis(S)
    n = tree.n_vertices
    rows, cols, vals = [], [], []
    for u in tree.vertices:
        for v in tree.children[u]:
            rows.append(tree.index[v])
            cols.append(tree.index[u])
            vals.append(weights[v])
    smat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    gram_diag = np.asarray((smat.conj().T @ smat).diagonal()).real
    inv = np.zeros(n)
    inv[gram_diag > 0] = 1.0 / gram_diag[gram_diag > 0]
    lmat = sp.diags(inv) @ smat.conj().T
    rng = stable_rng(30, "t4-sparse")
    f = ts.L2Vector.random(tree, tree.depth, rng)
    got = ts.analytic_coeffs(S, basis, f)
    cur = f.data.copy()
    for m in range(tree.depth + 1):
        want = basis.matrix @ cur
        assert np.linalg.norm(got.coords[m] - want) < 1e-11
        cur = lmat @ cur


def test_eigenvector_residual_deep_chain_orders():
    tree, weights = ts.generate_example("UNILATERAL", 22, [1.0] * 22)
    S = ts.ShiftOperator(tree, weights)
    basis = ts.separated_kernel_basis(S)
    for order in (10, 20):
        rep = ts.eigenvector_residual(S, basis, 0.5, 0, order=order, rho=1.0)
        assert rep.residual <= rep.tail_bound
        assert rep.residual <= 2.0 ** (-order)


def test_coeffseq_round_trip_stays_in_kernel(t2_shift):
    S, basis = t2_shift
    rng = stable_rng(31, "kernel-stay")
    f = ts.L2Vector.random(S.tree, S.tree.depth, rng)
    c = ts.analytic_coeffs(S, basis, f)
    for n in range(c.length):
        vec = basis.from_coords(c.coords[n])
        assert ts.apply_adjoint(S, vec).norm() < 1e-12


def test_expand_layers_matches_reconstruct_on_synthetic(t2_shift):
    # consistent coefficients that are not a round trip of anything prepared
    S, basis = t2_shift
    rng = stable_rng(32, "synthetic")
    coords = np.zeros((5, basis.dim), dtype=np.complex128)
    coords[0] = rng.standard_normal(2)
    coords[2] = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    coords[4, 0] = -1.3j
    c = ts.CoeffSeq(coords, 4)
    via_layers = ts.expand_layers(S, basis, c)
    via_lstsq = ts.reconstruct(S, basis, c, support_depth=5)
    assert (via_layers - via_lstsq).norm() < 1e-11


def test_coeffseq_json_round_trip():
    rng = stable_rng(33, "cjson")
    c = ts.CoeffSeq(rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)), 2)
    back = ts.CoeffSeq.from_json(c.to_json())
    assert np.allclose(back.coords, c.coords)
    assert back.exact_to == 2


def test_reconstruct_underdetermined_warning(t2_shift):
    # a caller-supplied short system leaves deep layers free; the minimal-norm
    # point is returned with a warning
    S, basis = t2_shift
    from treeshift.errors import UnderdeterminedWarning

    system = ts.CoefficientSystem(S, basis, support_depth=3, order=1)
    assert system.rank < len(system.columns)
    coords = np.zeros((2, basis.dim), dtype=np.complex128)
    coords[0, 0] = 1.0
    coords[1, 1] = 0.5
    c = ts.CoeffSeq(coords, 1)
    with pytest.warns(UnderdeterminedWarning):
        g = ts.reconstruct(S, basis, c, 3, system=system)
    back = ts.analytic_coeffs(S, basis, g)
    assert np.linalg.norm(back.coords[:2] - coords) < 1e-11


def test_reproducing_property_random_points(t2_shift):
    S, basis = t2_shift
    tree = S.tree
    rng = stable_rng(34, "reprod-rand")
    order = tree.depth - 2
    for _ in range(6):
        lam = complex(*rng.uniform(-0.3, 0.3, 2))
        j = int(rng.integers(0, basis.dim))
        f = ts.L2Vector.random(tree, 6, rng)
        c = ts.analytic_coeffs(S, basis, f)
        f_at_lam = sum(c.coords[n] * lam ** n for n in range(c.length))
        e = np.zeros(basis.dim)
        e[j] = 1.0
        lhs = complex(f_at_lam @ e.conj())
        w = basis.vector(j)
        acc = w.copy()
        cur = w
        for k in range(1, order + 1):
            cur = ts.apply_left_inverse_adjoint(S, cur)
            acc = acc + (np.conj(lam) ** k) * cur
        assert abs(lhs - f.inner(acc)) < 1e-10
