"""Scalar and operator-valued multiplier symbols with Cauchy-type convolution.

A scalar symbol acts on vertex space through weighted ancestor sums; an
operator symbol is a sequence of matrices on ker S* acting on model
coefficients through convolution.  Commutant symbols are extracted by
compressing powers of the left inverse, and membership in the multiplier
algebra is probed at desk scale by the growth of compressed operator norms
across support depths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._util import dense_spectral_norm, fit_log_slope, power_norm, stable_rng
from .errors import DimensionMismatch, NotInCommutant, PreconditionFailed
from .model import CoeffSeq, analytic_coeffs, expand_layers
from .shift import (
    L2Vector,
    SeparatedBasis,
    ShiftOperator,
    apply_adjoint,
)
from .tree import VertexId, lambda_product

BOUNDED = "BoundedSoFar"
DIVERGENT = "DivergenceDetected"
SLOPE_THRESHOLD = 0.02


@dataclass
class ScalarSymbol:
    """Finite complex coefficient sequence, zero-extended beyond its length."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise DimensionMismatch("scalar symbol needs a nonempty 1-d coefficient list")

    @property
    def length(self) -> int:
        return int(self.coeffs.shape[0])

    def to_json(self) -> str:
        return json.dumps(
            {"coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]})

    @classmethod
    def from_json(cls, text: str) -> "ScalarSymbol":
        raw = json.loads(text)
        return cls(np.array([complex(re, im) for re, im in raw["coeffs"]]))


@dataclass
class OpSymbol:
    """Sequence of dim(E) x dim(E) matrices in separated-basis coordinates."""

    mats: np.ndarray
    exact_to: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        self.mats = np.asarray(self.mats, dtype=np.complex128)
        if self.mats.ndim != 3 or self.mats.shape[1] != self.mats.shape[2]:
            raise DimensionMismatch("operator symbol needs shape (length, d, d)")

    @property
    def length(self) -> int:
        return int(self.mats.shape[0])

    @property
    def dim(self) -> int:
        return int(self.mats.shape[1])

    @classmethod
    def from_scalar(cls, scalar: ScalarSymbol, dim: int) -> "OpSymbol":
        eye = np.eye(dim, dtype=np.complex128)
        return cls(np.stack([c * eye for c in scalar.coeffs]))

    def is_scalar_diagonal(self, tol: float = 1e-12) -> bool:
        eye = np.eye(self.dim)
        for m in self.mats:
            if np.linalg.norm(m - m[0, 0] * eye) > tol * max(1.0, abs(m[0, 0])):
                return False
        return True

    def scalar_part(self) -> ScalarSymbol:
        if not self.is_scalar_diagonal():
            raise DimensionMismatch("symbol is not scalar-diagonal")
        return ScalarSymbol(self.mats[:, 0, 0].copy())

    def to_json(self) -> str:
        mats = [[[ [float(x.real), float(x.imag)] for x in row] for row in m]
                for m in self.mats]
        return json.dumps({"dim": self.dim, "mats": mats})

    @classmethod
    def from_json(cls, text: str) -> "OpSymbol":
        raw = json.loads(text)
        mats = np.array([[[complex(re, im) for re, im in row] for row in m]
                         for m in raw["mats"]])
        if mats.shape[1] != raw["dim"]:
            raise DimensionMismatch("dim field disagrees with matrix shape")
        return cls(mats)


def unit_symbol(dim: int) -> OpSymbol:
    """The convolution unit: identity at index 0."""
    return OpSymbol(np.eye(dim, dtype=np.complex128)[None, :, :])


def indicator_symbol(n: int, dim: int, mat: np.ndarray | None = None) -> OpSymbol:
    """Symbol supported at the single index n, with value mat (default identity)."""
    mats = np.zeros((n + 1, dim, dim), dtype=np.complex128)
    mats[n] = np.eye(dim) if mat is None else np.asarray(mat, dtype=np.complex128)
    return OpSymbol(mats)


def convolve(a: ScalarSymbol | OpSymbol, b: ScalarSymbol | OpSymbol) -> ScalarSymbol | OpSymbol:
    """Cauchy product (a*b)(k) = sum_{j<=k} a(j) b(k-j), full polynomial length.

    Finite symbols are zero-extensions of infinite sequences, so the product
    has length len(a)+len(b)-1 and the unit law holds exactly.
    """
    if isinstance(a, ScalarSymbol) and isinstance(b, ScalarSymbol):
        return ScalarSymbol(np.convolve(a.coeffs, b.coeffs))
    if isinstance(a, ScalarSymbol):
        assert isinstance(b, OpSymbol)
        out = np.zeros((a.length + b.length - 1, b.dim, b.dim), dtype=np.complex128)
        for j, c in enumerate(a.coeffs):
            out[j:j + b.length] += c * b.mats
        return OpSymbol(out)
    if isinstance(b, ScalarSymbol):
        return convolve(b, a)
    if a.dim != b.dim:
        raise DimensionMismatch(f"symbol dimensions {a.dim} and {b.dim} differ")
    out = np.zeros((a.length + b.length - 1, a.dim, a.dim), dtype=np.complex128)
    for j in range(a.length):
        for k in range(b.length):
            out[j + k] += a.mats[j] @ b.mats[k]
    return OpSymbol(out)


def convolve_with_coeffs(phi: ScalarSymbol | OpSymbol, c: CoeffSeq) -> CoeffSeq:
    """(phi * c)(n) = sum_{k<=n} phi(k) c(n-k), out to full length."""
    if isinstance(phi, OpSymbol) and phi.dim != c.dim:
        raise DimensionMismatch(f"symbol dim {phi.dim} vs coefficient dim {c.dim}")
    length = phi.length + c.length - 1
    out = np.zeros((length, c.dim), dtype=np.complex128)
    if isinstance(phi, ScalarSymbol):
        for k, a in enumerate(phi.coeffs):
            out[k:k + c.length] += a * c.coords
    else:
        for k in range(phi.length):
            out[k:k + c.length] += c.coords @ phi.mats[k].T
    return CoeffSeq(coords=out, exact_to=min(length - 1, c.exact_to + phi.length - 1))


def generation_raise(tree, A: np.ndarray, tol: float = 0.0) -> int:
    """Largest generation increase the matrix A can produce, from its sparsity."""
    gens = np.array([tree.generation[v] for v in tree.vertices])
    rows, cols = np.nonzero(np.abs(A) > tol)
    if rows.size == 0:
        return 0
    return int(np.max(gens[rows] - gens[cols]))


def extract_symbol(S: ShiftOperator, basis: SeparatedBasis, A: np.ndarray,
                   order: int | None = None) -> OpSymbol:
    """Commutant symbol of a dense operator: phi(m) = P_E L^m A restricted to E.

    Entries are exact for m up to depth minus the largest kernel generation
    the matrix can reach; exact_to records the global bound
    depth - max kernel generation - generation raise of A.
    """
    tree = S.tree
    if order is None:
        order = tree.depth
    d = basis.dim
    mats = np.zeros((order + 1, d, d), dtype=np.complex128)
    for j in range(d):
        col = L2Vector(tree, A @ basis.vector(j).data)
        seq = analytic_coeffs(S, basis, col, order)
        mats[:, :, j] = seq.coords
    exact = tree.depth - basis.max_generation - generation_raise(tree, A)
    return OpSymbol(mats, exact_to=max(-1, exact))


@dataclass
class VerificationReport:
    """Outcome of a randomized identity check."""

    name: str
    max_residual: float
    trials: int
    exactness_depth: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.details.get("passed", True))


def commutant_check(S: ShiftOperator, basis: SeparatedBasis, A: np.ndarray,
                    trials: int = 20, *, seed: int = 0,
                    commute_tol: float = 1e-10) -> VerificationReport:
    """Verify that the action of a commuting operator is convolution by its symbol.

    For random f, compares P_E L^n (A f) with the convolution of the extracted
    symbol against the coefficients of f, for all n up to the tree depth.
    Rejects operators whose commutator with the shift exceeds tolerance.
    """
    from .shift import shift_matrix

    tree = S.tree
    Smat = shift_matrix(S)
    comm = A @ Smat - Smat @ A
    if tree.n_vertices <= 700:
        comm_norm = dense_spectral_norm(comm)
    else:
        comm_norm = power_norm(lambda x: comm @ x, lambda y: comm.conj().T @ y,
                               tree.n_vertices, seed=seed, label="commutator")
    if comm_norm > commute_tol:
        raise NotInCommutant(f"||AS - SA|| = {comm_norm:.3e} > {commute_tol:g}")

    r_A = generation_raise(tree, A)
    f_depth = tree.depth - 1 - r_A
    if f_depth < 0:
        raise PreconditionFailed(
            f"operator raises generations by {r_A}; no room below depth {tree.depth}")
    phi = extract_symbol(S, basis, A)
    worst = 0.0
    for t in range(trials):
        f = L2Vector.random(tree, f_depth, stable_rng(seed, f"commutant-{t}"))
        lhs = analytic_coeffs(S, basis, L2Vector(tree, A @ f.data))
        rhs = convolve_with_coeffs(phi, analytic_coeffs(S, basis, f))
        upto = lhs.length
        worst = max(worst, float(np.linalg.norm(lhs.coords - rhs.coords[:upto])))
    return VerificationReport(
        name="commutant-convolution", max_residual=worst, trials=trials,
        exactness_depth=f_depth, details={"commutator_norm": comm_norm})


@dataclass
class MembershipReport:
    """Growth diagnostic for a symbol: compressed norms across support depths.

    The verdict is a slope rule, not a boundedness proof; low_confidence marks
    grids too short for the slope calibration to be meaningful.  The threshold
    used for the verdict travels with the report.
    """

    depths: list[int]
    norms: list[float]
    slope: float
    verdict: str
    threshold: float = SLOPE_THRESHOLD
    low_confidence: bool = False
    dropped_mass: float = 0.0


def _compressed_map_columns(S: ShiftOperator, basis: SeparatedBasis,
                            phi: ScalarSymbol | OpSymbol, d: int) -> tuple[np.ndarray, float, list[VertexId]]:
    """Matrix of f -> expansion of phi * coeffs(f) over unit vectors in V_{<=d}.

    Coefficient components that would leave the truncation are dropped; the
    total dropped mass is returned for the report.
    """
    tree = S.tree
    cols = [v for v in tree.vertices if tree.generation[v] <= d]
    out = np.zeros((tree.n_vertices, len(cols)), dtype=np.complex128)
    dropped = 0.0
    gen = basis.gen_index
    for ci, v in enumerate(cols):
        c = analytic_coeffs(S, basis, L2Vector.basis(tree, v), order=tree.generation[v])
        conv = convolve_with_coeffs(phi, c)
        coords = conv.coords
        for n in range(coords.shape[0]):
            over = gen + n > tree.depth
            if np.any(over):
                dropped += float(np.linalg.norm(coords[n][over]))
                coords[n][over] = 0.0
        g = expand_layers(S, basis, CoeffSeq(coords=coords, exact_to=conv.exact_to))
        out[:, ci] = g.data
    return out, dropped, cols


def _apply_symbol_map(S: ShiftOperator, basis: SeparatedBasis,
                      phi: ScalarSymbol | OpSymbol, d: int,
                      x: np.ndarray) -> tuple[np.ndarray, float]:
    """Forward map of _compressed_map_columns on one coefficient vector over V_{<=d}."""
    tree = S.tree
    f = L2Vector.zero(tree)
    n_in = sum(len(g) for g in tree.generations[:d + 1])
    f.data[:n_in] = x
    c = analytic_coeffs(S, basis, f, order=d)
    conv = convolve_with_coeffs(phi, c)
    coords = conv.coords
    gen = basis.gen_index
    dropped = 0.0
    for n in range(coords.shape[0]):
        over = gen + n > tree.depth
        if np.any(over):
            dropped += float(np.linalg.norm(coords[n][over]))
            coords[n][over] = 0.0
    g = expand_layers(S, basis, CoeffSeq(coords=coords, exact_to=conv.exact_to))
    return g.data, dropped


def _apply_symbol_map_adjoint(S: ShiftOperator, basis: SeparatedBasis,
                              phi: ScalarSymbol | OpSymbol, d: int,
                              z: np.ndarray) -> np.ndarray:
    """Adjoint of _apply_symbol_map, back to coefficients over V_{<=d}."""
    from .shift import apply_left_inverse_adjoint_truncating

    tree = S.tree
    length = phi.length + d
    gen = basis.gen_index
    v = L2Vector(tree, z.astype(np.complex128))
    ys = []
    for _ in range(length):
        ys.append(basis.coords(v))
        v = apply_adjoint(S, v)
    cprime = np.zeros((d + 1, basis.dim), dtype=np.complex128)
    for n in range(d + 1):
        for m in range(n, length):
            k = m - n
            if k >= phi.length:
                continue
            y = ys[m].copy()
            over = gen + m > tree.depth
            y[over] = 0.0
            if isinstance(phi, ScalarSymbol):
                cprime[n] += np.conj(phi.coeffs[k]) * y
            else:
                cprime[n] += phi.mats[k].conj().T @ y
    out = L2Vector.zero(tree)
    for n in range(d, -1, -1):
        if n < d:
            out = apply_left_inverse_adjoint_truncating(S, out)
        out = out + basis.from_coords(cprime[n])
    n_in = sum(len(g) for g in tree.generations[:d + 1])
    return out.data[:n_in]


def compressed_multiplication_norm(S: ShiftOperator, basis: SeparatedBasis,
                                   phi: ScalarSymbol | OpSymbol, d: int, *,
                                   seed: int = 0) -> tuple[float, float]:
    """Operator norm of the compressed multiplication map on V_{<=d}.

    Dense SVD when the map fits comfortably in memory, randomized power
    iteration on the implicit map otherwise.  Returns (norm, dropped mass).
    """
    tree = S.tree
    n_in = sum(len(g) for g in tree.generations[:d + 1])
    if tree.n_vertices * n_in <= 400_000:
        mat, dropped, _ = _compressed_map_columns(S, basis, phi, d)
        return dense_spectral_norm(mat), dropped
    _, dropped = _apply_symbol_map(S, basis, phi, d,
                                   np.ones(n_in, dtype=np.complex128))
    norm = power_norm(
        lambda x: _apply_symbol_map(S, basis, phi, d, x)[0],
        lambda z: _apply_symbol_map_adjoint(S, basis, phi, d, z),
        n_in, iters=150, seed=seed, label=f"compressed-norm-{d}")
    return norm, dropped


def membership_diagnostic(S: ShiftOperator, basis: SeparatedBasis,
                          phi: ScalarSymbol | OpSymbol, max_depth: int, *,
                          slope_threshold: float = SLOPE_THRESHOLD,
                          depths: list[int] | None = None,
                          seed: int = 0) -> MembershipReport:
    """Estimate compressed multiplication norms on V_{<=d} for d up to max_depth.

    Divergence is flagged when the least-squares slope of log-norm against
    depth exceeds the threshold.  Grids shorter than eight depths are marked
    low confidence: the threshold is calibrated for depth ranges reaching 12.
    """
    if max_depth > S.tree.depth:
        raise PreconditionFailed(f"max_depth {max_depth} exceeds tree depth {S.tree.depth}")
    if depths is None:
        depths = list(range(1, max_depth + 1))
    norms: list[float] = []
    dropped_total = 0.0
    for d in depths:
        norm, dropped = compressed_multiplication_norm(S, basis, phi, d, seed=seed)
        dropped_total += dropped
        norms.append(norm)
    slope = fit_log_slope(depths, norms)
    verdict = DIVERGENT if slope > slope_threshold else BOUNDED
    return MembershipReport(
        depths=list(depths), norms=norms, slope=slope, verdict=verdict,
        threshold=slope_threshold, low_confidence=len(depths) < 8,
        dropped_mass=dropped_total)


def product_law_check(S: ShiftOperator, basis: SeparatedBasis,
                      phi: ScalarSymbol | OpSymbol, psi: ScalarSymbol | OpSymbol,
                      trials: int = 20, *, seed: int = 0,
                      diagnostic_depth: int | None = None) -> VerificationReport:
    """Associativity of convolution against coefficients: phi*(psi*c) = (phi*psi)*c.

    Membership diagnostics of both factors at the working depth are recorded
    alongside the residual; they do not gate the check.
    """
    tree = S.tree
    if diagnostic_depth is None:
        diagnostic_depth = min(tree.depth, 8)
    verdicts = {}
    for label, sym in (("phi", phi), ("psi", psi)):
        rep = membership_diagnostic(S, basis, sym, diagnostic_depth, seed=seed)
        verdicts[label] = rep.verdict
    both = convolve(phi, psi)
    worst = 0.0
    for t in range(trials):
        f = L2Vector.random(tree, tree.depth, stable_rng(seed, f"product-law-{t}"))
        c = analytic_coeffs(S, basis, f)
        one = convolve_with_coeffs(phi, convolve_with_coeffs(psi, c))
        two = convolve_with_coeffs(both, c)
        worst = max(worst, float(np.linalg.norm(one.coords - two.coords)))
    return VerificationReport(
        name="product-law", max_residual=worst, trials=trials,
        exactness_depth=tree.depth, details=verdicts)


def scalar_mult_apply(S: ShiftOperator, weights, phi: ScalarSymbol,
                      f: L2Vector) -> L2Vector:
    """Weighted ancestor sum: (M f)(v) = sum_k lambda(par^k v | v) phi(k) f(par^k v)."""
    tree = S.tree
    out = L2Vector.zero(tree)
    coeffs = phi.coeffs
    for v in tree.vertices:
        total = 0.0 + 0.0j
        prod = 1.0
        w = v
        for k in range(min(tree.generation[v], phi.length - 1) + 1):
            fval = f.data[tree.index[w]]
            if fval != 0 and coeffs[k] != 0:
                total += prod * coeffs[k] * fval
            if w != tree.root:
                prod *= weights[w]
                w = tree.parent[w]
        out.data[tree.index[v]] = total
    return out


def scalar_mult_adjoint(S: ShiftOperator, weights, phi: ScalarSymbol,
                        f: L2Vector) -> L2Vector:
    """Adjoint of the scalar multiplication: mass flows from descendants to ancestors."""
    tree = S.tree
    out = L2Vector.zero(tree)
    coeffs = np.conj(phi.coeffs)
    for w in tree.vertices:
        fval = f.data[tree.index[w]]
        if fval == 0:
            continue
        prod = 1.0
        t = w
        for k in range(min(tree.generation[w], phi.length - 1) + 1):
            if coeffs[k] != 0:
                out.data[tree.index[t]] += prod * coeffs[k] * fval
            if t != tree.root:
                prod *= weights[t]
                t = tree.parent[t]
    return out


def scalar_equivalence_check(S: ShiftOperator, basis: SeparatedBasis,
                             phi: ScalarSymbol, trials: int = 20, *,
                             seed: int = 0) -> VerificationReport:
    """Scalar multiplication agrees with the coefficient route phi*I.

    Both paths are applied to random vectors with enough headroom that the
    image stays inside the truncation.
    """
    from .model import reconstruct

    tree = S.tree
    margin = (phi.length - 1) + basis.max_generation
    f_depth = tree.depth - margin
    if f_depth < 0:
        raise PreconditionFailed(f"symbol too long for depth {tree.depth}")
    worst = 0.0
    for t in range(trials):
        f = L2Vector.random(tree, f_depth, stable_rng(seed, f"scalar-equiv-{t}"))
        direct = scalar_mult_apply(S, S.weights, phi, f)
        conv = convolve_with_coeffs(phi, analytic_coeffs(S, basis, f, order=f_depth))
        via_model = reconstruct(S, basis, conv,
                                support_depth=f_depth + phi.length - 1 + basis.max_generation)
        worst = max(worst, (direct - via_model).norm())
    return VerificationReport(
        name="scalar-equivalence", max_residual=worst, trials=trials,
        exactness_depth=f_depth)


# -- two-ray example helpers -------------------------------------------------

def two_ray_symbol(basis: SeparatedBasis, alpha: float,
                   blocks: list[np.ndarray]) -> OpSymbol:
    """Operator symbol on the two-ray tree from 2x2 blocks in the raw pair basis.

    Each block acts on (root indicator, alpha e_(1,1) - e_(2,1)); entries are
    converted to the orthonormal separated-basis coordinates, so the sign and
    normalization conventions of the computed basis are respected.
    """
    if basis.dim != 2:
        raise DimensionMismatch("two-ray symbol needs a 2-dimensional kernel")
    tree = basis.tree
    v0 = L2Vector.basis(tree, (0, 0))
    v1 = L2Vector.from_dict(tree, {(1, 1): alpha, (2, 1): -1.0})
    raw = np.stack([v0.data, v1.data], axis=1)
    raw_coords = basis.matrix @ raw          # columns: raw vectors in e' coords
    inv = np.linalg.inv(raw_coords)
    mats = []
    for B in blocks:
        mats.append(raw_coords @ np.asarray(B, dtype=np.complex128) @ inv)
    return OpSymbol(np.stack(mats))


def two_ray_admissible_symbol(basis: SeparatedBasis, alpha: float,
                              a0: complex, d0: complex,
                              a1: complex, d1: complex) -> OpSymbol:
    """The bounded two-term family on the two-ray tree.

    In the raw pair basis the blocks are
        B0 = [[a0, 0], [(d1-a1)/alpha, d0]],   B1 = [[a1, (a0-d0)alpha], [0, d1]].
    """
    B0 = np.array([[a0, 0.0], [(d1 - a1) / alpha, d0]])
    B1 = np.array([[a1, (a0 - d0) * alpha], [0.0, d1]])
    return two_ray_symbol(basis, alpha, [B0, B1])


def two_ray_divergence_witness(tree, alpha: float, max_generation: int,
                               stride: int = 3) -> L2Vector:
    """Probe vector concentrated on the second ray: f(2, m) = alpha^m on multiples
    of stride.  Under a constant symbol with unequal diagonal, its image gains
    equal mass on the first ray at every probed generation.
    """
    entries = {}
    m = stride
    while m <= max_generation:
        entries[(2, m)] = alpha ** m
        m += stride
    return L2Vector.from_dict(tree, entries)
