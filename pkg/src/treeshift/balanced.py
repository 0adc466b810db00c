"""Balanced-shift structure: layer orthogonality, Wold layers, weighted H-infinity.

A shift is balanced when ||S e_u|| depends only on the generation of u.  Such
shifts decompose vectors into orthogonal layers S^n f_n with f_n in ker S*,
and their commutant reduces entrywise to convolution boundedness between
weighted sequence spaces, probed here by largest singular values of weighted
lower-triangular Toeplitz compressions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import dense_spectral_norm, fit_log_slope
from .errors import DimensionMismatch, NotBalanced, PreconditionFailed, WrongGeneration
from .model import analytic_coeffs
from .multiplier import (
    BOUNDED,
    DIVERGENT,
    MembershipReport,
    OpSymbol,
    ScalarSymbol,
    SLOPE_THRESHOLD,
    membership_diagnostic,
)
from .shift import (
    L2Vector,
    SeparatedBasis,
    ShiftOperator,
    apply_shift,
    is_balanced,
)
from .tree import VertexId


@dataclass
class BetaWeights:
    """Positive sequence of squared iterate norms defining a weighted l2 space."""

    beta: np.ndarray

    def __post_init__(self) -> None:
        self.beta = np.asarray(self.beta, dtype=np.float64)
        if self.beta.ndim != 1 or np.any(self.beta <= 0):
            raise DimensionMismatch("beta must be a positive 1-d sequence")

    @property
    def length(self) -> int:
        return int(self.beta.shape[0])


def beta_from_orbit(S: ShiftOperator, e: L2Vector, length: int | None = None) -> BetaWeights:
    """beta_n = ||S^n e||^2 along the orbit of a kernel vector (default: root)."""
    depth = S.tree.depth
    start = e.support_depth()
    max_len = depth - max(0, start) + 1
    if length is None:
        length = max_len
    if length > max_len:
        raise PreconditionFailed(f"orbit leaves the truncation after {max_len} terms")
    out = np.empty(length)
    cur = e
    for n in range(length):
        out[n] = cur.norm() ** 2
        if n + 1 < length:
            cur = apply_shift(S, cur)
    return BetaWeights(out)


def balanced_inner_product_check(S: ShiftOperator, f: L2Vector, g: L2Vector,
                                 n: int, u_prime: VertexId) -> float:
    """Residual of the balanced pairing identity for single-generation vectors.

    |<S^n f, S^n g> - prod_j ||S e_(par^j u')||^2 <f, g>| for u' in generation
    k + n, where f lives in generation k.
    """
    ok, witness = is_balanced(S)
    if not ok:
        raise NotBalanced(f"witness pair {witness}")
    tree = S.tree
    kf = _single_generation(f)
    kg = _single_generation(g)
    if tree.generation[u_prime] != kf + n:
        raise WrongGeneration(
            f"u' sits in generation {tree.generation[u_prime]}, expected {kf + n}")
    _single_generation(g)
    sf, sg = f, g
    for _ in range(n):
        sf = apply_shift(S, sf)
        sg = apply_shift(S, sg)
    prod = 1.0
    w = u_prime
    for _ in range(n):
        w = tree.parent[w]
        prod *= S.norm_squares[w]
    lhs = sf.inner(sg)
    rhs = prod * f.inner(g)
    return abs(lhs - rhs)


def _single_generation(f: L2Vector) -> int:
    gens = {f.tree.generation[v] for v in f.as_dict()}
    if len(gens) > 1:
        raise WrongGeneration(f"vector spreads over generations {sorted(gens)}")
    return gens.pop() if gens else 0


@dataclass
class WoldDecomposition:
    """Layer decomposition f = sum_n S^n f_n with kernel parts f_n."""

    parts: list[L2Vector]
    residual: float

    def layer_norms(self, S: ShiftOperator) -> list[float]:
        out = []
        for n, f_n in enumerate(self.parts):
            cur = f_n
            for _ in range(n):
                cur = apply_shift(S, cur)
            out.append(cur.norm())
        return out


def wold_decompose(S: ShiftOperator, basis: SeparatedBasis, f: L2Vector) -> WoldDecomposition:
    """Peel a vector into kernel layers; exact on balanced shifts.

    The parts are the model coefficients f_n = P_E L^n f; for balanced shifts
    the images S^n f_n are mutually orthogonal and Parseval holds.
    """
    ok, witness = is_balanced(S)
    if not ok:
        raise NotBalanced(f"witness pair {witness}")
    seq = analytic_coeffs(S, basis, f)
    parts = [basis.from_coords(seq.coords[n]) for n in range(seq.length)]
    recon = L2Vector.zero(S.tree)
    for n in range(len(parts) - 1, -1, -1):
        recon = apply_shift(S, recon) if n < len(parts) - 1 else recon
        recon = recon + parts[n]
    return WoldDecomposition(parts=parts, residual=(f - recon).norm())


def weighted_toeplitz_norm(a: np.ndarray, beta1: np.ndarray, beta2: np.ndarray,
                           trunc: int) -> float:
    """Largest singular value of the weighted lower-triangular convolution matrix.

    Entry (n, m) is a[n-m] sqrt(beta2[n]/beta1[m]) for n >= m, the compression
    of b -> a*b between the weighted coordinate charts.
    """
    t = trunc
    mat = np.zeros((t, t), dtype=np.complex128)
    for m in range(t):
        vals = np.zeros(t - m, dtype=np.complex128)
        upto = min(len(a), t - m)
        vals[:upto] = a[:upto]
        mat[m:, m] = vals * np.sqrt(beta2[m:t] / beta1[m])
    return dense_spectral_norm(mat)


def hinf_membership(a: ScalarSymbol | np.ndarray, beta1: BetaWeights, beta2: BetaWeights,
                    trunc: int, *, truncs: list[int] | None = None,
                    xs: list[float] | None = None,
                    slope_threshold: float = SLOPE_THRESHOLD) -> MembershipReport:
    """Growth diagnostic for the convolution map between weighted l2 spaces.

    Norm of b -> a*b from the beta1-space to the beta2-space at doubling
    truncations up to trunc; the slope defaults to a fit against log2 of the
    truncation (one unit per doubling, matching the per-depth calibration).
    Explicit truncation lists and x-coordinates support aligned comparisons.
    """
    coeffs = a.coeffs if isinstance(a, ScalarSymbol) else np.asarray(a, dtype=np.complex128)
    if truncs is None:
        # compressions below 16 coefficients barely see the symbol and their
        # startup ramp would pollute the slope; the threshold is calibrated
        # for grids reaching at least 12
        truncs = []
        t = min(16, trunc)
        while t < trunc:
            truncs.append(t)
            t *= 2
        truncs.append(trunc)
    if max(truncs) > min(beta1.length, beta2.length):
        raise PreconditionFailed(
            f"beta sequences shorter than truncation {max(truncs)}")
    if xs is None:
        xs = [float(np.log2(t)) for t in truncs]
    norms = [weighted_toeplitz_norm(coeffs, beta1.beta, beta2.beta, t) for t in truncs]
    slope = fit_log_slope(xs, norms)
    verdict = DIVERGENT if slope > slope_threshold else BOUNDED
    return MembershipReport(
        depths=[int(round(x)) for x in xs], norms=norms, slope=slope,
        verdict=verdict, threshold=slope_threshold, low_confidence=len(truncs) < 4)


@dataclass
class RatioBoundsReport:
    """Iterate-norm ratios between kernel directions against the weight bounds."""

    ok: bool
    max_ratio_excess: float
    pairs_checked: int
    bound_base: float


def ratio_bounds_check(S: ShiftOperator, basis: SeparatedBasis) -> RatioBoundsReport:
    """Check ||S^n e'_i|| / ||S^n e'_j|| within (norm/c)^{|k_i - k_j|} bands."""
    ok, witness = is_balanced(S)
    if not ok:
        raise NotBalanced(f"witness pair {witness}")
    if S.lower_bound <= 0:
        raise PreconditionFailed("shift is not bounded below")
    tree = S.tree
    base = S.norm_upper / S.lower_bound
    norms: list[list[float]] = []
    gens = basis.gen_index
    for j in range(basis.dim):
        cur = basis.vector(j)
        steps = tree.depth - int(gens[j])
        seq = [cur.norm()]
        for _ in range(steps):
            cur = apply_shift(S, cur)
            seq.append(cur.norm())
        norms.append(seq)
    worst = 0.0
    pairs = 0
    classes: dict[int, list[int]] = {}
    for j, k in enumerate(gens):
        classes.setdefault(int(k), []).append(j)
    ks = sorted(classes)
    for ki in ks:
        for kj in ks:
            span = abs(ki - kj)
            hi = base ** span
            lo = (1.0 / base) ** span
            for n in range(0, tree.depth - max(ki, kj) + 1):
                vi = [norms[j][n] for j in classes[ki]]
                vj = [norms[j][n] for j in classes[kj]]
                rmax = max(vi) / min(vj)
                rmin = min(vi) / max(vj)
                pairs += 1
                worst = max(worst, rmax / hi - 1.0, lo / rmin - 1.0 if rmin > 0 else 0.0)
    return RatioBoundsReport(ok=worst <= 1e-10, max_ratio_excess=worst,
                             pairs_checked=pairs, bound_base=base)


@dataclass
class KomReport:
    """Cross-validation of the two commutant-membership verdicts."""

    multiplication_side: MembershipReport
    entry_side: dict[tuple[int, int], MembershipReport] = field(default_factory=dict)
    agree: bool = True
    low_confidence: bool = False


def kom_characterization_check(S: ShiftOperator, basis: SeparatedBasis,
                               phi: ScalarSymbol | OpSymbol, trunc: int, *,
                               slope_threshold: float = SLOPE_THRESHOLD,
                               seed: int = 0) -> KomReport:
    """Compare the multiplication-map growth verdict with entrywise convolution growth.

    Side A is the compressed multiplication diagnostic on the tree; side B
    runs the weighted Toeplitz diagnostic on every entry sequence
    <phi(n) e'_j, e'_i> against beta_n = ||S^n root||^2.  Scalar-diagonal
    symbols collapse side B to one sequence.  Verdicts agree when side A
    detects divergence exactly if some entry on side B does.
    """
    ok, witness = is_balanced(S)
    if not ok:
        raise NotBalanced(f"witness pair {witness}")
    tree = S.tree
    if trunc > tree.depth + 1:
        raise PreconditionFailed(
            f"truncation {trunc} exceeds computable orbit length {tree.depth + 1}")
    beta = beta_from_orbit(S, L2Vector.basis(tree, tree.root), trunc)
    depths_a = list(range(1, min(tree.depth, trunc - 1) + 1))
    side_a = membership_diagnostic(S, basis, phi, max(depths_a), depths=depths_a,
                                   slope_threshold=slope_threshold, seed=seed)
    # side B probes the same scale: truncation d+1 against x-coordinate d
    truncs_b = [d + 1 for d in depths_a]
    xs_b = [float(d) for d in depths_a]
    entries: dict[tuple[int, int], MembershipReport] = {}
    if isinstance(phi, ScalarSymbol) or (isinstance(phi, OpSymbol) and phi.is_scalar_diagonal()):
        seq = phi if isinstance(phi, ScalarSymbol) else phi.scalar_part()
        entries[(0, 0)] = hinf_membership(seq, beta, beta, trunc, truncs=truncs_b,
                                          xs=xs_b, slope_threshold=slope_threshold)
    else:
        if basis.dim > 128:
            raise PreconditionFailed(
                f"entrywise check over {basis.dim}^2 sequences is not desk scale")
        for i in range(basis.dim):
            for j in range(basis.dim):
                seq_ij = phi.mats[:, i, j]
                if not np.any(seq_ij):
                    continue
                entries[(i, j)] = hinf_membership(
                    ScalarSymbol(seq_ij), beta, beta, trunc, truncs=truncs_b,
                    xs=xs_b, slope_threshold=slope_threshold)
    any_divergent = any(rep.verdict == DIVERGENT for rep in entries.values())
    agree = (side_a.verdict == DIVERGENT) == any_divergent
    low_conf = side_a.low_confidence or any(r.low_confidence for r in entries.values())
    return KomReport(multiplication_side=side_a, entry_side=entries,
                     agree=agree, low_confidence=low_conf)
