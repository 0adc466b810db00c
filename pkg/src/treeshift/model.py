"""Analytic model of the shift: coefficient extraction, reconstruction, kernels.

A vector f maps to the coefficient sequence n -> P_E L^n f, written in the
separated-basis coordinates of E = ker S*.  The model inner product is always
the pullback of the vertex-space inner product through reconstruction, never
a series formula.  Reconstruction solves the stacked linear system with a
minimal-norm least-squares solve; the exact layer expansion sum_n S^n c(n) is
available separately and agrees on consistent inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._util import stable_rng
from .errors import Inconsistent, NotLeftInvertible, OutsideDisc, SupportOverflow, UnderdeterminedWarning
from .shift import (
    L2Vector,
    SeparatedBasis,
    ShiftOperator,
    apply_adjoint,
    apply_left_inverse,
    apply_left_inverse_adjoint,
    apply_left_inverse_adjoint_truncating,
    apply_shift,
)

RECONSTRUCT_TOL = 1e-8


@dataclass
class CoeffSeq:
    """Coefficient sequence of the analytic model, in separated-basis coordinates.

    coords[n] holds the coordinates of the n-th coefficient; exact_to is the
    largest index known to be exact given the provenance of the sequence.
    """

    coords: np.ndarray
    exact_to: int

    @property
    def length(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def coefficient(self, n: int) -> np.ndarray:
        if n >= self.length:
            return np.zeros(self.dim, dtype=np.complex128)
        return self.coords[n]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def to_json(self) -> str:
        import json

        coords = [[[float(x.real), float(x.imag)] for x in row] for row in self.coords]
        return json.dumps({"exact_to": self.exact_to, "coords": coords})

    @classmethod
    def from_json(cls, text: str) -> "CoeffSeq":
        import json

        raw = json.loads(text)
        coords = np.array([[complex(re, im) for re, im in row]
                           for row in raw["coords"]], dtype=np.complex128)
        return cls(coords=coords, exact_to=int(raw["exact_to"]))


def analytic_coeffs(S: ShiftOperator, basis: SeparatedBasis, f: L2Vector,
                    order: int | None = None) -> CoeffSeq:
    """Coefficients n -> P_E L^n f for n = 0..order (default: the tree depth).

    Exact for every n: powers of the left inverse only consume generations
    already stored in the truncation.
    """
    if order is None:
        order = S.tree.depth
    coords = np.zeros((order + 1, basis.dim), dtype=np.complex128)
    g = f
    for n in range(order + 1):
        coords[n] = basis.coords(g)
        if n < order:
            g = apply_left_inverse(S, g)
    return CoeffSeq(coords=coords, exact_to=order)


def expand_layers(S: ShiftOperator, basis: SeparatedBasis, c: CoeffSeq) -> L2Vector:
    """Evaluate sum_n S^n c(n) by a Horner walk down the generations.

    This inverts analytic_coeffs exactly on the truncation.  Raises
    SupportOverflow when a nonzero coefficient would leave the stored depth.
    """
    depth = S.tree.depth
    gen = basis.gen_index
    for n in range(c.length):
        bad = np.nonzero(c.coords[n])[0]
        if bad.size and int(gen[bad].max()) + n > depth:
            raise SupportOverflow(
                f"coefficient {n} needs generation {int(gen[bad].max()) + n} > depth {depth}")
    acc = L2Vector.zero(S.tree)
    for n in range(c.length - 1, -1, -1):
        acc = apply_shift(S, acc) if n < c.length - 1 else acc
        acc = acc + basis.from_coords(c.coords[n])
    return acc


class CoefficientSystem:
    """Stacked linear map f -> (P_E L^n f)_n on vectors supported in V_{<=d}.

    Precomputes an SVD so many right-hand sides can be solved with one
    factorisation; solutions are minimal-norm.
    """

    def __init__(self, S: ShiftOperator, basis: SeparatedBasis, support_depth: int,
                 order: int, rcond: float = 1e-12) -> None:
        tree = S.tree
        self.S = S
        self.basis = basis
        self.support_depth = min(support_depth, tree.depth)
        self.order = order
        self.columns = [v for v in tree.vertices
                        if tree.generation[v] <= self.support_depth]
        ncols = len(self.columns)
        nrows = (order + 1) * basis.dim
        A = np.zeros((nrows, ncols), dtype=np.complex128)
        for ci, v in enumerate(self.columns):
            seq = analytic_coeffs(S, basis, L2Vector.basis(tree, v), order)
            A[:, ci] = seq.coords.ravel()
        self.matrix = A
        u, s, vh = np.linalg.svd(A, full_matrices=False)
        cutoff = rcond * (s[0] if s.size else 0.0)
        self.rank = int(np.sum(s > cutoff))
        self._u, self._s, self._vh = u, s, vh

    def solve(self, stacked: np.ndarray) -> tuple[np.ndarray, float]:
        """Minimal-norm least-squares solution and its residual norm."""
        proj = self._u.conj().T @ stacked
        scaled = np.zeros_like(proj)
        scaled[:self.rank] = proj[:self.rank] / self._s[:self.rank]
        x = self._vh.conj().T @ scaled
        residual = float(np.linalg.norm(self.matrix @ x - stacked))
        return x, residual

    def to_vector(self, x: np.ndarray) -> L2Vector:
        out = L2Vector.zero(self.S.tree)
        for ci, v in enumerate(self.columns):
            out.data[self.S.tree.index[v]] = x[ci]
        return out


def reconstruct(S: ShiftOperator, basis: SeparatedBasis, c: CoeffSeq,
                support_depth: int, *, system: CoefficientSystem | None = None) -> L2Vector:
    """Recover g with P_E L^n g = c(n) for all n, supported in V_{<=support_depth}.

    Returns the minimal-norm least-squares solution.  Raises Inconsistent when
    the residual exceeds tolerance; warns (and still returns the minimal-norm
    point) if the system has null directions within the support bound.

    Coefficient sequences are zero-extensions, so the system is always built
    out to the support depth; that makes the coefficient map injective and the
    solution unique whenever the data is consistent.
    """
    if system is None:
        system = CoefficientSystem(S, basis, support_depth,
                                   max(c.length - 1, support_depth))
    stacked = np.zeros((system.order + 1) * basis.dim, dtype=np.complex128)
    upto = min(c.length, system.order + 1)
    stacked[:upto * basis.dim] = c.coords[:upto].ravel()
    x, residual = system.solve(stacked)
    scale = max(1.0, float(np.linalg.norm(stacked)))
    if residual > RECONSTRUCT_TOL * scale:
        raise Inconsistent(
            f"no vector of support depth {support_depth} has these coefficients "
            f"(residual {residual:.3e})")
    if system.rank < len(system.columns):
        warnings.warn("coefficient system has null directions; minimal-norm solution",
                      UnderdeterminedWarning)
    return system.to_vector(x)


@dataclass
class KernelEval:
    """Truncated reproducing-kernel value with a geometric tail estimate."""

    z: complex
    lam: complex
    matrix: np.ndarray
    order: int
    tail_bound: float


def _adjoint_power_stack(S: ShiftOperator, basis: SeparatedBasis, order: int) -> list[np.ndarray]:
    """Dense stacks W_n with columns (L*)^n e'_j, for n = 0..order."""
    from .errors import DepthTooLargeForMemory

    n_vert = S.tree.n_vertices
    if n_vert * basis.dim > 2_000_000:
        raise DepthTooLargeForMemory(
            "kernel stacks would densify a tree too wide for this evaluation")
    W = np.zeros((n_vert, basis.dim), dtype=np.complex128)
    W += basis.matrix.T.toarray()
    stacks = [W]
    cur = [basis.vector(j) for j in range(basis.dim)]
    for _ in range(order):
        nxt = []
        W = np.zeros((n_vert, basis.dim), dtype=np.complex128)
        for j, vec in enumerate(cur):
            if vec.support_depth() >= S.tree.depth:
                raised = L2Vector.zero(S.tree)
            else:
                raised = apply_left_inverse_adjoint(S, vec)
            nxt.append(raised)
            W[:, j] = raised.data
        stacks.append(W)
        cur = nxt
    return stacks


def spectral_radius_estimate(S: ShiftOperator, iterations: int = 8) -> "SpectralRadiusEstimate":
    """Estimate of the spectral radius of L from ||L^n||^(1/n) on the truncation.

    Each operator norm comes from a fixed-length power iteration with seeded
    start; the estimate is the maximum of the last five root-norms, a
    conservative over-estimate that shrinks the trusted disc safely.
    """
    if S.lower_bound <= 0:
        raise NotLeftInvertible("shift has no positive lower bound on the truncation")
    depth = S.tree.depth
    steps = max(1, min(iterations, depth))
    rng = stable_rng(0xC0FFEE, "spectral-radius")
    n = S.tree.n_vertices
    norms: list[float] = []
    roots: list[float] = []
    for k in range(1, steps + 1):
        def matvec(x: np.ndarray, k: int = k) -> np.ndarray:
            v = L2Vector(S.tree, x.astype(np.complex128))
            for _ in range(k):
                v = apply_left_inverse(S, v)
            return v.data

        def rmatvec(y: np.ndarray, k: int = k) -> np.ndarray:
            v = L2Vector(S.tree, y.astype(np.complex128))
            for _ in range(k):
                v = apply_left_inverse_adjoint_truncating(S, v)
            return v.data

        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        best = 0.0
        for _ in range(60):
            y = matvec(x)
            ny = float(np.linalg.norm(y))
            best = max(best, ny)
            x = rmatvec(y)
            nx = float(np.linalg.norm(x))
            if nx == 0.0:
                break
            best = max(best, float(np.sqrt(nx)))
            x /= nx
        norms.append(best)
        roots.append(best ** (1.0 / k) if best > 0 else 0.0)
    estimate = max(roots[-5:]) if roots else 0.0
    return SpectralRadiusEstimate(estimate=estimate, norms=norms, roots=roots)


@dataclass
class SpectralRadiusEstimate:
    estimate: float
    norms: list[float]
    roots: list[float]


def kernel_matrix(S: ShiftOperator, basis: SeparatedBasis, z: complex, lam: complex,
                  order: int | None = None, *, rho: float | None = None) -> KernelEval:
    """Series truncation of the reproducing kernel matrix on E coordinates.

    matrix = sum_{m,n <= order} z^m conj(lam)^n P_E L^m (L*)^n restricted to E,
    assembled from adjoint power stacks.  Requires |z| and |lam| inside the
    estimated disc of analyticity.
    """
    if order is None:
        order = max(0, S.tree.depth - 2)
    if rho is None:
        rho = spectral_radius_estimate(S).estimate
    zmax = max(abs(z), abs(lam))
    if rho * zmax >= 1.0:
        raise OutsideDisc(f"|point| * rho = {rho * zmax:.4f} >= 1")
    order = min(order, S.tree.depth - basis.max_generation)
    stacks = _adjoint_power_stack(S, basis, order)
    Wz = np.zeros_like(stacks[0])
    Wl = np.zeros_like(stacks[0])
    for m, W in enumerate(stacks):
        Wz += np.conj(z) ** m * W
        Wl += np.conj(lam) ** m * W
    K = Wz.conj().T @ Wl
    q = rho * zmax
    tail = (q ** (order + 1)) / (1.0 - q) if q < 1 else np.inf
    return KernelEval(z=z, lam=lam, matrix=K, order=order, tail_bound=float(tail))


@dataclass
class EigenResidualReport:
    """Relative eigen-equation residual for a truncated kernel section."""

    residual: float
    tail_bound: float
    order: int


def eigenvector_residual(S: ShiftOperator, basis: SeparatedBasis, lam: complex,
                         e_index: int, order: int | None = None, *,
                         rho: float | None = None) -> EigenResidualReport:
    """Residual of the adjoint eigen-relation for the kernel section at lam.

    The section kappa = k(., conj(lam)) e'_j is represented by its coefficient
    sequence, reconstructed to vertex space, and tested against
    S* v = lam v there (the model inner product is the pullback).  The stated
    tail bound is |lam|^(order+1) ||(L*)^order e'_j|| / ||v|| plus solver slack.
    """
    if rho is None:
        rho = spectral_radius_estimate(S).estimate
    if rho * abs(lam) >= 1.0:
        raise OutsideDisc(f"|lam| * rho = {rho * abs(lam):.4f} >= 1")
    k_e = int(basis.gen_index[e_index])
    if order is None:
        order = S.tree.depth - k_e - 1
    order = min(order, S.tree.depth - k_e)
    w = basis.vector(e_index)
    acc = w.copy()
    powers = [w]
    for k in range(1, order + 1):
        powers.append(apply_left_inverse_adjoint(S, powers[-1]))
        acc = acc + (lam ** k) * powers[-1]
    support = min(S.tree.depth, k_e + order)
    # the section carries nonzero coefficients out to its support depth
    kappa_hat = analytic_coeffs(S, basis, acc, support)
    v = reconstruct(S, basis, kappa_hat, support_depth=support)
    nv = v.norm()
    if nv == 0.0:
        return EigenResidualReport(residual=0.0, tail_bound=1e-9, order=order)
    lhs = apply_adjoint(S, v)
    residual = (lhs - lam * v).norm() / nv
    tail = (abs(lam) ** (order + 1)) * powers[-1].norm() / nv + 1e-8
    return EigenResidualReport(residual=float(residual), tail_bound=float(tail), order=order)
