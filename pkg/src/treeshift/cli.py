"""Command-line driver: build trees, run verification suites, emit JSON Lines.

Reports are deterministic for a fixed seed: one JSON object per check record,
followed by a summary object.  Diagnostics never fail a run; the exit code is
nonzero exactly when a pass/fail check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import balanced as bal
from . import harmonics as har
from . import model as mod
from . import multiplier as mul
from . import shift as sh
from . import tree as tr
from ._util import stable_rng
from .errors import ConfigError, TreeShiftError

TOL_ALG = 1e-12
TOL_POWER = 1e-10

SUITES = ("core-identities", "shimorin", "multiplier-algebra", "example-t2",
          "harmonics", "balanced")

# Static registry: every record names the identity it checks with one of these
# strings, so report consumers can group residuals by law.
CHECK_REFS = {
    "left-inverse-identity": "L S = identity on vectors clear of the last generation",
    "kernel-projection-identity": "projection onto ker S* equals I - S L",
    "kernel-annihilation": "L kills the separated kernel basis",
    "adjoint-pairing": "<S f, g> equals <f, S* g>",
    "gram-diagonal": "S* S is diagonal with the cached squared norms",
    "model-round-trip": "reconstruction inverts coefficient extraction",
    "coefficient-consistency": "coefficients equal kernel projections of L-iterates",
    "coefficient-convergence": "coefficients of truncations converge entrywise",
    "kernel-at-origin": "kernel matrix at the origin is the identity",
    "kernel-hermitian": "kernel matrix is hermitian under argument swap",
    "adjoint-eigenvector": "kernel sections are adjoint eigenvectors within tail bounds",
    "spectral-radius-record": "root-norm sequence of left-inverse powers",
    "convolution-unit": "index-zero identity is the convolution unit",
    "convolution-associative": "Cauchy product is associative",
    "scalar-commutative": "scalar symbols commute under convolution",
    "power-symbol": "extracted symbol of a shift power is the shifted identity",
    "polynomial-symbol": "extracted symbol of a shift polynomial is its coefficients",
    "commutant-convolution": "commutant action equals convolution by its symbol",
    "noncommutant-rejected": "operators off the commutant are rejected",
    "product-law": "convolution of symbols matches composed multiplications",
    "scalar-equivalence": "ancestor-sum action matches the coefficient route",
    "example1-kernel-basis": "two-ray kernel basis has the closed form",
    "example1-projection": "two-ray kernel projection matches the closed form",
    "example1-divergence": "constant unequal-diagonal symbol diverges on the two ray tree",
    "example1-witness-sums": "divergence witness gains constant per-step mass",
    "example1-admissible": "admissible two-term family stays bounded",
    "rotation-norm": "rotation preserves the vertex-space norm",
    "rotation-coefficients": "rotated coefficients acquire generation phases",
    "circle-integral": "roots-of-unity quadrature recovers the windowed symbol",
    "cesaro-decay": "window truncation error decreases with the order",
    "fejer-domination": "windowed multiplication norms stay dominated",
    "balanced-pairing": "balanced shifts scale single-generation inner products",
    "wold-parseval": "layer norms satisfy Parseval on balanced shifts",
    "ratio-bounds": "kernel-direction iterate norms stay within weight bands",
    "kom-agreement": "multiplication growth agrees with entrywise convolution growth",
    "hinf-oracle": "weighted Toeplitz norms track the analytic multiplier norm",
}


@dataclass
class RunConfig:
    """Everything a run needs; equal configs with equal seeds give equal reports."""

    tree_path: str | None = None
    example: str | None = None
    alpha: float = 0.5
    depth: int = 12
    suites: tuple[str, ...] = SUITES
    seed: int = 0
    tol_alg: float = TOL_ALG
    tol_power: float = TOL_POWER
    slope_threshold: float = mul.SLOPE_THRESHOLD
    out: str | None = None
    parallel: bool = False


@dataclass
class Record:
    name: str
    law: str
    status: str
    residual: float | None = None
    exactness_depth: int | None = None
    witness: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {"name": self.name, "law": self.law, "status": self.status}
        if self.residual is not None:
            payload["residual"] = self.residual
        if self.exactness_depth is not None:
            payload["exactness_depth"] = self.exactness_depth
        if self.witness is not None:
            payload["witness"] = self.witness
        payload.update(self.extra)
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass
class Report:
    config: dict
    records: list[Record]

    def summary(self) -> dict:
        counts = {"pass": 0, "fail": 0, "diagnostic": 0}
        for r in self.records:
            counts[r.status] += 1
        return {"summary": counts, "config": self.config}

    def to_json_lines(self) -> str:
        lines = [r.to_json() for r in self.records]
        lines.append(json.dumps(self.summary(), sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    @property
    def failed(self) -> bool:
        return any(r.status == "fail" for r in self.records)


def _record(name: str, status: str, residual: float | None = None,
            exactness_depth: int | None = None, witness: str | None = None,
            **extra) -> Record:
    if name not in CHECK_REFS:
        raise ConfigError(f"unregistered check name {name!r}")
    if status == "fail" and witness is None:
        witness = f"residual {residual!r} beyond tolerance"
    return Record(name=name, law=CHECK_REFS[name], status=status, residual=residual,
                  exactness_depth=exactness_depth, witness=witness, extra=extra)


def _default_trees(config: RunConfig):
    """Tree battery for generic suites: configured tree if given, else a mix."""
    if config.tree_path:
        tree, weights = tr.build_tree(tr.load_tree_spec(config.tree_path))
        return [("file-tree", tree, weights)]
    if config.example:
        params = [config.alpha] if config.example.upper() == "T2" else (
            [1.0] * config.depth if config.example.upper() == "UNILATERAL" else [])
        tree, weights = tr.generate_example(config.example, config.depth, params)
        return [(config.example.lower(), tree, weights)]
    out = [
        ("two-ray", *tr.generate_example("T2", max(8, config.depth), [config.alpha])),
        ("chain", *tr.generate_example("UNILATERAL", 10, [1.0] * 10)),
        ("random", *tr.generate_random_tree(6, 3, config.seed + 17)),
    ]
    return out


def _suite_core_identities(config: RunConfig) -> list[Record]:
    records = []
    for label, tree, weights in _default_trees(config):
        S = sh.ShiftOperator(tree, weights)
        basis = sh.separated_kernel_basis(S)
        rng = stable_rng(config.seed, f"core-{label}")
        worst_lt = worst_pe = worst_ker = worst_adj = worst_gram = 0.0
        for t in range(20):
            f = sh.L2Vector.random(tree, tree.depth - 1, rng)
            g = sh.L2Vector.random(tree, tree.depth, rng)
            sf = sh.apply_shift(S, f)
            worst_lt = max(worst_lt, (sh.apply_left_inverse(S, sf) - f).norm())
            pe = sh.project_kernel(S, basis, g)
            alt = g - sh.apply_shift(S, sh.apply_left_inverse(S, g))
            worst_pe = max(worst_pe, (pe - alt).norm())
            worst_adj = max(worst_adj, abs(sf.inner(g) - f.inner(sh.apply_adjoint(S, g))))
            ssf = sh.apply_adjoint(S, sf)
            diag = sh.L2Vector(tree, f.data * S._ns)
            worst_gram = max(worst_gram, (ssf - diag).norm())
        for j in range(basis.dim):
            worst_ker = max(worst_ker, sh.apply_left_inverse(S, basis.vector(j)).norm())
        checks = [
            ("left-inverse-identity", worst_lt),
            ("kernel-projection-identity", worst_pe),
            ("kernel-annihilation", worst_ker),
            ("adjoint-pairing", worst_adj),
            ("gram-diagonal", worst_gram),
        ]
        for name, resid in checks:
            status = "pass" if resid <= config.tol_power else "fail"
            records.append(_record(name, status, residual=resid,
                                   exactness_depth=tree.depth, tree=label))
    return records


def _suite_shimorin(config: RunConfig) -> list[Record]:
    records = []
    for label, tree, weights in _default_trees(config):
        S = sh.ShiftOperator(tree, weights)
        basis = sh.separated_kernel_basis(S)
        rng = stable_rng(config.seed, f"shimorin-{label}")
        worst_rt = 0.0
        for _ in range(10):
            f = sh.L2Vector.random(tree, tree.depth, rng)
            c = mod.analytic_coeffs(S, basis, f)
            back = mod.reconstruct(S, basis, c, tree.depth)
            worst_rt = max(worst_rt, (back - f).norm())
        records.append(_record("model-round-trip",
                               "pass" if worst_rt <= config.tol_power else "fail",
                               residual=worst_rt, exactness_depth=tree.depth, tree=label))
        est = mod.spectral_radius_estimate(S)
        records.append(_record("spectral-radius-record", "diagnostic",
                               residual=est.estimate, tree=label,
                               roots=[round(r, 12) for r in est.roots]))
        ker0 = mod.kernel_matrix(S, basis, 0.0, 0.0, order=max(0, tree.depth - 2),
                                 rho=est.estimate)
        resid = float(np.linalg.norm(ker0.matrix - np.eye(basis.dim)))
        records.append(_record("kernel-at-origin",
                               "pass" if resid <= config.tol_alg else "fail",
                               residual=resid, tree=label))
        lam = 0.25 / max(est.estimate, 1e-9)
        rep = mod.eigenvector_residual(S, basis, lam, 0, rho=est.estimate)
        records.append(_record("adjoint-eigenvector",
                               "pass" if rep.residual <= rep.tail_bound else "fail",
                               residual=rep.residual, tree=label,
                               tail_bound=rep.tail_bound))
    return records


def _suite_multiplier_algebra(config: RunConfig) -> list[Record]:
    records = []
    label, tree, weights = _default_trees(config)[0]
    S = sh.ShiftOperator(tree, weights)
    basis = sh.separated_kernel_basis(S)
    rng = stable_rng(config.seed, "mult-algebra")
    dim = basis.dim
    worst_unit = worst_assoc = worst_comm = 0.0
    for _ in range(25):
        a = mul.OpSymbol(rng.standard_normal((3, dim, dim))
                         + 1j * rng.standard_normal((3, dim, dim)))
        b = mul.OpSymbol(rng.standard_normal((4, dim, dim))
                         + 1j * rng.standard_normal((4, dim, dim)))
        c = mul.OpSymbol(rng.standard_normal((2, dim, dim))
                         + 1j * rng.standard_normal((2, dim, dim)))
        unit = mul.unit_symbol(dim)
        au = mul.convolve(a, unit)
        worst_unit = max(worst_unit, float(np.linalg.norm(au.mats[:a.length] - a.mats)))
        one = mul.convolve(mul.convolve(a, b), c)
        two = mul.convolve(a, mul.convolve(b, c))
        worst_assoc = max(worst_assoc, float(np.linalg.norm(one.mats - two.mats)))
        sa = mul.ScalarSymbol(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        sb = mul.ScalarSymbol(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        ab = mul.convolve(sa, sb)
        ba = mul.convolve(sb, sa)
        worst_comm = max(worst_comm, float(np.linalg.norm(ab.coeffs - ba.coeffs)))
    records.append(_record("convolution-unit",
                           "pass" if worst_unit <= config.tol_alg else "fail",
                           residual=worst_unit, tree=label))
    records.append(_record("convolution-associative",
                           "pass" if worst_assoc <= 1e-10 else "fail",
                           residual=worst_assoc, tree=label))
    records.append(_record("scalar-commutative",
                           "pass" if worst_comm <= config.tol_alg else "fail",
                           residual=worst_comm, tree=label))
    Smat = sh.shift_matrix(S)
    n_max = max(1, tree.depth - basis.max_generation)
    phi = mul.extract_symbol(S, basis, Smat)
    eye = np.eye(dim)
    resid = float(np.linalg.norm(phi.mats[1] - eye)) if n_max >= 1 else 0.0
    for m in range(min(phi.length, n_max + 1)):
        if m != 1:
            resid = max(resid, float(np.linalg.norm(phi.mats[m])))
    records.append(_record("power-symbol",
                           "pass" if resid <= config.tol_power else "fail",
                           residual=resid, exactness_depth=n_max, tree=label))
    rep = mul.commutant_check(S, basis, Smat @ Smat, seed=config.seed)
    records.append(_record("commutant-convolution",
                           "pass" if rep.max_residual <= config.tol_power else "fail",
                           residual=rep.max_residual,
                           exactness_depth=rep.exactness_depth, tree=label))
    proj = np.zeros_like(Smat)
    proj[0, 0] = 1.0
    try:
        mul.commutant_check(S, basis, proj, seed=config.seed)
        records.append(_record("noncommutant-rejected", "fail", witness="projection accepted"))
    except mul.NotInCommutant:
        records.append(_record("noncommutant-rejected", "pass", tree=label))
    sphi = mul.ScalarSymbol(np.array([1.0, 0.5, 0.25]))
    spsi = mul.ScalarSymbol(np.array([0.5, -0.25]))
    rep = mul.product_law_check(S, basis, sphi, spsi, trials=10, seed=config.seed)
    records.append(_record("product-law",
                           "pass" if rep.max_residual <= config.tol_power else "fail",
                           residual=rep.max_residual, tree=label))
    rep = mul.scalar_equivalence_check(S, basis, sphi, trials=10, seed=config.seed)
    records.append(_record("scalar-equivalence",
                           "pass" if rep.max_residual <= config.tol_power else "fail",
                           residual=rep.max_residual,
                           exactness_depth=rep.exactness_depth, tree=label))
    return records


def _suite_example_t2(config: RunConfig) -> list[Record]:
    records = []
    alpha = config.alpha
    depth = max(config.depth, 14)
    tree, weights = tr.generate_example("T2", depth, [alpha])
    S = sh.ShiftOperator(tree, weights)
    basis = sh.separated_kernel_basis(S)
    scale = float(np.sqrt(alpha ** 2 + 1.0))
    expected = sh.L2Vector.from_dict(tree, {(1, 1): alpha / scale, (2, 1): -1.0 / scale})
    got = basis.vector(1)
    resid = min((got - expected).norm(), (got + expected).norm())
    resid = max(resid, (basis.vector(0) - sh.L2Vector.basis(tree, (0, 0))).norm())
    records.append(_record("example1-kernel-basis",
                           "pass" if resid <= config.tol_alg else "fail",
                           residual=resid))
    rng = stable_rng(config.seed, "example-t2")
    worst = 0.0
    for _ in range(50):
        f = sh.L2Vector.random(tree, depth, rng)
        for n in range(1, depth):
            pe = sh.project_kernel(S, basis, _iterate_left(S, f, n))
            closed = _two_ray_projection(tree, f, n, alpha)
            worst = max(worst, (pe - closed).norm())
    records.append(_record("example1-projection",
                           "pass" if worst <= config.tol_alg * 100 else "fail",
                           residual=worst))
    div = mul.two_ray_symbol(basis, alpha, [np.array([[1.0, 0.0], [0.0, 0.0]])])
    rep = mul.membership_diagnostic(S, basis, div, depth - 2,
                                    slope_threshold=config.slope_threshold,
                                    seed=config.seed)
    records.append(_record("example1-divergence",
                           "pass" if rep.verdict == mul.DIVERGENT else "fail",
                           residual=rep.slope, norms=[round(x, 9) for x in rep.norms]))
    adm = mul.two_ray_admissible_symbol(basis, alpha, 1.0, 0.5, 0.25, -0.5)
    rep2 = mul.membership_diagnostic(S, basis, adm, depth - 2,
                                     slope_threshold=config.slope_threshold,
                                     seed=config.seed)
    records.append(_record("example1-admissible",
                           "pass" if rep2.verdict == mul.BOUNDED else "fail",
                           residual=rep2.slope))
    witness = mul.two_ray_divergence_witness(tree, alpha, depth - 1)
    image = _apply_opsymbol(S, basis, div, witness, depth - 1)
    per_term = alpha ** 4 / (alpha ** 2 + 1.0) ** 2
    worst_w = 0.0
    m = 3
    while m <= depth - 1:
        worst_w = max(worst_w, abs(abs(image[(1, m)]) ** 2 - per_term))
        m += 3
    records.append(_record("example1-witness-sums",
                           "pass" if worst_w <= config.tol_alg else "fail",
                           residual=worst_w))
    return records


def _iterate_left(S, f, n):
    out = f
    for _ in range(n):
        out = sh.apply_left_inverse(S, out)
    return out


def _two_ray_projection(tree, f, n, alpha):
    """Closed form of the kernel projection of L^n f on the two-ray tree."""
    a2 = alpha ** 2 + 1.0
    c_root = (f[(1, n)] + alpha ** (2 - n) * f[(2, n)]) / a2
    c_pair = (alpha * f[(1, n + 1)] - alpha ** (-n) * f[(2, n + 1)]) / a2
    return sh.L2Vector.from_dict(tree, {
        (0, 0): c_root,
        (1, 1): c_pair * alpha,
        (2, 1): -c_pair,
    })


def _apply_opsymbol(S, basis, phi, f, support_depth):
    conv = mul.convolve_with_coeffs(phi, mod.analytic_coeffs(S, basis, f))
    keep = np.zeros_like(conv.coords)
    gen = basis.gen_index
    for n in range(conv.coords.shape[0]):
        sel = gen + n <= S.tree.depth
        keep[n][sel] = conv.coords[n][sel]
    return mod.expand_layers(S, basis, mod.CoeffSeq(coords=keep, exact_to=conv.exact_to))


def _suite_harmonics(config: RunConfig) -> list[Record]:
    records = []
    label, tree, weights = _default_trees(config)[0]
    S = sh.ShiftOperator(tree, weights)
    basis = sh.separated_kernel_basis(S)
    rng = stable_rng(config.seed, "harmonics")
    w = np.exp(1j * 0.7)
    worst_norm = worst_coef = 0.0
    for _ in range(10):
        f = sh.L2Vector.random(tree, tree.depth, rng)
        fw = har.rotate_vector(tree, f, w)
        worst_norm = max(worst_norm, abs(fw.norm() - f.norm()))
        cw = mod.analytic_coeffs(S, basis, fw)
        c = mod.analytic_coeffs(S, basis, f)
        diag = har.rotation_diagonal(basis, w)
        for n in range(c.length):
            worst_coef = max(worst_coef, float(np.linalg.norm(
                cw.coords[n] - (w ** n) * diag.phases * c.coords[n])))
    records.append(_record("rotation-norm",
                           "pass" if worst_norm <= 1e-13 * 10 else "fail",
                           residual=worst_norm, tree=label))
    records.append(_record("rotation-coefficients",
                           "pass" if worst_coef <= config.tol_alg * 10 else "fail",
                           residual=worst_coef, tree=label))
    phi = mul.ScalarSymbol(np.array([1.0, 0.5, 0.25]))
    resid = max(
        har.circle_integral_check(S, basis, phi, 1, seed=config.seed),
        har.circle_integral_check(S, basis, phi, -2, seed=config.seed))
    records.append(_record("circle-integral",
                           "pass" if resid <= config.tol_power else "fail",
                           residual=resid, tree=label))
    geom = mul.ScalarSymbol(0.5 ** np.arange(min(8, tree.depth)))
    f_depth = max(0, tree.depth - (geom.length - 1) - basis.max_generation)
    vecs = [sh.L2Vector.basis(tree, tree.root),
            sh.L2Vector.random(tree, f_depth, rng)]
    rep = har.cesaro_convergence_experiment(S, basis, geom, [4, 32], vecs, seed=config.seed)
    ok_decay = all(rep.errors_for(v)[32] < rep.errors_for(v)[4] or
                   rep.errors_for(v)[4] == 0.0 for v in range(len(vecs)))
    rows = [{"order": r.order, "vector": r.vector_id, "error": r.error,
             "norm_estimate": rep.norm_estimates[r.order]} for r in rep.rows]
    records.append(_record("cesaro-decay", "pass" if ok_decay else "fail",
                           residual=max(r.error for r in rep.rows), tree=label,
                           rows=rows))
    dominated = all(n <= rep.full_norm_estimate * 1.05 for n in rep.norm_estimates.values())
    records.append(_record("fejer-domination", "pass" if dominated else "fail",
                           residual=max(rep.norm_estimates.values()) /
                           max(rep.full_norm_estimate, 1e-30), tree=label))
    return records


def _suite_balanced(config: RunConfig) -> list[Record]:
    records = []
    depth = 20
    norms = [1.0 + 1.0 / (m + 1) for m in range(depth)]
    tree, weights = tr.balanced_double_ray(depth, norms)
    S = sh.ShiftOperator(tree, weights)
    basis = sh.separated_kernel_basis(S)
    rng = stable_rng(config.seed, "balanced")
    worst_pair = 0.0
    for _ in range(25):
        k = int(rng.integers(0, 3))
        gen = tree.generations[k]
        f = sh.L2Vector.from_dict(tree, {
            v: complex(rng.standard_normal(), rng.standard_normal()) for v in gen})
        g = sh.L2Vector.from_dict(tree, {
            v: complex(rng.standard_normal(), rng.standard_normal()) for v in gen})
        n = int(rng.integers(0, min(4, depth - k)))
        u_prime = tree.generations[k + n][0]
        worst_pair = max(worst_pair, bal.balanced_inner_product_check(S, f, g, n, u_prime))
    records.append(_record("balanced-pairing",
                           "pass" if worst_pair <= config.tol_power * 100 else "fail",
                           residual=worst_pair))
    worst_wold = 0.0
    for _ in range(10):
        f = sh.L2Vector.random(tree, depth, rng)
        dec = bal.wold_decompose(S, basis, f)
        layer = dec.layer_norms(S)
        worst_wold = max(worst_wold, abs(sum(x ** 2 for x in layer) - f.norm() ** 2),
                         dec.residual)
    records.append(_record("wold-parseval",
                           "pass" if worst_wold <= config.tol_power * 100 else "fail",
                           residual=worst_wold))
    ratio = bal.ratio_bounds_check(S, basis)
    records.append(_record("ratio-bounds", "pass" if ratio.ok else "fail",
                           residual=ratio.max_ratio_excess,
                           extra_pairs=ratio.pairs_checked))
    sym = mul.indicator_symbol(2, basis.dim, np.array([[0.3, -0.2], [0.1, 0.7]]))
    kom = bal.kom_characterization_check(S, basis, sym, depth + 1,
                                         slope_threshold=config.slope_threshold,
                                         seed=config.seed)
    entry_rows = [{"entry": list(key), "depths": r.depths, "norms": r.norms,
                   "slope": r.slope, "verdict": r.verdict}
                  for key, r in sorted(kom.entry_side.items())]
    records.append(_record("kom-agreement", "pass" if kom.agree else "fail",
                           residual=kom.multiplication_side.slope,
                           verdict=kom.multiplication_side.verdict,
                           entries=entry_rows))
    beta = bal.BetaWeights(np.ones(256))
    rep = bal.hinf_membership(mul.ScalarSymbol(0.5 ** np.arange(256)), beta, beta, 256)
    resid = abs(rep.norms[-1] - 2.0)
    records.append(_record("hinf-oracle",
                           "pass" if resid <= 0.04 and rep.verdict == mul.BOUNDED else "fail",
                           residual=resid, verdict=rep.verdict))
    return records


_SUITE_FUNCS = {
    "core-identities": _suite_core_identities,
    "shimorin": _suite_shimorin,
    "multiplier-algebra": _suite_multiplier_algebra,
    "example-t2": _suite_example_t2,
    "harmonics": _suite_harmonics,
    "balanced": _suite_balanced,
}


def run(config: RunConfig) -> Report:
    """Execute the configured suites and assemble the deterministic report."""
    requested = []
    for s in config.suites:
        if s == "all":
            for name in SUITES:
                if name not in requested:
                    requested.append(name)
        elif s in _SUITE_FUNCS:
            if s not in requested:
                requested.append(s)
        else:
            raise ConfigError(f"unknown suite {s!r}")
    if config.depth < 2:
        raise ConfigError("depth must be at least 2")

    def call(name: str) -> list[Record]:
        try:
            return _SUITE_FUNCS[name](config)
        except TreeShiftError as exc:
            rec = Record(name=f"{name}", law="suite execution",
                         status="fail", witness=f"{type(exc).__name__}: {exc}")
            return [rec]

    if config.tree_path:
        try:
            tr.build_tree(tr.load_tree_spec(config.tree_path))
        except TreeShiftError as exc:
            raise ConfigError(f"cannot use tree source {config.tree_path}: {exc}") from exc

    ordered = sorted(requested, key=SUITES.index)
    if config.parallel:
        with ThreadPoolExecutor(max_workers=len(ordered) or 1) as pool:
            chunks = list(pool.map(call, ordered))
    else:
        chunks = [call(name) for name in ordered]
    records = [rec for chunk in chunks for rec in chunk]
    cfg = {
        "alpha": config.alpha, "depth": config.depth, "example": config.example,
        "seed": config.seed, "slope_threshold": config.slope_threshold,
        "suites": ordered, "tol_alg": config.tol_alg, "tol_power": config.tol_power,
        "tree": config.tree_path,
    }
    report = Report(config=cfg, records=records)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json_lines())
    return report


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treeshift",
                                description="verification suites for weighted shifts on trees")
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run verification suites")
    runp.add_argument("--tree", default=None, help="path to a tree-spec JSON file")
    runp.add_argument("--example", default=None, help="T2, T4 or UNILATERAL")
    runp.add_argument("--alpha", type=float, default=0.5)
    runp.add_argument("--depth", type=int, default=12)
    runp.add_argument("--suite", action="append", default=None,
                      help="suite name (repeatable); default: all")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--out", default=None, help="report path (JSON lines)")
    runp.add_argument("--tol-alg", type=float, default=TOL_ALG)
    runp.add_argument("--tol-power", type=float, default=TOL_POWER)
    runp.add_argument("--slope-threshold", type=float, default=mul.SLOPE_THRESHOLD)
    runp.add_argument("--parallel", action="store_true")

    genp = sub.add_parser("generate", help="emit an example tree spec as JSON")
    genp.add_argument("--example", required=True)
    genp.add_argument("--alpha", type=float, default=0.5)
    genp.add_argument("--depth", type=int, required=True)
    genp.add_argument("--out", required=True)

    insp = sub.add_parser("inspect", help="print kernel basis and norm data")
    insp.add_argument("--tree", default=None)
    insp.add_argument("--example", default=None)
    insp.add_argument("--alpha", type=float, default=0.5)
    insp.add_argument("--depth", type=int, default=6)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            seed = args.seed
            if seed is None:
                seed = int(os.environ.get("TREESHIFT_SEED", "0"))
            suites = tuple(args.suite) if args.suite else ("all",)
            config = RunConfig(
                tree_path=args.tree, example=args.example, alpha=args.alpha,
                depth=args.depth, suites=suites, seed=seed, tol_alg=args.tol_alg,
                tol_power=args.tol_power, slope_threshold=args.slope_threshold,
                out=args.out, parallel=args.parallel)
            report = run(config)
            if not args.out:
                sys.stdout.write(report.to_json_lines())
            return 1 if report.failed else 0
        if args.command == "generate":
            params = [args.alpha] if args.example.upper() == "T2" else (
                [1.0] * args.depth if args.example.upper() == "UNILATERAL" else [])
            tree, weights = tr.generate_example(args.example, args.depth, params)
            tr.save_tree_spec(tr.tree_to_spec(tree, weights), args.out)
            return 0
        if args.command == "inspect":
            if args.tree:
                tree, weights = tr.build_tree(tr.load_tree_spec(args.tree))
            else:
                example = args.example or "T2"
                params = [args.alpha] if example.upper() == "T2" else (
                    [1.0] * args.depth if example.upper() == "UNILATERAL" else [])
                tree, weights = tr.generate_example(example, args.depth, params)
            S = sh.ShiftOperator(tree, weights)
            basis = sh.separated_kernel_basis(S)
            info = {
                "vertices": tree.n_vertices,
                "depth": tree.depth,
                "kernel_dimension": basis.dim,
                "kernel_generations": [int(k) for k in basis.gen_index],
                "lower_bound": S.lower_bound,
                "norm_upper": S.norm_upper,
                "balanced": is_balanced_str(S),
                "basis_vectors": [
                    {str(v): [val.real, val.imag] for v, val in basis.vector(j).as_dict().items()}
                    for j in range(min(basis.dim, 16))
                ],
            }
            json.dump(info, sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
            return 0
    except TreeShiftError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    return 0


def is_balanced_str(S: sh.ShiftOperator) -> str:
    ok, witness = sh.is_balanced(S)
    return "yes" if ok else f"no (witness {witness})"


if __name__ == "__main__":
    raise SystemExit(main())
