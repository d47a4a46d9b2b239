"""The acceptance suite: one function per criterion, each returning a result row."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from lensmaslov.contact_dyn import ComposedMap, FlowMap, discriminant_times, is_c1_small, translated_points
from lensmaslov.equivtop import (
    JoinModel,
    QuotientComplex,
    betti,
    bockstein,
    boundary_rule_defect,
    circle_complex,
    cohomology_basis,
    homology_basis,
    property_suite,
    sphere_model,
    twist_check,
)
from lensmaslov.equivtop.chains import random_chain
from lensmaslov.equivtop.homology import is_boundary, is_coboundary, is_cycle
from lensmaslov.genfun import Primitive, graph_error, quasiadd_embed, sharp
from lensmaslov.lens_core import ContactHamiltonian, LensData, perturbed_reeb, random_sphere_points
from lensmaslov.maslov import crossing_report, loop_product, mu_reeb, nu_sp_loop, random_loop, standard_loop
from lensmaslov.quadform import bracketings, index_i, sharp_quad, zero_tower


@dataclass
class CriterionResult:
    id: int
    claim: str
    value: object
    expected: object
    passed: bool
    seconds: float = 0.0
    limit_seconds: float | None = None
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.limit_seconds:g} s)" if self.limit_seconds else ""
        return f"[{status}] {self.id:2d} {self.claim}: {self.value} vs {self.expected}; {self.seconds:.2f} s{lim}"

    def as_dict(self) -> dict:
        return asdict(self)


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        try:
            res = fn(*args, **kw)
        except Exception as exc:  # a crash is a failed row, not an aborted suite
            cid = int(fn.__name__.rsplit("_", 1)[1])
            res = CriterionResult(cid, (fn.__doc__ or "").strip(), f"error: {exc}", "no error", False,
                                  details={"exception": type(exc).__name__})
        res.seconds = time.perf_counter() - t0
        if res.limit_seconds is not None and res.seconds > res.limit_seconds:
            res.passed = False
            res.details["timeout"] = True
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def criterion_1() -> CriterionResult:
    """nu of the standard loop in Sp(2) from the three-piece family."""
    rep = nu_sp_loop(standard_loop(1), strategy="uniform")
    value = (rep.mu, rep.ind_start, rep.ind_end)
    return CriterionResult(1, "nu(standard loop) = i(A_0) - i(A_1)", value, (2, 6, 4), value == (2, 6, 4), limit_seconds=1.0)


@_timed
def criterion_2() -> CriterionResult:
    """mu of the lk-th iterate of the 2 pi / k Reeb loop equals 2nl."""
    wrong = []
    for n in (1, 2, 3):
        for k in (2, 3, 5):
            for l in (1, 2, 3):
                mu = mu_reeb(n, k, l).mu
                if mu != 2 * n * l:
                    wrong.append({"n": n, "k": k, "l": l, "mu": mu})
    return CriterionResult(2, "Reeb mu = 2nl on 27 cases", f"{27 - len(wrong)}/27", "27/27", not wrong,
                           limit_seconds=10.0, details={"wrong": wrong})


@_timed
def criterion_3(pairs: int = 20, seed: int = 0) -> CriterionResult:
    """nu(xy) = nu(x) + nu(y) for random loop pairs, n = 1, 2."""
    bad = []
    for n in (1, 2):
        rng = np.random.default_rng(seed + n)
        for j in range(pairs):
            (a, ea), (b, eb) = random_loop(n, rng), random_loop(n, rng)
            na, nb = nu_sp_loop(a).mu, nu_sp_loop(b).mu
            nab = nu_sp_loop(loop_product(a, b)).mu
            if nab != na + nb or na != ea or nb != eb:
                bad.append({"n": n, "pair": j, "nu_x": na, "nu_y": nb, "nu_xy": nab, "expected_x": ea, "expected_y": eb})
    total = 2 * pairs
    return CriterionResult(3, "nu homomorphism on random loop pairs", f"{total - len(bad)}/{total}", f"{total}/{total}",
                           not bad, limit_seconds=30.0, details={"bad": bad})


@_timed
def criterion_4() -> CriterionResult:
    """i(Q1 # Q2) = i(Q1) + i(Q2) for zero towers with at most three leaves, every bracketing."""
    bad, count = [], 0
    shapes = [s for m in (1, 2, 3) for s in bracketings(m)]
    for n in (1, 2):
        for s1 in shapes:
            for s2 in shapes:
                Q1, Q2 = zero_tower(n, s1), zero_tower(n, s2)
                lhs = index_i(sharp_quad(Q1, Q2))
                rhs = index_i(Q1) + index_i(Q2)
                count += 1
                if lhs != rhs:
                    bad.append({"n": n, "left": repr(s1), "right": repr(s2), "lhs": lhs, "rhs": rhs})
    return CriterionResult(4, "zero quadratic defect", f"{count - len(bad)}/{count}", f"{count}/{count}", not bad,
                           limit_seconds=5.0, details={"bad": bad})


@_timed
def criterion_5(pairs: int = 50, seed: int = 0, witnesses: int = 3) -> CriterionResult:
    """Fibre-critical image of F1 # F2 against the graph of the composition; quasi-additivity."""
    lens = LensData.standard(3, 1)
    rng = np.random.default_rng(seed)
    worst_graph = worst_add = 0.0
    skipped = 0
    for j in range(pairs):
        maps = [FlowMap(perturbed_reeb(lens, 0.1, 2 * j + i), float(rng.uniform(0.1, 0.6))) for i in range(2)]
        if not all(is_c1_small(m).small for m in maps):
            skipped += 1
            continue
        F = sharp(Primitive(maps[0], lens), Primitive(maps[1], lens))
        w = random_sphere_points(1, witnesses, rng) * rng.uniform(0.5, 2.0, (witnesses, 1))
        r = graph_error(F, ComposedMap(maps), w)
        worst_graph = max(worst_graph, r["graph_error"], r["vertical_residual"])
        worst_add = max(worst_add, quasiadd_embed(F.left, F.right, 12, seed + j))
    ok = worst_graph <= 1e-7 and worst_add <= 1e-12 and skipped == 0
    return CriterionResult(5, "composition formula: graph error, quasi-additivity residual",
                           (worst_graph, worst_add), (1e-7, 1e-12), ok, details={"skipped": skipped})


@_timed
def criterion_6() -> CriterionResult:
    """dim H_j(L_k^{2M-1}) = 1 and the Bockstein pattern on lens models."""
    bad = []
    for k in (2, 3, 5):
        for M in (1, 2, 3):
            Q = QuotientComplex(sphere_model(k, [1] * M))
            b = betti(Q)
            if b != [1] * (2 * M):
                bad.append({"k": k, "M": M, "betti": b})
            for d in range(2 * M - 1):
                c = cohomology_basis(Q, d)[0]
                nonzero = not is_coboundary(Q, bockstein(Q, c))
                if nonzero != (d % 2 == 1):
                    bad.append({"k": k, "M": M, "degree": d, "bockstein_nonzero": nonzero})
    return CriterionResult(6, "lens homology and Bockstein", "ok" if not bad else f"{len(bad)} failures", "ok", not bad,
                           limit_seconds=60.0, details={"bad": bad})


@_timed
def criterion_7(chains: int = 200, seed: int = 0) -> CriterionResult:
    """x0 * x0 = 0, joins of generators, the boundary rule and the twist sign."""
    bad = []
    for k in (3, 5):
        m = JoinModel(circle_complex(k), circle_complex(k))
        y = [homology_basis(m.QX, d)[0] for d in (0, 1)]
        for a in (0, 1):
            for b in (0, 1):
                z = m.chain_join(y[a], y[b])
                nonzero = is_cycle(m.QXY, z) and not is_boundary(m.QXY, z)
                if nonzero != (a % 2 == 1 or b % 2 == 1):
                    bad.append({"k": k, "degrees": [a, b], "nonzero": nonzero})
                tw = twist_check(m, y[a], y[b])
                if not tw["homologous"]:
                    bad.append({"k": k, "twist": [a, b], **tw})
    rng = np.random.default_rng(seed)
    models = [JoinModel(circle_complex(3), sphere_model(3, [1, 1])), JoinModel(sphere_model(3, [1, 1]), circle_complex(3)),
              JoinModel(circle_complex(5), circle_complex(5))]
    for j in range(chains):
        m = models[j % len(models)]
        x = random_chain(m.QX, int(rng.integers(0, m.QX.dim + 1)), rng)
        y = random_chain(m.QY, int(rng.integers(0, m.QY.dim + 1)), rng)
        if not boundary_rule_defect(m, x, y).is_zero():
            bad.append({"chain_pair": j})
    return CriterionResult(7, "equivariant join computations", "ok" if not bad else f"{len(bad)} failures", "ok", not bad,
                           details={"bad": bad})


@_timed
def criterion_8(samples: int = 200, seed: int = 0) -> CriterionResult:
    """Index properties on random subcomplex pairs."""
    rep = property_suite(samples, seed, 3)
    return CriterionResult(8, "index properties on random subcomplexes", f"{len(rep.violations)} violations", "0 violations",
                           rep.ok, limit_seconds=300.0, details={"checks": rep.checks, "violations": rep.violations[:5]})


@_timed
def criterion_9(maps: int = 5, eps: float = 0.1) -> CriterionResult:
    """At least 2n nondegenerate translated points for perturbed Reeb flows on L_3^3."""
    lens = LensData.standard(3, 2)
    counts, worst = [], 0.0
    for s in range(maps):
        search = translated_points(FlowMap(perturbed_reeb(lens, eps, s), 1.0), lens)
        nd = search.nondegenerate
        counts.append(len(nd))
        worst = max([worst] + [p.residual for p in nd])
    ok = min(counts) >= 2 * lens.n and worst <= 1e-8
    return CriterionResult(9, "nondegenerate translated points per map", counts, f">= {2 * lens.n} each, residual <= 1e-8",
                           ok, limit_seconds=120.0, details={"max_residual": worst})


@_timed
def criterion_10() -> CriterionResult:
    """Reeb discriminant times on L_3^3 and zero bounds on crossing-free segments."""
    lens = LensData.standard(3, 2)
    H = ContactHamiltonian.reeb(2)
    T = 2 * math.pi
    scan = discriminant_times(H, lens, T)
    expected = [2 * math.pi / 3, 4 * math.pi / 3, 2 * math.pi]
    got = scan.values
    err = max(abs(a - b) for a, b in zip(got, expected)) if len(got) == 3 else math.inf
    rep = crossing_report(H, lens, T, scan=scan)
    segs_ok = all(s["bound"] == [0, 0] for s in rep.details["segments"])
    ok = err <= 1e-8 and segs_ok
    return CriterionResult(10, "Reeb discriminant times on L_3^3", [round(t, 10) for t in got], [round(t, 10) for t in expected],
                           ok, details={"max_error": err, "segments_zero": segs_ok, "mu": rep.mu})


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_all(selected=None) -> list[CriterionResult]:
    out = []
    for fn in CRITERIA:
        cid = int(fn.__name__.rsplit("_", 1)[1])
        if selected and cid not in selected:
            continue
        out.append(fn())
    return out
