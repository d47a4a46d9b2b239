"""Randomized checks of the index properties on subcomplexes of lens models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from lensmaslov.equivtop.chains import JoinModel
from lensmaslov.equivtop.complexes import QuotientComplex, Subcomplex, random_subcomplex, sphere_model
from lensmaslov.equivtop.homology import cohom_index


@dataclass
class PropertyReport:
    k: int
    samples: int
    seed: int
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, name: str, passed: bool, **info):
        c = self.checks.setdefault(name, {"run": 0, "failed": 0})
        c["run"] += 1
        if not passed:
            c["failed"] += 1
            self.violations.append({"property": name, **info})

    def as_dict(self) -> dict:
        return {"k": self.k, "samples": self.samples, "seed": self.seed, "ok": self.ok,
                "checks": self.checks, "violations": self.violations}


def _desc(A: Subcomplex) -> list:
    return [list(t) for t in A.top_simplices()]


def property_suite(samples: int = 200, seed: int = 0, k: int = 3, cross_check_every: int = 10) -> PropertyReport:
    """Monotonicity, Lefschetz, subadditivity, join quasi-additivity and join stability.

    Sets A, B are random subcomplexes of the L_k^5 model for the first three
    properties; for joins, A and B live in L_k^3 models and A * B in the
    L_k^7 model.  Join stability joins A with the full L_k^1 and L_k^3.
    """
    rng = np.random.default_rng(seed)
    rep = PropertyReport(k, samples, seed)
    L5 = QuotientComplex(sphere_model(k, [1, 1, 1]))
    hyper = [L5.lens_subspace([j for j in range(3) if j != drop]) for drop in range(3)]
    X3 = sphere_model(k, [1, 1])
    J33 = JoinModel(X3, X3)
    J31 = JoinModel(X3, sphere_model(k, [1]))
    J13 = JoinModel(sphere_model(k, [1]), X3)
    for s in range(samples):
        A = random_subcomplex(L5, rng)
        B = random_subcomplex(L5, rng)
        cc = cross_check_every and s % cross_check_every == 0
        iA, iB = cohom_index(A, cc), cohom_index(B, cc)
        iU, iI = cohom_index(A.union(B)), cohom_index(A.intersection(B))
        info = {"sample": s, "A": _desc(A), "B": _desc(B), "ind_A": iA, "ind_B": iB, "ind_union": iU, "ind_intersection": iI}
        rep.record("monotonicity", iI <= min(iA, iB) and max(iA, iB) <= iU, **info)
        for j, H in enumerate(hyper):
            iH = cohom_index(A.intersection(H))
            rep.record("lefschetz", iH >= iA - 2, **info, hyperplane=j, ind_cap=iH)
        bound = iA + iB if (iA % 2 == 0 or iB % 2 == 0) else iA + iB + 1
        rep.record("subadditivity", iU <= bound, **info)

        A3 = random_subcomplex(J33.QX, rng, 4)
        B3 = random_subcomplex(J33.QY, rng, 4)
        a, b = cohom_index(A3), cohom_index(B3)
        j = cohom_index(J33.subcomplex_join(A3, B3), cc)
        even = a % 2 == 0 or b % 2 == 0
        rep.record("join_quasi_additivity", abs(j - a - b) <= 1 and (not even or j == a + b),
                   sample=s, A=_desc(A3), B=_desc(B3), ind_A=a, ind_B=b, ind_join=j)
        st1 = cohom_index(J31.subcomplex_join(A3, J31.QY.full()))
        C1 = random_subcomplex(J13.QX, rng, 2)
        c1 = cohom_index(C1)
        st2 = cohom_index(J13.subcomplex_join(C1, J13.QY.full()))
        rep.record("join_stability", st1 == a + 2 and st2 == c1 + 4,
                   sample=s, A=_desc(A3), ind_A=a, ind_A_join_L1=st1, C=_desc(C1), ind_C=c1, ind_C_join_L3=st2)
    return rep
