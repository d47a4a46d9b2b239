"""Equivariant join of chains on lens quotients.

For orbit simplices [s] of X/G and [m] of Y/G with representatives s~, m~,

    [s] *_G [m] = sum_{c in G} proj(s~ * c.m~),

which is the orbit-wise form of phi^{-1}(phi(s) * phi(m)) with
phi([s]) = sum_g g.s~.  Joins are ordered X-vertices first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from lensmaslov.equivtop.complexes import EquivComplex, QuotientComplex, Subcomplex, join_complex, permutation_sign
from lensmaslov.equivtop.homology import ChainVector, chain_boundary, is_boundary


@dataclass(eq=False)
class JoinModel:
    """X, Y, X * Y and their quotients, with the vertex offset of Y in X * Y."""

    X: EquivComplex
    Y: EquivComplex
    QX: QuotientComplex = field(init=False)
    QY: QuotientComplex = field(init=False)
    XY: EquivComplex = field(init=False)
    QXY: QuotientComplex = field(init=False)

    def __post_init__(self):
        if self.X.k != self.Y.k:
            raise ValueError("join of complexes with different groups")
        self.QX, self.QY = QuotientComplex(self.X), QuotientComplex(self.Y)
        self.XY = join_complex(self.X, self.Y)
        self.QXY = QuotientComplex(self.XY)

    @property
    def k(self) -> int:
        return self.X.k

    @property
    def offset(self) -> int:
        return self.X.n_vertices

    @cached_property
    def swapped(self) -> "JoinModel":
        return JoinModel(self.Y, self.X)

    def _shift(self, simplex) -> tuple:
        return tuple(v + self.offset for v in simplex)

    def join_cells(self, l: int, s: int, m: int, t: int) -> dict:
        """Coefficients of [s] *_G [t] for orbit s in degree l of X/G and t in degree m of Y/G."""
        rs = self.QX.reps[l][s]
        rt = self.QY.reps[m][t]
        out: dict = {}
        for c in range(self.k):
            idx, sg = self.QXY.project(rs + self._shift(self.Y.act(rt, c)))
            out[idx] = out.get(idx, 0) + sg
        return out

    def chain_join(self, x: ChainVector, y: ChainVector) -> ChainVector:
        """x *_G y, a chain of degree l + m + 1 on (X * Y)/G."""
        if x.k != self.k or y.k != self.k:
            raise ValueError("mismatched k")
        deg = x.degree + y.degree + 1
        out = np.zeros(self.QXY.count(deg), dtype=np.int64)
        for s in np.nonzero(x.coeffs)[0]:
            for t in np.nonzero(y.coeffs)[0]:
                a = int(x.coeffs[s] * y.coeffs[t])
                for idx, sg in self.join_cells(x.degree, int(s), y.degree, int(t)).items():
                    out[idx] += a * sg
        return ChainVector(deg, out, self.k)

    def twist(self, z: ChainVector) -> ChainVector:
        """Push a chain on (X * Y)/G forward along the factor swap to (Y * X)/G."""
        sw = self.swapped
        nx = self.X.n_vertices
        ny = self.Y.n_vertices
        out = np.zeros(sw.QXY.count(z.degree), dtype=np.int64)
        for j in np.nonzero(z.coeffs)[0]:
            rep = self.QXY.reps[z.degree][j]
            img = tuple(v + ny if v < nx else v - nx for v in rep)
            idx, sg = sw.QXY.project(img)
            out[idx] += sg * z.coeffs[j]
        return ChainVector(z.degree, out, self.k)

    def subcomplex_join(self, A: Subcomplex, B: Subcomplex) -> Subcomplex:
        """Quotient of the join of the preimages of A and B."""
        cells = [set() for _ in range(self.QXY.dim + 1)]
        xa = [(-1, None)] + [(d, i) for d, c in enumerate(A.cells) for i in c]
        yb = [(-1, None)] + [(d, i) for d, c in enumerate(B.cells) for i in c]
        for l, s in xa:
            rs = self.QX.reps[l][s] if s is not None else ()
            for m, t in yb:
                if s is None and t is None:
                    continue
                rt = self.QY.reps[m][t] if t is not None else ()
                for c in range(self.k if rs and rt else 1):
                    simplex = rs + self._shift(self.Y.act(rt, c))
                    cells[len(simplex) - 1].add(self.QXY.project(simplex)[0])
        return Subcomplex(self.QXY, tuple(tuple(sorted(c)) for c in cells))


def random_chain(Q: QuotientComplex, degree: int, rng: np.random.Generator) -> ChainVector:
    return ChainVector(degree, rng.integers(0, Q.k, size=Q.count(degree)), Q.k)


def boundary_rule_defect(model: JoinModel, x: ChainVector, y: ChainVector) -> ChainVector:
    """d(x * y) - (dx) * y - (-1)^{l+1} x * (dy); zero over Z_k."""
    lhs = chain_boundary(model.QXY, model.chain_join(x, y))
    rhs = None
    if x.degree > 0:
        rhs = model.chain_join(chain_boundary(model.QX, x), y)
    if y.degree > 0:
        t = model.chain_join(x, chain_boundary(model.QY, y)).scale((-1) ** (x.degree + 1))
        rhs = t if rhs is None else rhs + t
    return lhs if rhs is None else lhs - rhs


# ---------------------------------------------------------------------------
# Definition via invariant chains upstairs, used as an oracle


def phi(Q: QuotientComplex, x: ChainVector) -> dict:
    """Transfer sum_g g.s~ of a quotient chain, as {sorted upstairs simplex: coefficient}."""
    out: dict = {}
    for j in np.nonzero(x.coeffs)[0]:
        rep = Q.reps[x.degree][j]
        for c in range(Q.k):
            srt, sg = permutation_sign(Q.X.act(rep, c))
            out[srt] = (out.get(srt, 0) + sg * int(x.coeffs[j])) % Q.k
    return {s: v for s, v in out.items() if v}


def phi_inverse(Q: QuotientComplex, chain: dict, degree: int) -> ChainVector:
    """Inverse of phi on invariant chains: read the coefficient at each representative."""
    out = np.zeros(Q.count(degree), dtype=np.int64)
    for j, rep in enumerate(Q.reps[degree]):
        out[j] = chain.get(rep, 0)
    return ChainVector(degree, out, Q.k)


def upstairs_join(a: dict, b: dict, offset: int, k: int) -> dict:
    out: dict = {}
    for s, u in a.items():
        for t, v in b.items():
            key = s + tuple(w + offset for w in t)
            out[key] = (out.get(key, 0) + u * v) % k
    return out


def chain_join_via_phi(model: JoinModel, x: ChainVector, y: ChainVector) -> ChainVector:
    z = upstairs_join(phi(model.QX, x), phi(model.QY, y), model.offset, model.k)
    return phi_inverse(model.QXY, z, x.degree + y.degree + 1)


def twist_check(model: JoinModel, x: ChainVector, y: ChainVector) -> dict:
    """Compare tau_*(x * y) with (-1)^{(l+1)(m+1)} y * x in homology of (Y * X)/G."""
    l, m = x.degree, y.degree
    sign = (-1) ** ((l + 1) * (m + 1))
    lhs = model.twist(model.chain_join(x, y))
    rhs = model.swapped.chain_join(y, x).scale(sign)
    diff = lhs - rhs
    return {
        "sign": sign,
        "chain_equal": bool(diff.is_zero()),
        "homologous": bool(diff.is_zero() or is_boundary(model.swapped.QXY, diff)),
        "lhs_zero_class": bool(is_boundary(model.swapped.QXY, lhs)),
    }
