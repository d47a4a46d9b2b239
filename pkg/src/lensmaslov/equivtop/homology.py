"""Homology, cohomology, Bockstein and the cohomological index over Z_k."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from lensmaslov.equivtop import fp
from lensmaslov.equivtop.complexes import QuotientComplex, Subcomplex


class IndexShapeError(RuntimeError):
    """The restriction ranks are not of the form 1, ..., 1, 0, ..., 0."""


@dataclass(frozen=True)
class ChainVector:
    """Chain (or cochain) over Z_k on the orbit basis of a quotient complex."""

    degree: int
    coeffs: np.ndarray
    k: int
    cochain: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=np.int64) % self.k)

    def __add__(self, other: "ChainVector") -> "ChainVector":
        self._compatible(other)
        return ChainVector(self.degree, self.coeffs + other.coeffs, self.k, self.cochain)

    def __sub__(self, other: "ChainVector") -> "ChainVector":
        self._compatible(other)
        return ChainVector(self.degree, self.coeffs - other.coeffs, self.k, self.cochain)

    def scale(self, a: int) -> "ChainVector":
        return ChainVector(self.degree, a * self.coeffs, self.k, self.cochain)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def _compatible(self, other):
        if (self.degree, self.k, self.cochain, self.coeffs.shape) != (other.degree, other.k, other.cochain, other.coeffs.shape):
            raise ValueError("incompatible chains")


def boundary_mod(Q: QuotientComplex, d: int) -> np.ndarray:
    return Q.boundary(d) % Q.k


def chain_boundary(Q: QuotientComplex, x: ChainVector) -> ChainVector:
    if x.degree == 0:
        return ChainVector(-1, np.zeros(0), Q.k)
    return ChainVector(x.degree - 1, Q.boundary(x.degree) @ x.coeffs, Q.k)


def coboundary(Q: QuotientComplex, c: ChainVector) -> ChainVector:
    return ChainVector(c.degree + 1, Q.boundary(c.degree + 1).T @ c.coeffs, Q.k, cochain=True)


def betti(Q: QuotientComplex, p: int | None = None) -> list[int]:
    """Ranks of H_d(Q; F_p), d = 0..dim (p defaults to k)."""
    p = p or Q.k
    r = [fp.rank(Q.boundary(d), p) for d in range(Q.dim + 2)]
    return [Q.count(d) - r[d] - r[d + 1] for d in range(Q.dim + 1)]


def upstairs_betti(X, p: int) -> list[int]:
    """Betti numbers of the equivariant complex itself (no quotient)."""
    idx = [{s: i for i, s in enumerate(layer)} for layer in X.simplices]
    mats = [np.zeros((0, len(X.simplices[0])), dtype=np.int64)]
    for d in range(1, X.dim + 1):
        D = np.zeros((len(X.simplices[d - 1]), len(X.simplices[d])), dtype=np.int64)
        for j, s in enumerate(X.simplices[d]):
            for i in range(d + 1):
                D[idx[d - 1][s[:i] + s[i + 1:]], j] += (-1) ** i
        mats.append(D)
    mats.append(np.zeros((len(X.simplices[-1]), 0), dtype=np.int64))
    r = [fp.rank(M, p) if M.size else 0 for M in mats]
    return [len(X.simplices[d]) - r[d] - r[d + 1] for d in range(X.dim + 1)]


def homology_basis(Q: QuotientComplex, d: int) -> list[ChainVector]:
    """Cycle representatives of a basis of H_d(Q; Z_k)."""
    p = Q.k
    Z = fp.nullspace(Q.boundary(d), p) if d > 0 else np.eye(Q.count(0), dtype=np.int64)
    B = Q.boundary(d + 1).T
    reps = fp.extend_basis(B, Z, p)
    return [ChainVector(d, v, p) for v in reps]


def cohomology_basis(Q: QuotientComplex, d: int) -> list[ChainVector]:
    """Cocycle representatives of a basis of H^d(Q; Z_k)."""
    p = Q.k
    Z = fp.nullspace(Q.boundary(d + 1).T, p)
    B = Q.boundary(d)  # rows span the coboundaries of (d-1)-cochains
    reps = fp.extend_basis(B, Z, p)
    return [ChainVector(d, v, p, cochain=True) for v in reps]


def is_boundary(Q: QuotientComplex, x: ChainVector) -> bool:
    return fp.in_row_span(x.coeffs, Q.boundary(x.degree + 1).T, Q.k)


def is_coboundary(Q: QuotientComplex, c: ChainVector) -> bool:
    return fp.in_row_span(c.coeffs, Q.boundary(c.degree), Q.k)


def is_cycle(Q: QuotientComplex, x: ChainVector) -> bool:
    return chain_boundary(Q, x).is_zero()


def is_cocycle(Q: QuotientComplex, c: ChainVector) -> bool:
    return coboundary(Q, c).is_zero()


def bockstein(Q: QuotientComplex, c: ChainVector) -> ChainVector:
    """Connecting map of 0 -> Z_k -> Z_{k^2} -> Z_k -> 0 on a cocycle.

    Lift to integers in [0, k), take the integral coboundary, divide by k.
    """
    if not is_cocycle(Q, c):
        raise ValueError("Bockstein input is not a cocycle")
    k = Q.k
    lift = c.coeffs % k
    d = Q.boundary(c.degree + 1).T @ lift
    if np.any(d % k):
        raise ArithmeticError("integral coboundary not divisible by k")
    return ChainVector(c.degree + 1, d // k, k, cochain=True)


def _restricted_boundary(A: Subcomplex, d: int) -> np.ndarray:
    Q = A.Q
    if d <= 0 or d > Q.dim:
        rows = A.cells[d - 1] if 0 <= d - 1 < len(A.cells) else ()
        cols = A.cells[d] if 0 <= d < len(A.cells) else ()
        return np.zeros((len(rows), len(cols)), dtype=np.int64)
    return Q.boundary(d)[np.ix_(A.cells[d - 1], A.cells[d])]


@lru_cache(maxsize=64)
def _lens_cocycles(Q: QuotientComplex) -> tuple:
    return tuple(tuple(cohomology_basis(Q, d)) for d in range(Q.dim + 1))


@lru_cache(maxsize=64)
def _lens_boundaries(Q: QuotientComplex) -> tuple:
    return tuple(Q.boundary(d + 1).T % Q.k for d in range(Q.dim + 1))


def restriction_ranks(A: Subcomplex) -> list[int]:
    """Rank of H^d(L) -> H^d(A) over Z_k for every degree d."""
    Q, p = A.Q, A.Q.k
    out = []
    for d in range(Q.dim + 1):
        cells = list(A.cells[d])
        if not cells:
            out.append(0)
            continue
        reps = np.array([c.coeffs[cells] for c in _lens_cocycles(Q)[d]], dtype=np.int64).reshape(-1, len(cells))
        B = _restricted_boundary(A, d)  # rows: coboundaries in A
        rb = fp.rank(B, p) if B.size else 0
        stacked = np.vstack([B.reshape(-1, len(cells)), reps])
        out.append(fp.rank(stacked, p) - rb)
    return out


def inclusion_ranks(A: Subcomplex) -> list[int]:
    """Rank of H_d(A) -> H_d(L) over Z_k, computed from cycles of A and boundaries of L."""
    Q, p = A.Q, A.Q.k
    out = []
    for d in range(Q.dim + 1):
        cells = list(A.cells[d])
        if not cells:
            out.append(0)
            continue
        ZA = fp.nullspace(_restricted_boundary(A, d), p) if d > 0 else np.eye(len(cells), dtype=np.int64)
        Z = np.zeros((ZA.shape[0], Q.count(d)), dtype=np.int64)
        Z[:, cells] = ZA
        BL = _lens_boundaries(Q)[d]
        rb = fp.rank(BL, p) if BL.size else 0
        out.append(fp.rank(np.vstack([BL.reshape(-1, Q.count(d)), Z]), p) - rb)
    return out


def _check_shape(ranks: list[int], what: str) -> int:
    ind = 0
    while ind < len(ranks) and ranks[ind] == 1:
        ind += 1
    if any(r != 0 for r in ranks[ind:]) or any(r > 1 for r in ranks):
        raise IndexShapeError(f"{what} ranks {ranks} are not of the form 1..1 0..0")
    return ind


def cohom_index(A: Subcomplex, cross_check: bool = False) -> int:
    """Dimension of the image of H^*(L; Z_k) -> H^*(A; Z_k).

    Raises:
        ValueError: if A is not face-closed.
        IndexShapeError: if the ranks have holes, or disagree with the
            homology-side computation when ``cross_check`` is set.
    """
    if not A.is_closed():
        raise ValueError("not a subcomplex")
    ranks = restriction_ranks(A)
    ind = _check_shape(ranks, "restriction")
    if cross_check:
        hom = inclusion_ranks(A)
        if hom != ranks:
            raise IndexShapeError(f"cohomology ranks {ranks} differ from homology ranks {hom}")
    return ind


def homology_index(A: Subcomplex) -> int:
    return _check_shape(inclusion_ranks(A), "inclusion")
