"""Dense linear algebra over the prime field F_p."""

from __future__ import annotations

import numpy as np


def _as_field(M, p: int) -> np.ndarray:
    A = np.array(M, dtype=np.int64, copy=True)
    if A.ndim == 1:
        A = A[None, :]
    return A % p


def row_echelon(M, p: int, reduced: bool = False) -> tuple[np.ndarray, list[int]]:
    """Row echelon form of M over F_p.

    Returns:
        (R, pivots): the nonzero rows of the echelon form (leading entries 1)
        and the pivot column of each row.
    """
    A = _as_field(M, p)
    rows, cols = A.shape
    r = 0
    pivots: list[int] = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = (A[r] * pow(int(A[r, c]), p - 2, p)) % p
        lo = 0 if reduced else r + 1
        mask = np.nonzero(A[lo:, c])[0] + lo
        mask = mask[mask != r]
        if mask.size:
            A[mask] = (A[mask] - np.outer(A[mask, c], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank(M, p: int) -> int:
    A = np.asarray(M)
    if A.size == 0:
        return 0
    return len(row_echelon(A, p)[1])


def nullspace(M, p: int) -> np.ndarray:
    """Basis of {x : M x = 0} over F_p, as the rows of the returned array."""
    A = np.asarray(M)
    n = A.shape[1]
    if A.shape[0] == 0 or A.size == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = row_echelon(A, p, reduced=True)
    free = [c for c in range(n) if c not in set(piv)]
    out = np.zeros((len(free), n), dtype=np.int64)
    for j, f in enumerate(free):
        out[j, f] = 1
        for i, c in enumerate(piv):
            out[j, c] = (-R[i, f]) % p
    return out


def in_row_span(v, M, p: int) -> bool:
    """True if the vector v lies in the row span of M over F_p."""
    v = np.asarray(v, dtype=np.int64) % p
    if not np.any(v):
        return True
    M = np.asarray(M)
    if M.size == 0:
        return False
    return rank(np.vstack([M, v]), p) == rank(M, p)


def extend_basis(base, candidates, p: int) -> np.ndarray:
    """Rows of ``candidates`` that, added greedily, are independent modulo span(base)."""
    cand = np.asarray(candidates, dtype=np.int64)
    base = np.asarray(base, dtype=np.int64)
    n = cand.shape[1] if cand.ndim == 2 and cand.shape[0] else (base.shape[1] if base.ndim == 2 else 0)
    cur = base.reshape(-1, n) if base.size else np.zeros((0, n), dtype=np.int64)
    r = rank(cur, p) if cur.size else 0
    keep = []
    for v in cand:
        trial = np.vstack([cur, v])
        rt = rank(trial, p)
        if rt > r:
            keep.append(v % p)
            cur, r = trial, rt
    return np.array(keep, dtype=np.int64).reshape(-1, n)
