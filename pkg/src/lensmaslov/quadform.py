"""Quadratic generating forms: inertia index, the sharp product and identity reduction.

A ``QuadForm`` is Q(v) = v^T M v / 2 on base x fibre = R^{2n} x R^{2nN}.  The
product ``sharp_quad`` orders its variables as (q; z1, z2, nu1, nu2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lensmaslov.lens_core import LensData, complex_structure

INERTIA_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class QuadForm:
    matrix: np.ndarray
    n: int
    N: int
    lens: LensData | None = None

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        dim = 2 * self.n * (1 + self.N)
        if self.n == 0:
            dim = M.shape[0]
        if M.shape != (dim, dim):
            raise ValueError(f"matrix shape {M.shape} does not match n={self.n}, N={self.N}")
        if M.size and np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
            raise ValueError("matrix is not symmetric")
        M = 0.5 * (M + M.T)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim_base(self) -> int:
        return 2 * self.n

    @property
    def dim_fibre(self) -> int:
        return self.dim - self.dim_base

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", v, self.matrix, v)

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Base-base, base-fibre and fibre-fibre blocks (a, b, c)."""
        d = self.dim_base
        M = self.matrix
        return M[:d, :d], M[:d, d:], M[d:, d:]

    def action_matrix(self, m: int = 1) -> np.ndarray:
        """Generator acting on every R^{2n} factor of base and fibre."""
        if self.lens is None:
            raise ValueError("form carries no lens data")
        return np.kron(np.eye(self.dim // (2 * self.n)), self.lens.generator_matrix(m))

    def invariance_defect(self) -> float:
        R = self.action_matrix()
        return float(np.max(np.abs(R.T @ self.matrix @ R - self.matrix)))

    def with_lens(self, lens: LensData) -> "QuadForm":
        return QuadForm(self.matrix, self.n, self.N, lens)


ABS_SCALE_FLOOR = 1e-4


def inertia(matrix: np.ndarray, tol: float = INERTIA_TOL) -> tuple[int, int, int]:
    """(negative, zero, positive) eigenvalue counts with a relative zero band."""
    M = np.asarray(matrix, dtype=float)
    if M.size == 0:
        return 0, 0, 0
    try:
        w = np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"eigenvalue solver failed on a {M.shape} matrix (norm {np.linalg.norm(M):.3e})"
        ) from exc
    scale = np.max(np.abs(w))
    # relative band, with a floor so that round-off around the zero form stays in the kernel
    band = tol * max(scale, ABS_SCALE_FLOOR)
    neg = int(np.sum(w < -band))
    zero = int(np.sum(np.abs(w) <= band))
    return neg, zero, len(w) - neg - zero


def index_i(Q, tol: float = INERTIA_TOL) -> int:
    """Largest dimension of a subspace on which Q is negative semi-definite."""
    M = Q.matrix if isinstance(Q, QuadForm) else Q
    neg, zero, _ = inertia(M, tol)
    return neg + zero


def spectral_gap(Q) -> float:
    """Smallest |eigenvalue| relative to the spectral radius."""
    M = Q.matrix if isinstance(Q, QuadForm) else np.asarray(Q)
    w = np.abs(np.linalg.eigvalsh(M))
    return float(w.min() / w.max()) if w.max() > 0 else 0.0


def zero_form(n: int, lens: LensData | None = None) -> QuadForm:
    return QuadForm(np.zeros((2 * n, 2 * n)), n, 0, lens)


def coupling_matrix(n: int, dim: int, q: slice, z1: slice, z2: slice) -> np.ndarray:
    """Matrix of -2 <z2 - q, i (z1 - q)> as v^T C v / 2 on R^dim."""
    d = 2 * n
    E = np.eye(dim)
    P1 = E[z1] - E[q]
    P2 = E[z2] - E[q]
    J = complex_structure(n)
    X = P2.T @ J @ P1
    assert P1.shape == (d, dim)
    return -2.0 * (X + X.T)


def sharp_quad(Q1: QuadForm, Q2: QuadForm) -> QuadForm:
    """The composition product on quadratic forms, variables (q; z1, z2, nu1, nu2)."""
    if Q1.n != Q2.n:
        raise ValueError(f"base dimensions differ: {2 * Q1.n} vs {2 * Q2.n}")
    n = Q1.n
    d = 2 * n
    f1, f2 = Q1.dim_fibre, Q2.dim_fibre
    dim = 3 * d + f1 + f2
    M = np.zeros((dim, dim))
    # slots of (z1, nu1) and (z2, nu2) inside the product
    s1 = np.r_[d:2 * d, 3 * d:3 * d + f1]
    s2 = np.r_[2 * d:3 * d, 3 * d + f1:dim]
    M[np.ix_(s1, s1)] += Q1.matrix
    M[np.ix_(s2, s2)] += Q2.matrix
    M += coupling_matrix(n, dim, slice(0, d), slice(d, 2 * d), slice(2 * d, 3 * d))
    lens = Q1.lens if Q1.lens is not None else Q2.lens
    return QuadForm(M, n, Q1.N + Q2.N + 2, lens)


def sharp_chain(forms: Sequence[QuadForm]) -> QuadForm:
    """Left-nested product ((Q1 # Q2) # Q3) ... ; a single form is returned as is."""
    out = forms[0]
    for Q in forms[1:]:
        out = sharp_quad(out, Q)
    return out


def direct_sum(Q1: QuadForm, Q2: QuadForm) -> np.ndarray:
    """Block-diagonal matrix of Q1 + Q2 on independent variables."""
    d1, d2 = Q1.dim, Q2.dim
    M = np.zeros((d1 + d2, d1 + d2))
    M[:d1, :d1] = Q1.matrix
    M[d1:, d1:] = Q2.matrix
    return M


def stabilize(Q: QuadForm, fibre_matrix: np.ndarray) -> QuadForm:
    """Append a fibre-only quadratic form in new fibre variables."""
    C = np.asarray(fibre_matrix, dtype=float)
    extra = C.shape[0]
    if extra % (2 * Q.n):
        raise ValueError("stabilising form must have dimension a multiple of 2n")
    M = np.zeros((Q.dim + extra, Q.dim + extra))
    M[:Q.dim, :Q.dim] = Q.matrix
    M[Q.dim:, Q.dim:] = C
    return QuadForm(M, Q.n, Q.N + extra // (2 * Q.n), Q.lens)


def zero_tower(n: int, shape, lens: LensData | None = None) -> QuadForm:
    """Iterated product of zero forms following a nested-tuple bracketing.

    ``shape`` is ``0`` for a single zero form, or a pair (left, right) of shapes.
    """
    if shape == 0:
        return zero_form(n, lens)
    left, right = shape
    return sharp_quad(zero_tower(n, left, lens), zero_tower(n, right, lens))


def bracketings(m: int) -> list:
    """All binary bracketings of m leaves, leaves written as 0."""
    if m == 1:
        return [0]
    out = []
    for j in range(1, m):
        for left in bracketings(j):
            for right in bracketings(m - j):
                out.append((left, right))
    return out


def leaf_count(shape) -> int:
    return 1 if shape == 0 else leaf_count(shape[0]) + leaf_count(shape[1])


def diagonal_kernel(n: int, N: int) -> np.ndarray:
    """Basis (columns) of V = {(z; z, ..., z)} inside R^{2n(1+N)}."""
    return np.vstack([np.eye(2 * n)] * (1 + N))


def null_space(Q: QuadForm, tol: float = INERTIA_TOL) -> np.ndarray:
    w, v = np.linalg.eigh(Q.matrix)
    band = tol * max(np.max(np.abs(w)), 1e-300)
    return v[:, np.abs(w) <= band]


def reeb_quad(t: float, n: int = 1, lens: LensData | None = None, tol: float = 1e-9) -> QuadForm:
    """Form tan(pi t) <z, z> generating the rotation e^{2 pi i t}; no fibre."""
    c = 1 + math.cos(2 * math.pi * t)
    if c <= tol:
        raise ValueError(f"t={t}: rotation by 2 pi t is not generated by a form on the base")
    lam = math.sin(2 * math.pi * t) / c
    return QuadForm(2 * lam * np.eye(2 * n), n, 0, lens)


def primitive_quad(A: np.ndarray, lens: LensData | None = None, delta: float = 0.0) -> QuadForm:
    """Fibreless form generating the linear symplectic map A (needs I + A invertible).

    The form is S = 2 J (I - A)(I + A)^{-1}: with q = (z + Az)/2 its gradient
    S q equals i (z - Az).
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    n = d // 2
    I = np.eye(d)
    s = np.linalg.svd(0.5 * (I + A), compute_uv=False)
    if s.min() <= delta:
        raise ValueError(f"map is not small: smallest singular value of (I+A)/2 is {s.min():.3e}")
    J = complex_structure(n)
    S = 2 * J @ (I - A) @ np.linalg.inv(I + A)
    return QuadForm(0.5 * (S + S.T), n, 0, lens)


def reduce_fibre(Q: QuadForm) -> np.ndarray:
    """Base form a - b c^{-1} b^T obtained by solving the fibre-critical equations."""
    a, b, c = Q.blocks()
    if Q.dim_fibre == 0:
        return a.copy()
    return a - b @ np.linalg.solve(c, b.T)


def generated_linear_map(Q: QuadForm) -> np.ndarray:
    """Linear symplectic map whose graph is generated by Q (fibre block must be invertible)."""
    S = reduce_fibre(Q)
    n = Q.n
    J = complex_structure(n)
    T = -0.5 * J @ S
    I = np.eye(2 * n)
    return (I - T) @ np.linalg.inv(I + T)


def reduce_identity_form(Q: QuadForm, tol: float = 1e-8) -> tuple[QuadForm, np.ndarray]:
    """Shear (z, nu) -> (z, nu - c^{-1} b^T z) making an identity-generating form fibre-only.

    Returns:
        The fibre form nu^T c nu / 2 (no base) and the shear matrix Psi with
        Q(Psi v) independent of the base variable.

    Raises:
        ValueError: if c is singular or a - b c^{-1} b^T is not zero.
    """
    a, b, c = Q.blocks()
    d = Q.dim_base
    if c.size == 0 or np.linalg.matrix_rank(c) < c.shape[0]:
        raise ValueError("not an identity-generating form: fibre block is singular")
    cinv_bt = np.linalg.solve(c, b.T)
    schur = a - b @ cinv_bt
    scale = max(1.0, np.max(np.abs(Q.matrix)))
    if np.max(np.abs(schur)) > tol * scale:
        raise ValueError(f"not an identity-generating form: |a - b c^-1 b^T| = {np.max(np.abs(schur)):.3e}")
    Psi = np.eye(Q.dim)
    Psi[d:, :d] = -cinv_bt
    reduced = Psi.T @ Q.matrix @ Psi
    if np.max(np.abs(reduced[:d, :])) > 1e-9 * scale:
        raise ValueError("shear failed to remove the base variable")
    fibre = QuadForm(c, 0, 0, None)
    return fibre, Psi


def form_to_text(Q: QuadForm) -> str:
    k = Q.lens.k if Q.lens is not None else 0
    lines = [f"quadform {Q.n} {Q.N} {k}"]
    if Q.lens is not None:
        lines.append("weights " + " ".join(str(w) for w in Q.lens.weights))
    for row in Q.matrix:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def form_from_text(text: str) -> QuadForm:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "quadform" or len(head) != 4:
        raise ValueError("expected header 'quadform n N k'")
    n, N, k = int(head[1]), int(head[2]), int(head[3])
    rows = lines[1:]
    lens = None
    if rows and rows[0].startswith("weights"):
        lens = LensData(k, tuple(int(w) for w in rows[0].split()[1:]))
        rows = rows[1:]
    elif k:
        lens = LensData.standard(k, n)
    M = np.array([[float(x) for x in r.split()] for r in rows])
    return QuadForm(M, n, N, lens)
