"""Conical generating functions as expression trees.

Every node lives on base x fibre = R^{2n} x R^{f} (real, interleaved
coordinates).  A ``Sharp`` node orders its variables as (q; z1, z2, nu1, nu2),
where (z1, nu1) feed the left child and (z2, nu2) the right child.  A point of
the fibre-critical set is described by a witness z in C^n: the cascade
``critical_from_witness`` walks the tree and rebuilds the critical point whose
image under the graph transform is tau(z, phi(z)).
"""

from __future__ import annotations

import contextlib
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lensmaslov.contact_dyn import ComposedMap, ConicalMap, FlowMap, LinearMap, is_c1_small
from lensmaslov.lens_core import LensData, complex_structure, sphere_points, tau, to_complex, to_real
from lensmaslov.quadform import QuadForm, generated_linear_map

NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50

# Sign in front of the coupling term of the sharp product.  Only the mutation
# harness changes it, to confirm that the graph oracle notices a wrong sign.
_COUPLING_SIGN = 1.0
_id_counter = itertools.count()


@contextlib.contextmanager
def coupling_sign_mutation():
    """Temporarily flip the sign of the sharp coupling term."""
    global _COUPLING_SIGN
    old = _COUPLING_SIGN
    _COUPLING_SIGN = -old
    try:
        yield
    finally:
        _COUPLING_SIGN = old


class GeneratingFunctionError(RuntimeError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


def _J(v: np.ndarray, n: int) -> np.ndarray:
    """Multiplication by i on real interleaved vectors (last axis)."""
    return v @ complex_structure(n).T


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


class ConicalGF:
    """Common interface of generating-function tree nodes."""

    n: int
    dim_fibre: int
    lens: LensData | None = None

    @property
    def dim_base(self) -> int:
        return 2 * self.n

    @property
    def dim(self) -> int:
        return self.dim_base + self.dim_fibre

    def value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def generated_map(self) -> ConicalMap:
        raise NotImplementedError

    def critical_from_witness(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Fibre-critical point with witness z, and the image phi(z)."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)

    def action_matrix(self, m: int = 1) -> np.ndarray:
        """Generator acting diagonally on all R^{2n} blocks of base x fibre."""
        lens = self.lens
        if lens is None:
            raise ValueError("generating function carries no lens data")
        blocks = self.dim // (2 * self.n)
        return np.kron(np.eye(blocks), lens.generator_matrix(m))


class Primitive(ConicalGF):
    """Fibreless generating function of a C^1-small conical map.

    F(q) is evaluated by solving (z + phi z)/2 = q with Newton's method (seed
    z = q) and using the Euler identity F(q) = <q, grad F(q)>/2 with
    grad F(q) = i (z - phi z).
    """

    def __init__(self, phi: ConicalMap, lens: LensData | None = None, check: bool = True,
                 tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAXIT, delta: float = 0.1):
        self.phi = phi
        self.n = phi.n
        self.dim_fibre = 0
        self.lens = lens
        self.tol = tol
        self.max_iter = max_iter
        self.id = next(_id_counter)
        if check:
            cert = is_c1_small(phi, delta=delta)
            if not cert.small:
                raise GeneratingFunctionError(f"map is not C^1-small (margin {cert.margin:.3e} < {delta})")

    def solve(self, q: np.ndarray) -> np.ndarray:
        """Complex z with (z + phi z)/2 = q, for real q of shape (..., 2n)."""
        q = np.asarray(q, dtype=float)
        if isinstance(self.phi, LinearMap):
            A = self.phi.A
            x = np.linalg.solve(0.5 * (np.eye(2 * self.n) + A), q[..., None])[..., 0]
            return to_complex(x)
        shape = q.shape
        qf = q.reshape(-1, shape[-1])
        x = qf.copy()
        scale = np.maximum(1.0, np.linalg.norm(qf, axis=-1))
        I = np.eye(2 * self.n)
        todo = np.arange(len(qf))
        D = None
        last = None
        for _ in range(self.max_iter):
            z = to_complex(x[todo])
            G = 0.5 * (x[todo] + to_real(self.phi(z))) - qf[todo]
            res = np.linalg.norm(G, axis=-1)
            ok = res <= self.tol * scale[todo]
            keep = ~ok
            if not keep.any():
                todo = todo[keep]
                break
            # chord steps reuse the Jacobian while the residual contracts fast
            if D is None or last is None or np.any(res[keep] > 0.05 * last[keep]):
                D = 0.5 * (I + self.phi.jacobian(z[keep]))
            else:
                D = D[keep]
            step = np.linalg.solve(D, G[keep][..., None])[..., 0]
            x[todo[keep]] -= step
            todo = todo[keep]
            last = res[keep]
        if todo.size:
            raise GeneratingFunctionError("Newton solve for the primitive did not converge", qf[todo[0]])
        return to_complex(x).reshape(shape[:-1] + (self.n,))

    def gradient(self, x):
        z = self.solve(x)
        return to_real(1j * (z - self.phi(z)))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * _dot(x, self.gradient(x))

    def hessian(self, x):
        """Second derivative 2 J (I - D phi)(I + D phi)^{-1} at real base points."""
        z = self.solve(x)
        D = self.phi.jacobian(z)
        I = np.eye(2 * self.n)
        J = complex_structure(self.n)
        H = 2 * J @ (I - D) @ np.linalg.inv(I + D)
        return 0.5 * (H + np.swapaxes(H, -1, -2))

    def generated_map(self):
        return self.phi

    def critical_from_witness(self, z):
        z = np.asarray(z, dtype=complex)
        w = self.phi(z)
        return to_real((z + w) / 2), w

    def describe(self):
        return {"kind": "primitive", "id": self.id, "n": self.n, "map": self.phi.describe()}


class Quadratic(ConicalGF):
    """A quadratic form used as a tree leaf (fibre block must be invertible)."""

    def __init__(self, Q: QuadForm):
        self.Q = Q
        self.n = Q.n
        self.dim_fibre = Q.dim_fibre
        self.lens = Q.lens
        self._A = None

    def value(self, x):
        return self.Q(x)

    def gradient(self, x):
        return np.asarray(x, dtype=float) @ self.Q.matrix

    def linear_map(self) -> np.ndarray:
        if self._A is None:
            self._A = generated_linear_map(self.Q)
        return self._A

    def generated_map(self):
        return LinearMap(self.linear_map())

    def critical_from_witness(self, z):
        A = self.linear_map()
        x = to_real(z)
        w = x @ A.T
        q = 0.5 * (x + w)
        if self.dim_fibre:
            a, b, c = self.Q.blocks()
            nu = -np.linalg.solve(c, (q @ b)[..., None])[..., 0] if q.ndim > 1 else -np.linalg.solve(c, q @ b)
            q = np.concatenate([q, nu], axis=-1)
        return q, to_complex(w)

    def describe(self):
        return {"kind": "quadratic", "n": self.n, "N": self.Q.N, "matrix": self.Q.matrix.tolist()}


class Sharp(ConicalGF):
    """F1 # F2 (q; z1, z2, nu1, nu2) = F1(z1, nu1) + F2(z2, nu2) - 2 <z2 - q, i (z1 - q)>."""

    def __init__(self, left: ConicalGF, right: ConicalGF):
        if left.n != right.n:
            raise ValueError(f"base dimensions differ: {left.dim_base} vs {right.dim_base}")
        self.left = left
        self.right = right
        self.n = left.n
        self.dim_fibre = 2 * self.dim_base + left.dim_fibre + right.dim_fibre
        self.lens = left.lens if left.lens is not None else right.lens

    def split(self, x):
        d = self.dim_base
        f1 = self.left.dim_fibre
        q = x[..., :d]
        z1 = x[..., d:2 * d]
        z2 = x[..., 2 * d:3 * d]
        nu1 = x[..., 3 * d:3 * d + f1]
        nu2 = x[..., 3 * d + f1:]
        return q, z1, z2, nu1, nu2

    def value(self, x):
        x = np.asarray(x, dtype=float)
        q, z1, z2, nu1, nu2 = self.split(x)
        v1 = self.left.value(np.concatenate([z1, nu1], axis=-1))
        v2 = self.right.value(np.concatenate([z2, nu2], axis=-1))
        coupling = -2.0 * _dot(z2 - q, _J(z1 - q, self.n))
        return v1 + v2 + _COUPLING_SIGN * coupling

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        d = self.dim_base
        q, z1, z2, nu1, nu2 = self.split(x)
        g1 = self.left.gradient(np.concatenate([z1, nu1], axis=-1))
        g2 = self.right.gradient(np.concatenate([z2, nu2], axis=-1))
        s = _COUPLING_SIGN
        return np.concatenate(
            [
                s * 2 * _J(z1 - z2, self.n),
                g1[..., :d] + s * 2 * _J(z2 - q, self.n),
                g2[..., :d] - s * 2 * _J(z1 - q, self.n),
                g1[..., d:],
                g2[..., d:],
            ],
            axis=-1,
        )

    def generated_map(self):
        return ComposedMap([self.left.generated_map(), self.right.generated_map()])

    def critical_from_witness(self, z):
        d = self.dim_base
        x1, z2 = self.left.critical_from_witness(z)
        x2, z3 = self.right.critical_from_witness(z2)
        q = to_real((np.asarray(z, dtype=complex) + z3) / 2)
        return np.concatenate([q, x1[..., :d], x2[..., :d], x1[..., d:], x2[..., d:]], axis=-1), z3

    def describe(self):
        return {"kind": "sharp", "left": self.left.describe(), "right": self.right.describe()}


class MultiSharp(ConicalGF):
    """Even number of fibreless factors composed in one step.

    F(q; z1..zN) = sum F_j(z_j) + 2 sum_j (-1)^j <z_j, i q>
                   + 2 sum_{j<l} (-1)^{j+l-1} <z_j, i z_l>,
    generating phi_N o ... o phi_1.
    """

    def __init__(self, children: Sequence[ConicalGF]):
        children = list(children)
        if len(children) % 2:
            raise ValueError("the multi-factor product needs an even number of factors")
        if any(c.dim_fibre for c in children):
            raise ValueError("factors of the multi-factor product must be fibreless")
        if len({c.n for c in children}) != 1:
            raise ValueError("factors have different base dimensions")
        self.children = children
        self.n = children[0].n
        self.dim_fibre = self.dim_base * len(children)
        self.lens = next((c.lens for c in children if c.lens is not None), None)

    def _zetas(self, x):
        d = self.dim_base
        return [x[..., d * (j + 1):d * (j + 2)] for j in range(len(self.children))]

    def value(self, x):
        x = np.asarray(x, dtype=float)
        q = x[..., :self.dim_base]
        zs = self._zetas(x)
        out = sum(c.value(z) for c, z in zip(self.children, zs))
        N = len(zs)
        for j in range(1, N + 1):
            out = out + 2 * (-1) ** j * _dot(zs[j - 1], _J(q, self.n))
            for l in range(j + 1, N + 1):
                out = out + 2 * (-1) ** (j + l - 1) * _dot(zs[j - 1], _J(zs[l - 1], self.n))
        return out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        q = x[..., :self.dim_base]
        zs = self._zetas(x)
        N = len(zs)
        gq = np.zeros_like(q)
        gz = [c.gradient(z) for c, z in zip(self.children, zs)]
        for j in range(1, N + 1):
            s = 2 * (-1) ** j
            gz[j - 1] = gz[j - 1] + s * _J(q, self.n)
            gq = gq - s * _J(zs[j - 1], self.n)
            for l in range(j + 1, N + 1):
                s = 2 * (-1) ** (j + l - 1)
                gz[j - 1] = gz[j - 1] + s * _J(zs[l - 1], self.n)
                gz[l - 1] = gz[l - 1] - s * _J(zs[j - 1], self.n)
        return np.concatenate([gq] + gz, axis=-1)

    def generated_map(self):
        return ComposedMap([c.generated_map() for c in self.children])

    def critical_from_witness(self, z):
        z0 = np.asarray(z, dtype=complex)
        cur = z0
        parts = []
        for c in self.children:
            xz, nxt = c.critical_from_witness(cur)
            parts.append(xz)
            cur = nxt
        q = to_real((z0 + cur) / 2)
        return np.concatenate([q] + parts, axis=-1), cur

    def describe(self):
        return {"kind": "multisharp", "children": [c.describe() for c in self.children]}


class Stabilize(ConicalGF):
    """F(x) + mu^T C mu / 2 in extra fibre variables mu (C nondegenerate)."""

    def __init__(self, child: ConicalGF, fibre_form: np.ndarray):
        C = np.asarray(fibre_form, dtype=float)
        if C.shape[0] % (2 * child.n):
            raise ValueError("stabilising form must have dimension a multiple of 2n")
        self.child = child
        self.C = 0.5 * (C + C.T)
        self.n = child.n
        self.dim_fibre = child.dim_fibre + C.shape[0]
        self.lens = child.lens

    def value(self, x):
        x = np.asarray(x, dtype=float)
        m = self.child.dim
        mu = x[..., m:]
        return self.child.value(x[..., :m]) + 0.5 * np.einsum("...i,ij,...j->...", mu, self.C, mu)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        m = self.child.dim
        return np.concatenate([self.child.gradient(x[..., :m]), x[..., m:] @ self.C], axis=-1)

    def generated_map(self):
        return self.child.generated_map()

    def critical_from_witness(self, z):
        x, w = self.child.critical_from_witness(z)
        mu = np.zeros(x.shape[:-1] + (self.C.shape[0],))
        return np.concatenate([x, mu], axis=-1), w

    def describe(self):
        return {"kind": "stabilize", "child": self.child.describe(), "form": self.C.tolist()}


class DirectSum:
    """(F1 + F2)(z1, z2; nu1, nu2) = F1(z1, nu1) + F2(z2, nu2) on a doubled base."""

    def __init__(self, F1: ConicalGF, F2: ConicalGF):
        self.F1 = F1
        self.F2 = F2
        self.dim = F1.dim + F2.dim

    def split(self, x):
        d1, d2 = self.F1.dim_base, self.F2.dim_base
        f1 = self.F1.dim_fibre
        z1 = x[..., :d1]
        z2 = x[..., d1:d1 + d2]
        nu1 = x[..., d1 + d2:d1 + d2 + f1]
        nu2 = x[..., d1 + d2 + f1:]
        return z1, z2, nu1, nu2

    def value(self, x):
        x = np.asarray(x, dtype=float)
        z1, z2, nu1, nu2 = self.split(x)
        return self.F1.value(np.concatenate([z1, nu1], axis=-1)) + self.F2.value(np.concatenate([z2, nu2], axis=-1))


def sharp(F1: ConicalGF, F2: ConicalGF) -> Sharp:
    return Sharp(F1, F2)


def sharp_multi(factors: Sequence[ConicalGF]) -> MultiSharp:
    return MultiSharp(factors)


def primitive_gf(phi: ConicalMap, lens: LensData | None = None, **kw) -> Primitive:
    return Primitive(phi, lens, **kw)


def quasiadd_embedding(F1: ConicalGF, F2: ConicalGF, x: np.ndarray) -> np.ndarray:
    """iota(z1, z2; nu1, nu2) = (z1; z1, z2, nu1, nu2)."""
    d = F1.dim_base
    z1 = x[..., :d]
    return np.concatenate([z1, x], axis=-1)


def quasiadd_embed(F1: ConicalGF, F2: ConicalGF, samples: int = 1000, seed: int = 0, scale: float = 1.0) -> float:
    """Max |(F1 # F2)(iota x) - (F1 + F2)(x)| over random x of norm ``scale``."""
    if F1.n != F2.n:
        raise ValueError("base dimensions differ")
    rng = np.random.default_rng(seed)
    S = DirectSum(F1, F2)
    x = rng.standard_normal((samples, S.dim))
    x *= scale / np.linalg.norm(x, axis=1, keepdims=True)
    lhs = Sharp(F1, F2).value(quasiadd_embedding(F1, F2, x))
    rhs = S.value(x)
    return float(np.max(np.abs(lhs - rhs)))


# ----------------------------------------------------------------------------
# Fibre-critical points


@dataclass
class FibreCriticalPoint:
    x: np.ndarray
    witness: np.ndarray
    image_q: np.ndarray
    image_p: np.ndarray
    vertical_residual: float

    def as_dict(self):
        return {
            "x": self.x.tolist(),
            "witness": to_real(self.witness).tolist(),
            "image_q": self.image_q.tolist(),
            "image_p": self.image_p.tolist(),
            "vertical_residual": self.vertical_residual,
        }


def fibre_critical(F: ConicalGF, witnesses: np.ndarray, tol: float = 1e-9) -> list[FibreCriticalPoint]:
    """Fibre-critical points parametrised by witnesses z in C^n.

    The image (q, dF/dq) is read off from the tree gradient, so it checks the
    composition rule rather than restating the cascade.

    Raises:
        GeneratingFunctionError: when a vertical derivative exceeds ``tol``.
    """
    witnesses = np.atleast_2d(np.asarray(witnesses, dtype=complex))
    x, _ = F.critical_from_witness(witnesses)
    g = F.gradient(x)
    d = F.dim_base
    scale = np.maximum(1.0, np.linalg.norm(x, axis=-1))
    vres = np.linalg.norm(g[..., d:], axis=-1) / scale if F.dim_fibre else np.zeros(len(x))
    out = []
    for j in range(len(x)):
        if vres[j] > tol:
            raise GeneratingFunctionError(f"vertical derivative {vres[j]:.3e} exceeds {tol}", witnesses[j])
        out.append(FibreCriticalPoint(x[j], witnesses[j], x[j, :d], g[j, :d], float(vres[j])))
    return out


def fibre_critical_at_base(F: ConicalGF, q: np.ndarray, tol: float = 1e-11, max_iter: int = 50, fd: float = 1e-6) -> np.ndarray:
    """Solve the vertical equations dF/d(fibre)(q, xi) = 0 for xi at fixed base q.

    Newton's method with a finite-difference fibre Hessian, seeded by the
    cascade at witness q.  Independent of the closed-form cascade except for
    the seed.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    d = F.dim_base
    f = F.dim_fibre
    if f == 0:
        return q.copy()
    x0, _ = F.critical_from_witness(to_complex(q))
    xi = x0[:, d:].copy()
    E = np.eye(f)
    for _ in range(max_iter):
        full = np.concatenate([q, xi], axis=-1)
        r = F.gradient(full)[:, d:]
        if np.max(np.linalg.norm(r, axis=-1)) <= tol * max(1.0, np.max(np.linalg.norm(q, axis=-1))):
            return full
        B = len(q)
        shifted = xi[None] + fd * np.concatenate([E, -E])[:, None, :]
        qq = np.broadcast_to(q, (2 * f,) + q.shape)
        gr = F.gradient(np.concatenate([qq, shifted], axis=-1))[..., d:]
        Hm = np.transpose((gr[:f] - gr[f:]) / (2 * fd), (1, 2, 0))
        xi = xi - np.linalg.solve(Hm, r[..., None])[..., 0]
    raise GeneratingFunctionError("fibre Newton solve did not converge", q[0])


def graph_error(F: ConicalGF, oracle: ConicalMap, witnesses: np.ndarray) -> dict:
    """Compare i_F of the fibre-critical set with the graph of an oracle map.

    Returns the maximal distance between (q, dF/dq) at the cascade points and
    tau(z, oracle(z)), and the maximal vertical derivative.
    """
    witnesses = np.atleast_2d(np.asarray(witnesses, dtype=complex))
    x, _ = F.critical_from_witness(witnesses)
    g = F.gradient(x)
    d = F.dim_base
    qo, po = tau(witnesses, oracle(witnesses))
    err_q = np.linalg.norm(x[:, :d] - to_real(qo), axis=-1)
    err_p = np.linalg.norm(g[:, :d] - to_real(po), axis=-1)
    vert = np.linalg.norm(g[:, d:], axis=-1) if F.dim_fibre else np.zeros(len(x))
    return {
        "graph_error": float(np.max(np.maximum(err_q, err_p))),
        "vertical_residual": float(np.max(vert)),
    }


def base_graph_error(F: ConicalGF, oracle: ConicalMap, q: np.ndarray) -> float:
    """Graph mismatch at fibre-critical points found by Newton over given base points."""
    x = fibre_critical_at_base(F, q)
    d = F.dim_base
    p = F.gradient(x)[:, :d]
    z, Z = (to_complex(x[:, :d]) - 0.5j * to_complex(p)), (to_complex(x[:, :d]) + 0.5j * to_complex(p))
    return float(np.max(np.linalg.norm(oracle(z) - Z, axis=-1)))


# ----------------------------------------------------------------------------
# Structural checks


def check_invariants(F: ConicalGF, samples: int = 1000, seed: int = 0, fd: float = 1e-6, gradient_samples: int = 20) -> dict:
    """Sampled homogeneity, Z_k-invariance and gradient consistency defects."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, F.dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    v = F.value(x)
    lam = rng.uniform(0.3, 3.0, samples)
    hom = np.abs(F.value(x * lam[:, None]) - lam ** 2 * v) / np.maximum(1.0, np.abs(lam ** 2 * v))
    out = {"homogeneity": float(hom.max())}
    if F.lens is not None:
        R = F.action_matrix()
        out["invariance"] = float(np.max(np.abs(F.value(x @ R.T) - v)))
    xs = x[:gradient_samples]
    g = F.gradient(xs)
    E = fd * np.eye(F.dim)
    vals = F.value(np.concatenate([xs[None] + E[:, None], xs[None] - E[:, None]]))
    fdg = ((vals[:F.dim] - vals[F.dim:]) / (2 * fd)).T
    out["gradient"] = float(np.max(np.abs(g - fdg)))
    return out


def flow_family(H, breakpoints: Sequence[float], t: float, lens: LensData | None = None, check: bool = False) -> ConicalGF:
    """Generating function of phi_t assembled from the pieces of a decomposition.

    Piece j is the flow over clamp(t - t_{j-1}, 0, t_j - t_{j-1}), so it is
    constant outside its own interval; the pieces are combined left to right.
    """
    pieces = []
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        s = min(max(t - a, 0.0), b - a)
        pieces.append(Primitive(FlowMap(H, s), lens, check=check))
    F = pieces[0]
    for P in pieces[1:]:
        F = Sharp(F, P)
    return F


def monotone_family_check(H, T: float, breakpoints: Sequence[float] | None = None, times: int = 9,
                          samples: int = 64, seed: int = 0, dt: float = 1e-4) -> dict:
    """Sample d/dt F_t by central differences on the unit sphere of the total space.

    Returns the minimum and maximum sampled derivative over ``times`` interior
    times; the family is built by ``flow_family`` on the given breakpoints
    (by default ``decompose(H, T)``).
    """
    from lensmaslov.contact_dyn import decompose

    if breakpoints is None:
        breakpoints = decompose(H, T)
    probe = flow_family(H, breakpoints, 0.0)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, probe.dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    lo, hi = np.inf, -np.inf
    ts = np.linspace(0, T, times + 2)[1:-1]
    for t in ts:
        dF = (flow_family(H, breakpoints, t + dt).value(x) - flow_family(H, breakpoints, t - dt).value(x)) / (2 * dt)
        lo = min(lo, float(dF.min()))
        hi = max(hi, float(dF.max()))
    return {"min_derivative": lo, "max_derivative": hi, "times": ts.tolist(), "pieces": len(breakpoints) - 1}
