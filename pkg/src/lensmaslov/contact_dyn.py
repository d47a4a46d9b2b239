"""Conical maps, C^1-smallness, time decomposition, translated and discriminant points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from lensmaslov.lens_core import (
    DEFAULT_STEP,
    LensData,
    hamiltonian_flow,
    rotation_matrix,
    sphere_points,
    to_complex,
    to_real,
)

SMALL_DELTA = 0.1
FD_STEP = 1e-6


class ConicalMap:
    """Base class: a map of C^n commuting with positive scalings.

    Subclasses implement ``__call__`` on complex arrays of shape (..., n).
    """

    n: int

    def __call__(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        """Real Jacobian (..., 2n, 2n) by central differences."""
        x = to_real(z)
        d = 2 * self.n
        lead = x.shape[:-1]
        h = FD_STEP * np.maximum(1.0, np.linalg.norm(x, axis=-1, keepdims=True))
        E = np.eye(d).reshape((d,) + (1,) * len(lead) + (d,))
        stack = np.concatenate([x[None] + E * h[None], x[None] - E * h[None]])
        out = to_real(self(to_complex(stack)))
        diff = (out[:d] - out[d:]) / (2 * h[None])
        return np.moveaxis(diff, 0, -1)

    def inverse(self) -> "ConicalMap":
        raise NotImplementedError

    def then(self, other: "ConicalMap") -> "ComposedMap":
        """other o self."""
        return ComposedMap([self, other])

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


class FlowMap(ConicalMap):
    """Time-t map of the lifted flow of a contact Hamiltonian, by RK4."""

    def __init__(self, H, t: float, step: float = DEFAULT_STEP):
        self.H = H
        self.n = H.n
        self.t = float(t)
        self.step = step

    def __call__(self, z):
        return hamiltonian_flow(self.H, z, self.t, self.step)

    def inverse(self):
        return FlowMap(self.H, -self.t, self.step)

    def describe(self):
        return {"kind": "flow", "hamiltonian": self.H.spec(), "t": self.t, "step": self.step}


class LinearMap(ConicalMap):
    """A real-linear map given by a 2n x 2n matrix."""

    def __init__(self, A: np.ndarray):
        self.A = np.asarray(A, dtype=float)
        self.n = self.A.shape[0] // 2

    def __call__(self, z):
        return to_complex(to_real(z) @ self.A.T)

    def jacobian(self, z):
        z = np.asarray(z)
        return np.broadcast_to(self.A, z.shape[:-1] + self.A.shape).copy()

    def inverse(self):
        return LinearMap(np.linalg.inv(self.A))

    def describe(self):
        return {"kind": "linear", "matrix": self.A.tolist()}


class RotationMap(LinearMap):
    """z -> e^{i theta} z."""

    def __init__(self, n: int, theta: float):
        super().__init__(rotation_matrix([theta] * n))
        self.theta = float(theta)

    def __call__(self, z):
        return np.exp(1j * self.theta) * np.asarray(z, dtype=complex)

    def inverse(self):
        return RotationMap(self.n, -self.theta)

    def describe(self):
        return {"kind": "rotation", "theta": self.theta, "n": self.n}


class ComposedMap(ConicalMap):
    """maps[-1] o ... o maps[0]."""

    def __init__(self, maps: Sequence[ConicalMap]):
        self.maps = list(maps)
        self.n = self.maps[0].n

    def __call__(self, z):
        for m in self.maps:
            z = m(z)
        return z

    def jacobian(self, z):
        z = np.asarray(z, dtype=complex)
        D = None
        for m in self.maps:
            Dm = m.jacobian(z)
            D = Dm if D is None else Dm @ D
            z = m(z)
        return D

    def inverse(self):
        return ComposedMap([m.inverse() for m in reversed(self.maps)])

    def describe(self):
        return {"kind": "composed", "maps": [m.describe() for m in self.maps]}


# ----------------------------------------------------------------------------
# C^1-smallness and decomposition


@dataclass
class SmallnessCertificate:
    small: bool
    margin: float
    delta: float

    def __bool__(self):
        return self.small


def smallness_margin(phi: ConicalMap, samples: int = 64, seed: int = 0) -> float:
    """Min over sphere samples of the least singular value of (I + D phi)/2."""
    if isinstance(phi, LinearMap):
        D = phi.A[None]
    else:
        D = phi.jacobian(sphere_points(phi.n, samples, seed))
    I = np.eye(2 * phi.n)
    s = np.linalg.svd(0.5 * (I + D), compute_uv=False)
    return float(s.min())


def is_c1_small(phi: ConicalMap, delta: float = SMALL_DELTA, samples: int = 64, seed: int = 0) -> SmallnessCertificate:
    """Certify that (z + phi z)/2 = q is uniquely solvable, with a margin.

    The derivative of a conical map is homogeneous of degree 0, so sampling the
    unit sphere covers every direction.
    """
    m = smallness_margin(phi, samples, seed)
    return SmallnessCertificate(m >= delta, m, delta)


def _piece_ok(H, length: float, delta: float, samples: int, substeps: int = 4) -> bool:
    """Certify the flow pieces of lengths length/substeps, ..., length in one pass."""
    if length == 0:
        return True
    n = H.n
    d = 2 * n
    x = to_real(sphere_points(n, samples, 0))
    E = np.eye(d)[:, None, :]
    h = FD_STEP
    stack = to_complex(np.concatenate([x[None] + h * E, x[None] - h * E]))
    I = np.eye(d)
    for _ in range(substeps):
        stack = hamiltonian_flow(H, stack, length / substeps)
        out = to_real(stack)
        D = np.moveaxis((out[:d] - out[d:]) / (2 * h), 0, -1)
        if np.linalg.svd(0.5 * (I + D), compute_uv=False).min() < delta:
            return False
    return True


def longest_small_time(H, T: float, delta: float = SMALL_DELTA, samples: int = 32, cap: int = 64, rel_tol: float = 1e-2) -> float:
    """Largest piece length s <= T (up to rel_tol) whose flow pieces are all certified."""
    if _piece_ok(H, T, delta, samples):
        return T
    s = T / 2
    while not _piece_ok(H, s, delta, samples):
        s /= 2
        if abs(s) < abs(T) / (4 * cap):
            raise ValueError(f"no certified piece longer than T/{4 * cap}; use a smaller T")
    lo, hi = s, 2 * s
    while abs(hi - lo) > rel_tol * abs(lo):
        mid = 0.5 * (lo + hi)
        if _piece_ok(H, mid, delta, samples):
            lo = mid
        else:
            hi = mid
    return lo


def decompose(H, T: float, delta: float = SMALL_DELTA, cap: int = 64, strategy: str = "uniform", samples: int = 32) -> list[float]:
    """Breakpoints 0 = t0 < ... < tN = T with every piece certified C^1-small.

    ``strategy="greedy"`` takes pieces of the longest certified length;
    ``"uniform"`` uses the fewest equal pieces that certify.
    """
    T = float(T)
    if T == 0:
        return [0.0, 0.0]
    s = abs(longest_small_time(H, T, delta, samples, cap))
    N = math.ceil(abs(T) / s - 1e-9)
    if N > cap:
        raise ValueError(f"decomposition needs {N} > {cap} pieces; use a smaller T")
    if strategy == "uniform":
        while N <= cap:
            if _piece_ok(H, T / N, delta, samples):
                return [T * j / N for j in range(N + 1)]
            N += 1
        raise ValueError(f"no uniform decomposition with at most {cap} pieces")
    if strategy != "greedy":
        raise ValueError(f"unknown strategy {strategy!r}")
    sign = 1.0 if T > 0 else -1.0
    pts = [0.0]
    while abs(pts[-1]) < abs(T) - 1e-15:
        pts.append(sign * min(abs(pts[-1]) + s, abs(T)))
        if len(pts) - 1 > cap:
            raise ValueError(f"decomposition exceeds {cap} pieces; use a smaller T")
    return pts


# ----------------------------------------------------------------------------
# Translated points


@dataclass
class TranslatedPoint:
    p: np.ndarray
    eta: float
    winding: int
    nondegenerate: bool
    residual: float
    sigma_min: float

    def as_dict(self) -> dict:
        return {
            "p": [[float(c.real), float(c.imag)] for c in self.p],
            "eta": self.eta,
            "winding": self.winding,
            "nondegenerate": self.nondegenerate,
            "residual": self.residual,
            "sigma_min": self.sigma_min,
        }


@dataclass
class TranslatedPointSearch:
    points: list[TranslatedPoint]
    degenerate_family: bool
    converged: int
    seeds: int
    warnings: list[str] = field(default_factory=list)

    @property
    def nondegenerate(self) -> list[TranslatedPoint]:
        return [p for p in self.points if p.nondegenerate]


def _bordered_jacobian(D: np.ndarray, p: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Jacobian of (phi(p) - e^{i eta} p, |p|^2 - 1) in (p, eta); batched."""
    B, d = D.shape[0], D.shape[1]
    n = d // 2
    c, s = np.cos(eta), np.sin(eta)
    R = np.zeros((B, d, d))
    for j in range(n):
        R[:, 2 * j, 2 * j] = c
        R[:, 2 * j, 2 * j + 1] = -s
        R[:, 2 * j + 1, 2 * j] = s
        R[:, 2 * j + 1, 2 * j + 1] = c
    x = to_real(p)
    col = to_real(-1j * np.exp(1j * eta)[:, None] * p)
    Jm = np.zeros((B, d + 1, d + 1))
    Jm[:, :d, :d] = D - R
    Jm[:, :d, d] = col
    Jm[:, d, :d] = 2 * x
    return Jm


def translated_points(
    phi: ConicalMap,
    lens: LensData,
    seeds: int = 128,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 50,
    dedup_tol: float = 1e-6,
    nondeg_tol: float = 1e-6,
) -> TranslatedPointSearch:
    """Solve phi(p) = e^{i eta} p, |p| = 1 by Newton from sphere seeds.

    Solutions are deduplicated in the lens-space metric (Z_k orbits).  A point
    is nondegenerate when the bordered Jacobian of the system is invertible
    (smallest singular value above ``nondeg_tol`` times the scale of D phi).
    Large sets of degenerate solutions, as produced by the identity or exact
    rotations, are reported through ``degenerate_family`` instead of as a list.
    """
    n = phi.n
    p = sphere_points(n, seeds, seed)
    img = phi(p)
    eta = np.angle(np.sum(np.conj(p) * img, axis=-1))
    active = np.ones(seeds, dtype=bool)
    done = np.zeros(seeds, dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active & ~done)[0]
        if idx.size == 0:
            break
        pi, ei = p[idx], eta[idx]
        F = np.concatenate([to_real(phi(pi) - np.exp(1j * ei)[:, None] * pi), (np.sum(np.abs(pi) ** 2, axis=-1) - 1)[:, None]], axis=1)
        res = np.linalg.norm(F, axis=1)
        conv = res <= tol
        done[idx[conv]] = True
        idx, pi, ei, F = idx[~conv], pi[~conv], ei[~conv], F[~conv]
        if idx.size == 0:
            break
        Jm = _bordered_jacobian(phi.jacobian(pi), pi, ei)
        step = np.stack([np.linalg.lstsq(Jm[b], -F[b], rcond=None)[0] for b in range(idx.size)])
        norms = np.linalg.norm(step, axis=1)
        step *= np.minimum(1.0, 0.5 / np.maximum(norms, 1e-300))[:, None]
        x = to_real(pi) + step[:, :-1]
        p[idx] = to_complex(x)
        eta[idx] = ei + step[:, -1]
        active[idx[~np.isfinite(norms)]] = False
    # final polish and bookkeeping
    cand = np.nonzero(done)[0]
    points: list[TranslatedPoint] = []
    warnings: list[str] = []
    if cand.size:
        pc = p[cand] / np.linalg.norm(p[cand], axis=-1, keepdims=True)
        ec = eta[cand]
        resid = np.linalg.norm(phi(pc) - np.exp(1j * ec)[:, None] * pc, axis=-1)
        D = phi.jacobian(pc)
        Jm = _bordered_jacobian(D, pc, ec)
        smin = np.linalg.svd(Jm, compute_uv=False)[:, -1]
        scale = np.maximum(1.0, np.linalg.norm(D, ord=2, axis=(1, 2)))
        for j in range(cand.size):
            q = pc[j]
            if any(lens.orbit_distance(q, tp.p) < dedup_tol for tp in points):
                continue
            near = [tp for tp in points if lens.orbit_distance(q, tp.p) < 1e-3]
            if near:
                warnings.append(f"solutions closer than 1e-3 but farther than {dedup_tol} in the quotient")
            e = float(ec[j])
            points.append(
                TranslatedPoint(
                    p=q,
                    eta=e % (2 * np.pi),
                    winding=int(math.floor(e / (2 * np.pi))),
                    nondegenerate=bool(smin[j] > nondeg_tol * scale[j]),
                    residual=float(resid[j]),
                    sigma_min=float(smin[j]),
                )
            )
    degenerate = [tp for tp in points if not tp.nondegenerate]
    family = len(degenerate) > 10 * 2 * n
    if family:
        points = [tp for tp in points if tp.nondegenerate]
    return TranslatedPointSearch(points, family, int(cand.size), seeds, sorted(set(warnings)))


# ----------------------------------------------------------------------------
# Discriminant points


@dataclass
class DiscriminantTime:
    t: float
    group_element: int
    residual: float
    witnesses: str
    witness_points: list = field(default_factory=list)
    nondegenerate: bool = False

    def as_dict(self):
        return {
            "t": self.t,
            "group_element": self.group_element,
            "residual": self.residual,
            "witnesses": self.witnesses,
            "witness_count": len(self.witness_points),
            "nondegenerate": self.nondegenerate,
        }


@dataclass
class DiscriminantScan:
    times: list[DiscriminantTime]
    every_time: bool
    T: float

    @property
    def values(self) -> list[float]:
        return [d.t for d in self.times]


def _orbit_gap(lens: LensData, img: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """min over m of |img - g^m p| and the minimising m, per point."""
    gaps = np.stack([np.linalg.norm(img - lens.act(p, m), axis=-1) for m in range(lens.k)])
    return gaps.min(axis=0), gaps.argmin(axis=0)


def _refine_crossing(H, lens, t, m, p0, step, iters: int = 30):
    """Gauss-Newton on (t, p) for phi_t(p) = g^m p, |p| = 1.

    The t-column of the Jacobian is the lifted vector field at phi_t(p); the
    minimum-norm step handles the degenerate directions of symmetric flows.
    """
    x = to_real(p0)
    n = lens.n
    G = lens.generator_matrix(m)
    best = None
    for _ in range(iters):
        q = to_complex(x)
        img = hamiltonian_flow(H, q, t, step)
        F = np.concatenate([to_real(img - lens.act(q, m)), [x @ x - 1]])
        r = float(np.linalg.norm(F))
        if best is None or r < best[0]:
            best = (r, t, x.copy())
        if r < 1e-15:
            break
        D = FlowMap(H, t, step).jacobian(q)
        Jm = np.zeros((2 * n + 1, 2 * n + 1))
        Jm[:2 * n, 0] = to_real(H.vector_field(img))
        Jm[:2 * n, 1:] = D - G
        Jm[2 * n, 1:] = 2 * x
        dx = np.linalg.lstsq(Jm, -F, rcond=1e-12)[0]
        if np.linalg.norm(dx) < 1e-15:
            break
        t = t + dx[0]
        x = x + dx[1:]
    r, t, x = best
    q = to_complex(x / np.linalg.norm(x))
    return t, q, float(np.linalg.norm(hamiltonian_flow(H, q, t, step) - lens.act(q, m)))


def discriminant_times(
    H,
    lens: LensData,
    T: float,
    seeds: int = 48,
    seed: int = 0,
    step: float = DEFAULT_STEP,
    accept: float = 1e-7,
    xtol: float = 1e-11,
) -> DiscriminantScan:
    """Times t in (0, T] at which phi_t has a point with phi_t(p) = g^m p.

    A single trajectory from the seed set is sampled at every integration step;
    local minima of the orbit gap are refined in t with a bounded scalar search
    (the gap is V-shaped at a root, which the search resolves to ``xtol``).
    When every sampled time is discriminant (e.g. H = 0), the scan returns
    ``[0.0]`` and sets ``every_time``.
    """
    p = sphere_points(lens.n, seeds, seed)
    nsteps = max(1, math.ceil(T / step - 1e-12))
    grid = np.linspace(0.0, T, nsteps + 1)
    gap = np.empty(nsteps + 1)
    z = p.copy()
    gap[0] = 0.0
    for j in range(1, nsteps + 1):
        z = hamiltonian_flow(H, z, grid[j] - grid[j - 1], step)
        gap[j] = _orbit_gap(lens, z, p)[0].min()
    if np.all(gap[1:] < 1e-6):
        return DiscriminantScan([DiscriminantTime(0.0, 0, 0.0, "all", [])], True, T)
    h = grid[1] - grid[0]
    thresh = max(0.05, 4 * h)
    cands = []
    for j in range(2, nsteps + 1):
        left = gap[j - 1]
        right = gap[j + 1] if j < nsteps else np.inf
        if gap[j] <= left and gap[j] <= right and gap[j] < thresh:
            cands.append(j)

    def gap_at(t):
        img = hamiltonian_flow(H, p, t, step)
        return _orbit_gap(lens, img, p)

    found: list[DiscriminantTime] = []
    for j in cands:
        lo = grid[j - 1]
        hi = grid[min(j + 1, nsteps)]
        res = minimize_scalar(lambda t: float(gap_at(t)[0].min()), bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
        g, ms = gap_at(float(res.x))
        b = int(np.argmin(g))
        m = int(ms[b])
        t, q, r = _refine_crossing(H, lens, float(res.x), m, p[b], step)
        t = float(t)
        if r > accept or not (h / 2 < t <= T + 1e-7):
            continue
        t = min(t, T)
        g, _ = gap_at(t)
        wit = [p[i] for i in range(seeds) if g[i] < 1e-6]
        kind = "all" if len(wit) == seeds else ("finite" if len(wit) <= 10 * 2 * lens.n else "many")
        if not wit:
            wit, kind = [q], "finite"
        nondeg = False
        if kind == "finite":
            D = FlowMap(H, t, step).jacobian(q) - lens.generator_matrix(m)
            Bm = np.vstack([D, 2 * to_real(q)[None]])
            nondeg = bool(np.linalg.svd(Bm, compute_uv=False)[-1] > 1e-6)
        if any(abs(f.t - t) < 1e-6 for f in found):
            continue
        found.append(DiscriminantTime(t, m, r, kind, wit, nondeg))
    found.sort(key=lambda d: d.t)
    return DiscriminantScan(found, False, T)
