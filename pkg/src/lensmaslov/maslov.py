"""Maslov-type indices from quadratic generating families.

In the linear case a path of symplectic matrices is cut into C^1-small pieces;
piece j contributes the fibreless form of A(clamp(t)) A(t_{j-1})^{-1}, the
pieces are combined with ``sharp_quad`` and mu = i(Q_0) - i(Q_1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from lensmaslov.lens_core import LensData, complex_structure
from lensmaslov.quadform import ABS_SCALE_FLOOR, QuadForm, index_i, primitive_quad, sharp_chain

SMALL_DELTA = 0.1

Path = Callable[[float], np.ndarray]


class MaslovError(RuntimeError):
    pass


@dataclass
class QuadraticFamily:
    """t in [0, 1] -> QuadForm with shared dimensions."""

    form_at: Callable[[float], QuadForm]
    provenance: str = ""
    breakpoints: Sequence[float] = ()

    def __call__(self, t: float) -> QuadForm:
        return self.form_at(t)


@dataclass
class MaslovReport:
    mu: int | None
    ind_start: int | None
    ind_end: int | None
    jump_times: list = field(default_factory=list)
    jump_bounds: list = field(default_factory=list)
    bounds: tuple | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "mu": self.mu,
            "bounds": list(self.bounds) if self.bounds is not None else None,
            "ind_start": self.ind_start,
            "ind_end": self.ind_end,
            "jumps": [
                {"t": float(t), "bound": list(b)} for t, b in zip(self.jump_times, self.jump_bounds)
            ],
        }
        for jump, w in zip(out["jumps"], self.details.get("witnesses", [])):
            jump["witnesses"] = w
        out.update({key: v for key, v in self.details.items() if key != "witnesses"})
        return out


def three_piece_rotation_matrix(t: float) -> np.ndarray:
    """Explicit 10 x 10 matrix (as v^T A v) of three sharp-composed rotation pieces of angle 2 pi t / 3."""
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    Z = np.zeros((2, 2))
    lam = math.sin(2 * math.pi * t / 3) / (1 + math.cos(2 * math.pi * t / 3))
    L = lam * np.eye(2)
    return np.block(
        [
            [Z, J, -J, Z, Z],
            [-J, Z, J, J, -J],
            [J, -J, L, Z, Z],
            [Z, -J, Z, L, J],
            [Z, J, Z, -J, L],
        ]
    )


# ----------------------------------------------------------------------------
# Families and the index difference


def _ambiguous(M: np.ndarray, tol: float = 1e-9, guard: float = 1e-6) -> bool:
    w = np.abs(np.linalg.eigvalsh(M))
    r = max(w.max() if w.size else 0.0, ABS_SCALE_FLOOR)
    return bool(np.any((w > tol * r) & (w <= guard * r)))


def mu_quadratic(fam: QuadraticFamily, samples: int = 33, t_tol: float = 1e-10, locate_jumps: bool = True) -> MaslovReport:
    """mu = i(Q_0) - i(Q_1), with jump times of t -> i(Q_t) located by bisection.

    Raises:
        MaslovError: if an endpoint spectrum has eigenvalues too close to the
            kernel band to be classified.
    """
    Q0, Q1 = fam(0.0), fam(1.0)
    for name, Q in (("start", Q0), ("end", Q1)):
        if _ambiguous(Q.matrix):
            w = np.linalg.eigvalsh(Q.matrix)
            raise MaslovError(f"ambiguous kernel at the {name} of the family; spectrum {np.array2string(w, precision=3)}")
    i0, i1 = index_i(Q0), index_i(Q1)
    jumps, sizes = [], []
    if locate_jumps:
        ts = np.linspace(0.0, 1.0, samples)
        vals = [index_i(fam(t)) for t in ts]
        for a, b, va, vb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
            if va == vb:
                continue
            lo, hi = a, b
            while hi - lo > t_tol:
                mid = 0.5 * (lo + hi)
                if index_i(fam(mid)) == va:
                    lo = mid
                else:
                    hi = mid
            jumps.append(0.5 * (lo + hi))
            sizes.append((va - vb, va - vb))
    return MaslovReport(i0 - i1, i0, i1, jumps, sizes, (i0 - i1, i0 - i1), {"provenance": fam.provenance})


def piece_margin(B: np.ndarray) -> float:
    I = np.eye(B.shape[0])
    return float(np.linalg.svd(0.5 * (I + B), compute_uv=False).min())


def _piece_ok(path: Path, a: float, b: float, Ainv: np.ndarray, delta: float, sub: int,
              max_jump: float = 0.2, depth: int = 12) -> bool:
    """Margin >= delta on a grid refined until consecutive quotients differ by <= max_jump."""
    stack = []
    us = np.linspace(a, b, sub + 1)
    Bs = [path(u) @ Ainv for u in us]
    for u0, u1, B0, B1 in zip(us[:-1], us[1:], Bs[:-1], Bs[1:]):
        stack.append((u0, u1, B0, B1, 0))
    if any(piece_margin(B) < delta for B in Bs[1:]):
        return False
    while stack:
        u0, u1, B0, B1, lvl = stack.pop()
        if np.linalg.norm(B1 - B0, 2) <= max_jump:
            continue
        if lvl >= depth:
            return False
        um = 0.5 * (u0 + u1)
        Bm = path(um) @ Ainv
        if piece_margin(Bm) < delta:
            return False
        stack.append((u0, um, B0, Bm, lvl + 1))
        stack.append((um, u1, Bm, B1, lvl + 1))
    return True


def decompose_linear_path(path: Path, delta: float = SMALL_DELTA, cap: int = 64, sub: int = 8,
                          strategy: str = "uniform", rel_tol: float = 1e-2) -> list[float]:
    """Breakpoints of [0, 1] such that every piece A(u) A(t_{j-1})^{-1} is C^1-small.

    The greedy pass takes the longest certified piece from each breakpoint
    (halving, then bisection).  The uniform strategy then looks for the fewest
    equal pieces that certify, which is what one wants for autonomous flows.
    """
    pts = [0.0]
    while pts[-1] < 1.0:
        a = pts[-1]
        Ainv = np.linalg.inv(path(a))
        s = 1.0 - a
        while not _piece_ok(path, a, a + s, Ainv, delta, sub):
            s /= 2
            if s < 1e-9:
                raise MaslovError(f"path cannot be certified near t={a}")
        if a + s < 1.0:
            lo, hi = s, min(2 * s, 1.0 - a)
            while hi - lo > rel_tol * lo:
                mid = 0.5 * (lo + hi)
                if _piece_ok(path, a, a + mid, Ainv, delta, sub):
                    lo = mid
                else:
                    hi = mid
            s = lo
        pts.append(min(1.0, a + s))
        if len(pts) - 1 > cap:
            raise MaslovError(f"more than {cap} pieces needed")
    if strategy == "greedy":
        return pts
    if strategy != "uniform":
        raise ValueError(f"unknown strategy {strategy!r}")
    for N in range(len(pts) - 1, cap + 1):
        grid = [j / N for j in range(N + 1)]
        if all(_piece_ok(path, a, b, np.linalg.inv(path(a)), delta, sub) for a, b in zip(grid[:-1], grid[1:])):
            return grid
    return pts


def linear_path_family(path: Path, breakpoints: Sequence[float], lens: LensData | None = None) -> QuadraticFamily:
    """Quadratic family of a linear symplectic path from its decomposition."""
    bps = list(breakpoints)
    invs = [np.linalg.inv(path(a)) for a in bps[:-1]]

    def form_at(t: float) -> QuadForm:
        forms = []
        for (a, b), Ainv in zip(zip(bps[:-1], bps[1:]), invs):
            u = min(max(t, a), b)
            forms.append(primitive_quad(path(u) @ Ainv, lens))
        return sharp_chain(forms)

    return QuadraticFamily(form_at, f"linear path, {len(bps) - 1} pieces", bps)


def mu_linear_path(path: Path, lens: LensData | None = None, breakpoints: Sequence[float] | None = None,
                   locate_jumps: bool = False, strategy: str = "uniform") -> MaslovReport:
    """mu of a path of symplectic matrices starting at the identity."""
    if np.max(np.abs(path(0.0) - np.eye(path(0.0).shape[0]))) > 1e-9:
        raise MaslovError("path must start at the identity")
    if breakpoints is None:
        breakpoints = decompose_linear_path(path, strategy=strategy)
    rep = mu_quadratic(linear_path_family(path, breakpoints, lens), locate_jumps=locate_jumps)
    rep.details["pieces"] = len(breakpoints) - 1
    return rep


def sampled_path(samples: np.ndarray) -> Path:
    """Treat an array of matrices as the breakpoints of a path (endpoints only)."""
    samples = np.asarray(samples, dtype=float)
    m = len(samples) - 1

    def path(t):
        j = int(round(t * m))
        if abs(t * m - j) > 1e-9:
            raise MaslovError("sampled path is only known at its sample times")
        return samples[j]

    return path


def nu_sp_loop(loop, lens: LensData | None = None, closure_tol: float = 1e-9, strategy: str = "greedy") -> MaslovReport:
    """Index of a closed loop in Sp(2n; R), given as a callable on [0, 1] or as samples.

    The loop is first based at the identity (A(t) A(0)^{-1}).  Sampled loops
    use their samples as breakpoints; every consecutive quotient must be
    C^1-small.
    """
    if callable(loop):
        A0 = loop(0.0)
        if np.max(np.abs(loop(1.0) - A0)) > closure_tol:
            raise MaslovError("loop is not closed")
        A0inv = np.linalg.inv(A0)
        I = np.eye(A0.shape[0])
        # snap the closing point so that the end form sees the exact identity
        path = lambda t: I if t >= 1.0 else loop(t) @ A0inv  # noqa: E731
        bps = None
    else:
        S = np.asarray(loop, dtype=float)
        if np.max(np.abs(S[-1] - S[0])) > closure_tol:
            raise MaslovError("loop is not closed")
        A0inv = np.linalg.inv(S[0])
        S = S @ A0inv
        path = sampled_path(S)
        m = len(S) - 1
        bps = [j / m for j in range(m + 1)]
        for j in range(m):
            if piece_margin(S[j + 1] @ np.linalg.inv(S[j])) < SMALL_DELTA:
                raise MaslovError(f"samples {j} and {j + 1} are too far apart; refine the sampling")
    if lens is None:
        lens = LensData.standard(2, path(0.0).shape[0] // 2)
    return mu_linear_path(path, lens, bps, strategy=strategy)


def standard_loop(n: int = 1) -> Path:
    """t -> e^{2 pi i t} on C^n."""
    J = complex_structure(n)
    return lambda t: expm(2 * math.pi * t * J)


def loop_product(a: Path, b: Path) -> Path:
    return lambda t: a(t) @ b(t)


def loop_power(a: Path, m: int) -> Path:
    """m-fold iterate t -> a(frac(m t)) of a loop based at the identity."""
    def path(t):
        s = m * t
        if t >= 1.0:
            return a(1.0)
        return a(s - math.floor(s))
    return path


def asymptotic_mu_linear(loop: Path, m_max: int = 4, lens: LensData | None = None) -> tuple[Fraction, list[Fraction]]:
    """nu(x^m)/m for m = 1..m_max; for loops the sequence is constant."""
    seq = []
    for m in range(1, m_max + 1):
        seq.append(Fraction(nu_sp_loop(loop_power(loop, m), lens).mu, m))
    return seq[-1], seq


# ----------------------------------------------------------------------------
# Reeb iterates


def reeb_path(n: int, total_angle: float) -> Path:
    J = complex_structure(n)
    return lambda t: expm(total_angle * t * J)


def reeb_family(n: int, k: int, l: int, lens: LensData | None = None) -> QuadraticFamily:
    """Family of the (l k)-th iterate of the 2 pi / k Reeb loop, i.e. rotation up to 2 pi l."""
    if lens is None:
        lens = LensData.standard(k, n)
    path = reeb_path(n, 2 * math.pi * l)
    return linear_path_family(path, decompose_linear_path(path), lens)


def mu_reeb(n: int, k: int, l: int, locate_jumps: bool = False) -> MaslovReport:
    fam = reeb_family(n, k, l)
    rep = mu_quadratic(fam, locate_jumps=locate_jumps)
    rep.details.update({"n": n, "k": k, "l": l, "pieces": len(fam.breakpoints) - 1})
    return rep


def hamiltonian_linear_path(H, T: float) -> Path:
    """t in [0, 1] -> exp(t T J S) for a quadratic lift H(x) = x^T S x / 2."""
    S = H.hessian()
    X = T * complex_structure(H.n) @ S
    return lambda t: expm(t * X)


# ----------------------------------------------------------------------------
# Random loops and an independent index


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    S = rng.standard_normal((2 * n, 2 * n)) * scale
    S = 0.5 * (S + S.T)
    return expm(complex_structure(n) @ S)


def random_loop(n: int, rng: np.random.Generator, max_freq: int = 2, scale: float = 0.4) -> tuple[Path, int]:
    """Random loop based at I with a known index.

    G exp(2 pi t K) G^{-1} rotates coordinate j with integer frequency m_j
    (index 2 sum m_j); it is multiplied by the contractible loop
    exp(sin(2 pi t) X) with X a random Hamiltonian matrix.
    """
    freqs = rng.integers(-max_freq, max_freq + 1, size=n)
    K = np.zeros((2 * n, 2 * n))
    for j, m in enumerate(freqs):
        K[2 * j:2 * j + 2, 2 * j:2 * j + 2] = m * np.array([[0.0, -1.0], [1.0, 0.0]])
    G = random_symplectic(n, rng, scale)
    Ginv = np.linalg.inv(G)
    S = rng.standard_normal((2 * n, 2 * n)) * scale
    X = complex_structure(n) @ (0.5 * (S + S.T))
    loop = lambda t: G @ expm(2 * math.pi * t * K) @ Ginv @ expm(math.sin(2 * math.pi * t) * X)  # noqa: E731
    return loop, int(2 * freqs.sum())


def winding_index(loop: Path, samples: int = 2000) -> int:
    """Twice the winding number of det of the unitary polar factor.

    Independent of generating functions; used as an oracle.
    """
    n = loop(0.0).shape[0] // 2
    total = 0.0
    prev = None
    for t in np.linspace(0.0, 1.0, samples + 1):
        A = loop(t)
        U, _, Vt = np.linalg.svd(A)
        W = U @ Vt
        # W commutes with J: read it as a complex n x n matrix
        C = W[0::2, 0::2] + 1j * W[1::2, 0::2]
        ang = np.angle(np.linalg.det(C))
        if prev is not None:
            d = ang - prev
            total += (d + np.pi) % (2 * np.pi) - np.pi
        prev = ang
    return int(round(2 * total / (2 * np.pi)))


def random_path(n: int, rng: np.random.Generator, max_angle: float = 3 * math.pi) -> Path:
    """Random symplectic path from I: G exp(t K) G^{-1} exp(t X) with generic rotation speeds."""
    speeds = rng.uniform(-max_angle, max_angle, size=n)
    K = np.zeros((2 * n, 2 * n))
    for j, s in enumerate(speeds):
        K[2 * j:2 * j + 2, 2 * j:2 * j + 2] = s * np.array([[0.0, -1.0], [1.0, 0.0]])
    G = random_symplectic(n, rng, 0.4)
    Ginv = np.linalg.inv(G)
    S = rng.standard_normal((2 * n, 2 * n)) * 0.3
    X = complex_structure(n) @ (0.5 * (S + S.T))
    return lambda t: G @ expm(t * K) @ Ginv @ expm(t * X)


def defect_suite(n: int, pairs: int = 20, seed: int = 0) -> list[dict]:
    """|mu(xy) - mu(x) - mu(y)| for random pairs of linear paths (pointwise product)."""
    rng = np.random.default_rng(seed)
    out = []
    lens = LensData.standard(2, n)
    while len(out) < pairs:
        x, y = random_path(n, rng), random_path(n, rng)
        xy = loop_product(x, y)
        try:
            mx = mu_linear_path(x, lens).mu
            my = mu_linear_path(y, lens).mu
            mxy = mu_linear_path(xy, lens).mu
        except MaslovError:
            continue
        out.append({"mu_x": mx, "mu_y": my, "mu_xy": mxy, "defect": abs(mxy - mx - my), "bound": 2 * n + 1})
    return out


# ----------------------------------------------------------------------------
# Crossing analysis for non-linear isotopies


def crossing_report(H, lens: LensData, T: float, scan=None, positivity_samples: int = 4000) -> MaslovReport:
    """Interval bounds on mu along [0, T] from the discriminant times.

    * Crossing-free segments keep mu constant (bound [0, 0]).
    * The identity at t = 0 contributes 2n for a positive isotopy, 0 for a
      non-positive one and something in [0, 2n] otherwise (small isotopies
      have fibreless generating functions).
    * A later crossing contributes at most 1 in absolute value when its
      discriminant points are finitely many and nondegenerate, 2 when they
      are finitely many, and 2n+1 otherwise; under non-negativity the lower
      bound is 0.
    When H is quadratic the exact value from the linear family is attached.
    """
    from lensmaslov.contact_dyn import discriminant_times

    n = lens.n
    if scan is None:
        scan = discriminant_times(H, lens, T)
    hmin, hmax = H.sphere_range(positivity_samples)
    positive = hmin > 0
    nonneg = hmin >= 0
    nonpos = hmax <= 0
    if scan.every_time:
        start = (0, 0)
        crossings = []
    else:
        start = (2 * n, 2 * n) if positive else ((0, 0) if nonpos else (0, 2 * n))
        crossings = [d for d in scan.times if d.t > 0]
    times, bounds, segs = [], [], []
    lo, hi = start
    prev = 0.0
    for d in crossings:
        segs.append({"from": prev, "to": d.t, "bound": [0, 0]})
        if d.witnesses == "finite" and d.nondegenerate:
            ub = 1
        elif d.witnesses == "finite":
            ub = 2
        else:
            ub = 2 * n + 1
        b = (0 if nonneg else -ub, 0 if nonpos else ub)
        times.append(d.t)
        bounds.append(b)
        lo += b[0]
        hi += b[1]
        prev = d.t
    if prev < T:
        segs.append({"from": prev, "to": T, "bound": [0, 0]})
    mu = None
    details = {
        "segments": segs,
        "start_jump": list(start),
        "positive": bool(positive),
        "h_range": [hmin, hmax],
        "witnesses": [d.witnesses for d in crossings],
    }
    if getattr(H, "is_quadratic", lambda: False)() and not scan.every_time:
        rep = mu_linear_path(hamiltonian_linear_path(H, T), lens)
        mu = rep.mu
        details["exact_from_linear_family"] = True
        details["ind_start"], details["ind_end"] = rep.ind_start, rep.ind_end
    return MaslovReport(mu, details.get("ind_start"), details.get("ind_end"), times, bounds, (lo, hi), details)
