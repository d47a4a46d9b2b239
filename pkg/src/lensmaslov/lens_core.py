"""Lens spaces, the cyclic action, the graph transform and homogeneous Hamiltonian flows.

Points of C^n are stored as complex arrays whose last axis has length n.  The
real picture R^{2n} uses interleaved coordinates (x1, y1, x2, y2, ...), so that
multiplication by i is the block matrix ``complex_structure(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_STEP = 0.01


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    return all(k % d for d in range(2, math.isqrt(k) + 1))


def complex_structure(n: int) -> np.ndarray:
    """Matrix of multiplication by i on R^{2n} in interleaved coordinates."""
    return np.kron(np.eye(n), np.array([[0.0, -1.0], [1.0, 0.0]]))


def to_real(z: np.ndarray) -> np.ndarray:
    """(..., n) complex -> (..., 2n) real, interleaved."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(x: np.ndarray) -> np.ndarray:
    """(..., 2n) real -> (..., n) complex."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def rotation_matrix(angles: Sequence[float]) -> np.ndarray:
    """Block-diagonal real matrix rotating coordinate j by ``angles[j]``."""
    blocks = [np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]]) for a in angles]
    n = len(blocks)
    out = np.zeros((2 * n, 2 * n))
    for j, b in enumerate(blocks):
        out[2 * j:2 * j + 2, 2 * j:2 * j + 2] = b
    return out


@dataclass(frozen=True)
class LensData:
    """Prime order k, weights w and the action g.z = (e^{2 pi i w_j / k} z_j)."""

    k: int
    weights: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if not is_prime(int(self.k)):
            raise ValueError(f"k={self.k} is not prime; reduce to a prime order first")
        if not self.weights:
            raise ValueError("need at least one weight")
        for w in self.weights:
            if w <= 0 or math.gcd(w, self.k) != 1:
                raise ValueError(f"weight {w} must be positive and coprime to k={self.k}")

    @classmethod
    def standard(cls, k: int, n: int) -> "LensData":
        return cls(k, (1,) * n)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def phases(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.array(self.weights) / self.k)

    def act(self, z: np.ndarray, m: int = 1) -> np.ndarray:
        """Apply g^m to complex points of shape (..., n)."""
        return np.asarray(z, dtype=complex) * self.phases ** (m % self.k)

    def generator_matrix(self, m: int = 1) -> np.ndarray:
        """Real 2n x 2n matrix of g^m."""
        return rotation_matrix(2 * np.pi * m * np.array(self.weights) / self.k)

    def orbit(self, z: np.ndarray) -> np.ndarray:
        """All k translates, stacked along a new leading axis."""
        return np.stack([self.act(z, m) for m in range(self.k)])

    def orbit_distance(self, p: np.ndarray, q: np.ndarray) -> float:
        """Distance between the images of p and q in the quotient."""
        return float(min(np.linalg.norm(self.act(p, m) - q) for m in range(self.k)))


def zk_orbit(p: np.ndarray, lens: LensData) -> list[np.ndarray]:
    """The k points g^m.p, m = 0..k-1."""
    return list(lens.orbit(p))


def tau(z: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Graph transform (z, Z) -> (q, p) = ((z+Z)/2, i(z-Z)); diagonal goes to the zero section."""
    z = np.asarray(z, dtype=complex)
    Z = np.asarray(Z, dtype=complex)
    return (z + Z) / 2, 1j * (z - Z)


def tau_inverse(q: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=complex)
    p = np.asarray(p, dtype=complex)
    return q - 0.5j * p, q + 0.5j * p


def reeb(p: np.ndarray, t: float) -> np.ndarray:
    """Reeb flow of the standard form: simultaneous rotation by e^{it}."""
    return np.exp(1j * t) * np.asarray(p, dtype=complex)


# ----------------------------------------------------------------------------
# Contact Hamiltonians and their homogeneous lifts


@dataclass(frozen=True)
class HamTerm:
    """One term c * Re(z^a zbar^b) / |z|^deg (or Im) of a contact Hamiltonian."""

    coef: float
    part: str
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        if self.part not in ("re", "im"):
            raise ValueError("part must be 're' or 'im'")
        if len(self.a) != len(self.b):
            raise ValueError("exponent vectors differ in length")
        if min(self.a + self.b) < 0:
            raise ValueError("negative exponent")
        if self.degree == 0:
            raise ValueError("constant terms go into the constant part")

    @property
    def degree(self) -> int:
        return sum(self.a) + sum(self.b)

    def charge(self, weights: Sequence[int]) -> int:
        return sum(w * (ai - bi) for w, ai, bi in zip(weights, self.a, self.b))


def _monomial(z: np.ndarray, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
    out = np.ones(z.shape[:-1], dtype=complex)
    zc = np.conj(z)
    for j, (aj, bj) in enumerate(zip(a, b)):
        if aj:
            out = out * z[..., j] ** aj
        if bj:
            out = out * zc[..., j] ** bj
    return out


def _shift(e: Sequence[int], j: int) -> tuple[int, ...]:
    e = list(e)
    e[j] -= 1
    return tuple(e)


class ContactHamiltonian:
    """Contact Hamiltonian h on the sphere, given as c0 + a sum of ``HamTerm``.

    The homogeneous lift is H(z) = |z|^2 h(z/|z|) / 2 and the lifted flow solves
    dz/dt = i grad H(z), so that h = 1 gives the Reeb rotation e^{it}.
    """

    def __init__(self, n: int, constant: float = 0.0, terms: Sequence[HamTerm] = (), name: str = ""):
        self.n = int(n)
        self.constant = float(constant)
        self.terms = tuple(terms)
        self.name = name or "polynomial"
        for t in self.terms:
            if len(t.a) != self.n:
                raise ValueError(f"term {t} does not live on C^{self.n}")

    def __repr__(self):
        return f"ContactHamiltonian(n={self.n}, constant={self.constant}, terms={len(self.terms)}, name={self.name!r})"

    def spec(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "constant": self.constant,
            "terms": [[t.coef, t.part, list(t.a), list(t.b)] for t in self.terms],
        }

    @classmethod
    def from_spec(cls, spec: dict) -> "ContactHamiltonian":
        terms = [HamTerm(float(c), str(p), tuple(a), tuple(b)) for c, p, a, b in spec.get("terms", [])]
        return cls(int(spec["n"]), float(spec.get("constant", 0.0)), terms, spec.get("name", ""))

    @classmethod
    def reeb(cls, n: int, speed: float = 1.0) -> "ContactHamiltonian":
        return cls(n, speed, (), "reeb" if speed == 1.0 else f"reeb*{speed}")

    @classmethod
    def zero(cls, n: int) -> "ContactHamiltonian":
        return cls(n, 0.0, (), "zero")

    # -- evaluation

    def sphere_value(self, z: np.ndarray) -> np.ndarray:
        """h(z/|z|)."""
        z = np.asarray(z, dtype=complex)
        r = np.linalg.norm(z, axis=-1)
        out = np.full(z.shape[:-1], self.constant)
        for t in self.terms:
            P = _monomial(z, t.a, t.b)
            val = P.real if t.part == "re" else P.imag
            out = out + t.coef * val / r ** t.degree
        return out

    def value(self, z: np.ndarray) -> np.ndarray:
        """Lifted Hamiltonian H(z) = |z|^2 h(z/|z|) / 2, with H(0) = 0."""
        z = np.asarray(z, dtype=complex)
        r2 = np.sum(np.abs(z) ** 2, axis=-1)
        safe = np.where(r2 > 0, r2, 1.0)
        zz = np.where((r2 > 0)[..., None], z, 1.0)
        return np.where(r2 > 0, 0.5 * safe * self.sphere_value(zz), 0.0)

    def _compiled(self):
        if not hasattr(self, "_plan"):
            plan = []
            for t in self.terms:
                dz = [(j, t.a[j], _shift(t.a, j), t.b) for j in range(self.n) if t.a[j]]
                dzb = [(j, t.b[j], t.a, _shift(t.b, j)) for j in range(self.n) if t.b[j]]
                plan.append((t, dz, dzb))
            self._plan = plan
            self._maxdeg = max((t.degree for t in self.terms), default=0)
        return self._plan

    def gradient(self, z: np.ndarray) -> np.ndarray:
        """Real gradient of H written as a complex vector dH/dx + i dH/dy."""
        z = np.asarray(z, dtype=complex)
        g = self.constant * z
        if not self.terms:
            return g
        plan = self._compiled()
        zc = np.conj(z)
        # power tables zpow[e][..., j] = z_j^e
        zpow = [np.ones_like(z)]
        zbpow = [np.ones_like(z)]
        for _ in range(self._maxdeg):
            zpow.append(zpow[-1] * z)
            zbpow.append(zbpow[-1] * zc)

        def mono(a, b):
            out = zpow[a[0]][..., 0] * zbpow[b[0]][..., 0]
            for j in range(1, self.n):
                out = out * (zpow[a[j]][..., j] * zbpow[b[j]][..., j])
            return out

        r2 = np.sum((z * zc).real, axis=-1)
        for t, dzs, dzbs in plan:
            d = t.degree
            P = mono(t.a, t.b)
            grad_p = np.zeros_like(z)
            for j, c, a, b in dzs:
                v = c * mono(a, b)
                grad_p[..., j] += np.conj(v) if t.part == "re" else 1j * np.conj(v)
            for j, c, a, b in dzbs:
                v = c * mono(a, b)
                grad_p[..., j] += v if t.part == "re" else -1j * v
            val = P.real if t.part == "re" else P.imag
            if d == 2:
                g = g + (0.5 * t.coef) * grad_p
            else:
                scale = r2 ** (1 - d / 2)
                g = g + (0.5 * t.coef) * (grad_p * scale[..., None] + ((2 - d) * val * scale / r2)[..., None] * z)
        return g

    def vector_field(self, z: np.ndarray) -> np.ndarray:
        return 1j * self.gradient(z)

    # -- structure

    def is_quadratic(self) -> bool:
        """True when every term has degree 2, so the lift is a quadratic form."""
        return all(t.degree == 2 for t in self.terms)

    def hessian(self) -> np.ndarray:
        """Symmetric S with H(x) = x^T S x / 2 on R^{2n}; only for quadratic lifts."""
        if not self.is_quadratic():
            raise ValueError("Hamiltonian is not quadratic")
        basis = to_complex(np.eye(2 * self.n))
        S = to_real(self.gradient(basis)).T
        return 0.5 * (S + S.T)

    def is_invariant(self, lens: LensData) -> bool:
        return all(t.charge(lens.weights) % lens.k == 0 for t in self.terms)

    def is_circle_invariant(self) -> bool:
        return all(sum(t.a) == sum(t.b) for t in self.terms)

    def invariance_defect(self, lens: LensData, samples: int = 200, seed: int = 0) -> float:
        """Max |h(g z) - h(z)| over random sphere points."""
        z = sphere_points(self.n, samples, seed)
        return float(np.max(np.abs(self.sphere_value(lens.act(z)) - self.sphere_value(z))))

    def sphere_range(self, samples: int = 2000, seed: int = 0) -> tuple[float, float]:
        v = self.sphere_value(sphere_points(self.n, samples, seed))
        return float(v.min()), float(v.max())


class CallableHamiltonian:
    """Lift of an arbitrary smooth h given as a Python callable on sphere points.

    The gradient is taken by central differences of the lift, so this class is
    slower and less accurate than ``ContactHamiltonian``.
    """

    def __init__(self, n: int, h: Callable[[np.ndarray], np.ndarray], name: str = "callable", step: float = 1e-6):
        self.n = int(n)
        self.h = h
        self.name = name
        self.step = step

    def spec(self) -> dict:
        return {"name": self.name, "n": self.n}

    def sphere_value(self, z):
        z = np.asarray(z, dtype=complex)
        return np.asarray(self.h(z / np.linalg.norm(z, axis=-1, keepdims=True)), dtype=float)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return 0.5 * np.sum(np.abs(z) ** 2, axis=-1) * self.sphere_value(z)

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        x = to_real(z)
        g = np.zeros_like(x)
        for j in range(2 * self.n):
            e = np.zeros(2 * self.n)
            e[j] = self.step
            g[..., j] = (self.value(to_complex(x + e)) - self.value(to_complex(x - e))) / (2 * self.step)
        return to_complex(g)

    def vector_field(self, z):
        return 1j * self.gradient(z)

    def is_quadratic(self) -> bool:
        return False

    def invariance_defect(self, lens: LensData, samples: int = 200, seed: int = 0) -> float:
        z = sphere_points(self.n, samples, seed)
        return float(np.max(np.abs(self.sphere_value(lens.act(z)) - self.sphere_value(z))))

    def sphere_range(self, samples: int = 2000, seed: int = 0):
        v = self.sphere_value(sphere_points(self.n, samples, seed))
        return float(v.min()), float(v.max())


def lift_hamiltonian(h, lens: LensData, tol: float = 1e-10, samples: int = 200, seed: int = 0):
    """Return the homogeneous lift of a Z_k-invariant contact Hamiltonian.

    Args:
        h: a ``ContactHamiltonian``, or a callable on unit-sphere points of C^n.
        lens: the lens data whose action h must respect.
        tol: allowed deviation of h along sampled orbits.

    Returns:
        An object with ``value``, ``gradient`` and ``vector_field`` methods.

    Raises:
        ValueError: if h is not invariant, with the sampled maximal deviation.
    """
    if not isinstance(h, (ContactHamiltonian, CallableHamiltonian)):
        h = CallableHamiltonian(lens.n, h)
    if h.n != lens.n:
        raise ValueError(f"Hamiltonian on C^{h.n} but lens data on C^{lens.n}")
    defect = h.invariance_defect(lens, samples, seed)
    if isinstance(h, ContactHamiltonian) and not h.is_invariant(lens):
        raise ValueError(f"Hamiltonian not invariant under the Z_{lens.k} action (max deviation {defect:.3e})")
    if defect > tol:
        raise ValueError(f"Hamiltonian not invariant under the Z_{lens.k} action (max deviation {defect:.3e})")
    return h


def perturbed_reeb(lens: LensData, eps: float, seed: int = 0) -> ContactHamiltonian:
    """h = 1 + eps * (random invariant perturbation with unit-size coefficients).

    The perturbation contains the circle-invariant term Re(z1^2 zbar2^2) when
    n >= 2 and the weights make it Z_k-invariant, and adds invariant monomials of degree <= 3 that break the
    circle symmetry, so translated points are generically isolated.
    """
    rng = np.random.default_rng(seed)
    n = lens.n
    terms = []
    if n >= 2:
        a = [0] * n
        b = [0] * n
        a[0], b[1] = 2, 2
        forced = HamTerm(eps, "re", tuple(a), tuple(b))
        if forced.charge(lens.weights) % lens.k == 0:
            terms.append(forced)
    for a, b in invariant_monomials(lens, max_degree=3):
        for part in ("re", "im"):
            if part == "im" and a == b:
                continue
            c = eps * rng.uniform(-1.0, 1.0) / 2
            terms.append(HamTerm(c, part, a, b))
    return ContactHamiltonian(n, 1.0, terms, f"perturbed_reeb(eps={eps}, seed={seed})")


def invariant_monomials(lens: LensData, max_degree: int = 3, min_degree: int = 1) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Exponent pairs (a, b) with a_j b_j = 0 whose monomial is Z_k-invariant."""
    n = lens.n
    out = []

    def rec(j, a, b, deg):
        if j == n:
            if deg >= min_degree and sum(w * (x - y) for w, x, y in zip(lens.weights, a, b)) % lens.k == 0:
                out.append((tuple(a), tuple(b)))
            return
        for d in range(max_degree - deg + 1):
            rec(j + 1, a + [d], b + [0], deg + d)
            if d:
                rec(j + 1, a + [0], b + [d], deg + d)

    rec(0, [], [], 0)
    out = sorted(set(out))
    # keep one of each conjugate pair: Re/Im of conj(P) duplicate those of P
    keep = []
    seen = set()
    for a, b in out:
        if (b, a) in seen:
            continue
        seen.add((a, b))
        keep.append((a, b))
    return keep


# ----------------------------------------------------------------------------
# Integration


def rk4_flow(field: Callable[[np.ndarray], np.ndarray], z: np.ndarray, t: float, step: float = DEFAULT_STEP) -> np.ndarray:
    """Classical RK4 with fixed step t / ceil(|t| / step), vectorised over leading axes."""
    z = np.array(z, dtype=complex)
    if t == 0:
        return z
    nsteps = max(1, math.ceil(abs(t) / step - 1e-12))
    h = t / nsteps
    for _ in range(nsteps):
        k1 = field(z)
        k2 = field(z + 0.5 * h * k1)
        k3 = field(z + 0.5 * h * k2)
        k4 = field(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


def hamiltonian_flow(H, z: np.ndarray, t: float, step: float = DEFAULT_STEP) -> np.ndarray:
    return rk4_flow(H.vector_field, z, t, step)


def sphere_points(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy points on the unit sphere of C^n."""
    from scipy.stats import norm, qmc

    sampler = qmc.Halton(d=2 * n, scramble=True, seed=seed)
    u = sampler.random(count)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    x = norm.ppf(u)
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return to_complex(x)


def random_sphere_points(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((count, 2 * n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return to_complex(x)
