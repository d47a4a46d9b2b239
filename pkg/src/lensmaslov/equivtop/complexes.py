"""Equivariant simplicial models of weighted spheres and their lens quotients.

A sphere S^{2M-1}(w) is modelled as the join of M polygons, the j-th polygon
carrying the rotation by w_j steps.  Vertex ids are integers; the global
vertex order (factor, position) is the integer order, and every simplex is
stored as a sorted tuple.  Orientation signs are taken relative to this order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from lensmaslov.lens_core import is_prime


def permutation_sign(seq) -> tuple[tuple, int]:
    """Sorted copy of ``seq`` and the sign of the sorting permutation."""
    s = list(seq)
    sign = 1
    for i in range(len(s)):
        for j in range(len(s) - 1 - i):
            if s[j] > s[j + 1]:
                s[j], s[j + 1] = s[j + 1], s[j]
                sign = -sign
    return tuple(s), sign


@dataclass(frozen=True)
class EquivComplex:
    """Simplicial complex with a free simplicial Z_k action.

    Attributes:
        k: order of the group.
        n_vertices: vertices are 0..n_vertices-1.
        simplices: all simplices (closed under faces), sorted tuples, grouped by dimension.
        gen: image of each vertex under the generator.
        factors: vertex ranges of the circle factors (for lens subspaces).
    """

    k: int
    n_vertices: int
    simplices: tuple
    gen: tuple
    factors: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def f_vector(self) -> tuple:
        return tuple(len(s) for s in self.simplices)

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(s) for d, s in enumerate(self.simplices))

    def act(self, simplex, m: int = 1) -> tuple:
        """Ordered image of a vertex tuple under gen^m."""
        out = tuple(simplex)
        for _ in range(m % self.k):
            out = tuple(self.gen[v] for v in out)
        return out

    def check(self) -> None:
        """Raise ValueError unless the complex is face-closed and the action free and simplicial."""
        allsets = [set(s) for s in self.simplices]
        g = np.arange(self.n_vertices)
        for _ in range(self.k):
            g = np.asarray(self.gen)[g]
        if not np.array_equal(g, np.arange(self.n_vertices)):
            raise ValueError("generator does not have order dividing k")
        for d, layer in enumerate(self.simplices):
            for s in layer:
                if d > 0:
                    for i in range(d + 1):
                        if s[:i] + s[i + 1:] not in allsets[d - 1]:
                            raise ValueError(f"face of {s} missing")
                for m in range(1, self.k):
                    img = tuple(sorted(self.act(s, m)))
                    if img not in allsets[d]:
                        raise ValueError(f"action not simplicial at {s}")
                    if img == s:
                        raise ValueError(f"simplex {s} fixed by g^{m}")


def _closure(tops) -> list[set]:
    layers: dict[int, set] = {}
    for t in tops:
        t = tuple(sorted(t))
        for r in range(1, len(t) + 1):
            for f in itertools.combinations(t, r):
                layers.setdefault(r - 1, set()).add(f)
    dim = max(layers) if layers else -1
    return [layers.get(d, set()) for d in range(dim + 1)]


def complex_from_tops(k: int, n_vertices: int, tops, gen, factors=()) -> EquivComplex:
    layers = _closure(list(tops) + [(v,) for v in range(n_vertices)])
    return EquivComplex(k, n_vertices, tuple(tuple(sorted(L)) for L in layers), tuple(int(g) for g in gen), tuple(factors))


def circle_complex(k: int, w: int = 1) -> EquivComplex:
    """Polygon model of S^1(w) with Z_k acting by w steps (a square with the antipodal map for k = 2)."""
    if not is_prime(k):
        raise ValueError(f"k={k} is not prime")
    if math.gcd(w, k) != 1:
        raise ValueError(f"weight {w} not coprime to {k}")
    V = 4 if k == 2 else k
    step = (V // k) * w
    edges = [(j, (j + 1) % V) for j in range(V)]
    gen = [(j + step) % V for j in range(V)]
    return complex_from_tops(k, V, edges, gen, ((0, V),))


def join_complex(X: EquivComplex, Y: EquivComplex) -> EquivComplex:
    """Simplicial join with the diagonal action; Y-vertices are shifted past X-vertices."""
    if X.k != Y.k:
        raise ValueError("join of complexes with different groups")
    off = X.n_vertices
    xs = [()] + [s for layer in X.simplices for s in layer]
    ys = [()] + [tuple(v + off for v in s) for layer in Y.simplices for s in layer]
    dim = X.dim + Y.dim + 1
    layers: list[list] = [[] for _ in range(dim + 1)]
    for a in xs:
        for b in ys:
            if a or b:
                layers[len(a) + len(b) - 1].append(a + b)
    gen = tuple(X.gen) + tuple(g + off for g in Y.gen)
    factors = tuple(X.factors) + tuple((a + off, b + off) for a, b in Y.factors)
    return EquivComplex(X.k, X.n_vertices + Y.n_vertices, tuple(tuple(sorted(L)) for L in layers), gen, factors)


def sphere_model(k: int, weights) -> EquivComplex:
    """Join of the weighted polygons: S^{2M-1}(w) with M = len(weights)."""
    weights = list(weights)
    if not weights:
        raise ValueError("need at least one weight")
    X = circle_complex(k, weights[0])
    for w in weights[1:]:
        X = join_complex(X, circle_complex(k, w))
    return X


@dataclass(eq=False)
class QuotientComplex:
    """Chains of X / Z_k: one basis element per orbit, with integral boundaries.

    The class of an upstairs ordered simplex equals that of its orbit
    representative up to the sign of the sorting permutation.
    """

    X: EquivComplex
    reps: list = field(init=False)
    lookup: list = field(init=False)

    def __post_init__(self):
        self.reps, self.lookup = [], []
        for layer in self.X.simplices:
            seen: dict = {}
            reps = []
            for s in layer:
                if s in seen:
                    continue
                orbit = []
                for m in range(self.X.k):
                    srt, sg = permutation_sign(self.X.act(s, m))
                    orbit.append((srt, sg))
                rep = min(o[0] for o in orbit)
                # re-express every orbit member against the chosen representative
                _, sg_rep = next(o for o in orbit if o[0] == rep)
                idx = len(reps)
                reps.append(rep)
                for srt, sg in orbit:
                    seen[srt] = (idx, sg * sg_rep)
            self.reps.append(reps)
            self.lookup.append(seen)

    @property
    def k(self) -> int:
        return self.X.k

    @property
    def dim(self) -> int:
        return self.X.dim

    def count(self, d: int) -> int:
        return len(self.reps[d]) if 0 <= d <= self.dim else 0

    def f_vector(self) -> tuple:
        return tuple(len(r) for r in self.reps)

    def project(self, ordered) -> tuple[int, int]:
        """(orbit index, sign) of an ordered upstairs simplex."""
        srt, sg = permutation_sign(ordered)
        idx, s2 = self.lookup[len(srt) - 1][srt]
        return idx, sg * s2

    @cached_property
    def boundaries(self) -> list:
        """Integer boundary matrices D[d]: C_d -> C_{d-1} (D[0] has no rows)."""
        out = [np.zeros((0, self.count(0)), dtype=np.int64)]
        for d in range(1, self.dim + 1):
            D = np.zeros((self.count(d - 1), self.count(d)), dtype=np.int64)
            for j, r in enumerate(self.reps[d]):
                for i in range(d + 1):
                    idx, sg = self.project(r[:i] + r[i + 1:])
                    D[idx, j] += (-1) ** i * sg
            out.append(D)
        return out

    def boundary(self, d: int) -> np.ndarray:
        if d <= 0 or d > self.dim:
            return np.zeros((self.count(d - 1), self.count(d)), dtype=np.int64)
        return self.boundaries[d]

    def full(self) -> "Subcomplex":
        return Subcomplex(self, tuple(tuple(range(self.count(d))) for d in range(self.dim + 1)))

    def empty(self) -> "Subcomplex":
        return Subcomplex(self, tuple(() for _ in range(self.dim + 1)))

    def subcomplex(self, simplices) -> "Subcomplex":
        """Face closure of the orbits of the given upstairs simplices."""
        sets = [set() for _ in range(self.dim + 1)]
        for s in simplices:
            s = tuple(sorted(s))
            for r in range(1, len(s) + 1):
                for f in itertools.combinations(s, r):
                    sets[r - 1].add(self.lookup[r - 1][f][0])
        return Subcomplex(self, tuple(tuple(sorted(x)) for x in sets))

    def orbit_subcomplex(self, orbits_by_dim) -> "Subcomplex":
        """Face closure of the given orbit indices {dim: [indices]}."""
        tops = [self.reps[d][i] for d, idxs in orbits_by_dim.items() for i in idxs]
        return self.subcomplex(tops)

    def vertex(self, v: int = 0) -> "Subcomplex":
        return self.subcomplex([(v,)])

    def lens_subspace(self, factor_ids) -> "Subcomplex":
        """Quotient of the sub-join of the chosen circle factors."""
        ranges = [self.X.factors[i] for i in factor_ids]
        ok = lambda v: any(a <= v < b for a, b in ranges)  # noqa: E731
        tops = [s for layer in self.X.simplices for s in layer if all(ok(v) for v in s)]
        return self.subcomplex(tops)


@dataclass(frozen=True)
class Subcomplex:
    """Face-closed set of orbit simplices of a quotient complex."""

    Q: QuotientComplex
    cells: tuple

    def __len__(self) -> int:
        return sum(len(c) for c in self.cells)

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def union(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(self.Q, tuple(tuple(sorted(set(a) | set(b))) for a, b in zip(self.cells, other.cells)))

    def intersection(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(self.Q, tuple(tuple(sorted(set(a) & set(b))) for a, b in zip(self.cells, other.cells)))

    def issubset(self, other: "Subcomplex") -> bool:
        return all(set(a) <= set(b) for a, b in zip(self.cells, other.cells))

    def is_closed(self) -> bool:
        for d in range(1, len(self.cells)):
            have = set(self.cells[d - 1])
            for j in self.cells[d]:
                rep = self.Q.reps[d][j]
                for i in range(d + 1):
                    if self.Q.project(rep[:i] + rep[i + 1:])[0] not in have:
                        return False
        return True

    def f_vector(self) -> tuple:
        return tuple(len(c) for c in self.cells)

    def top_simplices(self) -> list:
        """Upstairs representatives of the maximal orbit simplices."""
        tops = []
        for d in range(len(self.cells) - 1, -1, -1):
            for j in self.cells[d]:
                r = self.Q.reps[d][j]
                if not any(set(r) < set(t) for t in tops):
                    tops.append(r)
        return tops


def random_subcomplex(Q: QuotientComplex, rng: np.random.Generator, max_cells: int = 6) -> Subcomplex:
    """Face closure of a few random orbit simplices of random dimensions."""
    count = int(rng.integers(1, max_cells + 1))
    chosen: dict[int, list] = {}
    for _ in range(count):
        d = int(rng.integers(0, Q.dim + 1))
        chosen.setdefault(d, []).append(int(rng.integers(Q.count(d))))
    return Q.orbit_subcomplex(chosen)
