"""Text format for equivariant complexes.

    equivcomplex <k> <M>
    v <id>              one line per vertex
    s <ids>             one line per top simplex
    g <ids>             image of vertex 0, 1, ... under the generator
    sub <name>          followed by lines of top-simplex ids
"""

from __future__ import annotations

from lensmaslov.equivtop.complexes import EquivComplex, complex_from_tops


def complex_to_text(X: EquivComplex, subs: dict | None = None) -> str:
    M = len(X.factors) if X.factors else (X.dim + 1) // 2
    lines = [f"equivcomplex {X.k} {M}"]
    lines += [f"v {v}" for v in range(X.n_vertices)]
    lines += ["s " + " ".join(map(str, s)) for s in X.simplices[-1]]
    lines.append("g " + " ".join(map(str, X.gen)))
    if X.factors:
        lines.append("factors " + " ".join(f"{a}:{b}" for a, b in X.factors))
    for name, tops in (subs or {}).items():
        lines.append(f"sub {name}")
        lines += [" ".join(map(str, t)) for t in tops]
    return "\n".join(lines) + "\n"


def complex_from_text(text: str) -> tuple[EquivComplex, dict]:
    """Parse the text format; returns the complex and {name: list of top simplices}."""
    k = None
    verts: list[int] = []
    tops: list[tuple] = []
    gen: list[int] | None = None
    factors: tuple = ()
    subs: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "equivcomplex":
            k = int(rest[0])
        elif head == "v":
            verts.append(int(rest[0]))
            current = None
        elif head == "s":
            tops.append(tuple(int(x) for x in rest))
            current = None
        elif head == "g":
            gen = [int(x) for x in rest]
            current = None
        elif head == "factors":
            factors = tuple(tuple(int(y) for y in x.split(":")) for x in rest)
        elif head == "sub":
            current = rest[0]
            subs[current] = []
        elif head.lstrip("-").isdigit() and current is not None:
            subs[current].append(tuple(int(x) for x in line.split()))
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    if k is None or gen is None:
        raise ValueError("missing header or generator line")
    if sorted(verts) != list(range(len(verts))):
        raise ValueError("vertex ids must be 0..V-1")
    X = complex_from_tops(k, len(verts), tops, gen, factors)
    X.check()
    return X, subs
