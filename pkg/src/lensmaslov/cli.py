"""Command-line interface.

Every command writes a JSON report (sorted keys, config and version embedded)
plus a figure into ``--out-dir`` and prints a one-line summary.

Exit codes: 0 success, 1 usage error, 2 a guaranteed property failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from lensmaslov import __version__

EXIT_OK, EXIT_USAGE, EXIT_CONTRACT = 0, 1, 2
THREADS_ENV = "LENSMASLOV_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc


# ----------------------------------------------------------------------------
# helpers


def _lens(cfg):
    from lensmaslov.lens_core import LensData

    weights = cfg.get("weights")
    if weights:
        w = tuple(int(x) for x in weights)
        if len(w) != cfg["n"]:
            raise UsageError(f"{len(w)} weights given for n={cfg['n']}")
        return LensData(cfg["k"], w)
    return LensData.standard(cfg["k"], cfg["n"])


def _hamiltonian(cfg, lens):
    from lensmaslov.lens_core import ContactHamiltonian, lift_hamiltonian, perturbed_reeb

    h = cfg["hamiltonian"]
    if isinstance(h, dict):
        H = ContactHamiltonian.from_spec(h)
        if H.n != lens.n:
            raise UsageError(f"hamiltonian has n={H.n}, lens has n={lens.n}")
        lift_hamiltonian(H, lens)
        return H
    if h == "reeb":
        return ContactHamiltonian.reeb(lens.n)
    if h == "zero":
        return ContactHamiltonian.zero(lens.n)
    if h == "perturbed":
        return perturbed_reeb(lens, cfg["eps"], cfg["ham_seed"])
    raise UsageError(f"unknown hamiltonian {h!r}")


def _lens_args(p, n_default=2):
    p.add_argument("--k", type=int, default=3, help="prime order of the group")
    p.add_argument("--n", type=int, default=n_default, help="complex dimension")
    p.add_argument("--weights", type=int, nargs="*", default=None, help="weights (default all 1)")


def _ham_args(p):
    p.add_argument("--hamiltonian", default="perturbed", help="reeb, zero or perturbed (a spec dict in a config file)")
    p.add_argument("--eps", type=float, default=0.1, help="size of the perturbation")
    p.add_argument("--ham-seed", type=int, default=0, help="seed of the perturbation")
    p.add_argument("--time", type=float, default=1.0, help="flow time")


# ----------------------------------------------------------------------------
# commands; each returns (exit code, summary line, result dict, figure writer)


def cmd_linear_maslov(cfg):
    from lensmaslov.maslov import linear_path_family, loop_power, nu_sp_loop, random_loop, standard_loop, winding_index

    n = cfg["n"]
    contract = None
    if cfg["samples_file"]:
        from lensmaslov.maslov import MaslovError

        S = np.load(cfg["samples_file"])
        try:
            rep = nu_sp_loop(S)
        except MaslovError as exc:
            raise UsageError(str(exc)) from exc
        source = f"samples {cfg['samples_file']}"
    elif cfg["random_loop"] is not None:
        loop, expected = random_loop(n, np.random.default_rng(cfg["random_loop"]))
        loop = loop_power(loop, cfg["power"])
        expected *= cfg["power"]
        rep = nu_sp_loop(loop)
        contract = {"expected": expected, "winding_oracle": winding_index(loop)}
        source = f"random loop seed {cfg['random_loop']}"
    else:
        loop = loop_power(standard_loop(n), cfg["power"])
        rep = nu_sp_loop(loop, strategy="uniform")
        contract = {"expected": 2 * n * cfg["power"]}
        source = "standard loop"
    res = {"nu": rep.mu, "ind_start": rep.ind_start, "ind_end": rep.ind_end, "pieces": rep.details.get("pieces"), "source": source}
    ok = True
    if contract:
        res["contract"] = contract
        ok = rep.mu == contract["expected"] and contract.get("winding_oracle", rep.mu) == rep.mu
        res["contract"]["passed"] = ok

    def figure(out):
        from lensmaslov.plotting import index_staircase
        from lensmaslov.quadform import index_i

        if cfg["samples_file"]:
            return None
        from lensmaslov.maslov import decompose_linear_path

        I = np.eye(2 * n)
        A0inv = np.linalg.inv(loop(0.0))
        path = lambda t: I if t >= 1.0 else loop(t) @ A0inv  # noqa: E731
        bps = decompose_linear_path(path)
        fam = linear_path_family(path, bps)
        ts = np.linspace(0, 1, 201)
        return index_staircase(ts, [index_i(fam(t)) for t in ts], out / "linear_maslov.png", f"nu = {rep.mu}", bps)

    return (EXIT_OK if ok else EXIT_CONTRACT), f"nu = {rep.mu} ({source})", res, figure


def cmd_reeb_mu(cfg):
    from lensmaslov.maslov import mu_reeb, reeb_family
    from lensmaslov.plotting import index_staircase
    from lensmaslov.quadform import index_i

    n, k, l = cfg["n"], cfg["k"], cfg["l"]
    rep = mu_reeb(n, k, l, locate_jumps=True)
    expected = 2 * n * l
    res = rep.as_dict()
    res["expected"] = expected
    ok = rep.mu == expected

    def figure(out):
        fam = reeb_family(n, k, l)
        ts = np.linspace(0, 1, 201)
        return index_staircase(ts, [index_i(fam(t)) for t in ts], out / "reeb_mu.png", f"Reeb, n={n}, k={k}, l={l}: mu = {rep.mu}", fam.breakpoints)

    return (EXIT_OK if ok else EXIT_CONTRACT), f"mu = {rep.mu} (expected {expected})", res, figure


def cmd_translated_points(cfg):
    from lensmaslov.contact_dyn import FlowMap, translated_points
    from lensmaslov.plotting import translated_points_plot

    lens = _lens(cfg)
    H = _hamiltonian(cfg, lens)
    search = translated_points(FlowMap(H, cfg["time"]), lens, seeds=cfg["seeds"], seed=cfg["seed"])
    nd = search.nondegenerate
    res = {
        "points": [p.as_dict() for p in search.points],
        "nondegenerate": len(nd),
        "degenerate_family": search.degenerate_family,
        "converged": search.converged,
        "seeds": search.seeds,
        "warnings": search.warnings,
        "lower_bound": 2 * lens.n,
    }
    ok = search.degenerate_family or len(nd) >= 2 * lens.n
    res["lower_bound_met"] = bool(len(nd) >= 2 * lens.n)

    def figure(out):
        pts = search.points
        return translated_points_plot([p.eta for p in pts], [p.residual for p in pts], [p.nondegenerate for p in pts],
                                      out / "translated_points.png", f"{len(nd)} nondegenerate translated points")

    summary = f"{len(nd)} nondegenerate translated points" + (" (degenerate family)" if search.degenerate_family else "")
    return (EXIT_OK if ok else EXIT_CONTRACT), summary, res, figure


def cmd_crossings(cfg):
    from lensmaslov.contact_dyn import discriminant_times
    from lensmaslov.maslov import crossing_report
    from lensmaslov.plotting import crossings_plot

    lens = _lens(cfg)
    H = _hamiltonian(cfg, lens)
    T = cfg["time"]
    scan = discriminant_times(H, lens, T)
    rep = crossing_report(H, lens, T, scan=scan)
    res = rep.as_dict()
    res["times"] = [d.as_dict() for d in scan.times]
    res["every_time"] = scan.every_time
    ok = rep.mu is None or rep.bounds[0] <= rep.mu <= rep.bounds[1]

    def figure(out):
        lo, hi = [rep.details["start_jump"][0]], [rep.details["start_jump"][1]]
        for b in rep.jump_bounds:
            lo.append(lo[-1] + b[0])
            hi.append(hi[-1] + b[1])
        return crossings_plot(T, rep.jump_times, lo, hi, out / "crossings.png", f"{len(rep.jump_times)} crossings")

    mu = f"mu = {rep.mu}, " if rep.mu is not None else ""
    return (EXIT_OK if ok else EXIT_CONTRACT), f"{len(rep.jump_times)} crossings, {mu}bounds {list(rep.bounds)}", res, figure


def _equiv_model(cfg):
    from lensmaslov.equivtop import QuotientComplex, complex_from_text, sphere_model

    if cfg["complex_file"]:
        X, subs = complex_from_text(Path(cfg["complex_file"]).read_text())
        return QuotientComplex(X), subs, False
    weights = cfg["weights"] or [1] * cfg["M"]
    if len(weights) != cfg["M"]:
        raise UsageError(f"{len(weights)} weights given for M={cfg['M']}")
    return QuotientComplex(sphere_model(cfg["k"], weights)), {}, True


def cmd_equivtop_homology(cfg):
    from lensmaslov.equivtop import betti, bockstein, cohomology_basis
    from lensmaslov.equivtop.homology import is_coboundary
    from lensmaslov.plotting import bars

    Q, _, is_lens = _equiv_model(cfg)
    b = betti(Q)
    boc = []
    for d in range(Q.dim):
        basis = cohomology_basis(Q, d)
        boc.append([not is_coboundary(Q, bockstein(Q, c)) for c in basis])
    res = {"betti": b, "f_vector": list(Q.f_vector()), "bockstein_nonzero": boc, "k": Q.k}
    ok = True
    if is_lens:
        ok = b == [1] * (Q.dim + 1) and all(x == [d % 2 == 1] for d, x in enumerate(boc))
        res["lens_pattern"] = ok

    def figure(out):
        return bars([f"H_{d}" for d in range(len(b))], b, out / "homology.png", "dim over Z_k", f"homology mod {Q.k}")

    return (EXIT_OK if ok else EXIT_CONTRACT), f"betti mod {Q.k}: {b}", res, figure


def cmd_equivtop_index(cfg):
    from lensmaslov.equivtop import IndexShapeError, cohom_index
    from lensmaslov.equivtop.homology import inclusion_ranks, restriction_ranks
    from lensmaslov.plotting import bars

    Q, subs, is_lens = _equiv_model(cfg)
    name = cfg["sub"]
    expected = None
    if name == "full":
        A = Q.full()
        expected = Q.dim + 1 if is_lens else None
    elif name == "empty":
        A, expected = Q.empty(), 0
    elif name == "vertex":
        A, expected = Q.vertex(), 1
    elif name.startswith("lens:"):
        r = int(name.split(":", 1)[1])
        if not 1 <= r <= len(Q.X.factors):
            raise UsageError(f"lens subspace needs 1 <= r <= {len(Q.X.factors)}")
        A, expected = Q.lens_subspace(range(r)), 2 * r
    elif name in subs:
        A = Q.subcomplex(subs[name])
    else:
        raise UsageError(f"unknown subcomplex {name!r}")
    res = {"sub": name, "restriction_ranks": restriction_ranks(A), "inclusion_ranks": inclusion_ranks(A)}
    try:
        ind = cohom_index(A, cross_check=True)
    except IndexShapeError as exc:
        res["error"] = str(exc)
        return EXIT_CONTRACT, f"index shape violated: {exc}", res, None
    res["ind"] = ind
    ok = expected is None or ind == expected
    if expected is not None:
        res["expected"] = expected

    def figure(out):
        rr = res["restriction_ranks"]
        return bars([f"H^{d}" for d in range(len(rr))], rr, out / "index.png", "rank of restriction", f"ind = {ind}")

    return (EXIT_OK if ok else EXIT_CONTRACT), f"ind = {ind}", res, figure


def cmd_property_suite(cfg):
    from lensmaslov.equivtop import property_suite
    from lensmaslov.plotting import bars

    rep = property_suite(cfg["samples"], cfg["seed"], cfg["k"])
    res = rep.as_dict()

    def figure(out):
        names = sorted(rep.checks)
        return bars(names, [rep.checks[n]["run"] - rep.checks[n]["failed"] for n in names], out / "property_suite.png",
                    "checks passed", f"{len(rep.violations)} violations")

    return (EXIT_OK if rep.ok else EXIT_CONTRACT), f"{len(rep.violations)} violations in {cfg['samples']} samples", res, figure


def cmd_defect_suite(cfg):
    from lensmaslov.maslov import defect_suite
    from lensmaslov.plotting import defect_histogram

    n = cfg["n"]
    rows = defect_suite(n, cfg["pairs"], cfg["seed"])
    worst = max(r["defect"] for r in rows)
    ok = worst <= 2 * n + 1
    res = {"pairs": rows, "max_defect": worst, "bound": 2 * n + 1}

    def figure(out):
        return defect_histogram([r["defect"] for r in rows], 2 * n + 1, out / "defect_suite.png", f"n = {n}")

    return (EXIT_OK if ok else EXIT_CONTRACT), f"max defect {worst} (bound {2 * n + 1})", res, figure


def cmd_reproduce(cfg):
    from lensmaslov import acceptance
    from lensmaslov.genfun import coupling_sign_mutation
    from lensmaslov.plotting import acceptance_plot

    selected = set(cfg["only"] or [])
    fns = [f for f in acceptance.CRITERIA if not selected or int(f.__name__.rsplit("_", 1)[1]) in selected]
    if cfg["mutation"]:
        # the mutation flips a module global, so run sequentially inside the context
        with coupling_sign_mutation():
            rows = [f() for f in fns]
    else:
        with ThreadPoolExecutor(max_workers=threads()) as pool:
            rows = list(pool.map(lambda f: f(), fns))
    for r in rows:
        print(r.line())
    table = [{"id": r.id, "claim": r.claim, "value": r.value, "expected": r.expected, "passed": r.passed, "details": r.details}
             for r in rows]
    timings = [{"id": r.id, "seconds": r.seconds, "limit_seconds": r.limit_seconds} for r in rows]
    ok = all(r.passed for r in rows)
    res = {"rows": table, "all_passed": ok, "mutation": cfg["mutation"]}

    def figure(out):
        from lensmaslov.report import to_jsonable

        (out / "timings.json").write_text(json.dumps(to_jsonable(timings), sort_keys=True, indent=2) + "\n")
        return acceptance_plot([{**t, "passed": r.passed} for t, r in zip(timings, rows)], out / "acceptance.png")

    passed = sum(r.passed for r in rows)
    return (EXIT_OK if ok else EXIT_CONTRACT), f"{passed}/{len(rows)} criteria passed", res, figure


COMMANDS = {
    "linear-maslov": cmd_linear_maslov,
    "reeb-mu": cmd_reeb_mu,
    "translated-points": cmd_translated_points,
    "crossings": cmd_crossings,
    "equivtop-homology": cmd_equivtop_homology,
    "equivtop-index": cmd_equivtop_index,
    "property-suite": cmd_property_suite,
    "defect-suite": cmd_defect_suite,
    "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lensmaslov", description="Generating functions and Maslov indices on lens spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", default="lensmaslov-out", help="directory for reports and figures")
    common.add_argument("--config", default=None, help="JSON file whose keys override the flags")
    common.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("linear-maslov", parents=[common], help="nu of a loop in Sp(2n)")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--standard-loop", action="store_true", help="t -> exp(2 pi i t) (default)")
    p.add_argument("--random-loop", type=int, default=None, metavar="SEED", help="random loop with known index")
    p.add_argument("--samples-file", default=None, help=".npy array of shape (m+1, 2n, 2n) sampling a closed loop")
    p.add_argument("--power", type=int, default=1, help="iterate the loop this many times")

    p = sub.add_parser("reeb-mu", parents=[common], help="mu of Reeb iterates")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--l", type=int, default=1)

    p = sub.add_parser("translated-points", parents=[common], help="translated points of a contact flow")
    _lens_args(p)
    _ham_args(p)
    p.add_argument("--seeds", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("crossings", parents=[common], help="discriminant times and bounds on mu")
    _lens_args(p)
    _ham_args(p)
    p.set_defaults(hamiltonian="reeb", time=2 * math.pi)

    for name, helptext in (("equivtop-homology", "homology and Bockstein of a lens model"),
                           ("equivtop-index", "cohomological index of a subcomplex")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--M", type=int, default=2)
        p.add_argument("--weights", type=int, nargs="*", default=None)
        p.add_argument("--complex-file", default=None, help="complex in the equivcomplex text format")
        if name == "equivtop-index":
            p.add_argument("--sub", default="full", help="full, empty, vertex, lens:r, or a named sub from the file")

    p = sub.add_parser("property-suite", parents=[common], help="randomized index property checks")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("defect-suite", parents=[common], help="quasimorphism defect on random linear paths")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("reproduce", parents=[common], help="run the acceptance suite")
    p.add_argument("--mutation", action="store_true", help="flip the sign of the sharp coupling term")
    p.add_argument("--only", type=int, nargs="*", default=None, help="criterion ids to run")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "out_dir", "no_plots", "command")}
    if args.config:
        try:
            extra = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(extra, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(k.replace("-", "_") for k in extra) - set(cfg))
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {unknown}")
        cfg.update({k.replace("-", "_"): v for k, v in extra.items()})
    return cfg


def main(argv=None) -> int:
    from lensmaslov.report import write_report

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        code, summary, result, figure = COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"lensmaslov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"lensmaslov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out_dir)
    path = write_report(out, args.command, cfg, result)
    if figure is not None and not args.no_plots:
        figure(out)
    print(f"{args.command}: {summary} [{'ok' if code == EXIT_OK else 'CONTRACT VIOLATION'}] -> {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
