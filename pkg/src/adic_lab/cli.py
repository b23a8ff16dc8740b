"""``adic-lab``: command-line front end.

Every subcommand writes a JSON report to stdout and a one-line summary to
stderr.  Reports carry the input's sha256 and every parameter that shaped the
result.  Exit status is 2 for malformed input and 1 when a precondition fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import __version__
from .certificate import Certificate, DiagramError, GuardError
from .diagram import Diagram, TelescopePlan, gcd_condition, simplicity_check, telescope
from .dimgroup import (
    GroupElement,
    constant_image_test,
    element,
    miscibility_certificate,
    rational_subgroup_probe,
    rational_trace,
    spectral_rank_bound,
    trace_intervals,
    unit_divisors,
)
from .document import DiagramDocument, export_dot, jsonable, load, save
from .dynamics import (
    EdgeOrdering,
    PathPrefix,
    check_c47,
    iterate_orbit,
    min_prefix,
    proper_order_check,
    return_times,
    truncation_factor_check,
)
from .spectrum import (
    CylinderFunction,
    integer_coboundary_check,
    odometer_spectrum,
    theta_map,
    theta_relation_holds,
    verify_rational_eigenvalue,
)
from .weakmix import build_weakmix_order, coin_solve, frobenius_representable

STATIONARY_DEPTH = 8


# -- argument parsing helpers --------------------------------------------------------


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational 'a/b', got {text!r}") from None


def _cylinder_specs(text: str) -> list[tuple[int, int]]:
    """``"1@0,2@3"`` -> ``[(0, 0), (1, 3)]`` (vertex made 0-based)."""
    out = []
    for part in text.split(","):
        try:
            v, f = part.strip().split("@")
            out.append((int(v) - 1, int(f)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"cylinders look like 'v@floor', got {part!r}") from None
    return out


def _weighted_specs(text: str) -> dict[tuple[int, int], int]:
    """``"1@0:2,2@1:-1"`` -> coefficients keyed by ``(vertex, floor)``; weight defaults to 1."""
    out: dict[tuple[int, int], int] = {}
    if not text.strip():
        return out
    for part in text.split(","):
        cyl, _, w = part.partition(":")
        (key,) = _cylinder_specs(cyl)
        try:
            out[key] = out.get(key, 0) + (int(w) if w else 1)
        except ValueError:
            raise argparse.ArgumentTypeError(f"weight must be an integer in {part!r}") from None
    return out


def _cylinders(ordering: EdgeOrdering, level: int, specs: Sequence[tuple[int, int]]) -> list[PathPrefix]:
    d = ordering.diagram
    d.check_level(level)
    out = []
    for v, f in specs:
        if not 0 <= v < d.n(level):
            raise DiagramError(f"vertex {v + 1} does not exist at level {level}")
        out.append(ordering.path_at_floor(level, v, f))
    return out


def _path_json(p: PathPrefix) -> dict:
    return {"end": p.end + 1, "edges": [[s + 1, c + 1] for s, c in p.edges]}


# -- context --------------------------------------------------------------------------


class Run:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.doc: DiagramDocument | None = None
        self.sha256: str | None = None
        if getattr(args, "doc", None):
            self.doc, self.sha256 = load(args.doc)

    @property
    def diagram(self) -> Diagram:
        assert self.doc is not None
        return self.doc.diagram

    def depth(self) -> int:
        return self.diagram.resolve_depth(getattr(self.args, "depth", None), STATIONARY_DEPTH)

    def ordering(self) -> EdgeOrdering:
        assert self.doc is not None
        return self.doc.edge_ordering(self.depth())


# -- subcommands ----------------------------------------------------------------------


def cmd_heights(run: Run) -> tuple[Any, str]:
    d, m = run.diagram, run.depth()
    hs = {k: list(d.heights(k)) for k in range(1, m + 1)}
    return {"heights": hs}, f"heights up to level {m}: {hs[m]}"


def cmd_gcd_check(run: Run):
    c = gcd_condition(run.diagram, run.depth())
    return c, c.message


def cmd_telescope(run: Run):
    t = telescope(run.diagram, TelescopePlan(tuple(run.args.cuts)))
    doc = DiagramDocument(t)
    if run.args.out:
        save(doc, run.args.out)
    return {"plan": run.args.cuts, "document": doc.to_dict()}, f"telescoped to {t.stored_depth} levels"


def cmd_simplicity(run: Run):
    c = simplicity_check(run.diagram, run.args.window, getattr(run.args, "depth", None))
    return c, c.message


def cmd_order(run: Run):
    a = run.args
    if a.style == "left-right":
        o = EdgeOrdering.left_to_right(run.diagram, run.depth())
        doc = DiagramDocument.from_ordering(o)
        report = {"style": a.style, "document": doc.to_dict()}
        summary = f"left-to-right ordering to depth {o.depth}"
    else:
        system = build_weakmix_order(run.diagram, run.depth(), verify=not a.no_verify, budget=a.budget, max_gap=a.max_gap)
        doc = DiagramDocument.from_ordering(system.ordering)
        report = {"style": a.style, "document": doc.to_dict(), **system.to_dict()}
        summary = f"telescoped along {list(system.plan.cut_levels)}"
        if system.c47 is not None:
            summary += f"; check_C47 {system.c47.status}"
    if a.out:
        save(doc, a.out)
    return report, summary


def cmd_proper_check(run: Run):
    c = proper_order_check(run.ordering())
    return c, f"min paths {c.min_count}, max paths {c.max_count}"


def cmd_orbit(run: Run):
    o = run.ordering()
    pts = [_path_json(p) for p in iterate_orbit(min_prefix(o, o.depth), o, run.args.steps)]
    return {"points": pts}, f"{len(pts)} orbit points at depth {o.depth}"


def cmd_returns(run: Run):
    o = run.ordering()
    (target,) = _cylinders(o, run.args.level, _cylinder_specs(run.args.cylinder))
    times = return_times(o, target, o.depth, run.args.budget)
    shown = times[: run.args.limit]
    return {"count": len(times), "times": shown, "shown": len(shown)}, f"{len(times)} visits"


def cmd_c47(run: Run):
    c = check_c47(run.ordering(), run.args.kmax, budget=run.args.budget)
    return c, c.message


def cmd_yk(run: Run):
    a = run.args
    c = truncation_factor_check(run.ordering(), a.level, run_length=a.run_length, budget=a.budget, max_cylinders=a.max_cylinders)
    return c, c.message


def cmd_coin(run: Run):
    a = run.args
    if a.heights is not None:
        if a.target is None:
            raise GuardError("--heights needs --target")
        x = frobenius_representable(a.heights, a.target)
        return {"heights": a.heights, "target": a.target, "x": x}, "not representable" if x is None else f"x = {list(x)}"
    if run.doc is None or a.level is None:
        raise GuardError("coin needs a document with --level, or --heights with --target")
    s = coin_solve(run.diagram, a.level, min_ell=a.min_ell, min_x1=a.min_x1)
    return s, f"l = {s.ell}, x = {list(s.x)}"


def _element(run: Run) -> GroupElement:
    a = run.args
    if a.vector is None:
        raise GuardError("an element needs --vector")
    return element(run.diagram, a.level, a.vector)


def cmd_traces(run: Run):
    g = _element(run)
    ivs = trace_intervals(run.diagram, g, g.level, run.depth())
    nested = all(b.lower >= a.lower and b.upper <= a.upper for a, b in zip(ivs, ivs[1:]))
    c = constant_image_test(run.diagram, g, run.depth(), run.args.tol)
    last = ivs[-1]
    return {"intervals": ivs, "nested": nested, "constant_image": c}, f"[{last.lower}, {last.upper}] at level {last.level}"


def cmd_rational_trace(run: Run):
    t = rational_trace(run.diagram, _element(run))
    return {"trace": t}, f"tau = {t}"


def cmd_rat_subgroup(run: Run):
    a = run.args
    if a.vector is None:
        c = unit_divisors(run.diagram, a.bound, run.depth())
    else:
        c = rational_subgroup_probe(run.diagram, _element(run), a.bound, run.depth())
    return c, c.message


def cmd_miscibility(run: Run):
    a = run.args
    d = run.doc.diagram if run.doc else None
    level = run.depth() if run.doc else STATIONARY_DEPTH
    m = miscibility_certificate(d, a.n, a.r, a.fg, level=level, tol=a.tol)
    return m, f"{m.verdict}" + (f" ({m.reason})" if m.reason else "")


def cmd_rank_bound(run: Run):
    a = run.args
    b = spectral_rank_bound(a.rank, a.n, a.fg)
    return {"max_rank_E": b}, f"rank E(X,T) <= {b}"


def cmd_odometer_spectrum(run: Run):
    s = odometer_spectrum(run.args.base, run.args.denom_bound)
    return {"spectrum": s}, f"{len(s)} rational eigenvalue angles"


def cmd_verify_eigen(run: Run):
    a = run.args
    o = run.ordering()
    cyl = _cylinders(o, a.level, _cylinder_specs(a.cylinders)) if a.cylinders else []
    c = verify_rational_eigenvalue(o, a.theta, cyl, o.depth, a.samples, a.budget)
    return c, c.message


def cmd_theta(run: Run):
    a = run.args
    d = run.diagram
    cyl = None
    if a.cylinders:
        cyl = _cylinders(run.ordering(), a.level, _cylinder_specs(a.cylinders))
    img = theta_map(d, a.theta, cyl, a.max_level, a.max_count)
    ok = theta_relation_holds(d, img)
    return {"image": img, "relation_q_theta_eq_p_u": ok}, f"Theta({a.theta}) = {list(img.element.vector)} at level {img.element.level}"


def cmd_cobound(run: Run):
    a = run.args
    o = run.ordering()
    f = CylinderFunction(a.level, _weighted_specs(a.f))
    g = CylinderFunction(a.level, _weighted_specs(a.g))
    c = integer_coboundary_check(o, f, g, o.depth, a.horizon, a.factor)
    return c, c.message


def cmd_export_dot(run: Run):
    text = export_dot(run.ordering())
    if run.args.out:
        with open(run.args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return {"dot": text}, f"DOT graph with {text.count('->')} edge bundles"


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adic-lab", description="Bratteli-Vershik systems at finite depth.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=None, help="accepted for compatibility; every command is deterministic")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, doc: str | bool = True, depth: bool = True, **kw) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, **kw)
        if doc:
            sp.add_argument("doc", nargs=None if doc is True else "?", help="diagram JSON document")
        if depth:
            sp.add_argument("--depth", type=int, default=None, help="levels to use (default: stored, or 8 if stationary)")
        sp.set_defaults(func=fn)
        return sp

    add("heights", cmd_heights, help="tower heights per level")
    add("gcd-check", cmd_gcd_check, help="gcd of heights at every level")
    sp = add("telescope", cmd_telescope, depth=False, help="telescope along cut levels")
    sp.add_argument("--cuts", type=_ints, required=True, help="e.g. 0,1,3,5")
    sp.add_argument("--out", default=None)
    sp = add("simplicity", cmd_simplicity, help="search for a telescoping into positive blocks")
    sp.add_argument("--window", type=int, default=4)
    sp = add("order", cmd_order, help="write an ordering")
    sp.add_argument("--style", choices=["left-right", "theorem48"], default="left-right")
    sp.add_argument("--out", default=None)
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--max-gap", type=int, default=64)
    sp.add_argument("--no-verify", action="store_true")
    add("proper-check", cmd_proper_check, help="count visible min/max infinite paths")
    sp = add("orbit", cmd_orbit, help="orbit of the minimal path")
    sp.add_argument("--steps", type=int, default=32)
    sp = add("returns", cmd_returns, help="return times to a cylinder")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--cylinder", required=True, help="v@floor")
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--limit", type=int, default=100)
    sp = add("c47-check", cmd_c47, help="consecutive return lags for the minimal cylinders")
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--budget", type=int, default=10**6)
    sp = add("yk-check", cmd_yk, help="consecutive lags for every pair of level-k cylinders")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--run-length", type=int, default=2)
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--max-cylinders", type=int, default=256)
    sp = add("coin", cmd_coin, doc="optional", depth=False, help="coin problem on tower heights")
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--min-ell", type=int, default=1)
    sp.add_argument("--min-x1", type=int, default=0)
    sp.add_argument("--heights", type=_ints, default=None)
    sp.add_argument("--target", type=int, default=None)

    def element_args(sp: argparse.ArgumentParser, required: bool = True) -> None:
        sp.add_argument("--vector", type=_ints, required=required, default=None)
        sp.add_argument("--level", type=int, default=1)

    sp = add("traces", cmd_traces, help="trace intervals of an element")
    element_args(sp)
    sp.add_argument("--tol", type=_rational, default=Fraction(1, 1000))
    sp = add("rational-trace", cmd_rational_trace, depth=False, help="exact trace for equal column sums")
    element_args(sp)
    sp = add("rat-subgroup", cmd_rat_subgroup, help="relations p g = n u (or divisors of u without --vector)")
    element_args(sp, required=False)
    sp.add_argument("--bound", type=int, default=50)
    sp = add("miscibility", cmd_miscibility, doc="optional", help="irrational miscibility verdict")
    sp.add_argument("--n", type=int, default=None, help="number of pure traces")
    sp.add_argument("--r", type=int, default=None, help="rank of G/Inf(G)")
    sp.add_argument("--fg", action="store_true", help="G/Inf(G) finitely generated")
    sp.add_argument("--tol", type=_rational, default=Fraction(1, 1000))
    sp = add("rank-bound", cmd_rank_bound, doc=False, depth=False, help="largest possible rank of E(X,T)")
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--fg", action="store_true")
    sp = add("odometer-spectrum", cmd_odometer_spectrum, doc=False, depth=False, help="rational spectrum of an odometer")
    sp.add_argument("--base", type=_ints, required=True)
    sp.add_argument("--denom-bound", type=int, required=True)
    sp = add("verify-eigen", cmd_verify_eigen, help="check an explicit rational eigenfunction")
    sp.add_argument("--theta", type=_rational, required=True)
    sp.add_argument("--level", type=int, default=1)
    sp.add_argument("--cylinders", default=None, help="U as v@floor,...")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--budget", type=int, default=10**6)
    sp = add("theta", cmd_theta, help="class of a rational eigenvalue in K0")
    sp.add_argument("--theta", type=_rational, required=True)
    sp.add_argument("--level", type=int, default=1)
    sp.add_argument("--cylinders", default=None)
    sp.add_argument("--max-level", type=int, default=4)
    sp.add_argument("--max-count", type=int, default=64)
    sp = add("cobound-check", cmd_cobound, help="bounded Birkhoff sums of f - g")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--f", default="", help="v@floor[:weight],...")
    sp.add_argument("--g", default="", help="v@floor[:weight],...")
    sp.add_argument("--horizon", type=int, default=10**6)
    sp.add_argument("--factor", type=int, default=50)
    sp = add("export-dot", cmd_export_dot, help="Graphviz rendering with order indices")
    sp.add_argument("--out", default=None)
    return p


def _params(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "command", "doc")}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = Run(args)
        result, summary = args.func(run)
    except DiagramError as e:
        print(f"adic-lab {args.command}: malformed input: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"adic-lab {args.command}: cannot read input: {e}", file=sys.stderr)
        return 2
    except GuardError as e:
        print(f"adic-lab {args.command}: {e}", file=sys.stderr)
        return 1
    report = {
        "command": args.command,
        "version": __version__,
        "input": None if run.sha256 is None else {"path": args.doc, "sha256": run.sha256},
        "params": _params(args),
        "result": result,
    }
    if isinstance(result, Certificate):
        report["status"] = result.status
    json.dump(jsonable(report), sys.stdout, indent=2)
    sys.stdout.write("\n")
    print(f"{args.command}: {summary}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
