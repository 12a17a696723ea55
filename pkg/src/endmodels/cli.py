"""Command-line front end.

Every command reads a model file (or builds one from ``--family`` and
``--params``) and writes deterministic text artifacts.  Exit status is 0 on
success, 1 on runtime failure and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import builders as B
from . import checks as K
from . import graph as G
from . import hierarchy as H
from . import rays as R
from . import serialize as S
from .model import validate

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", nargs="?", help="model file (JSON)")
    common.add_argument("--family", choices=B.FAMILIES)
    common.add_argument("--params", help="JSON file with family parameters")
    common.add_argument("--horizon", type=int, default=20)
    common.add_argument("--C", type=float, default=None, help="almost-minimizing constant (default 4D)")
    common.add_argument("--eps", type=float, default=None, help="thinness threshold (default eps0*e^-5)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="endmodels", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="write a family model file")
    sub.add_parser("validate", parents=[common], help="check model invariants")
    sub.add_parser("discretize", parents=[common], help="build the metric graph, write CSV and DOT")
    ex = sub.add_parser("export-graph", parents=[common], help="write the metric graph")
    ex.add_argument("--format", choices=("csv", "dot"), default="csv")
    d = sub.add_parser("distance", parents=[common], help="shortest distance between two node ids")
    d.add_argument("--from", dest="a", required=True)
    d.add_argument("--to", dest="b", required=True)
    t = sub.add_parser("thickness", parents=[common], help="block thickness table")
    t.add_argument("--all", action="store_true")
    t.add_argument("--block", type=int)
    c = sub.add_parser("classify", parents=[common], help="trace and classify a ray")
    c.add_argument("--strategy", default="minimizing",
                   help="vertical:COMP | minimizing | winding[:n0,n1,...] | explicit:ID,ID,...")
    r = sub.add_parser("report", parents=[common], help="bundle thickness, verdicts and checks")
    r.add_argument("--acceptance", action="store_true", help="also run the full acceptance suite")
    return p


# loading ------------------------------------------------------------------------------

def _family_params(args) -> B.FamilyParams:
    params = {}
    if args.params:
        try:
            params = json.loads(Path(args.params).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read params file: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"params file is not valid JSON: {exc}") from None
        if not isinstance(params, dict):
            raise InputError("params file must hold a JSON object")
    return B.FamilyParams(args.family, params, args.seed)


def _load(args):
    """Return ``(model, hierarchy, family_params_or_None)``."""
    if args.model:
        try:
            text = Path(args.model).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read model file: {exc.strerror}") from None
        model, hier = S.loads(text)
        return model, hier, None
    if not args.family:
        raise InputError("give a model file or --family")
    fp = _family_params(args)
    model, hier = B.build_with_hierarchy(fp)
    return model, hier, fp


def _checked(model):
    bad = validate(model)
    if bad:
        raise InputError("; ".join(str(v) for v in bad))
    return model


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    keys = ("command", "model", "family", "params", "horizon", "C", "eps", "seed", "strategy", "acceptance")
    cfg = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    if args.params:
        cfg["params_content"] = json.loads(Path(args.params).read_text(encoding="utf-8"))
    return cfg


# commands -------------------------------------------------------------------------------

def cmd_build(args) -> int:
    if not args.family:
        raise InputError("build needs --family")
    fp = _family_params(args)
    model, hier = B.build_with_hierarchy(fp)
    _emit(args, "model.json", S.dumps(model, hier))
    return EXIT_OK


def cmd_validate(args) -> int:
    model, hier, _ = _load(args)
    bad = validate(model)
    lines = [str(v) for v in bad]
    if hier is not None and not bad:
        lines += [f"hierarchy: {i}" for i in H.check_hierarchy(hier)]
        lines += [f"hierarchy: tally mismatch for tube {t}" for t in H.tally_mismatches(model, hier)]
    if lines:
        raise InputError("; ".join(lines))
    sys.stdout.write(f"ok: {len(model.blocks)} blocks\n")
    return EXIT_OK


def cmd_discretize(args) -> int:
    g = G.discretize(_checked(_load(args)[0]))
    if args.out:
        _emit(args, "graph.csv", G.to_csv(g))
        _emit(args, "graph.dot", G.to_dot(g))
    sys.stdout.write(f"nodes {g.n_nodes} edges {g.n_edges} blocks {g.n_blocks}\n")
    return EXIT_OK


def cmd_export(args) -> int:
    g = G.discretize(_checked(_load(args)[0]))
    text = G.to_csv(g) if args.format == "csv" else G.to_dot(g)
    _emit(args, f"graph.{args.format}", text)
    return EXIT_OK


def cmd_distance(args) -> int:
    g = G.discretize(_checked(_load(args)[0]))
    try:
        length, path = G.shortest_distance(g, args.a, args.b)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    _emit(args, "distance.txt", f"length {length:.9g}\npath {' '.join(path)}\n")
    return EXIT_OK


def thickness_csv(g: G.MetricGraph, blocks) -> str:
    lines = ["block,thickness"]
    for i in blocks:
        lines.append(f"{i},{G.block_thickness(g, i):.9g}")
    return "\n".join(lines) + "\n"


def cmd_thickness(args) -> int:
    g = G.discretize(_checked(_load(args)[0]))
    if args.all:
        blocks = range(g.n_blocks)
    elif args.block is not None:
        if not 0 <= args.block < g.n_blocks:
            raise InputError(f"no block {args.block}")
        blocks = [args.block]
    else:
        raise InputError("thickness needs --all or --block")
    _emit(args, "thickness.csv", thickness_csv(g, blocks))
    return EXIT_OK


def parse_strategy(text: str, model) -> R.Strategy:
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "minimizing":
        return R.Minimizing()
    if kind == "vertical":
        if not arg:
            raise InputError("vertical strategy needs a component, e.g. vertical:S0")
        return R.Vertical(arg)
    if kind == "winding":
        if arg:
            try:
                return R.Winding(tuple(int(x) for x in arg.split(",")))
            except ValueError:
                raise InputError("winding counts must be integers") from None
        return R.Winding(tuple(B.winding_counts(model)))
    if kind == "explicit":
        return R.Explicit(tuple(x for x in arg.split(",") if x))
    raise InputError(f"unknown strategy {text!r}")


def _classify_text(g, model, strategy, args):
    ray = R.trace_ray(g, strategy, args.horizon)
    prof = R.deficit_profile(g, ray)
    cls = R.classify(g, ray, args.C, args.eps, profile=prof)
    return ray, cls


def cmd_classify(args) -> int:
    model = _checked(_load(args)[0])
    g = G.discretize(model)
    strategy = parse_strategy(args.strategy, model)
    ray, cls = _classify_text(g, model, strategy, args)
    head = "config: " + json.dumps(_config(args), sort_keys=True) + "\n"
    _emit(args, "classify.txt", head + R.report(g, ray, cls))
    return EXIT_OK


def _report_strategies(model, g):
    base = g.surfaces[g.base_node][1]
    return [
        ("Vertical", R.Vertical(base)),
        ("Minimizing", R.Minimizing()),
        ("Winding", R.Winding(tuple(B.winding_counts(model)))),
    ]


def cmd_report(args) -> int:
    model, hier, fp = _load(args)
    _checked(model)
    g = G.discretize(model)
    out = ["config: " + json.dumps(_config(args), sort_keys=True)]
    if fp is not None:
        out.append("family: " + fp.family)
        out.append("params: " + json.dumps(fp.params, sort_keys=True))
    out.append(f"graph: nodes {g.n_nodes} edges {g.n_edges} blocks {g.n_blocks}")
    out.append("thickness:")
    out.append(thickness_csv(g, range(g.n_blocks)).rstrip("\n"))
    out.append("verdicts:")
    col = K.Collector()
    exclusive = True
    for name, strategy in _report_strategies(model, g):
        try:
            ray, cls = _classify_text(g, model, strategy, args)
        except R.RayError as exc:
            out.append(f"{name}: n/a ({exc})")
            continue
        col.add(name, cls.profile)
        out.append(f"{name}: {cls.summary()}")
        exclusive &= (cls.horosphere is None) or cls.horosphere == R.horosphere(cls.am, cls.thick)
    out.append("checks:")
    lines = [K.CheckResult(0, "model validates", True, "no violations").line()]
    if hier is not None:
        mism = H.tally_mismatches(model, hier)
        lines.append(K.CheckResult(0, "hierarchy tally", not mism,
                                   "matches tube counts" if not mism else f"mismatch {mism}").line())
    lines.append(K.CheckResult(0, "verdict table", exclusive, "exactly one horosphere verdict per exiting ray").line())
    lines.append(K.check_deficit_laws(col).line())
    if getattr(args, "acceptance", False):
        lines += [r.line() for r in K.run_all(args.seed)]
    out += lines
    _emit(args, "report.txt", "\n".join(out) + "\n")
    return EXIT_OK


_COMMANDS = {
    "build": cmd_build,
    "validate": cmd_validate,
    "discretize": cmd_discretize,
    "export-graph": cmd_export,
    "distance": cmd_distance,
    "thickness": cmd_thickness,
    "classify": cmd_classify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InputError, S.ModelFormatError, B.FamilyError, R.RayError, G.InvalidModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except G.UnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
