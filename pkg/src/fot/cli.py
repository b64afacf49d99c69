"""Command-line interface.

Subcommands: simulate, validate, braess, classify, gen, sweep, reproduce,
export-plotdata.  All numeric input and output is exact ("p/q" strings);
JSON output is deterministic byte-for-byte.  Exit codes: 0 success / checks
pass, 1 an assertion or validation failed, 2 usage or input error, 3
internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import braess as braess_mod
from . import core, dynamics, equilibrium, gen, reproduce, topology
from .core import INF, FotError, ParameterError, format_scalar, parse_scalar
from .pwl import PiecewiseLinear

USAGE_ERROR, ASSERTION_ERROR, INTERNAL_ERROR = 2, 1, 3


# -- serialization helpers -----------------------------------------------------


def _scalar_obj(x) -> str:
    return format_scalar(x)


def _label_obj(label) -> object:
    if label is INF:
        return "inf"
    return dynamics.pwl_to_obj(label)


def run_to_obj(run: equilibrium.EquilibriumRun) -> dict:
    inst = run.instance
    queues = {}
    for eid in inst.edge_ids:
        shifted = run.flow.outflow[eid].compose(
            PiecewiseLinear.affine(Fraction(1), inst.transit[eid]))
        queues[eid] = dynamics.pwl_to_obj(run.flow.inflow[eid] - shifted)
    return {
        "instance": core.instance_to_obj(inst),
        "phases": [
            {
                "start": _scalar_obj(p.start),
                "end": _scalar_obj(p.end),
                "active": list(p.active),
                "resetting": list(p.resetting),
                "label_slopes": {v: _scalar_obj(s) for v, s in p.label_slopes.items()},
                "edge_rates": {e: _scalar_obj(r) for e, r in p.edge_rates.items()},
            }
            for p in run.phases
        ],
        "events": [
            {
                "time": _scalar_obj(e.time),
                "activations": list(e.activations),
                "depletions": list(e.depletions),
                "tail_arrival": {k: _scalar_obj(v) for k, v in e.tail_arrival.items()},
            }
            for e in run.events
        ],
        "labels": {v: _label_obj(lab) for v, lab in run.labels.items()},
        "queues": queues,
        "flow": dynamics.flow_to_obj(run.flow),
        "social_cost": _scalar_obj(run.social_cost),
        "steady": run.steady,
        "diverging": run.diverging,
    }


def braess_to_obj(report: braess_mod.BraessReport) -> dict:
    return {
        "label": report.label,
        "full_cost": _scalar_obj(report.full_cost),
        "ratio": _scalar_obj(report.ratio),
        "argmax": list(report.argmax),
        "paradox": report.paradox,
        "note": report.note,
        "entries": [
            {"kept": list(e.kept), "cost": _scalar_obj(e.cost),
             **({"error": e.error} if e.error else {})}
            for e in report.entries
        ],
    }


def sweep_to_obj(report: braess_mod.SweepReport) -> dict:
    return {
        "description": report.description,
        "max_ratio": None if report.max_ratio is None else _scalar_obj(report.max_ratio),
        "any_paradox": report.any_paradox,
        "note": report.note,
        "points": [
            {"label": p.label,
             "ratio": None if p.ratio is None else _scalar_obj(p.ratio),
             "paradox": p.paradox,
             **({"error": p.error} if p.error else {})}
            for p in report.points
        ],
    }


def classification_to_obj(report: topology.ClassificationReport) -> dict:
    minors = {}
    for pid, emb in report.minors.items():
        if emb is None:
            minors[pid] = None
        else:
            minors[pid] = {
                "nodes": dict(emb.node_images),
                "paths": {k: list(v) for k, v in emb.edge_paths.items()},
            }
    return {
        "minors": minors,
        "uses_only_chains": report.uses_only_chains,
        "chain_witness": None if report.chain_witness is None else {
            "from": report.chain_witness[0],
            "to": report.chain_witness[1],
            "union": list(report.chain_witness[2]),
        },
        "series_parallel": report.series_parallel,
        "forward_paradox": report.forward_paradox,
        "either_direction_paradox": report.either_direction_paradox,
    }


def violations_to_obj(report: dynamics.ViolationReport) -> list:
    return [
        {
            "condition": v.condition,
            "where": v.where,
            "at": None if v.at is None else _scalar_obj(v.at),
            "lhs": _scalar_obj(v.lhs),
            "rhs": _scalar_obj(v.rhs),
            "detail": v.detail,
        }
        for v in report.violations
    ]


# -- flat CSV bijection ---------------------------------------------------------


def flatten(obj, prefix="") -> list[tuple[str, str]]:
    """Flatten a JSON object into (path, typed-value) rows; lossless."""
    rows: list[tuple[str, str]] = []
    if isinstance(obj, dict):
        if not obj:
            rows.append((prefix or ".", "d:"))
            return rows
        for key in sorted(obj):
            if "." in key:
                raise ParameterError(f"key {key!r} cannot be flattened")
            rows.extend(flatten(obj[key], f"{prefix}.{key}" if prefix else key))
    elif isinstance(obj, list):
        if not obj:
            rows.append((prefix or ".", "l:"))
            return rows
        for i, item in enumerate(obj):
            rows.extend(flatten(item, f"{prefix}.{i}" if prefix else str(i)))
    elif isinstance(obj, bool):
        rows.append((prefix, "b:true" if obj else "b:false"))
    elif isinstance(obj, int):
        rows.append((prefix, f"i:{obj}"))
    elif obj is None:
        rows.append((prefix, "n:"))
    elif isinstance(obj, str):
        rows.append((prefix, f"s:{obj}"))
    else:
        raise ParameterError(f"cannot flatten value of type {type(obj).__name__}")
    return rows


def unflatten(rows) -> object:
    def decode(cell: str):
        tag, _, rest = cell.partition(":")
        if tag == "s":
            return rest
        if tag == "i":
            return int(rest)
        if tag == "b":
            return rest == "true"
        if tag == "n":
            return None
        if tag == "d":
            return {}
        if tag == "l":
            return []
        raise ParameterError(f"bad value cell {cell!r}")

    root: dict = {}
    for path, cell in rows:
        parts = path.split(".")
        here = root
        for part in parts[:-1]:
            here = here.setdefault(part, {})
        here[parts[-1]] = decode(cell)

    def rebuild(node):
        if not isinstance(node, dict):
            return node
        if node and all(k.lstrip("-").isdigit() for k in node):
            return [rebuild(node[k]) for k in sorted(node, key=int)]
        return {k: rebuild(v) for k, v in node.items()}

    return rebuild(root)


def _decimal_text(value: str, places: int) -> str:
    scalar = parse_scalar(value)
    if scalar is INF:
        return "inf"
    whole, frac = divmod(abs(scalar.numerator) * 10 ** places, scalar.denominator)
    # round half away from zero, display only
    if 2 * frac >= scalar.denominator:
        whole += 1
    sign = "-" if scalar.numerator < 0 else ""
    text = str(whole).rjust(places + 1, "0")
    return f"{sign}{text[:-places]}.{text[-places:]}" if places else f"{sign}{text}"


def write_csv(obj, stream, decimal: int | None = None) -> None:
    writer = csv.writer(stream)
    header = ["path", "value"]
    if decimal is not None:
        header.append(f"decimal_{decimal}_display_only_not_authoritative")
    writer.writerow(header)
    for path, cell in flatten(obj):
        row = [path, cell]
        if decimal is not None:
            extra = ""
            if cell.startswith("s:"):
                try:
                    extra = _decimal_text(cell[2:], decimal)
                except FotError:
                    extra = ""
            row.append(extra)
        writer.writerow(row)


def read_csv(stream) -> object:
    rows = list(csv.reader(stream))
    return unflatten([(r[0], r[1]) for r in rows[1:]])


# -- shared I/O helpers -----------------------------------------------------------


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(obj, args) -> None:
    fmt = getattr(args, "format", "json")
    decimal = getattr(args, "decimal", None)
    if fmt == "csv":
        buf = io.StringIO()
        write_csv(obj, buf, decimal)
        text = buf.getvalue()
    else:
        text = core.dumps(obj)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_instance(path: str) -> core.Instance:
    obj = _read_json(path)
    if not core.is_instance_obj(obj):
        raise ParameterError(f"{path} holds a bare network; an instance is needed")
    return core.instance_from_obj(obj)


def _load_network(path: str) -> core.Network:
    obj = _read_json(path)
    return core.network_from_obj(obj)


def _fraction_arg(text: str) -> Fraction:
    value = parse_scalar(text)
    if value is INF:
        raise argparse.ArgumentTypeError("expected a finite rational")
    return value


# -- subcommand implementations ----------------------------------------------------


def _cmd_simulate(args) -> int:
    inst = _load_instance(args.instance)
    run = equilibrium.nash_flow(inst, phase_cap=args.phase_cap)
    _emit(run_to_obj(run), args)
    return 0


def _cmd_validate(args) -> int:
    inst = _load_instance(args.instance)
    flow = dynamics.flow_from_obj(_read_json(args.flow))
    grid = [parse_scalar(p) for p in args.grid.split(",")] if args.grid else []
    report = dynamics.validate_feasible(inst, flow, sample_grid=grid)
    result = {"feasible": report.ok, "violations": violations_to_obj(report)}
    ok = report.ok
    if report.ok:
        nash, nash_report = dynamics.certify_nash(inst, flow)
        result["nash"] = nash
        result["nash_violations"] = violations_to_obj(nash_report)
        if args.nash:
            ok = ok and nash
    _emit(result, args)
    return 0 if ok else ASSERTION_ERROR


def _cmd_braess(args) -> int:
    inst = _load_instance(args.instance)
    subsets = None
    if args.subsets:
        subsets = [tuple(entry) for entry in _read_json(args.subsets)]
    report = braess_mod.braess_ratio(inst, subsets=subsets, cap=args.cap,
                                     phase_cap=args.phase_cap)
    _emit(braess_to_obj(report), args)
    return 0


def _cmd_classify(args) -> int:
    report = topology.classify(_load_network(args.network),
                               node_cap=args.node_cap, edge_cap=args.edge_cap)
    _emit(classification_to_obj(report), args)
    return 0


def _cmd_sweep(args) -> int:
    if args.preset != "transpose-m3":
        raise ParameterError(f"unknown sweep preset {args.preset!r}")
    points = None
    if args.grid:
        points = []
        for entry in _read_json(args.grid):
            points.append((entry["label"],
                           core.instance_from_obj(entry["instance"])))
    report = braess_mod.sweep_transpose_m3(points, phase_cap=args.phase_cap)
    _emit(sweep_to_obj(report), args)
    if report.any_paradox or report.failures:
        return ASSERTION_ERROR
    return 0


def _cmd_gen(args) -> int:
    if args.family == "mn":
        alphas_fn = gen.integer_alphas if args.integer else gen.geometric_alphas
        alphas = alphas_fn(args.n, args.eps, args.j)
        inst = gen.make_mn(gen.MnParams(n=args.n, horizon=args.T, alphas=alphas))
        obj = core.instance_to_obj(inst)
        if args.integer:
            obj["_meta"] = {
                "cost_target": format_scalar(
                    gen.integer_alpha_bound(args.n, args.eps, args.T))}
        _emit(obj, args)
        return 0
    if args.family in ("m3prime", "m3doubleprime"):
        prime, double_prime = gen.make_m3_variants()
        net = prime if args.family == "m3prime" else double_prime
        if args.eps is not None:
            params = gen.MnParams(n=3, horizon=args.T,
                                  alphas=gen.geometric_alphas(3, args.eps, args.j))
            _emit(core.instance_to_obj(gen.instantiate_m3_variant(net, params)), args)
        else:
            _emit(core.network_to_obj(net), args)
        return 0
    if args.family == "random":
        _emit(core.network_to_obj(gen.random_dag(args.nodes, args.edges, args.seed)),
              args)
        return 0
    raise ParameterError(f"unknown generator {args.family!r}")


def _cmd_reproduce(args) -> int:
    overrides = {}
    for name in ("n", "j", "samples", "seed", "nodes", "edges"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.eps is not None:
        overrides["eps"] = args.eps
    if args.T is not None:
        overrides["horizon"] = args.T
    result = reproduce.run_preset(args.preset, **overrides)
    _emit(reproduce.preset_result_to_obj(result), args)
    if not result.ok:
        failure = result.first_failure()
        print(f"FAILED: {failure.description}: required {failure.required}, "
              f"observed {failure.observed}", file=sys.stderr)
        return ASSERTION_ERROR
    return 0


def _cmd_export_plotdata(args) -> int:
    run_obj = _read_json(args.run)
    rows = [("series", "name", "x", "value")]
    for node in sorted(run_obj["labels"]):
        curve = run_obj["labels"][node]
        if curve == "inf":
            continue
        for x, y in curve["breakpoints"]:
            rows.append(("label", node, x, y))
    for eid in sorted(run_obj["queues"]):
        for x, y in run_obj["queues"][eid]["breakpoints"]:
            rows.append(("queue", eid, x, y))
    out = sys.stdout
    if args.output:
        out = open(args.output, "w", encoding="utf-8", newline="")
    try:
        writer = csv.writer(out)
        writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fot",
        description="Exact laboratory for congestion games with flow over time.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p, formats=False):
        p.add_argument("-o", "--output", help="write to a file instead of stdout")
        if formats:
            p.add_argument("--format", choices=("json", "csv"), default="json")
            p.add_argument("--decimal", type=int, default=None,
                           help="add a display-only decimal column (CSV only)")

    p = sub.add_parser("simulate", help="compute the equilibrium phase by phase")
    p.add_argument("instance")
    p.add_argument("--phase-cap", type=int, default=200)
    add_output(p, formats=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("validate", help="check a flow against the model conditions")
    p.add_argument("instance")
    p.add_argument("flow")
    p.add_argument("--grid", default="", help="extra probe times, comma-separated p/q")
    p.add_argument("--nash", action="store_true",
                   help="require the equilibrium certificates as well")
    add_output(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("braess", help="cost ratio over all kept-edge subsets")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=16)
    p.add_argument("--subsets", help="JSON file with an explicit subset list")
    p.add_argument("--phase-cap", type=int, default=200)
    add_output(p)
    p.set_defaults(func=_cmd_braess)

    p = sub.add_parser("classify", help="structural classification of a network")
    p.add_argument("network")
    p.add_argument("--node-cap", type=int, default=15)
    p.add_argument("--edge-cap", type=int, default=25)
    add_output(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("sweep", help="evaluate a grid of instances")
    p.add_argument("--preset", required=True, choices=("transpose-m3",))
    p.add_argument("--grid", help="JSON file: [{label, instance}, ...]")
    p.add_argument("--phase-cap", type=int, default=200)
    add_output(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("gen", help="generate instances and networks")
    gsub = p.add_subparsers(dest="family", required=True)
    g = gsub.add_parser("mn")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--T", type=_fraction_arg, default=Fraction(1))
    g.add_argument("--eps", type=_fraction_arg, required=True)
    g.add_argument("--j", type=int, default=1)
    g.add_argument("--integer", action="store_true")
    add_output(g)
    g.set_defaults(func=_cmd_gen)
    for family in ("m3prime", "m3doubleprime"):
        g = gsub.add_parser(family)
        g.add_argument("--eps", type=_fraction_arg, default=None,
                       help="instantiate with ladder parameters instead of "
                            "emitting the bare network")
        g.add_argument("--j", type=int, default=1)
        g.add_argument("--T", type=_fraction_arg, default=Fraction(1))
        add_output(g)
        g.set_defaults(func=_cmd_gen)
    g = gsub.add_parser("random")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--edges", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    add_output(g)
    g.set_defaults(func=_cmd_gen)

    p = sub.add_parser("reproduce", help="run a reproduction preset")
    p.add_argument("preset", choices=sorted(reproduce.PRESETS))
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=_fraction_arg)
    p.add_argument("--j", type=int)
    p.add_argument("--T", type=_fraction_arg)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--edges", type=int)
    add_output(p)
    p.set_defaults(func=_cmd_reproduce)

    p = sub.add_parser("export-plotdata",
                       help="CSV of label and queue series from a run file")
    p.add_argument("run")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_export_plotdata)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParameterError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"fot: input error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FotError as exc:
        print(f"fot: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
