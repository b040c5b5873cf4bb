"""Command-line front end.

Subcommands: run, sweep, validate, whichpath, oracle-check.  Networks come
either from a built-in experiment preset (--experiment ds|dcqe|wheeler|
walborn, parameters overridden with --set name=value) or from a .sn file
(--file).  Rate tables are written as CSV (signature,rate,normalized_rate)
or JSON; "-" means standard output.

Exit codes: 0 success, 1 usage error, 2 validation/verification failure.
The default numeric tolerance is 1e-10, overridable with STAGELAB_TOL or
--tol.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dsl
from .errors import StagelabError, UnknownParameter
from .experiments import PRESETS, build_preset
from .labstate import SignalConfig
from .measurement import RateTable, make_table, marginal, max_row_difference, rates
from .network import Network
from .oracle import oracle_rates
from .whichpath import PathDisambiguation, default_disambiguation, which_path

DEFAULT_TOL = 1e-10
SWEEP_CONSTANT_TOL = 1e-12


class _Parser(argparse.ArgumentParser):
    """argparse, but usage problems exit 1 (2 is reserved for bad networks)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _env_tol() -> float:
    raw = os.environ.get("STAGELAB_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        print(f"warning: bad STAGELAB_TOL {raw!r}; using {DEFAULT_TOL}", file=sys.stderr)
        return DEFAULT_TOL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stagelab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--experiment", "-e", choices=PRESETS,
                     help="built-in preset to run")
    src.add_argument("--file", "-f", help="network description (.sn) file")
    common.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                        help="override a parameter (value is an expression)")
    common.add_argument("--screen", type=int, metavar="S",
                        help="screen site count (presets only)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for any randomized defaults")
    common.add_argument("--v-family", choices=("fraunhofer", "random"),
                        default="fraunhofer", help="transfer-matrix family for presets")
    common.add_argument("--fringes", type=float, default=2.5,
                        help="fringe density of the fraunhofer family")
    common.add_argument("--tol", type=float, default=None,
                        help="validation tolerance (default STAGELAB_TOL or 1e-10)")
    common.add_argument("--allow-invalid", action="store_true",
                        help="demote semi-unitarity failure to a warning")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", "-o", default="-", help="output path, '-' = stdout")
    out.add_argument("--format", choices=("csv", "json"), default=None,
                     help="output format (default csv, json for '-o -' json files)")
    out.add_argument("--no-marginals", action="store_true",
                     help="omit per-detector marginal rows")

    p_run = sub.add_parser("run", parents=[common, out],
                           help="compute the outcome/coincidence rate table")

    p_sweep = sub.add_parser("sweep", parents=[common, out],
                             help="sweep one parameter, flag constant rate columns")
    p_sweep.add_argument("--param", required=True, help="parameter to sweep")
    p_sweep.add_argument("--from", dest="sweep_from", type=float, required=True)
    p_sweep.add_argument("--to", dest="sweep_to", type=float, required=True)
    p_sweep.add_argument("--points", type=int, required=True)
    p_sweep.add_argument("--couple", action="append", default=[], metavar="NAME=EXPR",
                         help="coupled parameter, e.g. r3=sqrt(1-t3^2)")

    sub.add_parser("validate", parents=[common],
                   help="check chain contiguity and semi-unitarity")

    p_wp = sub.add_parser("whichpath", parents=[common],
                          help="which-path probability and its contributions")
    p_wp.add_argument("--reveal-detector", action="append", default=[], metavar="LABEL",
                      help="treat signatures containing LABEL as path-revealing")
    p_wp.add_argument("--reveal", action="append", default=[], metavar="SIG",
                      help="explicit revealing signature, labels joined by '&'")
    p_wp.add_argument("--format", choices=("text", "json"), default="text")

    p_oc = sub.add_parser("oracle-check", parents=[common],
                          help="compare engine rates against the full-space oracle")
    p_oc.add_argument("--completion", choices=("basis", "random"), default="basis",
                      help="orthonormal completion strategy for unreached inputs")

    return parser


# ---------------------------------------------------------------------------
# network construction
# ---------------------------------------------------------------------------


def _parse_sets(pairs: list[str], *, textual: bool) -> dict[str, object]:
    overrides: dict[str, object] = {}
    for pair in pairs:
        name, eq, value = pair.partition("=")
        name = name.strip()
        if not eq or not name:
            raise UnknownParameter(f"--set needs NAME=VALUE, got {pair!r}")
        value = value.strip()
        if name == "mode":
            overrides[name] = value
        elif textual:
            overrides[name] = value  # evaluated by elaborate in param scope
        else:
            overrides[name] = dsl.evaluate_text(value, {})
    return overrides


def _build_network(args, extra_overrides: dict | None = None) -> Network:
    rng = np.random.default_rng(args.seed)
    if args.file:
        overrides = _parse_sets(args.set, textual=True)
        overrides.update(extra_overrides or {})
        return dsl.load(args.file, overrides)
    overrides = _parse_sets(args.set, textual=False)
    overrides.update(extra_overrides or {})
    if args.screen is not None:
        overrides["S"] = args.screen
    return build_preset(args.experiment, overrides, rng, args.v_family, args.fringes)


def _check_network(net: Network, args) -> bool:
    tol = args.tol if args.tol is not None else _env_tol()
    report = net.validate(tol)
    if report.ok:
        return True
    print(str(report), file=sys.stderr)
    if args.allow_invalid:
        print("warning: continuing with an invalid network", file=sys.stderr)
        return True
    return False


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _with_marginals(table: RateTable) -> RateTable:
    """Append one total-rate row per detector, for coincidence tables only."""
    if not table.rows or any(len(sig) < 2 for sig in table.signatures()):
        return table
    entries = dict(table.rows)
    for d in table.detector_order:
        total = sum(v for sig, v in table.rows if d in sig.labels)
        if total:
            entries[SignalConfig(table.stage, frozenset((d,)))] = total
    return make_table(table.stage, table.detector_order, entries, table.source_norm_sq)


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text)


def _format_table(table: RateTable, fmt: str) -> str:
    return table.to_json() if fmt == "json" else table.to_csv()


def _pick_format(args) -> str:
    if getattr(args, "format", None):
        return args.format
    out = getattr(args, "out", "-")
    if out != "-" and out.endswith(".json"):
        return "json"
    return "csv"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_run(args) -> int:
    net = _build_network(args)
    if not _check_network(net, args):
        return 2
    table = rates(net)
    if not args.no_marginals:
        table = _with_marginals(table)
    _emit(_format_table(table, _pick_format(args)), args.out)
    return 0


def _cmd_sweep(args) -> int:
    couples = []
    for pair in args.couple:
        name, eq, expr = pair.partition("=")
        if not eq or not name.strip():
            raise UnknownParameter(f"--couple needs NAME=EXPR, got {pair!r}")
        couples.append((name.strip(), expr.strip()))
    if args.points < 1:
        raise UnknownParameter("--points must be >= 1")
    values = np.linspace(args.sweep_from, args.sweep_to, args.points)

    base_numeric: dict[str, complex] = {}
    if not args.file:
        base_numeric = {
            k: v for k, v in _parse_sets(args.set, textual=False).items()
            if isinstance(v, complex)
        }

    tables: list[RateTable] = []
    for v in values:
        point: dict[str, object] = {args.param: complex(v)}
        if args.file:
            point.update({name: expr for name, expr in couples})
        else:
            env = dict(base_numeric)
            env[args.param] = complex(v)
            for name, expr in couples:
                env[name] = dsl.evaluate_text(expr, env)
                point[name] = env[name]
        net = _build_network(args, extra_overrides=point)
        if not _check_network(net, args):
            return 2
        table = rates(net)
        if not args.no_marginals:
            table = _with_marginals(table)
        tables.append(table)

    summary = sweep_summary(tables)
    fmt = _pick_format(args)
    if args.out == "-" or args.out.endswith(".json"):
        doc = {
            "param": args.param,
            "values": [float(v) for v in values],
            "points": [t.to_json_obj() for t in tables],
            "summary": summary,
        }
        _emit(json.dumps(doc, indent=2), args.out)
    else:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for k, t in enumerate(tables):
            (outdir / f"point_{k:03d}.{fmt}").write_text(_format_table(t, fmt))
        lines = ["signature,min,max,spread,constant"]
        for sig, row in summary.items():
            lines.append(
                f"{sig},{row['min']!r},{row['max']!r},{row['spread']!r},"
                f"{str(row['constant']).lower()}"
            )
        (outdir / "summary.csv").write_text("\n".join(lines) + "\n")
        (outdir / "summary.json").write_text(json.dumps(summary, indent=2))
    return 0


def sweep_summary(tables: list[RateTable], tol: float = SWEEP_CONSTANT_TOL) -> dict:
    """Per-signature min/max over the sweep; constant iff max-min <= tol."""
    keys: list[str] = []
    for t in tables:
        for sig, _ in t.rows:
            s = t.signature_str(sig)
            if s not in keys:
                keys.append(s)
    summary = {}
    for key in keys:
        series = [t.rate(key) for t in tables]
        lo, hi = min(series), max(series)
        summary[key] = {
            "min": lo,
            "max": hi,
            "spread": hi - lo,
            "constant": bool(hi - lo <= tol),
        }
    return summary


def _cmd_validate(args) -> int:
    net = _build_network(args)
    tol = args.tol if args.tol is not None else _env_tol()
    report = net.validate(tol)
    print(str(report))
    return 0 if report.ok else 2


def _cmd_whichpath(args) -> int:
    net = _build_network(args)
    if not _check_network(net, args):
        return 2
    table = rates(net)
    if args.reveal or args.reveal_detector:
        revealing = set()
        if args.reveal_detector:
            revealing |= PathDisambiguation.from_detectors(
                table, args.reveal_detector
            ).revealing
        for sig_text in args.reveal:
            labels = [p for p in sig_text.split("&") if p]
            revealing.add(SignalConfig.of(table.stage, labels))
        d = PathDisambiguation(frozenset(revealing))
    else:
        d = default_disambiguation(net, table)
    result = which_path(net, d)
    if args.format == "json":
        print(json.dumps({"phi": result.phi, "contributions": result.contributions},
                         indent=2))
    else:
        print(f"phi {result.phi!r}")
        for sig, value in result.contributions.items():
            print(f"contribution {sig} {value!r}")
    return 0


def _cmd_oracle_check(args) -> int:
    net = _build_network(args)
    if not _check_network(net, args):
        return 2
    tol = args.tol if args.tol is not None else _env_tol()
    engine = rates(net)
    rng = np.random.default_rng(args.seed)
    reference = oracle_rates(net, completion=args.completion, rng=rng)
    sig_strs = sorted(
        set(engine.as_dict()) | set(reference.as_dict())
    )
    print("signature engine oracle |diff|")
    for s in sig_strs:
        a, b = engine.rate(s), reference.rate(s)
        print(f"{s} {a!r} {b!r} {abs(a - b):.3e}")
    worst = max_row_difference(engine, reference)
    print(f"max |diff| {worst:.3e} (tol {tol:.1e})")
    return 0 if worst <= tol else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "validate": _cmd_validate,
        "whichpath": _cmd_whichpath,
        "oracle-check": _cmd_oracle_check,
    }
    try:
        return handlers[args.command](args)
    except UnknownParameter as exc:
        print(f"stagelab: error: {exc}", file=sys.stderr)
        return 1
    except StagelabError as exc:
        print(f"stagelab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
