"""Command-line entry point: ``wildfire-edc <subcommand> [flags]``.

Exit status: 0 on success (an Infeasible dispatch is a result, not an
error), 1 on usage or input errors, 2 on internal failures. Results go to
stdout or ``--out``; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence, TextIO

from .dispatch import MODES, WRB_EDC, DispatchConfig, DispatchError, DispatchSolution, build_problem, solution_to_dict, solve_dispatch
from .lp import format_lp
from .network import CaseError, NetworkCase, dump_case, read_case
from .pricing import LmpBreakdown, decompose_lmp
from .ptdf import compute_ptdf
from .risk import RiskProfile, RiskProfileError, default_profile, read_risk_profile, risk_profile_to_dict
from .scenarios import (
    ScenarioError,
    emit_report,
    load_scenario_spec,
    run_foc_sweep,
    run_load_perturbation,
    run_n_minus_1,
    run_spec,
)

BUNDLED_FIXTURES = Path(__file__).with_name("fixtures")


class UsageError(Exception):
    """Bad invocation or unusable input file; exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def fixture_dirs() -> list[Path]:
    dirs = []
    if os.environ.get("WD_FIXTURES"):
        dirs.append(Path(os.environ["WD_FIXTURES"]))
    dirs.append(BUNDLED_FIXTURES)
    return dirs


def resolve_path(name: str, what: str, relative_to: Path | None = None) -> Path:
    """Find ``name`` as given, next to ``relative_to``, or in a fixture directory."""
    candidates = [Path(name)]
    if relative_to is not None:
        candidates.append(relative_to / name)
    if not Path(name).is_absolute():
        candidates += [d / name for d in fixture_dirs()]
    for p in candidates:
        if p.is_file():
            return p
    raise UsageError(f"{what} file not found: {name}")


def _load_case(name: str | None, relative_to: Path | None = None) -> NetworkCase:
    if not name:
        raise UsageError("--case is required")
    path = resolve_path(name, "case", relative_to)
    try:
        return read_case(path)
    except CaseError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _load_risk(name: str | None, case: NetworkCase, relative_to: Path | None = None) -> RiskProfile:
    if name is None:
        return default_profile(case)
    path = resolve_path(name, "risk profile", relative_to)
    try:
        return read_risk_profile(path, case)
    except (RiskProfileError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _parse_foc_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--foc: expected comma-separated numbers, got {text!r}") from None
    for v in values:
        if not (0.0 < v <= 1.0):
            raise UsageError(f"--foc: values must lie in (0, 1], got {v:g}")
    return values


def _config(args, foc: float = 1.0) -> DispatchConfig:
    try:
        return DispatchConfig(
            mode=args.mode,
            foc=foc,
            foc_mode=args.foc_mode,
            allow_shedding=args.shedding,
            slack=args.slack,
            paper_literal_objective=args.paper_literal_objective,
        )
    except DispatchError as exc:
        raise UsageError(str(exc)) from exc


def _single_foc(args) -> float:
    values = _parse_foc_list(args.foc)
    if len(values) != 1:
        raise UsageError(f"{args.command}: --foc takes a single value")
    return values[0]


def _check_slack(case: NetworkCase, slack: str | None) -> None:
    if slack is not None and slack not in case.bus_ids:
        raise UsageError(f"--slack: unknown bus {slack!r}")


def render_solution(solution: DispatchSolution, prices: LmpBreakdown | None) -> str:
    out = [f"status     {solution.status}"]
    if not solution.optimal:
        return "\n".join(out) + "\n"
    out.append(f"objective  {solution.objective:.4f}")
    out.append(f"served MW  {solution.served_mw:.4f} of {solution.case.total_demand:.4f}")
    out.append("")
    out.append(f"{'generator':<12}{'bus':<6}{'MW':>12}")
    for g in solution.case.generators:
        out.append(f"{g.id:<12}{g.bus:<6}{solution.generation[g.id]:>12.4f}")
    out.append("")
    out.append(f"{'line':<8}{'flow':>12}{'min':>12}{'max':>12}{'dual':>12}{'foc':>8}  binding")
    binding = set(solution.binding_lines())
    for ln in solution.case.lines:
        lo, hi = solution.limits.get(ln.id, (float("-inf"), float("inf")))
        foc = solution.foc.get(ln.id)
        out.append(
            f"{ln.id:<8}{solution.flows[ln.id]:>12.4f}{lo:>12.4f}{hi:>12.4f}"
            f"{solution.line_dual(ln.id):>12.4f}{'' if foc is None else f'{foc:.4f}':>8}"
            f"  {'yes' if ln.id in binding else ''}".rstrip()
        )
    if prices is not None:
        out.append("")
        out.append(prices.render("text").rstrip("\n"))
    if solution.served:
        out.append("")
        out.append(f"{'bus':<6}{'served':>10}{'shed MW':>12}")
        for bid, r in solution.served.items():
            out.append(f"{bid:<6}{r:>10.4f}{solution.case.bus(bid).demand * (1.0 - r):>12.4f}")
    return "\n".join(out) + "\n"


def _emit(text: str, out_path: str | None, stdout: TextIO) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _solve_like(args, stdout: TextIO) -> None:
    case = _load_case(args.case)
    _check_slack(case, args.slack)
    risk = _load_risk(args.risk, case)
    config = _config(args, _single_foc(args))
    if args.dump_ptdf or args.dump_lp:
        ptdf = compute_ptdf(case, config.slack)
        if args.dump_ptdf:
            _emit(ptdf.to_csv(), None if args.dump_ptdf == "-" else args.dump_ptdf, stdout)
        if args.dump_lp:
            _emit(format_lp(build_problem(case, risk, config, ptdf)), None if args.dump_lp == "-" else args.dump_lp, stdout)
    solution = solve_dispatch(case, risk, config)
    prices = decompose_lmp(solution) if solution.optimal else None

    if args.command == "lmp":
        if prices is None:
            text = _dumps({"status": str(solution.status), "lmps": []}) if args.format == "json" else f"status {solution.status}\n"
        elif args.format == "json":
            text = _dumps(
                {
                    "status": str(solution.status),
                    "lmps": [
                        {"bus": r.bus, "lmp": r.lmp, "energy": r.energy, "congestion": r.congestion,
                         "wildfire": r.wildfire, "voll": r.voll}
                        for r in prices.records
                    ],
                }
            )
        else:
            text = prices.render(args.format)
    elif args.format == "json":
        text = _dumps(solution_to_dict(solution, prices.lmps if prices else None))
    elif args.format == "text":
        text = render_solution(solution, prices)
    else:
        raise UsageError("solve: --format must be text or json")
    _emit(text, args.out, stdout)


def _cmd_sweep(args, stdout: TextIO) -> None:
    case = _load_case(args.case)
    _check_slack(case, args.slack)
    risk = _load_risk(args.risk, case)
    values = _parse_foc_list(args.foc)
    report = run_foc_sweep(case, risk, values, _config(args), workers=args.workers)
    _emit(emit_report(report, args.format), args.out, stdout)


def _cmd_n1(args, stdout: TextIO) -> None:
    case = _load_case(args.case)
    _check_slack(case, args.slack)
    risk = _load_risk(args.risk, case)
    foc = _single_foc(args)
    shedding = True if args.shedding is None else args.shedding
    config = replace(_config(replace_ns(args, shedding=shedding)), foc=foc)
    report = run_n_minus_1(case, risk, foc, config, workers=args.workers)
    _emit(emit_report(report, args.format), args.out, stdout)


def _cmd_perturb(args, stdout: TextIO) -> None:
    case = _load_case(args.case)
    _check_slack(case, args.slack)
    risk = _load_risk(args.risk, case)
    if args.bus not in case.bus_ids:
        raise UsageError(f"--bus: unknown bus {args.bus!r}")
    report = run_load_perturbation(case, risk, _config(args, _single_foc(args)), args.bus, args.delta)
    _emit(emit_report(report, args.format), args.out, stdout)


def _cmd_run(args, stdout: TextIO) -> None:
    spec_path = resolve_path(args.spec, "scenario spec")
    try:
        spec = load_scenario_spec(spec_path)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{spec_path}: invalid JSON: {exc}") from exc
    case = _load_case(args.case or spec.case, spec_path.parent)
    risk_name = args.risk or spec.risk
    risk = _load_risk(risk_name, case, spec_path.parent)
    try:
        spec.check(case)
        report = run_spec(case, risk, spec, workers=args.workers)
    except (ScenarioError, DispatchError, TypeError) as exc:
        raise UsageError(f"{spec_path}: {exc}") from exc
    _emit(emit_report(report, args.format), args.out, stdout)


def _cmd_dump(args, stdout: TextIO) -> None:
    case = _load_case(args.case)
    _check_slack(case, args.slack)
    if args.what == "case":
        text = dump_case(case)
    elif args.what == "ptdf":
        text = compute_ptdf(case, args.slack).to_csv()
    elif args.what == "risk":
        text = _dumps(risk_profile_to_dict(_load_risk(args.risk, case)))
    else:
        risk = _load_risk(args.risk, case)
        config = _config(args, _single_foc(args))
        text = format_lp(build_problem(case, risk, config, compute_ptdf(case, config.slack)))
    _emit(text, args.out, stdout)


def replace_ns(ns: argparse.Namespace, **changes) -> argparse.Namespace:
    return argparse.Namespace(**{**vars(ns), **changes})


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--case", help="case JSON (path, or name in $WD_FIXTURES / bundled fixtures)")
    common.add_argument("--risk", help="risk profile JSON; default: built-in segments and cap on every at-risk line")
    common.add_argument("--slack", help="slack bus id (default: first bus)")
    common.add_argument("--mode", choices=MODES, default=WRB_EDC)
    common.add_argument("--foc-mode", choices=("fixed", "optimized"), default="fixed")
    common.add_argument("--shedding", action=argparse.BooleanOptionalAction, default=None,
                        help="allow load shedding at buses next to at-risk lines")
    common.add_argument("--paper-literal-objective", action="store_true",
                        help="use +VOLL*r in the objective instead of the unserved-energy penalty")
    common.add_argument("--out", help="write the result here instead of stdout")

    parser = _Parser(prog="wildfire-edc", description="Wildfire-risk-based DC economic dispatch and LMP pricing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_ in (("solve", "solve one dispatch"), ("lmp", "per-bus LMP decomposition")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--foc", default="1.0", help="FOC for every at-risk line (fixed mode)")
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")
        p.add_argument("--dump-ptdf", nargs="?", const="-", metavar="PATH", help="also write the PTDF matrix as CSV")
        p.add_argument("--dump-lp", nargs="?", const="-", metavar="PATH", help="also write the LP listing")

    p = sub.add_parser("sweep", parents=[common], help="fixed-FOC sweep")
    p.add_argument("--foc", required=True, help="comma-separated FOC values, e.g. 1,0.75,0.5")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("n1", parents=[common], help="single-line outage suite (shedding on unless --no-shedding)")
    p.add_argument("--foc", default="0.5")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("perturb", parents=[common], help="objective change for a load step at one bus")
    p.add_argument("--foc", default="1.0")
    p.add_argument("--bus", required=True)
    p.add_argument("--delta", type=float, default=1.0, help="MW added to the bus demand")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")

    p = sub.add_parser("run", parents=[common], help="run a scenario spec file")
    p.add_argument("spec", help="scenario spec JSON; its case can be overridden with --case")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("dump", parents=[common], help="print the normalized case, risk profile, PTDF, or LP")
    p.add_argument("what", choices=("case", "risk", "ptdf", "lp"))
    p.add_argument("--foc", default="1.0")
    return parser


_COMMANDS = {
    "solve": _solve_like,
    "lmp": _solve_like,
    "sweep": _cmd_sweep,
    "n1": _cmd_n1,
    "perturb": _cmd_perturb,
    "run": _cmd_run,
    "dump": _cmd_dump,
}


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command != "n1" and args.shedding is None:
            args.shedding = False
        _COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    except (CaseError, RiskProfileError, ScenarioError, DispatchError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
