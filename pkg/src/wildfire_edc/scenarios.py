"""Experiment harness: FOC sweeps, limit deratings, N-1 outages, load perturbations.

Every variant is an independent solve over an immutable base case, so
variants may run in a thread pool; reports keep the variant order given.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .dispatch import DispatchConfig, solve_dispatch
from .lp import LpStatus
from .network import NetworkCase, apply_outage
from .pricing import decompose_lmp
from .risk import RiskProfile, default_profile

DISCONNECTED = "Disconnected"
FORMATS = ("text", "csv", "json")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Variant:
    label: str
    foc: float | Mapping[str, float] | None = None
    limits: Mapping[str, float] = field(default_factory=dict)
    outage: str | None = None
    load_deltas: Mapping[str, float] = field(default_factory=dict)
    allow_shedding: bool | None = None


@dataclass(frozen=True)
class ScenarioSpec:
    case: str
    variants: tuple[Variant, ...]
    risk: str | None = None
    config: Mapping[str, Any] = field(default_factory=dict)

    def check(self, case: NetworkCase) -> None:
        labels = [v.label for v in self.variants]
        if len(set(labels)) != len(labels):
            raise ScenarioError("variant labels must be unique")
        for v in self.variants:
            for lid in [*v.limits, *([v.outage] if v.outage else [])]:
                if lid not in case.line_ids:
                    raise ScenarioError(f"variant {v.label}: unknown line {lid!r}")
            for bid in v.load_deltas:
                if bid not in case.bus_ids:
                    raise ScenarioError(f"variant {v.label}: unknown bus {bid!r}")
            if isinstance(v.foc, Mapping):
                for lid in v.foc:
                    if lid not in case.line_ids:
                        raise ScenarioError(f"variant {v.label}: unknown line {lid!r}")


@dataclass(frozen=True)
class ScenarioRecord:
    label: str
    status: str
    objective: float | None = None
    generation: dict[str, float] = field(default_factory=dict)
    flows: dict[str, float] = field(default_factory=dict)
    lmps: dict[str, float] = field(default_factory=dict)
    binding: tuple[str, ...] = ()
    served_mw: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL.value


@dataclass(frozen=True)
class ScenarioReport:
    records: tuple[ScenarioRecord, ...] = ()
    generator_ids: tuple[str, ...] = ()
    line_ids: tuple[str, ...] = ()
    bus_ids: tuple[str, ...] = ()
    summary: Mapping[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, label: str) -> ScenarioRecord:
        for r in self.records:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def statuses(self) -> list[str]:
        return [r.status for r in self.records]


def _empty_report(case: NetworkCase, records: Sequence[ScenarioRecord], summary=None) -> ScenarioReport:
    return ScenarioReport(
        tuple(records), tuple(case.generator_ids), tuple(case.line_ids), tuple(case.bus_ids), dict(summary or {})
    )


def _variant_case(case: NetworkCase, variant: Variant) -> tuple[NetworkCase, bool]:
    out = case
    for lid, limit in variant.limits.items():
        out = out.with_line_limit(lid, float(limit))
    for bid, delta in variant.load_deltas.items():
        out = out.with_demand(bid, out.bus(bid).demand + float(delta))
    if variant.outage:
        return apply_outage(out, variant.outage)
    return out, True


def _variant_config(base: DispatchConfig, case: NetworkCase, variant: Variant) -> DispatchConfig:
    cfg = base
    if variant.foc is not None:
        if isinstance(variant.foc, Mapping):
            default = base.foc if not isinstance(base.foc, Mapping) else 1.0
            merged = {ln.id: float(variant.foc.get(ln.id, default)) for ln in case.at_risk_lines}
            cfg = replace(cfg, foc=merged)
        else:
            cfg = replace(cfg, foc=float(variant.foc))
    if variant.allow_shedding is not None:
        cfg = replace(cfg, allow_shedding=variant.allow_shedding)
    return cfg


def run_variant(case: NetworkCase, risk: RiskProfile, config: DispatchConfig, variant: Variant) -> ScenarioRecord:
    vcase, connected = _variant_case(case, variant)
    if not connected:
        return ScenarioRecord(variant.label, DISCONNECTED)
    cfg = _variant_config(config, vcase, variant)
    sol = solve_dispatch(vcase, risk.restrict(vcase), cfg)
    if not sol.optimal:
        return ScenarioRecord(variant.label, str(sol.status))
    return ScenarioRecord(
        label=variant.label,
        status=str(sol.status),
        objective=sol.objective,
        generation=dict(sol.generation),
        flows=dict(sol.flows),
        lmps=decompose_lmp(sol).lmps,
        binding=tuple(sol.binding_lines()),
        served_mw=sol.served_mw,
    )


def run_variants(
    case: NetworkCase,
    risk: RiskProfile | None,
    config: DispatchConfig,
    variants: Iterable[Variant],
    workers: int = 1,
    summary: Mapping[str, Any] | None = None,
) -> ScenarioReport:
    risk = default_profile(case) if risk is None else risk
    variants = list(variants)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda v: run_variant(case, risk, config, v), variants))
    else:
        records = [run_variant(case, risk, config, v) for v in variants]
    return _empty_report(case, records, summary)


def run_foc_sweep(
    case: NetworkCase,
    risk: RiskProfile | None,
    foc_values: Sequence[float],
    config: DispatchConfig | None = None,
    workers: int = 1,
) -> ScenarioReport:
    """One fixed-FOC solve per value, applied to every at-risk line."""
    config = DispatchConfig() if config is None else config
    for f in foc_values:
        if not (0.0 < f <= 1.0):
            raise ScenarioError(f"FOC values must lie in (0, 1], got {f}")
    variants = [Variant(f"foc={f:g}", foc=float(f)) for f in foc_values]
    return run_variants(case, risk, replace(config, foc_mode="fixed"), variants, workers)


def run_n_minus_1(
    case: NetworkCase,
    risk: RiskProfile | None,
    foc: float,
    config: DispatchConfig | None = None,
    workers: int = 1,
) -> ScenarioReport:
    """Remove each line in turn and re-solve at a fixed FOC.

    Shedding is on by default: losing a line can leave demand unservable,
    and a shed solution says more than a bare Infeasible.
    """
    if not (0.0 < foc <= 1.0):
        raise ScenarioError(f"FOC must lie in (0, 1], got {foc}")
    config = DispatchConfig(allow_shedding=True) if config is None else config
    config = replace(config, foc=float(foc), foc_mode="fixed")
    variants = [Variant(f"loss of {lid}", outage=lid) for lid in case.line_ids]
    return run_variants(case, risk, config, variants, workers)


def run_load_perturbation(
    case: NetworkCase,
    risk: RiskProfile | None,
    config: DispatchConfig,
    bus: str,
    delta: float,
) -> ScenarioReport:
    """Base and ``demand[bus] + delta`` solves plus the objective change vs. the base LMP."""
    if not math.isfinite(delta):
        raise ScenarioError("delta must be finite")
    if bus not in case.bus_ids:
        raise ScenarioError(f"unknown bus {bus!r}")
    variants = [Variant("base"), Variant(f"{bus}{delta:+g}MW", load_deltas={bus: delta})]
    report = run_variants(case, risk, config, variants)
    base, bumped = report.records
    summary: dict[str, Any] = {"bus": bus, "delta": delta}
    if base.optimal and bumped.optimal:
        d_obj = bumped.objective - base.objective
        lmp = base.lmps[bus]
        summary.update(delta_objective=d_obj, lmp=lmp, gap=abs(d_obj - lmp * delta))
    else:
        summary.update(delta_objective=None, lmp=base.lmps.get(bus), gap=None)
    return replace(report, summary=summary)


def _entity_columns(report: ScenarioReport) -> list[tuple[str, str, str]]:
    cols = [("gen", g, "generation") for g in report.generator_ids]
    cols += [("flow", ln, "flows") for ln in report.line_ids]
    cols += [("lmp", b, "lmps") for b in report.bus_ids]
    return cols


def emit_report(report: ScenarioReport, fmt: str = "text") -> str:
    """Render a report deterministically as aligned text, CSV, or JSON."""
    if fmt not in FORMATS:
        raise ScenarioError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    cols = _entity_columns(report)
    if fmt == "json":
        rows = []
        for r in report.records:
            rows.append(
                {
                    "label": r.label,
                    "status": r.status,
                    "objective": r.objective,
                    "generation": r.generation,
                    "flows": r.flows,
                    "lmps": r.lmps,
                    "binding": list(r.binding),
                    "served_mw": r.served_mw,
                }
            )
        return json.dumps(rows, indent=2) + "\n"

    header = ["label", "status", "objective"] + [f"{kind}:{name}" for kind, name, _ in cols]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for r in report.records:
            row = [r.label, r.status, "" if r.objective is None else repr(r.objective)]
            for _, name, attr in cols:
                value = getattr(r, attr).get(name)
                row.append("" if value is None else repr(value))
            writer.writerow(row)
        return buf.getvalue()

    table = [header]
    for r in report.records:
        row = [r.label, r.status, "—" if r.objective is None else f"{r.objective:.4f}"]
        for _, name, attr in cols:
            value = getattr(r, attr).get(name)
            row.append("—" if value is None else f"{value:.4f}")
        table.append(row)
    widths = [max(len(row[k]) for row in table) for k in range(len(header))]
    lines = []
    for row in table:
        cells = [row[0].ljust(widths[0]), row[1].ljust(widths[1])]
        cells += [cell.rjust(w) for cell, w in zip(row[2:], widths[2:])]
        lines.append("  ".join(cells).rstrip())
    if report.summary:
        lines.append("")
        for key, value in report.summary.items():
            lines.append(f"{key}: {value:.6g}" if isinstance(value, float) else f"{key}: {value}")
    return "\n".join(lines) + "\n"


def parse_scenario_spec(data: Mapping[str, Any]) -> ScenarioSpec:
    unknown = set(data) - {"case", "risk", "config", "variants"}
    if unknown:
        raise ScenarioError(f"scenario spec: unknown key(s) {sorted(unknown)}")
    if "case" not in data or "variants" not in data:
        raise ScenarioError("scenario spec needs 'case' and 'variants'")
    variants = []
    for k, raw in enumerate(data["variants"]):
        bad = set(raw) - {"label", "foc", "limits", "outage", "load_deltas", "allow_shedding"}
        if bad:
            raise ScenarioError(f"variants[{k}]: unknown key(s) {sorted(bad)}")
        if "label" not in raw:
            raise ScenarioError(f"variants[{k}]: missing label")
        variants.append(
            Variant(
                label=str(raw["label"]),
                foc=raw.get("foc"),
                limits={k2: float(v) for k2, v in raw.get("limits", {}).items()},
                outage=raw.get("outage"),
                load_deltas={k2: float(v) for k2, v in raw.get("load_deltas", {}).items()},
                allow_shedding=raw.get("allow_shedding"),
            )
        )
    config = dict(data.get("config", {}))
    bad = set(config) - {"mode", "foc", "foc_mode", "allow_shedding", "slack", "paper_literal_objective"}
    if bad:
        raise ScenarioError(f"scenario config: unknown key(s) {sorted(bad)}")
    return ScenarioSpec(str(data["case"]), tuple(variants), data.get("risk"), config)


def load_scenario_spec(path: str | Path) -> ScenarioSpec:
    return parse_scenario_spec(json.loads(Path(path).read_text(encoding="utf-8")))


def run_spec(
    case: NetworkCase, risk: RiskProfile | None, spec: ScenarioSpec, workers: int = 1
) -> ScenarioReport:
    spec.check(case)
    config = DispatchConfig(**spec.config)
    return run_variants(case, risk, config, spec.variants, workers)
