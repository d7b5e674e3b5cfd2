"""Grid data model: buses, lines, generators, and the JSON case-file format.

Bus order in the file is significant. Bus ``k`` in the file is column ``k``
of every susceptance and PTDF matrix built downstream.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

DEFAULT_LIMIT_MW = 10_000.0

_CASE_KEYS = {"name", "buses", "lines", "generators"}
_BUS_KEYS = {"id", "demand_mw"}
_LINE_KEYS = {"id", "from", "to", "reactance_pu", "limit_mw", "limit_min_mw", "at_risk"}
_GEN_KEYS = {"id", "bus", "cost_per_mwh", "p_min_mw", "p_max_mw"}


class CaseError(ValueError):
    """Base class for case-file problems."""


class CaseParseError(CaseError):
    """Malformed case file (bad JSON, missing or unknown keys, wrong types)."""


class CaseValidationError(CaseError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class DisconnectedCaseError(CaseError):
    """The line graph does not connect every bus."""


@dataclass(frozen=True)
class Bus:
    id: str
    demand: float = 0.0


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    cost: float
    p_min: float
    p_max: float


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    reactance: float
    t_max: float = DEFAULT_LIMIT_MW
    t_min: float | None = None
    at_risk: bool = False

    def __post_init__(self):
        if self.t_min is None:
            object.__setattr__(self, "t_min", -self.t_max)


@dataclass(frozen=True)
class Violation:
    kind: str
    entity: str
    rule: str

    def __str__(self) -> str:
        return f"{self.kind} {self.entity}: {self.rule}"


@dataclass(frozen=True)
class NetworkCase:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...] = ()
    generators: tuple[Generator, ...] = ()
    name: str = ""
    _bus_index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "_bus_index", {b.id: k for k, b in enumerate(self.buses)})

    @property
    def bus_ids(self) -> list[str]:
        return [b.id for b in self.buses]

    @property
    def line_ids(self) -> list[str]:
        return [ln.id for ln in self.lines]

    @property
    def generator_ids(self) -> list[str]:
        return [g.id for g in self.generators]

    def bus_index(self, bus_id: str) -> int:
        return self._bus_index[bus_id]

    def bus(self, bus_id: str) -> Bus:
        return self.buses[self._bus_index[bus_id]]

    def line(self, line_id: str) -> Line:
        for ln in self.lines:
            if ln.id == line_id:
                return ln
        raise KeyError(line_id)

    def generator(self, gen_id: str) -> Generator:
        for g in self.generators:
            if g.id == gen_id:
                return g
        raise KeyError(gen_id)

    @property
    def total_demand(self) -> float:
        return sum(b.demand for b in self.buses)

    @property
    def at_risk_lines(self) -> list[Line]:
        return [ln for ln in self.lines if ln.at_risk]

    def with_demand(self, bus_id: str, demand: float) -> NetworkCase:
        buses = [replace(b, demand=demand) if b.id == bus_id else b for b in self.buses]
        return replace(self, buses=tuple(buses))

    def with_line_limit(self, line_id: str, t_max: float, t_min: float | None = None) -> NetworkCase:
        self.line(line_id)
        lines = [
            replace(ln, t_max=t_max, t_min=-t_max if t_min is None else t_min) if ln.id == line_id else ln
            for ln in self.lines
        ]
        return replace(self, lines=tuple(lines))


def is_connected(case: NetworkCase) -> bool:
    """True when every bus is reachable from the first one over in-service lines."""
    if not case.buses:
        return False
    adjacency: dict[str, list[str]] = {b.id: [] for b in case.buses}
    for ln in case.lines:
        if ln.from_bus in adjacency and ln.to_bus in adjacency:
            adjacency[ln.from_bus].append(ln.to_bus)
            adjacency[ln.to_bus].append(ln.from_bus)
    start = case.buses[0].id
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(case.buses)


def validate_case(case: NetworkCase) -> list[Violation]:
    """Check every data-model invariant; an empty list means the case is valid.

    Violations are returned, never raised, so a caller can report all of them
    at once.
    """
    out: list[Violation] = []
    seen: set[str] = set()
    for b in case.buses:
        if b.id in seen:
            out.append(Violation("bus", b.id, "duplicate id"))
        seen.add(b.id)
        if not math.isfinite(b.demand) or b.demand < 0:
            out.append(Violation("bus", b.id, "demand must be finite and >= 0"))

    line_ids: set[str] = set()
    for ln in case.lines:
        if ln.id in line_ids:
            out.append(Violation("line", ln.id, "duplicate id"))
        line_ids.add(ln.id)
        for end in (ln.from_bus, ln.to_bus):
            if end not in seen:
                out.append(Violation("line", ln.id, f"unknown bus {end!r}"))
        if ln.from_bus == ln.to_bus:
            out.append(Violation("line", ln.id, "from and to bus must differ"))
        if not (ln.reactance > 0) or not math.isfinite(ln.reactance):
            out.append(Violation("line", ln.id, "reactance must be > 0"))
        if not (ln.t_min <= 0 <= ln.t_max):
            out.append(Violation("line", ln.id, "limits must satisfy t_min <= 0 <= t_max"))

    gen_ids: set[str] = set()
    for g in case.generators:
        if g.id in gen_ids:
            out.append(Violation("generator", g.id, "duplicate id"))
        gen_ids.add(g.id)
        if g.bus not in seen:
            out.append(Violation("generator", g.id, f"unknown bus {g.bus!r}"))
        if not (0 <= g.p_min <= g.p_max):
            out.append(Violation("generator", g.id, f"need 0 <= p_min <= p_max (got {g.p_min}, {g.p_max})"))
        if not (g.cost >= 0):
            out.append(Violation("generator", g.id, "cost must be >= 0"))

    if not case.generators:
        out.append(Violation("case", case.name or "<unnamed>", "at least one generator required"))
    return out


def _require(obj: Any, keys: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise CaseParseError(f"{where}: expected an object")
    unknown = set(obj) - keys
    if unknown:
        raise CaseParseError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise CaseParseError(f"{where}: missing key(s) {sorted(missing)}")


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CaseParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _str(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise CaseParseError(f"{where}: expected a non-empty string, got {value!r}")
    return value


def parse_case(data: dict[str, Any], default_limit: float = DEFAULT_LIMIT_MW) -> NetworkCase:
    """Build a case from already-decoded JSON without validating it."""
    _require(data, _CASE_KEYS, {"buses", "generators"}, "case")
    buses = []
    for k, raw in enumerate(data["buses"]):
        where = f"buses[{k}]"
        _require(raw, _BUS_KEYS, {"id"}, where)
        buses.append(Bus(_str(raw["id"], where + ".id"), _num(raw.get("demand_mw", 0.0), where + ".demand_mw")))

    lines = []
    for k, raw in enumerate(data.get("lines", [])):
        where = f"lines[{k}]"
        _require(raw, _LINE_KEYS, {"id", "from", "to", "reactance_pu"}, where)
        t_max = _num(raw.get("limit_mw", default_limit), where + ".limit_mw")
        t_min = _num(raw["limit_min_mw"], where + ".limit_min_mw") if "limit_min_mw" in raw else -t_max
        at_risk = raw.get("at_risk", False)
        if not isinstance(at_risk, bool):
            raise CaseParseError(f"{where}.at_risk: expected a boolean")
        lines.append(
            Line(
                id=_str(raw["id"], where + ".id"),
                from_bus=_str(raw["from"], where + ".from"),
                to_bus=_str(raw["to"], where + ".to"),
                reactance=_num(raw["reactance_pu"], where + ".reactance_pu"),
                t_max=t_max,
                t_min=t_min,
                at_risk=at_risk,
            )
        )

    gens = []
    for k, raw in enumerate(data["generators"]):
        where = f"generators[{k}]"
        _require(raw, _GEN_KEYS, {"id", "bus", "cost_per_mwh", "p_max_mw"}, where)
        gens.append(
            Generator(
                id=_str(raw["id"], where + ".id"),
                bus=_str(raw["bus"], where + ".bus"),
                cost=_num(raw["cost_per_mwh"], where + ".cost_per_mwh"),
                p_min=_num(raw.get("p_min_mw", 0.0), where + ".p_min_mw"),
                p_max=_num(raw["p_max_mw"], where + ".p_max_mw"),
            )
        )
    name = data.get("name", "")
    if not isinstance(name, str):
        raise CaseParseError("case.name: expected a string")
    return NetworkCase(buses=tuple(buses), lines=tuple(lines), generators=tuple(gens), name=name)


def load_case(text: str, default_limit: float = DEFAULT_LIMIT_MW) -> NetworkCase:
    """Parse and validate case-file text.

    Raises CaseParseError, CaseValidationError or DisconnectedCaseError.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseParseError(f"invalid JSON: {exc}") from exc
    case = parse_case(data, default_limit)
    violations = validate_case(case)
    if violations:
        raise CaseValidationError(violations)
    if not is_connected(case):
        raise DisconnectedCaseError(f"case {case.name!r} is not connected")
    return case


def read_case(path: str | Path, default_limit: float = DEFAULT_LIMIT_MW) -> NetworkCase:
    return load_case(Path(path).read_text(encoding="utf-8"), default_limit)


def case_to_dict(case: NetworkCase) -> dict[str, Any]:
    """Every field is written explicitly so the output round-trips exactly."""
    return {
        "name": case.name,
        "buses": [{"id": b.id, "demand_mw": b.demand} for b in case.buses],
        "lines": [
            {
                "id": ln.id,
                "from": ln.from_bus,
                "to": ln.to_bus,
                "reactance_pu": ln.reactance,
                "limit_mw": ln.t_max,
                "limit_min_mw": ln.t_min,
                "at_risk": ln.at_risk,
            }
            for ln in case.lines
        ],
        "generators": [
            {
                "id": g.id,
                "bus": g.bus,
                "cost_per_mwh": g.cost,
                "p_min_mw": g.p_min,
                "p_max_mw": g.p_max,
            }
            for g in case.generators
        ],
    }


def dump_case(case: NetworkCase) -> str:
    return json.dumps(case_to_dict(case), indent=2) + "\n"


def apply_outage(case: NetworkCase, line_id: str) -> tuple[NetworkCase, bool]:
    """Remove one line. Returns the reduced case and whether it is still connected."""
    if line_id not in case.line_ids:
        raise KeyError(f"unknown line {line_id!r}")
    reduced = replace(case, lines=tuple(ln for ln in case.lines if ln.id != line_id))
    return reduced, is_connected(reduced)
