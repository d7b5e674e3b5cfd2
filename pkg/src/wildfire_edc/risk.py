"""Wildfire-risk semantics: vegetation categories, WR to FOC, piecewise-linear risk caps.

A line's risk as a function of its derating factor FOC is the upper envelope
``max_j (a_j * FOC + b_j)`` of a few affine pieces, bounded by a cap. Because
the envelope is convex, ``risk(FOC) <= cap`` is the same as one linear row
per piece, which is how the dispatch LP encodes it.
"""

from __future__ import annotations

import enum
import functools
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .network import NetworkCase

DEFAULT_VOLL = 10_000.0
DEFAULT_SEGMENTS = ((1.0, 0.0), (3.0, -1.0))
DEFAULT_CAP = 1.0


class RiskProfileError(ValueError):
    pass


@functools.total_ordering
class RiskCategory(enum.Enum):
    VLWR = ("VLWR", "Dark Green")
    LWR = ("LWR", "Light Green")
    MWR = ("MWR", "Faded Green")
    HWR = ("HWR", "Yellow")
    VHWR = ("VHWR", "Orange")
    DWR = ("DWR", "Red")

    def __init__(self, code: str, color: str):
        self.code = code
        self.color = color

    @property
    def rank(self) -> int:
        return list(RiskCategory).index(self)

    def __lt__(self, other: RiskCategory) -> bool:
        if not isinstance(other, RiskCategory):
            return NotImplemented
        return self.rank < other.rank

    @classmethod
    def parse(cls, token: str | RiskCategory) -> RiskCategory:
        if isinstance(token, RiskCategory):
            return token
        try:
            return cls[token.upper()]
        except KeyError:
            raise RiskProfileError(f"unknown risk category {token!r}") from None


# Policy knobs, not measurements; override with load_category_presets().
DEFAULT_CATEGORY_PRESETS: dict[RiskCategory, tuple[float, float]] = {
    RiskCategory.VLWR: (0.9, 1.0),
    RiskCategory.LWR: (0.75, 1.0),
    RiskCategory.MWR: (0.5, 0.9),
    RiskCategory.HWR: (0.4, 0.75),
    RiskCategory.VHWR: (0.25, 0.5),
    RiskCategory.DWR: (0.0, 0.25),
}


def load_category_presets(text: str) -> dict[RiskCategory, tuple[float, float]]:
    """Read ``{"MWR": [0.6, 0.8], ...}``; categories not listed keep their defaults."""
    raw = json.loads(text)
    presets = dict(DEFAULT_CATEGORY_PRESETS)
    for key, bounds in raw.items():
        lo, hi = (float(v) for v in bounds)
        if not 0.0 <= lo <= hi <= 1.0:
            raise RiskProfileError(f"preset {key}: need 0 <= foc_min <= foc_max <= 1")
        presets[RiskCategory.parse(key)] = (lo, hi)
    return presets


def category_to_foc_bounds(
    category: RiskCategory | str, presets: Mapping[RiskCategory, tuple[float, float]] | None = None
) -> tuple[float, float]:
    table = DEFAULT_CATEGORY_PRESETS if presets is None else presets
    return table[RiskCategory.parse(category)]


def wr_to_foc(wr: float) -> float:
    """Map a wildfire-risk score to a line derating factor.

    The mapping is the identity. It is kept as a function so a different
    calibration can be dropped in at one place.
    """
    if not (0.0 <= wr <= 1.0):
        raise ValueError(f"wildfire risk must lie in [0, 1], got {wr}")
    return float(wr)


@dataclass(frozen=True)
class RiskSegments:
    pieces: tuple[tuple[float, float], ...]
    cap: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple((float(a), float(b)) for a, b in self.pieces))


def eval_risk(segments: RiskSegments, foc: float) -> float:
    if not segments.pieces:
        raise ValueError("risk function needs at least one segment")
    return max(a * foc + b for a, b in segments.pieces)


def max_foc_under_cap(segments: RiskSegments, cap: float | None = None) -> float | None:
    """Largest FOC in [0, 1] whose risk stays within ``cap``; None if there is none."""
    cap = segments.cap if cap is None else cap
    if not segments.pieces:
        raise ValueError("risk function needs at least one segment")
    lo, hi = 0.0, 1.0
    for a, b in segments.pieces:
        # endpoint tests first: dividing by a tiny slope would amplify rounding
        if a > 0:
            if a + b > cap:
                hi = min(hi, (cap - b) / a)
        elif a < 0:
            if b > cap:
                lo = max(lo, (cap - b) / a)
        elif b > cap:
            return None
    return hi if hi >= lo else None


@dataclass(frozen=True)
class LineRisk:
    segments: RiskSegments = field(default_factory=lambda: RiskSegments(DEFAULT_SEGMENTS, DEFAULT_CAP))
    foc_min: float = 0.0
    foc_max: float = 1.0
    category: RiskCategory | None = None


@dataclass(frozen=True)
class BusRisk:
    voll: float = DEFAULT_VOLL
    r_min: float = 0.0
    r_max: float = 1.0


@dataclass(frozen=True)
class RiskProfile:
    lines: Mapping[str, LineRisk] = field(default_factory=dict)
    buses: Mapping[str, BusRisk] = field(default_factory=dict)
    wr: Mapping[str, float] = field(default_factory=dict)

    def bus(self, bus_id: str) -> BusRisk:
        return self.buses.get(bus_id, BusRisk())

    def restrict(self, case: NetworkCase) -> RiskProfile:
        """Drop entries for lines no longer in service (e.g. after an outage)."""
        keep = {ln.id for ln in case.at_risk_lines}
        return RiskProfile({k: v for k, v in self.lines.items() if k in keep}, self.buses, self.wr)

    def violations(self, case: NetworkCase) -> list[str]:
        out = []
        at_risk = {ln.id for ln in case.at_risk_lines}
        for lid in sorted(at_risk - set(self.lines)):
            out.append(f"line {lid}: at risk but missing from risk profile")
        for lid in sorted(set(self.lines) - at_risk):
            out.append(f"line {lid}: in risk profile but not an at-risk line of the case")
        for lid, lr in self.lines.items():
            if not (0.0 <= lr.foc_min <= lr.foc_max <= 1.0):
                out.append(f"line {lid}: need 0 <= foc_min <= foc_max <= 1")
            if not lr.segments.pieces:
                out.append(f"line {lid}: risk function has no segments")
        for bid, br in self.buses.items():
            if bid not in case.bus_ids:
                out.append(f"bus {bid}: unknown bus")
            if br.voll < 0:
                out.append(f"bus {bid}: voll must be >= 0")
            if not (0.0 <= br.r_min <= br.r_max <= 1.0):
                out.append(f"bus {bid}: need 0 <= r_min <= r_max <= 1")
        for loc, value in self.wr.items():
            if not (0.0 <= value <= 1.0):
                out.append(f"wr {loc}: value must lie in [0, 1]")
        return out

    def line_wr(self, case: NetworkCase, line_id: str) -> float | None:
        """WR of a line: the larger of its two end locations (buses) that carry a score."""
        ln = case.line(line_id)
        scores = [self.wr[b] for b in (ln.from_bus, ln.to_bus) if b in self.wr]
        return max(scores) if scores else None

    def focs_from_wr(self, case: NetworkCase) -> dict[str, float]:
        out = {}
        for ln in case.at_risk_lines:
            wr = self.line_wr(case, ln.id)
            if wr is not None:
                out[ln.id] = wr_to_foc(wr)
        return out


def default_profile(case: NetworkCase) -> RiskProfile:
    """Default segments and cap on every at-risk line, default VOLL at every bus."""
    return RiskProfile({ln.id: LineRisk() for ln in case.at_risk_lines}, {}, {})


def parse_risk_profile(
    data: Mapping[str, Any], presets: Mapping[RiskCategory, tuple[float, float]] | None = None
) -> RiskProfile:
    unknown = set(data) - {"lines", "buses", "wr"}
    if unknown:
        raise RiskProfileError(f"risk profile: unknown key(s) {sorted(unknown)}")
    lines = {}
    for lid, raw in data.get("lines", {}).items():
        bad = set(raw) - {"segments", "cap", "foc_min", "foc_max", "category"}
        if bad:
            raise RiskProfileError(f"line {lid}: unknown key(s) {sorted(bad)}")
        category = RiskCategory.parse(raw["category"]) if raw.get("category") else None
        lo, hi = category_to_foc_bounds(category, presets) if category else (0.0, 1.0)
        pieces = tuple(tuple(p) for p in raw.get("segments", DEFAULT_SEGMENTS))
        if any(len(p) != 2 for p in pieces):
            raise RiskProfileError(f"line {lid}: each segment must be [a, b]")
        lines[lid] = LineRisk(
            segments=RiskSegments(pieces, float(raw.get("cap", DEFAULT_CAP))),
            foc_min=float(raw.get("foc_min", lo)),
            foc_max=float(raw.get("foc_max", hi)),
            category=category,
        )
    buses = {}
    for bid, raw in data.get("buses", {}).items():
        bad = set(raw) - {"voll", "r_min", "r_max"}
        if bad:
            raise RiskProfileError(f"bus {bid}: unknown key(s) {sorted(bad)}")
        buses[bid] = BusRisk(
            float(raw.get("voll", DEFAULT_VOLL)), float(raw.get("r_min", 0.0)), float(raw.get("r_max", 1.0))
        )
    wr = {str(k): float(v) for k, v in data.get("wr", {}).items()}
    return RiskProfile(lines, buses, wr)


def load_risk_profile(text: str, case: NetworkCase | None = None) -> RiskProfile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RiskProfileError(f"invalid JSON: {exc}") from exc
    profile = parse_risk_profile(data)
    if case is not None:
        problems = profile.violations(case)
        if problems:
            raise RiskProfileError("; ".join(problems))
    return profile


def read_risk_profile(path: str | Path, case: NetworkCase | None = None) -> RiskProfile:
    return load_risk_profile(Path(path).read_text(encoding="utf-8"), case)


def risk_profile_to_dict(profile: RiskProfile) -> dict[str, Any]:
    return {
        "lines": {
            lid: {
                "segments": [list(p) for p in lr.segments.pieces],
                "cap": lr.segments.cap,
                "foc_min": lr.foc_min,
                "foc_max": lr.foc_max,
                **({"category": lr.category.code} if lr.category else {}),
            }
            for lid, lr in profile.lines.items()
        },
        "buses": {bid: {"voll": br.voll, "r_min": br.r_min, "r_max": br.r_max} for bid, br in profile.buses.items()},
        "wr": dict(profile.wr),
    }
