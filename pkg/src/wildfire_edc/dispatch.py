"""Economic dispatch LPs: plain EDC, line-limited SCED, and the wildfire-risk-based WRB-EDC.

Variables (LP names):

* ``gen:<id>``    generator output X, MW
* ``served:<bus>`` served fraction r of demand, only at buses with demand that
  touch an at-risk line, and only when shedding is allowed
* ``foc:<line>``  derating factor of an at-risk line (fixed or optimized)

Bus injections ``Y = X - r*D`` are substituted, not declared. Line flows are
``PTDF @ Y``. Unserved energy costs ``VOLL * D * (1 - r)``.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .lp import LpProblem, LpSolution, LpStatus, solve_lp
from .network import DisconnectedCaseError, NetworkCase, is_connected
from .ptdf import PtdfMatrix, compute_ptdf
from .risk import RiskProfile, default_profile

EDC = "EDC"
SCED = "SCED"
WRB_EDC = "WRB-EDC"
MODES = (EDC, SCED, WRB_EDC)

_PTDF_ZERO = 1e-12
BINDING_TOL = 1e-6


class DispatchError(ValueError):
    """Inconsistent case, risk profile and configuration."""


@dataclass(frozen=True)
class DispatchConfig:
    """How to build the dispatch LP.

    ``foc`` is either one value for every at-risk line or a per-line mapping;
    it is used only in fixed mode. In optimized mode each FOC is a variable
    bounded by the risk profile's ``foc_min``/``foc_max`` and its risk cap.
    """

    mode: str = WRB_EDC
    foc: float | Mapping[str, float] = 1.0
    foc_mode: str = "fixed"
    allow_shedding: bool = False
    slack: str | None = None
    paper_literal_objective: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise DispatchError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.foc_mode not in ("fixed", "optimized"):
            raise DispatchError(f"unknown foc_mode {self.foc_mode!r}")
        values = self.foc.values() if isinstance(self.foc, Mapping) else [self.foc]
        for v in values:
            if not (0.0 < float(v) <= 1.0):
                raise DispatchError(f"fixed FOC values must lie in (0, 1], got {v}")
        if isinstance(self.foc, Mapping):
            object.__setattr__(self, "foc", dict(self.foc))

    def fixed_foc(self, line_id: str) -> float:
        if isinstance(self.foc, Mapping):
            try:
                return float(self.foc[line_id])
            except KeyError:
                raise DispatchError(f"no fixed FOC given for at-risk line {line_id!r}") from None
        return float(self.foc)


def _risk_lines(case: NetworkCase, config: DispatchConfig) -> list[str]:
    return [ln.id for ln in case.at_risk_lines] if config.mode == WRB_EDC else []


def served_buses(case: NetworkCase, config: DispatchConfig) -> list[str]:
    """Buses that get a served-fraction variable, in case order."""
    if config.mode != WRB_EDC or not config.allow_shedding:
        return []
    touching = set()
    for ln in case.at_risk_lines:
        touching.update((ln.from_bus, ln.to_bus))
    return [b.id for b in case.buses if b.id in touching and b.demand > 0]


def build_edc(case: NetworkCase) -> LpProblem:
    """Cheapest dispatch meeting total demand, ignoring the network."""
    lp = LpProblem()
    for g in case.generators:
        lp.add_variable(f"gen:{g.id}", g.p_min, g.p_max, cost=g.cost)
    lp.add_eq("balance", {f"gen:{g.id}": 1.0 for g in case.generators}, case.total_demand)
    return lp


def _injection_terms(case: NetworkCase, served: list[str]):
    """Per bus: (variable coefficients, constant) with Y_i = coefs @ vars + constant."""
    terms: list[tuple[dict[str, float], float]] = [({}, 0.0) for _ in case.buses]
    for g in case.generators:
        coefs = terms[case.bus_index(g.bus)][0]
        coefs[f"gen:{g.id}"] = coefs.get(f"gen:{g.id}", 0.0) + 1.0
    for k, b in enumerate(case.buses):
        coefs, _ = terms[k]
        if b.id in served:
            coefs[f"served:{b.id}"] = -b.demand
            terms[k] = (coefs, 0.0)
        else:
            terms[k] = (coefs, -b.demand)
    return terms


def build_wrb_edc(
    case: NetworkCase, risk: RiskProfile | None, config: DispatchConfig, ptdf: PtdfMatrix
) -> LpProblem:
    """Assemble the risk-aware dispatch LP.

    Normal lines get ``t_min <= flow <= t_max``; at-risk lines get
    ``t_min*FOC <= flow <= t_max*FOC`` with FOC its own variable, so the rows
    stay linear. In optimized mode every risk piece adds ``a_j*FOC <= cap - b_j``.
    With ``config.mode == SCED`` no line is treated as at risk.
    """
    if ptdf.line_ids != tuple(case.line_ids) or ptdf.bus_ids != tuple(case.bus_ids):
        raise DispatchError("PTDF matrix was built for a different case")
    risk = default_profile(case) if risk is None else risk
    risk_lines = _risk_lines(case, config)
    missing = [lid for lid in risk_lines if lid not in risk.lines]
    if missing:
        raise DispatchError(f"risk profile does not cover at-risk line(s) {missing}")
    served = served_buses(case, config)

    lp = LpProblem()
    for g in case.generators:
        lp.add_variable(f"gen:{g.id}", g.p_min, g.p_max, cost=g.cost)
    for bid in served:
        br = risk.bus(bid)
        demand = case.bus(bid).demand
        if config.paper_literal_objective:
            lp.add_variable(f"served:{bid}", br.r_min, br.r_max, cost=br.voll)
        else:
            lp.add_variable(f"served:{bid}", br.r_min, br.r_max, cost=-br.voll * demand)
            lp.offset += br.voll * demand
    for lid in risk_lines:
        lr = risk.lines[lid]
        if config.foc_mode == "fixed":
            f = config.fixed_foc(lid)
            lp.add_variable(f"foc:{lid}", f, f)
        else:
            if not (0.0 <= lr.foc_min <= lr.foc_max <= 1.0):
                raise DispatchError(f"line {lid}: need 0 <= foc_min <= foc_max <= 1")
            lp.add_variable(f"foc:{lid}", lr.foc_min, lr.foc_max)

    terms = _injection_terms(case, served)
    balance: dict[str, float] = {}
    constant = 0.0
    for coefs, c0 in terms:
        for k, v in coefs.items():
            balance[k] = balance.get(k, 0.0) + v
        constant += c0
    lp.add_eq("balance", balance, -constant)

    at_risk = set(risk_lines)
    for row, ln in zip(ptdf.values, case.lines):
        flow: dict[str, float] = {}
        c0 = 0.0
        for p, (coefs, const) in zip(row, terms):
            if abs(p) < _PTDF_ZERO:
                continue
            for k, v in coefs.items():
                flow[k] = flow.get(k, 0.0) + p * v
            c0 += p * const
        neg = {k: -v for k, v in flow.items()}
        if ln.id in at_risk:
            var = f"foc:{ln.id}"
            lp.add_le(f"flow_max:{ln.id}", {**flow, var: -ln.t_max}, -c0)
            lp.add_le(f"flow_min:{ln.id}", {**neg, var: ln.t_min}, c0)
        else:
            lp.add_le(f"flow_max:{ln.id}", flow, ln.t_max - c0)
            lp.add_le(f"flow_min:{ln.id}", neg, -ln.t_min + c0)

    if config.foc_mode == "optimized":
        for lid in risk_lines:
            seg = risk.lines[lid].segments
            if math.isinf(seg.cap):
                continue
            for j, (a, b) in enumerate(seg.pieces):
                lp.add_le(f"risk_cap:{lid}:{j}", {f"foc:{lid}": a}, seg.cap - b)
    return lp


def build_sced(case: NetworkCase, ptdf: PtdfMatrix) -> LpProblem:
    """Security-constrained dispatch: every line at its nominal limits, no FOC."""
    return build_wrb_edc(case, RiskProfile(), DispatchConfig(mode=SCED, slack=ptdf.slack_bus), ptdf)


@dataclass(frozen=True)
class DispatchSolution:
    status: LpStatus
    config: DispatchConfig
    case: NetworkCase
    ptdf: PtdfMatrix
    lp: LpSolution
    objective: float | None = None
    generation: dict[str, float] = field(default_factory=dict)
    injections: dict[str, float] = field(default_factory=dict)
    flows: dict[str, float] = field(default_factory=dict)
    served: dict[str, float] = field(default_factory=dict)
    voll: dict[str, float] = field(default_factory=dict)
    foc: dict[str, float] = field(default_factory=dict)
    limits: dict[str, tuple[float, float]] = field(default_factory=dict)
    balance_dual: float | None = None
    flow_max_duals: dict[str, float] = field(default_factory=dict)
    flow_min_duals: dict[str, float] = field(default_factory=dict)
    risk_cap_duals: dict[str, tuple[float, ...]] = field(default_factory=dict)
    bound_duals: dict[str, float] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def total_generation(self) -> float:
        return sum(self.generation.values())

    @property
    def served_mw(self) -> float:
        return sum(b.demand * self.served.get(b.id, 1.0) for b in self.case.buses)

    @property
    def shed_mw(self) -> float:
        return self.case.total_demand - self.served_mw

    def binding_lines(self, tol: float = BINDING_TOL) -> list[str]:
        out = []
        for lid, (lo, hi) in self.limits.items():
            f = self.flows[lid]
            if f >= hi - tol or f <= lo + tol:
                out.append(lid)
        return out

    def line_dual(self, line_id: str) -> float:
        """Shadow price of the line limit, signed like the flow (positive = from->to limit)."""
        return self.flow_max_duals.get(line_id, 0.0) - self.flow_min_duals.get(line_id, 0.0)


def unpack_solution(
    case: NetworkCase, risk: RiskProfile, config: DispatchConfig, ptdf: PtdfMatrix, sol: LpSolution
) -> DispatchSolution:
    if not sol.optimal:
        return DispatchSolution(sol.status, config, case, ptdf, sol)
    x = sol.primal
    generation = {g.id: x[f"gen:{g.id}"] for g in case.generators}
    served = {k.split(":", 1)[1]: v for k, v in x.items() if k.startswith("served:")}
    foc = {k.split(":", 1)[1]: v for k, v in x.items() if k.startswith("foc:")}
    inj = np.array([-b.demand * served.get(b.id, 1.0) for b in case.buses])
    for g in case.generators:
        inj[case.bus_index(g.bus)] += generation[g.id]
    flows = ptdf.values @ inj

    limits = {}
    if config.mode != EDC:
        for ln in case.lines:
            scale = foc.get(ln.id, 1.0)
            limits[ln.id] = (ln.t_min * scale, ln.t_max * scale)

    caps: dict[str, list[float]] = {}
    for name, mu in sol.duals_ineq.items():
        if name.startswith("risk_cap:"):
            _, lid, _ = name.split(":")
            caps.setdefault(lid, []).append(mu)

    return DispatchSolution(
        status=sol.status,
        config=config,
        case=case,
        ptdf=ptdf,
        lp=sol,
        objective=sol.objective_value,
        generation=generation,
        injections=dict(zip(case.bus_ids, map(float, inj))),
        flows=dict(zip(case.line_ids, map(float, flows))),
        served=served,
        voll={b: risk.bus(b).voll for b in served},
        foc=foc,
        limits=limits,
        balance_dual=sol.duals_eq.get("balance"),
        flow_max_duals={k.split(":", 1)[1]: v for k, v in sol.duals_ineq.items() if k.startswith("flow_max:")},
        flow_min_duals={k.split(":", 1)[1]: v for k, v in sol.duals_ineq.items() if k.startswith("flow_min:")},
        risk_cap_duals={k: tuple(v) for k, v in caps.items()},
        bound_duals=dict(sol.reduced_costs),
    )


def build_problem(case: NetworkCase, risk: RiskProfile | None, config: DispatchConfig, ptdf: PtdfMatrix) -> LpProblem:
    if config.mode == EDC:
        return build_edc(case)
    return build_wrb_edc(case, risk, config, ptdf)


def solve_dispatch(
    case: NetworkCase, risk: RiskProfile | None = None, config: DispatchConfig | None = None
) -> DispatchSolution:
    """Build PTDF and LP for ``config``, solve, and unpack primal and dual values.

    An infeasible problem is a normal result (status only, no primal fields).
    """
    config = DispatchConfig() if config is None else config
    if not is_connected(case):
        raise DisconnectedCaseError(f"case {case.name!r} is disconnected")
    risk = default_profile(case) if risk is None else risk.restrict(case)
    ptdf = compute_ptdf(case, config.slack)
    problem = build_problem(case, risk, config, ptdf)
    return unpack_solution(case, risk, config, ptdf, solve_lp(problem))


def basis_is_unique(
    case: NetworkCase, risk: RiskProfile | None, config: DispatchConfig, delta: float = 1e-4
) -> bool:
    """Probe whether the optimal basis is locally unique.

    Re-solves with every nonzero demand and every generator cost nudged by
    ``+-delta``; the optimum is treated as non-degenerate (duals unique) only
    if every probe lands on the same basis as the unperturbed solve. Zero
    demands are left alone: making them positive can add served-fraction
    variables and so change the LP itself.
    """
    base = solve_dispatch(case, risk, config)
    if not base.optimal:
        return False
    probes = []
    for b in case.buses:
        if b.demand <= delta:
            continue
        for s in (delta, -delta):
            probes.append(case.with_demand(b.id, b.demand + s))
    for g in case.generators:
        for s in (delta, -delta):
            gens = tuple(replace(x, cost=x.cost + s) if x.id == g.id else x for x in case.generators)
            probes.append(replace(case, generators=gens))
    for probe in probes:
        sol = solve_dispatch(probe, risk, config)
        if not sol.optimal or sol.lp.basis != base.lp.basis:
            return False
    return True


def solution_to_dict(solution: DispatchSolution, lmps: Mapping[str, float] | None = None) -> dict[str, Any]:
    """JSON-ready view. ``shed`` is the unserved fraction ``1 - r`` per served-fraction bus."""
    if not solution.optimal:
        return {"status": str(solution.status), "objective": None, "generation": {}, "injections": {},
                "flows": {}, "lmps": {}, "duals": {}, "foc": {}, "shed": {}, "served": {}, "binding": []}
    return {
        "status": str(solution.status),
        "objective": solution.objective,
        "generation": dict(solution.generation),
        "injections": dict(solution.injections),
        "flows": dict(solution.flows),
        "lmps": dict(lmps or {}),
        "duals": {
            "balance": solution.balance_dual,
            "flow_max": dict(solution.flow_max_duals),
            "flow_min": dict(solution.flow_min_duals),
            "risk_cap": {k: list(v) for k, v in solution.risk_cap_duals.items()},
            "bounds": dict(solution.bound_duals),
        },
        "foc": dict(solution.foc),
        "shed": {k: 1.0 - v for k, v in solution.served.items()},
        "served": dict(solution.served),
        "binding": solution.binding_lines(),
    }
