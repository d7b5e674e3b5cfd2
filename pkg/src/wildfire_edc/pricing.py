"""Locational marginal prices and their energy / congestion / wildfire / VOLL split.

With the balance dual ``lam`` and per-line limit duals ``mu_max``, ``mu_min``
(both >= 0), the price of one more MW of demand at bus ``i`` is::

    cong_i = -sum_l PTDF[l, i] * (mu_max[l] - mu_min[l])
    lmp_i  = lam + cong_i                                   (fully served bus)
    lmp_i  = r_i * (lam + cong_i) + VOLL_i * (1 - r_i)      (bus with served fraction r_i)

The minus sign is there because demand is a withdrawal. Congestion is split
between normal and at-risk lines. With optimized FOC, the part of an at-risk
line's congestion that comes from its risk cap (rather than the FOC upper
bound) is reported as the wildfire component.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dispatch import DispatchConfig, DispatchSolution, solve_dispatch
from .network import NetworkCase
from .ptdf import PtdfMatrix
from .risk import RiskProfile, default_profile

_SHARE_EPS = 1e-12


class PricingError(ValueError):
    pass


@dataclass(frozen=True)
class BusPrice:
    bus: str
    lmp: float
    energy: float
    congestion_normal: float
    congestion_risk: float
    wildfire: float
    voll: float

    @property
    def congestion(self) -> float:
        return self.congestion_normal + self.congestion_risk

    def component_sum(self) -> float:
        return self.energy + self.congestion_normal + self.congestion_risk + self.wildfire + self.voll


@dataclass(frozen=True)
class LmpBreakdown:
    records: tuple[BusPrice, ...]

    @property
    def lmps(self) -> dict[str, float]:
        return {r.bus: r.lmp for r in self.records}

    def __getitem__(self, bus: str) -> BusPrice:
        for r in self.records:
            if r.bus == bus:
                return r
        raise KeyError(bus)

    def render(self, fmt: str = "text") -> str:
        cols = ("bus", "lmp", "energy", "congestion", "wildfire", "voll")
        rows = [(r.bus, r.lmp, r.energy, r.congestion, r.wildfire, r.voll) for r in self.records]
        if fmt == "csv":
            out = [",".join(cols)]
            out += [",".join([b, *(repr(float(v)) for v in vals)]) for b, *vals in rows]
            return "\n".join(out) + "\n"
        if fmt != "text":
            raise ValueError(f"unknown format {fmt!r}")
        out = [f"{'bus':<6}" + "".join(f"{c:>13}" for c in cols[1:])]
        out += [f"{b:<6}" + "".join(f"{v:>13.4f}" for v in vals) for b, *vals in rows]
        return "\n".join(out) + "\n"


def _wildfire_share(solution: DispatchSolution, line_id: str) -> float:
    """Fraction of an at-risk line's shadow price attributed to its risk cap.

    From stationarity in FOC: ``t_max*mu_max - t_min*mu_min = sum_j a_j*nu_j - d_foc``,
    where ``nu_j`` are risk-cap duals and ``-d_foc`` is the FOC upper-bound dual.
    """
    if solution.config.foc_mode != "optimized" or line_id not in solution.foc:
        return 0.0
    seg_duals = solution.risk_cap_duals.get(line_id, ())
    if not seg_duals:
        return 0.0
    ln = solution.case.line(line_id)
    total = ln.t_max * solution.flow_max_duals.get(line_id, 0.0) - ln.t_min * solution.flow_min_duals.get(line_id, 0.0)
    if total <= _SHARE_EPS:
        return 0.0
    cap_part = total + solution.bound_duals.get(f"foc:{line_id}", 0.0)
    return min(max(cap_part / total, 0.0), 1.0)


def decompose_lmp(solution: DispatchSolution, ptdf: PtdfMatrix | None = None) -> LmpBreakdown:
    if not solution.optimal or solution.balance_dual is None:
        raise PricingError(f"no duals available (status {solution.status})")
    ptdf = solution.ptdf if ptdf is None else ptdf
    case = solution.case
    lam = float(solution.balance_dual)
    shares = {lid: _wildfire_share(solution, lid) for lid in solution.foc}
    risk = solution.config.mode == "WRB-EDC"

    records = []
    for k, bus in enumerate(case.buses):
        normal = at_risk = wildfire = 0.0
        for lid, row in zip(ptdf.line_ids, ptdf.values):
            shadow = solution.flow_max_duals.get(lid, 0.0) - solution.flow_min_duals.get(lid, 0.0)
            if shadow == 0.0:
                continue
            contrib = -float(row[k]) * shadow
            if risk and lid in solution.foc:
                share = shares[lid]
                wildfire += share * contrib
                at_risk += (1.0 - share) * contrib
            else:
                normal += contrib
        base = lam + normal + at_risk + wildfire
        voll = 0.0
        if bus.id in solution.served:
            r = solution.served[bus.id]
            lmp = r * base + _unserved_price(solution, bus.id) * (1.0 - r)
            voll = lmp - base
        else:
            lmp = base
        records.append(BusPrice(bus.id, lmp, lam, normal, at_risk, wildfire, voll))
    return LmpBreakdown(tuple(records))


def _unserved_price(solution: DispatchSolution, bus_id: str) -> float:
    """Objective change per MW of extra demand that goes unserved at ``bus_id``."""
    if solution.config.paper_literal_objective:
        return 0.0
    return solution.voll[bus_id]


@dataclass(frozen=True)
class FdCheck:
    bus: str
    lmp: float | None
    fd: float | None
    gap: float | None
    status: str
    basis_unchanged: bool


def verify_lmp_fd(
    case: NetworkCase,
    risk: RiskProfile | None,
    config: DispatchConfig,
    bus: str,
    eps: float = 1e-3,
) -> FdCheck:
    """Compare the dual-based LMP at ``bus`` with a forward difference of the objective."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    risk = default_profile(case) if risk is None else risk
    base = solve_dispatch(case, risk, config)
    if not base.optimal:
        return FdCheck(bus, None, None, None, f"base {base.status}", False)
    lmp = decompose_lmp(base)[bus].lmp
    bumped = solve_dispatch(case.with_demand(bus, case.bus(bus).demand + eps), risk, config)
    if not bumped.optimal:
        return FdCheck(bus, lmp, None, None, f"perturbed {bumped.status}", False)
    fd = (bumped.objective - base.objective) / eps
    return FdCheck(bus, lmp, fd, abs(lmp - fd), "Optimal", bumped.lp.basis == base.lp.basis)
