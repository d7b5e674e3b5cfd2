import time

import numpy as np
import pytest

from helpers import one_bus, pjm5, triangle, two_bus
from wildfire_edc.dispatch import (
    EDC,
    SCED,
    DispatchConfig,
    DispatchError,
    basis_is_unique,
    build_edc,
    build_problem,
    build_sced,
    served_buses,
    solution_to_dict,
    solve_dispatch,
)
from wildfire_edc.lp import LpStatus, solve_lp
from wildfire_edc.network import Bus, DisconnectedCaseError, Generator, NetworkCase, apply_outage
from wildfire_edc.ptdf import compute_ptdf, line_flows
from wildfire_edc.risk import BusRisk, LineRisk, RiskProfile, RiskSegments, default_profile, eval_risk


def test_edc_single_generator():
    sol = solve_lp(build_edc(one_bus(50.0, 10.0, 100.0)))
    assert sol.primal["gen:g"] == pytest.approx(50.0)
    assert sol.objective_value == pytest.approx(500.0)


def test_edc_pjm5_shape():
    lp = build_edc(pjm5())
    assert len(lp.variables) == 5
    assert lp.eq_constraints[0].rhs == 1000.0


def test_edc_zero_load():
    case = NetworkCase((Bus("a", 0.0),), (), (Generator("g", "a", 10.0, 0.0, 100.0),))
    sol = solve_dispatch(case, config=DispatchConfig(mode=EDC))
    assert sol.generation == {"g": 0.0} and sol.objective == 0.0


def test_edc_merit_order():
    sol = solve_dispatch(pjm5(), config=DispatchConfig(mode=EDC))
    assert sol.total_generation == pytest.approx(1000.0)
    # cheapest first: alta 14, park_city 15, brighton 20 cover 810, solitude the rest
    assert sol.generation == pytest.approx(
        {"alta": 40.0, "park_city": 170.0, "brighton": 600.0, "solitude": 190.0, "sundance": 0.0}
    )
    assert sol.limits == {}


def test_foc_one_equals_sced():
    case = pjm5()
    wrb = solve_dispatch(case, config=DispatchConfig(foc=1.0))
    sced = solve_lp(build_sced(case, compute_ptdf(case)))
    assert wrb.objective == pytest.approx(sced.objective_value, abs=1e-7)
    sced_sol = solve_dispatch(case, config=DispatchConfig(mode=SCED))
    for lid in case.line_ids:
        assert wrb.flows[lid] == pytest.approx(sced_sol.flows[lid], abs=1e-6)


def test_foc_half():
    sol = solve_dispatch(pjm5(), config=DispatchConfig(foc=0.5))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.flows["de"] == pytest.approx(-120.0, abs=1e-6)
    assert sol.limits["de"] == (-120.0, 120.0)


def test_foc_quarter_infeasible():
    sol = solve_dispatch(pjm5(), config=DispatchConfig(foc=0.25))
    assert sol.status is LpStatus.INFEASIBLE
    assert not sol.optimal and sol.objective is None


def test_foc_075_de_flow_and_dual():
    sol = solve_dispatch(pjm5(), config=DispatchConfig(foc=0.75))
    assert sol.flows["de"] == pytest.approx(-180.0, abs=1e-6)
    assert sol.flow_min_duals["de"] > 0
    assert "de" in sol.binding_lines()


def test_shedding_on_same_dispatch_when_feasible():
    case = pjm5()
    off = solve_dispatch(case, config=DispatchConfig(foc=0.5))
    on = solve_dispatch(case, config=DispatchConfig(foc=0.5, allow_shedding=True))
    assert set(on.served) == {"b", "c", "d"}
    assert all(r == pytest.approx(1.0) for r in on.served.values())
    assert on.objective == pytest.approx(off.objective, abs=1e-6)
    for g in case.generator_ids:
        assert on.generation[g] == pytest.approx(off.generation[g], abs=1e-6)


def test_shedding_rescues_quarter():
    sol = solve_dispatch(pjm5(), config=DispatchConfig(foc=0.25, allow_shedding=True))
    assert sol.optimal
    assert sol.shed_mw > 1.0
    assert sol.served_mw + sol.shed_mw == pytest.approx(1000.0)


def test_served_only_next_to_at_risk_lines():
    case = triangle(demands=(0.0, 50.0, 50.0), gens=(Generator("g", "1", 1.0, 0.0, 200.0),), at_risk=False)
    assert served_buses(case, DispatchConfig(allow_shedding=True)) == []
    risky = triangle(demands=(0.0, 50.0, 50.0), gens=(Generator("g", "1", 1.0, 0.0, 200.0),))
    assert served_buses(risky, DispatchConfig(allow_shedding=True)) == ["2", "3"]
    assert served_buses(risky, DispatchConfig(allow_shedding=False)) == []


def test_literal_voll_objective_sheds_everything():
    case = pjm5()
    sol = solve_dispatch(case, config=DispatchConfig(foc=0.5, allow_shedding=True, paper_literal_objective=True))
    assert sol.optimal
    assert all(r == pytest.approx(0.0) for r in sol.served.values())


def test_flows_consistent_with_injections():
    case = pjm5()
    for foc in (1.0, 0.75, 0.5):
        sol = solve_dispatch(case, config=DispatchConfig(foc=foc))
        flows = line_flows(sol.ptdf, sol.injections)
        assert np.allclose(flows, [sol.flows[lid] for lid in case.line_ids], atol=1e-6)
        assert sum(sol.injections.values()) == pytest.approx(0.0, abs=1e-6)


def test_optimized_foc_respects_cap():
    case = pjm5()
    sol = solve_dispatch(case, config=DispatchConfig(foc_mode="optimized"))
    assert sol.optimal
    segs = RiskSegments([(1, 0), (3, -1)], 1.0)
    for lid, f in sol.foc.items():
        assert eval_risk(segs, f) <= 1.0 + 1e-7
        assert f == pytest.approx(2 / 3, abs=1e-9)


def test_optimized_foc_uses_profile_bounds():
    case = pjm5()
    lines = {lid: LineRisk(foc_min=0.1, foc_max=0.6) for lid in case.line_ids}
    sol = solve_dispatch(case, RiskProfile(lines), DispatchConfig(foc_mode="optimized"))
    assert all(f <= 0.6 + 1e-12 for f in sol.foc.values())


def test_monotone_in_foc():
    case = pjm5()
    objs = [solve_dispatch(case, config=DispatchConfig(foc=f)).objective for f in (0.5, 0.75, 1.0)]
    assert objs[0] >= objs[1] - 1e-7 >= objs[2] - 2e-7


def test_per_line_foc_mapping():
    case = pjm5()
    focs = {lid: 1.0 for lid in case.line_ids}
    focs["de"] = 0.5
    sol = solve_dispatch(case, config=DispatchConfig(foc=focs))
    assert sol.flows["de"] == pytest.approx(-120.0, abs=1e-6)
    assert sol.foc["ab"] == 1.0


def test_missing_per_line_foc():
    with pytest.raises(DispatchError):
        solve_dispatch(pjm5(), config=DispatchConfig(foc={"ab": 0.5}))


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
def test_bad_fixed_foc(bad):
    with pytest.raises(DispatchError):
        DispatchConfig(foc=bad)


def test_bad_mode():
    with pytest.raises(DispatchError):
        DispatchConfig(mode="OPF")


def test_disconnected_rejected():
    reduced, _ = apply_outage(two_bus(), "ab")
    with pytest.raises(DisconnectedCaseError):
        solve_dispatch(reduced)


def test_ptdf_mismatch_rejected():
    case = pjm5()
    other = compute_ptdf(apply_outage(case, "de")[0])
    with pytest.raises(DispatchError):
        build_problem(case, None, DispatchConfig(), other)


def test_risk_profile_must_cover_lines():
    case = pjm5()
    lp_risk = RiskProfile({"ab": LineRisk()})
    with pytest.raises(DispatchError):
        build_problem(case, lp_risk, DispatchConfig(), compute_ptdf(case))


def test_voll_limits_shedding_choice():
    # cheap shedding: VOLL below the only generator's cost
    case = two_bus(demand_b=100.0, cost_a=50.0, cost_b=50.0)
    risk = RiskProfile(default_profile(case).lines, {"b": BusRisk(voll=10.0)})
    sol = solve_dispatch(case, risk, DispatchConfig(allow_shedding=True))
    assert sol.served["b"] == pytest.approx(0.0)
    assert sol.objective == pytest.approx(1000.0)


def test_r_min_forces_service():
    case = two_bus(demand_b=100.0, cost_a=50.0, cost_b=50.0)
    risk = RiskProfile(default_profile(case).lines, {"b": BusRisk(voll=10.0, r_min=0.4)})
    sol = solve_dispatch(case, risk, DispatchConfig(allow_shedding=True))
    assert sol.served["b"] == pytest.approx(0.4)


def test_basis_uniqueness_pjm5():
    case = pjm5()
    for foc in (1.0, 0.75, 0.5):
        assert basis_is_unique(case, None, DispatchConfig(foc=foc))


def test_basis_not_unique_on_cost_tie():
    case = two_bus(cost_a=20.0, cost_b=20.0)
    assert not basis_is_unique(case, None, DispatchConfig())


def test_solution_dict_fields():
    sol = solve_dispatch(pjm5(), config=DispatchConfig(foc=0.5, allow_shedding=True))
    d = solution_to_dict(sol, {"a": 1.0})
    assert set(d) == {"status", "objective", "generation", "injections", "flows", "lmps", "duals", "foc", "shed",
                      "served", "binding"}
    assert d["binding"] == ["de"]
    assert d["shed"] == pytest.approx({"b": 0.0, "c": 0.0, "d": 0.0})


def test_solution_dict_infeasible_same_keys():
    ok = solution_to_dict(solve_dispatch(pjm5(), config=DispatchConfig(foc=0.5)))
    bad = solution_to_dict(solve_dispatch(pjm5(), config=DispatchConfig(foc=0.25)))
    assert set(ok) == set(bad)
    assert bad["status"] == "Infeasible"


def test_slack_choice_does_not_change_dispatch():
    case = pjm5()
    base = solve_dispatch(case, config=DispatchConfig(foc=0.5))
    for slack in "bcde":
        other = solve_dispatch(case, config=DispatchConfig(foc=0.5, slack=slack))
        assert other.objective == pytest.approx(base.objective, abs=1e-7)
        for lid in case.line_ids:
            assert other.flows[lid] == pytest.approx(base.flows[lid], abs=1e-6)


def test_pjm5_solve_is_fast():
    case = pjm5()
    start = time.perf_counter()
    for cfg in (DispatchConfig(foc=0.5), DispatchConfig(foc_mode="optimized", allow_shedding=True)):
        solve_dispatch(case, config=cfg)
    assert time.perf_counter() - start < 1.0
