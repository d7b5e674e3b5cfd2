"""Property tests over generated networks."""

import numpy as np
from hypothesis import given, settings, strategies as st

from helpers import random_case
from wildfire_edc.dispatch import DispatchConfig, solve_dispatch
from wildfire_edc.network import apply_outage
from wildfire_edc.pricing import decompose_lmp
from wildfire_edc.ptdf import compute_ptdf, line_flows
from wildfire_edc.scenarios import run_foc_sweep, run_n_minus_1

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_ptdf_slack_invariance_random(seed):
    rng = np.random.default_rng(seed)
    case = random_case(rng)
    y = rng.normal(size=len(case.buses)) * 50
    y -= y.mean()
    ref = line_flows(compute_ptdf(case), y)
    for slack in case.bus_ids[1:]:
        assert np.max(np.abs(line_flows(compute_ptdf(case, slack), y) - ref)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_ptdf_entries_bounded_random(seed):
    case = random_case(np.random.default_rng(seed))
    for slack in case.bus_ids:
        assert np.all(np.abs(compute_ptdf(case, slack).values) <= 1 + 1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.05, 1.0))
def test_shedding_always_feasible(seed, foc):
    case = random_case(np.random.default_rng(seed))
    sol = solve_dispatch(case, None, DispatchConfig(foc=foc, allow_shedding=True))
    assert sol.optimal
    for lid, (lo, hi) in sol.limits.items():
        assert lo - 1e-6 <= sol.flows[lid] <= hi + 1e-6


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.05, 1.0))
def test_lmp_slack_invariance_random(seed, foc):
    case = random_case(np.random.default_rng(seed))
    cfg = DispatchConfig(foc=foc, allow_shedding=True)
    base = solve_dispatch(case, None, cfg)
    other = solve_dispatch(case, None, DispatchConfig(foc=foc, allow_shedding=True, slack=case.bus_ids[-1]))
    assert abs(base.objective - other.objective) <= 1e-6 * (1 + abs(base.objective))
    prices = decompose_lmp(base)
    for rec in prices.records:
        assert abs(rec.component_sum() - rec.lmp) <= 1e-6


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_harness_rows_satisfy_dispatch_invariants(seed):
    case = random_case(np.random.default_rng(seed))
    report = run_foc_sweep(case, None, [1.0, 0.6, 0.3], DispatchConfig(allow_shedding=True))
    for rec in report.records:
        assert rec.optimal
        assert abs(sum(rec.generation.values()) - rec.served_mw) <= 1e-6
    for rec, lid in zip(run_n_minus_1(case, None, 0.5).records, case.line_ids):
        assert lid not in rec.flows
        if rec.status == "Disconnected":
            assert not apply_outage(case, lid)[1]
