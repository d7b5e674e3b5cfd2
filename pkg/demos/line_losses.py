"""Losing one line at a time, and derating de by hand, at FOC 0.5."""

from wildfire_edc import emit_report, read_case, run_n_minus_1, run_spec
from wildfire_edc.cli import BUNDLED_FIXTURES
from wildfire_edc.scenarios import load_scenario_spec

case = read_case(BUNDLED_FIXTURES / "pjm5.json")

# shedding is on by default here; some outages leave load that cannot be reached
n1 = run_n_minus_1(case, None, 0.5)
print(emit_report(n1, "text"))
for rec in n1.records:
    print(f"{rec.label:12s} served {rec.served_mw:8.2f} MW")

# the derate spec lowers de's nominal limit; FOC 0.5 still applies on top of it
spec = load_scenario_spec(BUNDLED_FIXTURES / "pjm5-derate.json")
print(emit_report(run_spec(case, None, spec), "text"))
