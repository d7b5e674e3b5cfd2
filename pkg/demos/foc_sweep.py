"""Five-bus dispatch as every line is derated by the same FOC."""

from wildfire_edc import DispatchConfig, decompose_lmp, emit_report, read_case, run_foc_sweep, solve_dispatch
from wildfire_edc.cli import BUNDLED_FIXTURES

case = read_case(BUNDLED_FIXTURES / "pjm5.json")
print(case.name, "demand", case.total_demand, "MW")

# at FOC 1 the only binding line is de (240 MW, flowing e -> d)
sol = solve_dispatch(case, config=DispatchConfig(foc=1.0))
print(sol.status, round(sol.objective, 2), sol.binding_lines())

# tighter derating pushes cheap energy from e off the network; 0.25 cannot serve the load
report = run_foc_sweep(case, None, [1.0, 0.75, 0.5, 0.25])
print(emit_report(report, "text"))

# allowing shedding turns the infeasible case into a priced one
shed = solve_dispatch(case, config=DispatchConfig(foc=0.25, allow_shedding=True))
print("shed MW at FOC 0.25:", round(shed.shed_mw, 2))
for bus, r in shed.served.items():
    print(f"  bus {bus} served {r:.3f}")
print(decompose_lmp(shed).render())
