"""Vegetation risk categories, WR scores and piecewise risk caps."""

from wildfire_edc import (
    DispatchConfig,
    RiskCategory,
    RiskSegments,
    category_to_foc_bounds,
    eval_risk,
    max_foc_under_cap,
    read_case,
    read_risk_profile,
    solve_dispatch,
)
from wildfire_edc.cli import BUNDLED_FIXTURES

for cat in RiskCategory:
    print(f"{cat.code:5s} {cat.color:12s} FOC range {category_to_foc_bounds(cat)}")

seg = RiskSegments([(1.0, 0.0), (3.0, -1.0)], cap=1.0)
for f in (0.25, 0.5, 0.75, 1.0):
    print(f"risk({f}) = {eval_risk(seg, f):.2f}")
print("largest FOC under the cap:", max_foc_under_cap(seg))

case = read_case(BUNDLED_FIXTURES / "pjm5.json")
profile = read_risk_profile(BUNDLED_FIXTURES / "pjm5_categories.json", case)

# a line's WR is the worse of its two ends; WR maps to FOC one to one
print("FOC from WR:", profile.focs_from_wr(case))
sol = solve_dispatch(case, profile, DispatchConfig(foc=profile.focs_from_wr(case)))
print("fixed from WR:", sol.status, round(sol.objective, 2))

# optimized: each line's FOC limited by its category range and the cap
sol = solve_dispatch(case, profile, DispatchConfig(foc_mode="optimized", allow_shedding=True))
print("optimized:", sol.status, round(sol.objective, 2), {k: round(v, 3) for k, v in sol.foc.items()})
