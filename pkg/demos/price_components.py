"""Where the nodal prices come from: energy, congestion, wildfire, VOLL."""

from wildfire_edc import DispatchConfig, decompose_lmp, read_case, solve_dispatch, verify_lmp_fd
from wildfire_edc.cli import BUNDLED_FIXTURES

case = read_case(BUNDLED_FIXTURES / "pjm5.json")

fixed = solve_dispatch(case, config=DispatchConfig(foc=0.5))
prices = decompose_lmp(fixed)
print(prices.render())
# sundance sits between its limits, so bus d prices at its 40 $/MWh offer
print("sundance MW:", round(fixed.generation["sundance"], 4), "lmp d:", round(prices["d"].lmp, 6))

# the dual-based price against re-solving with 1 kW more load
for bus in case.bus_ids:
    chk = verify_lmp_fd(case, None, DispatchConfig(foc=0.5), bus, eps=1e-3)
    print(f"  {bus}: lmp {chk.lmp:9.4f}  fd {chk.fd:9.4f}  same basis {chk.basis_unchanged}")

# let the LP choose FOC under the default risk cap: 3*FOC - 1 <= 1 stops it at 2/3,
# and the congestion that cap causes shows up as the wildfire component
opt = solve_dispatch(case, config=DispatchConfig(foc_mode="optimized"))
print({k: round(v, 4) for k, v in opt.foc.items()})
print(decompose_lmp(opt).render())
