"""Small hand-built cases and a random case generator shared by the test modules."""

from __future__ import annotations

import numpy as np

from wildfire_edc.network import Bus, Generator, Line, NetworkCase, read_case
from wildfire_edc.cli import BUNDLED_FIXTURES

PJM5_PATH = BUNDLED_FIXTURES / "pjm5.json"


def pjm5() -> NetworkCase:
    return read_case(PJM5_PATH)


def two_bus(limit=10_000.0, demand_b=100.0, at_risk=True, cost_a=10.0, cost_b=30.0, cap_a=200.0, cap_b=200.0):
    return NetworkCase(
        buses=(Bus("a", 0.0), Bus("b", demand_b)),
        lines=(Line("ab", "a", "b", 0.1, limit, at_risk=at_risk),),
        generators=(Generator("ga", "a", cost_a, 0.0, cap_a), Generator("gb", "b", cost_b, 0.0, cap_b)),
        name="two-bus",
    )


def triangle(limit=10_000.0, demands=(0.0, 0.0, 0.0), gens=(), at_risk=True):
    buses = tuple(Bus(str(k + 1), d) for k, d in enumerate(demands))
    lines = (
        Line("12", "1", "2", 1.0, limit, at_risk=at_risk),
        Line("13", "1", "3", 1.0, limit, at_risk=at_risk),
        Line("23", "2", "3", 1.0, limit, at_risk=at_risk),
    )
    return NetworkCase(buses, lines, tuple(gens), name="triangle")


def one_bus(demand=50.0, cost=10.0, cap=100.0):
    return NetworkCase((Bus("a", demand),), (), (Generator("g", "a", cost, 0.0, cap),), name="one-bus")


def random_case(rng: np.random.Generator, max_buses: int = 6) -> NetworkCase:
    """Connected case: random spanning tree plus a few chords, every line at risk.

    Generators start at zero output and total capacity exceeds total demand,
    so with shedding allowed every FOC > 0 has a feasible dispatch.
    """
    n = int(rng.integers(2, max_buses + 1))
    ids = [f"n{k}" for k in range(n)]
    buses = tuple(Bus(b, float(rng.choice([0.0, rng.uniform(10, 150)]))) for b in ids)
    edges = set()
    for k in range(1, n):
        edges.add((int(rng.integers(0, k)), k))
    for _ in range(int(rng.integers(0, n))):
        i, j = sorted(int(v) for v in rng.choice(n, size=2, replace=False))
        edges.add((i, j))
    lines = tuple(
        Line(f"l{i}_{j}", ids[i], ids[j], float(rng.uniform(0.01, 0.2)), float(rng.uniform(20, 200)), at_risk=True)
        for i, j in sorted(edges)
    )
    total = sum(b.demand for b in buses)
    gens = []
    for k in range(int(rng.integers(1, n + 1))):
        gens.append(
            Generator(f"g{k}", ids[int(rng.integers(0, n))], float(rng.integers(5, 60)), 0.0, float(rng.uniform(50, 300)))
        )
    short = total + 10.0 - sum(g.p_max for g in gens)
    if short > 0:
        g = gens[0]
        gens[0] = Generator(g.id, g.bus, g.cost, 0.0, g.p_max + short)
    return NetworkCase(buses, lines, tuple(gens), name="random")
