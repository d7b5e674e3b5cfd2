import numpy as np
import pytest

from helpers import pjm5, triangle, two_bus
from wildfire_edc.network import apply_outage
from wildfire_edc.ptdf import SingularSystemError, build_susceptance, compute_ptdf, gauss_solve, line_flows


def test_gauss_solve_matches_numpy():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6)) + 6 * np.eye(6)
    b = rng.normal(size=(6, 2))
    assert np.allclose(gauss_solve(a, b), np.linalg.solve(a, b), atol=1e-12)


def test_gauss_solve_needs_pivoting():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(gauss_solve(a, np.array([2.0, 3.0])), [3.0, 2.0])


def test_gauss_solve_singular():
    with pytest.raises(SingularSystemError):
        gauss_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 2.0]))


def test_susceptance_two_bus():
    nodal, branch = build_susceptance(two_bus())
    assert np.allclose(nodal, [[10, -10], [-10, 10]])
    assert np.allclose(branch, [[10, -10]])


def test_susceptance_triangle():
    nodal, _ = build_susceptance(triangle())
    assert np.allclose(np.diag(nodal), 2.0)
    assert np.allclose(nodal[~np.eye(3, dtype=bool)], -1.0)


def test_susceptance_pjm5_rows_sum_to_zero():
    nodal, branch = build_susceptance(pjm5())
    assert nodal.shape == (5, 5)
    assert np.allclose(nodal.sum(axis=1), 0.0, atol=1e-9)
    assert np.allclose(nodal, nodal.T)
    assert branch.shape == (6, 5)


def test_ptdf_two_bus_exact():
    p = compute_ptdf(two_bus(), "a")
    assert p.values.tolist() == [[0.0, -1.0]]


def test_ptdf_triangle_thirds():
    p = compute_ptdf(triangle(), "1")
    col = p.values[:, 1]
    assert np.allclose(col, [-2 / 3, -1 / 3, 1 / 3], atol=1e-12)


def test_ptdf_slack_column_zero_and_readonly():
    p = compute_ptdf(pjm5(), "c")
    assert np.all(p.values[:, 2] == 0.0)
    with pytest.raises(ValueError):
        p.values[0, 0] = 1.0


def test_ptdf_default_slack_first_bus():
    assert compute_ptdf(pjm5()).slack_bus == "a"


def test_ptdf_bounded():
    for slack in "abcde":
        assert np.all(np.abs(compute_ptdf(pjm5(), slack).values) <= 1 + 1e-9)


def test_ptdf_disconnected_raises():
    reduced, _ = apply_outage(two_bus(), "ab")
    with pytest.raises(SingularSystemError):
        compute_ptdf(reduced)


def test_ptdf_after_outage_drops_line():
    reduced, _ = apply_outage(pjm5(), "de")
    p = compute_ptdf(reduced)
    assert "de" not in p.line_ids and p.shape == (5, 5)


def test_line_flows_zero():
    p = compute_ptdf(pjm5())
    assert np.all(line_flows(p, np.zeros(5)) == 0.0)


def test_line_flows_two_bus():
    p = compute_ptdf(two_bus(), "a")
    assert line_flows(p, {"a": -100.0, "b": 100.0}).tolist() == [-100.0]


def test_line_flows_rejects_unbalanced():
    with pytest.raises(ValueError):
        line_flows(compute_ptdf(pjm5()), [1, 0, 0, 0, 0])


def test_line_flows_rejects_wrong_length():
    with pytest.raises(ValueError):
        line_flows(compute_ptdf(pjm5()), [1, -1])


def test_slack_invariance_and_superposition():
    rng = np.random.default_rng(7)
    case = pjm5()
    mats = [compute_ptdf(case, s) for s in case.bus_ids]
    for _ in range(20):
        y1 = rng.normal(size=5) * 100
        y1 -= y1.mean()
        y2 = rng.normal(size=5) * 100
        y2 -= y2.mean()
        ref = line_flows(mats[0], y1)
        for m in mats[1:]:
            assert np.max(np.abs(line_flows(m, y1) - ref)) <= 1e-9
        assert np.allclose(line_flows(mats[0], y1 + y2), ref + line_flows(mats[0], y2), atol=1e-9)


def test_csv_dump():
    text = compute_ptdf(two_bus(), "a").to_csv()
    assert text.splitlines() == ["line,a,b", "ab,0,-1"]
