"""DC susceptance matrices and power transfer distribution factors."""

from __future__ import annotations

import io
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .network import NetworkCase, is_connected

PIVOT_TOL = 1e-10
BALANCE_TOL = 1e-6


class SingularSystemError(ArithmeticError):
    pass


def gauss_solve(a: np.ndarray, b: np.ndarray, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Solve ``a @ x = b`` by Gaussian elimination with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides. Raises
    SingularSystemError when a pivot falls below ``pivot_tol``.
    """
    a = np.array(a, dtype=float)
    x = np.array(b, dtype=float)
    vector = x.ndim == 1
    if vector:
        x = x[:, None]
    n = a.shape[0]
    if a.shape != (n, n) or x.shape[0] != n:
        raise ValueError(f"shape mismatch: {a.shape} vs {x.shape}")
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < pivot_tol:
            raise SingularSystemError(f"pivot {a[p, k]:.3e} below threshold in column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
        x[k + 1 :] -= np.outer(factors, x[k])
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x[:, 0] if vector else x


def build_susceptance(case: NetworkCase) -> tuple[np.ndarray, np.ndarray]:
    """Return the nodal (N x N) and branch (L x N) susceptance matrices."""
    n = len(case.buses)
    nodal = np.zeros((n, n))
    branch = np.zeros((len(case.lines), n))
    for k, ln in enumerate(case.lines):
        i, j = case.bus_index(ln.from_bus), case.bus_index(ln.to_bus)
        b = 1.0 / ln.reactance
        branch[k, i] = b
        branch[k, j] = -b
        nodal[i, i] += b
        nodal[j, j] += b
        nodal[i, j] -= b
        nodal[j, i] -= b
    return nodal, branch


@dataclass(frozen=True)
class PtdfMatrix:
    """Line-by-bus sensitivities of MW flow to a 1 MW injection withdrawn at the slack."""

    values: np.ndarray
    slack_bus: str
    line_ids: tuple[str, ...]
    bus_ids: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "line_ids", tuple(self.line_ids))
        object.__setattr__(self, "bus_ids", tuple(self.bus_ids))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def entry(self, line_id: str, bus_id: str) -> float:
        return float(self.values[self.line_ids.index(line_id), self.bus_ids.index(bus_id)])

    def row(self, line_id: str) -> np.ndarray:
        return self.values[self.line_ids.index(line_id)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(["line", *self.bus_ids]) + "\n")
        for lid, row in zip(self.line_ids, self.values):
            buf.write(",".join([lid, *(f"{v:.9g}" for v in row)]) + "\n")
        return buf.getvalue()


def compute_ptdf(case: NetworkCase, slack: str | None = None) -> PtdfMatrix:
    """Build the PTDF matrix by solving the reduced nodal system once per line."""
    slack = case.buses[0].id if slack is None else slack
    if slack not in case.bus_ids:
        raise KeyError(f"unknown slack bus {slack!r}")
    if not is_connected(case):
        raise SingularSystemError(f"case {case.name!r} is disconnected; reduced susceptance is singular")
    nodal, branch = build_susceptance(case)
    s = case.bus_index(slack)
    keep = [k for k in range(len(case.buses)) if k != s]
    values = np.zeros_like(branch)
    if keep and len(case.lines):
        reduced = nodal[np.ix_(keep, keep)]
        # PTDF_red = Bf_red @ inv(B_red); B_red is symmetric, so solve B_red @ Z = Bf_red.T
        values[:, keep] = gauss_solve(reduced, branch[:, keep].T).T
    return PtdfMatrix(values, slack, case.line_ids, case.bus_ids)


def line_flows(ptdf: PtdfMatrix, injections: Sequence[float] | Mapping[str, float] | np.ndarray) -> np.ndarray:
    """MW flow on every line (file order, from->to positive) for a balanced injection vector."""
    if isinstance(injections, Mapping):
        unknown = set(injections) - set(ptdf.bus_ids)
        if unknown:
            raise ValueError(f"injections reference unknown buses {sorted(unknown)}")
        vec = np.array([float(injections.get(b, 0.0)) for b in ptdf.bus_ids])
    else:
        vec = np.asarray(injections, dtype=float)
    if vec.shape != (len(ptdf.bus_ids),):
        raise ValueError(f"expected {len(ptdf.bus_ids)} injections, got shape {vec.shape}")
    if abs(vec.sum()) > BALANCE_TOL:
        raise ValueError(f"injections are unbalanced (sum = {vec.sum():.3e})")
    return ptdf.values @ vec
