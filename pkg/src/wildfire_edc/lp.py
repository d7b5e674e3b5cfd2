"""Small dense linear programs and a deterministic bounded-variable simplex.

Problems are stated as::

    minimize    c @ x + offset
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                lower <= x <= upper

Dual conventions (all reported per constraint name):

* ``duals_eq[k]``   = d(objective) / d(b_eq[k])          (free sign)
* ``duals_ineq[k]`` = -d(objective) / d(b_ub[k])  >= 0   (relaxing a <= row never hurts)
* ``reduced_costs[j]`` = c_j - A_eq[:, j] @ duals_eq + A_ub[:, j] @ duals_ineq;
  nonnegative at a lower bound, nonpositive at an upper bound.

Duals are basis dependent when the optimum is degenerate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-10
_TIE_TOL = 1e-12


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"

    def __str__(self) -> str:
        return self.value


class LpNumericalError(ArithmeticError):
    """Singular basis or iteration limit; distinct from a proven infeasibility."""


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf


@dataclass(frozen=True)
class Constraint:
    name: str
    coefficients: dict[str, float]
    rhs: float


@dataclass
class LpProblem:
    variables: list[Variable] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    eq_constraints: list[Constraint] = field(default_factory=list)
    ineq_constraints: list[Constraint] = field(default_factory=list)
    offset: float = 0.0

    def add_variable(self, name: str, lower: float = 0.0, upper: float = math.inf, cost: float = 0.0) -> str:
        if lower > upper:
            raise ValueError(f"variable {name}: lower bound {lower} > upper bound {upper}")
        self.variables.append(Variable(name, lower, upper))
        if cost:
            self.objective[name] = self.objective.get(name, 0.0) + cost
        return name

    def add_eq(self, name: str, coefficients: dict[str, float], rhs: float) -> None:
        self.eq_constraints.append(Constraint(name, dict(coefficients), float(rhs)))

    def add_le(self, name: str, coefficients: dict[str, float], rhs: float) -> None:
        self.ineq_constraints.append(Constraint(name, dict(coefficients), float(rhs)))

    def add_ge(self, name: str, coefficients: dict[str, float], rhs: float) -> None:
        self.add_le(name, {k: -v for k, v in coefficients.items()}, -rhs)

    @property
    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def check(self) -> None:
        names = self.variable_names
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        known = set(names)
        for v in self.variables:
            if v.lower > v.upper:
                raise ValueError(f"variable {v.name}: lower bound exceeds upper bound")
        for k in self.objective:
            if k not in known:
                raise ValueError(f"objective references undeclared variable {k!r}")
        for con in [*self.eq_constraints, *self.ineq_constraints]:
            for k in con.coefficients:
                if k not in known:
                    raise ValueError(f"constraint {con.name} references undeclared variable {k!r}")

    def to_matrices(self):
        """Dense form ``(c, A_eq, b_eq, A_ub, b_ub, lower, upper)`` in declaration order."""
        index = {name: j for j, name in enumerate(self.variable_names)}
        n = len(index)
        c = np.zeros(n)
        for k, v in self.objective.items():
            c[index[k]] = v

        def dense(rows):
            a = np.zeros((len(rows), n))
            b = np.zeros(len(rows))
            for r, con in enumerate(rows):
                for k, v in con.coefficients.items():
                    a[r, index[k]] += v
                b[r] = con.rhs
            return a, b

        a_eq, b_eq = dense(self.eq_constraints)
        a_ub, b_ub = dense(self.ineq_constraints)
        lower = np.array([v.lower for v in self.variables], dtype=float)
        upper = np.array([v.upper for v in self.variables], dtype=float)
        return c, a_eq, b_eq, a_ub, b_ub, lower, upper


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    primal: dict[str, float] = field(default_factory=dict)
    duals_eq: dict[str, float] = field(default_factory=dict)
    duals_ineq: dict[str, float] = field(default_factory=dict)
    reduced_costs: dict[str, float] = field(default_factory=dict)
    objective_value: float | None = None
    dual_objective: float | None = None
    slacks: dict[str, float] = field(default_factory=dict)
    basis: tuple[tuple[str, str], ...] = ()
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Simplex:
    """Revised bounded-variable simplex on ``A x = b, 0 <= x <= u``.

    Nonbasic columns sit at 0 or at their (finite) upper bound. Entering
    column: lowest index with an improving reduced cost (Bland). Leaving row:
    minimum ratio, ties to the lowest column index.
    """

    def __init__(self, a: np.ndarray, b: np.ndarray, upper: np.ndarray, basis: list[int], max_iter: int):
        self.a = a
        self.b = b
        self.upper = upper
        self.basis = basis
        self.at_upper = np.zeros(a.shape[1], dtype=bool)
        self.max_iter = max_iter
        self.iterations = 0

    def _basis_matrix(self) -> np.ndarray:
        return self.a[:, self.basis]

    def values(self) -> np.ndarray:
        x = np.where(self.at_upper, self.upper, 0.0)
        x[self.basis] = 0.0
        rhs = self.b - self.a @ x
        try:
            x[self.basis] = np.linalg.solve(self._basis_matrix(), rhs)
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError("singular basis") from exc
        return x

    def prices(self, cost: np.ndarray) -> np.ndarray:
        try:
            return np.linalg.solve(self._basis_matrix().T, cost[self.basis])
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError("singular basis") from exc

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> LpStatus:
        m = len(self.basis)
        while True:
            if self.iterations >= self.max_iter:
                raise LpNumericalError(f"iteration limit {self.max_iter} reached")
            x = self.values()
            y = self.prices(cost)
            d = cost - self.a.T @ y
            nonbasic = np.ones(len(cost), dtype=bool)
            nonbasic[self.basis] = False
            improving = nonbasic & allowed & (
                ((~self.at_upper) & (d < -OPT_TOL) & (self.upper > 0)) | (self.at_upper & (d > OPT_TOL))
            )
            candidates = np.flatnonzero(improving)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            j = int(candidates[0])
            sigma = -1.0 if self.at_upper[j] else 1.0
            try:
                w = np.linalg.solve(self._basis_matrix(), self.a[:, j])
            except np.linalg.LinAlgError as exc:
                raise LpNumericalError("singular basis") from exc

            step = self.upper[j]
            leave = -1
            leave_to_upper = False
            for i in range(m):
                alpha = sigma * w[i]
                col = self.basis[i]
                if alpha > PIVOT_TOL:
                    t = max(x[col], 0.0) / alpha
                    to_upper = False
                elif alpha < -PIVOT_TOL and math.isfinite(self.upper[col]):
                    t = max(self.upper[col] - x[col], 0.0) / -alpha
                    to_upper = True
                else:
                    continue
                if t < step - _TIE_TOL or (
                    abs(t - step) <= _TIE_TOL and leave >= 0 and col < self.basis[leave]
                ):
                    step, leave, leave_to_upper = t, i, to_upper
            if math.isinf(step):
                return LpStatus.UNBOUNDED
            self.iterations += 1
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            out = self.basis[leave]
            self.at_upper[out] = leave_to_upper
            self.basis[leave] = j
            self.at_upper[j] = False


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Two-phase bounded simplex. Deterministic for a fixed problem."""
    problem.check()
    c, a_eq, b_eq, a_ub, b_ub, lower, upper = problem.to_matrices()
    n = len(c)
    m_eq, m_ub = len(b_eq), len(b_ub)

    # x = shift + T @ z with every z column in [0, u_z]
    cols: list[tuple[int, float]] = []
    shift = np.zeros(n)
    z_upper: list[float] = []
    for j in range(n):
        lo, hi = lower[j], upper[j]
        if math.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            z_upper.append(hi - lo)
        elif math.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
            z_upper.append(math.inf)
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
            z_upper.extend([math.inf, math.inf])
    nz = len(cols)
    transform = np.zeros((n, nz))
    for k, (j, s) in enumerate(cols):
        transform[j, k] = s

    a_orig = np.vstack([a_eq, a_ub]) if m_eq + m_ub else np.zeros((0, n))
    b_orig = np.concatenate([b_eq, b_ub])
    m = m_eq + m_ub
    a = np.hstack([a_orig @ transform, np.vstack([np.zeros((m_eq, m_ub)), np.eye(m_ub)])])
    b = b_orig - a_orig @ shift
    sign = np.where(b < 0, -1.0, 1.0)
    a *= sign[:, None]
    b *= sign
    n_struct = nz + m_ub
    a = np.hstack([a, np.eye(m)])
    ncol = n_struct + m
    col_upper = np.array([*z_upper, *([math.inf] * m_ub), *([math.inf] * m)])

    if max_iter is None:
        max_iter = 50 * (m + ncol) + 1000
    sx = _Simplex(a, b, col_upper, list(range(n_struct, ncol)), max_iter)

    phase1_cost = np.concatenate([np.zeros(n_struct), np.ones(m)])
    sx.run(phase1_cost, np.ones(ncol, dtype=bool))
    infeasibility = float(sx.values()[n_struct:].sum())
    if infeasibility > FEAS_TOL * (1.0 + float(np.abs(b).max(initial=0.0))):
        return LpSolution(LpStatus.INFEASIBLE, iterations=sx.iterations)

    sx.upper[n_struct:] = 0.0
    cost = np.concatenate([transform.T @ c, np.zeros(m_ub + m)])
    allowed = np.concatenate([np.ones(n_struct, dtype=bool), np.zeros(m, dtype=bool)])
    status = sx.run(cost, allowed)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, iterations=sx.iterations)

    z = np.clip(sx.values(), 0.0, sx.upper)
    x = shift + transform @ z[:nz]
    y = sx.prices(cost) * sign
    lam = y[:m_eq] + 0.0
    mu = -y[m_eq:] + 0.0
    reduced = c - a_eq.T @ lam + a_ub.T @ mu + 0.0
    objective = float(c @ x) + problem.offset

    dual_obj = float(b_eq @ lam - b_ub @ mu) + problem.offset
    for j in range(n):
        dj = reduced[j]
        if dj > OPT_TOL and math.isfinite(lower[j]):
            dual_obj += dj * lower[j]
        elif dj < -OPT_TOL and math.isfinite(upper[j]):
            dual_obj += dj * upper[j]

    names = problem.variable_names
    eq_names = [con.name for con in problem.eq_constraints]
    ub_names = [con.name for con in problem.ineq_constraints]
    basic = set(sx.basis)
    col_names = [f"{names[j]}{'' if s > 0 else '-'}" for j, s in cols] + [f"slack:{k}" for k in ub_names]
    basis = tuple(
        (col_names[k], "basic" if k in basic else ("upper" if sx.at_upper[k] else "lower")) for k in range(n_struct)
    )
    return LpSolution(
        status=LpStatus.OPTIMAL,
        primal=dict(zip(names, map(float, x))),
        duals_eq=dict(zip(eq_names, map(float, lam))),
        duals_ineq=dict(zip(ub_names, map(float, mu))),
        reduced_costs=dict(zip(names, map(float, reduced))),
        objective_value=objective,
        dual_objective=dual_obj,
        slacks=dict(zip(ub_names, map(float, b_ub - a_ub @ x))),
        basis=basis,
        iterations=sx.iterations,
    )


def format_lp(problem: LpProblem) -> str:
    """Fixed-width listing of variables, bounds and constraints, for debugging."""

    def terms(coefs: dict[str, float]) -> str:
        parts = []
        for k, v in coefs.items():
            if v == 0:
                continue
            parts.append(f"{'-' if v < 0 else '+'} {abs(v):.6g} {k}")
        text = " ".join(parts) or "0"
        return text[2:] if text.startswith("+ ") else text

    width = max([len(v.name) for v in problem.variables] + [8])
    lines = ["minimize", f"  {terms(problem.objective)}" + (f" + {problem.offset:.6g}" if problem.offset else "")]
    lines.append("variables")
    for v in problem.variables:
        lines.append(f"  {v.name:<{width}}  [{v.lower:>12.6g}, {v.upper:>12.6g}]")
    cwidth = max([len(con.name) for con in [*problem.eq_constraints, *problem.ineq_constraints]] + [8])
    lines.append("equalities")
    for con in problem.eq_constraints:
        lines.append(f"  {con.name:<{cwidth}}  {terms(con.coefficients)} = {con.rhs:.6g}")
    lines.append("inequalities")
    for con in problem.ineq_constraints:
        lines.append(f"  {con.name:<{cwidth}}  {terms(con.coefficients)} <= {con.rhs:.6g}")
    return "\n".join(lines) + "\n"
