"""Wildfire-risk-based DC economic dispatch with nodal price decomposition."""

from .dispatch import (
    EDC,
    SCED,
    WRB_EDC,
    DispatchConfig,
    DispatchError,
    DispatchSolution,
    basis_is_unique,
    solution_to_dict,
    solve_dispatch,
)
from .lp import LpProblem, LpSolution, LpStatus, format_lp, solve_lp
from .network import (
    Bus,
    CaseError,
    CaseParseError,
    CaseValidationError,
    DisconnectedCaseError,
    Generator,
    Line,
    NetworkCase,
    apply_outage,
    dump_case,
    load_case,
    read_case,
)
from .pricing import BusPrice, LmpBreakdown, decompose_lmp, verify_lmp_fd
from .ptdf import PtdfMatrix, SingularSystemError, compute_ptdf, line_flows
from .risk import (
    BusRisk,
    LineRisk,
    RiskCategory,
    RiskProfile,
    RiskSegments,
    category_to_foc_bounds,
    default_profile,
    eval_risk,
    max_foc_under_cap,
    read_risk_profile,
    wr_to_foc,
)
from .scenarios import (
    ScenarioReport,
    ScenarioSpec,
    Variant,
    emit_report,
    run_foc_sweep,
    run_load_perturbation,
    run_n_minus_1,
    run_spec,
)

__version__ = "0.1.0"
