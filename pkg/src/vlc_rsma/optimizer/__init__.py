from .brute_force import brute_force_wsr
from .config import OptimizerConfig, SubproblemConfig
from .qp import project_rows_l1, solve_qp
from .wmmse import (
    AOState,
    Problem,
    Solution,
    ao_step,
    init_state,
    mmse_terms,
    optimize_wsr,
    run_ao,
    solve_precoder_subproblem,
    surrogate_value,
)

__all__ = [
    "AOState",
    "OptimizerConfig",
    "Problem",
    "Solution",
    "SubproblemConfig",
    "ao_step",
    "brute_force_wsr",
    "init_state",
    "mmse_terms",
    "optimize_wsr",
    "project_rows_l1",
    "run_ao",
    "solve_precoder_subproblem",
    "solve_qp",
    "surrogate_value",
]
