"""Joint trajectory, port and semantic-compression optimization for a UAV
serving fluid-antenna users under max-min fairness."""

from .association import min_equivalent_rate, round_association, solve_association, solve_relaxed
from .config import ScenarioConfig, generate_users, load_config, parse_config, to_document
from .geometry import (REFERENCE_GAIN, ArrayGeometry, PortLayout, UserSite, build_channel,
                       port_rows, worst_case_channel)
from .rate import (RateSolution, achievable_rate, dinkelbach_segment, optimize_covariance_ratio,
                   optimize_user_rate, select_ports, waterfill)
from .scenario import RunResult, Scenario, run_joint_optimization
from .semantic import DEFAULT_LOAD_MODEL, PiecewiseLoadModel, Segment

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "DEFAULT_LOAD_MODEL", "PiecewiseLoadModel", "PortLayout", "REFERENCE_GAIN",
    "RateSolution", "RunResult", "Scenario", "ScenarioConfig", "Segment", "UserSite",
    "achievable_rate", "build_channel", "dinkelbach_segment", "generate_users", "load_config",
    "min_equivalent_rate", "optimize_covariance_ratio", "optimize_user_rate", "parse_config",
    "port_rows", "round_association", "run_joint_optimization", "select_ports",
    "solve_association", "solve_relaxed", "to_document", "waterfill", "worst_case_channel",
]
