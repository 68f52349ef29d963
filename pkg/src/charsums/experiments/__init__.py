"""Config-driven experiment scenarios and their reports."""

from .config import DEFAULT_CONFIG, SCENARIOS, ConfigError, HRule, ScenarioConfig, load_config
from .report import MomentReport, MomentRow, emit, report_document
from .scenarios import (
    run_bias_search,
    run_polya_check,
    run_rmf_oracle,
    run_scenario,
    run_theorem1,
    run_theorem2,
    run_theorem3,
    run_theorem4,
    theorem4_bridge,
)

__all__ = [
    "DEFAULT_CONFIG",
    "SCENARIOS",
    "ConfigError",
    "HRule",
    "MomentReport",
    "MomentRow",
    "ScenarioConfig",
    "emit",
    "load_config",
    "report_document",
    "run_bias_search",
    "run_polya_check",
    "run_rmf_oracle",
    "run_scenario",
    "run_theorem1",
    "run_theorem2",
    "run_theorem3",
    "run_theorem4",
    "theorem4_bridge",
]
