"""Multi-cell downlink scheduling simulator with long-term lookback rules."""

from .config import PRESETS, ScenarioConfig, load_config
from .engine import RunLog, Simulation, run
from .metrics import RunReport
from .schedulers import Rule, SchedulerParams

__version__ = "0.1.0"

__all__ = [
    "PRESETS", "RunLog", "RunReport", "Rule", "ScenarioConfig", "SchedulerParams",
    "Simulation", "load_config", "run", "__version__",
]
