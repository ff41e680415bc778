"""Belinski-Zakharov 1+1 quasilinear wave laboratory."""

__version__ = "0.1.0"

from .alpha import AlphaData, alpha_eval, beta_eval, check_cosmological, validate_alpha_data  # noqa: E402,F401
from .errors import BZError  # noqa: E402,F401
from .evolution import EvolutionConfig, run_simulation  # noqa: E402,F401
from .fields import FieldState, Grid1D, MetricBlock, fields_from_metric, metric_from_fields  # noqa: E402,F401
from .scenarios import Scenario, load_scenario  # noqa: E402,F401
