"""Energy modelling and simulation for 802.11ah power-saving WLANs."""

__version__ = "0.1.0"

from .scenarios import (            # noqa: F401
    MacConstants, McsEntry, PhyProfile, PowerProfile, Scenario,
    builtin_scenario, builtin_scenarios, load_scenario, save_scenario,
)
from .linkbudget import place_stations, select_mcs, path_loss, link_margin  # noqa: F401
from .mactiming import MacTiming, derive_timing  # noqa: F401
from .energymodel import EnergyReport, StateTimes, evaluate  # noqa: F401
from .simulator import SimReport, ComparisonReport, run, compare  # noqa: F401
from .optimizer import (            # noqa: F401
    SweepResult, sweep_ntim, sweep_t, t_grid, compare_default_vs_optimized,
)
from .exceptions import (           # noqa: F401
    AhPowerError, InfeasibleConfigError, ScenarioParseError,
    UnreachableStationError, ValidationError,
)
