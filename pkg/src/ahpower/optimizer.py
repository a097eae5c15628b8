"""Parameter sweeps: group-count tuning and DTIM-period stretching.

Two one-dimensional searches, run on the closed-form model by default:

* TIM group count: fewer groups mean more contenders per slot, more
  groups mean longer beacons; the mean current has an interior minimum.
* DTIM period: longer periods amortise the beacon overhead but raise the
  per-period traffic load, and with it collisions and boundary losses;
  the delivery probability eventually decays.  The search keeps the
  largest period whose delivery ratio still clears a threshold.

Delivery here is the error-floor-normalised per-generated-packet success
(see :func:`ahpower.energymodel.evaluate`), so a clean low-load
configuration scores 1.0 regardless of the configured DATA error rate.
The sweeps can optionally score points with the simulator instead of the
model to check that the model-driven choice survives buffering effects.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import simulator
from .energymodel import EnergyReport, evaluate
from .exceptions import InfeasibleConfigError
from .linkbudget import place_stations
from .scenarios import Scenario

DEFAULT_NTIM_CANDIDATES = (1, 2, 4, 8, 16, 32)
DEFAULT_T_GRID = (0.2, 60.0, 0.1)   # start, stop, step in seconds
DEFAULT_SUCCESS_THRESHOLD = 0.999


@dataclass(frozen=True)
class SweepPoint:
    value: float
    mean_current_ma: float
    success_dl: float
    success_ul: float
    delivery_dl: float
    delivery_ul: float
    battery_lifetime_h: float

    @property
    def min_delivery(self) -> float:
        return min(self.delivery_dl, self.delivery_ul)


@dataclass(frozen=True)
class SweepResult:
    axis: str                       # "n_tim" | "dtim_period"
    scenario_name: str
    points: tuple[SweepPoint, ...]
    chosen: float
    constraint_threshold: float | None

    def point_at(self, value: float) -> SweepPoint:
        for p in self.points:
            if p.value == value:
                return p
        raise KeyError(value)

    @property
    def chosen_point(self) -> SweepPoint:
        return self.point_at(self.chosen)


@dataclass(frozen=True)
class OptimizationComparison:
    scenario_name: str
    default_report: EnergyReport
    optimized_report: EnergyReport
    default_n_tim: int
    default_dtim_period: float
    optimized_n_tim: int
    optimized_dtim_period: float
    current_ratio: float            # optimized / default
    lifetime_ratio: float           # optimized / default


def _point(value: float, report: EnergyReport) -> SweepPoint:
    return SweepPoint(value, report.mean_current_ma,
                      report.success_dl, report.success_ul,
                      report.delivery_dl, report.delivery_ul,
                      report.battery_lifetime_h)


def t_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive value grid with step-multiple rounding."""
    n = int(round((stop - start) / step))
    return [round(start + k * step, 10) for k in range(n + 1)]


def sweep_ntim(scenario: Scenario,
               candidates=DEFAULT_NTIM_CANDIDATES) -> SweepResult:
    """Pick the group count minimising mean current at the scenario's T.

    Infeasible candidates (RAW collapses) are skipped; ties go to the
    smaller group count.
    """
    if not candidates:
        raise ValueError("sweep_ntim: empty candidate list")
    placements = place_stations(scenario)
    points = []
    for n_tim in sorted(candidates):
        try:
            report = evaluate(scenario.with_overrides(n_tim=int(n_tim)),
                              placements=placements)
        except InfeasibleConfigError:
            continue
        points.append(_point(float(n_tim), report))
    if not points:
        raise InfeasibleConfigError(
            f"no feasible group count among {sorted(candidates)} "
            f"for scenario '{scenario.name}'")
    chosen = min(points, key=lambda p: (p.mean_current_ma, p.value))
    return SweepResult("n_tim", scenario.name, tuple(points),
                       chosen.value, None)


def sweep_t(scenario: Scenario, values=None,
            success_threshold: float = DEFAULT_SUCCESS_THRESHOLD,
            backend: str = "model", sim_periods: int = 2000,
            seed: int | None = None) -> SweepResult:
    """Pick the largest DTIM period whose delivery clears the threshold.

    ``values`` is an explicit list of candidate periods (build one with
    :func:`t_grid`); the default grid is 0.2 s to 60 s in 0.1 s steps.
    ``backend="sim"`` scores each point with a simulation run (slower;
    delivery measured as delivered/generated, normalised by the same
    error floor as the model's figure).
    """
    if values is None:
        values = t_grid(*DEFAULT_T_GRID)
    values = list(values)
    if not values:
        raise ValueError("sweep_t: empty grid")
    placements = place_stations(scenario)
    points = []
    for t in values:
        try:
            cfg = scenario.with_overrides(dtim_period=float(t))
            report = evaluate(cfg, placements=placements)
        except InfeasibleConfigError:
            continue
        if backend == "sim":
            delivery = _sim_delivery(cfg, placements, sim_periods, seed)
            points.append(SweepPoint(t, report.mean_current_ma,
                                     report.success_dl, report.success_ul,
                                     delivery["dl"], delivery["ul"],
                                     report.battery_lifetime_h))
        else:
            points.append(_point(t, report))
    if not points:
        raise InfeasibleConfigError(
            f"no feasible DTIM period in the grid for '{scenario.name}'")
    feasible = [p for p in points if p.min_delivery >= success_threshold]
    if not feasible:
        raise InfeasibleConfigError(
            f"no grid period reaches delivery >= {success_threshold} "
            f"for '{scenario.name}'")
    chosen = max(feasible, key=lambda p: p.value)
    return SweepResult("dtim_period", scenario.name, tuple(points),
                       chosen.value, success_threshold)


def _sim_delivery(scenario: Scenario, placements, n_periods: int,
                  seed: int | None) -> dict[str, float]:
    report = simulator.run(scenario, n_periods=n_periods, seed=seed,
                           placements=placements)
    out = {}
    for direction, p_e in (("dl", scenario.mac.p_e_dl), ("ul", scenario.mac.p_e_ul)):
        floor = 1.0 - p_e ** scenario.mac.m_err
        out[direction] = report.delivery_ratio(direction) / floor
    return out


def compare_default_vs_optimized(scenario: Scenario,
                                 ntim_candidates=DEFAULT_NTIM_CANDIDATES,
                                 values=None,
                                 success_threshold: float = DEFAULT_SUCCESS_THRESHOLD,
                                 default_n_tim: int = 8,
                                 default_dtim_period: float = 1.6) -> OptimizationComparison:
    """Evaluate the stock configuration against the swept optimum.

    The two axes are tuned sequentially: group count first (at the stock
    period), then the period at the chosen group count.
    """
    placements = place_stations(scenario)
    default_cfg = scenario.with_overrides(n_tim=default_n_tim,
                                          dtim_period=default_dtim_period)
    default_report = evaluate(default_cfg, placements=placements)

    base = scenario.with_overrides(dtim_period=default_dtim_period)
    best_ntim = int(sweep_ntim(base, ntim_candidates).chosen)
    best_t = sweep_t(scenario.with_overrides(n_tim=best_ntim), values=values,
                     success_threshold=success_threshold).chosen
    optimized_cfg = scenario.with_overrides(n_tim=best_ntim, dtim_period=best_t)
    optimized_report = evaluate(optimized_cfg, placements=placements)

    return OptimizationComparison(
        scenario_name=scenario.name,
        default_report=default_report,
        optimized_report=optimized_report,
        default_n_tim=default_n_tim,
        default_dtim_period=default_dtim_period,
        optimized_n_tim=best_ntim,
        optimized_dtim_period=best_t,
        current_ratio=optimized_report.mean_current_ma / default_report.mean_current_ma,
        lifetime_ratio=optimized_report.battery_lifetime_h / default_report.battery_lifetime_h,
    )
