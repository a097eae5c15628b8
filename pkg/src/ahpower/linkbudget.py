"""Link budget: path loss, per-mode margins, MCS selection and placement.

Rate selection closes the budget in the Eb/N0 domain: received power minus
the thermal noise floor over the channel bandwidth (at the reference
receiver temperature, plus noise figure) must cover the per-mode required
Eb/N0 after adjusting for the mode's rate-to-bandwidth ratio.  Two path
loss models are used: free space up to the breakpoint distance with a 3.5
slope beyond it (indoor), and a pico/hot-zone fit with rooftop antenna
(outdoor).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import UnreachableStationError
from .scenarios import McsEntry, PhyProfile, Scenario

SPEED_OF_LIGHT = 299792458.0    # m/s
BOLTZMANN = 1.380649e-23        # J/K
RECEIVER_TEMP_K = 293.0


@dataclass(frozen=True)
class StationPlacement:
    station_id: int
    x: float                # m, relative to the AP at the origin
    y: float
    distance: float         # m
    mcs: McsEntry

    @property
    def assigned_rate(self) -> float:
        return self.mcs.data_rate


def free_space_loss(d: float, freq: float) -> float:
    """Free-space path loss in dB at distance d (m) and frequency freq (Hz)."""
    return 20.0 * math.log10(4.0 * math.pi * d * freq / SPEED_OF_LIGHT)


def path_loss(d: float, environment: str, phy: PhyProfile) -> float:
    """Path loss in dB at distance d metres; monotonically non-decreasing in d."""
    if d <= 0:
        raise ValueError("path_loss: distance must be > 0")
    if environment == "indoor":
        d_bp = phy.breakpoint_distance
        if d <= d_bp:
            return free_space_loss(d, phy.carrier_freq)
        return free_space_loss(d_bp, phy.carrier_freq) + 35.0 * math.log10(d / d_bp)
    if environment == "outdoor":
        return 23.3 + 37.6 * math.log10(d)
    raise ValueError(f"path_loss: unknown environment '{environment}'")


def thermal_noise_dbm(bandwidth: float) -> float:
    """Thermal noise floor over the given bandwidth at 293 K, in dBm."""
    return 10.0 * math.log10(BOLTZMANN * RECEIVER_TEMP_K * bandwidth * 1000.0)


def received_power_dbm(d: float, environment: str, phy: PhyProfile) -> float:
    return (phy.p_tx_dbm + phy.g_tx_dbi + phy.g_rx_dbi
            - path_loss(d, environment, phy) - phy.fade_margin_db)


def link_margin(d: float, mcs: McsEntry, environment: str, phy: PhyProfile) -> float:
    """Budget margin in dB for one mode at distance d; >= 0 means the mode closes."""
    noise_floor = thermal_noise_dbm(phy.bandwidth) + phy.noise_figure_db
    rate_adjust = 10.0 * math.log10(mcs.data_rate / phy.bandwidth)
    return (received_power_dbm(d, environment, phy)
            - noise_floor - rate_adjust - mcs.ebn0_db)


def select_mcs(d: float, environment: str, phy: PhyProfile) -> McsEntry:
    """Highest-rate mode whose link margin is non-negative at distance d."""
    for mcs in reversed(phy.mcs_table):
        if link_margin(d, mcs, environment, phy) >= 0.0:
            return mcs
    raise UnreachableStationError(
        f"no MCS closes at {d:.1f} m ({environment}); "
        f"the most robust mode falls short by "
        f"{-link_margin(d, phy.mcs_table[0], environment, phy):.1f} dB")


def max_distance(mcs: McsEntry, environment: str, phy: PhyProfile) -> float:
    """Largest distance (m) at which the mode still closes, via bisection."""
    lo, hi = 1e-3, 1e6
    if link_margin(lo, mcs, environment, phy) < 0:
        return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if link_margin(mid, mcs, environment, phy) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


def place_stations(scenario: Scenario, seed: int | None = None) -> list[StationPlacement]:
    """Uniformly place the scenario's stations over its square area.

    The AP sits at the centre; each station is assigned the fastest MCS its
    distance supports.  Deterministic for a given seed (defaults to the
    scenario seed).
    """
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    half = scenario.area_side / 2.0
    xs = rng.uniform(-half, half, scenario.n_sta)
    ys = rng.uniform(-half, half, scenario.n_sta)
    placements = []
    for i in range(scenario.n_sta):
        d = float(math.hypot(xs[i], ys[i]))
        try:
            mcs = select_mcs(d, scenario.environment, scenario.phy)
        except UnreachableStationError as exc:
            raise UnreachableStationError(
                f"station {i} at {d:.1f} m is unreachable: {exc}") from exc
        placements.append(StationPlacement(i, float(xs[i]), float(ys[i]), d, mcs))
    return placements


def export_placements_csv(placements: list[StationPlacement], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["station_id", "x_m", "y_m", "distance_m", "mcs", "rate_bps"])
        for p in placements:
            writer.writerow([p.station_id, repr(p.x), repr(p.y), repr(p.distance),
                             p.mcs.name, repr(p.assigned_rate)])
