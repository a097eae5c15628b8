"""Deployment scenarios: parameter containers, validation and YAML I/O.

A scenario bundles everything needed to evaluate one 802.11ah power-save
deployment: station count and area, traffic periods, the DTIM/TIM grouping
parameters, MAC constants, the PHY/link-budget profile and the transceiver
power profile.

Scenario files are plain YAML with one nested section per sub-profile
(``mac:``, ``phy:``, ``power:``); see the README for the schema.  Four
built-in M2M presets ship with the package (agricultural monitoring,
smart metering, industrial automation, animal monitoring) and are loaded
from the packaged YAML files, so the file format is exercised on every
use.  Loaded scenarios are immutable; share them freely across workers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, asdict, replace
from importlib import resources
from pathlib import Path

import yaml

from .exceptions import ScenarioParseError, ValidationError

SCENARIO_DIR_ENV = "AHPOWER_SCENARIO_DIR"

BUILTIN_NAMES = (
    "agricultural_monitoring",
    "smart_metering",
    "industrial_automation",
    "animal_monitoring",
)


@dataclass(frozen=True)
class McsEntry:
    """One modulation/coding mode of the PHY rate table."""

    name: str
    modulation: str
    code_rate: float
    data_rate: float        # bits/s
    ebn0_db: float          # required Eb/N0 for ~10% PER at 100 B payloads

    def validate(self) -> None:
        if self.data_rate <= 0:
            raise ValidationError(f"mcs {self.name}: data_rate must be > 0")
        if not math.isfinite(self.ebn0_db):
            raise ValidationError(f"mcs {self.name}: ebn0_db must be finite")


@dataclass(frozen=True)
class MacConstants:
    """MAC-layer timing constants, frame sizes and retry limits."""

    t_sifs: float = 160e-6      # s
    t_difs: float = 264e-6      # s
    t_slot: float = 52e-6       # s
    cw_min: int = 16            # slots (initial contention window)
    cw_max: int = 1024          # slots
    m_col: int = 7              # retry limit on PS-Poll/RTS collisions
    m_err: int = 1              # retry limit on DATA errors
    l_data: int = 100           # bytes
    l_ps_poll: int = 14         # bytes
    l_ack: int = 14             # bytes
    l_rts: int = 20             # bytes
    l_cts: int = 14             # bytes
    p_e_dl: float = 0.0         # DATA error probability, downlink
    p_e_ul: float = 0.1         # DATA error probability, uplink

    def validate(self) -> None:
        if self.cw_min > self.cw_max:
            raise ValidationError("mac: cw_min must be <= cw_max")
        if self.m_col < 1 or self.m_err < 1:
            raise ValidationError("mac: retry limits m_col and m_err must be >= 1")
        for name in ("t_sifs", "t_difs", "t_slot"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"mac: {name} must be > 0")
        for name in ("l_data", "l_ps_poll", "l_ack", "l_rts", "l_cts"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"mac: {name} must be > 0")
        for name in ("p_e_dl", "p_e_ul"):
            p = getattr(self, name)
            if not 0.0 <= p < 1.0:
                raise ValidationError(f"mac: {name} must be in [0, 1)")


# Required Eb/N0 per mode is a calibration artifact, not measured data:
# values are chosen so the budget closes with roughly 10% packet error
# rate at 100-byte payloads, and they are configurable per scenario file.
DEFAULT_MCS_TABLE = (
    McsEntry("mcs0", "BPSK", 1 / 2, 300e3, 5.0),
    McsEntry("mcs1", "QPSK", 1 / 2, 600e3, 5.0),
    McsEntry("mcs2", "QPSK", 3 / 4, 900e3, 6.5),
    McsEntry("mcs3", "16-QAM", 1 / 2, 1200e3, 8.0),
    McsEntry("mcs4", "16-QAM", 3 / 4, 1800e3, 11.0),
    McsEntry("mcs5", "64-QAM", 2 / 3, 2400e3, 14.0),
    McsEntry("mcs6", "64-QAM", 3 / 4, 2700e3, 16.0),
    McsEntry("mcs7", "64-QAM", 5 / 6, 3000e3, 17.5),
    McsEntry("mcs8", "256-QAM", 3 / 4, 3600e3, 20.0),
    McsEntry("mcs9", "256-QAM", 5 / 6, 4000e3, 22.0),
)

FADE_MARGIN_DB = {"indoor": 3.84, "outdoor": 12.82}

# Sub-GHz sensor deployments in the hundreds of metres need a macro-cell
# power budget; 0 dBm is the typical indoor/short-range figure.
DEFAULT_TX_POWER_DBM = {"indoor": 0.0, "outdoor": 30.0}


@dataclass(frozen=True)
class PhyProfile:
    """Channel/link-budget parameters plus the MCS rate table."""

    carrier_freq: float = 900e6         # Hz
    breakpoint_distance: float = 5.0    # m (indoor model)
    p_tx_dbm: float = 0.0
    g_tx_dbi: float = 0.0
    g_rx_dbi: float = 3.0
    noise_figure_db: float = 3.0
    bandwidth: float = 1e6              # Hz
    fade_margin_db: float = 3.84        # environment dependent
    mcs_table: tuple[McsEntry, ...] = DEFAULT_MCS_TABLE

    def validate(self) -> None:
        if not self.mcs_table:
            raise ValidationError("phy: mcs_table must not be empty")
        rates = [m.data_rate for m in self.mcs_table]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValidationError("phy: mcs_table must be sorted by strictly increasing data_rate")
        for m in self.mcs_table:
            m.validate()
        for name in ("carrier_freq", "breakpoint_distance", "bandwidth"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"phy: {name} must be > 0")

    @property
    def min_rate(self) -> float:
        return self.mcs_table[0].data_rate


@dataclass(frozen=True)
class PowerProfile:
    """Transceiver current draw per radio state.

    The defaults are a placeholder profile modelled on a commodity sub-GHz
    transceiver (receive/listen a few mA, transmit ~10 mA, sub-uA sleep)
    with a 2xAA battery; swap in datasheet numbers for absolute-lifetime
    work.  Comparative results (state fractions, current ratios) do not
    depend on the absolute values.
    """

    i_rx: float = 5.4               # mA
    i_tx: float = 10.5              # mA
    i_id: float = 5.0               # mA
    i_sl: float = 0.0007            # mA
    supply_voltage: float = 3.0     # V
    battery_capacity: float = 2400.0  # mAh

    def validate(self) -> None:
        if not (0.0 <= self.i_sl <= self.i_id <= self.i_rx):
            raise ValidationError("power: currents must satisfy 0 <= i_sl <= i_id <= i_rx")
        if self.i_tx < 0:
            raise ValidationError("power: i_tx must be >= 0")
        if self.battery_capacity <= 0:
            raise ValidationError("power: battery_capacity must be > 0")
        if self.supply_voltage <= 0:
            raise ValidationError("power: supply_voltage must be > 0")


@dataclass(frozen=True)
class Scenario:
    """Full description of one deployment."""

    name: str
    n_sta: int
    area_side: float                # m, square side with the AP at its centre
    environment: str                # "indoor" | "outdoor"
    mean_dl_interval: float         # s, expected time between downlink packets
    mean_ul_interval: float         # s, expected time between uplink packets
    dtim_period: float = 1.6        # s between consecutive DTIM beacons
    n_tim: int = 8                  # TIM groups
    p_mc: float = 0.0               # multicast packet probability per DTIM period
    beta_dl: float = 0.5            # RAW share for downlink
    beta_ul: float = 0.5            # RAW share for uplink
    seed: int = 1
    mac: MacConstants = field(default_factory=MacConstants)
    phy: PhyProfile = field(default_factory=PhyProfile)
    power: PowerProfile = field(default_factory=PowerProfile)

    def validate(self) -> None:
        if self.n_sta < 1:
            raise ValidationError("scenario: n_sta must be >= 1")
        if self.n_tim < 1:
            raise ValidationError("scenario: n_tim must be >= 1")
        if self.dtim_period <= 0:
            raise ValidationError("scenario: dtim_period must be > 0")
        if self.area_side <= 0:
            raise ValidationError("scenario: area_side must be > 0")
        if self.environment not in ("indoor", "outdoor"):
            raise ValidationError("scenario: environment must be 'indoor' or 'outdoor'")
        if self.mean_dl_interval <= 0 or self.mean_ul_interval <= 0:
            raise ValidationError("scenario: mean packet intervals must be > 0")
        if not 0.0 <= self.p_mc <= 1.0:
            raise ValidationError("scenario: p_mc must be in [0, 1]")
        for name in ("beta_dl", "beta_ul"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"scenario: {name} must be in [0, 1]")
        if abs(self.beta_dl + self.beta_ul - 1.0) > 1e-9:
            raise ValidationError("scenario: beta_dl + beta_ul must equal 1")
        self.mac.validate()
        self.phy.validate()
        self.power.validate()

    def with_overrides(self, **kwargs) -> "Scenario":
        """Return a validated copy with the given fields replaced."""
        out = replace(self, **kwargs)
        out.validate()
        return out

    def mean_interval(self, direction: str) -> float:
        return self.mean_dl_interval if direction == "dl" else self.mean_ul_interval


# ---------------------------------------------------------------------------
# serialization

def scenario_to_dict(scenario: Scenario) -> dict:
    d = asdict(scenario)
    d["phy"]["mcs_table"] = [asdict(m) for m in scenario.phy.mcs_table]
    return d


def scenario_from_dict(data: dict) -> Scenario:
    try:
        mac = MacConstants(**data.get("mac", {}))
        phy_data = dict(data.get("phy", {}))
        if "mcs_table" in phy_data:
            phy_data["mcs_table"] = tuple(McsEntry(**m) for m in phy_data["mcs_table"])
        phy = PhyProfile(**phy_data)
        power = PowerProfile(**data.get("power", {}))
        top = {k: v for k, v in data.items() if k not in ("mac", "phy", "power")}
        scenario = Scenario(mac=mac, phy=phy, power=power, **top)
    except TypeError as exc:
        raise ScenarioParseError(f"bad scenario structure: {exc}") from exc
    scenario.validate()
    return scenario


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(scenario_to_dict(scenario), fh, sort_keys=False)


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario file.

    Bare names (no existing file, no extension) are resolved against the
    directory named by the ``AHPOWER_SCENARIO_DIR`` environment variable
    and then against the built-in presets.
    """
    p = Path(path)
    if not p.exists():
        resolved = _resolve_name(str(path))
        if resolved is None:
            raise ScenarioParseError(f"scenario file not found: {path}")
        p = resolved
    try:
        with open(p) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"cannot parse {p}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError(f"{p}: top level must be a mapping")
    return scenario_from_dict(data)


def _resolve_name(name: str) -> Path | None:
    env_dir = os.environ.get(SCENARIO_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / f"{name}.yaml"
        if candidate.exists():
            return candidate
    builtin = resources.files(__package__) / "data" / "scenarios" / f"{name}.yaml"
    if builtin.is_file():
        return Path(str(builtin))
    return None


# ---------------------------------------------------------------------------
# built-in presets

def builtin_scenario(name: str) -> Scenario:
    """Load one of the built-in M2M presets by name."""
    if name not in BUILTIN_NAMES:
        raise ValidationError(
            f"unknown scenario '{name}'; built-ins: {', '.join(BUILTIN_NAMES)}")
    path = resources.files(__package__) / "data" / "scenarios" / f"{name}.yaml"
    return load_scenario(str(path))


def builtin_scenarios() -> list[Scenario]:
    """All four built-in M2M presets."""
    return [builtin_scenario(name) for name in BUILTIN_NAMES]
