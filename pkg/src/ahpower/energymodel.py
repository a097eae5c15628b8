"""Closed-form per-DTIM-period radio state times, energy and battery lifetime.

For one station at one data rate the model splits a DTIM period of length
T into receive, transmit, idle and sleep time:

* receive: the DTIM beacon (always), the group TIM beacon (when the group
  is flagged for downlink or own uplink data is pending), a multicast
  frame when announced, and the frames received during the station's own
  downlink/uplink exchanges;
* transmit: the frames the station itself sends during those exchanges;
* idle: inter-frame spacings, backoff countdown, and waiting while the
  other contenders of the group occupy the channel;
* sleep: the remainder of the period.

Exchange outcomes are weighted over the collision/error retry lattice
(see :mod:`ahpower.probabilities`), with per-outcome frame counts for
each radio state.  Packets whose exchange cannot fit the remaining RAW
segment are counted as boundary losses; queueing across periods is
deliberately not modelled here (that is the simulator's job).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import probabilities as prob
from .exceptions import InfeasibleConfigError
from .linkbudget import StationPlacement, place_stations
from .mactiming import MacTiming, derive_timing, frame_time
from .scenarios import Scenario

DIRECTIONS = ("dl", "ul")


@dataclass(frozen=True)
class DirectionModel:
    """Inputs of the retry-lattice sums for one direction at one rate."""

    direction: str
    p_pending: float        # packet available this period
    p_c: float              # first-frame collision probability
    p_e: float              # DATA error probability
    n_contenders: float     # expected contenders in the group slot
    t_exchange: float
    t_collision: float
    t_error: float
    t_raw: float
    t_data: float           # frame air times at the station rate
    t_ack: float
    t_cts: float
    t_rts: float
    t_ps_poll: float

    def fit(self, i: int, j: int) -> float:
        return prob.raw_fit(i, j, self.n_contenders, self.p_c, self.p_e,
                            self.t_exchange, self.t_collision, self.t_error,
                            self.t_raw)


@dataclass(frozen=True)
class StateTimes:
    """Seconds spent in each radio state within one DTIM period."""

    t_rx: float
    t_tx: float
    t_id: float
    t_sl: float

    @property
    def total(self) -> float:
        return self.t_rx + self.t_tx + self.t_id + self.t_sl

    def fractions(self) -> dict[str, float]:
        t = self.total
        return {"rx": self.t_rx / t, "tx": self.t_tx / t,
                "id": self.t_id / t, "sl": self.t_sl / t}


@dataclass(frozen=True)
class EnergyReport:
    """Network-mean analytic results for one scenario configuration."""

    scenario_name: str
    n_sta: int
    n_tim: int
    dtim_period: float
    state_times: StateTimes
    energy_per_dtim_j: float
    mean_current_ma: float
    success_dl: float           # packet served within its period, downlink
    success_ul: float
    delivery_dl: float          # per generated packet, error-floor normalised
    delivery_ul: float
    battery_lifetime_h: float

    def fractions(self) -> dict[str, float]:
        return self.state_times.fractions()


def direction_model(scenario: Scenario, timing: MacTiming, rate: float,
                    direction: str) -> DirectionModel:
    mac = scenario.mac
    p_pending = prob.packet_probability(scenario.dtim_period,
                                        scenario.mean_interval(direction))
    p_c = prob.collision_probability(p_pending, timing.n_sta_per_group, mac.cw_min)
    p_e = mac.p_e_dl if direction == "dl" else mac.p_e_ul
    return DirectionModel(
        direction=direction,
        p_pending=p_pending,
        p_c=p_c,
        p_e=p_e,
        n_contenders=timing.n_sta_per_group * p_pending,
        t_exchange=timing.exchange(direction, rate),
        t_collision=timing.collision(direction, rate),
        t_error=timing.error(direction, rate),
        t_raw=timing.raw(direction),
        t_data=frame_time(mac.l_data, rate),
        t_ack=frame_time(mac.l_ack, rate),
        t_cts=frame_time(mac.l_cts, rate),
        t_rts=frame_time(mac.l_rts, rate),
        t_ps_poll=frame_time(mac.l_ps_poll, rate),
    )


def _lattice(dm: DirectionModel, m_col: int, m_err: int):
    """Yield (kind, i, j, weight) over all outcome classes of one packet.

    Kinds: a success after i collisions and j errors; a drop on the final
    error (j == m_err) or the final collision (i == m_col); and a boundary
    loss at (i, j), weighted by the bare no-fit indicator.
    """
    for i in range(m_col):
        for j in range(m_err):
            w = prob.success_probability(i, j, dm.p_c, dm.p_e, dm.fit(i, j))
            yield "success", i, j, w
    for i in range(m_col):
        w = prob.no_success_probability(i, m_err, dm.p_c, dm.p_e,
                                        dm.fit(i, m_err), dropped_by="error")
        yield "error_drop", i, m_err, w
    for j in range(m_err):
        w = prob.no_success_probability(m_col, j, dm.p_c, dm.p_e,
                                        dm.fit(m_col, j), dropped_by="collision")
        yield "collision_drop", m_col, j, w
    for i in range(m_col):
        for j in range(m_err):
            yield "boundary", i, j, 1.0 - dm.fit(i, j)


# Frame counts per outcome class.  Successful attempts carry the full
# exchange; failed ones only the frames up to the failure point, and a
# boundary loss carries the pre-drop retries but no final exchange.

def _rx_duration(dm: DirectionModel, kind: str, i: int, j: int) -> float:
    n_data = {"success": j + 1, "error_drop": j, "collision_drop": j,
              "boundary": j}[kind]
    if dm.direction == "dl":
        return n_data * dm.t_data
    # uplink: received frames are the CTS responses plus the final ACK
    n_ack = 1 if kind == "success" else 0
    return n_data * dm.t_cts + n_ack * dm.t_ack


def _tx_duration(dm: DirectionModel, kind: str, i: int, j: int) -> float:
    n_access = {"success": i + j + 1, "error_drop": i + j, "collision_drop": i + j,
                "boundary": i + j}[kind]
    if dm.direction == "dl":
        n_ack = 1 if kind == "success" else 0
        return n_access * dm.t_ps_poll + n_ack * dm.t_ack
    n_data = {"success": j + 1, "error_drop": j, "collision_drop": j,
              "boundary": j}[kind]
    return n_access * dm.t_rts + n_data * dm.t_data


def _idle_duration(dm: DirectionModel, kind: str, i: int, j: int,
                   mac_sifs: float, mac_difs: float, mac_slot: float,
                   cw_min: int, cw_max: int) -> float:
    n_difs = {"success": i + j + 1, "error_drop": i + j, "collision_drop": i + j,
              "boundary": i + j}[kind]
    sifs_per_try = 2 if dm.direction == "dl" else 3
    sifs_per_err = 1 if dm.direction == "dl" else 2
    n_sifs = {"success": sifs_per_err * j + sifs_per_try,
              "error_drop": sifs_per_err * j,
              "collision_drop": sifs_per_err * j,
              "boundary": sifs_per_err * j}[kind]
    stages = {"success": i + j, "error_drop": i + j - 1, "collision_drop": i + j - 1,
              "boundary": i + j}[kind]
    backoff = mac_slot * prob.mean_backoff_slots(stages, cw_min, cw_max)
    foreign = (dm.n_contenders / 2.0) * (
        (1.0 - dm.p_c) * (1.0 - dm.p_e) * dm.t_exchange
        + dm.p_c * dm.t_collision
        + (1.0 - dm.p_c) * dm.p_e * dm.t_error)
    return n_difs * mac_difs + n_sifs * mac_sifs + backoff + foreign


def _direction_sums(dm: DirectionModel, scenario: Scenario) -> tuple[float, float, float]:
    """Expected (rx, tx, idle) seconds of one pending packet's service."""
    mac = scenario.mac
    rx = tx = idle = 0.0
    for kind, i, j, w in _lattice(dm, mac.m_col, mac.m_err):
        if w == 0.0:
            continue
        rx += w * _rx_duration(dm, kind, i, j)
        tx += w * _tx_duration(dm, kind, i, j)
        idle += w * _idle_duration(dm, kind, i, j, mac.t_sifs, mac.t_difs,
                                   mac.t_slot, mac.cw_min, mac.cw_max)
    return rx, tx, idle


def success_probability_sum(dm: DirectionModel, m_col: int, m_err: int) -> float:
    """Probability that a pending packet is served within its period."""
    return sum(prob.success_probability(i, j, dm.p_c, dm.p_e, dm.fit(i, j))
               for i in range(m_col) for j in range(m_err))


def sleep_time(dtim_period: float, t_rx: float, t_tx: float, t_id: float) -> float:
    """Remaining sleep time; negative activity totals are a config error."""
    t_sl = dtim_period - t_rx - t_tx - t_id
    if t_sl < 0.0:
        raise InfeasibleConfigError(
            f"activity ({(t_rx + t_tx + t_id) * 1e3:.2f} ms) exceeds the "
            f"{dtim_period * 1e3:.2f} ms DTIM period")
    return t_sl


def _awake_components(scenario: Scenario, timing: MacTiming,
                      rate: float) -> tuple[float, float, float]:
    """(t_rx, t_tx, t_id) of one period at one rate."""
    mac = scenario.mac
    dl = direction_model(scenario, timing, rate, "dl")
    ul = direction_model(scenario, timing, rate, "ul")

    p_tim_flag = prob.group_flag_probability(dl.p_pending, timing.n_sta_per_group)
    p_tim_listen = prob.either_probability(p_tim_flag, ul.p_pending)
    t_data_minrate = frame_time(mac.l_data, timing.r_min)

    dl_rx, dl_tx, dl_id = _direction_sums(dl, scenario)
    ul_rx, ul_tx, ul_id = _direction_sums(ul, scenario)

    t_rx = (timing.t_dtim
            + (scenario.n_tim - 1) / scenario.n_tim * p_tim_listen * timing.t_tim
            + scenario.p_mc * t_data_minrate
            + dl.p_pending * dl_rx + ul.p_pending * ul_rx)
    t_tx = dl.p_pending * dl_tx + ul.p_pending * ul_tx
    t_id = (scenario.p_mc * mac.t_difs
            + dl.p_pending * dl_id + ul.p_pending * ul_id)
    return t_rx, t_tx, t_id


def rx_time(scenario: Scenario, timing: MacTiming, rate: float) -> float:
    """Expected receive seconds per period: beacons, multicast, own frames."""
    return _awake_components(scenario, timing, rate)[0]


def tx_time(scenario: Scenario, timing: MacTiming, rate: float) -> float:
    """Expected transmit seconds per period across both directions."""
    return _awake_components(scenario, timing, rate)[1]


def idle_time(scenario: Scenario, timing: MacTiming, rate: float) -> float:
    """Expected idle seconds per period: spacings, backoff, foreign traffic."""
    return _awake_components(scenario, timing, rate)[2]


def state_times_at_rate(scenario: Scenario, timing: MacTiming,
                        rate: float) -> tuple[StateTimes, dict[str, float]]:
    """StateTimes plus per-direction success probabilities at one rate."""
    mac = scenario.mac
    t_rx, t_tx, t_id = _awake_components(scenario, timing, rate)
    t_sl = sleep_time(scenario.dtim_period, t_rx, t_tx, t_id)
    success = {
        "dl": success_probability_sum(
            direction_model(scenario, timing, rate, "dl"), mac.m_col, mac.m_err),
        "ul": success_probability_sum(
            direction_model(scenario, timing, rate, "ul"), mac.m_col, mac.m_err),
    }
    return StateTimes(t_rx, t_tx, t_id, t_sl), success


def _delivery(scenario: Scenario, direction: str, success: float) -> float:
    """Success per generated packet, normalised by the error-retry floor.

    Divides out the unavoidable loss of packets that exhaust the DATA
    error retries on a clean channel, and charges the overflow when more
    than one packet is generated per period (only one can be served).
    """
    p_e = scenario.mac.p_e_dl if direction == "dl" else scenario.mac.p_e_ul
    floor = 1.0 - p_e ** scenario.mac.m_err
    overflow = min(1.0, scenario.mean_interval(direction) / scenario.dtim_period)
    return success / floor * overflow


def evaluate(scenario: Scenario,
             placements: list[StationPlacement] | None = None,
             rate: float | None = None) -> EnergyReport:
    """Network-mean energy report for a scenario.

    Stations sharing a data rate have identical state times, so the
    per-station results are computed once per distinct rate and averaged
    with station-count weights.  ``rate`` forces a single rate for the
    whole network and skips placement.
    """
    scenario.validate()
    timing = derive_timing(scenario)
    if rate is not None:
        rate_counts = {float(rate): scenario.n_sta}
    else:
        if placements is None:
            placements = place_stations(scenario)
        rate_counts: dict[float, int] = {}
        for p in placements:
            rate_counts[p.assigned_rate] = rate_counts.get(p.assigned_rate, 0) + 1

    power = scenario.power
    total = scenario.n_sta
    acc = {"t_rx": 0.0, "t_tx": 0.0, "t_id": 0.0, "t_sl": 0.0}
    succ = {"dl": 0.0, "ul": 0.0}
    mean_current = 0.0
    for r, count in sorted(rate_counts.items()):
        st, success = state_times_at_rate(scenario, timing, r)
        w = count / total
        acc["t_rx"] += w * st.t_rx
        acc["t_tx"] += w * st.t_tx
        acc["t_id"] += w * st.t_id
        acc["t_sl"] += w * st.t_sl
        succ["dl"] += w * success["dl"]
        succ["ul"] += w * success["ul"]
        mean_current += w * _mean_current_ma(st, power, scenario.dtim_period)

    st = StateTimes(**acc)
    energy = power.supply_voltage * mean_current * 1e-3 * scenario.dtim_period
    return EnergyReport(
        scenario_name=scenario.name,
        n_sta=scenario.n_sta,
        n_tim=scenario.n_tim,
        dtim_period=scenario.dtim_period,
        state_times=st,
        energy_per_dtim_j=energy,
        mean_current_ma=mean_current,
        success_dl=succ["dl"],
        success_ul=succ["ul"],
        delivery_dl=_delivery(scenario, "dl", succ["dl"]),
        delivery_ul=_delivery(scenario, "ul", succ["ul"]),
        battery_lifetime_h=power.battery_capacity / mean_current,
    )


def _mean_current_ma(st: StateTimes, power, dtim_period: float) -> float:
    return (st.t_rx * power.i_rx + st.t_tx * power.i_tx
            + st.t_id * power.i_id + st.t_sl * power.i_sl) / dtim_period
