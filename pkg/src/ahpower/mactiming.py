"""Derived MAC-layer durations for the TIM/page beacon schedule.

A DTIM period of length T is divided into ``n_pages * n_tim`` equal beacon
intervals.  The first interval of each page opens with a DTIM beacon
followed by a reserved multicast segment; every other interval opens with
a TIM beacon.  The remainder of each interval is the restricted access
window (RAW), split between a downlink and an uplink segment in the
configured beta proportions.

Beacon payloads grow with both the group count (per-group bitmap blocks)
and the page count, so the beacon overhead has a minimum at an
intermediate number of TIM groups.  All beacons and multicast data go out
at the lowest network rate so every station can decode them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import InfeasibleConfigError
from .scenarios import MacConstants, Scenario

STATIONS_PER_PAGE = 2048


def pages(n_sta: int) -> int:
    """Number of address pages needed for n_sta stations."""
    if n_sta < 1:
        raise ValueError("pages: n_sta must be >= 1")
    return -(-n_sta // STATIONS_PER_PAGE)


def frame_time(n_bytes: float, rate: float) -> float:
    """Air time in seconds of an n-byte frame at the given rate (bits/s)."""
    return n_bytes * 8.0 / rate


def dtim_beacon_bytes(n_tim: int, n_pages: int) -> float:
    """DTIM beacon length: fixed header plus per-page group/page bitmaps."""
    return 25.0 + (11.0 + 17.0 / 4.0 * n_tim + 256.0 / n_tim) * n_pages


def tim_beacon_bytes(n_tim: int, n_pages: int) -> float:
    """TIM beacon length: fixed header plus the per-group station bitmap."""
    return 25.0 + (10.0 + 256.0 / n_tim) * n_pages


def dtim_beacon_time(n_tim: int, n_pages: int, r_min: float) -> float:
    return frame_time(dtim_beacon_bytes(n_tim, n_pages), r_min)


def tim_beacon_time(n_tim: int, n_pages: int, r_min: float) -> float:
    return frame_time(tim_beacon_bytes(n_tim, n_pages), r_min)


def multicast_segment_time(mac: MacConstants, r_min: float) -> float:
    """Reserved multicast slot: one DATA frame at the lowest rate plus DIFS."""
    return frame_time(mac.l_data, r_min) + mac.t_difs


def raw_time(dtim_period: float, n_tim: int, n_pages: int, beta: float,
             t_mc: float, t_dtim: float, t_tim: float) -> float:
    """Expected RAW segment length for one direction.

    Averages the post-DTIM interval (shortened by the DTIM beacon and the
    multicast slot) and the n_tim - 1 post-TIM intervals.  Zero beta is a
    legitimately disabled direction; otherwise the period is infeasible
    when either interval kind cannot even hold its beacon (a positive
    average can hide a negative post-DTIM share), or when the average
    itself is non-positive.
    """
    if beta == 0.0:
        return 0.0
    interval = dtim_period / (n_tim * n_pages)
    after_dtim = interval - t_mc - t_dtim
    after_tim = interval - t_tim
    value = (1.0 / n_tim) * after_dtim * beta \
        + ((n_tim - 1.0) / n_tim) * after_tim * beta
    if after_dtim <= 0.0 or (n_tim > 1 and after_tim <= 0.0) or value <= 0.0:
        raise InfeasibleConfigError(
            f"RAW segment collapses (post-DTIM share {after_dtim * 1e3:.3f} ms, "
            f"post-TIM share {after_tim * 1e3:.3f} ms); dtim_period="
            f"{dtim_period}s is too short for n_tim={n_tim}, n_pages={n_pages}")
    return value


def exchange_time(direction: str, rate: float, mac: MacConstants) -> float:
    """Duration of one complete error-free frame exchange.

    Downlink: PS-Poll / SIFS / DATA / SIFS / ACK / DIFS.
    Uplink:   RTS / SIFS / CTS / SIFS / DATA / SIFS / ACK / DIFS.
    """
    if direction == "dl":
        return (frame_time(mac.l_ps_poll, rate) + mac.t_sifs
                + frame_time(mac.l_data, rate) + mac.t_sifs
                + frame_time(mac.l_ack, rate) + mac.t_difs)
    if direction == "ul":
        return (frame_time(mac.l_rts, rate) + mac.t_sifs
                + frame_time(mac.l_cts, rate) + mac.t_sifs
                + frame_time(mac.l_data, rate) + mac.t_sifs
                + frame_time(mac.l_ack, rate) + mac.t_difs)
    raise ValueError(f"exchange_time: unknown direction '{direction}'")


def collision_time(direction: str, rate: float, mac: MacConstants) -> float:
    """Channel time consumed by a collided access attempt (frame plus DIFS)."""
    if direction == "dl":
        return frame_time(mac.l_ps_poll, rate) + mac.t_difs
    if direction == "ul":
        return frame_time(mac.l_rts, rate) + mac.t_difs
    raise ValueError(f"collision_time: unknown direction '{direction}'")


def error_time(direction: str, rate: float, mac: MacConstants) -> float:
    """Channel time consumed by an exchange whose DATA frame is corrupted."""
    if direction == "dl":
        return (frame_time(mac.l_ps_poll, rate) + mac.t_sifs
                + frame_time(mac.l_data, rate) + mac.t_difs)
    if direction == "ul":
        return (frame_time(mac.l_rts, rate) + mac.t_sifs
                + frame_time(mac.l_cts, rate) + mac.t_sifs
                + frame_time(mac.l_data, rate) + mac.t_difs)
    raise ValueError(f"error_time: unknown direction '{direction}'")


@dataclass(frozen=True)
class MacTiming:
    """Per-configuration schedule durations (all in seconds)."""

    n_pages: int
    n_sta_per_group: float      # real-valued ratio n_sta / n_tim
    r_min: float
    t_dtim: float
    t_tim: float
    t_mc: float
    t_raw_dl: float
    t_raw_ul: float
    beacon_interval: float      # dtim_period / (n_tim * n_pages)
    mac: MacConstants

    def exchange(self, direction: str, rate: float) -> float:
        return exchange_time(direction, rate, self.mac)

    def collision(self, direction: str, rate: float) -> float:
        return collision_time(direction, rate, self.mac)

    def error(self, direction: str, rate: float) -> float:
        return error_time(direction, rate, self.mac)

    def raw(self, direction: str) -> float:
        return self.t_raw_dl if direction == "dl" else self.t_raw_ul

    def max_packets(self, direction: str, rate: float) -> int:
        """Upper bound on back-to-back exchanges fitting one RAW segment.

        Reporting aid only; the models never consume it.
        """
        return int(self.raw(direction) // self.exchange(direction, rate))

    def breakdown(self) -> dict[str, float]:
        """Flat schedule summary for debugging exports."""
        return {
            "n_pages": self.n_pages,
            "n_sta_per_group": self.n_sta_per_group,
            "r_min_bps": self.r_min,
            "t_dtim_s": self.t_dtim,
            "t_tim_s": self.t_tim,
            "t_mc_s": self.t_mc,
            "t_raw_dl_s": self.t_raw_dl,
            "t_raw_ul_s": self.t_raw_ul,
            "beacon_interval_s": self.beacon_interval,
            "t_exchange_dl_rmin_s": self.exchange("dl", self.r_min),
            "t_exchange_ul_rmin_s": self.exchange("ul", self.r_min),
            "t_collision_dl_rmin_s": self.collision("dl", self.r_min),
            "t_collision_ul_rmin_s": self.collision("ul", self.r_min),
            "t_error_dl_rmin_s": self.error("dl", self.r_min),
            "t_error_ul_rmin_s": self.error("ul", self.r_min),
        }


def derive_timing(scenario: Scenario) -> MacTiming:
    """All schedule durations implied by a scenario."""
    n_p = pages(scenario.n_sta)
    r_min = scenario.phy.min_rate
    t_dtim = dtim_beacon_time(scenario.n_tim, n_p, r_min)
    t_tim = tim_beacon_time(scenario.n_tim, n_p, r_min)
    t_mc = multicast_segment_time(scenario.mac, r_min)
    t_raw_dl = raw_time(scenario.dtim_period, scenario.n_tim, n_p,
                        scenario.beta_dl, t_mc, t_dtim, t_tim)
    t_raw_ul = raw_time(scenario.dtim_period, scenario.n_tim, n_p,
                        scenario.beta_ul, t_mc, t_dtim, t_tim)
    return MacTiming(
        n_pages=n_p,
        n_sta_per_group=scenario.n_sta / scenario.n_tim,
        r_min=r_min,
        t_dtim=t_dtim,
        t_tim=t_tim,
        t_mc=t_mc,
        t_raw_dl=t_raw_dl,
        t_raw_ul=t_raw_ul,
        beacon_interval=scenario.dtim_period / (scenario.n_tim * n_p),
        mac=scenario.mac,
    )
