"""Discrete-event simulator of the DTIM/TIM/RAW power-save cycle.

The simulator realises the same beacon schedule as the analytic model —
per page: a DTIM beacon, a reserved multicast slot, then one beacon
interval per TIM group, each holding a downlink and an uplink RAW
segment — but with real per-station queues: packets that cannot be
served in the period they arrived stay buffered and are retried in later
periods, which is exactly the behaviour the closed-form model ignores.
Comparing the two quantifies that simplification.

Contention inside a RAW segment is slot-synchronous DCF: uniform backoff
over the current window, window doubling per retry, collision when two
or more group members reach zero in the same slot.  DATA corruption is
drawn per exchange with the configured error probabilities.  A station
whose full exchange cannot fit the remaining segment defers and keeps
the packet buffered.  Every interval of simulated time lands in one of
the four radio states (receive / transmit / idle / sleep) per station.

Determinism: all randomness flows from one master seed through one
spawned stream per station (arrivals, backoff draws, error draws) plus
one for the AP, so a run is a pure function of (scenario, duration,
seed) regardless of host or schedule.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .energymodel import EnergyReport
from .exceptions import InfeasibleConfigError
from .linkbudget import StationPlacement, place_stations
from .mactiming import derive_timing, exchange_time, collision_time, error_time, frame_time
from .scenarios import Scenario


@dataclass
class PacketCounters:
    generated: int = 0
    delivered: int = 0
    dropped_collision: int = 0
    dropped_error: int = 0
    buffered: int = 0

    @property
    def dropped(self) -> int:
        return self.dropped_collision + self.dropped_error


@dataclass(frozen=True)
class SimReport:
    """Aggregate results of one simulation run."""

    scenario_name: str
    n_sta: int
    n_tim: int
    dtim_period: float
    n_periods: int
    duration: float
    seed: int
    fractions_rx: float         # network-mean share of time per radio state
    fractions_tx: float
    fractions_id: float
    fractions_sl: float
    mean_current_ma: float
    battery_lifetime_h: float
    dl: PacketCounters
    ul: PacketCounters
    channel_collisions: int
    station_collisions: int
    error_events: int
    deferrals: int
    per_sta_current_ma: np.ndarray = field(repr=False, compare=False)

    def fractions(self) -> dict[str, float]:
        return {"rx": self.fractions_rx, "tx": self.fractions_tx,
                "id": self.fractions_id, "sl": self.fractions_sl}

    def delivery_ratio(self, direction: str) -> float:
        c = self.dl if direction == "dl" else self.ul
        return c.delivered / c.generated if c.generated else 1.0

    @property
    def current_ci95_ma(self) -> float:
        """Half-width of the 95% interval on the across-station mean."""
        n = len(self.per_sta_current_ma)
        if n < 2:
            return 0.0
        return 1.96 * float(self.per_sta_current_ma.std(ddof=1)) / n ** 0.5


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side analytic vs simulated results."""

    model: EnergyReport
    sim: SimReport
    delta_fractions: dict[str, float]
    delta_current_ma: float
    lifetime_ratio: float       # sim / model

    @property
    def current_relative_delta(self) -> float:
        return abs(self.delta_current_ma) / self.model.mean_current_ma


class _Station:
    __slots__ = ("sid", "page", "group", "rate", "rng",
                 "t_exch", "t_coll", "t_err", "t_access_frame",
                 "t_data", "t_ack", "t_cts",
                 "ul_arrivals", "ul_idx", "ul_buffered",
                 "dl_arrivals", "dl_idx", "dl_buffered", "dl_ready",
                 "rx", "tx", "id_")

    def __init__(self, sid, page, group, rate, rng, mac):
        self.sid = sid
        self.page = page
        self.group = group
        self.rate = rate
        self.rng = rng
        self.t_exch = {"dl": exchange_time("dl", rate, mac),
                       "ul": exchange_time("ul", rate, mac)}
        self.t_coll = {"dl": collision_time("dl", rate, mac),
                       "ul": collision_time("ul", rate, mac)}
        self.t_err = {"dl": error_time("dl", rate, mac),
                      "ul": error_time("ul", rate, mac)}
        self.t_access_frame = {"dl": frame_time(mac.l_ps_poll, rate),
                               "ul": frame_time(mac.l_rts, rate)}
        self.t_data = frame_time(mac.l_data, rate)
        self.t_ack = frame_time(mac.l_ack, rate)
        self.t_cts = frame_time(mac.l_cts, rate)
        self.ul_arrivals = None
        self.ul_idx = 0
        self.ul_buffered = 0
        self.dl_arrivals = None
        self.dl_idx = 0
        self.dl_buffered = 0
        self.dl_ready = False
        self.rx = 0.0
        self.tx = 0.0
        self.id_ = 0.0

    # Per-outcome ledger updates for the station's own exchange.  The
    # frame-by-frame split of each outcome duration is fixed by the
    # exchange procedures (poll/data/ack for downlink, rts/cts/data/ack
    # for uplink); interframe spacings and the trailing DIFS land in idle.
    def ledger_success(self, direction: str, mac) -> None:
        if direction == "dl":
            self.tx += self.t_access_frame["dl"] + self.t_ack
            self.rx += self.t_data
            self.id_ += 2 * mac.t_sifs + mac.t_difs
        else:
            self.tx += self.t_access_frame["ul"] + self.t_data
            self.rx += self.t_cts + self.t_ack
            self.id_ += 3 * mac.t_sifs + mac.t_difs

    def ledger_error(self, direction: str, mac) -> None:
        if direction == "dl":
            self.tx += self.t_access_frame["dl"]
            self.rx += self.t_data
            self.id_ += mac.t_sifs + mac.t_difs
        else:
            self.tx += self.t_access_frame["ul"] + self.t_data
            self.rx += self.t_cts
            self.id_ += 2 * mac.t_sifs + mac.t_difs


def _arrival_times(rng, mean_interval: float, duration: float) -> np.ndarray:
    """Cumulative exponential arrival instants within [0, duration)."""
    times = []
    t = 0.0
    # draw in chunks; expected count is duration/mean_interval
    chunk = max(16, int(duration / mean_interval * 1.5) + 8)
    while t < duration:
        gaps = rng.exponential(mean_interval, chunk)
        for g in gaps:
            t += g
            if t >= duration:
                break
            times.append(t)
    return np.asarray(times)


class _Contender:
    __slots__ = ("sta", "cw", "backoff", "col", "err")

    def __init__(self, sta, cw_min):
        self.sta = sta
        self.cw = cw_min
        self.backoff = int(sta.rng.integers(0, cw_min))
        self.col = 0
        self.err = 0

    def redraw(self, cw_max):
        self.cw = min(2 * self.cw, cw_max)
        self.backoff = int(self.sta.rng.integers(0, self.cw))


class Simulation:
    def __init__(self, scenario: Scenario, n_periods: int, seed: int | None = None,
                 placements: list[StationPlacement] | None = None, trace=None):
        scenario.validate()
        self.scenario = scenario
        self.timing = derive_timing(scenario)   # raises on collapsed RAW
        self.n_periods = n_periods
        self.duration = n_periods * scenario.dtim_period
        self.seed = scenario.seed if seed is None else seed
        self.trace = trace
        self._check_feasibility()

        if placements is None:
            placements = place_stations(scenario)
        seqs = np.random.SeedSequence(self.seed).spawn(scenario.n_sta + 1)
        self.ap_rng = np.random.default_rng(seqs[0])
        mac = scenario.mac
        self.stations = []
        for p in placements:
            page = p.station_id // 2048
            group = p.station_id % scenario.n_tim
            rng = np.random.default_rng(seqs[p.station_id + 1])
            self.stations.append(_Station(p.station_id, page, group,
                                          p.assigned_rate, rng, mac))

        self.members: dict[tuple[int, int], list[_Station]] = {}
        for s in self.stations:
            self.members.setdefault((s.page, s.group), []).append(s)

        self.dl_heap: list[tuple[float, int]] = []
        self.ul_heap: list[tuple[float, int]] = []
        for s in self.stations:
            s.ul_arrivals = _arrival_times(s.rng, scenario.mean_ul_interval, self.duration)
            s.dl_arrivals = _arrival_times(s.rng, scenario.mean_dl_interval, self.duration)
            if len(s.ul_arrivals):
                heapq.heappush(self.ul_heap, (float(s.ul_arrivals[0]), s.sid))
            if len(s.dl_arrivals):
                heapq.heappush(self.dl_heap, (float(s.dl_arrivals[0]), s.sid))

        self.ul_pending: dict[tuple[int, int], set[int]] = {
            key: set() for key in self.members}
        self.dl_pending: dict[tuple[int, int], set[int]] = {
            key: set() for key in self.members}

        self.dl_counters = PacketCounters()
        self.ul_counters = PacketCounters()
        self.channel_collisions = 0
        self.station_collisions = 0
        self.error_events = 0
        self.deferrals = 0
        # aggregate receive credits applied once at the end
        self._tim_listens: dict[tuple[int, int], int] = {
            key: 0 for key in self.members}
        self._mc_listens = [0] * self.timing.n_pages

    def _check_feasibility(self) -> None:
        # the post-DTIM interval is the smallest any station owns; if one
        # minimum-rate exchange cannot fit there, its group would starve
        t = self.timing
        s = self.scenario
        smallest_interval_raw = t.beacon_interval - t.t_dtim - t.t_mc
        for direction, beta in (("dl", s.beta_dl), ("ul", s.beta_ul)):
            if beta == 0.0:
                continue
            raw_len = smallest_interval_raw * beta
            need = exchange_time(direction, t.r_min, s.mac)
            if raw_len < need:
                raise InfeasibleConfigError(
                    f"{direction} RAW segment ({raw_len * 1e3:.2f} ms) cannot fit "
                    f"one exchange at the minimum rate ({need * 1e3:.2f} ms)")

    # ------------------------------------------------------------------
    def _log(self, t: float, kind: str, sid: int, detail: str = "") -> None:
        if self.trace is not None:
            self.trace.write(f"t={t:.9f} {kind} sta={sid} {detail}\n".rstrip() + "\n")

    def _pop_arrivals(self, heap, threshold, direction) -> None:
        pending = self.ul_pending if direction == "ul" else self.dl_pending
        while heap and heap[0][0] <= threshold:
            _, sid = heapq.heappop(heap)
            s = self.stations[sid]
            if direction == "ul":
                s.ul_buffered += 1
                s.ul_idx += 1
                nxt = s.ul_idx
                arr = s.ul_arrivals
            else:
                s.dl_buffered += 1
                s.dl_idx += 1
                nxt = s.dl_idx
                arr = s.dl_arrivals
            pending[(s.page, s.group)].add(sid)
            if nxt < len(arr):
                heapq.heappush(heap, (float(arr[nxt]), sid))

    def run(self) -> SimReport:
        s = self.scenario
        t = self.timing
        interval = t.beacon_interval
        for k in range(self.n_periods):
            period_start = k * s.dtim_period
            for page in range(t.n_pages):
                page_start = period_start + page * s.n_tim * interval
                self._pop_arrivals(self.dl_heap, page_start, "dl")
                # freeze this period's DTIM bitmap and the per-station
                # downlink service marks
                flagged = {}
                for g in range(s.n_tim):
                    key = (page, g)
                    members_pending = self.dl_pending.get(key, ())
                    flagged[g] = bool(members_pending)
                    for sid in members_pending:
                        self.stations[sid].dl_ready = True
                mc_present = s.p_mc > 0.0 and self.ap_rng.random() < s.p_mc
                if mc_present:
                    self._mc_listens[page] += 1
                for b in range(s.n_tim):
                    self._run_interval(page, b, page_start + b * interval,
                                       interval, flagged[b], mc_present and b == 0)
        return self._finish()

    def _run_interval(self, page: int, group: int, start: float,
                      interval: float, flagged: bool, mc_present: bool) -> None:
        s = self.scenario
        t = self.timing
        key = (page, group)
        if key not in self.members:
            return
        first = group == 0
        beacon_len = t.t_dtim if first else t.t_tim
        raw_start = start + beacon_len + (t.t_mc if first else 0.0)
        raw_avail = interval - beacon_len - (t.t_mc if first else 0.0)

        self._pop_arrivals(self.ul_heap, start, "ul")
        ul_set = self.ul_pending[key]
        dl_ready = [sid for sid in self.dl_pending[key]
                    if self.stations[sid].dl_ready]

        # TIM listening: every member of a flagged group wakes for the
        # beacon; stations with only uplink traffic wake as well.  The
        # post-DTIM interval has no TIM beacon (the DTIM itself carried
        # the bitmap) and the DTIM listen is credited globally.
        if not first:
            if flagged:
                self._tim_listens[key] += 1
            else:
                for sid in sorted(ul_set):
                    self.stations[sid].rx += t.t_tim

        dl_contenders = sorted(dl_ready)
        ul_contenders = sorted(ul_set)
        if mc_present and dl_contenders:
            # stations about to poll in the first RAW stay up through the
            # DIFS that closes the multicast slot
            for sid in dl_contenders:
                self.stations[sid].id_ += s.mac.t_difs

        pos = raw_start
        if s.beta_dl > 0.0 and dl_contenders:
            self._contend(dl_contenders, "dl", pos, pos + raw_avail * s.beta_dl)
        pos += raw_avail * s.beta_dl
        if s.beta_ul > 0.0 and ul_contenders:
            self._contend(ul_contenders, "ul", pos, pos + raw_avail * s.beta_ul)

    # ------------------------------------------------------------------
    def _contend(self, sids: list[int], direction: str,
                 seg_start: float, seg_end: float) -> None:
        mac = self.scenario.mac
        active = [_Contender(self.stations[sid], mac.cw_min) for sid in sids]
        now = seg_start
        while active:
            b_min = min(c.backoff for c in active)
            expiry = now + b_min * mac.t_slot
            if expiry > seg_end:
                # countdown cannot finish before the boundary
                for c in active:
                    c.sta.id_ += seg_end - now
                    self._defer(c.sta, direction, seg_end)
                return
            zeros, rest = [], []
            for c in active:
                c.sta.id_ += b_min * mac.t_slot
                if c.backoff == b_min:
                    zeros.append(c)
                else:
                    c.backoff -= b_min
                    rest.append(c)
            txers = []
            for c in zeros:
                if expiry + c.sta.t_exch[direction] <= seg_end:
                    txers.append(c)
                else:
                    self._defer(c.sta, direction, expiry)
            if not txers:
                active = rest
                now = expiry
                continue
            if len(txers) == 1:
                busy = self._exchange(txers[0], direction, expiry)
                if txers[0].backoff is not None:
                    rest.append(txers[0])
            else:
                busy = self._collision(txers, direction, expiry)
                rest.extend(c for c in txers if c.backoff is not None)
            # no transmission may spill past the owner group's segment
            assert expiry + busy <= seg_end + 1e-9, \
                "transmission crossed its RAW segment boundary"
            for c in rest:
                if c not in txers:
                    c.sta.id_ += busy
            now = expiry + busy
            active = sorted(rest, key=lambda c: c.sta.sid)

    def _exchange(self, c: _Contender, direction: str, now: float) -> float:
        """Single uncontested transmission; returns the channel-busy time."""
        mac = self.scenario.mac
        sta = c.sta
        p_e = mac.p_e_dl if direction == "dl" else mac.p_e_ul
        if sta.rng.random() < p_e:
            self.error_events += 1
            sta.ledger_error(direction, mac)
            c.err += 1
            self._log(now, "tx_error", sta.sid, direction)
            if c.err >= mac.m_err:
                self._drop(sta, direction, "error", now)
                c.backoff = None
            else:
                c.redraw(mac.cw_max)
            return sta.t_err[direction]
        sta.ledger_success(direction, mac)
        self._deliver(sta, direction, now)
        c.backoff = None
        return sta.t_exch[direction]

    def _collision(self, txers: list[_Contender], direction: str, now: float) -> float:
        mac = self.scenario.mac
        busy = max(c.sta.t_coll[direction] for c in txers)
        self.channel_collisions += 1
        self.station_collisions += len(txers)
        for c in txers:
            air = c.sta.t_access_frame[direction]
            c.sta.tx += air
            c.sta.id_ += busy - air
            c.col += 1
            self._log(now, "collision", c.sta.sid, direction)
            if c.col >= mac.m_col:
                self._drop(c.sta, direction, "collision", now)
                c.backoff = None
            else:
                c.redraw(mac.cw_max)
        return busy

    # ------------------------------------------------------------------
    def _counters(self, direction: str) -> PacketCounters:
        return self.dl_counters if direction == "dl" else self.ul_counters

    def _consume(self, sta: _Station, direction: str) -> None:
        key = (sta.page, sta.group)
        if direction == "dl":
            sta.dl_buffered -= 1
            sta.dl_ready = False
            if sta.dl_buffered == 0:
                self.dl_pending[key].discard(sta.sid)
        else:
            sta.ul_buffered -= 1
            if sta.ul_buffered == 0:
                self.ul_pending[key].discard(sta.sid)

    def _deliver(self, sta: _Station, direction: str, now: float) -> None:
        self._counters(direction).delivered += 1
        self._consume(sta, direction)
        self._log(now, "delivered", sta.sid, direction)

    def _drop(self, sta: _Station, direction: str, cause: str, now: float) -> None:
        counters = self._counters(direction)
        if cause == "collision":
            counters.dropped_collision += 1
        else:
            counters.dropped_error += 1
        self._consume(sta, direction)
        self._log(now, f"drop_{cause}", sta.sid, direction)

    def _defer(self, sta: _Station, direction: str, now: float) -> None:
        # packet stays buffered; mark the downlink one unserved so it is
        # re-announced next period
        self.deferrals += 1
        if direction == "dl":
            sta.dl_ready = False
        self._log(now, "defer", sta.sid, direction)

    # ------------------------------------------------------------------
    def _finish(self) -> SimReport:
        s = self.scenario
        t = self.timing
        # flush arrivals that landed after the last serviced boundary
        self._pop_arrivals(self.dl_heap, self.duration, "dl")
        self._pop_arrivals(self.ul_heap, self.duration, "ul")
        self.dl_counters.generated = int(sum(
            np.searchsorted(st.dl_arrivals, self.duration) for st in self.stations))
        self.ul_counters.generated = int(sum(
            np.searchsorted(st.ul_arrivals, self.duration) for st in self.stations))
        self.dl_counters.buffered = sum(st.dl_buffered for st in self.stations)
        self.ul_counters.buffered = sum(st.ul_buffered for st in self.stations)

        power = s.power
        t_data_minrate = frame_time(s.mac.l_data, t.r_min)
        n = s.n_sta
        fr = np.zeros(n)
        ftx = np.zeros(n)
        fid = np.zeros(n)
        for st in self.stations:
            st.rx += self.n_periods * t.t_dtim
            st.rx += self._tim_listens[(st.page, st.group)] * t.t_tim
            st.rx += self._mc_listens[st.page] * t_data_minrate
            fr[st.sid] = st.rx
            ftx[st.sid] = st.tx
            fid[st.sid] = st.id_
        awake = fr + ftx + fid
        if float(awake.max()) > self.duration * (1 + 1e-9):
            raise AssertionError("radio ledger exceeds the simulated duration")
        fsl = self.duration - awake
        per_sta_current = (fr * power.i_rx + ftx * power.i_tx
                           + fid * power.i_id + fsl * power.i_sl) / self.duration
        mean_current = float(per_sta_current.mean())
        return SimReport(
            scenario_name=s.name,
            n_sta=n,
            n_tim=s.n_tim,
            dtim_period=s.dtim_period,
            n_periods=self.n_periods,
            duration=self.duration,
            seed=self.seed,
            fractions_rx=float(fr.mean()) / self.duration,
            fractions_tx=float(ftx.mean()) / self.duration,
            fractions_id=float(fid.mean()) / self.duration,
            fractions_sl=float(fsl.mean()) / self.duration,
            mean_current_ma=mean_current,
            battery_lifetime_h=power.battery_capacity / mean_current,
            dl=self.dl_counters,
            ul=self.ul_counters,
            channel_collisions=self.channel_collisions,
            station_collisions=self.station_collisions,
            error_events=self.error_events,
            deferrals=self.deferrals,
            per_sta_current_ma=per_sta_current,
        )


def run(scenario: Scenario, n_periods: int, seed: int | None = None,
        placements: list[StationPlacement] | None = None, trace=None) -> SimReport:
    """Simulate ``n_periods`` DTIM periods of the scenario."""
    return Simulation(scenario, n_periods, seed=seed,
                      placements=placements, trace=trace).run()


def compare(model: EnergyReport, sim: SimReport) -> ComparisonReport:
    """Per-state and current deltas between the two backends."""
    mf = model.fractions()
    sf = sim.fractions()
    return ComparisonReport(
        model=model,
        sim=sim,
        delta_fractions={k: sf[k] - mf[k] for k in mf},
        delta_current_ma=sim.mean_current_ma - model.mean_current_ma,
        lifetime_ratio=sim.battery_lifetime_h / model.battery_lifetime_h,
    )
