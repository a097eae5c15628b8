"""Traffic and contention probabilities on the collision/error retry lattice.

An access attempt either collides (probability ``p_c``, incrementing the
collision count i), completes with a corrupted DATA frame (probability
``(1 - p_c) * p_e``, incrementing the error count j), or succeeds.  A
packet is dropped once i reaches the collision retry limit or j reaches
the error retry limit.  The walk over (i, j) states is absorbing, so the
success and drop probabilities below partition the unit interval exactly
(when no RAW-boundary losses apply).
"""

from __future__ import annotations

from math import comb


def packet_probability(dtim_period: float, mean_interval: float) -> float:
    """Probability that a packet awaits service in one DTIM period.

    Low-load approximation: the period length over the expected packet
    spacing, clamped to 1.
    """
    if dtim_period <= 0 or mean_interval <= 0:
        raise ValueError("packet_probability: arguments must be > 0")
    return min(1.0, dtim_period / mean_interval)


def collision_probability(p_pending: float, n_sta_group: float, cw_min: int) -> float:
    """Collision probability of the first contention frame in a group slot.

    Each of the other ``n_sta_group - 1`` group members transmits in the
    same backoff slot with probability ``p_pending / cw_min``.  Groups with
    at most one (fractional) member cannot collide.
    """
    if n_sta_group <= 1.0 or p_pending <= 0.0:
        return 0.0
    return 1.0 - (1.0 - p_pending / cw_min) ** (n_sta_group - 1.0)


def group_flag_probability(p_dl: float, n_sta_group: float) -> float:
    """Probability a DTIM beacon flags the group as holding downlink data."""
    return 1.0 - (1.0 - p_dl) ** n_sta_group


def either_probability(p: float, q: float) -> float:
    """Probability of the union of two independent events."""
    return p + q - p * q


def success_probability(i: int, j: int, p_c: float, p_e: float,
                        p_w: float = 1.0) -> float:
    """Probability of a success after exactly i collisions and j errors.

    The i + j failed attempts may interleave in any order; ``p_w`` is the
    RAW-boundary fit indicator for the (i, j) state.
    """
    if i < 0 or j < 0:
        raise ValueError("success_probability: i and j must be >= 0")
    return (comb(i + j, i) * p_c ** i * p_e ** j
            * (1.0 - p_c) ** (j + 1) * (1.0 - p_e) * p_w)


def no_success_probability(i: int, j: int, p_c: float, p_e: float,
                           p_w: float = 1.0, dropped_by: str = "error") -> float:
    """Probability of abandoning a packet at retry state (i, j).

    ``dropped_by`` names the counter whose limit was hit, i.e. which kind
    of failure the final attempt was: ``"error"`` means the j-th error
    ended the packet (so j equals the error retry limit), ``"collision"``
    means the i-th collision did (i equals the collision retry limit).
    Only the preceding i + j - 1 failures may interleave freely, which is
    what makes the absorbing-state probabilities sum to one.
    """
    if i < 0 or j < 0:
        raise ValueError("no_success_probability: i and j must be >= 0")
    if dropped_by == "error":
        if j < 1:
            raise ValueError("no_success_probability: an error drop needs j >= 1")
        n_orderings = comb(i + j - 1, i)
    elif dropped_by == "collision":
        if i < 1:
            raise ValueError("no_success_probability: a collision drop needs i >= 1")
        n_orderings = comb(i + j - 1, j)
    else:
        raise ValueError(f"no_success_probability: unknown dropped_by '{dropped_by}'")
    return n_orderings * p_c ** i * p_e ** j * (1.0 - p_c) ** j * p_w


def mean_backoff_slots(stages: int, cw_min: int, cw_max: int) -> float:
    """Expected total backoff, in slots, across stages 0..stages.

    The window starts at cw_min + 1 and doubles per retry, saturating at
    cw_max + 1; each stage contributes half its window on average.
    """
    total = 0.0
    for k in range(stages + 1):
        total += min(2 ** k * (cw_min + 1), cw_max + 1) / 2.0
    return total


def raw_fit(i: int, j: int, n_contenders: float, p_c: float, p_e: float,
            t_exchange: float, t_collision: float, t_error: float,
            t_raw: float) -> float:
    """RAW-boundary fit indicator (1.0 fits, 0.0 crosses).

    On average half the group's contenders occupy the channel first, each
    with the collision/error/success mix implied by (p_c, p_e); the
    observed station then needs room for its own i collisions, j errored
    exchanges and one full exchange before the segment ends.
    """
    foreign = (n_contenders / 2.0) * (
        (1.0 - p_c) * (1.0 - p_e) * t_exchange
        + p_c * t_collision
        + (1.0 - p_c) * p_e * t_error)
    own = i * t_collision + j * t_error + t_exchange
    return 1.0 if foreign + own <= t_raw else 0.0
