"""Traffic/contention probabilities and the retry-lattice decomposition."""

import math

import mpmath
import pytest

from ahpower.probabilities import (
    collision_probability, either_probability, group_flag_probability,
    mean_backoff_slots, no_success_probability, packet_probability, raw_fit,
    success_probability,
)


class TestPacketProbability:
    def test_reference_loads(self):
        assert packet_probability(1.6, 240.0) == pytest.approx(1.6 / 240, rel=1e-12)
        assert packet_probability(1.6, 240.0) == pytest.approx(0.00667, abs=5e-5)
        assert packet_probability(1.6, 50.0) == pytest.approx(0.032, rel=1e-12)

    def test_clamped_at_one(self):
        assert packet_probability(2.0, 1.0) == 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            packet_probability(0.0, 10.0)


class TestCollisionProbability:
    def test_no_traffic(self):
        assert collision_probability(0.0, 400.0, 16) == 0.0

    def test_single_member_group(self):
        assert collision_probability(0.5, 1.0, 16) == 0.0

    def test_fractional_group_below_one(self):
        # fewer than one station per group on average: no contenders
        assert collision_probability(0.9, 0.47, 16) == 0.0

    def test_derived_reference_value(self):
        # independent high-precision evaluation of 1-(1-0.0133/16)^436.5
        with mpmath.workdps(40):
            expected = float(1 - (1 - mpmath.mpf("0.0133") / 16) ** mpmath.mpf("436.5"))
        got = collision_probability(0.0133, 437.5, 16)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(0.3044, abs=2e-4)

    def test_monotone_in_load_and_group_size(self):
        base = collision_probability(0.02, 200.0, 16)
        assert collision_probability(0.04, 200.0, 16) > base
        assert collision_probability(0.02, 400.0, 16) > base


class TestSuccessProbability:
    def test_clean_channel(self):
        assert success_probability(0, 0, 0.0, 0.0, 1.0) == 1.0

    def test_direct_product(self):
        assert success_probability(0, 0, 0.5, 0.1, 1.0) == pytest.approx(0.45, rel=1e-12)

    def test_binomial_interleaving(self):
        # two orderings of one collision and one error
        assert success_probability(1, 1, 0.5, 0.1, 1.0) == pytest.approx(
            2 * 0.5 * 0.1 * 0.25 * 0.9, rel=1e-12)

    def test_boundary_indicator_scales(self):
        assert success_probability(0, 0, 0.2, 0.1, 0.0) == 0.0


class TestNoSuccessProbability:
    def test_error_drop_direct_product(self):
        assert no_success_probability(0, 1, 0.2, 0.1, 1.0, dropped_by="error") \
            == pytest.approx(0.08, rel=1e-12)

    def test_no_collisions_means_no_collision_drop(self):
        assert no_success_probability(7, 0, 0.0, 0.1, 1.0, dropped_by="collision") == 0.0

    def test_final_attempt_is_constrained(self):
        # the error (or collision) ending the packet cannot be reordered:
        # with one prior collision the coefficient stays 1, not 2
        assert no_success_probability(1, 1, 0.5, 0.1, 1.0, dropped_by="error") \
            == pytest.approx(0.5 * 0.1 * 0.5, rel=1e-12)

    def test_requires_matching_counter(self):
        with pytest.raises(ValueError):
            no_success_probability(3, 0, 0.2, 0.1, dropped_by="error")
        with pytest.raises(ValueError):
            no_success_probability(0, 3, 0.2, 0.1, dropped_by="collision")


@pytest.mark.parametrize("m_col,m_err", [(7, 1), (1, 1), (2, 1), (3, 4), (7, 3)])
def test_lattice_decomposition_sums_to_one(m_col, m_err):
    """Brute-force: success + error drops + collision drops cover everything."""
    grid = [k / 10 for k in range(10)]
    worst = 0.0
    for p_c in grid:
        for p_e in grid:
            total = sum(success_probability(i, j, p_c, p_e, 1.0)
                        for i in range(m_col) for j in range(m_err))
            total += sum(no_success_probability(i, m_err, p_c, p_e, 1.0, "error")
                         for i in range(m_col))
            total += sum(no_success_probability(m_col, j, p_c, p_e, 1.0, "collision")
                         for j in range(m_err))
            worst = max(worst, abs(total - 1.0))
    assert worst < 1e-12


def test_lattice_decomposition_matches_monte_carlo():
    """Simulate the retry walk directly and compare the drop split."""
    import random
    rng = random.Random(1234)
    p_c, p_e, m_col, m_err = 0.3, 0.2, 4, 2
    n = 200_000
    outcomes = {"success": 0, "error": 0, "collision": 0}
    for _ in range(n):
        i = j = 0
        while True:
            if rng.random() < p_c:
                i += 1
                if i == m_col:
                    outcomes["collision"] += 1
                    break
            elif rng.random() < p_e:
                j += 1
                if j == m_err:
                    outcomes["error"] += 1
                    break
            else:
                outcomes["success"] += 1
                break
    succ = sum(success_probability(i, j, p_c, p_e, 1.0)
               for i in range(m_col) for j in range(m_err))
    err = sum(no_success_probability(i, m_err, p_c, p_e, 1.0, "error")
              for i in range(m_col))
    col = sum(no_success_probability(m_col, j, p_c, p_e, 1.0, "collision")
              for j in range(m_err))
    assert outcomes["success"] / n == pytest.approx(succ, abs=4e-3)
    assert outcomes["error"] / n == pytest.approx(err, abs=4e-3)
    assert outcomes["collision"] / n == pytest.approx(col, abs=4e-3)


class TestBackoff:
    def test_single_stage_mean(self):
        assert mean_backoff_slots(0, 16, 1024) == pytest.approx(8.5, rel=1e-12)

    def test_growth_and_saturation(self):
        # 17/2 + 34/2 + ... doubling until the 1025 cap
        expected = sum(min(2 ** k * 17, 1025) for k in range(8)) / 2
        assert mean_backoff_slots(7, 16, 1024) == pytest.approx(expected, rel=1e-12)

    def test_cap_applies(self):
        big = mean_backoff_slots(20, 16, 1024)
        assert big - mean_backoff_slots(19, 16, 1024) == pytest.approx(1025 / 2, rel=1e-12)


class TestRawFit:
    def test_alone_and_roomy(self):
        assert raw_fit(0, 0, 0.0, 0.0, 0.0, 4e-3, 1e-3, 3e-3, 50e-3) == 1.0

    def test_zero_segment_never_fits(self):
        for i in range(3):
            for j in range(2):
                assert raw_fit(i, j, 0.0, 0.0, 0.0, 4e-3, 1e-3, 3e-3, 0.0) == 0.0

    def test_monotone_in_retries(self):
        args = dict(n_contenders=6.0, p_c=0.3, p_e=0.1,
                    t_exchange=4e-3, t_collision=1e-3, t_error=3e-3,
                    t_raw=20e-3)
        fits = [raw_fit(i, 0, **args) for i in range(12)]
        # once it stops fitting it never fits again
        assert all(a >= b for a, b in zip(fits, fits[1:]))
        assert fits[0] == 1.0 and fits[-1] == 0.0


def test_union_and_flag_probability():
    assert either_probability(0.2, 0.3) == pytest.approx(0.44, rel=1e-12)
    assert group_flag_probability(0.00667, 437.5) == pytest.approx(
        1 - (1 - 0.00667) ** 437.5, rel=1e-12)
    assert math.isclose(group_flag_probability(0.0, 100.0), 0.0)
