"""Power model: leakage floors, per-event charge, linearity, trace energy."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ledrlink.kernel import Kernel
from ledrlink.link import Link, LinkConfig, LinkStats
from ledrlink.power import (
    DEFAULT_PEAK_RATE_EPS,
    RX,
    TX,
    PowerParams,
    RateError,
    charge_per_bit,
    current_at_rate,
    energy_of_trace,
    summary_ratios,
)
from ledrlink.sources import SaturatingSource


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


class TestAnchors:
    def test_floor_tx(self):
        assert current_at_rate(0, TX) == 80e-9

    def test_floor_rx(self):
        assert current_at_rate(0, RX) == 42e-9

    def test_10k_rate(self):
        assert within(current_at_rate(10e3, TX), 5.2e-6, 0.10)
        assert within(current_at_rate(10e3, RX), 1.05e-6, 0.10)

    def test_peak_rate(self):
        assert within(current_at_rate(35.7e6, TX), 19.3e-3, 0.05)
        assert within(current_at_rate(35.7e6, RX), 3.57e-3, 0.05)

    def test_sub_microamp_below_1k(self):
        total = current_at_rate(1e3, TX) + current_at_rate(1e3, RX)
        assert total < 1e-6

    def test_charge_fits_both_anchor_points(self):
        # the fitted per-event charges must agree with both the peak-rate
        # and the 10k-rate measurements within 10%
        p = PowerParams()
        assert within(p.q_event_tx, 19.3e-3 / 35.7e6, 0.10)
        assert within(p.q_event_tx, 5.2e-6 / 10e3, 0.10)
        assert within(p.q_event_rx, 3.57e-3 / 35.7e6, 0.10)
        assert within(p.q_event_rx, 1.05e-6 / 10e3, 0.10)


class TestSummary:
    def test_p_max(self):
        assert within(summary_ratios().p_max_amps, 22.9e-3, 0.05)

    def test_p_min_exact(self):
        assert summary_ratios().p_min_amps == pytest.approx(0.122e-6, abs=0)

    def test_ratio(self):
        assert within(summary_ratios().ratio, 187.7e3, 0.05)

    def test_static_power_is_220nw(self):
        # 122 nA * 1.8 V: quoted as roughly 220 nW static
        p = PowerParams()
        static_w = (p.i_leak_tx + p.i_leak_rx) * p.vdd
        assert within(static_w, 220e-9, 0.01)


class TestDomain:
    def test_rate_above_peak_rejected(self):
        with pytest.raises(RateError):
            current_at_rate(DEFAULT_PEAK_RATE_EPS * 1.01, TX)

    def test_negative_rate_rejected(self):
        with pytest.raises(RateError):
            current_at_rate(-1, TX)

    def test_bad_side_rejected(self):
        with pytest.raises(ValueError):
            current_at_rate(0, "both")

    def test_negative_params_rejected(self):
        with pytest.raises(ValueError):
            PowerParams(i_leak_tx=-1e-9)

    def test_peak_constant_matches_link_calibration(self):
        assert DEFAULT_PEAK_RATE_EPS == pytest.approx(LinkConfig().peak_rate_eps)


@given(
    a=st.floats(0, DEFAULT_PEAK_RATE_EPS / 2),
    b=st.floats(0, DEFAULT_PEAK_RATE_EPS / 2),
    side=st.sampled_from([TX, RX]),
)
def test_affine_linearity(a, b, side):
    p = PowerParams()
    lhs = current_at_rate(a, side, p) + current_at_rate(b, side, p) - p.floor(side)
    rhs = current_at_rate(a + b, side, p)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-18)


class TestTraceEnergy:
    def test_zero_events_over_one_second(self):
        stats = LinkStats(events_received=0, sim_time_ps=10**12)
        p = PowerParams()
        e = energy_of_trace(stats, p)
        assert e.energy_joules == pytest.approx(p.vdd * (80e-9 + 42e-9) * 1.0)

    def test_10k_events_over_one_second_matches_rate_model(self):
        stats = LinkStats(events_received=10_000, sim_time_ps=10**12)
        e = energy_of_trace(stats)
        assert e.avg_current_tx == pytest.approx(current_at_rate(10e3, TX), rel=0.01)
        assert e.avg_current_rx == pytest.approx(current_at_rate(10e3, RX), rel=0.01)

    def test_half_rate_is_midpoint(self):
        full = energy_of_trace(LinkStats(events_received=20_000, sim_time_ps=10**12))
        half = energy_of_trace(LinkStats(events_received=10_000, sim_time_ps=10**12))
        idle = energy_of_trace(LinkStats(events_received=0, sim_time_ps=10**12))
        assert half.avg_current_tx == pytest.approx(
            (full.avg_current_tx + idle.avg_current_tx) / 2
        )

    def test_zero_duration_rejected(self):
        with pytest.raises(ValueError):
            energy_of_trace(LinkStats(events_received=0, sim_time_ps=0))

    def test_simulated_run_self_consistency(self):
        # average current from a real simulated trace equals the analytic
        # model at the observed rate within 1%
        k = Kernel()
        link = Link(k)
        src = SaturatingSource(k, link, 64, seed=9)
        src.start()
        k.run_to_quiescence()
        stats = link.snapshot_stats()
        e = energy_of_trace(stats)
        assert e.avg_current_tx == pytest.approx(
            current_at_rate(e.rate_eps, TX), rel=0.01
        )


def test_per_bit_view():
    p = PowerParams()
    assert charge_per_bit(p, TX) == pytest.approx(p.q_event_tx / 38)
