"""Link orchestration: latency, burst-mode overlap, credits, back-pressure,
loopback, watchdog."""

import pytest

from ledrlink.kernel import NS, US, S, Kernel
from ledrlink.ledr import EventWord
from ledrlink.link import ConfigError, Link, LinkConfig, run_loopback
from ledrlink.sources import BurstSource, PeriodicSource, PoissonSource, SaturatingSource


def run_stream(cfg=None, n=20, seed=3, source_cls=SaturatingSource, trace=False, **src_kw):
    k = Kernel()
    link = Link(k, cfg, trace=trace)
    src = source_cls(k, link, n, seed=seed, **src_kw)
    src.start()
    k.run_to_quiescence()
    return k, link, src, link.snapshot_stats()


class TestSingleEvent:
    def test_latency_31ns(self):
        k, link, _src, stats = run_stream(n=1)
        assert stats.first_word_latency == 31_000  # 31 ns with defaults
        assert abs(stats.first_word_latency - 31_000) <= 1_000

    def test_latency_decomposition(self):
        # independent oracle: walk the pipeline stages
        cfg = LinkConfig()
        last_symbol = cfg.t_wk + (cfg.phy.n_lsb_repeat + cfg.width - 1) * cfg.t_d
        expected = last_symbol + cfg.phy.wire_delay + cfg.rx_cell_delay + cfg.ack_wire_delay
        k, link, _src, stats = run_stream(n=1)
        assert stats.first_word_latency == expected

    def test_word_intact(self):
        k, link, src, stats = run_stream(n=1)
        assert [w.value for w in link.received] == src.sent_words
        assert stats.events_sent == stats.events_received == 1

    def test_latency_floor_invariant(self):
        # cannot beat the physics of the configured pipeline
        for overrides in (
            {},
            {"t_d": 1000},
            {"rx_cell_delay": 100},
            {"ack_wire_delay": 0},
        ):
            cfg = LinkConfig(**overrides)
            k, link, _src, stats = run_stream(cfg, n=1)
            floor = cfg.phy.wake_on + (cfg.phy.n_lsb_repeat + cfg.width) * cfg.t_d
            assert stats.first_word_latency >= floor


class TestSteadyState:
    def test_period_and_throughput(self):
        k, link, _src, stats = run_stream(n=40)
        assert stats.steady_period_ps == 27_860.0
        assert abs(stats.steady_period_ps - 28_000) <= 280  # 28 ns +- 1%
        assert abs(stats.throughput_eps - 35.7e6) <= 0.01 * 35.7e6

    def test_period_formula(self):
        # period = rail occupancy + recovery gap, for several configs
        for overrides in ({}, {"t_d": 500}, {"inter_event_gap": 3000}):
            cfg = LinkConfig(**overrides)
            k, link, _src, stats = run_stream(cfg, n=10)
            expected = (cfg.phy.n_lsb_repeat + cfg.width) * cfg.t_d + cfg.inter_event_gap
            assert stats.steady_period_ps == float(expected)

    def test_stream_lossless_in_order(self):
        k, link, src, stats = run_stream(n=200)
        assert [w.value for w in link.received] == src.sent_words
        assert stats.protocol_violations == 0

    def test_tracing_does_not_change_timing(self):
        _k1, _l1, _s1, plain = run_stream(n=15)
        _k2, _l2, _s2, traced = run_stream(n=15, trace=True)
        assert plain.completion_times == traced.completion_times
        assert plain.first_word_latency == traced.first_word_latency


class TestBurstMode:
    def test_second_word_starts_before_first_ack(self):
        k, link, _src, stats = run_stream(n=3, trace=True)
        txr_rises = [t for t, v in link.tx_ring.txr.trace if v == 1]
        ack_rises = [t for t, v in link.out_a.trace if v == 1]
        assert txr_rises[1] < ack_rises[0]

    def test_credit_safety_depth_1(self):
        # with one credit, word k+1 must wait for out.a of word k
        cfg = LinkConfig(queue_depth=1)
        k, link, _src, stats = run_stream(cfg, n=5, trace=True)
        txr_rises = [t for t, v in link.tx_ring.txr.trace if v == 1]
        ack_rises = [t for t, v in link.out_a.trace if v == 1]
        # same-tick is fine: the credit is processed before the start
        for i in range(1, len(txr_rises)):
            assert txr_rises[i] >= ack_rises[i - 1]

    def test_credit_safety_depth_k(self):
        # rail activity for word k+depth never precedes out.a of word k
        for depth in (2, 4):
            cfg = LinkConfig(queue_depth=depth)
            k, link, _src, stats = run_stream(cfg, n=depth * 3, trace=True)
            txr_rises = [t for t, v in link.tx_ring.txr.trace if v == 1]
            ack_rises = [t for t, v in link.out_a.trace if v == 1]
            for i in range(depth, len(txr_rises)):
                assert txr_rises[i] >= ack_rises[i - depth]
            assert [w.value for w in link.received]  # sanity: data flowed


class TestArrivalProcesses:
    def test_periodic_below_capacity(self):
        k, link, src, stats = run_stream(
            n=30, source_cls=PeriodicSource, rate_eps=10e6
        )
        assert [w.value for w in link.received] == src.sent_words
        assert stats.protocol_violations == 0

    def test_periodic_above_capacity_back_pressures_losslessly(self):
        k, link, src, stats = run_stream(
            n=50, source_cls=PeriodicSource, rate_eps=100e6
        )
        assert [w.value for w in link.received] == src.sent_words
        assert stats.back_pressured > 0

    def test_poisson_bursty_arrivals(self):
        k, link, src, stats = run_stream(
            n=120, source_cls=PoissonSource, rate_eps=30e6, seed=17
        )
        assert [w.value for w in link.received] == src.sent_words
        assert stats.protocol_violations == 0

    def test_burst_source(self):
        k, link, src, stats = run_stream(
            n=40, source_cls=BurstSource, burst_size=7, gap_ps=150_000
        )
        assert [w.value for w in link.received] == src.sent_words

    def test_send_event_rejects_when_full_no_drop(self):
        k = Kernel()
        link = Link(k, LinkConfig(queue_depth=2))
        assert link.send_event(1)
        assert link.send_event(2)
        assert not link.send_event(3)  # full: back-pressured, not dropped
        k.run_to_quiescence()
        assert [w.value for w in link.received] == [1, 2]
        assert link.stats.back_pressured == 1


class TestIdleRobustness:
    @pytest.mark.parametrize("gap", [1 * NS, 1 * US, 1 * S])
    def test_idle_gaps_never_corrupt(self, gap):
        k = Kernel()
        link = Link(k, trace=True)
        words = [0x0000_0001, 0xFFFF_FFFE, 0xA5A5_5A5A]
        boundaries = []
        for value in words:
            link.send_event(value)
            k.run_to_quiescence()
            assert link.quiescent
            assert k.pending_events == 0  # idle: nothing scheduled at all
            boundaries.append(k.now)
            k.schedule(k.now + gap, lambda _: None)  # let time pass
            k.run_to_quiescence()
        assert [w.value for w in link.received] == words
        assert link.snapshot_stats().protocol_violations == 0
        # zero transitions on the pairs inside the gaps
        for sig in (
            link.phy.data.f,
            link.phy.data.t,
            link.phy.parity.f,
            link.phy.parity.t,
            link.phy.data.cm,
            link.phy.parity.cm,
        ):
            for i, b in enumerate(boundaries[:-1]):
                window = [t for t, _v in sig.trace if b < t <= b + gap]
                assert window == [], f"{sig.name} moved during idle gap {i}"


class TestWatchdog:
    def test_healthy_run_no_diagnosis(self):
        k, link, _src, _stats = run_stream(n=5)
        assert link.watchdog_check(timeout=10_000) is None

    def test_invalid_dual_rail_diagnosed_as_validity_stall(self):
        k = Kernel()
        link = Link(k)
        rails = [(1, 0)] * 31 + [(0, 0)]  # one empty position
        link.inject_raw(rails)
        k.run_to_quiescence()
        diag = link.watchdog_check(timeout=10_000)
        assert diag is not None
        assert diag.phase == "TX validity stall"

    def test_blocked_consumer_diagnosed_and_recoverable(self):
        k = Kernel()
        gate = {"open": False}
        link = Link(k, consumer=lambda w: gate["open"] and link._collect(w))
        for v in (1, 2, 3):
            link.send_event(v)
        k.run_to_quiescence()
        diag = link.watchdog_check(timeout=10_000)
        assert diag is not None and diag.phase == "RX output blocked"
        gate["open"] = True
        link.rx_resume()
        k.run_to_quiescence()
        assert [w.value for w in link.received] == [1, 2, 3]
        assert link.quiescent

    def test_rx_cell_delay_past_bit_cycle_flags(self):
        cfg = LinkConfig(rx_cell_delay=900)  # > t_d = 670
        k, link, src, stats = run_stream(cfg, n=5)
        diag = link.watchdog_check(timeout=10_000)
        assert stats.protocol_violations > 0 or diag is not None

    def test_timing_sweep_never_silently_corrupts(self):
        t_d = 670
        for rcd in range(200, 880, 60):
            cfg = LinkConfig(rx_cell_delay=rcd)
            k, link, src, stats = run_stream(cfg, n=8)
            data_ok = [w.value for w in link.received] == src.sent_words
            if rcd < t_d:
                assert stats.protocol_violations == 0 and data_ok, f"rcd={rcd}"
            elif not data_ok:
                # corruption is only acceptable when flagged
                assert stats.protocol_violations > 0, f"rcd={rcd}"


class TestLoopback:
    def test_single_event_returns_unmodified(self):
        stats, sent, got = run_loopback(lambda w: w, 1)
        assert got == sent
        assert stats.events_received == 1

    def test_increment_router_applied_once_per_hop(self):
        stats, sent, got = run_loopback(lambda w: (w + 1) & 0xFFFFFFFF, 20)
        assert got == [(w + 1) & 0xFFFFFFFF for w in sent]

    def test_sustained_throughput(self):
        stats, sent, got = run_loopback(lambda w: w, 300)
        assert got == sent
        assert abs(stats.throughput_eps - 35.7e6) <= 0.01 * 35.7e6
        assert stats.protocol_violations == 0

    def test_rejects_other_topologies(self):
        with pytest.raises(ConfigError):
            run_loopback(lambda w: w, 1, chip_count=3)


class TestConfig:
    def test_width_must_be_even(self):
        with pytest.raises(ConfigError):
            LinkConfig(width=31)

    def test_gap_must_cover_turnaround(self):
        with pytest.raises(ConfigError):
            LinkConfig(inter_event_gap=100)

    def test_word_width_mismatch_rejected(self):
        k = Kernel()
        link = Link(k)
        with pytest.raises(ConfigError):
            link.send_event(EventWord(1, 8))

    def test_derived_quantities(self):
        cfg = LinkConfig()
        assert cfg.word_on_time == 25_910
        assert cfg.steady_period == 27_860
        assert cfg.first_symbol_offset == 4_470
