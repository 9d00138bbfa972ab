"""End-to-end link orchestration: input buffer, burst-mode word-level
acknowledge with credit prefetching, output buffer, and the full
transmission cycle across two simulated chips.

One word's life, with defaults (ps, transmitter timeline):

    t=0       TX.r rises, drivers wake (word valid, credit available)
    450       wake ramp done; wires hold the repeated previous LSB (P=D)
    450+6*670 first real symbol (MSB) on the rails
    ...       one symbol per 670 ps bit cycle
    25910     Enc.a rises; drivers sleep; input slot freed
    25240     last symbol driven; at the receiver +wire, latched +300
    31000     out.a back at the transmitter (+ack wire): one credit home

Successive words overlap the acknowledge path (burst mode): the sender
keeps going as long as the control queue holds credits, so the steady
period is just the rail occupancy plus the inter-event recovery gap:
(n_lsb_repeat + W) * t_d + inter_event_gap = 27.86 ns by default. The
inter-event gap is measured from Enc.a to the instant the receiver is
awake again for the next word, so the next word's wake ramp overlaps the
tail of the gap.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .kernel import Kernel
from .ledr import EventWord
from .phy import PhyConfig, PhyLink
from .rxring import ReceivedWord, RxTokenRing
from .txring import DualRail, TxTokenRing, word_to_dual_rail


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LinkConfig:
    """All tunable delays, widths, queue depths, and PHY overheads.

    Durations in integer ps. The control queue and the output buffer share
    one depth: a pre-stored acknowledge credit exists for exactly every
    output slot, which is what makes the burst mode lossless.
    """

    width: int = 32
    t_d: int = 670
    t_wk: int = 450
    queue_depth: int = 4
    phy: PhyConfig = field(default_factory=PhyConfig)
    rx_cell_delay: int = 300
    ack_wire_delay: int = 2700
    inter_event_gap: int = 2400

    def __post_init__(self) -> None:
        if self.width < 2 or self.width % 2 != 0:
            raise ConfigError(f"width must be a positive even integer, got {self.width}")
        if self.t_d <= 0:
            raise ConfigError("t_d must be > 0")
        if self.t_wk < 0:
            raise ConfigError("t_wk must be >= 0")
        if self.queue_depth < 1:
            raise ConfigError("queue_depth must be >= 1")
        if self.rx_cell_delay <= 0:
            raise ConfigError("rx_cell_delay must be > 0")
        if self.ack_wire_delay < 0:
            raise ConfigError("ack_wire_delay must be >= 0")
        if self.inter_event_gap < max(self.phy.wake_on, self.phy.wake_off):
            raise ConfigError(
                "inter_event_gap must cover the on/off turnaround "
                f"(>= max(wake_on, wake_off) = "
                f"{max(self.phy.wake_on, self.phy.wake_off)} ps)"
            )

    # -- derived timing ---------------------------------------------------

    @property
    def first_symbol_offset(self) -> int:
        """TX.r rise to MSB on the rails: wake delay plus preamble hold."""
        return self.t_wk + self.phy.n_lsb_repeat * self.t_d

    @property
    def word_on_time(self) -> int:
        """TX.r rise to Enc.a: the per-word awake window."""
        return self.t_wk + (self.phy.n_lsb_repeat + self.width) * self.t_d

    @property
    def steady_period(self) -> int:
        """Back-to-back word spacing: rail occupancy plus recovery gap."""
        return (self.phy.n_lsb_repeat + self.width) * self.t_d + self.inter_event_gap

    @property
    def peak_rate_eps(self) -> float:
        return 1e12 / self.steady_period


@dataclass
class LinkStats:
    """Counters and measured timing for one run."""

    events_sent: int = 0
    events_received: int = 0
    first_word_latency: int = 0  # ps; TX.r rise to out.a rise, first word
    awake_time_total: int = 0  # ps
    protocol_violations: int = 0
    back_pressured: int = 0
    sim_time_ps: int = 0
    completion_times: list[int] = field(default_factory=list)

    @property
    def steady_period_ps(self) -> float:
        """Mean spacing of word completions, first interval dropped as warmup."""
        times = self.completion_times
        if len(times) < 3:
            return 0.0
        return (times[-1] - times[1]) / (len(times) - 2)

    @property
    def throughput_eps(self) -> float:
        times = self.completion_times
        if len(times) < 2:
            return 0.0
        return (len(times) - 1) / ((times[-1] - times[0]) * 1e-12)


@dataclass(frozen=True)
class StallDiagnosis:
    phase: str
    detail: str


class Link:
    """One link direction between two chips.

    `consumer(word)` receives completed words in arrival order and returns
    True to take a word; returning False back-pressures the receive side
    (the acknowledge for that word is withheld until `rx_resume`). The
    default consumer collects words into `self.received`.
    """

    def __init__(
        self,
        kernel: Kernel,
        config: Optional[LinkConfig] = None,
        name: str = "link",
        consumer: Optional[Callable[[ReceivedWord], bool]] = None,
        trace: bool = False,
    ):
        self.kernel = kernel
        self.cfg = config if config is not None else LinkConfig()
        self.name = name
        self.stats = LinkStats()
        self.received: list[ReceivedWord] = []
        self._consumer = consumer if consumer is not None else self._collect
        cfg = self.cfg

        self.data_line = kernel.signal(f"{name}.data")
        self.parity_line = kernel.signal(f"{name}.parity")
        self.phy = PhyLink.build(kernel, cfg.phy, self.data_line, self.parity_line, name, trace)
        self.tx_ring = TxTokenRing(
            kernel,
            cfg.width,
            cfg.t_d,
            cfg.t_wk,
            self.data_line,
            self.parity_line,
            name=f"{name}.tx",
            on_enc_a=self._on_enc_a,
            on_idle=self._on_tx_idle,
        )
        self.rx_ring = RxTokenRing(
            kernel,
            cfg.width,
            cfg.rx_cell_delay,
            self.phy.data.out,
            self.phy.parity.out,
            self._on_word,
            name=f"{name}.rx",
        )
        self.out_a = kernel.signal(f"{name}.out_a", trace=trace)

        self._input: deque[Sequence[DualRail]] = deque()
        self._output: deque[ReceivedWord] = deque()
        self._outstanding = 0  # words sent whose out.a has not returned
        self._tx_occupied = False  # a word holds the TX side, TX.r to Enc.a fall
        self._next_start = 0
        self._start_scheduled = False
        self._word_start_time = 0
        self._first_txr_time: Optional[int] = None
        self._first_ack_time: Optional[int] = None
        self._space_listeners: list[Callable[[], None]] = []
        if trace:
            self.tx_ring.txr.enable_trace()
            self.tx_ring.enc_a.enable_trace()

    # -- public interface --------------------------------------------------

    def send_event(self, word: EventWord | int) -> bool:
        """Queue a word for transmission. False means the input buffer is
        full; nothing is dropped, retry after on_input_space fires."""
        if isinstance(word, int):
            word = EventWord(word, self.cfg.width)
        elif word.width != self.cfg.width:
            raise ConfigError(f"word width {word.width} != link width {self.cfg.width}")
        if len(self._input) >= self.cfg.queue_depth:
            self.stats.back_pressured += 1
            return False
        self._input.append(word_to_dual_rail(word))
        self.stats.events_sent += 1
        self._try_start(None)
        return True

    def inject_raw(self, rails: Sequence[DualRail]) -> None:
        """Queue an arbitrary dual-rail pattern (fault injection)."""
        if len(self._input) >= self.cfg.queue_depth:
            raise ConfigError("input buffer full")
        self._input.append(list(rails))
        self.stats.events_sent += 1
        self._try_start(None)

    def on_input_space(self, fn: Callable[[], None]) -> None:
        self._space_listeners.append(fn)

    def rx_resume(self) -> None:
        """Drain the output buffer after a consumer freed up."""
        self._drain_output()
        if self.rx_ring.pending_handoff and len(self._output) < self.cfg.queue_depth:
            self.rx_ring.retry_handoff()

    @property
    def quiescent(self) -> bool:
        return (
            not self._input
            and not self._tx_occupied
            and not self.tx_ring.stalled_invalid
            and not self.rx_ring.partial
            and not self.rx_ring.pending_handoff
            and not self._output
            and self._outstanding == 0
        )

    def snapshot_stats(self) -> LinkStats:
        """Stats with the violation and awake totals folded in."""
        self.stats.protocol_violations = self.tx_ring.violations + self.rx_ring.violations
        self.stats.awake_time_total = self.phy.awake_time_total
        self.stats.sim_time_ps = self.kernel.now
        return self.stats

    def watchdog_check(self, timeout: int) -> Optional[StallDiagnosis]:
        """Diagnose which handshake phase stalled, if any.

        A stall is pending work with no transition for `timeout` ps; when
        the event queue is empty that silence is guaranteed to last
        forever, so the diagnosis is immediate.
        """
        if self.quiescent:
            return None
        idle_for = self.kernel.now - self.kernel.last_activity
        starved = self.kernel.pending_events == 0 or idle_for >= timeout
        if not starved:
            return None
        if self.tx_ring.stalled_invalid:
            return StallDiagnosis(
                "TX validity stall",
                "input word failed the validity check; TX.r never rose",
            )
        if self._tx_occupied:
            return StallDiagnosis("TX waiting on Enc.a", "serialization never completed")
        if self.rx_ring.partial:
            return StallDiagnosis(
                "RX partial word",
                f"{self.rx_ring.bits_latched}/{self.cfg.width} bits latched",
            )
        if self._output or self.rx_ring.pending_handoff:
            return StallDiagnosis("RX output blocked", "consumer not taking words")
        if self._outstanding:
            return StallDiagnosis("awaiting out.a", f"{self._outstanding} unacked words")
        return StallDiagnosis("input pending", "word queued but transmit never started")

    # -- transmit cycle ------------------------------------------------------

    def _try_start(self, _payload) -> None:
        if self._tx_occupied or not self._input or self._outstanding >= self.cfg.queue_depth:
            return
        now = self.kernel.now
        if now < self._next_start:
            if not self._start_scheduled:
                self._start_scheduled = True
                self.kernel.schedule(self._next_start, self._start_retry, None)
            return
        rails = self._input[0]
        self._tx_occupied = True
        self._word_start_time = now
        if self._first_txr_time is None:
            self._first_txr_time = now
        report = self.tx_ring.submit(rails, start_delay=self.cfg.first_symbol_offset)
        if not report.ok:
            return  # TX.r stays low; the watchdog will name this stall
        self.phy.wakeup(self.kernel)

    def _start_retry(self, _payload) -> None:
        self._start_scheduled = False
        self._try_start(None)

    def _on_enc_a(self, now: int) -> None:
        self.phy.sleep(self.kernel)
        self.tx_ring.txr.set(0)
        self._input.popleft()
        self._outstanding += 1
        self._next_start = now + self.cfg.inter_event_gap - self.cfg.phy.wake_on
        self.tx_ring.inputs_removed()
        for fn in list(self._space_listeners):
            fn()

    def _on_tx_idle(self) -> None:
        self._tx_occupied = False
        self._try_start(None)

    # -- receive side ------------------------------------------------------

    def _on_word(self, word: ReceivedWord) -> bool:
        if len(self._output) >= self.cfg.queue_depth:
            return False
        self._output.append(word)
        self._drain_output()
        return True

    def _drain_output(self) -> None:
        while self._output and self._consumer(self._output[0]):
            word = self._output.popleft()
            self.stats.events_received += 1
            self.stats.completion_times.append(word.arrival_time)
            self.kernel.schedule_in(self.cfg.ack_wire_delay, self._ack_arrive, None)

    def _collect(self, word: ReceivedWord) -> bool:
        self.received.append(word)
        return True

    def _ack_arrive(self, _payload) -> None:
        self.out_a.set(1)
        self.kernel.schedule_in(self.cfg.t_d, self.out_a.set, 0)
        self._outstanding -= 1
        if self._first_ack_time is None and self._first_txr_time is not None:
            self._first_ack_time = self.kernel.now
            self.stats.first_word_latency = self._first_ack_time - self._first_txr_time
        self._try_start(None)


def default_config(**overrides) -> LinkConfig:
    """LinkConfig with flat overrides; PhyConfig fields may be mixed in."""
    phy_fields = set(PhyConfig.__dataclass_fields__)
    phy_over = {k: v for k, v in overrides.items() if k in phy_fields}
    link_over = {k: v for k, v in overrides.items() if k not in phy_fields}
    if phy_over:
        if "phy" in link_over:
            raise ConfigError("give either phy= or individual phy fields, not both")
        link_over["phy"] = PhyConfig(**phy_over)
    return LinkConfig(**link_over)


def run_loopback(
    router: Callable[[int], int],
    n_events: int,
    config: Optional[LinkConfig] = None,
    chip_count: int = 2,
    max_time: Optional[int] = None,
) -> tuple[LinkStats, list[int], list[int]]:
    """Circulate events chip1 -> chip2 -> (router) -> chip1.

    Returns (loop stats, words sent by chip1, words collected at chip1).
    The stats view is the full loop: completions are arrivals back at
    chip1, so throughput and period describe the sustained circulation.
    """
    if chip_count != 2:
        raise ConfigError("only the two-chip loopback topology is modeled")
    if n_events < 1:
        raise ConfigError("n_events must be >= 1")
    cfg = config if config is not None else LinkConfig()
    kernel = Kernel()

    backward = Link(kernel, cfg, name="c2c1")

    def route_and_forward(word: ReceivedWord) -> bool:
        mapped = router(word.value) & ((1 << cfg.width) - 1)
        return backward.send_event(EventWord(mapped, cfg.width))

    forward = Link(kernel, cfg, name="c1c2", consumer=route_and_forward)
    backward.on_input_space(forward.rx_resume)

    sent: list[int] = []
    rng = random.Random(0xAE5)

    def feed() -> None:
        while len(sent) < n_events:
            value = rng.getrandbits(cfg.width)
            if not forward.send_event(EventWord(value, cfg.width)):
                return
            sent.append(value)

    forward.on_input_space(feed)
    feed()
    kernel.run_to_quiescence(max_time)

    stats = LinkStats(
        events_sent=forward.stats.events_sent,
        events_received=backward.stats.events_received,
        first_word_latency=(
            backward.stats.completion_times[0] if backward.stats.completion_times else 0
        ),
        awake_time_total=forward.phy.awake_time_total + backward.phy.awake_time_total,
        protocol_violations=(
            forward.snapshot_stats().protocol_violations
            + backward.snapshot_stats().protocol_violations
        ),
        sim_time_ps=kernel.now,
        completion_times=list(backward.stats.completion_times),
    )
    collected = [w.value for w in backward.received]
    return stats, sent, collected
