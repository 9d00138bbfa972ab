"""Behavioral model of the LVDS driver/receiver pairs with instant on/off.

Each logical rail (data, parity) rides one differential pair. The pair's
common mode doubles as an out-of-band on/off channel: pulled to ground the
receiver is off and its digital output holds the last latched bit; driven
back to the reference level the receiver tracks the differential value
again. The common mode is modeled as a two-state level with a transition
latency, not a voltage ramp: the protocol only depends on the on/off
thresholds.

All pair phenomena are observed at the receiver inputs, so wire flight
time shifts data edges and the on/off envelope alike. Because words start
and end in the parity-equals-data state and the wake preamble repeats the
previous word's LSB, waking restores exactly the levels the receiver
latched: idle periods of any length produce no data transitions at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import Kernel, Signal

CM_GND = 0
CM_VREF = 1


@dataclass(frozen=True)
class PhyConfig:
    """Electrical-behavior knobs, durations in ps.

    wire_delay lumps PCB flight time with driver/receiver conversion
    latency; the default is calibrated so the single-event acknowledge
    round trip lands on the measured 31 ns. n_lsb_repeat (wake preamble
    length in bit cycles) is calibrated so the per-word on-time matches
    the measured 25.6 ns within 2%. vref/termination are recorded for
    power bookkeeping only and have no behavioral effect.
    """

    wake_on: int = 450
    wake_off: int = 500
    n_lsb_repeat: int = 6
    wire_delay: int = 2760
    wire_skew: int = 0
    vref_volts: float = 1.0
    termination_ohms: float = 50.0

    def __post_init__(self) -> None:
        if self.wake_on <= 0 or self.wake_off <= 0:
            raise ValueError("wake_on and wake_off must be > 0")
        if self.n_lsb_repeat < 1:
            raise ValueError("n_lsb_repeat must be >= 1")
        if self.wire_delay < 0 or self.wire_skew < 0:
            raise ValueError("wire delays must be >= 0")


class LvdsPair:
    """One differential pair: driver, wire, and instant on/off receiver.

    Exposed signals mirror what an oscilloscope sees at the receiver
    inputs: the two wires `f`/`t`, the common-mode level `cm`, plus the
    digitized output `out` that the receive ring consumes. While `cm` is
    at ground, `out` is frozen at the last latched bit no matter what the
    wires do.
    """

    def __init__(
        self,
        kernel: Kernel,
        name: str,
        line: Signal,
        wire_delay: int,
        wake_on: int,
        wake_off: int,
        trace: bool = False,
    ):
        self._kernel = kernel
        self._wire = wire_delay
        self._wake_on = wake_on
        self._wake_off = wake_off
        self._trace = trace
        self.line = line
        self.f = kernel.signal(f"{name}.f", initial=0, trace=trace)
        self.t = kernel.signal(f"{name}.t", initial=0, trace=trace)
        self.cm = kernel.signal(f"{name}.cm", initial=CM_GND, trace=trace)
        self.out = kernel.signal(f"{name}.out", initial=0, trace=trace)
        self.awake_tx = False
        self._rx_line = 0  # differential value as it stands at the receiver
        line.on_change(self._on_line)

    # -- driver side ------------------------------------------------------

    def _on_line(self, sig: Signal) -> None:
        if not self.awake_tx:
            return  # driver off: the wires cannot move
        self._kernel.schedule_in(self._wire, self._arrive, sig.value)

    def wakeup(self, previous_bit: int | None = None) -> None:
        """Turn the pair on; idempotent while already awake.

        The differential recovers to `previous_bit` (the repeated LSB of
        the previous word; defaults to the current line value) while the
        common mode ramps; the receiver is tracking again wake_on later.
        """
        if self.awake_tx:
            return
        self.awake_tx = True
        bit = self.line.value if previous_bit is None else previous_bit
        self._kernel.schedule_in(self._wire, self._arrive, bit)
        self._kernel.schedule_in(self._wake_on + self._wire, self._wake_cm, None)

    def sleep(self) -> None:
        """Pull both wires to ground; idempotent while already asleep."""
        if not self.awake_tx:
            return
        self.awake_tx = False
        self._kernel.schedule_in(self._wake_off + self._wire, self._sleep_arrive, None)

    # -- receiver side (all at +wire_delay) --------------------------------

    def _arrive(self, value: int) -> None:
        if self._trace:
            self.f.set(value ^ 1)
            self.t.set(value)
        self._rx_line = value
        if self.cm.value == CM_VREF:
            self.out.set(value)

    def _wake_cm(self, _payload) -> None:
        self.cm.set(CM_VREF)
        self.out.set(self._rx_line)  # snap to the line; normally a no-op

    def _sleep_arrive(self, _payload) -> None:
        self.cm.set(CM_GND)  # freeze first: the latch strengthens as the amp dies
        if self._trace:
            self.f.set(0)
            self.t.set(0)


@dataclass
class PhyLink:
    """The two pairs carrying one link direction (data + parity)."""

    data: LvdsPair
    parity: LvdsPair
    awake_time_total: int = 0
    words_on_air: int = 0
    _awake_since: int = field(default=0, repr=False)

    @staticmethod
    def build(
        kernel: Kernel,
        cfg: PhyConfig,
        data_line: Signal,
        parity_line: Signal,
        name: str = "phy",
        trace: bool = False,
    ) -> "PhyLink":
        d = LvdsPair(
            kernel, f"{name}.D", data_line, cfg.wire_delay, cfg.wake_on, cfg.wake_off, trace
        )
        p = LvdsPair(
            kernel,
            f"{name}.P",
            parity_line,
            cfg.wire_delay + cfg.wire_skew,
            cfg.wake_on,
            cfg.wake_off,
            trace,
        )
        return PhyLink(d, p)

    @property
    def awake(self) -> bool:
        return self.data.awake_tx

    def wakeup(self, kernel: Kernel, previous_bit: int | None = None) -> None:
        if not self.awake:
            self._awake_since = kernel.now
        self.data.wakeup(previous_bit)
        self.parity.wakeup(previous_bit)

    def sleep(self, kernel: Kernel) -> None:
        if self.awake:
            self.awake_time_total += kernel.now - self._awake_since
            self.words_on_air += 1
        self.data.sleep()
        self.parity.sleep()
