"""Deterministic discrete-event simulation kernel.

Time is an integer count of picoseconds. Events scheduled for the same
tick fire in insertion order, so a given (configuration, seed) pair always
produces the same trace. Signals record their transitions and notify
listeners synchronously; delay lines replay transitions of one signal onto
another with a fixed delay plus optional bounded jitter.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass
from typing import Any, Callable, Optional

# 1 tick = 1 ps. Convenience multipliers for readable configs and tests.
PS = 1
NS = 1_000
US = 1_000_000
MS = 1_000_000_000
S = 1_000_000_000_000


class SchedulingInPastError(RuntimeError):
    """Raised when an event is scheduled before the current simulation time."""


@dataclass(frozen=True)
class SimEvent:
    """A scheduled state transition: fires `target(payload)` at `time`."""

    time: int
    seq: int
    target: Callable[[Any], None]
    payload: Any = None


@dataclass
class RunStats:
    events_fired: int
    final_time: int


class Signal:
    """A named binary (or small-integer) level with change notification.

    Setting the current value again is a no-op: it is not recorded and
    listeners are not notified. Transition history is kept only when
    `trace` is enabled, so long runs stay cheap.
    """

    __slots__ = ("name", "value", "last_change", "trace", "trace_base", "_listeners", "_kernel")

    def __init__(self, kernel: "Kernel", name: str, initial: int = 0, trace: bool = False):
        self._kernel = kernel
        self.name = name
        self.value = initial
        self.last_change = 0
        self.trace: Optional[list[tuple[int, int]]] = [] if trace else None
        self.trace_base = initial  # value the trace starts from
        self._listeners: list[Callable[["Signal"], None]] = []

    def set(self, value: int) -> None:
        if value == self.value:
            return
        self.value = value
        self.last_change = self._kernel.now
        if self.trace is not None:
            self.trace.append((self._kernel.now, value))
        for fn in self._listeners:
            fn(self)

    def on_change(self, fn: Callable[["Signal"], None]) -> None:
        self._listeners.append(fn)

    def enable_trace(self) -> None:
        if self.trace is None:
            self.trace = []
            self.trace_base = self.value

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Signal({self.name}={self.value}@{self.last_change})"


@dataclass(frozen=True)
class Jitter:
    """Bounded per-transition delay noise for delay lines.

    kind: "uniform" draws from [-bound, +bound]; "normal" draws from
    N(0, sigma) truncated to [-bound, +bound]. Samples are integers (ps).
    """

    kind: str
    bound: int
    sigma: float = 0.0

    @staticmethod
    def uniform(bound: int) -> "Jitter":
        return Jitter("uniform", bound)

    @staticmethod
    def normal(sigma: float, bound: Optional[int] = None) -> "Jitter":
        return Jitter("normal", int(bound if bound is not None else 3 * sigma), sigma)

    def sample(self, rng: random.Random) -> int:
        if self.kind == "uniform":
            return rng.randint(-self.bound, self.bound)
        if self.kind == "normal":
            x = rng.gauss(0.0, self.sigma)
            return max(-self.bound, min(self.bound, round(x)))
        raise ValueError(f"unknown jitter kind: {self.kind!r}")


class DelayLine:
    """Replays transitions of `source` onto `output` after delay (+ jitter).

    Per-transition jitter is drawn deterministically from `seed`. Sampled
    delays are clamped to stay positive and non-overtaking: a later input
    edge never emerges before an earlier one.
    """

    def __init__(
        self,
        kernel: "Kernel",
        source: Signal,
        delay: int,
        jitter: Optional[Jitter] = None,
        seed: int = 0,
        name: Optional[str] = None,
    ):
        if delay <= 0:
            raise ValueError("delay_line delay must be > 0")
        self._kernel = kernel
        self._delay = delay
        self._jitter = jitter
        self._rng = random.Random(seed) if jitter is not None else None
        self._last_out = 0
        self.output = kernel.signal(name or f"{source.name}.delayed", initial=source.value)
        source.on_change(self._on_input)

    def _on_input(self, sig: Signal) -> None:
        d = self._delay
        if self._jitter is not None:
            d = max(1, d + self._jitter.sample(self._rng))
        at = max(self._kernel.now + d, self._last_out)
        self._last_out = at
        self._kernel.schedule(at, self.output.set, sig.value)


class Kernel:
    """Single-threaded deterministic event kernel.

    Multiple independent kernels may run side by side (one per sweep
    point); instances share no mutable state.
    """

    def __init__(self) -> None:
        self.now = 0
        self.last_activity = 0
        self._queue: list[tuple[int, int, Callable[[Any], None], Any]] = []
        self._seq = itertools.count()
        self._signals: dict[str, Signal] = {}

    # -- scheduling ---------------------------------------------------

    def schedule(self, at: int, target: Callable[[Any], None], payload: Any = None) -> SimEvent:
        if at < self.now:
            raise SchedulingInPastError(
                f"event for {getattr(target, '__qualname__', target)!r} scheduled at "
                f"t={at} ps but current time is t={self.now} ps"
            )
        seq = next(self._seq)
        heapq.heappush(self._queue, (at, seq, target, payload))
        return SimEvent(at, seq, target, payload)

    def schedule_in(self, delay: int, target: Callable[[Any], None], payload: Any = None) -> None:
        # hot path: same as schedule() but skips the SimEvent handle
        if delay < 0:
            raise SchedulingInPastError(f"negative delay {delay} ps")
        heapq.heappush(self._queue, (self.now + delay, next(self._seq), target, payload))

    def run_until(self, deadline: int) -> RunStats:
        """Process every event with time <= deadline, in (time, seq) order."""
        fired = 0
        queue = self._queue
        while queue and queue[0][0] <= deadline:
            at, _seq, target, payload = heapq.heappop(queue)
            self.now = at
            self.last_activity = at
            target(payload)
            fired += 1
        return RunStats(fired, self.now)

    def run_to_quiescence(self, max_time: Optional[int] = None) -> RunStats:
        """Drain the queue entirely (or up to max_time)."""
        if max_time is not None:
            return self.run_until(max_time)
        fired = 0
        queue = self._queue
        while queue:
            at, _seq, target, payload = heapq.heappop(queue)
            self.now = at
            self.last_activity = at
            target(payload)
            fired += 1
        return RunStats(fired, self.now)

    @property
    def pending_events(self) -> int:
        return len(self._queue)

    # -- signals and delay elements ------------------------------------

    def signal(self, name: str, initial: int = 0, trace: bool = False) -> Signal:
        if name in self._signals:
            raise ValueError(f"duplicate signal name: {name!r}")
        sig = Signal(self, name, initial, trace)
        self._signals[name] = sig
        return sig

    def signals(self) -> dict[str, Signal]:
        return self._signals

    def delay_line(
        self,
        source: Signal,
        delay: int,
        jitter: Optional[Jitter] = None,
        seed: int = 0,
        name: Optional[str] = None,
    ) -> Signal:
        return DelayLine(self, source, delay, jitter, seed, name).output
