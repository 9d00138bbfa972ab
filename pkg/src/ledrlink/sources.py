"""Synthetic event sources for driving a link: saturating, periodic,
Poisson, burst.

These stand in for the on-chip stimulus generator of a real system. Every
source produces `n_events` seeded-random words and honors back-pressure:
a word that meets a full input buffer waits in the source's backlog and
is injected as soon as a slot frees, never dropped. Fixed seeds make runs
reproducible and let tests compare sent against received words.
"""

from __future__ import annotations

import random
from collections import deque

from .kernel import Kernel
from .ledr import EventWord
from .link import Link


class EventSource:
    """Base class: word generation, backlog, and back-pressure handling."""

    def __init__(self, kernel: Kernel, link: Link, n_events: int, seed: int = 1):
        if n_events < 0:
            raise ValueError("n_events must be >= 0")
        self.kernel = kernel
        self.link = link
        self.n_events = n_events
        self.sent_words: list[int] = []
        self._rng = random.Random(seed)
        self._backlog: deque[EventWord] = deque()
        self._generated = 0
        link.on_input_space(self._on_space)

    def start(self) -> None:
        raise NotImplementedError

    @property
    def exhausted(self) -> bool:
        return self._generated >= self.n_events and not self._backlog

    def _gen(self) -> EventWord:
        self._generated += 1
        return EventWord(self._rng.getrandbits(self.link.cfg.width), self.link.cfg.width)

    def _pump(self) -> None:
        while self._backlog and self.link.send_event(self._backlog[0]):
            self.sent_words.append(self._backlog.popleft().value)

    def _on_space(self) -> None:
        self._pump()


class SaturatingSource(EventSource):
    """Keeps the input buffer full until all n_events words are in."""

    def start(self) -> None:
        self._refill()

    def _refill(self) -> None:
        self._pump()
        while not self._backlog and self._generated < self.n_events:
            word = self._gen()
            if self.link.send_event(word):
                self.sent_words.append(word.value)
            else:
                self._backlog.append(word)

    def _on_space(self) -> None:
        self._refill()


class PeriodicSource(EventSource):
    """One word every 1/rate seconds; blocked words inject late, in order."""

    def __init__(self, kernel: Kernel, link: Link, n_events: int, rate_eps: float, seed: int = 1):
        super().__init__(kernel, link, n_events, seed)
        if rate_eps <= 0:
            raise ValueError("rate must be > 0")
        self.period = max(1, round(1e12 / rate_eps))

    def start(self) -> None:
        if self.n_events > 0:
            self.kernel.schedule(self.kernel.now, self._arrive, None)

    def _next_gap(self) -> int:
        return self.period

    def _arrive(self, _payload) -> None:
        self._backlog.append(self._gen())
        if self._generated < self.n_events:
            self.kernel.schedule_in(self._next_gap(), self._arrive, None)
        self._pump()


class PoissonSource(PeriodicSource):
    """Exponential inter-arrival gaps with the given mean rate."""

    def _next_gap(self) -> int:
        return max(1, round(self._rng.expovariate(1.0 / self.period)))


class BurstSource(EventSource):
    """Bursts of `burst_size` back-to-back words, `gap_ps` between bursts."""

    def __init__(
        self,
        kernel: Kernel,
        link: Link,
        n_events: int,
        burst_size: int,
        gap_ps: int,
        seed: int = 1,
    ):
        super().__init__(kernel, link, n_events, seed)
        if burst_size < 1:
            raise ValueError("burst size must be >= 1")
        self.burst_size = burst_size
        self.gap_ps = max(1, gap_ps)

    def start(self) -> None:
        if self.n_events > 0:
            self.kernel.schedule(self.kernel.now, self._burst, None)

    def _burst(self, _payload) -> None:
        for _ in range(min(self.burst_size, self.n_events - self._generated)):
            self._backlog.append(self._gen())
        if self._generated < self.n_events:
            self.kernel.schedule_in(self.gap_ps, self._burst, None)
        self._pump()
