"""Receiver token-ring: rebuilds words from the shared rails one symbol at
a time.

Cells alternate odd/even starting odd. The cell holding the token accepts
a rail change only when the symbol's parity relation matches its kind
(odd takes parity != data, even takes parity == data), latches the data
bit after its processing delay, and passes the token on. Changes whose
relation does not match are ignored; that is what absorbs wake-up
repetitions of the previous word's LSB. After reset the first odd cell
holds the token and the implied previous relation is even (the
parity-equals-data idle state), so the first accepted symbol is the MSB.

The ring works correctly whenever its per-cell processing time stays
below the transmit bit cycle. When that timing assumption is violated a
rail change arrives while the token holder is still busy; the ring counts
a protocol violation for every such edge rather than silently accepting
corrupt data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .kernel import Kernel, Signal
from .ledr import Phase, RailSymbol, relation_of


@dataclass
class ReceivedWord:
    bits: list[int]
    complete: bool
    arrival_time: int

    @property
    def value(self) -> int:
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v


class RxTokenCell:
    __slots__ = ("kind", "index", "has_token", "latched_bit", "en", "out_v")

    def __init__(self, kind: Phase, index: int):
        self.kind = kind
        self.index = index
        self.has_token = False
        self.latched_bit: Optional[int] = None
        self.en = True
        self.out_v = False

    def accepts(self, symbol: RailSymbol) -> bool:
        """Relation filter: odd cells take p != d, even cells take p == d."""
        return self.en and relation_of(symbol) is self.kind

    def latch(self, bit: int) -> None:
        if self.out_v:
            raise AssertionError(f"RX cell {self.index} re-latched while out.v=1")
        self.latched_bit = bit
        self.out_v = True
        self.en = False

    def reset(self) -> None:
        self.has_token = False
        self.latched_bit = None
        self.en = True
        self.out_v = False


class RxTokenRing:
    """Kernel process deserializing the digitized rails into words.

    `on_word` is invoked with each completed ReceivedWord and must return
    True if the word was taken; returning False (output buffer full)
    leaves the ring holding the word until `retry_handoff` succeeds, and
    any rail edges arriving meanwhile are counted as violations.
    """

    def __init__(
        self,
        kernel: Kernel,
        width: int,
        rx_cell_delay: int,
        data: Signal,
        parity: Signal,
        on_word: Callable[[ReceivedWord], bool],
        name: str = "rx",
    ):
        if width < 1:
            raise ValueError("ring width must be >= 1")
        self._kernel = kernel
        self.width = width
        self.rx_cell_delay = rx_cell_delay
        self.data = data
        self.parity = parity
        self.on_word = on_word
        self.cells = [
            RxTokenCell(Phase.ODD if i % 2 == 0 else Phase.EVEN, i) for i in range(width)
        ]
        self.token_index = 0
        self.cells[0].has_token = True
        self._pending_symbol: Optional[RailSymbol] = None
        self._pending_word: Optional[ReceivedWord] = None
        self.violations = 0
        self.missed_symbols = 0
        self.simultaneous_edges = 0
        self.words_completed = 0
        self.max_tokens_held = 1
        self._tokens = 1
        self._last_edge_time = -1
        data.on_change(self._on_rail)
        parity.on_change(self._on_rail)

    # -- introspection ---------------------------------------------------

    @property
    def bits_latched(self) -> int:
        return self.token_index

    @property
    def partial(self) -> bool:
        """A word is underway: some bits latched but no handoff pending."""
        if self._pending_word is not None:
            return False
        return 0 < self.token_index < self.width or self._pending_symbol is not None

    @property
    def pending_handoff(self) -> bool:
        return self._pending_word is not None

    # -- rail observation --------------------------------------------------

    def _on_rail(self, _sig: Signal) -> None:
        now = self._kernel.now
        if now == self._last_edge_time:
            # both rails moved in the same instant: impossible under LEDR
            self.simultaneous_edges += 1
            self.violations += 1
            return
        self._last_edge_time = now
        if self._pending_word is not None or self._pending_symbol is not None:
            # token holder still busy: the transmitter outpaced the ring
            self.missed_symbols += 1
            self.violations += 1
            return
        symbol = RailSymbol(self.data.value, self.parity.value)
        cell = self.cells[self.token_index]
        if cell.accepts(symbol):
            self._pending_symbol = symbol
            self._kernel.schedule_in(self.rx_cell_delay, self._latch, symbol)
        # otherwise: relation mismatch, an idle repetition; take nothing

    def _latch(self, symbol: RailSymbol) -> None:
        cell = self.cells[self.token_index]
        cell.latch(symbol.d)
        self._pending_symbol = None
        cell.has_token = False
        self._tokens -= 1
        if self.token_index + 1 < self.width:
            self.token_index += 1
            nxt = self.cells[self.token_index]
            nxt.has_token = True
            self._tokens += 1
            if self._tokens > 1:
                raise AssertionError(f"RX ring holds {self._tokens} tokens at t={self._kernel.now}")
            self.max_tokens_held = max(self.max_tokens_held, self._tokens)
        else:
            word = ReceivedWord(
                [c.latched_bit for c in self.cells], True, self._kernel.now
            )
            self._hand_off(word)

    def _hand_off(self, word: ReceivedWord) -> None:
        if self.on_word(word):
            self.words_completed += 1
            self._pending_word = None
            self._reset_cells()
        else:
            self._pending_word = word

    def retry_handoff(self) -> None:
        if self._pending_word is not None:
            self._hand_off(self._pending_word)

    def _reset_cells(self) -> None:
        for cell in self.cells:
            cell.reset()
        self.token_index = 0
        self.cells[0].has_token = True
        self._tokens = 1
