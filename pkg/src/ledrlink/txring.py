"""Transmitter token-ring: serializes a parallel dual-rail word onto the
shared data/parity rails.

The ring is a chain of mutually exclusive token-cells, alternating odd and
even starting odd, one per bit (MSB first). The enabled cell drives the
rails with the bit and its phase parity, then enables its successor after
one bit cycle; the successor disables it on taking over. A validity check
gates the whole cycle: the ring only fires for words where every bit
position holds exactly one rail high. After the last bit the ring raises a
whole-word acknowledge and resets once the inputs return to empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .kernel import Kernel, Signal
from .ledr import Phase, WordLike, word_bits

DualRail = tuple[int, int]  # (false rail, true rail)

EMPTY: DualRail = (0, 0)


class RingBusyError(RuntimeError):
    """A new word was submitted while the ring still holds one."""


class MutualExclusionError(AssertionError):
    """More than one token-cell held the token at the same instant."""


def word_to_dual_rail(word: WordLike) -> list[DualRail]:
    """Dual-rail image of a word: bit 0 -> (1,0), bit 1 -> (0,1)."""
    return [(b ^ 1, b) for b in word_bits(word)]


def dual_rail_to_bits(rails: Sequence[DualRail]) -> list[int]:
    return [t for _f, t in rails]


@dataclass
class ValidityReport:
    """Result of the input validity check (drives TX.r)."""

    ok: bool
    empty_positions: list[int] = field(default_factory=list)
    illegal_positions: list[int] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validity_check(rails: Sequence[DualRail]) -> ValidityReport:
    """True iff every bit position holds exactly one of (f, t) high.

    Positions at (1,1) are flagged separately: that state is illegal under
    the dual-rail protocol, not merely not-yet-valid.
    """
    empty = [i for i, (f, t) in enumerate(rails) if f == 0 and t == 0]
    illegal = [i for i, (f, t) in enumerate(rails) if f == 1 and t == 1]
    return ValidityReport(not empty and not illegal, empty, illegal)


class TxTokenCell:
    """One stage of the transmit ring."""

    __slots__ = ("kind", "index", "has_token", "latched_bit", "en", "driven")

    def __init__(self, kind: Phase, index: int):
        self.kind = kind
        self.index = index
        self.has_token = False
        self.latched_bit: Optional[int] = None
        self.en = False
        self.driven = False

    def rail_drive(self) -> tuple[int, int]:
        """(data, parity) this cell pushes: odd inverts parity, even copies."""
        b = self.latched_bit
        return (b, b ^ 1) if self.kind is Phase.ODD else (b, b)

    def reset(self) -> None:
        self.has_token = False
        self.latched_bit = None
        self.en = False
        self.driven = False


class TxTokenRing:
    """Kernel process serializing words onto the shared rails.

    Timing: the first cell pushes the MSB `start_delay` after submission
    (the wake delay, `t_wk` by default), each following cell one bit cycle
    `t_d` later, and the word acknowledge `enc_a` rises one cycle after
    the last push. The acknowledge falls one cycle after the caller
    reports the inputs back at empty, completing the four-phase cycle.
    """

    def __init__(
        self,
        kernel: Kernel,
        width: int,
        t_d: int,
        t_wk: int,
        data: Signal,
        parity: Signal,
        name: str = "tx",
        on_enc_a: Optional[Callable[[int], None]] = None,
        on_idle: Optional[Callable[[], None]] = None,
    ):
        if width < 1:
            raise ValueError("ring width must be >= 1")
        self._kernel = kernel
        self.width = width
        self.t_d = t_d
        self.t_wk = t_wk
        self.data = data
        self.parity = parity
        self.on_enc_a = on_enc_a
        self.on_idle = on_idle
        self.txr = kernel.signal(f"{name}.txr")
        self.enc_a = kernel.signal(f"{name}.enc_a")
        self.cells = [
            TxTokenCell(Phase.ODD if i % 2 == 0 else Phase.EVEN, i) for i in range(width)
        ]
        self.busy = False
        self.stalled_invalid = False
        self.violations = 0
        self.max_tokens_held = 0
        self._tokens_held = 0
        self.words_serialized = 0

    # -- token bookkeeping (criterion: at most one holder, ever) --------

    def _acquire(self, cell: TxTokenCell) -> None:
        self._tokens_held += 1
        if self._tokens_held > 1:
            raise MutualExclusionError(
                f"TX cells would hold {self._tokens_held} tokens at t={self._kernel.now}"
            )
        self.max_tokens_held = max(self.max_tokens_held, self._tokens_held)
        cell.has_token = True

    def _release(self, cell: TxTokenCell) -> None:
        if not cell.driven:
            # disable arrived before this cell ever drove: exclusion broken
            self.violations += 1
        cell.has_token = False
        self._tokens_held -= 1

    # -- submission ------------------------------------------------------

    def submit(self, rails: Sequence[DualRail], start_delay: Optional[int] = None) -> ValidityReport:
        """Begin serializing a dual-rail word.

        Returns the validity report; an invalid word leaves TX.r low and
        the ring stalled (as the hardware would wait forever), which the
        link-level watchdog surfaces.
        """
        if self.busy or self.stalled_invalid:
            raise RingBusyError("ring already holds a word")
        if len(rails) != self.width:
            raise ValueError(f"word has {len(rails)} bits, ring is {self.width} wide")
        report = validity_check(rails)
        if not report.ok:
            self.stalled_invalid = True
            return report
        self.busy = True
        for cell, (_f, t) in zip(self.cells, rails):
            cell.latched_bit = t
            cell.en = False
            cell.driven = False
        self.txr.set(1)
        delay = self.t_wk if start_delay is None else start_delay
        self._kernel.schedule_in(delay, self._enable_cell, 0)
        return report

    def submit_word(self, word: WordLike, start_delay: Optional[int] = None) -> ValidityReport:
        return self.submit(word_to_dual_rail(word), start_delay)

    def _enable_cell(self, index: int) -> None:
        if index > 0:
            self._release(self.cells[index - 1])
        cell = self.cells[index]
        cell.en = True
        self._acquire(cell)
        d, p = cell.rail_drive()
        cell.driven = True
        self.data.set(d)
        self.parity.set(p)
        if index + 1 < self.width:
            self._kernel.schedule_in(self.t_d, self._enable_cell, index + 1)
        else:
            self._kernel.schedule_in(self.t_d, self._complete, None)

    def _complete(self, _payload) -> None:
        self._release(self.cells[-1])
        self.words_serialized += 1
        self.enc_a.set(1)
        if self.on_enc_a is not None:
            self.on_enc_a(self._kernel.now)

    def inputs_removed(self) -> None:
        """Caller signals the dual-rail inputs are back at empty.

        The acknowledge drops one bit cycle later and the ring resets.
        """
        self._kernel.schedule_in(self.t_d, self._reset, None)

    def _reset(self, _payload) -> None:
        for cell in self.cells:
            cell.reset()
        self.busy = False
        self.enc_a.set(0)
        if self.on_idle is not None:
            self.on_idle()
