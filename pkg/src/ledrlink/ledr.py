"""Level-encoded dual-rail (LEDR) encoder/decoder.

Pure functions, no simulation state. Each bit is carried by one symbol on
two rails: the data rail holds the bit value, the parity rail encodes the
alternating odd/even phase. In the odd phase the parity rail is the
inverted bit, in the even phase it equals the bit, so consecutive symbols
differ in exactly one rail and every symbol is self-identifying (the
decoder needs no clock). These functions also serve as the reference
oracle for the token-ring state machines.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union


class ProtocolViolation(ValueError):
    """A rail pattern that cannot occur under single-transition signaling."""


class Phase(enum.Enum):
    ODD = "odd"
    EVEN = "even"

    @property
    def opposite(self) -> "Phase":
        return Phase.EVEN if self is Phase.ODD else Phase.ODD


class RailSymbol(NamedTuple):
    """One code point: data rail d, parity rail p."""

    d: int
    p: int


def relation_of(symbol: RailSymbol) -> Phase:
    """Even iff the rails agree, odd iff they differ."""
    return Phase.EVEN if symbol.d == symbol.p else Phase.ODD


@dataclass(frozen=True)
class EventWord:
    """A fixed-width address-event payload, MSB first.

    Width must be even: the last bit of an even-width word lands on an
    even phase, which keeps the parity-equals-data idle state consistent
    between words.
    """

    value: int
    width: int = 32

    def __post_init__(self) -> None:
        if self.width < 2 or self.width % 2 != 0:
            raise ValueError(f"word width must be a positive even integer, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value:#x} does not fit in {self.width} bits")

    @property
    def bits(self) -> list[int]:
        return [(self.value >> (self.width - 1 - i)) & 1 for i in range(self.width)]

    @staticmethod
    def from_bits(bits: Sequence[int]) -> "EventWord":
        value = 0
        for b in bits:
            value = (value << 1) | (b & 1)
        return EventWord(value, len(bits))


WordLike = Union[EventWord, Sequence[int]]


def word_bits(word: WordLike) -> Sequence[int]:
    return word.bits if isinstance(word, EventWord) else word


def encode_word(word: WordLike, start_phase: Phase = Phase.ODD) -> list[RailSymbol]:
    """Encode bits MSB-first into rail symbols, phases alternating.

    The default start phase is odd: the first (MSB) symbol is taken by the
    first odd token-cell of a receiving ring.
    """
    bits = word_bits(word)
    if len(bits) < 1:
        raise ValueError("cannot encode an empty word")
    out = []
    phase = start_phase
    for b in bits:
        b &= 1
        p = b ^ 1 if phase is Phase.ODD else b
        out.append(RailSymbol(b, p))
        phase = phase.opposite
    return out


def decode_stream(
    symbols: Iterable[RailSymbol], initial_relation: Phase
) -> tuple[list[int], Phase]:
    """Decode a symbol stream; returns (bits, final phase relation).

    A symbol is consumed as a new bit iff its rail relation differs from
    the previously consumed symbol's relation. Symbols repeating the
    previous relation and value carry no transition and are ignored, which
    is what makes wake-up repetitions of the previous word's LSB harmless.

    Raises ProtocolViolation for a symbol that repeats the previous
    relation with a different data value: that would require both rails to
    change within one phase, which single-transition signaling forbids.
    """
    bits: list[int] = []
    last_rel = initial_relation
    last_d: int | None = None
    for sym in symbols:
        rel = relation_of(sym)
        if rel is last_rel:
            if last_d is None:
                last_d = sym.d  # leading idle repetition of an unseen value
            elif sym.d != last_d:
                raise ProtocolViolation(
                    f"symbol {tuple(sym)} repeats relation {rel.value} with a new value: "
                    "two rails changed within one phase"
                )
            continue
        bits.append(sym.d)
        last_rel = rel
        last_d = sym.d
    return bits, last_rel
