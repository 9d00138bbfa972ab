"""Receive token-ring: accept rules, oracle equivalence, timing violations."""

import random

import pytest

from ledrlink.kernel import Kernel
from ledrlink.ledr import EventWord, Phase, RailSymbol, encode_word
from ledrlink.rxring import RxTokenCell, RxTokenRing


class Harness:
    """Drives raw symbols into a ring and collects completed words."""

    def __init__(self, width=8, rx_cell_delay=300, accept=True):
        self.kernel = Kernel()
        self.data = self.kernel.signal("data")
        self.parity = self.kernel.signal("parity")
        self.words = []
        self.accept = accept
        self.ring = RxTokenRing(
            self.kernel, width, rx_cell_delay, self.data, self.parity, self._take
        )

    def _take(self, word):
        if self.accept:
            self.words.append(word)
        return self.accept

    def feed(self, symbols, spacing=670, start=0):
        """Schedule rail levels; identical consecutive symbols make no edge."""
        for i, sym in enumerate(symbols):
            self.kernel.schedule(start + i * spacing, self.data.set, sym.d)
            self.kernel.schedule(start + i * spacing, self.parity.set, sym.p)

    def run(self):
        self.kernel.run_to_quiescence()


class TestAcceptRules:
    def test_odd_cell_takes_odd_relation(self):
        cell = RxTokenCell(Phase.ODD, 0)
        assert cell.accepts(RailSymbol(1, 0))

    def test_odd_cell_ignores_even_relation(self):
        cell = RxTokenCell(Phase.ODD, 0)
        assert not cell.accepts(RailSymbol(1, 1))

    def test_even_cell_takes_even_relation(self):
        cell = RxTokenCell(Phase.EVEN, 1)
        assert cell.accepts(RailSymbol(0, 0))

    def test_latch_is_immutable_until_reset(self):
        cell = RxTokenCell(Phase.ODD, 0)
        cell.latch(1)
        with pytest.raises(AssertionError):
            cell.latch(0)
        cell.reset()
        cell.latch(0)
        assert cell.latched_bit == 0


class TestDeserialization:
    def test_encoded_word_reassembles(self):
        rng = random.Random(4)
        for width in (2, 8, 32):
            for _ in range(10):
                word = EventWord(rng.getrandbits(width), width)
                h = Harness(width=width)
                h.feed(encode_word(word))
                h.run()
                assert len(h.words) == 1
                assert h.words[0].bits == word.bits
                assert h.words[0].complete
                assert h.ring.violations == 0

    def test_idle_symbols_before_word_ignored(self):
        word = EventWord(0b1010_0110, 8)
        h = Harness(width=8)
        # the idle level repeats the previous LSB with parity == data;
        # holding it produces no edge, so the ring must see only the word
        idle = RailSymbol(0, 0)
        h.feed([idle] * 5 + encode_word(word))
        h.run()
        assert [w.bits for w in h.words] == [word.bits]
        assert h.ring.violations == 0

    def test_partial_word_holds_indefinitely(self):
        word = EventWord(0xAB, 8)
        h = Harness(width=8)
        h.feed(encode_word(word)[:-1])
        h.run()
        assert h.words == []
        assert h.ring.partial
        assert h.ring.bits_latched == 7

    def test_back_to_back_words_fifo_order(self):
        words = [EventWord(v, 8) for v in (0x12, 0x34, 0x56)]
        h = Harness(width=8)
        stream = []
        for w in words:
            stream.extend(encode_word(w))
        h.feed(stream)
        h.run()
        assert [w.bits for w in h.words] == [w.bits for w in words]

    def test_mutual_exclusion_high_water(self):
        h = Harness(width=32)
        h.feed(encode_word(EventWord(0xDEADBEEF, 32)))
        h.run()
        assert h.ring.max_tokens_held == 1


class TestTimingAssumption:
    def test_symbols_slower_than_cell_delay_pass(self):
        h = Harness(width=8, rx_cell_delay=300)
        h.feed(encode_word(EventWord(0x5A, 8)), spacing=670)
        h.run()
        assert h.ring.violations == 0
        assert len(h.words) == 1

    def test_symbols_faster_than_cell_delay_flagged(self):
        h = Harness(width=8, rx_cell_delay=900)
        word = EventWord(0x5A, 8)
        h.feed(encode_word(word), spacing=670)
        h.run()
        assert h.ring.violations > 0
        # never silent corruption: any completed word that differs from
        # the sent one must come with violations flagged (they are)
        for w in h.words:
            if w.bits != word.bits:
                assert h.ring.violations > 0

    def test_simultaneous_two_rail_change_is_violation(self):
        h = Harness(width=8)
        # force both rails to move in the same instant: illegal under LEDR
        h.kernel.schedule(100, h.data.set, 1)
        h.kernel.schedule(100, h.parity.set, 1)
        h.run()
        assert h.ring.simultaneous_edges == 1
        assert h.ring.violations == 1


class TestHandoff:
    def test_blocked_handoff_retries(self):
        h = Harness(width=8, accept=False)
        h.feed(encode_word(EventWord(0x77, 8)))
        h.run()
        assert h.ring.pending_handoff
        assert h.words == []
        h.accept = True
        h.ring.retry_handoff()
        assert not h.ring.pending_handoff
        assert len(h.words) == 1

    def test_edges_while_blocked_are_violations(self):
        h = Harness(width=2, accept=False)
        h.feed(encode_word(EventWord(0b10, 2)))
        h.run()
        assert h.ring.pending_handoff
        before = h.ring.violations
        h.feed([RailSymbol(1, 0)], start=h.kernel.now + 100)
        h.run()
        assert h.ring.violations == before + 1
