"""Seeded random bit streams.

Every random decision in the package is made from one canonical stream of
bits: the 64-bit output words of numpy's PCG64 generator, read least
significant bit first.  The pure-Python reference simulator and the compiled
kernels consume the same stream in the same order, which is what makes them
comparable bit for bit.
"""

from __future__ import annotations

import numpy as np

WORD_BITS = 64
_REFILL_WORDS = 1 << 14


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Derive an independent 64-bit seed for one trial of an experiment."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(trial_index)])
    return int(ss.generate_state(1, np.uint64)[0])


class BitStream:
    """Sequential access to uniform random bits.

    Words are pulled from the generator in blocks; ``cursor`` indexes the next
    unread bit of ``words``.  Compiled kernels get the raw buffer through
    :meth:`reserve` and hand back the new cursor.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.bitgen = np.random.PCG64(self.seed)
        self.words = np.zeros(0, dtype=np.uint64)
        self.cursor = 0
        self.drawn_words = 0

    @property
    def available(self) -> int:
        return self.words.size * WORD_BITS - self.cursor

    def reserve(self, min_words: int = _REFILL_WORDS) -> None:
        """Make sure at least ``min_words`` unread words are buffered."""
        unread_words = self.available // WORD_BITS
        if unread_words >= min_words:
            return
        drop = self.cursor // WORD_BITS
        kept = self.words[drop:]
        self.cursor -= drop * WORD_BITS
        extra = max(min_words, _REFILL_WORDS)
        fresh = self.bitgen.random_raw(extra).astype(np.uint64, copy=False)
        self.drawn_words += extra
        self.words = np.concatenate([kept, fresh])

    def bits(self, k: int) -> int:
        """Next ``k`` bits (k <= 64) as an integer, first bit least significant."""
        if k == 0:
            return 0
        if self.available < k:
            self.reserve(2)
        w, s = divmod(self.cursor, WORD_BITS)
        value = int(self.words[w]) >> s
        if s + k > WORD_BITS:
            value |= int(self.words[w + 1]) << (WORD_BITS - s)
        self.cursor += k
        return value & ((1 << k) - 1)

    def bit(self) -> int:
        if self.cursor >= self.words.size * WORD_BITS:
            self.reserve(2)
        w, s = divmod(self.cursor, WORD_BITS)
        self.cursor += 1
        return (int(self.words[w]) >> s) & 1

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection on ceil(log2 n) bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = (n - 1).bit_length()
        while True:
            r = self.bits(k)
            if r < n:
                return r

    @property
    def consumed(self) -> int:
        """Bits read since the stream was seeded."""
        return self.drawn_words * WORD_BITS - self.available

    def get_state(self) -> dict:
        # canonical: independent of how far ahead the buffer was filled
        return {"seed": self.seed, "consumed_bits": self.consumed}

    @classmethod
    def from_state(cls, state: dict) -> "BitStream":
        obj = cls(state["seed"])
        words, bits = divmod(int(state["consumed_bits"]), WORD_BITS)
        obj.bitgen.advance(words)
        obj.drawn_words = words
        obj.reserve(1)
        obj.cursor = bits
        return obj
