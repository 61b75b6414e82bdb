"""2-Motzkin paths, Dyck paths, and their counting functions.

A 2-Motzkin path of length m is a word over {U, H, I, D} in which no
prefix contains more D's than U's and the whole word balances.  U/D are
up/down steps; H and I are two distinguishable colors of level step.
There are catalan(m + 1) such words.  Symbols are stored as ASCII bytes
so file round-trips are bit-exact and inner-loop comparisons stay cheap.
"""

from __future__ import annotations

import math
from typing import Iterator, NamedTuple

from .errors import (
    CapExceededError,
    InvalidSymbolError,
    NegativePrefixError,
    UnbalancedError,
)

U, H, I, D = 0x55, 0x48, 0x49, 0x44  # ASCII "U", "H", "I", "D"
ALPHABET = frozenset((U, H, I, D))

# Canonical symbol order for enumeration and lexicographic comparisons.
SYMBOL_ORDER = bytes((U, H, I, D))

ENUMERATION_CAP = 12


def _first_unmatched_up(symbols: bytes) -> int:
    """Index of the first U whose matching D never arrives."""
    # A U opening at height h is unmatched iff the path never returns to
    # height h afterwards.
    height = 0
    suffix_min = _suffix_min_heights(symbols)
    for idx, s in enumerate(symbols):
        if s == U:
            if suffix_min[idx + 1] > height:
                return idx
            height += 1
        elif s == D:
            height -= 1
    raise AssertionError("no unmatched U in an unbalanced word")


def _suffix_min_heights(symbols: bytes) -> list[int]:
    """suffix_min[i] = min height over positions i..end (heights after each step)."""
    n = len(symbols)
    heights = [0] * (n + 1)
    h = 0
    for idx, s in enumerate(symbols):
        if s == U:
            h += 1
        elif s == D:
            h -= 1
        heights[idx + 1] = h
    suffix = [0] * (n + 1)
    running = heights[n]
    for idx in range(n, -1, -1):
        running = min(running, heights[idx])
        suffix[idx] = running
    return suffix


def _check_word(word: str | bytes | bytearray) -> bytes:
    """Validate a raw word and return its canonical bytes form."""
    symbols = word.encode("ascii", errors="replace") if isinstance(word, str) else bytes(word)
    height = 0
    for idx, s in enumerate(symbols):
        if s not in ALPHABET:
            raise InvalidSymbolError(f"symbol {chr(s)!r} not in U/H/I/D", idx)
        if s == U:
            height += 1
        elif s == D:
            height -= 1
            if height < 0:
                raise NegativePrefixError("path dips below the axis", idx)
    if height != 0:
        raise UnbalancedError("up steps exceed down steps", _first_unmatched_up(symbols))
    return symbols


class TwoMotzkinPath:
    """Immutable validated 2-Motzkin path.

    Instances hash and compare by their symbol bytes, so they can key
    dictionaries and sets directly.
    """

    __slots__ = ("symbols",)

    symbols: bytes

    def __init__(self, word: str | bytes | bytearray):
        object.__setattr__(self, "symbols", _check_word(word))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __reduce__(self):
        return (type(self), (self.symbols,))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    @classmethod
    def _trusted(cls, symbols: bytes) -> "TwoMotzkinPath":
        """Wrap bytes known to be valid without re-scanning them."""
        self = object.__new__(cls)
        object.__setattr__(self, "symbols", symbols)
        return self

    @property
    def word(self) -> str:
        return self.symbols.decode("ascii")

    def counts(self) -> "SymbolCounts":
        return SymbolCounts(
            u=self.symbols.count(U),
            h=self.symbols.count(H),
            i=self.symbols.count(I),
            d=self.symbols.count(D),
        )

    def skeleton(self) -> "DyckPath":
        return DyckPath._trusted(bytes(s for s in self.symbols if s == U or s == D))

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        if isinstance(other, TwoMotzkinPath):
            return self.symbols == other.symbols
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.word!r})"


class DyckPath(TwoMotzkinPath):
    """A 2-Motzkin path with no level steps (only U and D)."""

    __slots__ = ()

    def __init__(self, word: str | bytes | bytearray):
        super().__init__(word)
        for idx, s in enumerate(self.symbols):
            if s == H or s == I:
                raise InvalidSymbolError("level step not allowed in a Dyck path", idx)


class SymbolCounts(NamedTuple):
    """Occurrence counts of the four symbols; u == d and they sum to the length."""

    u: int
    h: int
    i: int
    d: int

    @property
    def length(self) -> int:
        return self.u + self.h + self.i + self.d


def validate(word: str | bytes | bytearray) -> TwoMotzkinPath:
    """Validate a raw word, raising a typed error at the first offending index."""
    return TwoMotzkinPath(word)


def symbol_counts(x: TwoMotzkinPath) -> SymbolCounts:
    return x.counts()


def skeleton(x: TwoMotzkinPath) -> DyckPath:
    """Dyck path left after deleting every level step of ``x``."""
    return x.skeleton()


def iter_paths(m: int, cap: int = ENUMERATION_CAP) -> Iterator[TwoMotzkinPath]:
    """Yield all valid paths of length m in lexicographic order (U < H < I < D)."""
    if m < 0:
        raise ValueError("path length must be nonnegative")
    if m > cap:
        raise CapExceededError("enumeration length m", m, cap)

    word = bytearray(m)

    def rec(pos: int, height: int) -> Iterator[TwoMotzkinPath]:
        if pos == m:
            yield TwoMotzkinPath._trusted(bytes(word))
            return
        remaining = m - pos - 1
        for s in SYMBOL_ORDER:
            if s == U:
                new_height = height + 1
            elif s == D:
                new_height = height - 1
            else:
                new_height = height
            # Prune: must stay nonnegative and still be able to descend to 0.
            if new_height < 0 or new_height > remaining:
                continue
            word[pos] = s
            yield from rec(pos + 1, new_height)

    return rec(0, 0)


def enumerate_paths(m: int, cap: int = ENUMERATION_CAP) -> list[TwoMotzkinPath]:
    """All valid paths of length m, in a fixed order; len equals catalan(m + 1)."""
    return list(iter_paths(m, cap))


def catalan(n: int) -> int:
    """n-th Catalan number, exact."""
    if n < 0:
        raise ValueError("catalan is defined for n >= 0")
    return math.comb(2 * n, n) // (n + 1)


def motzkin(n: int) -> int:
    """n-th Motzkin number via the binomial-Catalan convolution, exact."""
    if n < 0:
        raise ValueError("motzkin is defined for n >= 0")
    return sum(math.comb(n, 2 * k) * catalan(k) for k in range(n // 2 + 1))
