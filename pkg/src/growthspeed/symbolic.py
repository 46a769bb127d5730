"""Finite words over {0, ..., b-1}, their b-adic indices and neighbours.

A word of length n addresses the cylinder [w], which corresponds to the
b-adic interval [i(w) b^-n, (i(w)+1) b^-n]. Cylinder identity is the pair
(length, index); everything here is index arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

# b**n must fit an int64 index
MAX_INDEX = 2**63 - 1
# dense enumeration (arrays of length b**n) is refused above this size
DENSE_GUARD = 2**26


class ResourceGuardError(RuntimeError):
    """Raised when a dense enumeration would exceed ``DENSE_GUARD`` cells."""


def check_base(b: int) -> int:
    if int(b) != b or b < 2:
        raise ValueError(f"base must be an integer >= 2, got {b!r}")
    return int(b)


def check_dense(b: int, n: int) -> int:
    """Return b**n, raising ResourceGuardError if it exceeds the guard."""
    size = b**n
    if size > DENSE_GUARD:
        raise ResourceGuardError(
            f"dense enumeration of {b}^{n} = {size} cylinders exceeds guard {DENSE_GUARD}"
        )
    return size


@dataclass(frozen=True)
class Word:
    """A finite word, stored as digits together with its base."""

    digits: tuple
    b: int = 2

    def __post_init__(self):
        check_base(self.b)
        for d in self.digits:
            if not 0 <= d < self.b:
                raise ValueError(f"digit {d} out of range for base {self.b}")
        if self.b ** len(self.digits) > MAX_INDEX:
            raise ValueError("word too long for a 64-bit cylinder index")

    def __len__(self):
        return len(self.digits)

    def __str__(self):
        if self.b <= 10:
            return "".join(str(d) for d in self.digits)
        return ".".join(str(d) for d in self.digits)

    def __add__(self, other):
        other = as_word(other, self.b)
        return Word(self.digits + other.digits, self.b)

    @property
    def index(self) -> int:
        return index_of(self)

    def prefix(self, n: int) -> "Word":
        return Word(self.digits[:n], self.b)


WordLike = Union[Word, str, Sequence[int]]


def as_word(w: WordLike, b: int = 2) -> Word:
    """Coerce a string such as ``"011"`` or a digit sequence to a Word."""
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        if "." in w:
            digits = tuple(int(c) for c in w.split("."))
        else:
            digits = tuple(int(c) for c in w)
        return Word(digits, b)
    return Word(tuple(int(d) for d in w), b)


def index_of(w: WordLike, b: int = 2) -> int:
    """Index i(w) with i(w) b^-n = sum_k w_k b^-k, i.e. the base-b value of w."""
    w = as_word(w, b)
    i = 0
    for d in w.digits:
        i = i * w.b + d
    return i


def word_of(i: int, n: int, b: int = 2) -> Word:
    """Inverse of :func:`index_of` for words of length ``n``."""
    check_base(b)
    if n < 0:
        raise ValueError("length must be non-negative")
    if not 0 <= i < b**n:
        raise IndexError(f"index {i} outside [0, {b}^{n})")
    digits = []
    for _ in range(n):
        i, d = divmod(i, b)
        digits.append(d)
    return Word(tuple(reversed(digits)), b)


def delta(v: WordLike, w: WordLike, b: int = 2) -> int:
    """Integer distance |i(v) - i(w)| between words of equal length."""
    v, w = as_word(v, b), as_word(w, b)
    if len(v) != len(w):
        raise ValueError(f"delta needs words of equal length, got {len(v)} and {len(w)}")
    return abs(index_of(v) - index_of(w))


def neighbors(w: WordLike, N: int, b: int = 2) -> list:
    """All same-length words within delta-distance N of w, w included.

    Indices are clipped to [0, b^n - 1]; there is no wrap-around.
    """
    if N < 0:
        raise ValueError("neighbour radius must be >= 0")
    w = as_word(w, b)
    n, i = len(w), index_of(w)
    lo, hi = max(0, i - N), min(w.b**n - 1, i + N)
    return [word_of(k, n, w.b) for k in range(lo, hi + 1)]


def boundary_words(k: int, side: str, b: int = 2) -> Word:
    """g_k = 0^k (``side="low"``) or d_k = (b-1)^k (``side="high"``)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if side == "low":
        return Word((0,) * k, b)
    if side == "high":
        return Word((b - 1,) * k, b)
    raise ValueError(f"side must be 'low' or 'high', got {side!r}")


def digit_table(n: int, b: int = 2) -> np.ndarray:
    """Array of shape (b**n, n) whose row i holds the digits of word_of(i, n)."""
    size = check_dense(b, n)
    idx = np.arange(size, dtype=np.int64)
    powers = b ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % b


def iter_words(n: int, b: int = 2) -> Iterable[Word]:
    check_dense(b, n)
    for i in range(b**n):
        yield word_of(i, n, b)


def window_extrema(values: np.ndarray, N: int) -> tuple:
    """Running min and max of ``values`` over the clipped window [i-N, i+N]."""
    values = np.asarray(values, dtype=float)
    if N == 0:
        return values.copy(), values.copy()
    size = values.shape[0]
    lo = values.copy()
    hi = values.copy()
    for k in range(1, min(N, size - 1) + 1):
        lo[k:] = np.minimum(lo[k:], values[:-k])
        lo[:-k] = np.minimum(lo[:-k], values[k:])
        hi[k:] = np.maximum(hi[k:], values[:-k])
        hi[:-k] = np.maximum(hi[:-k], values[k:])
    return lo, hi
