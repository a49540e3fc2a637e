"""(ell, k)-minimizer schemes over rank sequences.

A window of length ell selects the leftmost occurrence of its smallest k-mer
(anchor = window start + offset - 1).  Two orders: `lex` compares rank tuples
directly; `fingerprint` compares a seeded 64-bit hash first (ties then fall
back to the rank tuple, then leftmost), which avoids the clustering of
lexicographic order on sorted text.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

ORDERS = ("lex", "fingerprint")

_M64 = (1 << 64) - 1


def _splitmix64(v: int) -> int:
    v = (v + 0x9E3779B97F4A7C15) & _M64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _M64
    return v ^ (v >> 31)


@dataclass(frozen=True)
class MinimizerScheme:
    ell: int
    k: int
    order: str = "lex"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")
        if not (1 <= self.k <= self.ell):
            raise ValueError(f"need 1 <= k <= ell, got k={self.k} ell={self.ell}")
        if not (0 <= self.seed <= _M64):
            raise ValueError("seed must fit in 64 bits")

    @property
    def window_kmers(self) -> int:
        return self.ell - self.k + 1


def default_k(ell: int, sigma: int) -> int:
    if ell < 1 or sigma < 2:
        raise ValueError("need ell >= 1 and sigma >= 2")
    return min(ell, int(math.ceil(math.log(ell) / math.log(sigma))) + 2)


def make_scheme(
    ell: int, k: int | None = None, order: str = "lex", seed: int = 0, sigma: int = 4
) -> MinimizerScheme:
    return MinimizerScheme(ell, default_k(ell, sigma) if k is None else k, order, seed)


def kmer_key(scheme: MinimizerScheme, ranks) -> tuple:
    """Comparison key of one k-mer (a length-k rank sequence)."""
    ranks = tuple(ranks)
    if len(ranks) != scheme.k:
        raise ValueError(f"k-mer must have length {scheme.k}, got {len(ranks)}")
    if scheme.order == "lex":
        return ranks
    h = scheme.seed
    for r in ranks:
        h = _splitmix64(h ^ (r + 0x100))
    return (h, ranks)


def window_minimizer(scheme: MinimizerScheme, window) -> int:
    """Offset (1-based) of the leftmost smallest k-mer in a length-ell window."""
    window = tuple(window)
    if len(window) != scheme.ell:
        raise ValueError(f"window must have length {scheme.ell}, got {len(window)}")
    best, best_off = None, -1
    for off in range(scheme.window_kmers):
        key = kmer_key(scheme, window[off : off + scheme.k])
        if best is None or key < best:
            best, best_off = key, off
    return best_off + 1


def leftmost_pattern_minimizer(scheme: MinimizerScheme, pattern) -> int:
    """Anchor offset of the pattern's first window (pattern length >= ell)."""
    pattern = tuple(pattern)
    if len(pattern) < scheme.ell:
        raise ValueError(f"pattern shorter than ell={scheme.ell}")
    return window_minimizer(scheme, pattern[: scheme.ell])


class SlidingWindowMinimizer:
    """Leftmost smallest k-mer over a sliding window, O(k) amortized per push.

    Feed letters left to right; after pushing the letter at position e, the
    k-mer starting at e-k+1 enters.  `min_anchor(window_start)` returns the
    start position of the selected k-mer among those starting at or after
    `window_start` (ties resolve to the leftmost because equal keys are kept
    in arrival order).
    """

    __slots__ = ("scheme", "_ring", "_pos", "_deque")

    def __init__(self, scheme: MinimizerScheme):
        self.scheme = scheme
        self._ring: deque = deque(maxlen=scheme.k)
        self._pos = 0
        self._deque: deque = deque()  # (key, kmer_start), keys non-decreasing

    def push(self, rank: int) -> None:
        self._pos += 1
        self._ring.append(rank)
        if len(self._ring) == self.scheme.k:
            key = kmer_key(self.scheme, self._ring)
            dq = self._deque
            while dq and dq[-1][0] > key:
                dq.pop()
            dq.append((key, self._pos - self.scheme.k + 1))

    def min_anchor(self, window_start: int) -> int:
        dq = self._deque
        while dq and dq[0][1] < window_start:
            dq.popleft()
        if not dq:
            raise ValueError("window has no complete k-mer")
        return dq[0][1]


def minimizer_set_plain(scheme: MinimizerScheme, ranks) -> set[int]:
    """Anchors of all length-ell windows of a plain rank sequence (1-based)."""
    ranks = tuple(ranks)
    out: set[int] = set()
    if len(ranks) < scheme.ell:
        return out
    sw = SlidingWindowMinimizer(scheme)
    for pos, r in enumerate(ranks, start=1):
        sw.push(r)
        if pos >= scheme.ell:
            out.add(sw.min_anchor(pos - scheme.ell + 1))
    return out


def minimizer_set_family(scheme: MinimizerScheme, family) -> set[tuple[int, int]]:
    """(anchor, slot) pairs over all live windows of an estimation family.

    A window [i, i+ell-1] of slot j participates iff it lies inside the live
    region: ends_j[i] >= i + ell - 1.
    """
    out: set[tuple[int, int]] = set()
    for j, (s, e) in enumerate(zip(family.strings, family.ends), start=1):
        sw = SlidingWindowMinimizer(scheme)
        for pos, r in enumerate(s, start=1):
            sw.push(r)
            start = pos - scheme.ell + 1
            if start >= 1 and e[start - 1] >= pos:
                out.add((sw.min_anchor(start), j))
    return out


class PrependMinStack:
    """Stack of k-mer keys with range-minimum over the top of the stack.

    Models a window that grows and shrinks at its left end (letters prepended
    and removed in LIFO order): each prepended letter contributes exactly one
    new k-mer, and removal retracts it.  Entries carry binary-lifting minima,
    so push costs O(log), pop O(1), and the minimum over the top w entries
    O(log w).  `tie` picks among equal keys: "newest" prefers the most
    recently pushed entry (the leftmost k-mer when building leftward),
    "oldest" the earliest (used when operating on reversed input).
    """

    __slots__ = ("tie", "_entries", "_mins")

    def __init__(self, tie: str = "newest"):
        if tie not in ("newest", "oldest"):
            raise ValueError("tie must be 'newest' or 'oldest'")
        self.tie = tie
        self._entries: list[tuple] = []  # (key, payload)
        self._mins: list[list[int]] = []  # per entry: best index over top 2^h

    def __len__(self) -> int:
        return len(self._entries)

    def _better(self, a: int, b: int) -> int:
        ka, kb = self._entries[a][0], self._entries[b][0]
        if ka < kb:
            return a
        if kb < ka:
            return b
        if self.tie == "newest":
            return a if a > b else b
        return a if a < b else b

    def push(self, key, payload=None) -> None:
        idx = len(self._entries)
        self._entries.append((key, payload))
        row = [idx]
        h = 0
        # row[h] = best index among entries (idx - 2^(h+1), idx]
        while True:
            span = 1 << h
            lower = idx - span
            if lower < 0:
                break
            prev = self._mins[lower][h] if h < len(self._mins[lower]) else None
            if prev is None:
                break
            row.append(self._better(row[h], prev))
            h += 1
        self._mins.append(row)

    def pop(self) -> None:
        self._entries.pop()
        self._mins.pop()

    def window_min(self, width: int) -> tuple:
        """(key, payload) of the best entry among the top `width` entries."""
        size = len(self._entries)
        if not (1 <= width <= size):
            raise ValueError(f"window width {width} out of range 1..{size}")
        best = None
        cur = size - 1
        remaining = width
        while remaining > 0:
            h = remaining.bit_length() - 1
            cand = self._mins[cur][h]
            best = cand if best is None else self._better(best, cand)
            cur -= 1 << h
            remaining -= 1 << h
        return self._entries[best]
