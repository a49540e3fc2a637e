"""Weighted strings: per-position letter distributions under a validity threshold.

A weighted string of length n assigns each position a probability distribution
over the alphabet.  A pattern occurrence at position i is valid under
threshold 1/z when the product of the matched letter probabilities is at
least 1/z.  All probability arithmetic is done in log space (base e, -inf for
zero) so that long factors neither underflow nor lose the comparison against
the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Comparisons against log(1/z) accept anything within EPS_CMP of the
# threshold; row sums must be within EPS_SUM of 1.
EPS_CMP = 1e-9
EPS_SUM = 1e-6
NEG_INF = float("-inf")


class DataFormatError(ValueError):
    """Raised when an input text does not parse as a weighted string."""


class InternalInvariantError(RuntimeError):
    """A construction invariant failed; indicates a bug, not bad input."""


class UnknownLetterError(ValueError):
    """Raised when a pattern uses a letter outside the alphabet."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of letter tokens; rank = index in `letters`."""

    letters: tuple[str, ...]
    _rank: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.letters:
            raise DataFormatError("alphabet is empty")
        if len(set(self.letters)) != len(self.letters):
            raise DataFormatError("duplicate letter in alphabet")
        object.__setattr__(self, "_rank", {c: r for r, c in enumerate(self.letters)})

    @property
    def size(self) -> int:
        return len(self.letters)

    @property
    def single_char(self) -> bool:
        return all(len(c) == 1 for c in self.letters)

    def rank(self, letter: str) -> int:
        try:
            return self._rank[letter]
        except KeyError:
            raise UnknownLetterError(f"letter {letter!r} not in alphabet") from None

    def encode(self, pattern: str | list[str] | tuple[str, ...]) -> tuple[int, ...]:
        """Pattern text to rank tuple.

        A plain string is read letter-by-character (only meaningful for
        single-character alphabets); sequences are read token-by-token.
        """
        if isinstance(pattern, str):
            if not self.single_char:
                pattern = pattern.split()
            return tuple(self.rank(c) for c in pattern)
        return tuple(self.rank(c) for c in pattern)

    def decode(self, ranks) -> str:
        sep = "" if self.single_char else " "
        return sep.join(self.letters[r] for r in ranks)


class Threshold:
    """Validity threshold 1/z with its derived quantities."""

    __slots__ = ("z", "log_min", "slots", "max_mismatches")

    def __init__(self, z: float):
        if not (z >= 1.0) or math.isinf(z) or math.isnan(z):
            raise ValueError(f"threshold parameter must be a real >= 1, got {z}")
        self.z = float(z)
        self.log_min = -math.log(self.z)  # log(1/z)
        self.slots = int(self.z + EPS_CMP)  # floor(z)
        self.max_mismatches = int(math.log2(self.z) + EPS_CMP) if self.z > 1 else 0

    def __repr__(self) -> str:
        return f"Threshold(z={self.z})"


class WeightedString:
    """n rows of per-letter probabilities, stored as log values."""

    __slots__ = ("alphabet", "n", "logp")

    def __init__(self, alphabet: Alphabet, probs) -> None:
        rows = np.asarray(probs, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != alphabet.size:
            raise DataFormatError(
                f"probability matrix must be n x {alphabet.size}, got {rows.shape}"
            )
        if np.any(rows < -EPS_SUM) or np.any(rows > 1 + EPS_SUM):
            raise DataFormatError("probabilities must lie in [0, 1]")
        sums = rows.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > EPS_SUM)[0]
        if bad.size:
            raise DataFormatError(
                f"row {bad[0] + 1} sums to {sums[bad[0]]:.9f}, expected 1"
            )
        self.alphabet = alphabet
        self.n = rows.shape[0]
        with np.errstate(divide="ignore"):
            self.logp = np.log(np.clip(rows, 0.0, 1.0))
        self.logp.setflags(write=False)

    def logp_at(self, pos: int, rank: int) -> float:
        """Log probability of letter `rank` at 1-based position `pos`."""
        return float(self.logp[pos - 1, rank])

    def probs(self) -> np.ndarray:
        return np.exp(self.logp)

    def reversed(self) -> "WeightedString":
        rev = WeightedString.__new__(WeightedString)
        rev.alphabet = self.alphabet
        rev.n = self.n
        rev.logp = self.logp[::-1].copy()
        rev.logp.setflags(write=False)
        return rev


# --- parsing ----------------------------------------------------------------

def parse_weighted_string(text: str) -> WeightedString:
    """Parse the .wstr format.

    Line 1: `n sigma`; line 2: sigma whitespace-separated letter tokens in
    rank order; then n lines of sigma probabilities.  `#` starts a comment,
    blank lines are skipped.
    """
    lines = []
    for raw in text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append(stripped)
    if not lines:
        raise DataFormatError("empty input")
    head = lines[0].split()
    if len(head) != 2:
        raise DataFormatError(f"header must be 'n sigma', got {lines[0]!r}")
    try:
        n, sigma = int(head[0]), int(head[1])
    except ValueError:
        raise DataFormatError(f"header must be two integers, got {lines[0]!r}") from None
    if n < 1 or sigma < 1:
        raise DataFormatError(f"n and sigma must be positive, got n={n} sigma={sigma}")
    if len(lines) < 2:
        raise DataFormatError("missing alphabet line")
    letters = tuple(lines[1].split())
    if len(letters) != sigma:
        raise DataFormatError(f"expected {sigma} letters, got {len(letters)}")
    if len(lines) != 2 + n:
        raise DataFormatError(f"expected {n} probability rows, got {len(lines) - 2}")
    rows = []
    for idx, line in enumerate(lines[2:], start=1):
        parts = line.split()
        if len(parts) != sigma:
            raise DataFormatError(f"row {idx} has {len(parts)} values, expected {sigma}")
        try:
            rows.append([float(tok) for tok in parts])
        except ValueError:
            raise DataFormatError(f"row {idx} has a non-numeric value") from None
    return WeightedString(Alphabet(letters), rows)


def format_weighted_string(x: WeightedString) -> str:
    out = [f"{x.n} {x.alphabet.size}", " ".join(x.alphabet.letters)]
    probs = x.probs()
    for row in probs:
        out.append(" ".join(format(v, ".12g") for v in row))
    return "\n".join(out) + "\n"


# --- occurrence probability and validity ------------------------------------

def occurrence_logprob(x: WeightedString, ranks, start: int) -> float:
    """Log probability that `ranks` occurs at 1-based `start` (-inf if zero)."""
    m = len(ranks)
    if start < 1 or start + m - 1 > x.n:
        raise ValueError(f"occurrence [{start}, {start + m - 1}] out of bounds 1..{x.n}")
    total = 0.0
    logp = x.logp
    for t, r in enumerate(ranks):
        v = logp[start - 1 + t, r]
        if v == NEG_INF:
            return NEG_INF
        total += v
    return total


def occurrence_probability(x: WeightedString, pattern, start: int) -> float:
    """Probability of `pattern` (text or rank sequence) at 1-based `start`."""
    ranks = pattern if isinstance(pattern, tuple) else x.alphabet.encode(pattern)
    return math.exp(occurrence_logprob(x, ranks, start))


def is_valid(x: WeightedString, z: float, pattern, start: int) -> bool:
    ranks = pattern if isinstance(pattern, tuple) else x.alphabet.encode(pattern)
    return occurrence_logprob(x, ranks, start) >= -math.log(z) - EPS_CMP


def batch_occurrence_logprobs(x: WeightedString, ranks) -> np.ndarray:
    """Log probabilities of `ranks` at every start 1..n-m+1, vectorized."""
    m = len(ranks)
    count = x.n - m + 1
    if count <= 0:
        return np.empty(0, dtype=np.float64)
    total = np.zeros(count, dtype=np.float64)
    logp = x.logp
    for t, r in enumerate(ranks):
        total += logp[t : t + count, r]
    return total


def brute_force_occurrences(x: WeightedString, z: float, pattern) -> list[int]:
    """All valid 1-based starts of `pattern`, by direct probability products."""
    ranks = pattern if isinstance(pattern, tuple) else x.alphabet.encode(pattern)
    if not ranks:
        raise ValueError("empty pattern")
    logs = batch_occurrence_logprobs(x, ranks)
    hits = np.nonzero(logs >= -math.log(z) - EPS_CMP)[0]
    return [int(i) + 1 for i in hits]


def floor_count(logprob: float, z: float) -> int:
    """floor(prob * z) with EPS_CMP slack, capped at floor(z)."""
    if logprob == NEG_INF:
        return 0
    cap = int(z + EPS_CMP)
    v = math.exp(logprob) * z + EPS_CMP
    return min(int(v), cap)


# --- heavy string ------------------------------------------------------------

class HeavyContext:
    """Per-position most likely letter with its log prefix products.

    pp_log[t] is the log probability of the heavy prefix of length t
    (pp_log[0] = 0); it is non-increasing and always finite because row
    maxima are at least 1/sigma.
    """

    __slots__ = ("alphabet", "n", "ranks", "pp_log")

    def __init__(self, alphabet: Alphabet, ranks: np.ndarray, pp_log: np.ndarray):
        self.alphabet = alphabet
        self.n = len(ranks)
        self.ranks = ranks
        self.pp_log = pp_log
        self.ranks.setflags(write=False)
        self.pp_log.setflags(write=False)

    def rank_at(self, pos: int) -> int:
        """Heavy letter rank at 1-based `pos`."""
        return int(self.ranks[pos - 1])

    def letters(self) -> str:
        return self.alphabet.decode(self.ranks)

    def logp_at(self, pos: int) -> float:
        """Log probability of the heavy letter at 1-based `pos`."""
        return float(self.pp_log[pos] - self.pp_log[pos - 1])

    def slice_logprob(self, lo: int, hi: int) -> float:
        """Log probability of the heavy slice at [lo, hi], 1-based inclusive."""
        return float(self.pp_log[hi] - self.pp_log[lo - 1])

    def reversed(self) -> "HeavyContext":
        rev_ranks = self.ranks[::-1].copy()
        steps = np.diff(self.pp_log)[::-1]
        pp = np.concatenate(([0.0], np.cumsum(steps)))
        return HeavyContext(self.alphabet, rev_ranks, pp)


def build_heavy_context(x: WeightedString, override: str | None = None) -> HeavyContext:
    """Heavy letters (argmax, ties to the lowest rank) and prefix products.

    `override` supplies an explicit heavy string; each override letter must
    attain the row maximum (alternative tie-breaking only).
    """
    if override is None:
        ranks = np.argmax(x.logp, axis=1).astype(np.int32)
    else:
        enc = x.alphabet.encode(override)
        if len(enc) != x.n:
            raise ValueError(f"override length {len(enc)} != n={x.n}")
        row_max = np.max(x.logp, axis=1)
        ranks = np.asarray(enc, dtype=np.int32)
        chosen = x.logp[np.arange(x.n), ranks]
        if np.any(chosen < row_max - 1e-12):
            bad = int(np.nonzero(chosen < row_max - 1e-12)[0][0])
            raise ValueError(f"override letter at position {bad + 1} is not a row maximum")
    heavy_logs = x.logp[np.arange(x.n), ranks]
    pp_log = np.concatenate(([0.0], np.cumsum(heavy_logs)))
    return HeavyContext(x.alphabet, ranks, pp_log)


def mismatches_vs_heavy(heavy: HeavyContext, ranks, start: int) -> list[int]:
    """1-based positions where `ranks` at `start` differs from the heavy string."""
    return [
        start + t for t, r in enumerate(ranks) if r != int(heavy.ranks[start - 1 + t])
    ]
