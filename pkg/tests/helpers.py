"""Shared test utilities: instance generation and reference computations."""

from __future__ import annotations

import math
import random

from wmindex.core import (
    EPS_CMP,
    Alphabet,
    WeightedString,
    occurrence_logprob,
)
from wmindex.gen import default_letters


def random_weighted(
    rng: random.Random, n: int, sigma: int, certain_frac: float = 0.25
) -> WeightedString:
    """Mixed-texture instance: certain, two-letter and fully random rows."""
    rows = []
    for _ in range(n):
        roll = rng.random()
        if roll < certain_frac:
            row = [0.0] * sigma
            row[rng.randrange(sigma)] = 1.0
        elif roll < certain_frac + 0.35 and sigma > 1:
            a, b = rng.sample(range(sigma), 2)
            f = rng.uniform(0.05, 0.5)
            row = [0.0] * sigma
            row[a], row[b] = 1.0 - f, f
        else:
            raw = [rng.expovariate(1.0) for _ in range(sigma)]
            s = sum(raw)
            row = [v / s for v in raw]
        rows.append(row)
    return WeightedString(Alphabet(default_letters(sigma)), rows)


def solid_factors_at(x: WeightedString, z: float, start: int, max_len: int | None = None):
    """All (ranks, logprob) valid at `start`, by direct extension."""
    limit = x.n - start + 1 if max_len is None else min(max_len, x.n - start + 1)
    out = []
    threshold = -math.log(z) - EPS_CMP

    def extend(ranks: tuple[int, ...], logp: float) -> None:
        if len(ranks) == limit:
            return
        pos = start + len(ranks)
        for r in range(x.alphabet.size):
            v = logp + x.logp[pos - 1, r]
            if v >= threshold:
                out.append((ranks + (r,), v))
                extend(ranks + (r,), v)

    extend((), 0.0)
    return out


def sample_solid_pattern(
    rng: random.Random, x: WeightedString, z: float, m: int
) -> tuple[int, ...] | None:
    """A length-m pattern valid somewhere, or None if the instance has none."""
    starts = list(range(1, x.n - m + 2))
    rng.shuffle(starts)
    threshold = -math.log(z) - EPS_CMP
    for start in starts:
        for _ in range(8):
            ranks = []
            logp = 0.0
            for pos in range(start, start + m):
                row = [
                    (float(x.logp[pos - 1, r]), r)
                    for r in range(x.alphabet.size)
                    if x.logp[pos - 1, r] > float("-inf")
                ]
                weights = [math.exp(v) for v, _ in row]
                r = rng.choices([r for _, r in row], weights=weights)[0]
                ranks.append(r)
                logp += float(x.logp[pos - 1, r])
                if logp < threshold:
                    break
            else:
                ranks_t = tuple(ranks)
                assert occurrence_logprob(x, ranks_t, start) >= threshold
                return ranks_t
    return None


def random_pattern(rng: random.Random, sigma: int, m: int) -> tuple[int, ...]:
    return tuple(rng.randrange(sigma) for _ in range(m))
