"""Seeded generators for synthetic weighted strings."""

from __future__ import annotations

import math
import random
import string

from wmindex.core import Alphabet, WeightedString

KINDS = ("uniform", "snp-like", "rssi-like")

_SINGLE = string.ascii_uppercase + string.ascii_lowercase + string.digits


def default_letters(sigma: int) -> tuple[str, ...]:
    if sigma <= len(_SINGLE):
        return tuple(_SINGLE[:sigma])
    return tuple(f"x{i}" for i in range(sigma))


def _dirichlet_row(rng: random.Random, sigma: int) -> list[float]:
    raw = [rng.expovariate(1.0) for _ in range(sigma)]
    total = sum(raw)
    return [v / total for v in raw]


def generate_weighted_string(
    kind: str, n: int, sigma: int, delta: float, seed: int
) -> WeightedString:
    """Generate a weighted string.

    `delta` is the percentage (0..100) of uncertain positions; the remaining
    positions carry a single letter with probability 1.  `uniform` draws a
    full random distribution at uncertain positions, `snp-like` mixes a major
    and a minor letter, `rssi-like` spreads mass around a drifting center
    letter (every position uncertain, `delta` controls the spread).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    if n < 1 or sigma < 1:
        raise ValueError("n and sigma must be positive")
    if not (0.0 <= delta <= 100.0):
        raise ValueError("delta must be a percentage in [0, 100]")
    rng = random.Random(seed)
    rows: list[list[float]] = []
    if kind == "rssi-like":
        center = rng.randrange(sigma)
        temp = 0.4 + (delta / 100.0) * 1.6
        for _ in range(n):
            if rng.random() < 0.2:
                center = min(sigma - 1, max(0, center + rng.choice((-1, 1))))
            raw = [math.exp(-abs(r - center) / max(temp, 1e-6)) for r in range(sigma)]
            total = sum(raw)
            rows.append([v / total for v in raw])
        return WeightedString(Alphabet(default_letters(sigma)), rows)
    for _ in range(n):
        if rng.random() * 100.0 >= delta:
            row = [0.0] * sigma
            row[rng.randrange(sigma)] = 1.0
        elif kind == "uniform":
            row = _dirichlet_row(rng, sigma)
        else:  # snp-like: two-letter mix
            major, minor = rng.sample(range(sigma), 2) if sigma > 1 else (0, 0)
            f = rng.uniform(0.05, 0.5)
            row = [0.0] * sigma
            row[major] += 1.0 - f
            row[minor] += f
        rows.append(row)
    return WeightedString(Alphabet(default_letters(sigma)), rows)
