from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmindex.core import Alphabet
from wmindex.estimation import EstimationFamily
from wmindex.minimizers import (
    MinimizerScheme,
    PrependMinStack,
    SlidingWindowMinimizer,
    default_k,
    kmer_key,
    leftmost_pattern_minimizer,
    make_scheme,
    minimizer_set_family,
    minimizer_set_plain,
    window_minimizer,
)

AB = Alphabet(("A", "B"))


def test_window_minimizer_frozen():
    scheme = make_scheme(4, 2, "lex")
    assert window_minimizer(scheme, AB.encode("ABAA")) == 3
    assert window_minimizer(scheme, AB.encode("AAAA")) == 1  # leftmost tie
    assert window_minimizer(scheme, AB.encode("BBBA")) == 3
    scheme3 = make_scheme(3, 2, "lex")
    assert window_minimizer(scheme3, AB.encode("BAA")) == 2
    assert window_minimizer(scheme3, AB.encode("BAB")) == 2


def test_minimizer_set_plain_frozen():
    scheme = make_scheme(4, 2, "lex")
    assert minimizer_set_plain(scheme, AB.encode("ABAABB")) == {3}
    # too short: no windows
    assert minimizer_set_plain(scheme, AB.encode("ABA")) == set()


def test_leftmost_pattern_minimizer():
    scheme = make_scheme(3, 2, "lex")
    assert leftmost_pattern_minimizer(scheme, AB.encode("AAAA")) == 1
    assert leftmost_pattern_minimizer(scheme, AB.encode("BAAB")) == 2
    assert leftmost_pattern_minimizer(scheme, AB.encode("BABA")) == 2
    with pytest.raises(ValueError, match="shorter"):
        leftmost_pattern_minimizer(scheme, AB.encode("AB"))


def test_scheme_validation():
    with pytest.raises(ValueError, match="order"):
        MinimizerScheme(4, 2, "alpha")
    with pytest.raises(ValueError, match="k <= ell"):
        MinimizerScheme(4, 5)
    assert default_k(64, 4) == 5
    assert default_k(3, 2) == 3  # clamped to ell
    assert make_scheme(8, None, "lex", 0, sigma=2) == MinimizerScheme(8, 5, "lex", 0)


def test_fingerprint_keys_seeded():
    a = make_scheme(8, 3, "fingerprint", seed=1)
    b = make_scheme(8, 3, "fingerprint", seed=2)
    kmer = (0, 1, 2)
    assert kmer_key(a, kmer) == kmer_key(a, kmer)
    assert kmer_key(a, kmer) != kmer_key(b, kmer)
    with pytest.raises(ValueError, match="length"):
        kmer_key(a, (0, 1))


def test_fingerprint_breaks_sorted_text_clustering():
    """Lexicographic order marks every position of strictly increasing text."""
    ranks = tuple(range(200))
    lex = make_scheme(16, 3, "lex")
    fp = make_scheme(16, 3, "fingerprint", seed=7)
    dense = len(minimizer_set_plain(lex, ranks))
    sparse = len(minimizer_set_plain(fp, ranks))
    assert dense == 200 - 16 + 1  # every window selects its own start
    assert sparse < dense / 2


def _rescan(scheme, ranks):
    out = set()
    for i in range(1, len(ranks) - scheme.ell + 2):
        out.add(i + window_minimizer(scheme, ranks[i - 1 : i - 1 + scheme.ell]) - 1)
    return out


@settings(max_examples=80, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.sampled_from(["lex", "fingerprint"]),
)
def test_minimizer_set_plain_matches_rescan(seed, order):
    rng = random.Random(seed)
    sigma = rng.randint(2, 4)
    ell = rng.randint(2, 9)
    k = rng.randint(1, ell)
    scheme = make_scheme(ell, k, order, seed=seed & 0xFFFF)
    ranks = tuple(rng.randrange(sigma) for _ in range(rng.randint(ell, 40)))
    assert minimizer_set_plain(scheme, ranks) == _rescan(scheme, ranks)


def test_minimizer_set_family_reference(ex1):
    """Live windows of the reference six-position family, (4+3)-pair set."""
    ab = ex1.alphabet
    fam = EstimationFamily(
        ab,
        4.0,
        [ab.encode(s) for s in ("AAAAAA", "AAAAAB", "ABAABB", "ABBBBB")],
        [
            [2, 2, 3, 4, 5, 6],
            [4, 4, 5, 6, 6, 6],
            [4, 4, 5, 6, 6, 6],
            [2, 2, 3, 3, 5, 6],
        ],
    )
    scheme = make_scheme(3, 2, "lex")
    assert minimizer_set_family(scheme, fam) == {
        (1, 2), (2, 2), (3, 2), (4, 2), (1, 3), (3, 3), (4, 3),
    }


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sliding_window_matches_window_minimizer(seed):
    rng = random.Random(seed)
    sigma = rng.randint(2, 4)
    ell = rng.randint(2, 8)
    k = rng.randint(1, ell)
    order = rng.choice(["lex", "fingerprint"])
    scheme = make_scheme(ell, k, order, seed=seed & 0xFFFF)
    ranks = [rng.randrange(sigma) for _ in range(rng.randint(ell, 30))]
    sw = SlidingWindowMinimizer(scheme)
    for pos, r in enumerate(ranks, start=1):
        sw.push(r)
        if pos >= ell:
            start = pos - ell + 1
            window = ranks[start - 1 : pos]
            expected = start + window_minimizer(scheme, window) - 1
            assert sw.min_anchor(start) == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["newest", "oldest"]))
def test_prepend_min_stack_fuzz(seed, tie):
    """Random push/pop walks agree with a direct scan over the top entries."""
    rng = random.Random(seed)
    stack = PrependMinStack(tie)
    shadow: list[tuple[int, int]] = []
    counter = 0
    for _ in range(300):
        if shadow and rng.random() < 0.4:
            stack.pop()
            shadow.pop()
        else:
            key = rng.randint(0, 6)  # small range to force ties
            stack.push(key, counter)
            shadow.append((key, counter))
            counter += 1
        if shadow:
            width = rng.randint(1, len(shadow))
            top = shadow[-width:]
            if tie == "newest":
                best = min(reversed(top), key=lambda e: e[0])
            else:
                best = min(top, key=lambda e: e[0])
            assert stack.window_min(width) == best


def test_prepend_min_stack_bounds():
    stack = PrependMinStack()
    stack.push(5, "a")
    with pytest.raises(ValueError, match="out of range"):
        stack.window_min(2)
    with pytest.raises(ValueError, match="out of range"):
        stack.window_min(0)
