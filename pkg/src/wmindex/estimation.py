"""Threshold estimation: a family of plain strings that reproduces counts.

A weighted string under threshold 1/z is replaced by floor(z) plain strings
S_1..S_k, each with a property array `ends` (ends[i] = rightmost end of the
live factor starting at i, or i-1 when the start is dead), such that for
EVERY pattern P and position i the number of family strings whose live region
matches P at i equals floor(prob(P at i) * z).

The construction is position by position.  The solid strings ending at a
position form a forest under the drop-leftmost-letter relation; each slot's
live suffix is a node of it.  At the next position every solid string F
demands mu(F) = c(F) - sum of c over F's solid one-letter left-extensions
slots whose live suffix becomes exactly F, where c(F) = floor(prob(F) * z).
mu is never negative (floors are superadditive over the letter split of F's
probability mass), demands total at most floor(z), and serving them
longest-first from slots whose live suffix extends the demanded body is
always feasible (Hall's condition holds per subtree).  Slots left over carry
an empty live suffix and spell the heavy letter.
"""

from __future__ import annotations

from dataclasses import dataclass

from wmindex.core import (
    NEG_INF,
    HeavyContext,
    InternalInvariantError,
    Threshold,
    WeightedString,
    build_heavy_context,
    floor_count,
)

# --- solid-suffix forest -----------------------------------------------------


class _Node:
    """One solid string ending at the current position."""

    __slots__ = ("parent", "depth", "logp", "count", "children", "source", "seq",
                 "tin", "tout", "demand")

    def __init__(self, parent, depth, logp, count, source, seq):
        self.parent = parent  # drop-leftmost-letter suffix
        self.depth = depth
        self.logp = logp
        self.count = count
        self.children: dict[int, _Node] = {}  # keyed by the prepended rank
        self.source = source  # previous-forest node this one extends rightward
        self.seq: tuple[int, ...] = seq
        self.tin = -1
        self.tout = -1
        self.demand = 0


@dataclass
class SlotStep:
    """Per-slot outcome of one packer step."""

    letter: int
    low: int  # live window start after this step (pos+1 means empty)


class SlotPacker:
    """Position-by-position construction of the estimation family.

    Deterministic: demands are served longest-first then lexicographically,
    from eligible slots with the longest live suffix, lowest index first.
    Letters once emitted never change, so callers may either materialize
    whole strings or keep only a sliding window of recent steps.
    """

    def __init__(self, x: WeightedString, z: float, heavy: HeavyContext | None = None):
        self.x = x
        self.threshold = Threshold(z)
        self.heavy = heavy if heavy is not None else build_heavy_context(x)
        self.slots = self.threshold.slots
        self.pos = 0
        self._root = _Node(None, 0, 0.0, self.slots, None, ())
        self._slot_node: list[_Node] = [self._root] * self.slots

    @staticmethod
    def _euler(root: _Node) -> None:
        clock = 0
        stack: list[tuple[_Node, bool]] = [(root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                node.tout = clock
                continue
            node.tin = clock
            clock += 1
            stack.append((node, True))
            for rank in sorted(node.children, reverse=True):
                stack.append((node.children[rank], False))

    def step(self) -> list[SlotStep]:
        """Advance one position; returns the per-slot letters and window lows."""
        if self.pos >= self.x.n:
            raise ValueError("packer already consumed the whole string")
        pos = self.pos + 1
        x, z = self.x, self.threshold.z
        sigma = x.alphabet.size
        old_root = self._root
        self._euler(old_root)

        # Extend the forest: every solid string ending at pos is one ending
        # at pos-1 (possibly empty) plus a letter.  BFS guarantees the parent
        # of each extension (same letter, shorter source) already exists.
        new_root = _Node(None, 0, 0.0, self.slots, old_root, ())
        order: list[_Node] = []
        queue: list[_Node] = [old_root]
        ext: dict[int, dict[int, _Node]] = {}
        head = 0
        while head < len(queue):
            old = queue[head]
            head += 1
            for rank in sorted(old.children):
                queue.append(old.children[rank])
            mine: dict[int, _Node] = {}
            for rank in range(sigma):
                step_logp = x.logp[pos - 1, rank]
                if step_logp == NEG_INF:
                    continue
                logp = old.logp + float(step_logp)
                count = floor_count(logp, z)
                if count < 1:
                    continue
                if old.parent is None:
                    parent_new = new_root
                else:
                    parent_new = ext[id(old.parent)][rank]
                node = _Node(parent_new, old.depth + 1, logp, count, old,
                             old.seq + (rank,))
                parent_new.children[node.seq[0]] = node
                mine[rank] = node
                order.append(node)
            ext[id(old)] = mine

        for node in order:
            node.demand = node.count - sum(c.count for c in node.children.values())
            if node.demand < 0:
                raise InternalInvariantError(
                    f"negative demand at position {pos}: {node.demand}"
                )
        total_demand = sum(node.demand for node in order)
        if total_demand > self.slots:
            raise InternalInvariantError(
                f"demand {total_demand} exceeds {self.slots} slots at position {pos}"
            )

        demands = sorted(
            (node for node in order if node.demand > 0),
            key=lambda nd: (-nd.depth, nd.seq),
        )
        taken = [False] * self.slots
        assignment: list[_Node | None] = [None] * self.slots
        for node in demands:
            src = node.source  # the demanded body: an old-forest node
            eligible = [
                j
                for j in range(self.slots)
                if not taken[j] and src.tin <= self._slot_node[j].tin < src.tout
            ]
            if len(eligible) < node.demand:
                raise InternalInvariantError(
                    f"demand at position {pos} needs {node.demand} slots, "
                    f"{len(eligible)} eligible"
                )
            eligible.sort(key=lambda j: (-self._slot_node[j].depth, j))
            for j in eligible[: node.demand]:
                taken[j] = True
                assignment[j] = node

        heavy_rank = self.heavy.rank_at(pos)
        result = []
        for j in range(self.slots):
            node = assignment[j]
            if node is None:
                self._slot_node[j] = new_root
                result.append(SlotStep(heavy_rank, pos + 1))
            else:
                self._slot_node[j] = node
                result.append(SlotStep(node.seq[-1], pos - node.depth + 1))
        self._root = new_root
        self.pos = pos
        return result


# --- materialized family ------------------------------------------------------


class EstimationFamily:
    """floor(z) plain strings with their property arrays."""

    __slots__ = ("alphabet", "z", "n", "strings", "ends")

    def __init__(self, alphabet, z: float, strings, ends):
        self.alphabet = alphabet
        self.z = float(z)
        self.strings = [tuple(s) for s in strings]
        self.ends = [tuple(e) for e in ends]
        self.n = len(self.strings[0]) if self.strings else 0
        for s, e in zip(self.strings, self.ends):
            if len(s) != self.n or len(e) != self.n:
                raise ValueError("ragged family")

    @property
    def size(self) -> int:
        return len(self.strings)

    def letters_of(self, j: int) -> str:
        """Decoded string of slot j (1-based)."""
        return self.alphabet.decode(self.strings[j - 1])

    def live_low(self, j: int, pos: int) -> int:
        """Smallest start whose live region reaches `pos` in slot j (1-based)."""
        ends = self.ends[j - 1]
        lo, hi = 1, pos + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ends[mid - 1] >= pos:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def debug_dump(self) -> str:
        out = []
        for s, e in zip(self.strings, self.ends):
            out.append(self.alphabet.decode(s) + "\t" + " ".join(str(v) for v in e))
        return "\n".join(out) + "\n"


def build_estimation(
    x: WeightedString, z: float, heavy: HeavyContext | None = None
) -> EstimationFamily:
    packer = SlotPacker(x, z, heavy)
    slots = packer.slots
    letters: list[list[int]] = [[] for _ in range(slots)]
    ends = [[0] * x.n for _ in range(slots)]
    lows = [1] * slots
    for pos in range(1, x.n + 1):
        for j, st in enumerate(packer.step()):
            letters[j].append(st.letter)
            if st.low > lows[j]:
                # starts in [lows[j], st.low) die at this step
                for i in range(lows[j], st.low):
                    ends[j][i - 1] = pos - 1
                lows[j] = st.low
    for j in range(slots):
        for i in range(lows[j], x.n + 1):
            ends[j][i - 1] = x.n
    return EstimationFamily(x.alphabet, z, letters, ends)


# --- contract-side operations ---------------------------------------------------


def occ_with_property(pattern, string, ends) -> list[int]:
    """Starts where `pattern` occurs in `string` within the live region.

    `pattern` and `string` are rank sequences; `ends` is the 1-based property
    array: i counts iff the factor matches and i + m - 1 <= ends[i-1].
    """
    m = len(pattern)
    if m == 0:
        raise ValueError("empty pattern")
    out = []
    pattern = tuple(pattern)
    for i in range(1, len(string) - m + 2):
        if ends[i - 1] >= i + m - 1 and tuple(string[i - 1 : i - 1 + m]) == pattern:
            out.append(i)
    return out


def family_count(family: EstimationFamily, pattern, start: int) -> int:
    """Number of family strings whose live region matches `pattern` at `start`."""
    pattern = tuple(pattern)
    m = len(pattern)
    if start < 1 or start + m - 1 > family.n:
        return 0
    total = 0
    for s, e in zip(family.strings, family.ends):
        if e[start - 1] >= start + m - 1 and s[start - 1 : start - 1 + m] == pattern:
            total += 1
    return total
