"""Minimizer solid factor trees.

Per minimizer pair (i, j) the forward tree stores the live factor of
family slot j starting at i, extended by heavy letters out to position
n; the backward tree stores the reverse of the heavy-padded prefix
ending at i.  No plain string is ever materialized: each leaf keeps a
handle (start position plus a short mismatch list) and characters are
decoded against the heavy ranks on demand.  The backward tree is the
forward machinery run in reversed coordinates.

Two construction paths must produce identical trees: the naive one
reads a fully materialized estimation family; the space-efficient one
streams the packer position by position and, independently, walks the
extended solid factor tree depth-first keeping a single root-to-front
path alive.  The walk yields the minimizer positions (cross-checked
against the streamed ones) and the instrumentation; the streamed
records supply the tree content.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .core import (
    EPS_CMP,
    NEG_INF,
    HeavyContext,
    InternalInvariantError,
    Threshold,
    WeightedString,
    build_heavy_context,
)
from .estimation import EstimationFamily, SlotPacker, build_estimation
from .minimizers import (
    MinimizerScheme,
    PrependMinStack,
    SlidingWindowMinimizer,
    kmer_key,
    minimizer_set_family,
)


class LeafHandle:
    """The string ranks[start..n] of one coordinate system, with substitutions.

    `diffs` holds (position, letter rank, log probability) triples, positions
    strictly increasing; everywhere else the heavy letter applies.  The label
    is the (i, j) minimizer pair in X coordinates regardless of direction.
    """

    __slots__ = ("start", "diffs", "label")

    def __init__(self, start: int, diffs: tuple, label: tuple):
        self.start = start
        self.diffs = diffs
        self.label = label

    def __repr__(self) -> str:
        return f"LeafHandle(start={self.start}, diffs={self.diffs}, label={self.label})"


class VRec:
    """Verification record of one minimizer label.

    b..pi is the heavy-padded span around the anchor (live region of the
    owning slot); diffs lists every mismatch against the heavy string inside
    it, at most floor(log2 z) on each side of the anchor.
    """

    __slots__ = ("b", "pi", "diffs")

    def __init__(self, b: int, pi: int, diffs: tuple):
        self.b = b
        self.pi = pi
        self.diffs = diffs

    def __eq__(self, other):
        return (self.b, self.pi, self.diffs) == (other.b, other.pi, other.diffs)

    def __repr__(self) -> str:
        return f"VRec(b={self.b}, pi={self.pi}, diffs={self.diffs})"


class HeavyLcpOracle:
    """Exact longest-common-prefix queries over one heavy rank array.

    Doubling scan with vectorized comparison: no hashing, so equality is
    decided by the ranks themselves and there is no collision caveat.
    """

    __slots__ = ("ranks", "n")

    def __init__(self, ranks):
        self.ranks = np.ascontiguousarray(ranks, dtype=np.int32)
        self.ranks.setflags(write=False)
        self.n = len(self.ranks)

    def rank_at(self, pos: int) -> int:
        """Letter rank at 1-based `pos`."""
        return int(self.ranks[pos - 1])

    def lcp_heavy(self, p: int, q: int, cap: int) -> int:
        """LCP length of ranks[p..] and ranks[q..], both 1-based, capped."""
        if cap <= 0:
            return 0
        if p == q:
            return cap
        r = self.ranks
        got = 0
        step = 32
        while got < cap:
            t = min(step, cap - got)
            a = r[p - 1 + got : p - 1 + got + t]
            b = r[q - 1 + got : q - 1 + got + t]
            ne = a != b
            if ne.any():
                return got + int(np.argmax(ne))
            got += t
            if step < 4096:
                step <<= 1
        return cap


def handle_char(ctx: HeavyLcpOracle, h: LeafHandle, pos: int) -> int:
    """Rank of the handle's character at absolute position `pos`."""
    for dp, dr, _ in h.diffs:
        if dp == pos:
            return dr
        if dp > pos:
            break
    return ctx.rank_at(pos)


def decode_handle(ctx: HeavyLcpOracle, h: LeafHandle, upto: int | None = None) -> tuple:
    """Rank tuple of the handle's string, optionally truncated to `upto` chars."""
    length = ctx.n - h.start + 1
    if upto is not None:
        length = min(length, upto)
    return tuple(handle_char(ctx, h, h.start + t) for t in range(length))


def handle_walk(ctx: HeavyLcpOracle, a: LeafHandle, b: LeafHandle) -> tuple[int, int]:
    """(LCP length, string order -1/0/1) of two handles over one context.

    Walks the segments between mismatch positions; inside a segment both
    strings are pure heavy, so the oracle compares whole intervals at once.
    """
    la = ctx.n - a.start + 1
    lb = ctx.n - b.start + 1
    lim = min(la, lb)
    da, db = a.diffs, b.diffs
    ia = ib = 0
    t = 0
    while t < lim:
        na = da[ia][0] - a.start if ia < len(da) else lim
        nb = db[ib][0] - b.start if ib < len(db) else lim
        ns = min(na, nb, lim)
        if t < ns:
            seg = ctx.lcp_heavy(a.start + t, b.start + t, ns - t)
            t += seg
            if t < ns:
                ca = ctx.rank_at(a.start + t)
                cb = ctx.rank_at(b.start + t)
                return t, (-1 if ca < cb else 1)
            if t >= lim:
                break
            continue
        ca = da[ia][1] if na == t else ctx.rank_at(a.start + t)
        cb = db[ib][1] if nb == t else ctx.rank_at(b.start + t)
        if na == t:
            ia += 1
        if nb == t:
            ib += 1
        if ca != cb:
            return t, (-1 if ca < cb else 1)
        t += 1
    if la == lb:
        return lim, 0
    return lim, (-1 if la < lb else 1)


def heavy_lcp(ctx: HeavyLcpOracle, a: LeafHandle, b: LeafHandle) -> int:
    """Exact LCP length of the two decoded strings."""
    return handle_walk(ctx, a, b)[0]


def sort_handles(ctx: HeavyLcpOracle, handles) -> list[LeafHandle]:
    """Lexicographic string order; equal strings keep (i, j) label order."""
    pre = sorted(handles, key=lambda h: h.label)
    return sorted(pre, key=functools.cmp_to_key(lambda u, v: handle_walk(ctx, u, v)[1]))


class _TNode:
    __slots__ = ("parent", "depth", "children", "labels", "rep", "leaf_lo", "leaf_hi")

    def __init__(self, parent, depth: int, rep):
        self.parent = parent
        self.depth = depth
        self.children: dict[int, _TNode] = {}
        self.labels: list[tuple] = []
        self.rep = rep
        self.leaf_lo = 0
        self.leaf_hi = 0


class FactorTree:
    """Compacted trie over leaf handles with heavy-relative edges.

    Leaf ranks are 1-based in lexicographic order; a label whose string
    equals another's gets its own rank on the shared node (leaf copies), and
    a string that is a proper prefix of another lives on a leaf-marked
    internal node.
    """

    __slots__ = ("direction", "ctx", "root", "nodes", "leaf_labels", "leaf_handles")

    def __init__(self, direction: str, ctx: HeavyLcpOracle, root, nodes, leaf_labels, leaf_handles):
        self.direction = direction
        self.ctx = ctx
        self.root = root
        self.nodes = nodes  # preorder, root first, children in rank order
        self.leaf_labels = leaf_labels
        self.leaf_handles = leaf_handles

    @property
    def leaf_count(self) -> int:
        return len(self.leaf_labels)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def spell(self, ranks) -> tuple[int, int] | None:
        """Leaf rank interval of strings having `ranks` as a prefix, or None."""
        ranks = tuple(ranks)
        u = self.root
        if u.leaf_hi == 0:
            return None
        d = 0
        m = len(ranks)
        while d < m:
            child = u.children.get(ranks[d])
            if child is None:
                return None
            e = min(child.depth, m)
            rep = child.rep
            for t in range(d, e):
                if handle_char(self.ctx, rep, rep.start + t) != ranks[t]:
                    return None
            d = e
            u = child
        return (u.leaf_lo, u.leaf_hi)

    def edge_label(self, node) -> tuple[int, int, tuple]:
        """(lo, hi, diffs) of the edge entering `node`, in ctx coordinates."""
        lo = node.rep.start + node.parent.depth
        hi = node.rep.start + node.depth - 1
        diffs = tuple((p, r) for p, r, _ in node.rep.diffs if lo <= p <= hi)
        return lo, hi, diffs

    def validate(self, threshold: Threshold) -> None:
        for u in self.nodes:
            if u is self.root:
                continue
            if not u.labels and len(u.children) < 2:
                raise InternalInvariantError("non-compacted internal node")
            if u.depth <= u.parent.depth:
                raise InternalInvariantError("edge with non-positive length")
            lo, hi, diffs = self.edge_label(u)
            if hi > self.ctx.n:
                raise InternalInvariantError("edge interval beyond heavy string")
            if len(u.rep.diffs) > threshold.max_mismatches:
                raise InternalInvariantError("handle exceeds the mismatch budget")


def build_compacted_tree(ctx: HeavyLcpOracle, sorted_handles, direction: str) -> FactorTree:
    """Insert pre-sorted handles via LCP-depth ancestor walks."""
    root = _TNode(None, 0, None)
    made = [root]
    spine = [root]
    prev: LeafHandle | None = None
    for h in sorted_handles:
        hl = ctx.n - h.start + 1
        if prev is None:
            u = root
            l = 0
        else:
            l, o = handle_walk(ctx, prev, h)
            if o > 0:
                raise InternalInvariantError("handles out of order during insertion")
            if o == 0:
                spine[-1].labels.append(h.label)
                continue
            popped = None
            while spine[-1].depth > l:
                popped = spine.pop()
            u = spine[-1]
            if u.depth < l:
                # split the edge between u and the node we just popped
                mid = _TNode(u, l, popped.rep)
                first = handle_char(ctx, popped.rep, popped.rep.start + u.depth)
                u.children[first] = mid
                mid.children[handle_char(ctx, popped.rep, popped.rep.start + l)] = popped
                popped.parent = mid
                made.append(mid)
                spine.append(mid)
                u = mid
        leaf = _TNode(u, hl, h)
        leaf.labels.append(h.label)
        u.children[handle_char(ctx, h, h.start + u.depth)] = leaf
        made.append(leaf)
        spine.append(leaf)
        prev = h

    # preorder renumber; own labels take ranks before any descendant
    order: list[_TNode] = []
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for r in sorted(u.children, reverse=True):
            stack.append(u.children[r])
    leaf_labels: list[tuple] = []
    leaf_handles: list[LeafHandle] = []
    own: dict[int, tuple[int, int]] = {}
    for u in order:
        if u.labels:
            lo = len(leaf_labels) + 1
            for lab in u.labels:
                leaf_labels.append(lab)
                leaf_handles.append(u.rep)
            own[id(u)] = (lo, len(leaf_labels))
    for u in reversed(order):
        lo, hi = own.get(id(u), (0, 0))
        for c in u.children.values():
            if lo == 0 or c.leaf_lo < lo:
                lo = c.leaf_lo
            if c.leaf_hi > hi:
                hi = c.leaf_hi
        u.leaf_lo, u.leaf_hi = lo, hi
    if len(order) != len(made):
        raise InternalInvariantError("dangling tree nodes after insertion")
    return FactorTree(direction, ctx, root, order, leaf_labels, leaf_handles)


class ArrayIndex:
    """Flattened tree: leaves in lexicographic order, binary-search ready."""

    __slots__ = ("ctx", "handles", "labels")

    def __init__(self, ctx: HeavyLcpOracle, handles, labels):
        self.ctx = ctx
        self.handles = handles
        self.labels = labels

    def _cmp(self, h: LeafHandle, ranks) -> int:
        # -1: leaf < pattern, 0: pattern is a prefix of leaf, 1: leaf > pattern
        for t, want in enumerate(ranks):
            pos = h.start + t
            if pos > self.ctx.n:
                return -1
            c = handle_char(self.ctx, h, pos)
            if c != want:
                return -1 if c < want else 1
        return 0

    def leaf_interval(self, ranks) -> tuple[int, int] | None:
        ranks = tuple(ranks)
        lo, hi = 0, len(self.handles)
        while lo < hi:  # first leaf with cmp >= 0
            mid = (lo + hi) // 2
            if self._cmp(self.handles[mid], ranks) < 0:
                lo = mid + 1
            else:
                hi = mid
        first = lo
        hi = len(self.handles)
        while lo < hi:  # first leaf with cmp > 0
            mid = (lo + hi) // 2
            if self._cmp(self.handles[mid], ranks) <= 0:
                lo = mid + 1
            else:
                hi = mid
        if first == lo:
            return None
        return (first + 1, lo)


def to_array(tree: FactorTree) -> ArrayIndex:
    return ArrayIndex(tree.ctx, list(tree.leaf_handles), list(tree.leaf_labels))


# --- label records -----------------------------------------------------------


def make_label_records(
    x: WeightedString, heavy: HeavyContext, family: EstimationFamily, marks
) -> dict[tuple, VRec]:
    """Naive path: read spans and mismatches off the materialized family."""
    recs: dict[tuple, VRec] = {}
    for (i, j) in sorted(marks):
        ends = family.ends[j - 1]
        letters = family.strings[j - 1]
        pi = ends[i - 1]
        b = family.live_low(j, i)
        diffs = tuple(
            (q, letters[q - 1], x.logp_at(q, letters[q - 1]))
            for q in range(b, pi + 1)
            if letters[q - 1] != heavy.rank_at(q)
        )
        recs[(i, j)] = VRec(b, pi, diffs)
    return recs


def handles_from_records(
    n: int, recs: dict[tuple, VRec], threshold: Threshold
) -> tuple[list[LeafHandle], list[LeafHandle]]:
    """One forward and one backward handle per label, in label order."""
    fwd: list[LeafHandle] = []
    bwd: list[LeafHandle] = []
    cap = threshold.max_mismatches
    for (i, j), r in sorted(recs.items()):
        fd = tuple(d for d in r.diffs if d[0] >= i)
        bd = tuple((n + 1 - p, rk, lp) for p, rk, lp in reversed(r.diffs) if p <= i)
        if len(fd) > cap or len(bd) > cap:
            raise InternalInvariantError(
                f"label {(i, j)} carries more than {cap} mismatches on one side"
            )
        fwd.append(LeafHandle(i, fd, (i, j)))
        bwd.append(LeafHandle(n + 1 - i, bd, (i, j)))
    return fwd, bwd


# --- depth-first walk of the extended solid factor tree ----------------------


@dataclass
class DfsStats:
    nodes_created: int = 1
    peak_live_path: int = 1
    fires: int = 0
    retained: int = 0
    fired: set = field(default_factory=set)
    marked: list = field(default_factory=list)  # (position, ((pos, rank), ...))


def dfs_scan(
    x: WeightedString,
    threshold: Threshold,
    scheme: MinimizerScheme,
    heavy: HeavyContext,
    direction: str,
) -> DfsStats:
    """Prepend-order DFS marking one node per fired minimizer position.

    The walk prepends letters, so root-to-node paths spell reversed string
    suffixes; the probability of the solid window [front..j] is kept in log
    space and restored from per-frame saved values instead of dividing back.
    Pure heavy prefixes slide j instead of paying probability, which keeps
    the full heavy chain alive unconditionally.
    """
    n = x.n
    k, ell = scheme.k, scheme.ell
    sigma = x.alphabet.size
    lp_mat = x.logp
    hr = heavy.ranks
    pp = heavy.pp_log
    bound = threshold.log_min - EPS_CMP
    maxmm = threshold.max_mismatches
    stats = DfsStats()
    if n == 0:
        return stats

    minstack = PrependMinStack("newest" if direction == "forward" else "oldest")
    path_ranks: list[int] = []
    diffs: list[tuple[int, int, float]] = []
    pending: set[int] = set()

    p_log = 0.0
    j = n
    on_heavy = True
    # frame: [pos, next_alpha, saved_p, saved_j, saved_onheavy, pushed_kmer,
    #         pushed_diff, visible_children]
    stack: list[list] = [[n + 1, 0, 0.0, n, True, False, False, 0]]
    width = ell - k + 1
    while stack:
        fr = stack[-1]
        q = fr[0] - 1
        descended = False
        while fr[1] < sigma and q >= 1:
            alpha = fr[1]
            fr[1] += 1
            hrq = int(hr[q - 1])
            saved = (p_log, j, on_heavy)
            if on_heavy and alpha == hrq:
                j = q - 1
                pushed_diff = False
            else:
                lp = float(lp_mat[q - 1, alpha])
                if lp == NEG_INF:
                    continue
                cand = p_log + lp
                if cand < bound:
                    continue
                p_log = cand
                on_heavy = False
                pushed_diff = alpha != hrq
                if pushed_diff:
                    diffs.append((q, alpha, lp))
                    if len(diffs) > maxmm:
                        raise InternalInvariantError("solid прefix exceeds mismatch budget")
            path_ranks.append(alpha)
            depth = n - q + 1
            pushed_kmer = depth >= k
            if pushed_kmer:
                if direction == "forward":
                    kk = tuple(path_ranks[-u] for u in range(1, k + 1))
                else:
                    kk = tuple(path_ranks[-k:])
                minstack.push(kmer_key(scheme, kk), q)
            if depth >= ell:
                w = p_log + float(pp[q + ell - 1]) - float(pp[j])
                if w >= bound:
                    pay = minstack.window_min(width)[1]
                    anchor = pay if direction == "forward" else pay + k - 1
                    pending.add(anchor)
                    stats.fired.add(anchor)
                    stats.fires += 1
            stack.append([q, 0, saved[0], saved[1], saved[2], pushed_kmer, pushed_diff, 0])
            stats.nodes_created += 1
            if len(stack) > stats.peak_live_path:
                stats.peak_live_path = len(stack)
            descended = True
            break
        if descended:
            continue
        pos = fr[0]
        visible = fr[7] > 0
        if pos <= n and pos in pending:
            pending.discard(pos)
            stats.marked.append((pos, tuple((p, r) for p, r, _ in reversed(diffs))))
            stats.retained += 1
            visible = True
        elif fr[7] >= 2:
            stats.retained += 1
        if fr[5]:
            minstack.pop()
        if fr[6]:
            diffs.pop()
        if pos <= n:
            path_ranks.pop()
        p_log, j, on_heavy = fr[2], fr[3], fr[4]
        stack.pop()
        if stack and visible:
            stack[-1][7] += 1
    if pending:
        raise InternalInvariantError("fired minimizer positions left unconsumed")
    return stats


# --- streaming construction of the label records -----------------------------


class _SlotState:
    __slots__ = ("swm", "low", "lo_hist", "mm", "pend")

    def __init__(self, scheme: MinimizerScheme):
        from collections import deque

        self.swm = SlidingWindowMinimizer(scheme)
        self.low = 1
        self.lo_hist: "deque[int]" = deque(maxlen=scheme.ell)
        self.mm: "deque[tuple[int, int, float]]" = deque()
        self.pend: "deque[list]" = deque()  # [anchor, b, left_diffs]


@dataclass
class StreamStats:
    peak_cells: int = 0
    emitted: int = 0


def stream_label_records(
    x: WeightedString,
    threshold: Threshold,
    scheme: MinimizerScheme,
    heavy: HeavyContext,
) -> tuple[dict[tuple, VRec], set, StreamStats]:
    """Drive the packer once, retaining only what open anchors still need.

    Per slot this keeps the sliding minimizer, the window lows of the last
    ell steps, the mismatches at or after lo(step - ell + 1) (the live span
    holds at most floor(log2 z) of them), and one pending entry per fired
    anchor that has not died yet.  The backward half of each record is
    snapshotted at first fire, before pruning can reach it.
    """
    n = x.n
    ell = scheme.ell
    packer = SlotPacker(x, threshold.z, heavy)
    slots = packer.slots
    states = [_SlotState(scheme) for _ in range(slots)]
    recs: dict[tuple, VRec] = {}
    marks: set[tuple[int, int]] = set()
    stats = StreamStats()

    def emit(j1: int, st: _SlotState, anchor: int, b: int, left: tuple, pi: int) -> None:
        merged = {p: (rk, lg) for p, rk, lg in left}
        for p, rk, lg in st.mm:
            if anchor <= p <= pi:
                merged[p] = (rk, lg)
        diffs = tuple((p, *merged[p]) for p in sorted(merged))
        recs[(anchor, j1)] = VRec(b, pi, diffs)
        stats.emitted += 1

    for pos in range(1, n + 1):
        steps = packer.step()
        cells = 0
        for j0, st_step in enumerate(steps):
            st = states[j0]
            newlow = st_step.low
            while st.pend and st.pend[0][0] < newlow:
                anchor, b, left = st.pend.popleft()
                emit(j0 + 1, st, anchor, b, left, pos - 1)
            st.low = newlow
            st.lo_hist.append(newlow)
            prune = st.lo_hist[0]
            while st.mm and st.mm[0][0] < prune:
                st.mm.popleft()
            letter = st_step.letter
            if letter != heavy.rank_at(pos):
                st.mm.append((pos, letter, x.logp_at(pos, letter)))
            st.swm.push(letter)
            s = pos - ell + 1
            if s >= 1 and s >= newlow:
                anchor = st.swm.min_anchor(s)
                marks.add((anchor, j0 + 1))
                if not st.pend or st.pend[-1][0] != anchor:
                    b = st.lo_hist[-(pos - anchor + 1)]
                    left = tuple(d for d in st.mm if b <= d[0] <= anchor)
                    st.pend.append([anchor, b, left])
            cells += len(st.mm) + len(st.lo_hist) + min(pos, scheme.k)
            for entry in st.pend:
                cells += len(entry[2]) + 2
        if cells > stats.peak_cells:
            stats.peak_cells = cells
    for j0, st in enumerate(states):
        while st.pend:
            anchor, b, left = st.pend.popleft()
            emit(j0 + 1, st, anchor, b, left, n)
    return recs, marks, stats


# --- build paths --------------------------------------------------------------


@dataclass
class BuildStats:
    path: str = "naive"
    family_cells: int = 0  # naive: n * slots; streaming: peak retained cells
    peak_live_path: int = 0
    nodes_created_fwd: int = 0
    nodes_created_bwd: int = 0
    fires_fwd: int = 0
    fires_bwd: int = 0
    retained_fwd: int = 0
    retained_bwd: int = 0
    dfs_only_fwd: int = 0
    dfs_only_bwd: int = 0
    family_only_fwd: int = 0
    family_only_bwd: int = 0


@dataclass
class TreeBundle:
    fwd: FactorTree
    bwd: FactorTree
    records: dict
    marks: tuple
    stats: BuildStats


def _assemble(
    n: int, heavy: HeavyContext, records: dict, threshold: Threshold
) -> tuple[FactorTree, FactorTree]:
    fwd_handles, bwd_handles = handles_from_records(n, records, threshold)
    fctx = HeavyLcpOracle(heavy.ranks)
    bctx = HeavyLcpOracle(heavy.ranks[::-1].copy())
    ftree = build_compacted_tree(fctx, sort_handles(fctx, fwd_handles), "forward")
    btree = build_compacted_tree(bctx, sort_handles(bctx, bwd_handles), "backward")
    ftree.validate(threshold)
    btree.validate(threshold)
    return ftree, btree


def build_trees_naive(
    x: WeightedString,
    threshold: Threshold,
    scheme: MinimizerScheme,
    heavy: HeavyContext | None = None,
    family: EstimationFamily | None = None,
    marks=None,
) -> TreeBundle:
    """Materialize the whole family, then read every record off it."""
    heavy = heavy if heavy is not None else build_heavy_context(x)
    if family is None:
        family = build_estimation(x, threshold.z, heavy)
    if marks is None:
        marks = minimizer_set_family(scheme, family)
    records = make_label_records(x, heavy, family, marks)
    ftree, btree = _assemble(x.n, heavy, records, threshold)
    stats = BuildStats(path="naive", family_cells=x.n * family.size)
    return TreeBundle(ftree, btree, records, tuple(sorted(marks)), stats)


def build_trees_space_efficient(
    x: WeightedString,
    threshold: Threshold,
    scheme: MinimizerScheme,
    heavy: HeavyContext | None = None,
) -> TreeBundle:
    """Streamed records plus the instrumented DFS over both directions.

    The DFS is the construction the index is sized for; the streamed packer
    supplies identical records to the naive path.  Fired position sets must
    agree exactly; fired strings may legitimately differ from the family's
    live factors (a solid window can extend heavily in a slot that spells a
    different letter beyond it), so content differences are only counted.
    """
    heavy = heavy if heavy is not None else build_heavy_context(x)
    records, marks, sstats = stream_label_records(x, threshold, scheme, heavy)

    fstats = dfs_scan(x, threshold, scheme, heavy, "forward")
    xr = x.reversed()
    hr = heavy.reversed()
    bstats = dfs_scan(xr, threshold, scheme, hr, "backward")

    n = x.n
    want_fwd = {i for (i, _) in marks}
    want_bwd = {n + 1 - i for (i, _) in marks}
    if fstats.fired != want_fwd or bstats.fired != want_bwd:
        raise InternalInvariantError(
            "DFS minimizer positions disagree with the streamed family"
        )

    ftree, btree = _assemble(n, heavy, records, threshold)

    fwd_keys = {(h.start, tuple((p, r) for p, r, _ in h.diffs)) for h in ftree.leaf_handles}
    bwd_keys = {(h.start, tuple((p, r) for p, r, _ in h.diffs)) for h in btree.leaf_handles}
    fmark_keys = set(fstats.marked)
    bmark_keys = set(bstats.marked)
    stats = BuildStats(
        path="se",
        family_cells=sstats.peak_cells,
        peak_live_path=max(fstats.peak_live_path, bstats.peak_live_path),
        nodes_created_fwd=fstats.nodes_created,
        nodes_created_bwd=bstats.nodes_created,
        fires_fwd=fstats.fires,
        fires_bwd=bstats.fires,
        retained_fwd=fstats.retained,
        retained_bwd=bstats.retained,
        dfs_only_fwd=len(fmark_keys - fwd_keys),
        dfs_only_bwd=len(bmark_keys - bwd_keys),
        family_only_fwd=len(fwd_keys - fmark_keys),
        family_only_bwd=len(bwd_keys - bmark_keys),
    )
    return TreeBundle(ftree, btree, records, tuple(sorted(marks)), stats)
