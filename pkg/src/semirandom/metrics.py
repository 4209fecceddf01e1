"""Post-run measurement and certification.

Works on two layers: the raw multigraph log (rare pairs, square tallies) and
a deduplicated simple-graph view (cliques, degeneracy, colouring, Caro-Wei,
exact small-instance solvers).  Loops and parallel edges are dropped when the
simple view is built, never at insert time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from numba import njit

from .engine import ProcessState


class SimpleView:
    """Symmetric CSR adjacency with loops and duplicate edges removed."""

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = n
        self.indptr = indptr
        self.indices = indices

    @property
    def num_edges(self) -> int:
        return self.indices.size // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)


def simple_view_from_edges(n: int, us, vs) -> SimpleView:
    """Build the view from endpoint arrays (loops and parallels dropped)."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    keep = lo != hi
    key = np.unique(lo[keep] * n + hi[keep])
    lo = key // n
    hi = key % n
    heads = np.concatenate([lo, hi])
    tails = np.concatenate([hi, lo])
    order = np.lexsort((tails, heads))
    heads = heads[order]
    tails = tails[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(heads, minlength=n), out=indptr[1:])
    return SimpleView(n, indptr, tails)


def simple_view(state: ProcessState) -> SimpleView:
    return simple_view_from_edges(state.n, state.square_seq(), state.circle_seq())


def verify_clique(view: SimpleView, vertices: Iterable[int]) -> bool:
    """True iff every pair of the given vertices is adjacent in the view."""
    vs = sorted(set(int(v) for v in vertices))
    if any(v < 0 or v >= view.n for v in vs):
        raise ValueError("clique vertices out of range")
    neighbor_sets = {v: set(view.neighbors(v).tolist()) for v in vs}
    for a_idx, a in enumerate(vs):
        nb = neighbor_sets[a]
        for b in vs[a_idx + 1 :]:
            if b not in nb:
                return False
    return True


# -- rare pairs ---------------------------------------------------------------


@dataclass
class RarePairReport:
    """Rare pair = a circle and a strictly later square on the same vertex.

    per_landing[w] counts pairs sitting on w (what the edge-removal argument
    consumes); per_source[u] attributes each pair to the vertex whose square
    created the circle (what the per-vertex tail bound speaks about).
    """

    per_landing: np.ndarray
    per_source: np.ndarray
    total: int
    max_landing: int
    max_source: int
    removal_budget: int


def _rare_pair_core(n: int, sq: np.ndarray, ci: np.ndarray, rounds: np.ndarray):
    """Per-circle-occurrence later-square counts via composite-key searches."""
    span = int(rounds.max()) + 1 if rounds.size else 1
    keys_sq = np.sort(sq * span + rounds)
    hi = np.searchsorted(keys_sq, ci * span + (span - 1), side="right")
    lo = np.searchsorted(keys_sq, ci * span + rounds, side="right")
    return hi - lo


def count_rare_pairs(state: ProcessState,
                     subset: Optional[Iterable[int]] = None) -> RarePairReport:
    """Count rare pairs, optionally restricted to edges inside `subset`."""
    n = state.n
    sq = state.square_seq()
    ci = state.circle_seq()
    rounds = np.arange(1, state.rounds_played + 1, dtype=np.int64)
    if subset is not None:
        in_s = np.zeros(n, dtype=bool)
        in_s[np.asarray(list(subset), dtype=np.int64)] = True
        keep = in_s[sq] & in_s[ci]
        sq, ci, rounds = sq[keep], ci[keep], rounds[keep]
    if sq.size == 0:
        zero = np.zeros(n, dtype=np.int64)
        return RarePairReport(zero, zero.copy(), 0, 0, 0, 0)
    cnt = _rare_pair_core(n, sq, ci, rounds)
    per_landing = np.bincount(ci, weights=cnt, minlength=n).astype(np.int64)
    per_source = np.bincount(sq, weights=cnt, minlength=n).astype(np.int64)
    pos = per_landing[per_landing > 0]
    budget = int(2 * np.sum(np.ceil(np.sqrt(pos)))) if pos.size else 0
    return RarePairReport(
        per_landing=per_landing,
        per_source=per_source,
        total=int(cnt.sum()),
        max_landing=int(per_landing.max()),
        max_source=int(per_source.max()),
        removal_budget=budget,
    )


@dataclass
class DestroyReport:
    removed_rounds: list
    removed_count: int
    budget: int


def destroy_rare_pairs(state: ProcessState,
                       subset: Optional[Iterable[int]] = None) -> DestroyReport:
    """Pick edges whose removal destroys every rare pair.

    Per landing vertex w with r_w pairs: remove all of w's participating
    circles if there are at most sqrt(r_w) of them, else all participating
    squares if at most sqrt(r_w), else the ceil(sqrt(r_w)) oldest circles
    plus the ceil(sqrt(r_w)) youngest squares.  Total removals stay within
    sum over w of 2*ceil(sqrt(r_w)).
    """
    n = state.n
    sq = state.square_seq()
    ci = state.circle_seq()
    rounds = np.arange(1, state.rounds_played + 1, dtype=np.int64)
    if subset is not None:
        in_s = np.zeros(n, dtype=bool)
        in_s[np.asarray(list(subset), dtype=np.int64)] = True
        keep = in_s[sq] & in_s[ci]
        sq, ci, rounds = sq[keep], ci[keep], rounds[keep]
    removed: set = set()
    budget = 0
    if sq.size == 0:
        return DestroyReport(removed_rounds=[], removed_count=0, budget=0)
    sq_grouped = rounds[np.argsort(sq, kind="stable")]
    sq_starts = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(sq, minlength=n), out=sq_starts[1:])
    ci_grouped = rounds[np.argsort(ci, kind="stable")]
    ci_starts = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(ci, minlength=n), out=ci_starts[1:])
    touched = np.unique(ci)
    for w in touched:
        sq_rounds = sq_grouped[sq_starts[w] : sq_starts[w + 1]]
        ci_rounds = ci_grouped[ci_starts[w] : ci_starts[w + 1]]
        if sq_rounds.size == 0 or ci_rounds.size == 0:
            continue
        later = sq_rounds.size - np.searchsorted(sq_rounds, ci_rounds, side="right")
        r_w = int(later.sum())
        if r_w == 0:
            continue
        v_w = ci_rounds[later > 0]
        earlier = np.searchsorted(ci_rounds, sq_rounds, side="left")
        u_w = sq_rounds[earlier > 0]
        m = math.isqrt(r_w)
        if m * m < r_w:
            m += 1
        budget += 2 * m
        if v_w.size * v_w.size <= r_w:
            removed.update(v_w.tolist())
        elif u_w.size * u_w.size <= r_w:
            removed.update(u_w.tolist())
        else:
            removed.update(np.sort(v_w)[:m].tolist())
            removed.update(np.sort(u_w)[-m:].tolist())
    return DestroyReport(
        removed_rounds=sorted(removed),
        removed_count=len(removed),
        budget=budget,
    )


# -- degeneracy, colouring, independence --------------------------------------


@njit(cache=True)
def _peel_order(indptr, indices, n):
    """Repeated minimum-degree deletion; returns (order, degeneracy)."""
    deg = np.empty(n, dtype=np.int64)
    maxdeg = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] > maxdeg:
            maxdeg = deg[v]
    start = np.zeros(maxdeg + 2, dtype=np.int64)
    for v in range(n):
        start[deg[v] + 1] += 1
    for d in range(1, maxdeg + 2):
        start[d] += start[d - 1]
    vert = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    fill = start[: maxdeg + 1].copy()
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    degeneracy = 0
    for i in range(n):
        v = vert[i]
        if deg[v] > degeneracy:
            degeneracy = deg[v]
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            du = deg[u]
            if du > deg[v]:
                pu = pos[u]
                pw = start[du]
                w = vert[pw]
                if u != w:
                    vert[pu] = w
                    vert[pw] = u
                    pos[u] = pw
                    pos[w] = pu
                start[du] += 1
                deg[u] = du - 1
    return vert, degeneracy


@njit(cache=True)
def _greedy_color(indptr, indices, order, n):
    """Colour in reverse deletion order; first free colour each time."""
    colors = np.full(n, -1, dtype=np.int64)
    mark = np.full(n + 1, -1, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        v = order[i]
        for e in range(indptr[v], indptr[v + 1]):
            c = colors[indices[e]]
            if c >= 0:
                mark[c] = i
        c = 0
        while mark[c] == i:
            c += 1
        colors[v] = c
    return colors


@dataclass
class ColoringReport:
    degeneracy: int
    num_colors: int
    colors: np.ndarray
    peel_order: np.ndarray


def degeneracy_and_coloring(view: SimpleView) -> ColoringReport:
    """k-core peel for degeneracy, then greedy colouring in reverse order."""
    if view.n == 0:
        raise ValueError("empty vertex set")
    order, d = _peel_order(view.indptr, view.indices, view.n)
    colors = _greedy_color(view.indptr, view.indices, order, view.n)
    return ColoringReport(
        degeneracy=int(d),
        num_colors=int(colors.max()) + 1,
        colors=colors,
        peel_order=order,
    )


def coloring_is_proper(view: SimpleView, colors: np.ndarray) -> bool:
    heads = np.repeat(np.arange(view.n), np.diff(view.indptr))
    return bool(np.all(colors[heads] != colors[view.indices]))


def caro_wei(view: SimpleView) -> float:
    """Degree-based independence lower bound: sum over v of 1/(deg(v)+1)."""
    return float(np.sum(1.0 / (view.degrees() + 1.0)))


DEFAULT_EXACT_LIMIT = 40


def _masks_from_view(view: SimpleView) -> list:
    masks = []
    for v in range(view.n):
        m = 0
        for u in view.neighbors(v):
            m |= 1 << int(u)
        masks.append(m)
    return masks


def _max_clique_bitset(masks: Sequence[int], n: int) -> list:
    """Branch and bound with greedy colour-class pruning on int bitsets."""
    best: list = []
    current: list = []

    def expand(cand: int) -> None:
        order_v = []
        bounds = []
        rest = cand
        color = 0
        while rest:
            color += 1
            avail = rest
            while avail:
                b = avail & -avail
                v = b.bit_length() - 1
                order_v.append(v)
                bounds.append(color)
                avail &= ~(masks[v] | b)
                rest &= ~b
        for i in range(len(order_v) - 1, -1, -1):
            if len(current) + bounds[i] <= len(best):
                return
            v = order_v[i]
            current.append(v)
            nxt = cand & masks[v]
            if nxt:
                expand(nxt)
            elif len(current) > len(best):
                best[:] = current
            current.pop()
            cand &= ~(1 << v)

    if n:
        expand((1 << n) - 1)
    return sorted(best)


def exact_omega(view: SimpleView, limit: int = DEFAULT_EXACT_LIMIT) -> int:
    """Exact clique number by branch and bound (small instances only)."""
    if view.n > limit:
        raise ValueError(
            f"exact solver capped at n={limit}; use the regime bounds instead"
        )
    return len(_max_clique_bitset(_masks_from_view(view), view.n))


def exact_alpha(view: SimpleView, limit: int = DEFAULT_EXACT_LIMIT) -> int:
    """Exact independence number: clique number of the complement."""
    if view.n > limit:
        raise ValueError(
            f"exact solver capped at n={limit}; use the regime bounds instead"
        )
    n = view.n
    full = (1 << n) - 1
    comp = []
    for v in range(n):
        m = 0
        for u in view.neighbors(v):
            m |= 1 << int(u)
        comp.append(full & ~(m | (1 << v)))
    return len(_max_clique_bitset(comp, n))


def max_squares(state: ProcessState) -> tuple:
    """(largest square tally, lowest vertex attaining it)."""
    counts = state.square_counts()
    v = int(np.argmax(counts))
    return int(counts[v]), v


# -- aggregated report ---------------------------------------------------------

ALL_METRICS = ("clique", "max_squares", "degeneracy", "caro_wei",
               "rare_pairs", "exact")


@dataclass
class MetricsReport:
    n: int
    rounds: int
    clique_vertices: Optional[list] = None
    clique_verified: Optional[bool] = None
    max_squares: Optional[int] = None
    degeneracy: Optional[int] = None
    num_colors: Optional[int] = None
    caro_wei: Optional[float] = None
    rare_pairs: Optional[RarePairReport] = None
    exact_alpha: Optional[int] = None
    exact_omega: Optional[int] = None
    extras: dict = field(default_factory=dict)


def compute_metrics(state: ProcessState,
                    enable: Iterable[str] = ("clique", "max_squares"),
                    clique: Optional[Iterable[int]] = None,
                    exact_limit: int = DEFAULT_EXACT_LIMIT) -> MetricsReport:
    """Run the enabled measurements over a finished state."""
    enable = set(enable)
    unknown = enable - set(ALL_METRICS)
    if unknown:
        raise ValueError(f"unknown metrics {sorted(unknown)}; known: {ALL_METRICS}")
    rep = MetricsReport(n=state.n, rounds=state.rounds_played)
    view = None
    if enable & {"clique", "degeneracy", "caro_wei", "exact"}:
        view = simple_view(state)
    if "clique" in enable and clique is not None:
        vs = list(clique)
        rep.clique_vertices = vs
        rep.clique_verified = verify_clique(view, vs) if vs else False
    if "max_squares" in enable:
        rep.max_squares = max_squares(state)[0]
    if "degeneracy" in enable:
        col = degeneracy_and_coloring(view)
        rep.degeneracy = col.degeneracy
        rep.num_colors = col.num_colors
    if "caro_wei" in enable:
        rep.caro_wei = caro_wei(view)
    if "rare_pairs" in enable:
        rep.rare_pairs = count_rare_pairs(state)
    if "exact" in enable and state.n <= exact_limit:
        rep.exact_alpha = exact_alpha(view, exact_limit)
        rep.exact_omega = exact_omega(view, exact_limit)
    return rep
