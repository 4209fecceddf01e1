"""Player strategies for the semi-random process.

Every strategy implements decide(state, square, round_index) -> circle and
may keep private mutable memory; it must not mutate the engine state.  The
filler answer for rounds a strategy does not care about is (square + 1) mod n,
a fixed rule that keeps runs deterministic.

Strategies whose decisions depend only on per-vertex square tallies
(the circulant family) also implement decide_batch, a vectorised evaluation
of the same decision table used by the fast executor in the CLI; sequential
and batched execution produce identical edge logs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .engine import ProcessState


class Strategy:
    """Decision contract: (read-only state, square, 1-based round) -> circle."""

    name = "strategy"

    def decide(self, state: ProcessState, square: int, round_index: int) -> int:
        raise NotImplementedError

    def report(self):
        """Certificate describing what the strategy built, if anything."""
        return None


class ConstantStrategy(Strategy):
    """Always answers the same vertex; useful as a baseline and in tests."""

    name = "constant"

    def __init__(self, n: int, vertex: int):
        if not 0 <= vertex < n:
            raise ValueError(f"constant vertex {vertex} out of range [0, {n})")
        self.n = n
        self.vertex = vertex

    def decide(self, state, square, round_index):
        return self.vertex


@dataclass
class CliqueCertificate:
    """Vertices claimed to induce a complete graph, and when it was done."""

    vertices: list
    completed_round: Optional[int] = None
    growth_rounds: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.vertices)


class GrowingCliqueStrategy(Strategy):
    """Grows one clique a vertex at a time, steering squares by their tally.

    A vertex outside the clique that has received s squares so far has its
    (s+1)-th square answered with clique member number s+1; once a vertex has
    been connected to every current member it joins the clique.  Round 1
    bootstraps the first edge: the square becomes member 1 and the circle,
    placed on (square + 1) mod n, becomes member 2.  Squares landing on
    clique members get the filler answer, those edges are never needed.
    """

    name = "alg1"

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("clique growth needs n >= 2")
        self.n = n
        self.clique: list = []
        self.in_clique = bytearray(n)
        self.out_sq = [0] * n
        self.growth_rounds: list = []

    def decide(self, state, square, round_index):
        clique = self.clique
        if not clique:
            mate = square + 1 if square + 1 < self.n else 0
            clique.append(square)
            clique.append(mate)
            self.in_clique[square] = 1
            self.in_clique[mate] = 1
            self.growth_rounds.append(round_index)
            return mate
        if self.in_clique[square]:
            mate = square + 1
            return mate if mate < self.n else 0
        s = self.out_sq[square]
        answer = clique[s]
        if s + 1 == len(clique):
            self.in_clique[square] = 1
            clique.append(square)
            self.growth_rounds.append(round_index)
        else:
            self.out_sq[square] = s + 1
        return answer

    def report(self) -> CliqueCertificate:
        done = self.growth_rounds[-1] if self.growth_rounds else None
        return CliqueCertificate(
            vertices=list(self.clique),
            completed_round=done,
            growth_rounds=list(self.growth_rounds),
        )

    def verify_invariant(self, state: ProcessState) -> None:
        """Outside vertices' squares must point at the clique prefix in order."""
        circles = state._circles_seq
        for v in range(self.n):
            if self.in_clique[v]:
                continue
            rounds = state.square_times(v)
            assert len(rounds) == self.out_sq[v]
            for j, r in enumerate(rounds):
                assert circles[r - 1] == self.clique[j], (
                    f"square {j + 1} on {v} answered {circles[r - 1]}, "
                    f"expected clique member {self.clique[j]}"
                )


class CirculantCliqueStrategy(Strategy):
    """Builds one K_k on a fixed odd-size target set by circulant wiring.

    The j-th square on target i (j up to ell = (k-1)/2) is answered with
    target (i + j) mod k; the difference classes 1..ell cover every target
    pair exactly once, so the clique is complete as soon as every target has
    ell squares.  Everything else gets the filler answer.
    """

    name = "alg2"

    def __init__(self, n: int, ell: Optional[int] = None,
                 targets: Optional[list] = None):
        if targets is None:
            if ell is None:
                raise ValueError("need ell or an explicit target list")
            targets = list(range(2 * ell + 1))
        targets = [int(v) for v in targets]
        k = len(targets)
        if k % 2 == 0:
            raise ValueError(f"target count must be odd, got {k}")
        if k > n:
            raise ValueError(f"{k} targets do not fit in {n} vertices")
        if len(set(targets)) != k:
            raise ValueError("targets must be distinct")
        if ell is not None and 2 * ell + 1 != k:
            raise ValueError(f"ell {ell} inconsistent with {k} targets")
        self.n = n
        self.k = k
        self.ell = (k - 1) // 2
        self.targets = targets
        self.target_pos = np.full(n, -1, dtype=np.int64)
        self.target_pos[targets] = np.arange(k)
        self.counts = [0] * k
        self.filled = k if self.ell == 0 else 0
        self.done_round: Optional[int] = 0 if self.ell == 0 else None

    def decide(self, state, square, round_index):
        i = self.target_pos[square]
        if i < 0:
            mate = square + 1
            return mate if mate < self.n else 0
        i = int(i)
        j = self.counts[i] + 1
        if j > self.ell:
            mate = square + 1
            return mate if mate < self.n else 0
        self.counts[i] = j
        if j == self.ell:
            self.filled += 1
            if self.filled == self.k and self.done_round is None:
                self.done_round = round_index
        return self.targets[(i + j) % self.k]

    def decide_batch(self, squares: np.ndarray, start_round: int) -> np.ndarray:
        """Vectorised decide over a whole block of squares."""
        n = self.n
        k = self.k
        ell = self.ell
        circles = squares + 1
        circles[circles == n] = 0
        pos = self.target_pos[squares]
        idx = np.flatnonzero(pos >= 0)
        if idx.size == 0 or ell == 0:
            return circles
        tv = pos[idx]
        order = np.argsort(tv, kind="stable")
        sorted_tv = tv[order]
        counts_batch = np.bincount(sorted_tv, minlength=k)
        starts = np.zeros(k, dtype=np.int64)
        np.cumsum(counts_batch[:-1], out=starts[1:])
        occ = np.empty(tv.size, dtype=np.int64)
        occ[order] = np.arange(tv.size, dtype=np.int64) - np.repeat(starts, counts_batch)
        prior = np.asarray(self.counts, dtype=np.int64)
        j = prior[tv] + occ + 1
        active = j <= ell
        tmap = np.asarray(self.targets, dtype=np.int64)
        circles[idx[active]] = tmap[(tv[active] + j[active]) % k]
        fills = j == ell
        if fills.any():
            fill_rounds = np.full(k, -1, dtype=np.int64)
            fill_rounds[tv[fills]] = start_round + idx[fills]
            already = prior >= ell
            fill_rounds[already] = 0
            new_counts = np.minimum(prior + counts_batch, ell)
            self.counts = new_counts.tolist()
            self.filled = int(np.count_nonzero(new_counts >= ell))
            if self.filled == k and self.done_round is None:
                self.done_round = int(fill_rounds.max())
        else:
            self.counts = np.minimum(prior + counts_batch, ell).tolist()
        return circles

    def report(self) -> Optional[CliqueCertificate]:
        if self.done_round is None:
            return CliqueCertificate(vertices=[], completed_round=None)
        return CliqueCertificate(
            vertices=list(self.targets), completed_round=self.done_round
        )


def roundrobin_clique_strategy(n: int, k: int) -> CirculantCliqueStrategy:
    """Dense-regime round robin: the circulant on targets 0..k-1, k odd."""
    if k % 2 == 0 or k < 1:
        raise ValueError(f"k must be odd and positive, got {k}")
    s = CirculantCliqueStrategy(n, targets=list(range(min(k, n))))
    s.name = "obs2"
    return s


@dataclass
class PartitionCertificate:
    """Outcome of running the circulant builder on every part in parallel."""

    num_parts: int
    part_size: int
    failed_parts: int
    done_rounds: dict
    loose_vertices: int
    first_complete: Optional[tuple] = None

    @property
    def alpha_certificate(self) -> int:
        # one vertex per part plus up to k-1 extras from each failed part
        return self.num_parts + (self.part_size - 1) * self.failed_parts


class PartitionCliqueStrategy(Strategy):
    """Covers [n] by ceil(n/k) consecutive blocks and runs the circulant
    builder independently inside each block.

    A short final block uses the largest odd target count that fits; with an
    even-size remainder one vertex stays outside every clique (reported as
    loose_vertices on the certificate).  In first-success mode the reported
    highlight is the earliest part to finish; either way the certificate
    carries per-part completion rounds and the failed-part tally.
    """

    name = "partition"

    def __init__(self, n: int, k: int, first_success: bool = False):
        if k % 2 == 0 or k < 1:
            raise ValueError(f"part size k must be odd and positive, got {k}")
        self.n = n
        self.k = k
        self.first_success = first_success
        self.num_parts = -(-n // k)
        last_size = n - (self.num_parts - 1) * k
        last_m = last_size if last_size % 2 == 1 else last_size - 1
        self.last_m = last_m
        self.last_ell = (last_m - 1) // 2
        self.ell = (k - 1) // 2
        self.counts = [0] * n
        self.filled_in_part = [0] * self.num_parts
        self.done_rounds: dict = {}
        self.fill_round = [0] * n
        for p in range(self.num_parts):
            m_p, ell_p = self._part_shape(p)
            if ell_p == 0:
                self.filled_in_part[p] = m_p
                self.done_rounds[p] = 0

    def _part_shape(self, p: int):
        if p == self.num_parts - 1:
            return self.last_m, self.last_ell
        return self.k, self.ell

    def decide(self, state, square, round_index):
        p, i = divmod(square, self.k)
        m_p, ell_p = self._part_shape(p)
        if i >= m_p:
            mate = square + 1
            return mate if mate < self.n else 0
        j = self.counts[square] + 1
        if j > ell_p:
            mate = square + 1
            return mate if mate < self.n else 0
        self.counts[square] = j
        if j == ell_p:
            self.fill_round[square] = round_index
            self.filled_in_part[p] += 1
            if self.filled_in_part[p] == m_p and p not in self.done_rounds:
                self.done_rounds[p] = round_index
        return p * self.k + (i + j) % m_p

    def decide_batch(self, squares: np.ndarray, start_round: int) -> np.ndarray:
        n = self.n
        k = self.k
        circles = squares + 1
        circles[circles == n] = 0
        part = squares // k
        i_in = squares - part * k
        m_p = np.where(part == self.num_parts - 1, self.last_m, k)
        ell_p = (m_p - 1) // 2
        cand = np.flatnonzero((i_in < m_p) & (ell_p > 0))
        if cand.size == 0:
            return circles
        vs = squares[cand]
        order = np.argsort(vs, kind="stable")
        sorted_vs = vs[order]
        counts_batch = np.bincount(sorted_vs, minlength=n)
        starts = np.zeros(n, dtype=np.int64)
        np.cumsum(counts_batch[:-1], out=starts[1:])
        occ = np.empty(vs.size, dtype=np.int64)
        occ[order] = np.arange(vs.size, dtype=np.int64) - np.repeat(starts, counts_batch)
        prior = np.asarray(self.counts, dtype=np.int64)
        j = prior[vs] + occ + 1
        lim = ell_p[cand]
        active = j <= lim
        ai = cand[active]
        circles[ai] = part[ai] * k + (i_in[ai] + j[active]) % m_p[ai]
        fills = j == lim
        if fills.any():
            fv = vs[fills]
            fr = start_round + cand[fills]
            fill_round = np.asarray(self.fill_round, dtype=np.int64)
            fill_round[fv] = fr
            self.fill_round = fill_round.tolist()
        new_counts = np.minimum(
            prior + np.bincount(vs, minlength=n),
            np.where(
                np.arange(n) // k == self.num_parts - 1, self.last_ell, self.ell
            ),
        )
        self.counts = new_counts.tolist()
        self._refresh_part_completion()
        return circles

    def _refresh_part_completion(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        fill_round = np.asarray(self.fill_round, dtype=np.int64)
        for p in range(self.num_parts):
            m_p, ell_p = self._part_shape(p)
            base = p * self.k
            c = counts[base : base + m_p]
            self.filled_in_part[p] = int(np.count_nonzero(c >= ell_p))
            if self.filled_in_part[p] == m_p and p not in self.done_rounds:
                self.done_rounds[p] = int(fill_round[base : base + m_p].max())

    def report(self) -> PartitionCertificate:
        failed = sum(
            1
            for p in range(self.num_parts)
            if self.filled_in_part[p] < self._part_shape(p)[0]
        )
        loose = (self.n - (self.num_parts - 1) * self.k) - self.last_m
        first = None
        finished = {p: r for p, r in self.done_rounds.items() if r > 0}
        if finished:
            p_best = min(finished, key=lambda p: (finished[p], p))
            first = (finished[p_best], p_best)
        return PartitionCertificate(
            num_parts=self.num_parts,
            part_size=self.k,
            failed_parts=failed,
            done_rounds=dict(self.done_rounds),
            loose_vertices=loose,
            first_complete=first,
        )

    def part_members(self, p: int) -> list:
        base = p * self.k
        return list(range(base, min(base + self.k, self.n)))

    def part_targets(self, p: int) -> list:
        base = p * self.k
        return list(range(base, base + self._part_shape(p)[0]))


class MinDegreeStrategy(Strategy):
    """Places every circle on a vertex of current minimum degree.

    Ties break to the lowest index; the square vertex itself is skipped when
    another minimum-degree vertex exists (a loop would waste the circle's
    degree contribution).  Buckets of lazily-cleaned index heaps keyed by
    degree give amortised O(log n) rounds.
    """

    name = "greedy"

    def __init__(self, n: int):
        self.n = n
        self.deg = [0] * n
        self.heaps = [list(range(n))]
        self.min_deg = 0

    def _push(self, v: int, d: int) -> None:
        heaps = self.heaps
        while len(heaps) <= d:
            heaps.append([])
        heapq.heappush(heaps[d], v)

    def decide(self, state, square, round_index):
        deg = self.deg
        heaps = self.heaps
        b = self.min_deg
        heap = heaps[b]
        while True:
            while heap and deg[heap[0]] != b:
                heapq.heappop(heap)
            if heap:
                break
            b += 1
            heap = heaps[b]
        self.min_deg = b
        v = heap[0]
        if v == square:
            heapq.heappop(heap)
            while heap and deg[heap[0]] != b:
                heapq.heappop(heap)
            if heap:
                alt = heap[0]
                heapq.heappush(heap, v)
                v = alt
            else:
                heapq.heappush(heap, v)
        if v == square:
            deg[v] += 2
            self._push(v, deg[v])
            return v
        deg[v] += 1
        self._push(v, deg[v])
        deg[square] += 1
        self._push(square, deg[square])
        return v

    def verify_invariant(self, state: ProcessState) -> None:
        assert self.deg == state.degree, "strategy degree mirror diverged"
        live_min = min(self.deg)
        assert self.min_deg <= live_min


def offline_place(squares, circles_total: int) -> np.ndarray:
    """Final degrees after greedily dropping `circles_total` circles onto the
    given square tallies, always on a current minimum-degree vertex with
    lowest-index tie break.

    Equivalent to the sequential greedy fill: degrees rise level by level, so
    the result is the water-filling level L with the leftover circles going
    to the lowest-indexed vertices sitting at L.
    """
    s = np.asarray(squares, dtype=np.int64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("squares must be a nonempty 1-d array")
    if circles_total < 0:
        raise ValueError("circle count must be nonnegative")
    if circles_total == 0:
        return s.copy()
    sorted_s = np.sort(s)
    prefix = np.concatenate([[0], np.cumsum(sorted_s)])

    def cost(level: int) -> int:
        cnt = int(np.searchsorted(sorted_s, level, side="left"))
        return level * cnt - int(prefix[cnt])

    lo = 0
    hi = 1
    while cost(hi) <= circles_total:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cost(mid) <= circles_total:
            lo = mid
        else:
            hi = mid
    level = lo
    leftover = circles_total - cost(level)
    final = np.maximum(s, level)
    if leftover:
        final[np.flatnonzero(s <= level)[:leftover]] += 1
    return final


def offline_circles(squares, circles_total: int) -> np.ndarray:
    """The circle multiset realising offline_place, expanded per vertex."""
    s = np.asarray(squares, dtype=np.int64)
    final = offline_place(s, circles_total)
    return np.repeat(np.arange(s.size, dtype=np.int64), final - s)


STRATEGY_NAMES = (
    "alg1", "alg2", "partition", "partition-first", "greedy", "obs2",
    "offline", "constant:<v>",
)


def make_strategy(name: str, n: int, params: Optional[dict] = None) -> Strategy:
    """Build a strategy from its CLI name; 'offline' is a batched placement
    handled by the simulate driver, not a per-round strategy."""
    params = params or {}
    if name == "alg1":
        return GrowingCliqueStrategy(n)
    if name == "alg2":
        if "targets" in params:
            return CirculantCliqueStrategy(n, targets=params["targets"])
        if "ell" not in params:
            raise ValueError("alg2 needs an 'ell' parameter")
        return CirculantCliqueStrategy(n, ell=int(params["ell"]))
    if name in ("partition", "partition-first"):
        if "k" not in params:
            raise ValueError(f"{name} needs a 'k' parameter (odd part size)")
        return PartitionCliqueStrategy(
            n, int(params["k"]), first_success=(name == "partition-first")
        )
    if name == "greedy":
        return MinDegreeStrategy(n)
    if name == "obs2":
        if "k" not in params:
            raise ValueError("obs2 needs a 'k' parameter (odd target count)")
        return roundrobin_clique_strategy(n, int(params["k"]))
    if name.startswith("constant:"):
        return ConstantStrategy(n, int(name.split(":", 1)[1]))
    if name == "offline":
        raise ValueError("offline is not a per-round strategy; use the "
                         "simulate driver, which special-cases it")
    raise ValueError(f"unknown strategy {name!r}; known: {STRATEGY_NAMES}")
