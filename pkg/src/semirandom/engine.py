"""Core engine for the semi-random graph process.

Each round a *square* vertex is drawn uniformly at random and the player
answers with a *circle* vertex; the edge (square, circle) is appended to the
evolving multigraph.  Vertices are 0-indexed, i.e. the vertex set is
{0, ..., n-1} everywhere in this package.

The engine is a strict multigraph recorder: parallel edges and loops are
stored as-is, and simple-graph views are derived on demand by the metrics
layer.  A single run is sequential; independent runs (distinct states) may
execute in parallel.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

# Squares are drawn from the generator in fixed blocks so that single draws
# and bulk draws consume the identical stream.
DRAW_CHUNK = 1 << 16


@dataclass(frozen=True)
class RngConfig:
    """Seed for a run; identical (seed, n, strategy, T) reproduce the run."""

    seed: int


@dataclass(frozen=True)
class RoundRecord:
    round: int
    square: int
    circle: int


class StrategyFault(RuntimeError):
    """Raised when a strategy answers with an out-of-range vertex."""

    def __init__(self, round_index: int, answer):
        self.round_index = round_index
        self.answer = answer
        super().__init__(
            f"strategy returned invalid circle {answer!r} in round {round_index}"
        )


class ProcessState:
    """Evolving multigraph plus per-vertex tallies and the full edge log.

    Counts are kept in plain lists (fast scalar updates in the hot loop);
    numpy views are materialised lazily for the metrics layer.
    """

    def __init__(self, n: int, rng: "RngConfig | int"):
        if n < 1:
            raise ValueError(f"need at least one vertex, got n={n}")
        seed = rng.seed if isinstance(rng, RngConfig) else int(rng)
        self.n = n
        self.seed = seed
        self.rounds_played = 0
        self.loops = 0
        self.squares = [0] * n
        self.circles = [0] * n
        self.degree = [0] * n
        self._squares_seq = array("q")
        self._circles_seq = array("q")
        self._rng = np.random.default_rng(seed)
        self._buf: list = []
        self._pos = 0
        self._cache_round = -1
        self._cache: dict = {}

    # -- randomness ---------------------------------------------------------

    def draw_square(self) -> int:
        """Next uniform vertex from the run's seeded stream."""
        if self._pos >= len(self._buf):
            self._buf = self._rng.integers(0, self.n, size=DRAW_CHUNK).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v

    def draw_squares(self, count: int) -> np.ndarray:
        """Bulk draw; identical to `count` successive draw_square calls."""
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            if self._pos >= len(self._buf):
                self._buf = self._rng.integers(0, self.n, size=DRAW_CHUNK).tolist()
                self._pos = 0
            take = min(count - filled, len(self._buf) - self._pos)
            out[filled : filled + take] = self._buf[self._pos : self._pos + take]
            self._pos += take
            filled += take
        return out

    # -- mutation -----------------------------------------------------------

    def apply_decision(self, square: int, circle: int) -> None:
        """Append one edge; a loop (square == circle) adds 2 to that degree."""
        n = self.n
        if not (0 <= square < n):
            raise ValueError(f"square {square} out of range [0, {n})")
        if not (0 <= circle < n):
            raise ValueError(f"circle {circle} out of range [0, {n})")
        self.rounds_played += 1
        self._squares_seq.append(square)
        self._circles_seq.append(circle)
        self.squares[square] += 1
        self.circles[circle] += 1
        self.degree[square] += 1
        self.degree[circle] += 1
        if square == circle:
            self.loops += 1

    def bulk_apply(self, squares: Sequence[int], circles: Sequence[int]) -> None:
        """Apply many rounds at once; equivalent to repeated apply_decision."""
        sq = np.asarray(squares, dtype=np.int64)
        ci = np.asarray(circles, dtype=np.int64)
        if sq.shape != ci.shape or sq.ndim != 1:
            raise ValueError("squares and circles must be 1-d of equal length")
        if sq.size == 0:
            return
        n = self.n
        if sq.min() < 0 or sq.max() >= n:
            raise ValueError("square vertex out of range")
        if ci.min() < 0 or ci.max() >= n:
            raise ValueError("circle vertex out of range")
        self._squares_seq.extend(sq.tolist())
        self._circles_seq.extend(ci.tolist())
        sq_add = np.bincount(sq, minlength=n)
        ci_add = np.bincount(ci, minlength=n)
        new_sq = np.asarray(self.squares, dtype=np.int64) + sq_add
        new_ci = np.asarray(self.circles, dtype=np.int64) + ci_add
        self.squares = new_sq.tolist()
        self.circles = new_ci.tolist()
        self.degree = (new_sq + new_ci).tolist()
        self.loops += int(np.count_nonzero(sq == ci))
        self.rounds_played += sq.size

    # -- views --------------------------------------------------------------

    def _arrays(self, key, build):
        if self._cache_round != self.rounds_played:
            self._cache = {}
            self._cache_round = self.rounds_played
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def square_counts(self) -> np.ndarray:
        return self._arrays("sq", lambda: np.asarray(self.squares, dtype=np.int64))

    def circle_counts(self) -> np.ndarray:
        return self._arrays("ci", lambda: np.asarray(self.circles, dtype=np.int64))

    def degree_counts(self) -> np.ndarray:
        return self._arrays("de", lambda: np.asarray(self.degree, dtype=np.int64))

    def square_seq(self) -> np.ndarray:
        """Square vertex of round t at index t-1."""
        return np.frombuffer(self._squares_seq, dtype=np.int64).copy() \
            if self._squares_seq else np.empty(0, dtype=np.int64)

    def circle_seq(self) -> np.ndarray:
        return np.frombuffer(self._circles_seq, dtype=np.int64).copy() \
            if self._circles_seq else np.empty(0, dtype=np.int64)

    def edge_log(self) -> Iterable[RoundRecord]:
        for t in range(self.rounds_played):
            yield RoundRecord(t + 1, self._squares_seq[t], self._circles_seq[t])

    def square_times(self, v: int) -> list:
        """Rounds (1-based, increasing) at which squares landed on v."""
        starts, rounds = self._arrays("sq_times", self._group_square_times)
        return rounds[starts[v] : starts[v + 1]].tolist()

    def _group_square_times(self):
        sq = self.square_seq()
        order = np.argsort(sq, kind="stable")
        rounds = order.astype(np.int64) + 1
        starts = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(sq, minlength=self.n), out=starts[1:])
        return starts, rounds

    def check_conservation(self) -> None:
        """Exact conservation laws; raises AssertionError on violation."""
        t = self.rounds_played
        assert sum(self.squares) == t, "sum of square counts != T"
        assert sum(self.circles) == t, "sum of circle counts != T"
        assert sum(self.degree) == 2 * t, "sum of degrees != 2T"
        assert len(self._squares_seq) == t and len(self._circles_seq) == t


def new_process(n: int, rng: "RngConfig | int") -> ProcessState:
    """Empty n-vertex state with a seeded square generator."""
    return ProcessState(n, rng)


@dataclass
class RunReport:
    """Final state plus whatever certificate the strategy reported."""

    state: ProcessState
    certificate: Optional[object]


def run(state: ProcessState, strategy, rounds: int, check_every: int = 0) -> RunReport:
    """Play `rounds` rounds: draw a square, ask the strategy, add the edge.

    The strategy sees the live state (read-only by contract) plus the square
    and the 1-based round index.  `check_every` > 0 re-verifies conservation
    and the strategy's own invariant every that many rounds (debug aid).
    """
    if rounds < 1:
        raise ValueError(f"need at least one round, got {rounds}")
    n = state.n
    decide = strategy.decide
    squares = state.squares
    circles = state.circles
    degree = state.degree
    ap_sq = state._squares_seq.append
    ap_ci = state._circles_seq.append
    loops = 0
    t0 = state.rounds_played
    for t in range(t0 + 1, t0 + rounds + 1):
        u = state.draw_square()
        v = decide(state, u, t)
        if not (isinstance(v, int) and 0 <= v < n):
            v = int(v) if hasattr(v, "__index__") else v
            if not (isinstance(v, int) and 0 <= v < n):
                raise StrategyFault(t, v)
        ap_sq(u)
        ap_ci(v)
        squares[u] += 1
        circles[v] += 1
        degree[u] += 1
        degree[v] += 1
        if u == v:
            loops += 1
        state.rounds_played = t
        if check_every and t % check_every == 0:
            state.check_conservation()
            verify = getattr(strategy, "verify_invariant", None)
            if verify is not None:
                verify(state)
    state.loops += loops
    return RunReport(state=state, certificate=strategy.report())


# -- edge-log export / import ------------------------------------------------

EDGE_LOG_HEADER = "round,square,circle"


def export_edge_log(state: ProcessState, path) -> None:
    """Write the log as CSV, one record per round, LF line endings."""
    with open(path, "w", newline="\n") as fh:
        fh.write(EDGE_LOG_HEADER + "\n")
        sq = state._squares_seq
        ci = state._circles_seq
        for t in range(state.rounds_played):
            fh.write(f"{t + 1},{sq[t]},{ci[t]}\n")


def import_edge_log(path, n: Optional[int] = None,
                    rng: "RngConfig | int" = 0) -> ProcessState:
    """Rebuild a state by replaying an exported log.

    n defaults to 1 + the largest vertex mentioned in the log.  The RNG seed
    only matters if the caller keeps playing on the imported state.
    """
    sq = []
    ci = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != EDGE_LOG_HEADER:
            raise ValueError(f"bad edge-log header: {header!r}")
        for expect, line in enumerate(fh, start=1):
            r, u, v = line.strip().split(",")
            if int(r) != expect:
                raise ValueError(f"round numbers must be consecutive, got {r}")
            sq.append(int(u))
            ci.append(int(v))
    if n is None:
        n = max(max(sq, default=0), max(ci, default=0)) + 1
    state = ProcessState(n, rng)
    state.bulk_apply(sq, ci)
    return state
