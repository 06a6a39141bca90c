"""Greedy grammar compression: each round replaces the repeated substring
that shrinks ||S', G|| the most.

The gain of replacing w with f_w disjoint occurrences is
(f_w - 1)(|w| - 1) - 1; rounds continue while any substring has f_w >= 2
and |w| >= 2 (zero-gain pair rounds included, which is what makes the final
grammar irreducible).  Ties: maximum gain, then longer substring, then
leftmost first occurrence; candidates live in S' and all rule right-hand
sides, matches never span two of them.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .grammar import FullGrammar, grammar_from_segments
from .pairs import PairEngine
from .repair import log_sigma
from .reporting import BoundRow, CheckReport
from .textcore import Text

RUN_TO_END = "run_to_end"
FULL_THRESHOLD = "full_threshold"
MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class GreedyPolicy:
    kind: str
    param: int | None = None

    @classmethod
    def run_to_end(cls) -> "GreedyPolicy":
        return cls(RUN_TO_END)

    @classmethod
    def full_threshold(cls) -> "GreedyPolicy":
        """Stop once ||S', G|| is first below ceil(64 n / log_sigma n)."""
        return cls(FULL_THRESHOLD)

    @classmethod
    def max_iterations(cls, m: int) -> "GreedyPolicy":
        if m < 0:
            raise ValueError("iteration budget must be >= 0")
        return cls(MAX_ITERATIONS, m)


def greedy_threshold(n: int, sigma: int) -> int:
    return math.ceil(64.0 * n / log_sigma(n, sigma))


@dataclass(frozen=True)
class GreedyStep:
    iteration: int            # 1-based
    substring: tuple
    frequency: int            # disjoint occurrences replaced
    gain: int                 # (f-1)(|w|-1) - 1
    full_size_after: int      # ||S', G|| after the round
    max_pair_freq: int        # most frequent pair before the round

    def as_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "substring": list(self.substring),
            "frequency": self.frequency,
            "gain": self.gain,
            "full_size_after": self.full_size_after,
            "max_pair_freq": self.max_pair_freq,
        }


@dataclass
class GreedyTrace:
    steps: list[GreedyStep]
    policy: GreedyPolicy
    initial_size: int
    sigma: int
    threshold: int | None
    stopped_by: str  # "exhausted" | "threshold" | "max_iterations"


class _Candidate:
    __slots__ = ("gain", "length", "first", "word", "count", "positions")

    def __init__(self, gain, length, first, word, count, positions):
        self.gain = gain
        self.length = length
        self.first = first
        self.word = word
        self.count = count
        self.positions = positions

    def key(self):
        return (self.gain, self.length, -self.first)


def _scan(segments) -> tuple[_Candidate | None, int]:
    """Best candidate over all segment substrings, plus the exact max pair count.

    Windows are coded level by level (length l = pair of the length l-1 code
    and one more symbol), so equal windows share a code at every length; the
    greedy non-overlapping count of each repeated code is computed from its
    sorted positions.
    """
    parts = []
    for i, seg in enumerate(segments):
        parts.append(np.asarray(seg, dtype=np.int64))
        parts.append(np.asarray([-(i + 1)], dtype=np.int64))  # unique separator
    arr = np.concatenate(parts)[:-1] if parts else np.zeros(0, dtype=np.int64)
    total = len(arr)
    if total < 2:
        return None, 0
    _, ids = np.unique(arr, return_inverse=True)
    ids = ids.astype(np.int64)
    pack = total + 1
    best: _Candidate | None = None
    max_pair = 0
    prev = ids
    length = 1
    while True:
        length += 1
        m = total - length + 1
        if m < 1:
            break
        packed = prev[:m] * pack + ids[length - 1 : length - 1 + m]
        _, inv, counts = np.unique(packed, return_inverse=True, return_counts=True)
        inv = inv.astype(np.int64)
        if length == 2:
            max_pair = 1 if m else 0
        repeated = counts >= 2
        if not repeated.any():
            break
        order = np.argsort(inv, kind="stable")
        starts = np.zeros(len(counts) + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        max_f = 1
        for g in np.flatnonzero(repeated):
            pos = order[starts[g] : starts[g + 1]]
            f = 0
            first = -1
            taken = []
            limit = -1
            for p in pos:
                if p >= limit:
                    f += 1
                    limit = p + length
                    taken.append(int(p))
                    if first < 0:
                        first = int(p)
            if f > max_f:
                max_f = f
            if f >= 2:
                gain = (f - 1) * (length - 1) - 1
                cand = _Candidate(gain, length, first, None, f, taken)
                if best is None or cand.key() > best.key():
                    cand.word = tuple(int(x) for x in arr[first : first + length])
                    best = cand
        if length == 2:
            max_pair = max_f
        if max_f < 2:
            break
        prev = inv
    return best, max_pair


def _apply(segments, offsets, cand: _Candidate, new_symbol: int):
    """Replace the candidate's occurrences (global positions) with new_symbol."""
    per_seg: dict[int, list[int]] = {}
    for p in cand.positions:
        si = bisect.bisect_right(offsets, p) - 1
        per_seg.setdefault(si, []).append(p - offsets[si])
    for si, starts in per_seg.items():
        seg = segments[si]
        out = []
        i = 0
        hit = set(starts)
        while i < len(seg):
            if i in hit:
                out.append(new_symbol)
                i += cand.length
            else:
                out.append(seg[i])
                i += 1
        segments[si] = out


def _offsets(segments) -> list[int]:
    offs = []
    base = 0
    for seg in segments:
        offs.append(base)
        base += len(seg) + 1
    return offs


def greedy_run(
    text: Text,
    policy: GreedyPolicy | None = None,
    on_step=None,
) -> tuple[FullGrammar, GreedyTrace]:
    """Run Greedy under the given stopping policy.

    Strictly-positive-gain rounds are found by rescanning all candidate
    substrings; once only zero-gain pairs remain (each occurring exactly
    twice), the run switches to incremental pair replacement, which cannot
    create new candidates, and finishes with a defensive rescan.
    """
    policy = policy or GreedyPolicy.run_to_end()
    n = len(text)
    if n < 2:
        raise ValueError("Greedy needs |text| >= 2")
    if policy.kind == FULL_THRESHOLD and text.sigma < 2:
        raise ValueError("threshold policy needs sigma >= 2")
    threshold = greedy_threshold(n, text.sigma) if policy.kind == FULL_THRESHOLD else None
    sigma = text.sigma

    segments: list[list[int]] = [list(text.symbols)]
    steps: list[GreedyStep] = []
    stopped_by = "exhausted"
    size = n

    def next_symbol() -> int:
        return sigma + len(segments) - 1

    def record(word, freq, gain, max_pair):
        steps.append(GreedyStep(len(steps) + 1, word, freq, gain, size, max_pair))
        if on_step is not None:
            on_step(grammar_from_segments(sigma, segments))

    def policy_stop() -> str | None:
        if threshold is not None and size < threshold:
            return "threshold"
        if policy.kind == MAX_ITERATIONS and len(steps) >= policy.param:
            return "max_iterations"
        return None

    stop = policy_stop()
    while stop is None:
        cand, max_pair = _scan(segments)
        if cand is None:
            stopped_by = "exhausted"
            break
        if cand.gain <= 0:
            # only pairs with two occurrences remain; replace them
            # incrementally (no new candidates can appear)
            stop = _pair_endgame(segments, sigma, steps, policy, threshold, on_step)
            if stop is not None:
                stopped_by = stop
                break
            size = sum(len(s) for s in segments)
            cand, max_pair = _scan(segments)  # defensive: expect None
            if cand is None:
                stopped_by = "exhausted"
                break
        x = next_symbol()
        _apply(segments, _offsets(segments), cand, x)
        segments.append(list(cand.word))
        size -= cand.gain
        record(cand.word, cand.count, cand.gain, max_pair)
        stop = policy_stop()
    if stop is not None:
        stopped_by = stop

    grammar = grammar_from_segments(sigma, segments)
    trace = GreedyTrace(steps, policy, n, sigma, threshold, stopped_by)
    return grammar, trace


def _pair_endgame(segments, sigma, steps, policy, threshold, on_step) -> str | None:
    """Replace remaining twice-occurring pairs via the incremental engine."""
    engine = PairEngine(segments)

    def sync():
        segs = engine.segment_symbols()
        segments.clear()
        segments.extend(segs)

    while True:
        if threshold is not None and engine.alive < threshold:
            sync()
            return "threshold"
        if policy.kind == MAX_ITERATIONS and len(steps) >= policy.param:
            sync()
            return "max_iterations"
        sel = engine.select()
        if sel is None:
            sync()
            return None
        pair, count, _first, positions = sel
        x = sigma + len(engine.heads) - 1
        engine.replace(pair, positions, x)
        engine.add_segment(list(pair))
        gain = count - 2
        steps.append(
            GreedyStep(len(steps) + 1, pair, count, gain, engine.alive, count)
        )
        if on_step is not None:
            sync()
            on_step(grammar_from_segments(sigma, segments))


def greedy_stop_report(trace: GreedyTrace, text: Text) -> CheckReport:
    """Full-grammar size and nonterminal count at the threshold stop."""
    if trace.policy.kind != FULL_THRESHOLD:
        raise ValueError("stop report needs a full-size-threshold trace")
    n = len(text)
    t = trace.threshold
    final_size = trace.steps[-1].full_size_after if trace.steps else trace.initial_size
    nonterminals = len(trace.steps)
    out = CheckReport()
    out.add(
        BoundRow(
            "greedy_stop_exists",
            float(final_size),
            float(t),
            final_size < t,
            0.0,
            "strict: ||S',G|| below threshold at stop",
        )
    )
    bound = math.sqrt(n) * log_sigma(n, text.sigma) + 3
    out.add(BoundRow.check("greedy_stop_nonterminals", nonterminals, bound))
    out.measurements.update(
        {
            "threshold": t,
            "full_size_at_stop": final_size,
            "nonterminals_at_stop": nonterminals,
            "iterations": len(trace.steps),
            "stopped_by": trace.stopped_by,
        }
    )
    return out
