"""Incremental most-frequent-pair machinery shared by Re-Pair and Greedy.

Maintains, over a set of symbol segments, the exact greedy left-to-right
non-overlapping occurrence count of every adjacent pair, under batched
pair-to-nonterminal replacements.  Pairs never span two segments.

Selection is deterministic: maximum count first, then leftmost first
occurrence (global position order, segments in creation order).  A lazy
max-heap holds (count upper bound, first-position lower bound) keys; popped
entries are revalidated against exact counts, so stale keys cost extra pops
but never a wrong answer.
"""

from __future__ import annotations

import heapq


class PairEngine:
    def __init__(self, segments):
        self.sym: list = []
        self.nxt: list[int] = []
        self.prv: list[int] = []
        self.heads: list[int] = []
        self.alive = 0
        self._occ: dict[tuple, dict[int, None]] = {}
        self._minpos: dict[tuple, int] = {}
        self._heap: list = []
        for seg in segments:
            self.add_segment(seg)

    def add_segment(self, seg):
        seg = list(seg)
        if not seg:
            raise ValueError("segments must be nonempty")
        base = len(self.sym)
        m = len(seg)
        self.heads.append(base)
        self.sym.extend(seg)
        self.nxt.extend(range(base + 1, base + m))
        self.nxt.append(-1)
        self.prv.append(-1)
        self.prv.extend(range(base, base + m - 1))
        self.alive += m
        touched = set()
        for i in range(m - 1):
            self._add_occ((seg[i], seg[i + 1]), base + i, touched)
        self._push_touched(touched)

    # -- occurrence bookkeeping ---------------------------------------------

    def _add_occ(self, pair, pos, touched):
        occ = self._occ.get(pair)
        if occ is None:
            occ = self._occ[pair] = {}
            self._minpos[pair] = pos
        elif pos < self._minpos[pair]:
            self._minpos[pair] = pos
        occ[pos] = None
        touched.add(pair)

    def _del_occ(self, pair, pos, touched):
        occ = self._occ.get(pair)
        if occ is not None:
            occ.pop(pos, None)
            if not occ:
                del self._occ[pair]
                del self._minpos[pair]
            touched.add(pair)

    def _push_touched(self, touched):
        for pair in touched:
            occ = self._occ.get(pair)
            if occ and len(occ) >= 2:
                heapq.heappush(self._heap, (-len(occ), self._minpos[pair], pair))

    def exact(self, pair):
        """(greedy non-overlapping count, first counted position, positions)."""
        occ = self._occ.get(pair)
        if not occ:
            return 0, -1, []
        positions = sorted(occ)
        taken = []
        prev = -1
        for p in positions:
            if prev != -1 and self.nxt[prev] == p:
                continue
            taken.append(p)
            prev = p
        return len(taken), taken[0], taken

    def select(self):
        """Most frequent pair with count >= 2, ties to leftmost first occurrence.

        Returns (pair, count, first, positions) or None.
        """
        heap = self._heap
        while heap:
            negub, fp, pair = heap[0]
            occ = self._occ.get(pair)
            if not occ or len(occ) < 2:
                heapq.heappop(heap)
                continue
            count, first, positions = self.exact(pair)
            if count < 2:
                heapq.heappop(heap)
                continue
            if -negub == count and fp == first:
                return pair, count, first, positions
            heapq.heappop(heap)
            heapq.heappush(heap, (-count, first, pair))
        return None

    # -- replacement ----------------------------------------------------------

    def replace(self, pair, positions, new_symbol):
        """Replace the given disjoint occurrences of pair with new_symbol."""
        a, b = pair
        sym, nxt, prv = self.sym, self.nxt, self.prv
        touched = set()
        for p in positions:
            q = nxt[p]
            if sym[p] != a or q == -1 or sym[q] != b:
                raise AssertionError("stale replacement position")
            pl = prv[p]
            nr = nxt[q]
            if pl != -1:
                self._del_occ((sym[pl], a), pl, touched)
            self._del_occ(pair, p, touched)
            if nr != -1:
                self._del_occ((b, sym[nr]), q, touched)
            sym[p] = new_symbol
            sym[q] = None
            nxt[p] = nr
            if nr != -1:
                prv[nr] = p
            if pl != -1:
                self._add_occ((sym[pl], new_symbol), pl, touched)
            if nr != -1:
                self._add_occ((new_symbol, sym[nr]), p, touched)
            self.alive -= 1
        self._push_touched(touched)

    # -- readout ---------------------------------------------------------------

    def segment_symbols(self) -> list[list]:
        out = []
        for head in self.heads:
            seg = []
            i = head
            while i != -1:
                seg.append(self.sym[i])
                i = self.nxt[i]
            out.append(seg)
        return out
