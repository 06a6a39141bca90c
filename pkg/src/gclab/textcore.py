"""Symbol sequences, substring counting (linear and cyclic) and k-order
empirical entropy.

A Text is an immutable sequence of integer symbol ids over a declared
alphabet of size sigma.  Counting has two backends: a suffix automaton for
ad-hoc pattern queries (built lazily, O(|pattern|) per query) and
numpy-coded fixed-length window tables used by the entropy and certificate
machinery.  All logarithms are base 2.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

LOG2E = math.log2(math.e)

# Window codes are kept as int64; fall back to tuple hashing when sigma**g
# would overflow.
_CODE_LIMIT = 1 << 62


class SuffixAutomaton:
    """Suffix automaton with occurrence counts (endpos sizes).

    Supports online extension; occurrence counts are (re)computed lazily on
    the first count() after an extension.
    """

    def __init__(self, seq=()):
        self.link = [-1]
        self.length = [0]
        self.trans = [{}]
        self.clone = [False]
        self._last = 0
        self._n = 0
        self._cnt = None
        for ch in seq:
            self.extend(ch)

    def extend(self, ch):
        self._cnt = None
        self._n += 1
        cur = len(self.length)
        self.length.append(self.length[self._last] + 1)
        self.link.append(-1)
        self.trans.append({})
        self.clone.append(False)
        p = self._last
        while p != -1 and ch not in self.trans[p]:
            self.trans[p][ch] = cur
            p = self.link[p]
        if p == -1:
            self.link[cur] = 0
        else:
            q = self.trans[p][ch]
            if self.length[p] + 1 == self.length[q]:
                self.link[cur] = q
            else:
                cl = len(self.length)
                self.length.append(self.length[p] + 1)
                self.link.append(self.link[q])
                self.trans.append(dict(self.trans[q]))
                self.clone.append(True)
                while p != -1 and self.trans[p].get(ch) == q:
                    self.trans[p][ch] = cl
                    p = self.link[p]
                self.link[q] = cl
                self.link[cur] = cl
        self._last = cur

    def walk(self, pattern) -> bool:
        """True iff pattern is a substring of the indexed sequence."""
        s = 0
        for ch in pattern:
            s = self.trans[s].get(ch)
            if s is None:
                return False
        return True

    def longest_prefix_match(self, seq, start: int) -> int:
        """Length of the longest prefix of seq[start:] that is a substring."""
        s = 0
        m = 0
        for i in range(start, len(seq)):
            s = self.trans[s].get(seq[i])
            if s is None:
                break
            m += 1
        return m

    def count(self, pattern) -> int:
        """Number of (possibly overlapping) occurrences of pattern."""
        if len(pattern) == 0:
            return self._n
        if self._cnt is None:
            # occurrence count = endpos size, propagated along suffix links
            cnt = [0 if c else 1 for c in self.clone]
            cnt[0] = 0
            order = sorted(
                range(1, len(self.length)), key=self.length.__getitem__, reverse=True
            )
            for v in order:
                cnt[self.link[v]] += cnt[v]
            self._cnt = cnt
        s = 0
        for ch in pattern:
            s = self.trans[s].get(ch)
            if s is None:
                return 0
        return self._cnt[s]


class Text:
    """Immutable symbol sequence over an integer alphabet of size sigma."""

    __slots__ = ("symbols", "sigma", "__dict__")

    def __init__(self, symbols, sigma: int):
        symbols = tuple(symbols)
        if sigma < 1:
            raise ValueError("sigma must be >= 1")
        if sigma > 1 << 32:
            raise ValueError("alphabets larger than 2^32 are unsupported")
        for s in symbols:
            if not 0 <= s < sigma:
                raise ValueError(f"symbol {s} out of range for sigma={sigma}")
        self.symbols = symbols
        self.sigma = sigma

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return (
            isinstance(other, Text)
            and self.sigma == other.sigma
            and self.symbols == other.symbols
        )

    def __hash__(self):
        return hash((self.sigma, self.symbols))

    def __repr__(self):
        head = ",".join(map(str, self.symbols[:8]))
        tail = ",..." if len(self.symbols) > 8 else ""
        return f"Text([{head}{tail}] n={len(self)} sigma={self.sigma})"

    @classmethod
    def from_bytes(cls, data: bytes) -> "Text":
        return cls(data, 256)

    @classmethod
    def from_string(cls, s: str, sigma: int | None = None) -> "Text":
        """Convenience for tests: letters a,b,c,... become ids 0,1,2,..."""
        ids = tuple(ord(c) - ord("a") for c in s)
        if sigma is None:
            sigma = max(ids, default=0) + 1
        return cls(ids, sigma)

    @classmethod
    def from_tokens(cls, payload: str) -> "Text":
        """Token format: first line ``sigma=<int>``, then whitespace-separated ids."""
        stripped = payload.lstrip()
        if not stripped.startswith("sigma="):
            raise ValueError('token input must start with a "sigma=<int>" header')
        header, _, rest = stripped.partition("\n")
        sigma = int(header[len("sigma="):])
        return cls((int(t) for t in rest.split()), sigma)

    def to_tokens(self) -> str:
        return f"sigma={self.sigma}\n" + " ".join(map(str, self.symbols)) + "\n"

    @cached_property
    def _array(self) -> np.ndarray:
        return np.asarray(self.symbols, dtype=np.int64)

    @cached_property
    def _automaton(self) -> SuffixAutomaton:
        return SuffixAutomaton(self.symbols)

    @cached_property
    def _doubled_automaton(self) -> SuffixAutomaton:
        return SuffixAutomaton(self.symbols + self.symbols)

    # -- fixed-length window machinery -------------------------------------

    @cached_property
    def _remap(self) -> tuple[np.ndarray, int]:
        """Array re-coded over the observed alphabet, plus its size."""
        if len(self.symbols) == 0:
            return self._array, 1
        uniq, inv = np.unique(self._array, return_inverse=True)
        return inv.astype(np.int64), max(1, len(uniq))

    def window_codes(self, g: int, cyclic: bool) -> np.ndarray | None:
        """int64 codes of all length-g windows, or None when coding overflows.

        Linear mode yields n-g+1 windows (empty when g > n), cyclic mode
        n windows with wraparound.  Codes of equal windows are equal.
        """
        if g < 0:
            raise ValueError("window length must be >= 0")
        n = len(self.symbols)
        arr, base = self._remap
        if g == 0:
            count = n if cyclic else n + 1
            return np.zeros(count, dtype=np.int64)
        if base**g >= _CODE_LIMIT:
            return None
        if cyclic:
            if g > n:
                raise ValueError("cyclic windows require pattern length <= |text|")
            ext = np.concatenate([arr, arr[: g - 1]])
            m = n
        else:
            ext = arr
            m = n - g + 1
            if m <= 0:
                return np.zeros(0, dtype=np.int64)
        codes = ext[:m].copy()
        for j in range(1, g):
            codes *= base
            codes += ext[j : j + m]
        return codes

    def _window_tuples(self, g: int, cyclic: bool) -> list:
        n = len(self.symbols)
        s = self.symbols
        if cyclic:
            if g > n:
                raise ValueError("cyclic windows require pattern length <= |text|")
            ext = s + s[: g - 1]
            return [ext[i : i + g] for i in range(n)]
        return [s[i : i + g] for i in range(n - g + 1)]

    def window_count_histogram(self, g: int, cyclic: bool) -> dict[int, int]:
        """Map occurrence-count -> number of distinct length-g words with it."""
        codes = self.window_codes(g, cyclic)
        if codes is not None:
            if len(codes) == 0:
                return {}
            _, counts = np.unique(codes, return_counts=True)
            vals, mult = np.unique(counts, return_counts=True)
            return {int(v): int(m) for v, m in zip(vals, mult)}
        counter = Counter(self._window_tuples(g, cyclic))
        hist: Counter = Counter(counter.values())
        return dict(hist)

    def position_counts(self, g: int, cyclic: bool) -> np.ndarray:
        """counts[p] = occurrences of the length-g window starting at p."""
        codes = self.window_codes(g, cyclic)
        if codes is not None:
            if len(codes) == 0:
                return np.zeros(0, dtype=np.int64)
            _, inv, counts = np.unique(codes, return_inverse=True, return_counts=True)
            return counts[inv]
        windows = self._window_tuples(g, cyclic)
        counter = Counter(windows)
        return np.asarray([counter[w] for w in windows], dtype=np.int64)


def count_occurrences(text: Text, pattern, cyclic: bool = False) -> int:
    """Occurrences of pattern in text, overlapping allowed.

    Linear mode counts ordinary substring occurrences; cyclic mode counts
    start positions 0..|text|-1 reading with wraparound.  An empty pattern
    counts |text| by convention.
    """
    pattern = tuple(pattern)
    n = len(text)
    if len(pattern) == 0:
        return n
    if not cyclic:
        if len(pattern) > n:
            return 0
        return text._automaton.count(pattern)
    if len(pattern) > n:
        raise ValueError("cyclic counting requires pattern length <= |text|")
    # starts in [0, n) of the doubled text are exactly the cyclic starts;
    # starts in [n, 2n - |p|] replicate the linear occurrences
    return text._doubled_automaton.count(pattern) - text._automaton.count(pattern)


def empirical_entropy(text: Text, k: int, cyclic: bool = False) -> tuple[float, float]:
    """|S| H_k(S) in bits and the per-symbol value.

    Context counts are plain substring counts (the occurrence of a context
    at the very end of the string is included), zero-count terms contribute
    nothing.  Cyclic mode uses wraparound counts and requires k < |S|.
    """
    if k < 0:
        raise ValueError("entropy order must be >= 0")
    n = len(text)
    if n == 0:
        return 0.0, 0.0
    if cyclic and k >= n:
        raise ValueError("cyclic entropy requires k < |text|")
    if not cyclic and k + 1 > n:
        return 0.0, 0.0
    c = text.position_counts(k + 1, cyclic).astype(np.float64)
    if k == 0:
        total = float(np.sum(np.log2(n / c)))
        return total, total / n
    d = text.position_counts(k, cyclic).astype(np.float64)
    m = len(c)
    total = float(np.sum(np.log2(d[:m] / c)))
    return max(total, 0.0), max(total, 0.0) / n


@dataclass(frozen=True)
class EntropyProfile:
    """Entropies H_0..H_kmax of one text plus running means."""

    per_order: tuple[tuple[int, float, float], ...]  # (k, total_bits, bits/symbol)
    cyclic: bool
    mean_up_to: dict[int, float] = field(default_factory=dict)  # l -> mean of H_0..H_{l-1}

    def bits_per_symbol(self, k: int) -> float:
        return self.per_order[k][2]

    def total_bits(self, k: int) -> float:
        return self.per_order[k][1]


def entropy_profile(text: Text, k_max: int, cyclic: bool = False) -> EntropyProfile:
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    rows = []
    for k in range(k_max + 1):
        total, per = empirical_entropy(text, k, cyclic)
        rows.append((k, total, per))
    means = {}
    acc = 0.0
    for l in range(1, k_max + 2):
        acc += rows[l - 1][2]
        means[l] = acc / l
    return EntropyProfile(tuple(rows), cyclic, means)


def load_text(path: str) -> Text:
    """Read a text file: token format when it starts with "sigma=", else bytes."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data.lstrip().startswith(b"sigma="):
        return Text.from_tokens(data.decode("ascii"))
    return Text.from_bytes(data)
