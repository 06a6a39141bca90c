"""Bit-exact encoders and decoders for full grammars.

Four encodings:

* fully naive  - every rhs symbol in fixed ceil(log2(sigma + |G|)) bits,
                 rule lengths in unary;
* naive        - starting string Huffman-coded, rules as in fully naive;
* entropy      - Huffman over the concatenation S_G of S' and all rule
                 right-hand sides, rule lengths in unary;
* incremental  - CNF only: nonterminals permuted so first components are
                 non-decreasing, first components as Elias delta of the
                 successive differences (+1), second components fixed-width,
                 S' Huffman-coded over the renamed ids.

Huffman dictionaries are serialized as canonical code lengths: a varint
domain size, a presence bitmap, then one byte-aligned varint code length per
present symbol, in id order.  Container files: magic "GCB1", a tag byte,
varints sigma / |G| / |S'| / payload bit count, then the payload bits
MSB-first.

Every SizeBreakdown carries formula_bound_bits: the corresponding upper
bound with all hidden constants instantiated explicitly (see _overhead_slack
and _delta_budget); totals are asserted against these bounds in the tests.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass

from .bits import (
    BitReader,
    BitStream,
    BitWriter,
    MalformedStreamError,
    read_uvarint,
    uvarint_bytes,
)
from .grammar import FullGrammar

MAGIC = b"GCB1"
ENCODINGS = ("fully_naive", "naive", "entropy", "incremental")
_TAGS = {name: i for i, name in enumerate(ENCODINGS)}
MAX_UNARY = 1 << 20  # rule-length cap for unary fields


@dataclass(frozen=True)
class SizeBreakdown:
    payload_bits: int
    dictionary_bits: int
    lengths_side_bits: int
    total_bits: int
    formula_bound_bits: float

    def as_dict(self) -> dict:
        return {
            "payload_bits": self.payload_bits,
            "dictionary_bits": self.dictionary_bits,
            "lengths_side_bits": self.lengths_side_bits,
            "total_bits": self.total_bits,
            "formula_bound_bits": self.formula_bound_bits,
        }


def _breakdown(payload, dictionary, lengths_side, bound) -> SizeBreakdown:
    return SizeBreakdown(
        payload, dictionary, lengths_side, payload + dictionary + lengths_side, bound
    )


# -- Huffman -------------------------------------------------------------------


@dataclass(frozen=True)
class Codebook:
    """Canonical prefix code: symbol -> (length, code)."""

    lengths: dict[int, int]
    codes: dict[int, int]
    domain: int
    serialized: bytes

    @property
    def serialized_bits(self) -> int:
        return 8 * len(self.serialized)

    def kraft_sum(self) -> float:
        return sum(2.0 ** -l for l in self.lengths.values())


def _code_lengths(freqs: dict[int, int]) -> dict[int, int]:
    if not freqs:
        raise ValueError("cannot build a code for an empty sequence")
    if len(freqs) == 1:
        return {next(iter(freqs)): 1}
    heap = []
    for order, (sym, f) in enumerate(sorted(freqs.items())):
        heap.append((f, order, (sym,)))
    heapq.heapify(heap)
    tick = len(heap)
    merged: dict[tuple, list] = {}
    while len(heap) > 1:
        fa, _, a = heapq.heappop(heap)
        fb, _, b = heapq.heappop(heap)
        node = a + b
        heapq.heappush(heap, (fa + fb, tick, node))
        tick += 1
        merged[node] = [a, b]
    lengths = {}
    stack = [(heap[0][2], 0)]
    while stack:
        node, d = stack.pop()
        kids = merged.get(node)
        if kids is None or len(node) == 1:
            lengths[node[0]] = max(d, 1)
        else:
            stack.append((kids[0], d + 1))
            stack.append((kids[1], d + 1))
    return lengths


def _canonical(lengths: dict[int, int], domain: int) -> Codebook:
    codes = {}
    code = 0
    prev_len = 0
    for length, sym in sorted((l, s) for s, l in lengths.items()):
        code <<= length - prev_len
        codes[sym] = code
        code += 1
        prev_len = length
    out = bytearray(uvarint_bytes(domain))
    bitmap = bytearray((domain + 7) // 8)
    for sym in lengths:
        bitmap[sym >> 3] |= 1 << (7 - (sym & 7))
    out += bitmap
    for sym in sorted(lengths):
        out += uvarint_bytes(lengths[sym])
    return Codebook(dict(lengths), codes, domain, bytes(out))


def build_codebook(seq, domain: int) -> Codebook:
    freqs = Counter(seq)
    for sym in freqs:
        if not 0 <= sym < domain:
            raise ValueError(f"symbol {sym} outside codebook domain {domain}")
    return _canonical(_code_lengths(freqs), domain)


def parse_codebook(data: bytes, pos: int) -> tuple[Codebook, int]:
    domain, pos = read_uvarint(data, pos)
    nbytes = (domain + 7) // 8
    if pos + nbytes > len(data):
        raise MalformedStreamError("truncated codebook bitmap")
    bitmap = data[pos : pos + nbytes]
    pos += nbytes
    lengths = {}
    for sym in range(domain):
        if bitmap[sym >> 3] & (1 << (7 - (sym & 7))):
            l, pos = read_uvarint(data, pos)
            if l < 1:
                raise MalformedStreamError("zero code length")
            lengths[sym] = l
    if not lengths:
        raise MalformedStreamError("empty codebook")
    cb = _canonical(lengths, domain)
    return cb, pos


def _read_codebook(reader: BitReader) -> Codebook:
    # the codebook is a byte blob inside the bit stream: varint domain,
    # bitmap, varints; read it byte-wise
    buf = bytearray()

    def take_varint():
        start = len(buf)
        while True:
            b = reader.read_bits(8)
            buf.append(b)
            if not b & 0x80:
                break
        return start

    take_varint()
    domain, p = read_uvarint(bytes(buf), 0)
    nbytes = (domain + 7) // 8
    for _ in range(nbytes):
        buf.append(reader.read_bits(8))
    present = sum(
        1
        for sym in range(domain)
        if buf[p + (sym >> 3)] & (1 << (7 - (sym & 7)))
    )
    for _ in range(present):
        take_varint()
    cb, end = parse_codebook(bytes(buf), 0)
    if end != len(buf):
        raise MalformedStreamError("codebook size mismatch")
    return cb


def huffman_payload_bits(seq, codebook: Codebook) -> int:
    return sum(codebook.lengths[s] for s in seq)


def _write_huffman(writer: BitWriter, seq, codebook: Codebook):
    for s in seq:
        writer.write_bits(codebook.codes[s], codebook.lengths[s])


def _read_huffman(reader: BitReader, codebook: Codebook, count: int) -> list[int]:
    decode = {(codebook.lengths[s], codebook.codes[s]): s for s in codebook.lengths}
    max_len = max(codebook.lengths.values())
    out = []
    for _ in range(count):
        code = 0
        length = 0
        while True:
            code = (code << 1) | reader.read_bit()
            length += 1
            sym = decode.get((length, code))
            if sym is not None:
                out.append(sym)
                break
            if length > max_len:
                raise MalformedStreamError("invalid Huffman code")
    return out


def sequence_entropy_bits(seq) -> float:
    freqs = Counter(seq)
    n = len(seq)
    return sum(c * math.log2(n / c) for c in freqs.values()) if n else 0.0


def huffman_encode(seq, domain: int | None = None):
    """Optimal prefix coding of a symbol sequence.

    Returns (BitStream of the payload codes, Codebook, SizeBreakdown); the
    payload satisfies |Y|H0(Y) <= payload_bits <= |Y|H0(Y) + |Y|.
    """
    seq = list(seq)
    if not seq:
        raise ValueError("cannot Huffman-encode an empty sequence")
    if domain is None:
        domain = max(seq) + 1
    cb = build_codebook(seq, domain)
    w = BitWriter()
    _write_huffman(w, seq, cb)
    stream = w.freeze()
    bound = sequence_entropy_bits(seq) + len(seq) + cb.serialized_bits
    br = _breakdown(stream.length_bits, cb.serialized_bits, 0, bound)
    return stream, cb, br


def huffman_decode(stream: BitStream, codebook: Codebook, count: int) -> list[int]:
    reader = BitReader(stream)
    out = _read_huffman(reader, codebook, count)
    if reader.remaining() >= 8:
        raise MalformedStreamError("trailing data after Huffman payload")
    return out


# -- Elias delta ----------------------------------------------------------------


def _write_delta(writer: BitWriter, n: int):
    if n < 1:
        raise ValueError("Elias delta is defined for n >= 1")
    nbits = n.bit_length()
    lbits = nbits.bit_length()
    for _ in range(lbits - 1):
        writer.write_bit(0)
    writer.write_bits(nbits, lbits)
    writer.write_bits(n - (1 << (nbits - 1)), nbits - 1)


def _read_delta(reader: BitReader) -> int:
    zeros = 0
    while reader.read_bit() == 0:
        zeros += 1
        if zeros > 64:
            raise MalformedStreamError("bad Elias delta prefix")
    nbits = (1 << zeros) | reader.read_bits(zeros)
    if nbits < 1:
        raise MalformedStreamError("bad Elias delta length field")
    rest = reader.read_bits(nbits - 1)
    return (1 << (nbits - 1)) | rest


def elias_delta_encode(n: int) -> BitStream:
    w = BitWriter()
    _write_delta(w, n)
    return w.freeze()


def elias_delta_decode(stream: BitStream) -> int:
    reader = BitReader(stream)
    value = _read_delta(reader)
    if reader.remaining():
        raise MalformedStreamError("trailing bits after Elias delta code")
    return value


def elias_delta_length(n: int) -> int:
    """Exact |delta(n)| = N + 2 floor(log2 N), N = bit length of n."""
    if n < 1:
        raise ValueError("Elias delta is defined for n >= 1")
    nbits = n.bit_length()
    return nbits + 2 * (nbits.bit_length() - 1)


# -- shared encoding helpers ------------------------------------------------------


def symbol_width(sigma: int, n_rules: int) -> int:
    return max(1, math.ceil(math.log2(sigma + n_rules))) if sigma + n_rules > 1 else 1


def _overhead_slack(rhs_full: int, domain: int, distinct: int) -> float:
    """Instantiation of the O(||S',G||) terms: fixed-width rounding, unary
    length fields, and the codebook serialization."""
    return 2.0 * rhs_full + float(domain) + 16.0 * distinct + 96.0


def _delta_budget(sigma: int, n_rules: int) -> float:
    """Upper bound on the total Elias-delta bits of the incremental encoding:
    the deltas sum to at most sigma + 2|G|, so concavity bounds the sum."""
    if n_rules == 0:
        return 0.0
    top = sigma + 2 * n_rules + 2
    per = 3 + 2 * math.log2(1 + math.log2(top))
    return n_rules * per + n_rules * math.log2(top / n_rules + 1)


def _check_unary(length: int):
    if length > MAX_UNARY:
        raise ValueError(f"rule length {length} exceeds the unary cap {MAX_UNARY}")


# -- fully naive -------------------------------------------------------------------


def encode_fully_naive(grammar: FullGrammar):
    w = BitWriter()
    width = symbol_width(grammar.sigma, len(grammar.rules))
    lengths_side = 0
    for rhs in grammar.rules:
        _check_unary(len(rhs))
        w.write_unary(len(rhs))
        lengths_side += len(rhs)
        for s in rhs:
            w.write_bits(s, width)
    for s in grammar.start:
        w.write_bits(s, width)
    stream = w.freeze()
    rhs_full = len(grammar.start) + sum(len(r) for r in grammar.rules)
    payload = stream.length_bits - lengths_side
    bound = rhs_full * math.log2(max(2, grammar.sigma + len(grammar.rules))) \
        + _overhead_slack(rhs_full, grammar.sigma + len(grammar.rules), 0)
    return stream, _breakdown(payload, 0, lengths_side, bound)


def decode_fully_naive(stream: BitStream, sigma, n_rules, start_len) -> FullGrammar:
    r = BitReader(stream)
    width = symbol_width(sigma, n_rules)
    rules = []
    for _ in range(n_rules):
        ln = r.read_unary()
        rules.append(tuple(r.read_bits(width) for _ in range(ln)))
    start = [r.read_bits(width) for _ in range(start_len)]
    if r.remaining() >= 8:
        raise MalformedStreamError("trailing data after grammar payload")
    return FullGrammar(sigma, start, rules)


# -- naive -------------------------------------------------------------------------


def encode_naive(grammar: FullGrammar):
    if not grammar.start:
        raise ValueError("naive encoding needs a nonempty starting string")
    w = BitWriter()
    width = symbol_width(grammar.sigma, len(grammar.rules))
    lengths_side = 0
    for rhs in grammar.rules:
        _check_unary(len(rhs))
        w.write_unary(len(rhs))
        lengths_side += len(rhs)
        for s in rhs:
            w.write_bits(s, width)
    domain = grammar.sigma + len(grammar.rules)
    cb = build_codebook(grammar.start, domain)
    w.write_bytes(cb.serialized)
    _write_huffman(w, grammar.start, cb)
    stream = w.freeze()
    payload = stream.length_bits - lengths_side - cb.serialized_bits
    rhs_g = sum(len(r) for r in grammar.rules)
    rhs_full = len(grammar.start) + rhs_g
    bound = (
        sequence_entropy_bits(grammar.start)
        + rhs_g * math.log2(max(2, domain))
        + _overhead_slack(rhs_full, domain, len(set(grammar.start)))
    )
    return stream, _breakdown(payload, cb.serialized_bits, lengths_side, bound)


def decode_naive(stream: BitStream, sigma, n_rules, start_len) -> FullGrammar:
    r = BitReader(stream)
    width = symbol_width(sigma, n_rules)
    rules = []
    for _ in range(n_rules):
        ln = r.read_unary()
        rules.append(tuple(r.read_bits(width) for _ in range(ln)))
    cb = _read_codebook(r)
    start = _read_huffman(r, cb, start_len)
    if r.remaining() >= 8:
        raise MalformedStreamError("trailing data after grammar payload")
    return FullGrammar(sigma, start, rules)


# -- entropy coding of the concatenation --------------------------------------------


def encode_entropy(grammar: FullGrammar):
    s_g = grammar.rhs_concat()
    if not s_g:
        raise ValueError("entropy encoding needs a nonempty grammar")
    w = BitWriter()
    lengths_side = 0
    for rhs in grammar.rules:
        _check_unary(len(rhs))
        w.write_unary(len(rhs))
        lengths_side += len(rhs)
    domain = grammar.sigma + len(grammar.rules)
    cb = build_codebook(s_g, domain)
    w.write_bytes(cb.serialized)
    _write_huffman(w, s_g, cb)
    stream = w.freeze()
    payload = stream.length_bits - lengths_side - cb.serialized_bits
    bound = (
        sequence_entropy_bits(s_g)
        + len(s_g)
        + _overhead_slack(len(s_g), domain, len(set(s_g)))
    )
    return stream, _breakdown(payload, cb.serialized_bits, lengths_side, bound)


def decode_entropy(stream: BitStream, sigma, n_rules, start_len) -> FullGrammar:
    r = BitReader(stream)
    rule_lens = [r.read_unary() for _ in range(n_rules)]
    cb = _read_codebook(r)
    symbols = _read_huffman(r, cb, start_len + sum(rule_lens))
    if r.remaining() >= 8:
        raise MalformedStreamError("trailing data after grammar payload")
    start = symbols[:start_len]
    rules = []
    at = start_len
    for ln in rule_lens:
        rules.append(tuple(symbols[at : at + ln]))
        at += ln
    return FullGrammar(sigma, start, rules)


# -- incremental (CNF) ----------------------------------------------------------------


def incremental_order(grammar: FullGrammar) -> list[int]:
    """Permutation of rule indices making first components non-decreasing.

    Greedy: repeatedly append the pending rule whose first component has the
    smallest position in the combined order (terminals, then appended rules);
    ties by original rule index.
    """
    sigma = grammar.sigma
    waiting: dict[int, list[int]] = {}
    heap = []
    for j, rhs in enumerate(grammar.rules):
        first = rhs[0]
        if first < sigma:
            heap.append((first, j))
        else:
            waiting.setdefault(first, []).append(j)
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        _, j = heapq.heappop(heap)
        order.append(j)
        new_pos = sigma + len(order) - 1
        for u in waiting.pop(sigma + j, ()):
            heapq.heappush(heap, (new_pos, u))
    if len(order) != len(grammar.rules):
        raise AssertionError("pending rules with no placeable first component")
    return order


def encode_incremental(grammar: FullGrammar):
    if not grammar.is_cnf:
        raise ValueError("incremental encoding requires a CNF grammar")
    if not grammar.start:
        raise ValueError("incremental encoding needs a nonempty starting string")
    sigma = grammar.sigma
    n_rules = len(grammar.rules)
    order = incremental_order(grammar)
    rename = {sigma + old: sigma + new for new, old in enumerate(order)}

    def new_id(s: int) -> int:
        return s if s < sigma else rename[s]

    w = BitWriter()
    width = symbol_width(sigma, n_rules)
    prev = 0
    delta_bits = 0
    for old in order:
        first, second = (new_id(s) for s in grammar.rules[old])
        if first < prev:
            raise AssertionError("first components not sorted")
        before = len(w)
        _write_delta(w, first - prev + 1)
        delta_bits += len(w) - before
        w.write_bits(second, width)
        prev = first
    start = [new_id(s) for s in grammar.start]
    cb = build_codebook(start, sigma + n_rules)
    w.write_bytes(cb.serialized)
    _write_huffman(w, start, cb)
    stream = w.freeze()
    payload = stream.length_bits - delta_bits - cb.serialized_bits
    rhs_full = len(grammar.start) + 2 * n_rules
    bound = (
        sequence_entropy_bits(grammar.start)
        + n_rules * math.log2(max(2, sigma + n_rules))
        + _delta_budget(sigma, n_rules)
        + _overhead_slack(rhs_full, sigma + n_rules, len(set(start)))
    )
    return stream, _breakdown(payload, cb.serialized_bits, delta_bits, bound)


def decode_incremental(stream: BitStream, sigma, n_rules, start_len) -> FullGrammar:
    r = BitReader(stream)
    width = symbol_width(sigma, n_rules)
    pairs = []
    prev = 0
    for _ in range(n_rules):
        prev = prev + _read_delta(r) - 1
        second = r.read_bits(width)
        pairs.append((prev, second))
    cb = _read_codebook(r)
    start = _read_huffman(r, cb, start_len)
    if r.remaining() >= 8:
        raise MalformedStreamError("trailing data after grammar payload")
    # rules arrive in permuted order; rebuild a topologically ordered grammar
    limit = sigma + n_rules
    for first, second in pairs:
        if first >= limit or second >= limit:
            raise MalformedStreamError("rule component out of range")
    indeg = {j: sum(1 for s in pairs[j] if s >= sigma) for j in range(n_rules)}
    users: dict[int, list[int]] = {}
    for j, pr in enumerate(pairs):
        for s in pr:
            if s >= sigma:
                users.setdefault(s - sigma, []).append(j)
    ready = sorted(j for j, d in indeg.items() if d == 0)
    topo: list[int] = []
    heapq.heapify(ready)
    while ready:
        j = heapq.heappop(ready)
        topo.append(j)
        for u in users.get(j, ()):
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(topo) != n_rules:
        raise MalformedStreamError("decoded grammar is not acyclic")
    rename = {sigma + j: sigma + new for new, j in enumerate(topo)}

    def mapped(s: int) -> int:
        return s if s < sigma else rename[s]

    rules = [tuple(mapped(s) for s in pairs[j]) for j in topo]
    new_start = [mapped(s) for s in start]
    return FullGrammar(sigma, new_start, rules)


# -- container -------------------------------------------------------------------------


_ENCODE = {
    "fully_naive": encode_fully_naive,
    "naive": encode_naive,
    "entropy": encode_entropy,
    "incremental": encode_incremental,
}
_DECODE = {
    "fully_naive": decode_fully_naive,
    "naive": decode_naive,
    "entropy": decode_entropy,
    "incremental": decode_incremental,
}


def encode(grammar: FullGrammar, encoding: str):
    try:
        fn = _ENCODE[encoding]
    except KeyError:
        raise ValueError(f"unknown encoding {encoding!r}") from None
    return fn(grammar)


def decode(encoding: str, stream: BitStream, sigma, n_rules, start_len) -> FullGrammar:
    try:
        fn = _DECODE[encoding]
    except KeyError:
        raise ValueError(f"unknown encoding {encoding!r}") from None
    return fn(stream, sigma, n_rules, start_len)


def to_container(grammar: FullGrammar, encoding: str) -> bytes:
    stream, _ = encode(grammar, encoding)
    out = bytearray(MAGIC)
    out.append(_TAGS[encoding])
    out += uvarint_bytes(grammar.sigma)
    out += uvarint_bytes(len(grammar.rules))
    out += uvarint_bytes(len(grammar.start))
    out += uvarint_bytes(stream.length_bits)
    out += stream.data
    return bytes(out)


def from_container(data: bytes) -> tuple[FullGrammar, str]:
    if data[:4] != MAGIC:
        raise MalformedStreamError("bad container magic")
    if len(data) < 5:
        raise MalformedStreamError("truncated container")
    tag = data[4]
    if tag >= len(ENCODINGS):
        raise MalformedStreamError("unknown encoding tag")
    encoding = ENCODINGS[tag]
    pos = 5
    sigma, pos = read_uvarint(data, pos)
    n_rules, pos = read_uvarint(data, pos)
    start_len, pos = read_uvarint(data, pos)
    nbits, pos = read_uvarint(data, pos)
    nbytes = (nbits + 7) // 8
    if len(data) - pos != nbytes:
        raise MalformedStreamError("container payload size mismatch")
    stream = BitStream(data[pos:], nbits)
    return decode(encoding, stream, sigma, n_rules, start_len), encoding
