"""Bit-exact streams, readers/writers and byte-aligned varints.

Bit order is most-significant-first within each byte.  Varints are
little-endian LEB128: 7 payload bits per byte, high bit set on every byte
except the last.
"""

from __future__ import annotations

from dataclasses import dataclass


class MalformedStreamError(ValueError):
    """Raised when a decoder runs off the end of a stream or sees junk."""


@dataclass(frozen=True)
class BitStream:
    """A packed bit sequence with an exact bit count."""

    data: bytes
    length_bits: int

    def __post_init__(self):
        if self.length_bits < 0 or len(self.data) != (self.length_bits + 7) // 8:
            raise ValueError("inconsistent bit stream")

    def __len__(self):
        return self.length_bits

    def bit(self, i: int) -> int:
        if not 0 <= i < self.length_bits:
            raise IndexError(i)
        return (self.data[i >> 3] >> (7 - (i & 7))) & 1

    def to01(self) -> str:
        return "".join(str(self.bit(i)) for i in range(self.length_bits))


class BitWriter:
    """Accumulates bits MSB-first; single owner until frozen."""

    def __init__(self):
        self._buf = bytearray()
        self._nbits = 0

    def __len__(self):
        return self._nbits

    def write_bit(self, b: int):
        if self._nbits % 8 == 0:
            self._buf.append(0)
        if b:
            self._buf[-1] |= 1 << (7 - (self._nbits & 7))
        self._nbits += 1

    def write_bits(self, value: int, width: int):
        """Write ``value`` in ``width`` bits, most significant bit first."""
        if width < 0 or value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        for i in range(width - 1, -1, -1):
            self.write_bit((value >> i) & 1)

    def write_unary(self, m: int):
        """Unary code for m >= 1: (m - 1) one-bits then a zero; m bits total."""
        if m < 1:
            raise ValueError("unary code defined for m >= 1")
        for _ in range(m - 1):
            self.write_bit(1)
        self.write_bit(0)

    def write_bytes(self, data: bytes):
        """Splice whole bytes into the stream (no alignment padding)."""
        for byte in data:
            self.write_bits(byte, 8)

    def extend(self, stream: BitStream):
        for i in range(stream.length_bits):
            self.write_bit(stream.bit(i))

    def freeze(self) -> BitStream:
        return BitStream(bytes(self._buf), self._nbits)


class BitReader:
    """Sequential reader over a BitStream; raises on overrun."""

    def __init__(self, stream: BitStream):
        self._s = stream
        self.pos = 0

    def remaining(self) -> int:
        return self._s.length_bits - self.pos

    def read_bit(self) -> int:
        if self.pos >= self._s.length_bits:
            raise MalformedStreamError("bit stream exhausted")
        b = self._s.bit(self.pos)
        self.pos += 1
        return b

    def read_bits(self, width: int) -> int:
        v = 0
        for _ in range(width):
            v = (v << 1) | self.read_bit()
        return v

    def read_unary(self) -> int:
        m = 1
        while self.read_bit():
            m += 1
        return m

    def read_bytes(self, n: int) -> bytes:
        return bytes(self.read_bits(8) for _ in range(n))


def write_uvarint(out: bytearray, value: int):
    if value < 0:
        raise ValueError("varint is unsigned")
    while True:
        b = value & 0x7F
        value >>= 7
        if value:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def read_uvarint(data: bytes, pos: int) -> tuple[int, int]:
    """Decode a varint at ``pos``; returns (value, next position)."""
    value = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise MalformedStreamError("truncated varint")
        b = data[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, pos
        shift += 7
        if shift > 63:
            raise MalformedStreamError("varint too long")


def uvarint_bytes(value: int) -> bytes:
    out = bytearray()
    write_uvarint(out, value)
    return bytes(out)
