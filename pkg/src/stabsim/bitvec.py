"""Bit-packed buffers and 2d bit tables with bulk bitwise operations.

Buffers hold their bits in a single arbitrary-precision integer, CPython's
native bit-parallel representation: whole-buffer xor, popcount and emptiness
tests run at machine word speed regardless of length.  `WORD_BITS` is the
padding quantum used when converting to and from byte-oriented storage; all
operations behave identically for any word width, and bits past `num_bits`
are always zero.
"""

from __future__ import annotations

import numpy as np

WORD_BITS = 64


def padded_bits(num_bits: int) -> int:
    """Length rounded up to a whole number of words."""
    return ((num_bits + WORD_BITS - 1) // WORD_BITS) * WORD_BITS


class BitBuffer:
    """A fixed-length sequence of bits supporting bulk bitwise updates."""

    __slots__ = ("num_bits", "bits")

    def __init__(self, num_bits: int, bits: int = 0):
        if num_bits < 0:
            raise ValueError(f"num_bits must be >= 0, got {num_bits}")
        if bits < 0 or bits >> num_bits:
            raise ValueError("bits has set bits beyond num_bits")
        self.num_bits = num_bits
        self.bits = bits

    @classmethod
    def from_bools(cls, values) -> "BitBuffer":
        bits = 0
        n = 0
        for n, v in enumerate(values, start=1):
            if v:
                bits |= 1 << (n - 1)
        return cls(n, bits)

    @classmethod
    def from_bytes(cls, data: bytes, num_bits: int) -> "BitBuffer":
        bits = int.from_bytes(data, "little") & ((1 << num_bits) - 1)
        return cls(num_bits, bits)

    def to_bytes(self) -> bytes:
        """Little-endian bytes, padded to a whole number of words."""
        return self.bits.to_bytes(padded_bits(self.num_bits) // 8, "little")

    def to_bools(self) -> np.ndarray:
        raw = np.frombuffer(self.to_bytes(), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.num_bits]

    def get(self, index: int) -> int:
        if not 0 <= index < self.num_bits:
            raise IndexError(f"bit index {index} out of range [0, {self.num_bits})")
        return (self.bits >> index) & 1

    def set(self, index: int, value: int) -> None:
        if not 0 <= index < self.num_bits:
            raise IndexError(f"bit index {index} out of range [0, {self.num_bits})")
        if value:
            self.bits |= 1 << index
        else:
            self.bits &= ~(1 << index)

    def toggle(self, index: int) -> None:
        if not 0 <= index < self.num_bits:
            raise IndexError(f"bit index {index} out of range [0, {self.num_bits})")
        self.bits ^= 1 << index

    def clear(self) -> None:
        self.bits = 0

    def invert(self) -> None:
        """Complement every bit; padding stays zero."""
        self.bits ^= (1 << self.num_bits) - 1

    def popcount(self) -> int:
        return self.bits.bit_count()

    def any(self) -> bool:
        return self.bits != 0

    def copy(self) -> "BitBuffer":
        return BitBuffer(self.num_bits, self.bits)

    def __len__(self) -> int:
        return self.num_bits

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitBuffer):
            return NotImplemented
        return self.num_bits == other.num_bits and self.bits == other.bits

    def __hash__(self):
        return hash((self.num_bits, self.bits))

    def __repr__(self) -> str:
        body = "".join(str((self.bits >> i) & 1) for i in range(min(self.num_bits, 64)))
        if self.num_bits > 64:
            body += "..."
        return f"BitBuffer({self.num_bits}, {body})"


def xor_into(dst: BitBuffer, src: BitBuffer) -> None:
    """dst ^= src, bitwise over the whole buffer."""
    if dst.num_bits != src.num_bits:
        raise ValueError(f"length mismatch: {dst.num_bits} != {src.num_bits}")
    dst.bits ^= src.bits


def popcount(buf: BitBuffer) -> int:
    """Number of set bits."""
    return buf.bits.bit_count()


class BitTable:
    """num_major rows of num_minor bits each; the minor axis is bit-packed."""

    __slots__ = ("num_major", "num_minor", "rows")

    def __init__(self, num_major: int, num_minor: int, rows=None):
        self.num_major = num_major
        self.num_minor = num_minor
        if rows is None:
            rows = [BitBuffer(num_minor) for _ in range(num_major)]
        self.rows = rows

    def get(self, major: int, minor: int) -> int:
        return self.rows[major].get(minor)

    def set(self, major: int, minor: int, value: int) -> None:
        self.rows[major].set(minor, value)

    def row(self, major: int) -> BitBuffer:
        return self.rows[major]

    def copy(self) -> "BitTable":
        return BitTable(self.num_major, self.num_minor, [r.copy() for r in self.rows])

    def to_numpy(self) -> np.ndarray:
        """Unpack into a (num_major, num_minor) uint8 matrix."""
        if self.num_major == 0:
            return np.zeros((0, self.num_minor), dtype=np.uint8)
        raw = np.frombuffer(b"".join(r.to_bytes() for r in self.rows), dtype=np.uint8)
        mat = np.unpackbits(raw.reshape(self.num_major, -1), axis=1, bitorder="little")
        return mat[:, : self.num_minor]

    @classmethod
    def from_numpy(cls, mat: np.ndarray) -> "BitTable":
        mat = np.asarray(mat, dtype=np.uint8)
        num_major, num_minor = mat.shape
        packed = np.packbits(mat, axis=1, bitorder="little")
        rows = [
            BitBuffer(num_minor, int.from_bytes(packed[m].tobytes(), "little"))
            for m in range(num_major)
        ]
        return cls(num_major, num_minor, rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitTable):
            return NotImplemented
        return (
            self.num_major == other.num_major
            and self.num_minor == other.num_minor
            and all(a.bits == b.bits for a, b in zip(self.rows, other.rows))
        )

    def __hash__(self):
        return hash((self.num_major, self.num_minor, tuple(r.bits for r in self.rows)))

    def __repr__(self) -> str:
        return f"BitTable({self.num_major}x{self.num_minor})"


def transpose_square(table: BitTable) -> BitTable:
    """Transpose of a square bit table: out(i, j) == in(j, i)."""
    if table.num_major != table.num_minor:
        raise ValueError(
            f"transpose_square needs a square table, got "
            f"{table.num_major}x{table.num_minor}"
        )
    if table.num_major == 0:
        return table.copy()
    return BitTable.from_numpy(table.to_numpy().T)


def transposed(table: BitTable) -> BitTable:
    """General transpose, done by padding to a word-multiple square."""
    side = max(padded_bits(table.num_major), padded_bits(table.num_minor), WORD_BITS)
    if table.num_major == table.num_minor == side:
        return transpose_square(table)
    square = BitTable(side, side, [r.copy() for r in table.rows]
                      + [BitBuffer(side) for _ in range(side - table.num_major)])
    for r in square.rows[: table.num_major]:
        r.num_bits = side
    flipped = transpose_square(square)
    out = BitTable(table.num_minor, table.num_major,
                   flipped.rows[: table.num_minor])
    mask = (1 << table.num_major) - 1
    for r in out.rows:
        r.num_bits = table.num_major
        r.bits &= mask
    return out
