"""Sample tables and the four output formats: 01, b8, hits, r8.

The dense formats are the ASCII 0/1 lines and the little-endian packed
bytes; the sparse formats record set-bit indices (decimal, comma separated)
or run lengths (gap bytes, 255 meaning 255 zeros and no one, with a virtual
terminal one closing each shot).  Readers exist for every writer so round
trips can be tested byte-exactly.  The byte-level definitions here are
normative for this tool.
"""

from __future__ import annotations

import numpy as np

from .bitvec import BitBuffer, BitTable


class SampleTable:
    """Bit table of shots x results; shot-major iteration is output order."""

    __slots__ = ("num_shots", "num_results", "bits")

    def __init__(self, num_shots: int, num_results: int, bits: BitTable | None = None):
        self.num_shots = num_shots
        self.num_results = num_results
        self.bits = bits if bits is not None else BitTable(num_shots, num_results)
        if self.bits.num_major != num_shots or self.bits.num_minor != num_results:
            raise ValueError("bit table shape does not match shots x results")

    @classmethod
    def from_rows(cls, rows: list[BitBuffer], num_results: int) -> "SampleTable":
        return cls(len(rows), num_results, BitTable(len(rows), num_results, rows))

    @classmethod
    def from_numpy(cls, mat: np.ndarray) -> "SampleTable":
        table = BitTable.from_numpy(mat)
        return cls(table.num_major, table.num_minor, table)

    def get(self, shot: int, result: int) -> int:
        return self.bits.get(shot, result)

    def row(self, shot: int) -> BitBuffer:
        return self.bits.row(shot)

    def to_numpy(self) -> np.ndarray:
        return self.bits.to_numpy()

    def __eq__(self, other):
        if not isinstance(other, SampleTable):
            return NotImplemented
        return (self.num_shots == other.num_shots
                and self.num_results == other.num_results
                and self.bits == other.bits)

    def __hash__(self):
        return hash((self.num_shots, self.num_results, self.bits))

    def __repr__(self):
        return f"SampleTable({self.num_shots} shots x {self.num_results} results)"


# ----------------------------------------------------------------------
# 01: ASCII characters, one line per shot


def write_01(table: SampleTable) -> bytes:
    if table.num_shots == 0:
        return b""
    mat = table.to_numpy()
    lines = np.empty((table.num_shots, table.num_results + 1), dtype=np.uint8)
    lines[:, :-1] = mat + ord("0")
    lines[:, -1] = ord("\n")
    return lines.tobytes()


def read_01(data: bytes) -> SampleTable:
    text = data.decode("ascii")
    rows = [line for line in text.split("\n") if line]
    if not rows:
        return SampleTable(0, 0)
    width = len(rows[0])
    mat = np.zeros((len(rows), width), dtype=np.uint8)
    for i, line in enumerate(rows):
        if len(line) != width or set(line) - {"0", "1"}:
            raise ValueError(f"bad 01 line {i}: {line!r}")
        mat[i] = np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")
    return SampleTable.from_numpy(mat)


# ----------------------------------------------------------------------
# b8: 8 results per byte, least significant bit first, zero padded


def write_b8(table: SampleTable) -> bytes:
    nbytes = (table.num_results + 7) // 8
    return b"".join(row.bits.to_bytes(nbytes, "little") for row in table.bits.rows)


def read_b8(data: bytes, num_results: int) -> SampleTable:
    nbytes = (num_results + 7) // 8
    if nbytes == 0:
        return SampleTable(0, 0)
    if len(data) % nbytes:
        raise ValueError("b8 data length is not a whole number of shots")
    rows = [BitBuffer.from_bytes(data[i:i + nbytes], num_results)
            for i in range(0, len(data), nbytes)]
    return SampleTable.from_rows(rows, num_results)


# ----------------------------------------------------------------------
# hits: ascending set-bit indices, comma separated, one line per shot


def write_hits(table: SampleTable) -> bytes:
    lines = []
    for row in table.bits.rows:
        indices = []
        bits = row.bits
        while bits:
            indices.append(str((bits & -bits).bit_length() - 1))
            bits &= bits - 1
        lines.append(",".join(indices))
    return ("\n".join(lines) + "\n").encode("ascii") if lines else b""


def read_hits(data: bytes, num_results: int) -> SampleTable:
    text = data.decode("ascii")
    if text and not text.endswith("\n"):
        raise ValueError("hits data must end with a newline")
    rows = []
    for i, line in enumerate(text.split("\n")[:-1]):
        row = BitBuffer(num_results)
        if line:
            for token in line.split(","):
                row.set(int(token), 1)
        rows.append(row)
    return SampleTable.from_rows(rows, num_results)


# ----------------------------------------------------------------------
# r8: run lengths between ones; 255 = 255 zeros and no one; a virtual one
# at index num_results terminates each shot


def write_r8(table: SampleTable) -> bytes:
    out = bytearray()
    for row in table.bits.rows:
        prev = -1
        bits = row.bits
        while bits:
            pos = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            gap = pos - prev - 1
            while gap >= 255:
                out.append(255)
                gap -= 255
            out.append(gap)
            prev = pos
        gap = table.num_results - prev - 1
        while gap >= 255:
            out.append(255)
            gap -= 255
        out.append(gap)
    return bytes(out)


def read_r8(data: bytes, num_results: int) -> SampleTable:
    rows = []
    row = BitBuffer(num_results)
    pos = 0
    for byte in data:
        if byte == 255:
            pos += 255
            continue
        pos += byte
        if pos == num_results:
            rows.append(row)
            row = BitBuffer(num_results)
            pos = 0
        elif pos > num_results:
            raise ValueError("r8 shot overruns its declared width")
        else:
            row.set(pos, 1)
            pos += 1
    if pos:
        raise ValueError("r8 data ends mid-shot")
    return SampleTable.from_rows(rows, num_results)


FORMATS = {
    "01": (write_01, read_01),
    "b8": (write_b8, read_b8),
    "hits": (write_hits, read_hits),
    "r8": (write_r8, read_r8),
}


def write_table(table: SampleTable, fmt: str) -> bytes:
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    return FORMATS[fmt][0](table)


# ----------------------------------------------------------------------
# detectors


def detector_events(flips: SampleTable, detectors: list[tuple[int, ...]]) -> SampleTable:
    """Combine measurement-flip bits into detection events.

    Each detector's noiseless parity is deterministic, so the reference
    contributions cancel and the event bit is just the xor of the flip bits
    at the detector's measurement indices.
    """
    for d, indices in enumerate(detectors):
        for m in indices:
            if not 0 <= m < flips.num_results:
                raise ValueError(
                    f"detector {d} references measurement {m}, have "
                    f"{flips.num_results}")
    mat = flips.to_numpy()
    events = np.zeros((flips.num_shots, len(detectors)), dtype=np.uint8)
    for d, indices in enumerate(detectors):
        if indices:
            events[:, d] = np.bitwise_xor.reduce(mat[:, list(indices)], axis=1)
    return SampleTable.from_numpy(events) if len(detectors) else \
        SampleTable(flips.num_shots, 0, BitTable(flips.num_shots, 0))
