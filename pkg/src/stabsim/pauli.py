"""Pauli products in the xz encoding with sign tracking.

A string stores one sign bit and two separate bit planes: the x plane marks
qubits carrying X or Y, the z plane marks qubits carrying Z or Y.  Per qubit
the decode is (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z.  The global phase is
restricted to +-1; the imaginary factors that appear while multiplying are
returned to the caller as a base-i exponent and never stored.
"""

from __future__ import annotations

from .bitvec import BitBuffer

_CODE_TO_CHAR = "_XYZ"
_CHAR_TO_CODE = {"_": 0, "I": 0, "X": 1, "Y": 2, "Z": 3}


class PauliParseError(ValueError):
    """Raised for malformed Pauli string text; carries the bad column."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class PauliString:
    """A signed tensor product of single-qubit Paulis over num_qubits qubits."""

    __slots__ = ("num_qubits", "sign", "xs", "zs")

    def __init__(self, num_qubits: int, sign: int = 0,
                 xs: BitBuffer | None = None, zs: BitBuffer | None = None):
        self.num_qubits = num_qubits
        self.sign = sign & 1
        self.xs = xs if xs is not None else BitBuffer(num_qubits)
        self.zs = zs if zs is not None else BitBuffer(num_qubits)
        if self.xs.num_bits != num_qubits or self.zs.num_bits != num_qubits:
            raise ValueError("bit plane length does not match num_qubits")

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls(num_qubits)

    @classmethod
    def from_bits(cls, num_qubits: int, sign: int, x_bits: int, z_bits: int) -> "PauliString":
        return cls(num_qubits, sign,
                   BitBuffer(num_qubits, x_bits), BitBuffer(num_qubits, z_bits))

    def get(self, qubit: int) -> int:
        """Pauli code at `qubit`: 0=I, 1=X, 2=Y, 3=Z."""
        x = self.xs.get(qubit)
        z = self.zs.get(qubit)
        return (0, 1, 3, 2)[x + 2 * z]

    def set(self, qubit: int, code: int) -> None:
        if not 0 <= code <= 3:
            raise ValueError(f"pauli code must be 0..3, got {code}")
        self.xs.set(qubit, code in (1, 2))
        self.zs.set(qubit, code in (2, 3))

    def weight(self) -> int:
        """Number of non-identity terms."""
        return (self.xs.bits | self.zs.bits).bit_count()

    def copy(self) -> "PauliString":
        return PauliString(self.num_qubits, self.sign, self.xs.copy(), self.zs.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.num_qubits == other.num_qubits and self.sign == other.sign
                and self.xs.bits == other.xs.bits and self.zs.bits == other.zs.bits)

    def __hash__(self):
        return hash((self.num_qubits, self.sign, self.xs.bits, self.zs.bits))

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        return f"PauliString({format_pauli(self)!r})"


def mul_inplace_with_phase(lhs: PauliString, rhs: PauliString) -> int:
    """lhs *= rhs on the bit planes, returning the base-i phase exponent.

    The returned k in {0, 1, 2, 3} satisfies, for the sign-free strings,
    lhs_before * rhs == i**k * lhs_after.  Sign bits are left untouched and
    excluded from k; callers fold them separately.

    The anticommutation tally uses two one-bit-per-lane counters, the same
    word-parallel update the batched engines rely on.
    """
    if lhs.num_qubits != rhs.num_qubits:
        raise ValueError(
            f"length mismatch: {lhs.num_qubits} != {rhs.num_qubits}")
    x1, z1 = lhs.xs.bits, lhs.zs.bits
    x2, z2 = rhs.xs.bits, rhs.zs.bits
    new_x = x1 ^ x2
    new_z = z1 ^ z2
    x1z2 = x1 & z2
    anti = (x2 & z1) ^ x1z2
    c2 = (new_x ^ new_z ^ x1z2) & anti
    lhs.xs.bits = new_x
    lhs.zs.bits = new_z
    return (anti.bit_count() + 2 * c2.bit_count()) & 3


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the two products commute (even number of clashing sites)."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"length mismatch: {a.num_qubits} != {b.num_qubits}")
    return ((a.xs.bits & b.zs.bits) ^ (a.zs.bits & b.xs.bits)).bit_count() & 1 == 0


def parse_pauli(text: str) -> PauliString:
    """Parse text like "+_____XZ___" or "-Y"; underscore and I both mean identity."""
    sign = 0
    body = text
    column = 0
    if body[:1] in ("+", "-"):
        sign = 1 if body[0] == "-" else 0
        body = body[1:]
        column = 1
    if not body:
        raise PauliParseError("empty pauli string body", column)
    p = PauliString(len(body), sign)
    for i, ch in enumerate(body):
        code = _CHAR_TO_CODE.get(ch.upper())
        if code is None:
            raise PauliParseError(f"unknown pauli character {ch!r}", column + i)
        p.set(i, code)
    return p


def format_pauli(p: PauliString) -> str:
    """Canonical text form: sign prefix, then one of _XYZ per qubit."""
    sign = "-" if p.sign else "+"
    return sign + "".join(_CODE_TO_CHAR[p.get(q)] for q in range(p.num_qubits))
