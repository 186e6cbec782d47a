"""Stabilizer tableaus: conjugation, composition, inversion, random sampling.

A tableau records how a Clifford operation U conjugates each generator of
the Pauli group: column q of the X half is U X_q U^dag and column q of the
Z half is U Z_q U^dag, each a signed Pauli string.  Storage is four n x n
bit tables (x and z planes of the X images, x and z planes of the Z images)
plus two n-bit sign buffers, 4n^2 + O(n) bits total.

Columns live contiguously by default ("column" layout).  Row layout holds
the transposed planes so that all columns' bits at one qubit position share
a buffer; the measurement engine switches to it for bursts of column-sweep
updates and switches back afterwards.
"""

from __future__ import annotations

import numpy as np

from .bitvec import BitBuffer, BitTable, transposed
from .entropy import random_bits
from .pauli import PauliString, mul_inplace_with_phase, parse_pauli, format_pauli

COLUMN_MAJOR = "column"
ROW_MAJOR = "row"


class Tableau:
    __slots__ = ("num_qubits", "xx", "xz", "zx", "zz", "x_signs", "z_signs", "layout")

    def __init__(self, num_qubits: int):
        n = num_qubits
        self.num_qubits = n
        # Row q of xx/xz holds the x/z bit plane of the image of X_q;
        # zx/zz likewise for the image of Z_q.
        self.xx = BitTable(n, n)
        self.xz = BitTable(n, n)
        self.zx = BitTable(n, n)
        self.zz = BitTable(n, n)
        self.x_signs = BitBuffer(n)
        self.z_signs = BitBuffer(n)
        self.layout = COLUMN_MAJOR

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def identity(cls, num_qubits: int) -> "Tableau":
        if num_qubits < 0:
            raise ValueError("num_qubits must be >= 0")
        t = cls(num_qubits)
        for q in range(num_qubits):
            t.xx.rows[q].bits = 1 << q
            t.zz.rows[q].bits = 1 << q
        return t

    @classmethod
    def from_images(cls, x_images, z_images) -> "Tableau":
        """Build from per-generator image strings (text or PauliString).

        No validity check is performed; use validate() to verify the result
        represents a Clifford operation.
        """
        xs = [parse_pauli(p) if isinstance(p, str) else p for p in x_images]
        zs = [parse_pauli(p) if isinstance(p, str) else p for p in z_images]
        n = len(xs)
        if len(zs) != n:
            raise ValueError("need equally many X and Z images")
        t = cls(n)
        for q in range(n):
            if xs[q].num_qubits != n or zs[q].num_qubits != n:
                raise ValueError("image length does not match qubit count")
            t.xx.rows[q].bits = xs[q].xs.bits
            t.xz.rows[q].bits = xs[q].zs.bits
            t.zx.rows[q].bits = zs[q].xs.bits
            t.zz.rows[q].bits = zs[q].zs.bits
            t.x_signs.set(q, xs[q].sign)
            t.z_signs.set(q, zs[q].sign)
        return t

    # ------------------------------------------------------------------
    # accessors

    def x_image(self, q: int) -> PauliString:
        """The signed Pauli that X_q conjugates into."""
        self._require_column()
        return PauliString.from_bits(self.num_qubits, self.x_signs.get(q),
                                     self.xx.rows[q].bits, self.xz.rows[q].bits)

    def z_image(self, q: int) -> PauliString:
        """The signed Pauli that Z_q conjugates into."""
        self._require_column()
        return PauliString.from_bits(self.num_qubits, self.z_signs.get(q),
                                     self.zx.rows[q].bits, self.zz.rows[q].bits)

    def copy(self) -> "Tableau":
        t = Tableau(self.num_qubits)
        t.xx = self.xx.copy()
        t.xz = self.xz.copy()
        t.zx = self.zx.copy()
        t.zz = self.zz.copy()
        t.x_signs = self.x_signs.copy()
        t.z_signs = self.z_signs.copy()
        t.layout = self.layout
        return t

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tableau):
            return NotImplemented
        if self.num_qubits != other.num_qubits or self.layout != other.layout:
            return False
        return (self.xx == other.xx and self.xz == other.xz
                and self.zx == other.zx and self.zz == other.zz
                and self.x_signs == other.x_signs and self.z_signs == other.z_signs)

    def __hash__(self):
        return hash((self.num_qubits, self.x_signs.bits, self.z_signs.bits,
                     self.xx, self.zz))

    def __str__(self) -> str:
        self._require_column()
        lines = [f"X{q} -> {format_pauli(self.x_image(q))}" for q in range(self.num_qubits)]
        lines += [f"Z{q} -> {format_pauli(self.z_image(q))}" for q in range(self.num_qubits)]
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"Tableau(num_qubits={self.num_qubits})"

    def _require_column(self):
        if self.layout != COLUMN_MAJOR:
            raise ValueError("operation requires column-major layout")

    # ------------------------------------------------------------------
    # layout switching

    def to_row_major(self) -> None:
        """Transpose the four planes so qubit positions become contiguous."""
        self._require_column()
        self.xx = transposed(self.xx)
        self.xz = transposed(self.xz)
        self.zx = transposed(self.zx)
        self.zz = transposed(self.zz)
        self.layout = ROW_MAJOR

    def to_column_major(self) -> None:
        if self.layout != ROW_MAJOR:
            raise ValueError("tableau is not in row-major layout")
        self.xx = transposed(self.xx)
        self.xz = transposed(self.xz)
        self.zx = transposed(self.zx)
        self.zz = transposed(self.zz)
        self.layout = COLUMN_MAJOR

    # ------------------------------------------------------------------
    # validation

    def validate(self) -> bool:
        """Check the commutation structure of a valid Clifford tableau.

        Images of X_a and Z_a must anticommute; every other pair of images
        must commute.
        """
        self._require_column()
        n = self.num_qubits
        cols = []
        for q in range(n):
            cols.append((self.xx.rows[q].bits, self.xz.rows[q].bits))
        for q in range(n):
            cols.append((self.zx.rows[q].bits, self.zz.rows[q].bits))
        for i in range(2 * n):
            xi, zi = cols[i]
            for j in range(i + 1, 2 * n):
                xj, zj = cols[j]
                anti = ((xi & zj) ^ (zi & xj)).bit_count() & 1
                want = 1 if j == i + n else 0
                if anti != want:
                    return False
        return True

    # ------------------------------------------------------------------
    # conjugation

    def conjugate(self, p: PauliString, targets=None) -> PauliString:
        """Return this tableau's conjugate of `p` (sign respected).

        With `targets`, the tableau acts on `p`'s qubits targets[0..m-1] and
        leaves the rest untouched; `p` may then be wider than the tableau.
        """
        self._require_column()
        n = self.num_qubits
        if targets is None:
            if p.num_qubits != n:
                raise ValueError(
                    f"pauli width {p.num_qubits} != tableau width {n}")
            sign, x, z = self._conjugate_bits(p.sign, p.xs.bits, p.zs.bits)
            return PauliString.from_bits(n, sign, x, z)
        if len(targets) != n:
            raise ValueError("need one target per tableau qubit")
        sub_x = 0
        sub_z = 0
        for slot, t in enumerate(targets):
            sub_x |= p.xs.get(t) << slot
            sub_z |= p.zs.get(t) << slot
        sign, new_x, new_z = self._conjugate_bits(p.sign, sub_x, sub_z)
        out = p.copy()
        out.sign = sign
        for slot, t in enumerate(targets):
            out.xs.set(t, (new_x >> slot) & 1)
            out.zs.set(t, (new_z >> slot) & 1)
        return out

    def _conjugate_bits(self, sign: int, x_bits: int, z_bits: int):
        """Conjugate a raw (sign, x, z) triple of tableau width."""
        n = self.num_qubits
        # Decompose into X_q / Z_q generators (X before Z per site, each Y
        # contributing one factor of i), then replace each generator by its
        # image, multiplying images left to right.
        phase = (x_bits & z_bits).bit_count()  # base-i exponent from Y sites
        acc = PauliString(n)
        support = x_bits | z_bits
        while support:
            q = (support & -support).bit_length() - 1
            support &= support - 1
            if (x_bits >> q) & 1:
                phase += mul_inplace_with_phase(acc, self.x_image(q))
                sign ^= self.x_signs.get(q)
            if (z_bits >> q) & 1:
                phase += mul_inplace_with_phase(acc, self.z_image(q))
                sign ^= self.z_signs.get(q)
        phase &= 3
        if phase & 1:
            raise RuntimeError("conjugation produced an odd base-i phase")
        sign ^= phase == 2
        return sign, acc.xs.bits, acc.zs.bits


def _check_targets(tableau_qubits: int, b: "Tableau", targets) -> tuple:
    targets = tuple(targets)
    if len(targets) != b.num_qubits:
        raise ValueError(
            f"gate covers {b.num_qubits} qubits but got {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets: {targets}")
    for t in targets:
        if not 0 <= t < tableau_qubits:
            raise ValueError(f"target {t} out of range [0, {tableau_qubits})")
    return targets


# ----------------------------------------------------------------------
# appending: A <- tableau of (U_B . U_A); every column c becomes phi_B(c)


def append_lookup(b: Tableau):
    """Per-column lookup for appending `b`: code -> (new code, sign flip).

    The code packs the column's bits at the target qubits as
    sum_slot (x_slot << 2*slot | z_slot << (2*slot+1)).
    """
    m = b.num_qubits
    size = 1 << (2 * m)
    table = []
    for code in range(size):
        x = 0
        z = 0
        for slot in range(m):
            x |= ((code >> (2 * slot)) & 1) << slot
            z |= ((code >> (2 * slot + 1)) & 1) << slot
        sign, nx, nz = b._conjugate_bits(0, x, z)
        new_code = 0
        for slot in range(m):
            new_code |= ((nx >> slot) & 1) << (2 * slot)
            new_code |= ((nz >> slot) & 1) << (2 * slot + 1)
        table.append((new_code, sign))
    return tuple(table)


_APPEND_TABLE_MAX_QUBITS = 3


def inplace_append(a: Tableau, b: Tableau, targets, _lookup=None) -> None:
    """Mutate `a` into the composition "a's operation, then b's" on targets."""
    a._require_column()
    targets = _check_targets(a.num_qubits, b, targets)
    if _lookup is None and b.num_qubits <= _APPEND_TABLE_MAX_QUBITS:
        _lookup = append_lookup(b)
    if _lookup is not None:
        _append_by_table(a, _lookup, b.num_qubits, targets)
    else:
        _append_by_conjugation(a, b, targets)


def _append_by_table(a: Tableau, lookup, m: int, targets) -> None:
    slots = range(m)
    for plane_x, plane_z, signs in ((a.xx, a.xz, a.x_signs), (a.zx, a.zz, a.z_signs)):
        rows_x = plane_x.rows
        rows_z = plane_z.rows
        for c in range(a.num_qubits):
            bx = rows_x[c].bits
            bz = rows_z[c].bits
            code = 0
            for slot in slots:
                t = targets[slot]
                code |= ((bx >> t) & 1) << (2 * slot)
                code |= ((bz >> t) & 1) << (2 * slot + 1)
            new_code, flip = lookup[code]
            if new_code != code:
                for slot in slots:
                    t = targets[slot]
                    bx ^= (((bx >> t) ^ (new_code >> (2 * slot))) & 1) << t
                    bz ^= (((bz >> t) ^ (new_code >> (2 * slot + 1))) & 1) << t
                rows_x[c].bits = bx
                rows_z[c].bits = bz
            if flip:
                signs.toggle(c)


def _append_by_conjugation(a: Tableau, b: Tableau, targets) -> None:
    m = b.num_qubits
    slots = range(m)
    for plane_x, plane_z, signs in ((a.xx, a.xz, a.x_signs), (a.zx, a.zz, a.z_signs)):
        rows_x = plane_x.rows
        rows_z = plane_z.rows
        for c in range(a.num_qubits):
            bx = rows_x[c].bits
            bz = rows_z[c].bits
            sub_x = 0
            sub_z = 0
            for slot in slots:
                t = targets[slot]
                sub_x |= ((bx >> t) & 1) << slot
                sub_z |= ((bz >> t) & 1) << slot
            flip, new_x, new_z = b._conjugate_bits(0, sub_x, sub_z)
            for slot in slots:
                t = targets[slot]
                bx ^= (((bx >> t) ^ (new_x >> slot)) & 1) << t
                bz ^= (((bz >> t) ^ (new_z >> slot)) & 1) << t
            rows_x[c].bits = bx
            rows_z[c].bits = bz
            if flip:
                signs.toggle(c)


# ----------------------------------------------------------------------
# prepending: A <- tableau of (U_A . U_B); only targeted columns change


def prepend_plan(b: Tableau):
    """Compile b's columns into multiply plans executed against a host tableau.

    Each entry describes one output column: (out_plane, out_slot, image sign,
    base-i exponent, factor list), factors being (plane, slot) pairs naming
    host columns to multiply.  Identity columns are omitted.
    """
    plan = []
    m = b.num_qubits
    for out_plane, images_x, images_z, signs in (
            (0, b.xx, b.xz, b.x_signs), (1, b.zx, b.zz, b.z_signs)):
        for q in range(m):
            xb = images_x.rows[q].bits
            zb = images_z.rows[q].bits
            sign = signs.get(q)
            identity_bits = (xb == (1 << q) and zb == 0) if out_plane == 0 \
                else (xb == 0 and zb == (1 << q))
            if identity_bits and sign == 0:
                continue
            factors = []
            base_i = (xb & zb).bit_count()
            support = xb | zb
            while support:
                s = (support & -support).bit_length() - 1
                support &= support - 1
                if (xb >> s) & 1:
                    factors.append((0, s))
                if (zb >> s) & 1:
                    factors.append((1, s))
            plan.append((out_plane, q, sign, base_i, tuple(factors)))
    return tuple(plan)


def inplace_prepend(a: Tableau, b: Tableau, targets, _plan=None) -> None:
    """Mutate `a` into the composition "b's operation, then a's" on targets."""
    a._require_column()
    targets = _check_targets(a.num_qubits, b, targets)
    if _plan is None:
        _plan = prepend_plan(b)
    _execute_prepend(a, _plan, targets)


def _execute_prepend(a: Tableau, plan, targets) -> None:
    """Apply a compiled prepend plan; targets must already be validated."""
    planes = ((a.xx.rows, a.xz.rows, a.x_signs), (a.zx.rows, a.zz.rows, a.z_signs))
    updates = []
    for out_plane, out_slot, img_sign, base_i, factors in plan:
        acc_x = 0
        acc_z = 0
        sign = img_sign
        phase = base_i
        for plane, slot in factors:
            rows_x, rows_z, signs = planes[plane]
            t = targets[slot]
            fx = rows_x[t].bits
            fz = rows_z[t].bits
            # inline pauli multiply accumulating the base-i phase
            x1z2 = acc_x & fz
            anti = (fx & acc_z) ^ x1z2
            acc_x ^= fx
            acc_z ^= fz
            c2 = (acc_x ^ acc_z ^ x1z2) & anti
            phase += anti.bit_count() + 2 * c2.bit_count()
            sign ^= (signs.bits >> t) & 1
        phase &= 3
        if phase & 1:
            raise RuntimeError("prepend produced an odd base-i phase")
        sign ^= phase == 2
        updates.append((out_plane, targets[out_slot], acc_x, acc_z, sign))
    for out_plane, t, acc_x, acc_z, sign in updates:
        rows_x, rows_z, signs = planes[out_plane]
        rows_x[t].bits = acc_x
        rows_z[t].bits = acc_z
        signs.set(t, sign)


def compose(a: Tableau, b: Tableau) -> Tableau:
    """Tableau of "b's operation first, then a's" over matching widths."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("compose needs equal widths")
    out = b.copy()
    inplace_append(out, a, range(a.num_qubits))
    return out


# ----------------------------------------------------------------------
# inversion


def _inverse_block_rule():
    """Solve the 2x2 block transform of inversion from commutation constraints.

    For every pattern of the four bits (x and z bits at position b of the
    images of X_a and Z_a), enumerate the four output bits (bits at position
    a of the inverse's images of X_b and Z_b) consistent with conjugation
    preserving commutation against the four single-site generators.  Each
    constraint fixes one output bit uniquely.
    """
    rule = {}
    for xxb in range(2):
        for xzb in range(2):
            for zxb in range(2):
                for zzb in range(2):
                    # inverse X_b image at a: anticommutes with Z_a iff its
                    # x bit is set, matching X_b vs image(Z_a); with X_a iff
                    # its z bit is set, matching X_b vs image(X_a).
                    ixx = zzb
                    ixz = xzb
                    izx = zxb
                    izz = xxb
                    rule[(xxb, xzb, zxb, zzb)] = (ixx, ixz, izx, izz)
    return rule


_INVERSE_RULE = _inverse_block_rule()
# The constraint solution is plane-wise: swap the XX and ZZ planes and
# transpose all four.
assert all(v == (k[3], k[1], k[2], k[0]) for k, v in _INVERSE_RULE.items())


def inverse(t: Tableau) -> Tableau:
    """The unique tableau satisfying compose(t, inverse(t)) == identity.

    Pauli terms come from transposing input and output indices and applying
    the local block rule above (O(n^2)); each sign is then fixed by
    round-tripping its generator through the sign-free inverse and `t`
    (O(n^3) total).
    """
    t._require_column()
    if not t.validate():
        raise ValueError("cannot invert an invalid tableau")
    n = t.num_qubits
    out = Tableau(n)
    out.xx = transposed(t.zz)
    out.xz = transposed(t.xz)
    out.zx = transposed(t.zx)
    out.zz = transposed(t.xx)
    for q in range(n):
        rx = t.conjugate(out.x_image(q))
        if rx.xs.bits != 1 << q or rx.zs.bits != 0:
            raise RuntimeError("inverse Pauli terms failed to round-trip")
        out.x_signs.set(q, rx.sign)
        rz = t.conjugate(out.z_image(q))
        if rz.xs.bits != 0 or rz.zs.bits != 1 << q:
            raise RuntimeError("inverse Pauli terms failed to round-trip")
        out.z_signs.set(q, rz.sign)
    return out


# ----------------------------------------------------------------------
# random sampling (Koenig-Smolin symplectic construction plus random signs)


def _symp_inner(v: int, w: int, even_mask: int) -> int:
    """Symplectic product of interleaved (x, z) bit vectors."""
    a = v & (w >> 1) & even_mask
    b = w & (v >> 1) & even_mask
    return (a ^ b).bit_count() & 1


def _transvect(k: int, v: int, even_mask: int) -> int:
    return v ^ k if _symp_inner(k, v, even_mask) else v


def _anticommuting_partner(site: int) -> int:
    """Any 2-bit site code pairing oddly with the non-identity code given."""
    return 2 if site == 3 else 3


def _find_transvection(x: int, y: int, n: int, even_mask: int):
    """Vectors (h0, h1) with Z_h1(Z_h0(x)) == y, for nonzero x, y.

    Two distinct non-identity terms at one site always pair oddly, so a
    single-site correction vector suffices whenever x and y overlap; else
    one site is borrowed from each.
    """
    if x == y:
        return 0, 0
    if _symp_inner(x, y, even_mask):
        return x ^ y, 0
    # one site where both are non-identity
    for i in range(n):
        xx = (x >> (2 * i)) & 3
        yy = (y >> (2 * i)) & 3
        if xx and yy:
            zz = xx ^ yy
            if zz == 0:
                zz = _anticommuting_partner(xx)
            z = zz << (2 * i)
            return x ^ z, z ^ y
    # disjoint supports: one site where only x is non-identity plus one
    # where only y is
    z = 0
    for i in range(n):
        xx = (x >> (2 * i)) & 3
        if xx and not (y >> (2 * i)) & 3:
            z |= _anticommuting_partner(xx) << (2 * i)
            break
    for i in range(n):
        yy = (y >> (2 * i)) & 3
        if yy and not (x >> (2 * i)) & 3:
            z |= _anticommuting_partner(yy) << (2 * i)
            break
    return x ^ z, z ^ y


def _random_symplectic_rows(n: int, rng: np.random.Generator):
    """Rows of a uniformly random 2n x 2n symplectic matrix over GF(2).

    Row 2q is the image vector of X_q and row 2q+1 of Z_q, with bit 2i the
    x bit and bit 2i+1 the z bit at qubit i.
    """
    nn = 2 * n
    even_mask = sum(1 << (2 * i) for i in range(n))
    f1 = 0
    while f1 == 0:
        f1 = random_bits(rng, nn)
    t0, t1 = _find_transvection(1, f1, n, even_mask)
    bits = random_bits(rng, nn - 1)
    eprime = 1 | ((bits >> 1) << 2)
    h0 = _transvect(t0, eprime, even_mask)
    h0 = _transvect(t1, h0, even_mask)
    if bits & 1:
        f1 = 0
    if n == 1:
        rows = [1, 2]
    else:
        rest = _random_symplectic_rows(n - 1, rng)
        rows = [1, 2] + [r << 2 for r in rest]
    for j in range(nn):
        v = _transvect(t0, rows[j], even_mask)
        v = _transvect(t1, v, even_mask)
        v = _transvect(h0, v, even_mask)
        if f1:
            v = _transvect(f1, v, even_mask)
        rows[j] = v
    return rows


def random_tableau(n: int, rng: np.random.Generator) -> Tableau:
    """A random valid tableau drawn from the whole Clifford group."""
    if n < 1:
        raise ValueError("random_tableau needs n >= 1")
    rows = _random_symplectic_rows(n, rng)
    t = Tableau(n)
    for q in range(n):
        for plane_x, plane_z, row in ((t.xx, t.xz, rows[2 * q]),
                                      (t.zx, t.zz, rows[2 * q + 1])):
            x_bits = 0
            z_bits = 0
            for i in range(n):
                x_bits |= ((row >> (2 * i)) & 1) << i
                z_bits |= ((row >> (2 * i + 1)) & 1) << i
            plane_x.rows[q].bits = x_bits
            plane_z.rows[q].bits = z_bits
    t.x_signs.bits = random_bits(rng, n)
    t.z_signs.bits = random_bits(rng, n)
    return t
