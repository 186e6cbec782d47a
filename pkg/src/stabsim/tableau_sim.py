"""Inverse-tableau stabilizer simulation.

The state is the tableau of the inverse of the Clifford applied so far, so
the Z_q column is directly the start-of-time observable equivalent to
measuring Z_q now.  Folding a gate prepends its inverse; a measurement is
deterministic exactly when its column carries no X or Y term, in which case
the result is the column sign.  Random measurements are resolved by
appending start-of-time CNOTs onto a pivot, a basis change collapsing the
pivot term to Z, and a coin-flip X.

Appended gates touch one or two bit positions of every column.  For wide
tableaus with many pivot partners the planes are transposed to row-major
so each appended gate becomes a handful of whole-row word operations, then
transposed back; both routes produce identical states.
"""

from __future__ import annotations

import numpy as np

from . import tableau as tb
from .circuit import Circuit, iter_flat
from .entropy import make_rng
from .gates import ANNOTATION, COLLAPSING, NOISE, UNITARY, GateData, get_gate
from .tableau import Tableau

# Collapse gate for a Y pivot term: swaps Y and Z (and negates X), the
# (Y+Z)/sqrt(2) reflection.  Only its tableau is needed.
_H_YZ_TABLEAU = Tableau.from_images(("-X",), ("+Y",))

_H_LOOKUP = None
_HYZ_LOOKUP = None
_CNOT_LOOKUP = None

# Row-major elimination pays off once columns are wide and pivots have many
# partners; below that the per-column loop is cheaper than two transposes.
_ROW_MAJOR_MIN_QUBITS = 192
_ROW_MAJOR_MIN_TERMS = 16


def _elimination_lookups():
    global _H_LOOKUP, _HYZ_LOOKUP, _CNOT_LOOKUP
    if _H_LOOKUP is None:
        _H_LOOKUP = tb.append_lookup(get_gate("H").tableau)
        _HYZ_LOOKUP = tb.append_lookup(_H_YZ_TABLEAU)
        _CNOT_LOOKUP = tb.append_lookup(get_gate("CNOT").tableau)
    return _H_LOOKUP, _HYZ_LOOKUP, _CNOT_LOOKUP


class SimState:
    """Interactive stabilizer simulator over a fixed-or-growing qubit set."""

    def __init__(self, num_qubits: int = 0, rng=None, seed=None):
        self.inv = Tableau.identity(num_qubits)
        self.rng = rng if rng is not None else make_rng(seed)
        self.measurement_record: list[int] = []
        self.determined_record: list[bool] = []
        self.elimination_layout = "auto"  # auto | column | row

    @property
    def num_qubits(self) -> int:
        return self.inv.num_qubits

    def ensure_qubits(self, num_qubits: int) -> None:
        """Grow the state with fresh |0> qubits up to num_qubits."""
        inv = self.inv
        n = inv.num_qubits
        if num_qubits <= n:
            return
        for table in (inv.xx, inv.xz, inv.zx, inv.zz):
            for row in table.rows:
                row.num_bits = num_qubits
            for q in range(n, num_qubits):
                table.rows.append(tb.BitBuffer(num_qubits))
            table.num_major = num_qubits
            table.num_minor = num_qubits
        for q in range(n, num_qubits):
            inv.xx.rows[q].bits = 1 << q
            inv.zz.rows[q].bits = 1 << q
        inv.x_signs.num_bits = num_qubits
        inv.z_signs.num_bits = num_qubits
        inv.num_qubits = num_qubits

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.inv.num_qubits:
            raise ValueError(f"qubit {q} out of range [0, {self.inv.num_qubits})")

    # ------------------------------------------------------------------
    # gates and noise

    def apply_gate(self, gate: GateData | str, targets) -> None:
        if isinstance(gate, str):
            gate = get_gate(gate)
        if gate.kind != UNITARY:
            raise ValueError(f"{gate.name} is not a unitary gate")
        targets = tuple(targets)
        if len(targets) != gate.arity or len(set(targets)) != len(targets):
            raise ValueError(f"{gate.name} needs {gate.arity} distinct targets")
        for t in targets:
            self._check_qubit(t)
        tb._execute_prepend(self.inv, gate.fold_plan, targets)

    def apply_noise(self, gate: GateData | str, p: float, targets) -> None:
        """Sample the channel once per application and fold the hits."""
        if isinstance(gate, str):
            gate = get_gate(gate)
        if gate.kind != NOISE:
            raise ValueError(f"{gate.name} is not a noise channel")
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"noise probability must be in [0, 1], got {p}")
        targets = tuple(targets)
        for t in targets:
            self._check_qubit(t)
        patterns = gate.noise_patterns
        for i in range(0, len(targets), gate.arity):
            if self.rng.random() >= p:
                continue
            pick = patterns[self.rng.integers(len(patterns))] \
                if len(patterns) > 1 else patterns[0]
            self._fold_pauli(pick, targets[i:i + gate.arity])

    def _fold_pauli(self, pattern, targets) -> None:
        """Fold a Pauli given as (x_mask, z_mask) over the target slots.

        Prepending X_t negates the Z_t column, prepending Z_t negates the
        X_t column; only signs move.
        """
        x_mask, z_mask = pattern
        inv = self.inv
        for slot, t in enumerate(targets):
            if (x_mask >> slot) & 1:
                inv.z_signs.toggle(t)
            if (z_mask >> slot) & 1:
                inv.x_signs.toggle(t)

    # ------------------------------------------------------------------
    # measurement and reset

    def measure(self, q: int) -> int:
        self._check_qubit(q)
        inv = self.inv
        deterministic = inv.zx.rows[q].bits == 0
        if not deterministic:
            self._collapse(q)
        bit = inv.z_signs.get(q)
        self.measurement_record.append(bit)
        self.determined_record.append(deterministic)
        return bit

    def reset(self, q: int) -> None:
        self._check_qubit(q)
        if self.inv.zx.rows[q].bits != 0:
            self._collapse(q)
        self.inv.z_signs.set(q, 0)

    def measure_reset(self, q: int) -> int:
        bit = self.measure(q)
        self.inv.z_signs.set(q, 0)
        return bit

    def _collapse(self, q: int) -> None:
        """Reduce a random Z_q column to a coin-flipped deterministic one.

        CNOTs from the pivot clear every partner's X part (a Y partner
        toggles the pivot between X and Y along the way), then a basis
        change picked from the pivot's post-sweep term collapses it to Z,
        and a fair coin decides whether an X flips the outcome.
        """
        inv = self.inv
        x_bits = inv.zx.rows[q].bits
        pivot = (x_bits & -x_bits).bit_length() - 1
        partners = []
        rest = x_bits & (x_bits - 1)
        while rest:
            partners.append((rest & -rest).bit_length() - 1)
            rest &= rest - 1
        coin = int(self.rng.integers(2))
        layout = self.elimination_layout
        if layout == "auto":
            layout = ("row" if inv.num_qubits >= _ROW_MAJOR_MIN_QUBITS
                      and len(partners) >= _ROW_MAJOR_MIN_TERMS else "column")
        if layout == "row":
            self._eliminate_row_major(q, pivot, partners, coin)
        else:
            self._eliminate_column_major(q, pivot, partners, coin)

    def _eliminate_column_major(self, q, pivot, partners, coin) -> None:
        inv = self.inv
        h_lookup, hyz_lookup, cnot_lookup = _elimination_lookups()
        for t in partners:
            tb._append_by_table(inv, cnot_lookup, 2, (pivot, t))
        pivot_is_y = inv.zz.rows[q].get(pivot)
        tb._append_by_table(inv, hyz_lookup if pivot_is_y else h_lookup, 1, (pivot,))
        if coin:
            # appending X negates every column with Z or Y on the pivot
            for signs, plane_z in ((inv.x_signs, inv.xz), (inv.z_signs, inv.zz)):
                for c in range(inv.num_qubits):
                    if plane_z.rows[c].get(pivot):
                        signs.toggle(c)

    def _eliminate_row_major(self, q, pivot, partners, coin) -> None:
        """Same appends as the column route, on transposed planes.

        In row-major layout one row holds a single qubit position across
        all columns, so each appended gate is a few whole-row xors plus a
        sign-flip mask."""
        inv = self.inv
        inv.to_row_major()
        n = inv.num_qubits
        mask = (1 << n) - 1
        groups = ((inv.xx, inv.xz, inv.x_signs), (inv.zx, inv.zz, inv.z_signs))
        for rows_x, rows_z, signs in groups:
            xp = rows_x.rows[pivot].bits
            zp = rows_z.rows[pivot].bits
            for t in partners:
                xt = rows_x.rows[t].bits
                zt = rows_z.rows[t].bits
                # CNOT(pivot -> t): sign flips where x_c z_t (x_t ^ z_c ^ 1)
                signs.bits ^= xp & zt & (~(xt ^ zp) & mask)
                rows_x.rows[t].bits = xt ^ xp
                zp ^= zt
            rows_z.rows[pivot].bits = zp
        pivot_is_y = (inv.zz.rows[pivot].bits >> q) & 1
        for rows_x, rows_z, signs in groups:
            xp = rows_x.rows[pivot].bits
            zp = rows_z.rows[pivot].bits
            if pivot_is_y:
                # H_YZ: x ^= z, sign flips on pure-X columns
                signs.bits ^= xp & (~zp & mask)
                rows_x.rows[pivot].bits = xp ^ zp
            else:
                # H: swap x and z, sign flips on Y columns
                signs.bits ^= xp & zp
                rows_x.rows[pivot].bits = zp
                rows_z.rows[pivot].bits = xp
            if coin:
                signs.bits ^= rows_z.rows[pivot].bits
        inv.to_column_major()

    # ------------------------------------------------------------------
    # running circuits

    def run(self, circuit: Circuit, skip_noise: bool = False) -> list[int]:
        """Execute a circuit, returning the bits it appended to the record."""
        return self.run_program(compile_program(circuit), skip_noise)

    def run_program(self, program, skip_noise: bool = False) -> list[int]:
        start = len(self.measurement_record)
        rng = self.rng
        record = self.measurement_record
        inv = self.inv
        for op in program:
            kind = op[0]
            if kind == 0:
                tb._execute_prepend(inv, op[1], op[2])
            elif kind == 1:
                self.measure(op[1])
            elif kind == 2:
                self.reset(op[1])
            elif kind == 3:
                self.measure_reset(op[1])
            elif not skip_noise:
                p = op[1]
                patterns = op[2]
                if len(patterns) == 1:
                    pattern = patterns[0]
                    for app in op[3]:
                        if rng.random() < p:
                            self._fold_pauli(pattern, app)
                else:
                    for app in op[3]:
                        if rng.random() < p:
                            self._fold_pauli(patterns[rng.integers(len(patterns))],
                                             app)
        return record[start:]

    def execute_instruction(self, instr) -> list[int]:
        """Run one parsed instruction (the REPL path); returns new record bits."""
        gate = instr.gate
        self.ensure_qubits(max(instr.targets, default=-1) + 1
                           if gate.kind != ANNOTATION else 0)
        start = len(self.measurement_record)
        if gate.kind == UNITARY:
            for i in range(0, len(instr.targets), gate.arity):
                self.apply_gate(gate, instr.targets[i:i + gate.arity])
        elif gate.kind == NOISE:
            self.apply_noise(gate, instr.param, instr.targets)
        elif gate.kind == COLLAPSING:
            for q in instr.targets:
                if gate.records and gate.resets:
                    self.measure_reset(q)
                elif gate.records:
                    self.measure(q)
                else:
                    self.reset(q)
        # annotations carry no simulation effect
        return self.measurement_record[start:]


def compile_program(circuit: Circuit):
    """Flatten a circuit into opcode tuples for repeated execution.

    Opcodes: (0, fold_plan, targets) unitary application, (1|2|3, qubit)
    measure/reset/measure-reset, (4, p, patterns, applications) noise.
    """
    program = []
    for instr in iter_flat(circuit):
        gate = instr.gate
        if gate.kind == UNITARY:
            plan = gate.fold_plan
            a = gate.arity
            for i in range(0, len(instr.targets), a):
                program.append((0, plan, instr.targets[i:i + a]))
        elif gate.kind == COLLAPSING:
            code = 3 if (gate.records and gate.resets) else (1 if gate.records else 2)
            for q in instr.targets:
                program.append((code, q))
        elif gate.kind == NOISE:
            a = gate.arity
            apps = tuple(instr.targets[i:i + a]
                         for i in range(0, len(instr.targets), a))
            program.append((4, instr.param, gate.noise_patterns, apps))
    return program


def reference_sample(circuit: Circuit, rng=None) -> list[int]:
    """One noiseless sample of the circuit's measurement record."""
    state = SimState(circuit.num_qubits, rng=rng)
    return state.run(circuit, skip_noise=True)
