"""Batched Pauli-frame simulation for bulk sampling.

A frame records, per qubit, whether that run has been bit and/or phase
flipped relative to a noiseless reference execution; global phase is
ignored.  Frames for a whole batch are packed minor-axis-first, one x row
and one z row per qubit, so every gate update is a handful of whole-row
word operations shared by the entire batch.  Measurement reports the x row
(set iff the frame carries X or Y there) and each collapsing operation
re-randomizes the z row, which is what makes any one noiseless reference
sample as good as any other.
"""

from __future__ import annotations

import numpy as np

from .bitvec import BitBuffer, BitTable, padded_bits, transposed
from .circuit import Circuit, iter_flat
from .entropy import GEOMETRIC_CUTOFF, bernoulli_bools, random_bits, sample_hits_geometric
from .gates import ANNOTATION, COLLAPSING, NOISE, UNITARY, GateData, get_gate
from .io_formats import SampleTable

DEFAULT_BATCH = 1024


class FrameBatch:
    """A table of parallel Pauli frames over num_qubits qubits."""

    def __init__(self, num_qubits: int, batch_size: int, rng: np.random.Generator):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.num_qubits = num_qubits
        self.batch_size = padded_bits(batch_size)
        self.rng = rng
        # Initialization collapses every qubit, i.e. a fair I-or-Z coin.
        self.x_table = BitTable(num_qubits, self.batch_size)
        self.z_table = BitTable(num_qubits, self.batch_size)
        for row in self.z_table.rows:
            row.bits = random_bits(rng, self.batch_size)
        self.flip_rows: list[BitBuffer] = []

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.num_qubits:
            raise ValueError(f"qubit {q} out of range [0, {self.num_qubits})")

    def apply_gate(self, gate: GateData | str, targets) -> None:
        """Conjugate every frame through the gate, broadcasting over targets."""
        if isinstance(gate, str):
            gate = get_gate(gate)
        if gate.kind != UNITARY:
            raise ValueError(f"{gate.name} is not a unitary gate")
        targets = tuple(targets)
        if not targets or len(targets) % gate.arity:
            raise ValueError(f"{gate.name} needs a multiple of {gate.arity} targets")
        for t in targets:
            self._check_qubit(t)
        plan = gate.frame_plan
        if not plan:
            return  # Pauli gates and the identity leave frames unchanged
        a = gate.arity
        for i in range(0, len(targets), a):
            self._apply_plan(plan, targets[i:i + a])

    def _apply_plan(self, plan, targets) -> None:
        planes = (self.x_table.rows, self.z_table.rows)
        olds = (tuple(planes[0][t].bits for t in targets),
                tuple(planes[1][t].bits for t in targets))
        for dst_plane, dst_slot, sources in plan:
            acc = 0
            for src_plane, src_slot in sources:
                acc ^= olds[src_plane][src_slot]
            planes[dst_plane][targets[dst_slot]].bits = acc

    def measure(self, q: int) -> BitBuffer:
        """Record and return the flip row for a Z measurement of q."""
        self._check_qubit(q)
        flips = self.x_table.rows[q].copy()
        self.flip_rows.append(flips)
        self.z_table.rows[q].bits ^= random_bits(self.rng, self.batch_size)
        return flips

    def reset(self, q: int) -> None:
        self._check_qubit(q)
        self.x_table.rows[q].bits = 0
        self.z_table.rows[q].bits = random_bits(self.rng, self.batch_size)

    def measure_reset(self, q: int) -> BitBuffer:
        flips = self.measure(q)
        self.reset(q)
        return flips

    def apply_noise(self, gate: GateData | str, p: float, targets) -> None:
        """Sample the channel over every (application, frame) pair and fold
        the sampled Paulis into the frames.

        Bernoulli trials for the whole instruction share one index space of
        len(applications) * batch_size trials, gap-sampled when p is small.
        """
        if isinstance(gate, str):
            gate = get_gate(gate)
        if gate.kind != NOISE:
            raise ValueError(f"{gate.name} is not a noise channel")
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"noise probability must be in [0, 1], got {p}")
        targets = tuple(targets)
        if not targets or len(targets) % gate.arity:
            raise ValueError(f"{gate.name} needs a multiple of {gate.arity} targets")
        for t in targets:
            self._check_qubit(t)
        if p == 0.0:
            return
        arity = gate.arity
        apps = [targets[i:i + arity] for i in range(0, len(targets), arity)]
        patterns = gate.noise_patterns
        batch = self.batch_size
        if len(patterns) == 1:
            self._apply_single_pattern_noise(patterns[0], p, apps)
        else:
            total = len(apps) * batch
            if p < GEOMETRIC_CUTOFF:
                hits = sample_hits_geometric(total, p, self.rng)
            else:
                hits = np.flatnonzero(bernoulli_bools(total, p, self.rng))
            if hits.size == 0:
                return
            picks = self.rng.integers(0, len(patterns), size=hits.size)
            x_rows = self.x_table.rows
            z_rows = self.z_table.rows
            for idx, pick in zip(hits.tolist(), picks.tolist()):
                app = apps[idx // batch]
                frame_bit = 1 << (idx % batch)
                x_mask, z_mask = patterns[pick]
                for slot, t in enumerate(app):
                    if (x_mask >> slot) & 1:
                        x_rows[t].bits ^= frame_bit
                    if (z_mask >> slot) & 1:
                        z_rows[t].bits ^= frame_bit

    def _apply_single_pattern_noise(self, pattern, p, apps) -> None:
        x_mask, z_mask = pattern
        batch = self.batch_size
        x_rows = self.x_table.rows
        z_rows = self.z_table.rows
        if p < GEOMETRIC_CUTOFF:
            hits = sample_hits_geometric(len(apps) * batch, p, self.rng)
            for idx in hits.tolist():
                app = apps[idx // batch]
                frame_bit = 1 << (idx % batch)
                for slot, t in enumerate(app):
                    if (x_mask >> slot) & 1:
                        x_rows[t].bits ^= frame_bit
                    if (z_mask >> slot) & 1:
                        z_rows[t].bits ^= frame_bit
            return
        # dense case: one packed mask row per application
        bools = bernoulli_bools(len(apps) * batch, p, self.rng)
        packed = np.packbits(bools.reshape(len(apps), batch), axis=1,
                             bitorder="little")
        for i, app in enumerate(apps):
            mask = int.from_bytes(packed[i].tobytes(), "little")
            if not mask:
                continue
            for slot, t in enumerate(app):
                if (x_mask >> slot) & 1:
                    x_rows[t].bits ^= mask
                if (z_mask >> slot) & 1:
                    z_rows[t].bits ^= mask


def compile_frame_program(circuit: Circuit):
    """Instruction stream specialized for frame propagation."""
    program = []
    for instr in iter_flat(circuit):
        gate = instr.gate
        if gate.kind == UNITARY:
            plan = gate.frame_plan
            if not plan:
                continue
            a = gate.arity
            apps = tuple(instr.targets[i:i + a]
                         for i in range(0, len(instr.targets), a))
            program.append((0, plan, apps))
        elif gate.kind == COLLAPSING:
            code = 3 if (gate.records and gate.resets) else (1 if gate.records else 2)
            for q in instr.targets:
                program.append((code, q))
        elif gate.kind == NOISE:
            program.append((4, gate, instr.param, instr.targets))
    return program


def _run_batch(batch: FrameBatch, program) -> None:
    for op in program:
        kind = op[0]
        if kind == 0:
            for app in op[2]:
                batch._apply_plan(op[1], app)
        elif kind == 1:
            batch.measure(op[1])
        elif kind == 2:
            batch.reset(op[1])
        elif kind == 3:
            batch.measure_reset(op[1])
        else:
            batch.apply_noise(op[1], op[2], op[3])


def collect_flips(circuit: Circuit, num_shots: int, rng: np.random.Generator,
                  batch_size: int = DEFAULT_BATCH) -> SampleTable:
    """Measurement-flip table for num_shots independent runs (shots-major)."""
    if num_shots < 1:
        raise ValueError("num_shots must be >= 1")
    program = compile_frame_program(circuit)
    num_measurements = circuit.num_measurements
    rows: list[BitBuffer] = []
    remaining = num_shots
    num_batches = -(-num_shots // padded_bits(batch_size))
    for child in rng.spawn(max(num_batches, 1)):
        batch = FrameBatch(circuit.num_qubits, batch_size, child)
        _run_batch(batch, program)
        flip_table = BitTable(len(batch.flip_rows), batch.batch_size,
                              batch.flip_rows)
        shot_major = _transpose_flips(flip_table, num_measurements)
        take = min(remaining, batch.batch_size)
        rows.extend(shot_major[:take])
        remaining -= take
        if remaining == 0:
            break
    return SampleTable.from_rows(rows, num_measurements)


def _transpose_flips(flip_table: BitTable, num_measurements: int) -> list[BitBuffer]:
    from .bitvec import transposed

    if flip_table.num_major == 0:
        return [BitBuffer(0) for _ in range(flip_table.num_minor)]
    turned = transposed(flip_table)
    assert turned.num_minor == num_measurements
    return turned.rows


def sample_batch(circuit: Circuit, reference, num_shots: int,
                 rng: np.random.Generator,
                 batch_size: int = DEFAULT_BATCH) -> SampleTable:
    """Sample the noisy circuit by xoring frame flips against a reference."""
    reference = list(reference)
    if len(reference) != circuit.num_measurements:
        raise ValueError(
            f"reference has {len(reference)} bits, circuit measures "
            f"{circuit.num_measurements}")
    flips = collect_flips(circuit, num_shots, rng, batch_size)
    ref_bits = 0
    for i, bit in enumerate(reference):
        if bit:
            ref_bits |= 1 << i
    for row in flips.bits.rows:
        row.bits ^= ref_bits
    return flips
