"""Dense state-vector oracle used to verify the stabilizer machinery.

Slow and exponential by design; nothing in the shipped simulators depends
on it.  It provides the EPR-pair duality check that a gate's tableau and
unitary describe the same conjugation (sign included), the disambiguating
identities for the square-root-of-Y convention, and exact output
distributions for small noisy circuits via record-indexed density matrices.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, iter_flat
from .gates import ANNOTATION, NOISE, UNITARY, GateData, get_gate
from .pauli import PauliString

PAULI_MATS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

ATOL = 1e-9


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of a signed Pauli string (qubit 0 is the top factor)."""
    m = np.array([[-1.0 + 0j if p.sign else 1.0 + 0j]])
    for q in range(p.num_qubits):
        m = np.kron(m, PAULI_MATS[p.get(q)])
    return m


def _apply_to_axes(tensor: np.ndarray, u: np.ndarray, axes) -> np.ndarray:
    """Contract `u` (2^k x 2^k) into the given tensor axes."""
    k = len(axes)
    u_t = u.reshape((2,) * (2 * k))
    out = np.tensordot(u_t, tensor, axes=(tuple(range(k, 2 * k)), tuple(axes)))
    return np.moveaxis(out, tuple(range(k)), tuple(axes))


class DenseState:
    """A complex amplitude vector over up to ~10 qubits; axis q is qubit q."""

    def __init__(self, num_qubits: int):
        if num_qubits > 12:
            raise ValueError("dense oracle is limited to small qubit counts")
        self.num_qubits = num_qubits
        self.amps = np.zeros((2,) * num_qubits, dtype=np.complex128)
        self.amps[(0,) * num_qubits] = 1.0

    def apply_unitary(self, u: np.ndarray, targets) -> None:
        self.amps = _apply_to_axes(self.amps, u, tuple(targets))

    def apply_gate(self, gate: GateData | str, targets) -> None:
        if isinstance(gate, str):
            gate = get_gate(gate)
        self.apply_unitary(gate.unitary, targets)

    def apply_pauli(self, p: PauliString, targets=None) -> None:
        if targets is None:
            targets = range(p.num_qubits)
        for slot, q in enumerate(targets):
            code = p.get(slot)
            if code:
                self.amps = _apply_to_axes(self.amps, PAULI_MATS[code], (q,))
        if p.sign:
            self.amps = -self.amps

    def vector(self) -> np.ndarray:
        return self.amps.reshape(-1)


def states_equal_with_phase(a: np.ndarray, b: np.ndarray, atol: float = ATOL) -> bool:
    """Exact equality including global phase."""
    return bool(np.allclose(a, b, atol=atol))


def matrices_equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = ATOL) -> bool:
    """Equality after aligning on the first non-negligible entry's phase."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        return False
    flat_a = a.reshape(-1)
    flat_b = b.reshape(-1)
    idx = int(np.argmax(np.abs(flat_a)))
    if abs(flat_a[idx]) < atol or abs(flat_b[idx]) < atol:
        return bool(np.allclose(a, b, atol=atol))
    return bool(np.allclose(a * (flat_b[idx] / flat_a[idx]), b, atol=atol))


def _epr_state(pairs: int) -> DenseState:
    """`pairs` EPR pairs; pair i spans qubits (i, pairs + i)."""
    state = DenseState(2 * pairs)
    state.amps = np.zeros((2,) * (2 * pairs), dtype=np.complex128)
    for bits in range(1 << pairs):
        index = tuple((bits >> i) & 1 for i in range(pairs)) * 2
        state.amps[index] = 2.0 ** (-pairs / 2)
    return state


def tableau_agrees_with_unitary(tableau, unitary: np.ndarray) -> bool:
    """Channel-state duality check of a tableau against a unitary.

    For each column, applying input Pauli, then the unitary, then the
    output Pauli to half of a maximally entangled state must reproduce the
    unitary acting alone, global phase included.
    """
    k = tableau.num_qubits
    subsystem = tuple(range(k))
    expected = _epr_state(k)
    expected.apply_unitary(unitary, subsystem)
    for input_kind in ("x", "z"):
        for q in range(k):
            inp = PauliString(k)
            inp.set(q, 1 if input_kind == "x" else 3)
            out = tableau.x_image(q) if input_kind == "x" else tableau.z_image(q)
            state = _epr_state(k)
            state.apply_pauli(inp, subsystem)
            state.apply_unitary(unitary, subsystem)
            state.apply_pauli(out, subsystem)
            if not states_equal_with_phase(state.vector(), expected.vector()):
                return False
    return True


def duality_check(gate: GateData) -> bool:
    """True iff the registry gate's tableau and unitary agree."""
    if gate.kind != UNITARY:
        raise ValueError(f"{gate.name} has no unitary to check")
    return tableau_agrees_with_unitary(gate.tableau, gate.unitary)


def identity_check_sqrt_y() -> bool:
    """Disambiguate the principal square root of Y.

    Requires sqrt(Y) == H_YZ sqrt(Z) H_YZ up to global phase, differing
    from its adjoint, and squaring to Y up to global phase.
    """
    sqrt_y = get_gate("SQRT_Y").unitary
    sqrt_y_dag = get_gate("SQRT_Y_DAG").unitary
    sqrt_z = get_gate("S").unitary
    h_yz = (PAULI_MATS[2] + PAULI_MATS[3]) / np.sqrt(2)
    composed = h_yz @ sqrt_z @ h_yz
    if not matrices_equal_up_to_phase(composed, sqrt_y):
        return False
    if matrices_equal_up_to_phase(sqrt_y, sqrt_y_dag):
        return False
    return matrices_equal_up_to_phase(sqrt_y @ sqrt_y, PAULI_MATS[2])


# ----------------------------------------------------------------------
# exact distributions for small circuits


def _embed(u: np.ndarray, targets, num_qubits: int) -> np.ndarray:
    """Expand an operator on `targets` to the full 2^n space."""
    dim = 1 << num_qubits
    eye = np.eye(dim, dtype=np.complex128).reshape((2,) * num_qubits + (dim,))
    out = _apply_to_axes(eye, u, tuple(targets))
    return out.reshape(dim, dim)


def _pattern_matrix(pattern, arity: int) -> np.ndarray:
    x_mask, z_mask = pattern
    m = np.array([[1.0 + 0j]])
    for slot in range(arity):
        x = (x_mask >> slot) & 1
        z = (z_mask >> slot) & 1
        code = (0, 1, 3, 2)[x + 2 * z]
        m = np.kron(m, PAULI_MATS[code])
    return m


def enumerate_distribution(circuit: Circuit, max_qubits: int = 5,
                           tol: float = 1e-12) -> dict[tuple[int, ...], float]:
    """Exact measurement-record distribution of a small noisy circuit.

    Evolves one unnormalized density matrix per record prefix; noise
    channels mix in place, measurements split records in two, resets
    project and repair.  Returns record tuple -> probability.
    """
    n = circuit.num_qubits
    if n > max_qubits:
        raise ValueError(f"circuit has {n} qubits, oracle limit is {max_qubits}")
    dim = 1 << n
    rho0 = np.zeros((dim, dim), dtype=np.complex128)
    rho0[0, 0] = 1.0
    branches: dict[tuple[int, ...], np.ndarray] = {(): rho0}

    projectors = {}
    flips = {}
    for q in range(n):
        p1 = _embed(np.diag([0.0, 1.0]).astype(np.complex128), (q,), n)
        p0 = _embed(np.diag([1.0, 0.0]).astype(np.complex128), (q,), n)
        projectors[q] = (p0, p1)
        flips[q] = _embed(PAULI_MATS[1], (q,), n)

    for instr in iter_flat(circuit):
        gate = instr.gate
        if gate.kind == ANNOTATION:
            continue
        if gate.kind == UNITARY:
            for i in range(0, len(instr.targets), gate.arity):
                u = _embed(gate.unitary, instr.targets[i:i + gate.arity], n)
                u_dag = u.conj().T
                branches = {r: u @ rho @ u_dag for r, rho in branches.items()}
        elif gate.kind == NOISE:
            p = instr.param
            mats = [_pattern_matrix(pat, gate.arity) for pat in gate.noise_patterns]
            share = p / len(mats)
            for i in range(0, len(instr.targets), gate.arity):
                targets = instr.targets[i:i + gate.arity]
                embedded = [_embed(m, targets, n) for m in mats]
                new = {}
                for r, rho in branches.items():
                    mixed = (1.0 - p) * rho
                    for e in embedded:
                        mixed = mixed + share * (e @ rho @ e.conj().T)
                    new[r] = mixed
                branches = new
        else:
            for q in instr.targets:
                p0, p1 = projectors[q]
                x_op = flips[q]
                new = {}
                for r, rho in branches.items():
                    rho_0 = p0 @ rho @ p0
                    rho_1 = p1 @ rho @ p1
                    if gate.resets:
                        rho_1 = x_op @ rho_1 @ x_op
                    if gate.records:
                        if np.trace(rho_0).real > tol:
                            new[r + (0,)] = rho_0
                        if np.trace(rho_1).real > tol:
                            new[r + (1,)] = rho_1
                    else:
                        new[r] = rho_0 + rho_1
                branches = new

    dist = {}
    for r, rho in branches.items():
        prob = float(np.trace(rho).real)
        if prob > tol:
            dist[r] = prob
    total = sum(dist.values())
    if abs(total - 1.0) > 1e-6:
        raise RuntimeError(f"probabilities sum to {total}, expected 1")
    return dist
