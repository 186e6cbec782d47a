"""The gate registry: one data record per supported operation.

Every piece of gate behavior either engine needs is derived from this
single table.  Unitary gates carry both a conjugation tableau and a dense
matrix, specified independently so the test suite can cross-check them;
the frame-update plans and inverse-folding plans both derive from the
tableau, and noise channels carry their Pauli pattern tables here so the
bulk sampler, the interactive simulator and the REPL all share one
definition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import tableau as tb
from .tableau import Tableau

UNITARY = "unitary"
COLLAPSING = "collapsing"
NOISE = "noise"
ANNOTATION = "annotation"

_SQ = 2 ** -0.5


@dataclass(eq=False)
class GateData:
    name: str
    kind: str
    arity: int  # targets per application; 0 means variable (annotations)
    parameter_count: int = 0
    x_images: tuple = ()
    z_images: tuple = ()
    matrix: tuple = ()
    noise_patterns: tuple = ()  # ((x_mask, z_mask), ...) over arity qubits
    records: bool = False  # collapsing gates: appends to the measurement record
    resets: bool = False  # collapsing gates: forces |0> afterwards
    aliases: tuple = ()

    @cached_property
    def tableau(self) -> Tableau:
        if self.kind != UNITARY:
            raise ValueError(f"{self.name} has no tableau")
        return Tableau.from_images(self.x_images, self.z_images)

    @cached_property
    def unitary(self) -> np.ndarray:
        if self.kind != UNITARY:
            raise ValueError(f"{self.name} has no unitary")
        return np.array(self.matrix, dtype=np.complex128)

    @cached_property
    def inverse_tableau(self) -> Tableau:
        return tb.inverse(self.tableau)

    @cached_property
    def fold_plan(self):
        """Prepend plan of the inverse tableau, used to fold this gate into
        an inverse-tracking simulation."""
        return tb.prepend_plan(self.inverse_tableau)

    @cached_property
    def append_lookup(self):
        return tb.append_lookup(self.tableau)

    @cached_property
    def frame_plan(self):
        """Bit-plane update rules for propagating Pauli frames through the gate.

        Entry (dst_plane, dst_slot, sources): the new x (plane 0) or z
        (plane 1) row of target slot dst_slot is the xor of the old rows
        named by sources.  Identity rows are omitted; signs are ignored
        because frames carry no global phase.
        """
        t = self.tableau
        m = t.num_qubits
        plan = []
        for dst_plane in (0, 1):
            for r in range(m):
                sources = []
                for src_plane, images_x, images_z in ((0, t.xx, t.xz), (1, t.zx, t.zz)):
                    for j in range(m):
                        bits = (images_x if dst_plane == 0 else images_z).rows[j].bits
                        if (bits >> r) & 1:
                            sources.append((src_plane, j))
                if sources != [(dst_plane, r)]:
                    plan.append((dst_plane, r, tuple(sources)))
        return tuple(plan)

    def __repr__(self):
        return f"GateData({self.name})"


def _depolarize2_patterns():
    pats = []
    for code in range(1, 16):
        x = (code & 1) | (((code >> 2) & 1) << 1)
        z = ((code >> 1) & 1) | (((code >> 3) & 1) << 1)
        pats.append((x, z))
    return tuple(pats)


GATES = (
    # --- unitary ---
    GateData("I", UNITARY, 1, x_images=("+X",), z_images=("+Z",),
             matrix=((1, 0), (0, 1))),
    GateData("X", UNITARY, 1, x_images=("+X",), z_images=("-Z",),
             matrix=((0, 1), (1, 0))),
    GateData("Y", UNITARY, 1, x_images=("-X",), z_images=("-Z",),
             matrix=((0, -1j), (1j, 0))),
    GateData("Z", UNITARY, 1, x_images=("-X",), z_images=("+Z",),
             matrix=((1, 0), (0, -1))),
    GateData("H", UNITARY, 1, x_images=("+Z",), z_images=("+X",),
             matrix=((_SQ, _SQ), (_SQ, -_SQ))),
    GateData("S", UNITARY, 1, x_images=("+Y",), z_images=("+Z",),
             matrix=((1, 0), (0, 1j))),
    GateData("S_DAG", UNITARY, 1, x_images=("-Y",), z_images=("+Z",),
             matrix=((1, 0), (0, -1j))),
    # The principal root is pinned by sqrt(Y) == H_YZ sqrt(Z) H_YZ; its
    # adjoint carries the conjugate matrix and the opposite column signs.
    GateData("SQRT_Y", UNITARY, 1, x_images=("-Z",), z_images=("+X",),
             matrix=(((1 + 1j) / 2, (-1 - 1j) / 2), ((1 + 1j) / 2, (1 + 1j) / 2))),
    GateData("SQRT_Y_DAG", UNITARY, 1, x_images=("+Z",), z_images=("-X",),
             matrix=(((1 - 1j) / 2, (1 - 1j) / 2), ((1j - 1) / 2, (1 - 1j) / 2))),
    GateData("CNOT", UNITARY, 2, aliases=("CX",),
             x_images=("+XX", "+_X"), z_images=("+Z_", "+ZZ"),
             matrix=((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0))),
    GateData("CY", UNITARY, 2,
             x_images=("+XY", "+ZX"), z_images=("+Z_", "+ZZ"),
             matrix=((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, -1j), (0, 0, 1j, 0))),
    GateData("CZ", UNITARY, 2,
             x_images=("+XZ", "+ZX"), z_images=("+Z_", "+_Z"),
             matrix=((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, -1))),
    GateData("SWAP", UNITARY, 2,
             x_images=("+_X", "+X_"), z_images=("+_Z", "+Z_"),
             matrix=((1, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 0), (0, 0, 0, 1))),
    # --- collapsing ---
    GateData("M", COLLAPSING, 1, records=True),
    GateData("R", COLLAPSING, 1, resets=True),
    GateData("MR", COLLAPSING, 1, records=True, resets=True),
    # --- noise ---
    GateData("X_ERROR", NOISE, 1, parameter_count=1, noise_patterns=((1, 0),)),
    GateData("Y_ERROR", NOISE, 1, parameter_count=1, noise_patterns=((1, 1),)),
    GateData("Z_ERROR", NOISE, 1, parameter_count=1, noise_patterns=((0, 1),)),
    GateData("DEPOLARIZE1", NOISE, 1, parameter_count=1,
             noise_patterns=((1, 0), (1, 1), (0, 1))),
    GateData("DEPOLARIZE2", NOISE, 2, parameter_count=1,
             noise_patterns=_depolarize2_patterns()),
    # --- annotation ---
    GateData("DETECTOR", ANNOTATION, 0),
)

GATE_MAP: dict[str, GateData] = {}
for _g in GATES:
    GATE_MAP[_g.name] = _g
    for _a in _g.aliases:
        GATE_MAP[_a] = _g


def get_gate(name: str) -> GateData:
    gate = GATE_MAP.get(name.upper())
    if gate is None:
        raise KeyError(f"unknown gate {name!r}")
    return gate
