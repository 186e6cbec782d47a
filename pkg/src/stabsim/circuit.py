"""Circuit text format: parsing, canonical printing, and flat iteration.

One instruction per line: a gate name, an optional parenthesized parameter,
and a whitespace-separated target list.  Gate names are case-insensitive.
Blank lines are allowed and `#` starts a comment.  `REPEAT N {` opens a
block closed by `}` on its own line; blocks nest.  DETECTOR targets are
measurement-record lookbacks written `rec[-k]`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .gates import ANNOTATION, NOISE, GATE_MAP, GateData


class CircuitParseError(ValueError):
    """Malformed circuit text; carries the 1-based source line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, eq=False)
class Instruction:
    gate: GateData
    param: float | None
    targets: tuple[int, ...]  # qubits, or negative lookbacks for DETECTOR
    line: int = 0  # source line, excluded from equality

    def __eq__(self, other):
        if not isinstance(other, Instruction):
            return NotImplemented
        return (self.gate is other.gate and self.param == other.param
                and self.targets == other.targets)

    def __hash__(self):
        return hash((self.gate.name, self.param, self.targets))

    def num_measurements(self) -> int:
        return len(self.targets) if self.gate.records else 0

    def __str__(self):
        name = self.gate.name
        if self.param is not None:
            name += f"({self.param!r})"
        if self.gate.kind == ANNOTATION:
            body = " ".join(f"rec[{t}]" for t in self.targets)
        else:
            body = " ".join(str(t) for t in self.targets)
        return f"{name} {body}" if body else name


@dataclass(frozen=True)
class Repeat:
    count: int
    body: "Circuit"

    def num_measurements(self) -> int:
        return self.count * self.body.num_measurements


class Circuit:
    """An ordered list of instructions and nested REPEAT blocks."""

    __slots__ = ("elements", "num_qubits", "num_measurements")

    def __init__(self, elements):
        self.elements = tuple(elements)
        self.num_qubits = self._max_qubit() + 1
        self.num_measurements = sum(e.num_measurements() for e in self.elements)

    def _max_qubit(self) -> int:
        best = -1
        for e in self.elements:
            if isinstance(e, Repeat):
                best = max(best, e.body._max_qubit())
            elif e.gate.kind != ANNOTATION:
                best = max(best, max(e.targets, default=-1))
        return best

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def __str__(self):
        return format_circuit(self)

    def __repr__(self):
        return (f"Circuit({len(self.elements)} elements, "
                f"{self.num_qubits} qubits, {self.num_measurements} measurements)")


def iter_flat(circuit: Circuit):
    """Stream instructions in execution order, expanding REPEAT blocks."""
    for e in circuit.elements:
        if isinstance(e, Repeat):
            for _ in range(e.count):
                yield from iter_flat(e.body)
        else:
            yield e


_INSTR_RE = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                       r"(?:\s*\(\s*(?P<param>[^)]*?)\s*\))?"
                       r"(?P<rest>(?:\s+\S+)*)\s*$")
_REPEAT_RE = re.compile(r"^REPEAT\s+(?P<count>\d+)\s*\{$", re.IGNORECASE)
_LOOKBACK_RE = re.compile(r"^rec\[(?P<k>-\d+)\]$", re.IGNORECASE)


def _parse_targets(gate: GateData, rest: str, line_no: int) -> tuple[int, ...]:
    tokens = rest.split()
    if gate.kind == ANNOTATION:
        if not tokens:
            raise CircuitParseError(f"{gate.name} needs at least one rec[-k] target",
                                    line_no)
        targets = []
        for tok in tokens:
            m = _LOOKBACK_RE.match(tok)
            if not m:
                raise CircuitParseError(
                    f"bad {gate.name} target {tok!r}, expected rec[-k]", line_no)
            k = int(m.group("k"))
            if k >= 0:
                raise CircuitParseError(f"lookback must be negative, got {k}", line_no)
            targets.append(k)
        return tuple(targets)
    targets = []
    for tok in tokens:
        if not tok.isdigit():
            raise CircuitParseError(f"bad target {tok!r}, expected a qubit index",
                                    line_no)
        targets.append(int(tok))
    if not targets or len(targets) % gate.arity != 0:
        raise CircuitParseError(
            f"{gate.name} needs a positive multiple of {gate.arity} targets, "
            f"got {len(targets)}", line_no)
    if gate.arity == 2:
        for i in range(0, len(targets), 2):
            if targets[i] == targets[i + 1]:
                raise CircuitParseError(
                    f"{gate.name} targets a qubit pair twice: {targets[i]}", line_no)
    return tuple(targets)


def _parse_instruction(line: str, line_no: int) -> Instruction:
    m = _INSTR_RE.match(line)
    if not m:
        raise CircuitParseError(f"unparseable instruction {line!r}", line_no)
    name = m.group("name").upper()
    gate = GATE_MAP.get(name)
    if gate is None:
        raise CircuitParseError(f"unknown gate {m.group('name')!r}", line_no)
    param_text = m.group("param")
    param = None
    if gate.parameter_count == 0:
        if param_text is not None:
            raise CircuitParseError(f"{gate.name} takes no parameter", line_no)
    else:
        if param_text is None:
            raise CircuitParseError(f"{gate.name} needs a parameter", line_no)
        try:
            param = float(param_text)
        except ValueError:
            raise CircuitParseError(f"bad parameter {param_text!r}", line_no) from None
        if gate.kind == NOISE and not 0.0 <= param <= 1.0:
            raise CircuitParseError(
                f"noise parameter must be in [0, 1], got {param}", line_no)
    targets = _parse_targets(gate, m.group("rest"), line_no)
    return Instruction(gate, param, targets, line_no)


def parse(text: str, prior_measurements: int = 0) -> Circuit:
    """Parse circuit text; raises CircuitParseError with a line number.

    `prior_measurements` widens the window DETECTOR lookbacks may reach,
    for callers feeding instructions incrementally.
    """
    stack = [[]]
    open_lines = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "}":
            if len(stack) == 1:
                raise CircuitParseError("unmatched '}'", line_no)
            body = stack.pop()
            stack[-1].append(Repeat(open_lines.pop(), Circuit(body)))
            continue
        rep = _REPEAT_RE.match(line)
        if rep:
            count = int(rep.group("count"))
            if count < 1:
                raise CircuitParseError("REPEAT count must be >= 1", line_no)
            open_lines.append(count)
            stack.append([])
            continue
        stack[-1].append(_parse_instruction(line, line_no))
    if len(stack) != 1:
        raise CircuitParseError("unclosed REPEAT block at end of input",
                                len(text.splitlines()))
    circuit = Circuit(stack[0])
    _validate_lookbacks(circuit, prior_measurements)
    return circuit


def _validate_lookbacks(circuit: Circuit, measured_before: int) -> int:
    """Check every DETECTOR resolves within the measurements available at its
    first execution; returns measurements produced by `circuit`."""
    count = measured_before
    for e in circuit.elements:
        if isinstance(e, Repeat):
            _validate_lookbacks(e.body, count)
            count += e.num_measurements()
        elif e.gate.kind == ANNOTATION:
            for k in e.targets:
                if -k > count:
                    raise CircuitParseError(
                        f"lookback rec[{k}] reaches before the first measurement",
                        e.line)
        else:
            count += e.num_measurements()
    return count


def format_circuit(circuit: Circuit, indent: int = 0) -> str:
    """Canonical text form; parsing it back reproduces the circuit."""
    pad = " " * indent
    lines = []
    for e in circuit.elements:
        if isinstance(e, Repeat):
            lines.append(f"{pad}REPEAT {e.count} {{")
            lines.append(format_circuit(e.body, indent + 4))
            lines.append(pad + "}")
        else:
            lines.append(pad + str(e))
    return "\n".join(lines)


def detector_sets(circuit: Circuit) -> list[tuple[int, ...]]:
    """Absolute measurement indices referenced by each DETECTOR, in order."""
    sets = []
    count = 0
    for instr in iter_flat(circuit):
        if instr.gate.kind == ANNOTATION:
            sets.append(tuple(count + k for k in instr.targets))
        else:
            count += instr.num_measurements()
    return sets
