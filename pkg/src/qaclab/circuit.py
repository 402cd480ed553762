"""Layered circuits built from product-state reflections and free single-qubit gates.

Qubit ordering is little-endian everywhere: qubit ``q`` is bit ``q`` of the
basis-state index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

ATOL_NORM = 1e-12

PRIMITIVE_TAGS = ("fanout", "parity", "exact", "threshold", "cnot", "cz")
_QAC_LEGAL_PRIMITIVES = ("cnot", "cz")


class CircuitError(ValueError):
    """Raised for malformed circuits, states or gate parameters."""


@dataclass(frozen=True)
class SingleQubitState:
    amplitude0: complex
    amplitude1: complex

    def __post_init__(self):
        norm = abs(self.amplitude0) ** 2 + abs(self.amplitude1) ** 2
        if abs(norm - 1.0) > ATOL_NORM:
            raise CircuitError(f"single-qubit state not normalized (norm^2={norm!r})")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amplitude0, self.amplitude1], dtype=complex)

    @classmethod
    def from_vector(cls, v) -> "SingleQubitState":
        v = np.asarray(v, dtype=complex).ravel()
        return cls(complex(v[0]), complex(v[1]))


def eps_state(eps: float) -> SingleQubitState:
    """The state sqrt(eps)|1> + sqrt(1-eps)|0>."""
    if not 0.0 <= eps <= 1.0:
        raise CircuitError(f"eps must lie in [0, 1], got {eps}")
    return SingleQubitState(complex(math.sqrt(1.0 - eps)), complex(math.sqrt(eps)))


def eps_minus_state(eps: float) -> SingleQubitState:
    """sqrt(1-eps)|0> - sqrt(eps)|1>, orthogonal to ``eps_state(eps)``."""
    if not 0.0 <= eps <= 1.0:
        raise CircuitError(f"eps must lie in [0, 1], got {eps}")
    return SingleQubitState(complex(math.sqrt(1.0 - eps)), complex(-math.sqrt(eps)))


ZERO = SingleQubitState(1.0, 0.0)
ONE = SingleQubitState(0.0, 1.0)
PLUS = SingleQubitState(1 / math.sqrt(2), 1 / math.sqrt(2))
MINUS = SingleQubitState(1 / math.sqrt(2), -1 / math.sqrt(2))


@dataclass(frozen=True)
class SingleQubitUnitary:
    """2x2 unitary stored row-major as four complex entries."""

    entries: tuple[complex, complex, complex, complex]

    def __post_init__(self):
        m = self.matrix
        if not np.allclose(m @ m.conj().T, np.eye(2), atol=ATOL_NORM, rtol=0):
            raise CircuitError("single-qubit matrix is not unitary")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex).reshape(2, 2)

    @classmethod
    def from_matrix(cls, m) -> "SingleQubitUnitary":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise CircuitError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(tuple(complex(z) for z in m.ravel()))

    def dagger(self) -> "SingleQubitUnitary":
        return SingleQubitUnitary.from_matrix(self.matrix.conj().T)


_S2 = 1 / math.sqrt(2)
H = SingleQubitUnitary.from_matrix([[_S2, _S2], [_S2, -_S2]])
X = SingleQubitUnitary.from_matrix([[0, 1], [1, 0]])
Z = SingleQubitUnitary.from_matrix([[1, 0], [0, -1]])
MINUS_I = SingleQubitUnitary.from_matrix([[-1, 0], [0, -1]])


def rot_gamma(gamma: float) -> SingleQubitUnitary:
    """[[sqrt(g), sqrt(1-g)], [sqrt(1-g), -sqrt(g)]]; a reflection for every g."""
    if not 0.0 <= gamma <= 1.0:
        raise CircuitError(f"gamma must lie in [0, 1], got {gamma}")
    a, b = math.sqrt(gamma), math.sqrt(1.0 - gamma)
    return SingleQubitUnitary.from_matrix([[a, b], [b, -a]])


def rot_gamma_axis(gamma: float) -> SingleQubitState:
    """The -1 eigenvector v of Rot_gamma, so that Rot_gamma = I - 2|v><v|."""
    if not 0.0 <= gamma <= 1.0:
        raise CircuitError(f"gamma must lie in [0, 1], got {gamma}")
    g = math.sqrt(gamma)
    return SingleQubitState(complex(math.sqrt((1 - g) / 2)), complex(-math.sqrt((1 + g) / 2)))


def ry(beta: float) -> SingleQubitUnitary:
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    return SingleQubitUnitary.from_matrix([[c, -s], [s, c]])


def state_prep_unitary(alpha: complex, beta: complex) -> SingleQubitUnitary:
    """A unitary mapping |0> to alpha|0> + beta|1>."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise CircuitError(f"|alpha|^2 + |beta|^2 must be 1, got {norm}")
    alpha, beta = complex(alpha), complex(beta)
    return SingleQubitUnitary.from_matrix(
        [[alpha, -beta.conjugate()], [beta, alpha.conjugate()]]
    )


# ---------------------------------------------------------------- gates


@dataclass(frozen=True)
class Gate:
    """One gate. ``kind`` is ``product_reflection``, ``single_qubit`` or ``primitive``.

    Primitive qubit conventions:
      * ``cnot``/``cz``: (control, target) / (a, b)
      * ``fanout``: (control, *targets)
      * ``parity``, ``exact``, ``threshold``: (*controls, target); ``param`` is the
        weight w for exact (flip iff weight == w) and threshold (flip iff weight >= w)
    """

    kind: str
    qubits: tuple[int, ...]
    states: tuple[SingleQubitState, ...] | None = None
    unitary: SingleQubitUnitary | None = None
    tag: str | None = None
    param: int | None = None

    @property
    def is_multi_qubit(self) -> bool:
        return self.kind != "single_qubit"

    @property
    def is_qac_legal(self) -> bool:
        if self.kind != "primitive":
            return True
        return self.tag in _QAC_LEGAL_PRIMITIVES

    def dagger(self) -> "Gate":
        if self.kind == "single_qubit":
            return Gate("single_qubit", self.qubits, unitary=self.unitary.dagger())
        # reflections and every listed primitive are involutions
        return self

    def relabel(self, qubit_map: Mapping[int, int] | Sequence[int]) -> "Gate":
        return Gate(
            self.kind,
            tuple(qubit_map[q] for q in self.qubits),
            self.states,
            self.unitary,
            self.tag,
            self.param,
        )

    def problems(self) -> list[str]:
        out = []
        if len(set(self.qubits)) != len(self.qubits):
            out.append("repeated qubit index")
        if any(q < 0 for q in self.qubits):
            out.append("negative qubit index")
        if self.kind == "product_reflection":
            if self.states is None or len(self.states) != len(self.qubits):
                out.append("payload arity")
        elif self.kind == "single_qubit":
            if len(self.qubits) != 1:
                out.append("single-qubit gate on more than one qubit")
            if self.unitary is None:
                out.append("missing unitary")
        elif self.kind == "primitive":
            if self.tag not in PRIMITIVE_TAGS:
                out.append(f"unknown primitive tag {self.tag!r}")
            elif self.tag in ("cnot", "cz") and len(self.qubits) != 2:
                out.append(f"{self.tag} needs exactly two qubits")
            elif len(self.qubits) < 2:
                out.append(f"{self.tag} needs at least two qubits")
            elif self.tag in ("exact", "threshold") and self.param is None:
                out.append(f"{self.tag} needs a weight parameter")
        else:
            out.append(f"unknown gate kind {self.kind!r}")
        return out


def reflection(qubits: Sequence[int], states: Sequence[SingleQubitState]) -> Gate:
    """The gate I - 2|theta><theta| for the product state theta on ``qubits``."""
    return Gate("product_reflection", tuple(qubits), states=tuple(states))


def u1(qubit: int, unitary: SingleQubitUnitary) -> Gate:
    return Gate("single_qubit", (qubit,), unitary=unitary)


def primitive(tag: str, qubits: Sequence[int], param: int | None = None) -> Gate:
    return Gate("primitive", tuple(qubits), tag=tag, param=param)


def cnot(control: int, target: int) -> Gate:
    return primitive("cnot", (control, target))


def cz(a: int, b: int) -> Gate:
    return primitive("cz", (a, b))


def exact_gate(controls: Sequence[int], target: int, weight: int) -> Gate:
    return primitive("exact", (*controls, target), weight)


def threshold_gate(controls: Sequence[int], target: int, weight: int) -> Gate:
    return primitive("threshold", (*controls, target), weight)


def parity_gate(controls: Sequence[int], target: int) -> Gate:
    return primitive("parity", (*controls, target))


def fanout_gate(control: int, targets: Sequence[int]) -> Gate:
    return primitive("fanout", (control, *targets))


# ---------------------------------------------------------------- circuits

Layer = tuple[Gate, ...]


@dataclass(frozen=True)
class Circuit:
    n_inputs: int
    n_ancilla: int
    output: int | None = None
    layers: tuple[Layer, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))

    @property
    def n_qubits(self) -> int:
        return self.n_inputs + self.n_ancilla

    def gates(self) -> Iterable[Gate]:
        for layer in self.layers:
            yield from layer

    def depth(self) -> int:
        return sum(1 for layer in self.layers if any(g.is_multi_qubit for g in layer))

    def size(self) -> int:
        return sum(1 for g in self.gates() if g.is_multi_qubit)

    @property
    def is_qac_legal(self) -> bool:
        return all(g.is_qac_legal for g in self.gates())

    def with_output(self, output: int | None) -> "Circuit":
        return Circuit(self.n_inputs, self.n_ancilla, output, self.layers)


def validate(circuit: Circuit) -> list[str]:
    """Return every invariant violation as a located message; empty means valid."""
    problems = []
    n = circuit.n_qubits
    if circuit.n_inputs < 0 or circuit.n_ancilla < 0:
        problems.append("negative register size")
    if circuit.output is not None and not 0 <= circuit.output < n:
        problems.append(f"output register {circuit.output} out of range")
    for li, layer in enumerate(circuit.layers):
        used: set[int] = set()
        for gi, gate in enumerate(layer):
            where = f"layer {li}, gate {gi}"
            for p in gate.problems():
                problems.append(f"{where}: {p}")
            for q in gate.qubits:
                if q >= n:
                    problems.append(f"{where}: qubit {q} out of range (n={n})")
            if gate.is_multi_qubit:
                reused = used.intersection(gate.qubits)
                if reused:
                    problems.append(f"{where}: qubit reuse in layer {sorted(reused)}")
                used.update(gate.qubits)
    return problems


def check(circuit: Circuit) -> Circuit:
    problems = validate(circuit)
    if problems:
        raise CircuitError("invalid circuit: " + "; ".join(problems))
    return circuit


def dagger(circuit: Circuit) -> Circuit:
    check(circuit)
    layers = tuple(tuple(g.dagger() for g in reversed(layer)) for layer in reversed(circuit.layers))
    return Circuit(circuit.n_inputs, circuit.n_ancilla, circuit.output, layers)


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Run ``a`` then ``b`` on the same register; output taken from ``b`` if set."""
    if (a.n_inputs, a.n_ancilla) != (b.n_inputs, b.n_ancilla):
        raise CircuitError(
            f"register mismatch: ({a.n_inputs}, {a.n_ancilla}) vs ({b.n_inputs}, {b.n_ancilla})"
        )
    output = b.output if b.output is not None else a.output
    return Circuit(a.n_inputs, a.n_ancilla, output, a.layers + b.layers)


def embed(
    c: Circuit,
    qubit_map: Sequence[int] | Mapping[int, int],
    n_inputs: int | None = None,
    n_ancilla: int | None = None,
) -> Circuit:
    """Relabel qubit q of ``c`` to ``qubit_map[q]`` inside a (possibly larger) register."""
    targets = [qubit_map[q] for q in range(c.n_qubits)]
    if len(set(targets)) != len(targets):
        raise CircuitError("qubit map is not injective")
    n_inputs = c.n_inputs if n_inputs is None else n_inputs
    n_ancilla = c.n_ancilla if n_ancilla is None else n_ancilla
    if targets and max(targets) >= n_inputs + n_ancilla:
        raise CircuitError("qubit map leaves the target register")
    output = None if c.output is None else qubit_map[c.output]
    layers = tuple(tuple(g.relabel(qubit_map) for g in layer) for layer in c.layers)
    return Circuit(n_inputs, n_ancilla, output, layers)


class CircuitBuilder:
    """Accumulates layers on a fixed register.

    ``layer`` appends one explicit layer; ``extend`` appends a whole sub-circuit
    relabelled through ``qubits`` (position i of the sub-circuit goes to
    ``qubits[i]``).
    """

    def __init__(self, n_inputs: int, n_ancilla: int, output: int | None = None):
        self.n_inputs = n_inputs
        self.n_ancilla = n_ancilla
        self.output = output
        self.layers: list[Layer] = []

    @property
    def n_qubits(self) -> int:
        return self.n_inputs + self.n_ancilla

    def layer(self, *gates: Gate) -> "CircuitBuilder":
        if gates:
            self.layers.append(tuple(gates))
        return self

    def extend(self, sub: Circuit, qubits: Sequence[int] | None = None) -> "CircuitBuilder":
        if qubits is None:
            qubits = range(sub.n_qubits)
        qubits = list(qubits)
        if len(qubits) != sub.n_qubits:
            raise CircuitError(f"need {sub.n_qubits} target qubits, got {len(qubits)}")
        moved = embed(sub, qubits, self.n_inputs, self.n_ancilla)
        self.layers.extend(moved.layers)
        return self

    def build(self) -> Circuit:
        return check(Circuit(self.n_inputs, self.n_ancilla, self.output, tuple(self.layers)))


# ---------------------------------------------------------------- gate library


def nor_gate(controls: Sequence[int], target: int) -> Gate:
    """I - 2|0..0><0..0| (x) |-><-|: flips ``target`` iff every control is 0."""
    _disjoint(controls, target)
    return reflection((*controls, target), [ZERO] * len(controls) + [MINUS])


def or_gate(controls: Sequence[int], target: int) -> Layer:
    """Flips ``target`` iff some control is 1: the NOR reflection followed by X on the target."""
    return (nor_gate(controls, target), u1(target, X))


def and_gate(controls: Sequence[int], target: int) -> Gate:
    _disjoint(controls, target)
    return reflection((*controls, target), [ONE] * len(controls) + [MINUS])


def cz_layer(xs: Sequence[int], ts: Sequence[int]) -> Layer:
    if len(xs) != len(ts):
        raise CircuitError("cz_layer needs equally many x and t qubits")
    return tuple(cz(x, t) for x, t in zip(xs, ts))


def rot_gamma_gate(qubit: int, gamma: float) -> Gate:
    return u1(qubit, rot_gamma(gamma))


def controlled_rot(controls: Sequence[int], target: int, gamma: float) -> Gate:
    """Rot_gamma on ``target`` when all controls are 1, as a single product reflection."""
    _disjoint(controls, target)
    return reflection((*controls, target), [ONE] * len(controls) + [rot_gamma_axis(gamma)])


def _disjoint(controls: Sequence[int], target: int) -> None:
    if target in controls or len(set(controls)) != len(controls):
        raise CircuitError("controls and target must be distinct")


# ---------------------------------------------------------------- JSON format

_GATE_KEYS = {
    "reflection": {"kind", "qubits", "state"},
    "u1": {"kind", "qubits", "matrix"},
    "primitive": {"kind", "qubits", "tag", "param"},
}
_TOP_KEYS = {"n_inputs", "n_ancilla", "output", "layers"}


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _unpair(p) -> complex:
    if not (isinstance(p, list) and len(p) == 2 and all(isinstance(v, (int, float)) for v in p)):
        raise CircuitError(f"expected [re, im] pair, got {p!r}")
    return complex(p[0], p[1])


def gate_to_dict(g: Gate) -> dict:
    if g.kind == "product_reflection":
        return {
            "kind": "reflection",
            "qubits": list(g.qubits),
            "state": [[_pair(s.amplitude0), _pair(s.amplitude1)] for s in g.states],
        }
    if g.kind == "single_qubit":
        m = g.unitary.matrix
        return {"kind": "u1", "qubits": list(g.qubits), "matrix": [[_pair(z) for z in row] for row in m]}
    return {"kind": "primitive", "qubits": list(g.qubits), "tag": g.tag, "param": g.param}


def gate_from_dict(d: dict) -> Gate:
    if not isinstance(d, dict) or d.get("kind") not in _GATE_KEYS:
        raise CircuitError(f"bad gate object {d!r}")
    kind = d["kind"]
    allowed = _GATE_KEYS[kind]
    extra = set(d) - allowed
    if extra:
        raise CircuitError(f"unknown gate keys {sorted(extra)}")
    required = allowed - {"param"}
    missing = required - set(d)
    if missing:
        raise CircuitError(f"missing gate keys {sorted(missing)}")
    qubits = d["qubits"]
    if not (isinstance(qubits, list) and all(isinstance(q, int) and not isinstance(q, bool) for q in qubits)):
        raise CircuitError("qubits must be a list of integers")
    if kind == "reflection":
        states = [SingleQubitState(_unpair(a), _unpair(b)) for a, b in d["state"]]
        return reflection(qubits, states)
    if kind == "u1":
        rows = d["matrix"]
        m = [[_unpair(z) for z in row] for row in rows]
        if len(qubits) != 1:
            raise CircuitError("u1 gate acts on exactly one qubit")
        return u1(qubits[0], SingleQubitUnitary.from_matrix(m))
    param = d.get("param")
    if param is not None and not isinstance(param, int):
        raise CircuitError("primitive param must be an integer or null")
    return primitive(d["tag"], qubits, param)


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "n_inputs": c.n_inputs,
        "n_ancilla": c.n_ancilla,
        "output": c.output,
        "layers": [[gate_to_dict(g) for g in layer] for layer in c.layers],
    }


def circuit_from_dict(d: dict) -> Circuit:
    if not isinstance(d, dict):
        raise CircuitError("circuit file must hold a JSON object")
    extra = set(d) - _TOP_KEYS
    if extra:
        raise CircuitError(f"unknown top-level keys {sorted(extra)}")
    missing = _TOP_KEYS - set(d)
    if missing:
        raise CircuitError(f"missing top-level keys {sorted(missing)}")
    layers = tuple(tuple(gate_from_dict(g) for g in layer) for layer in d["layers"])
    return check(Circuit(int(d["n_inputs"]), int(d["n_ancilla"]), d["output"], layers))


def dumps(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c), indent=1)


def loads(text: str) -> Circuit:
    return circuit_from_dict(json.loads(text))

