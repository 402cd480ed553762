"""Dense statevector and density-matrix simulation.

Amplitude arrays are flat, length ``2**n`` (optionally with a trailing batch
axis), indexed little-endian: basis index ``i`` has qubit ``q`` equal to
``(i >> q) & 1``. Internally the kernels view the array as a tensor of shape
``(2,) * n + (batch,)`` in which qubit ``q`` lives on axis ``n - 1 - q``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitError, Gate, SingleQubitState, check

MAX_QUBITS = 26


class SimulationError(ValueError):
    pass


def qubit_cap() -> int:
    """The active qubit cap; ``QACLAB_QUBIT_CAP`` may only lower it."""
    raw = os.environ.get("QACLAB_QUBIT_CAP")
    if raw is None:
        return MAX_QUBITS
    try:
        cap = int(raw)
    except ValueError:
        raise SimulationError(f"QACLAB_QUBIT_CAP must be an integer, got {raw!r}") from None
    return max(0, min(cap, MAX_QUBITS))


def require_cap(n_qubits: int) -> None:
    cap = qubit_cap()
    if n_qubits > cap:
        raise SimulationError(f"{n_qubits} qubits exceeds the cap of {cap}")


@dataclass
class Statevector:
    """Amplitudes of an ``n_qubits`` register. ``normalized=False`` marks residues."""

    n_qubits: int
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise SimulationError(
                f"expected {2**self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )
        if self.normalized and abs(self.norm() - 1.0) > 1e-10:
            raise SimulationError(f"state not normalized (norm={self.norm()!r})")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density_matrix(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(self.n_qubits, np.outer(a, a.conj()))

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "Statevector":
        a = np.zeros(2**n_qubits, dtype=complex)
        a[index] = 1.0
        return cls(n_qubits, a)

    @classmethod
    def product(cls, states: Sequence[SingleQubitState]) -> "Statevector":
        """Product state with ``states[q]`` on qubit q."""
        vecs = [s.vector for s in reversed(states)]
        return cls(len(states), reduce(np.kron, vecs, np.ones(1, dtype=complex)))


@dataclass
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        dim = 2**self.n_qubits
        if self.entries.shape != (dim, dim):
            raise SimulationError(f"expected a {dim}x{dim} matrix, got {self.entries.shape}")

    def validate(self, atol: float = 1e-10) -> list[str]:
        rho = self.entries
        out = []
        if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
            out.append("not Hermitian")
        if abs(np.trace(rho) - 1.0) > atol:
            out.append(f"trace {np.trace(rho).real:.3g} != 1")
        if out:
            return out
        if np.linalg.eigvalsh(rho).min() < -1e-9:
            out.append("negative eigenvalue")
        return out

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, Statevector):
        return state.density_matrix()
    raise TypeError(f"expected Statevector or DensityMatrix, got {type(state).__name__}")


# ---------------------------------------------------------------- kernels


def _tensor(amps: np.ndarray, n: int) -> np.ndarray:
    return amps.reshape((2,) * n + (-1,))


def _axes(qubits: Sequence[int], n: int) -> list[int]:
    return [n - 1 - q for q in qubits]


def apply_single(amps: np.ndarray, n: int, qubit: int, matrix: np.ndarray) -> np.ndarray:
    t = _tensor(amps, n)
    ax = n - 1 - qubit
    t = np.tensordot(matrix, t, axes=([1], [ax]))
    t = np.moveaxis(t, 0, ax)
    return t.reshape(amps.shape)


def apply_reflection(
    amps: np.ndarray, n: int, qubits: Sequence[int], states: Sequence[SingleQubitState]
) -> np.ndarray:
    """psi <- psi - 2 |theta> (<theta|_S psi), one contraction per gate."""
    k = len(qubits)
    t = np.moveaxis(_tensor(amps, n), _axes(qubits, n), range(k))
    shape = t.shape
    flat = t.reshape(2**k, -1)
    theta = reduce(np.kron, [s.vector for s in states], np.ones(1, dtype=complex))
    overlap = theta.conj() @ flat
    flat = flat - 2.0 * np.outer(theta, overlap)
    t = np.moveaxis(flat.reshape(shape), range(k), _axes(qubits, n))
    return np.ascontiguousarray(t).reshape(amps.shape)


def _controlled_flip(amps: np.ndarray, n: int, controls: Sequence[int], target: int, fire) -> np.ndarray:
    """Flip ``target`` on every control pattern whose Hamming weight satisfies ``fire``."""
    k = len(controls)
    t = np.moveaxis(_tensor(amps, n), _axes([*controls, target], n), range(k + 1))
    shape = t.shape
    flat = t.reshape(2**k, 2, -1).copy()
    weights = np.array([bin(i).count("1") for i in range(2**k)])
    rows = np.nonzero(fire(weights))[0]
    flat[rows] = flat[rows][:, ::-1, :]
    t = np.moveaxis(flat.reshape(shape), range(k + 1), _axes([*controls, target], n))
    return np.ascontiguousarray(t).reshape(amps.shape)


def apply_gate(amps: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    if gate.kind == "single_qubit":
        return apply_single(amps, n, gate.qubits[0], gate.unitary.matrix)
    if gate.kind == "product_reflection":
        return apply_reflection(amps, n, gate.qubits, gate.states)
    tag, q = gate.tag, gate.qubits
    if tag == "cnot":
        return _controlled_flip(amps, n, q[:1], q[1], lambda w: w == 1)
    if tag == "cz":
        t = _tensor(amps, n).copy()
        idx = [slice(None)] * (n + 1)
        idx[n - 1 - q[0]] = 1
        idx[n - 1 - q[1]] = 1
        t[tuple(idx)] *= -1
        return t.reshape(amps.shape)
    if tag == "fanout":
        for target in q[1:]:
            amps = _controlled_flip(amps, n, q[:1], target, lambda w: w == 1)
        return amps
    if tag == "parity":
        return _controlled_flip(amps, n, q[:-1], q[-1], lambda w: w % 2 == 1)
    if tag == "exact":
        return _controlled_flip(amps, n, q[:-1], q[-1], lambda w: w == gate.param)
    if tag == "threshold":
        return _controlled_flip(amps, n, q[:-1], q[-1], lambda w: w >= gate.param)
    raise CircuitError(f"unknown primitive {tag!r}")


def evolve(circuit: Circuit, amps: np.ndarray) -> np.ndarray:
    """Apply every layer of ``circuit`` to ``amps`` (flat, or with a trailing batch axis)."""
    check(circuit)
    n = circuit.n_qubits
    require_cap(n)
    if amps.shape[0] != 2**n:
        raise SimulationError(f"state has {amps.shape[0]} amplitudes, circuit needs {2**n}")
    out = np.array(amps, dtype=complex)
    for layer in circuit.layers:
        for gate in layer:
            out = apply_gate(out, n, gate)
    return out


def input_index(circuit: Circuit, input_bits) -> int:
    """Basis index of |x>|0^m> for ``input_bits``.

    A string is read as a ket label (rightmost character is qubit 0); a sequence
    of ints gives qubit i the value ``input_bits[i]``; an int is the input index.
    """
    n = circuit.n_inputs
    if isinstance(input_bits, str):
        if len(input_bits) != n or set(input_bits) - {"0", "1"}:
            raise SimulationError(f"expected a {n}-character bit string, got {input_bits!r}")
        return int(input_bits, 2) if n else 0
    if isinstance(input_bits, (int, np.integer)):
        if not 0 <= input_bits < 2**n:
            raise SimulationError(f"input index {input_bits} out of range for {n} inputs")
        return int(input_bits)
    bits = list(input_bits)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise SimulationError(f"expected {n} input bits, got {bits!r}")
    return sum(b << i for i, b in enumerate(bits))


def run(circuit: Circuit, input_bits=0) -> Statevector:
    """C|x>|0^m>."""
    n = circuit.n_qubits
    require_cap(n)
    start = np.zeros(2**n, dtype=complex)
    start[input_index(circuit, input_bits)] = 1.0
    return Statevector(n, evolve(circuit, start))


def run_state(circuit: Circuit, state: Statevector) -> Statevector:
    if state.n_qubits != circuit.n_qubits:
        raise SimulationError("state and circuit sizes differ")
    return Statevector(state.n_qubits, evolve(circuit, state.amplitudes), state.normalized)


def run_all_inputs(circuit: Circuit) -> np.ndarray:
    """Matrix whose column x is C|x>|0^m>, for every input x at once."""
    n = circuit.n_qubits
    require_cap(n)
    k = circuit.n_inputs
    start = np.zeros((2**n, 2**k), dtype=complex)
    start[np.arange(2**k), np.arange(2**k)] = 1.0
    return evolve(circuit, start)


# ---------------------------------------------------------------- dense oracle


def gate_matrix(gate: Gate, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of ``gate`` built entry by entry (independent of the kernels)."""
    dim = 2**n
    if gate.kind == "single_qubit":
        u = gate.unitary.matrix
        mats = [u if q == gate.qubits[0] else np.eye(2) for q in reversed(range(n))]
        return reduce(np.kron, mats, np.ones((1, 1), dtype=complex))
    if gate.kind == "product_reflection":
        vecs = {q: s.vector for q, s in zip(gate.qubits, gate.states)}
        projs = [np.outer(vecs[q], vecs[q].conj()) if q in vecs else np.eye(2) for q in reversed(range(n))]
        return np.eye(dim) - 2 * reduce(np.kron, projs, np.ones((1, 1), dtype=complex))
    m = np.zeros((dim, dim), dtype=complex)
    q = gate.qubits
    for i in range(dim):
        bit = [(i >> j) & 1 for j in range(n)]
        j, sign = i, 1
        if gate.tag == "cz":
            sign = -1 if bit[q[0]] and bit[q[1]] else 1
        elif gate.tag in ("cnot", "fanout"):
            if bit[q[0]]:
                for tq in q[1:]:
                    j ^= 1 << tq
        else:
            w = sum(bit[c] for c in q[:-1])
            fire = {
                "parity": w % 2 == 1,
                "exact": w == gate.param,
                "threshold": gate.param is not None and w >= gate.param,
            }[gate.tag]
            if fire:
                j ^= 1 << q[-1]
        m[j, i] = sign
    return m


def dense_unitary(circuit: Circuit) -> np.ndarray:
    check(circuit)
    n = circuit.n_qubits
    if n > 12:
        raise SimulationError("dense oracle limited to 12 qubits")
    u = np.eye(2**n, dtype=complex)
    for layer in circuit.layers:
        for gate in layer:
            u = gate_matrix(gate, n) @ u
    return u


# ---------------------------------------------------------------- projections


def _check_subset(subset: Sequence[int], n: int) -> list[int]:
    subset = list(subset)
    if len(set(subset)) != len(subset):
        raise SimulationError("subset has repeated qubits")
    if any(not 0 <= q < n for q in subset):
        raise SimulationError(f"subset {subset} out of range for {n} qubits")
    return subset


def contract(psi: Statevector, bra: Sequence[SingleQubitState], qubits: Sequence[int]) -> Statevector:
    """The unnormalized residue <bra|_T psi on the complement of ``qubits`` (order preserved)."""
    n = psi.n_qubits
    qubits = _check_subset(qubits, n)
    if len(bra) != len(qubits):
        raise SimulationError("bra and qubit list differ in length")
    t = psi.amplitudes.reshape((2,) * n)
    k = len(qubits)
    t = np.moveaxis(t, _axes(qubits, n), range(k))
    theta = reduce(np.kron, [s.vector for s in bra], np.ones(1, dtype=complex))
    rest = theta.conj() @ t.reshape(2**k, -1)
    return Statevector(n - k, rest.reshape(-1), normalized=False)


def amplitude(psi: Statevector, bra: Sequence[SingleQubitState], qubits: Sequence[int] | None = None) -> complex:
    """<bra|psi> when ``bra`` covers every qubit (default order 0..n-1)."""
    if qubits is None:
        qubits = range(psi.n_qubits)
    qubits = list(qubits)
    if len(qubits) != psi.n_qubits:
        raise SimulationError("amplitude needs a bra on every qubit; use slice_norm or contract")
    return complex(contract(psi, bra, qubits).amplitudes[0])


def _subset_bits(n: int, qubits: Sequence[int]) -> np.ndarray:
    idx = np.arange(2**n)
    return np.stack([(idx >> q) & 1 for q in qubits]) if qubits else np.zeros((0, 2**n), dtype=int)


def slice_norm(psi: Statevector, spec: str, qubits: Sequence[int] | None = None, value=None) -> float:
    """Probability mass on basis states selected by ``spec`` on ``qubits``.

    ``spec`` is ``"bits"`` (``value`` a ket label or bit list over ``qubits``),
    ``"hamming_at_least"`` or ``"hamming_exact"`` (``value`` an integer weight).
    """
    n = psi.n_qubits
    qubits = _check_subset(range(n) if qubits is None else qubits, n)
    bits = _subset_bits(n, qubits)
    if spec == "bits":
        if isinstance(value, str):
            value = [int(c) for c in reversed(value)]
        value = np.asarray(list(value)).reshape(-1, 1)
        if value.shape[0] != len(qubits):
            raise SimulationError("bit pattern length differs from subset size")
        mask = np.all(bits == value, axis=0)
    elif spec in ("hamming_at_least", "hamming_exact"):
        weight = bits.sum(axis=0)
        mask = weight >= value if spec == "hamming_at_least" else weight == value
    else:
        raise SimulationError(f"unknown projector spec {spec!r}")
    return float(np.sum(psi.probabilities()[mask]))


def partial_trace(state, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep``; qubit keep[i] becomes qubit i of the result."""
    keep = list(keep)
    if not keep:
        raise SimulationError("keep set must be nonempty")
    if isinstance(state, Statevector):
        n = state.n_qubits
        keep = _check_subset(keep, n)
        drop = [q for q in range(n) if q not in keep]
        k = len(keep)
        # result qubit i sits on axis k-1-i
        order = _axes(list(reversed(keep)), n) + _axes(drop, n)
        t = np.transpose(state.amplitudes.reshape((2,) * n), order).reshape(2**k, -1)
        return DensityMatrix(k, t @ t.conj().T)
    rho = as_density(state)
    n = rho.n_qubits
    keep = _check_subset(keep, n)
    drop = [q for q in range(n) if q not in keep]
    k = len(keep)
    order = _axes(list(reversed(keep)), n) + _axes(drop, n)
    t = rho.entries.reshape((2,) * (2 * n))
    t = np.transpose(t, order + [n + a for a in order])
    t = t.reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
    return DensityMatrix(k, np.einsum("ajbj->ab", t))


def z_expectation(psi: Statevector, register: int) -> float:
    n = psi.n_qubits
    if not 0 <= register < n:
        raise SimulationError(f"register {register} out of range")
    probs = psi.probabilities()
    bit = (np.arange(2**n) >> register) & 1
    return float(np.sum(probs * (1 - 2 * bit)))


def fidelity(psi: Statevector, phi: Statevector) -> float:
    return float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)
