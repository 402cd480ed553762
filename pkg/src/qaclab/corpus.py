"""Seeded random circuits and states.

Every generator draws from numpy's PCG64 bit generator seeded through a
``SeedSequence``, so a seed fixes the output on every platform.
"""
from __future__ import annotations

import numpy as np

from .circuit import (
    Circuit,
    CircuitBuilder,
    SingleQubitState,
    SingleQubitUnitary,
    reflection,
    u1,
)
from .sim import DensityMatrix, Statevector


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for ``seed``, optionally split along ``path`` (one child per index)."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))


def random_qubit_state(rng: np.random.Generator) -> SingleQubitState:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return SingleQubitState.from_vector(v / np.linalg.norm(v))


def random_unitary(rng: np.random.Generator) -> SingleQubitUnitary:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return SingleQubitUnitary.from_matrix(q * (d / np.abs(d)))


def _random_body(b: CircuitBuilder, rng: np.random.Generator, n_reflections: int) -> None:
    n = b.n_qubits
    for _ in range(n_reflections):
        b.layer(*[u1(q, random_unitary(rng)) for q in range(n) if rng.random() < 0.7])
        size = int(rng.integers(min(2, n), n + 1))
        qubits = sorted(rng.choice(n, size=size, replace=False).tolist())
        b.layer(reflection(qubits, [random_qubit_state(rng) for _ in qubits]))
    b.layer(*[u1(q, random_unitary(rng)) for q in range(n) if rng.random() < 0.7])


def random_prep_circuit(rng: np.random.Generator, min_qubits: int = 2, max_qubits: int = 5, max_gates: int = 3) -> Circuit:
    """State-preparation circuit: random U1 layers around at most ``max_gates`` reflections."""
    m = int(rng.integers(min_qubits, max_qubits + 1))
    b = CircuitBuilder(0, m)
    _random_body(b, rng, int(rng.integers(1, max_gates + 1)))
    return b.build()


def random_input_circuit(
    rng: np.random.Generator, min_inputs: int = 2, max_inputs: int = 3, max_ancilla: int = 2, max_gates: int = 3
) -> Circuit:
    """Single-output circuit whose output register is an ancilla."""
    n = int(rng.integers(min_inputs, max_inputs + 1))
    m = int(rng.integers(1, max_ancilla + 1))
    out = n + int(rng.integers(0, m))
    b = CircuitBuilder(n, m, output=out)
    _random_body(b, rng, int(rng.integers(1, max_gates + 1)))
    return b.build()


def random_statevector(rng: np.random.Generator, n: int) -> Statevector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return Statevector(n, v / np.linalg.norm(v))


def random_density(rng: np.random.Generator, n: int, rank: int | None = None) -> DensityMatrix:
    """Random mixed state of the given rank (full rank by default)."""
    rank = 2**n if rank is None else rank
    g = rng.normal(size=(2**n, rank)) + 1j * rng.normal(size=(2**n, rank))
    rho = g @ g.conj().T
    return DensityMatrix(n, rho / np.trace(rho).real)


def random_product_state(rng: np.random.Generator, n: int) -> Statevector:
    return Statevector.product([random_qubit_state(rng) for _ in range(n)])
