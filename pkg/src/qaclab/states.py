"""Named states and the measures used on them: felinity, trace distance, overlaps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import SingleQubitState, eps_state, ry
from .fourier import popcounts
from .sim import DensityMatrix, SimulationError, Statevector, as_density

ROTATED_W_CAP = 14


@dataclass(frozen=True)
class NamedStateSpec:
    """``kind`` in dicke, w, cat, basis, eps_product, rotated_w, odd_parity_mixture."""

    kind: str
    n: int
    k: int | None = None
    eps: float | None = None
    beta: float | None = None
    bits: str | None = None

    @classmethod
    def parse(cls, text: str) -> "NamedStateSpec":
        """``dicke:n,k``, ``w:n``, ``cat:n``, ``rotw:n,beta``, ``basis:0101``,
        ``eps:n,eps``, ``oddmix:n``."""
        kind, _, args = text.partition(":")
        parts = [a for a in args.split(",") if a]
        try:
            if kind == "dicke":
                return cls("dicke", int(parts[0]), k=int(parts[1]))
            if kind in ("w", "cat"):
                return cls(kind, int(parts[0]))
            if kind == "rotw":
                return cls("rotated_w", int(parts[0]), beta=float(parts[1]))
            if kind == "basis":
                return cls("basis", len(parts[0]), bits=parts[0])
            if kind == "eps":
                return cls("eps_product", int(parts[0]), eps=float(parts[1]))
            if kind == "oddmix":
                return cls("odd_parity_mixture", int(parts[0]))
        except (IndexError, ValueError):
            pass
        raise SimulationError(f"cannot parse named state {text!r}")


def dicke_vector(n: int, k: int) -> np.ndarray:
    if not 0 <= k <= n:
        raise SimulationError(f"Dicke weight {k} outside [0, {n}]")
    v = (popcounts(n) == k).astype(complex)
    return v / math.sqrt(math.comb(n, k))


def dicke(n: int, k: int) -> Statevector:
    return Statevector(n, dicke_vector(n, k))


def w_state(n: int) -> Statevector:
    return dicke(n, 1)


def cat(n: int) -> Statevector:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return Statevector(n, v)


def basis(bits: str) -> Statevector:
    """Ket label; the rightmost character is qubit 0."""
    return Statevector.basis(len(bits), int(bits, 2))


def product_state(states: list[SingleQubitState]) -> Statevector:
    return Statevector.product(states)


def eps_product(eps: float, n: int) -> Statevector:
    return Statevector.product([eps_state(eps)] * n)


def rotated_w(n: int, beta: float, unitary=None) -> Statevector:
    """R_y(beta)^{(x)n} |W_n> (or ``unitary`` in place of R_y(beta))."""
    u = (ry(beta) if unitary is None else unitary).matrix
    amps = w_state(n).amplitudes.reshape((2,) * n)
    for ax in range(n):
        amps = np.moveaxis(np.tensordot(u, amps, axes=([1], [ax])), 0, ax)
    return Statevector(n, amps.reshape(-1))


def odd_parity_mixture(n: int) -> DensityMatrix:
    odd = (popcounts(n) % 2 == 1).astype(float)
    return DensityMatrix(n, np.diag(odd / odd.sum()))


def build_state(spec: NamedStateSpec):
    kind = spec.kind
    if kind == "dicke":
        return dicke(spec.n, spec.k)
    if kind == "w":
        return w_state(spec.n)
    if kind == "cat":
        return cat(spec.n)
    if kind == "basis":
        return basis(spec.bits)
    if kind == "eps_product":
        if spec.eps is None or not 0 <= spec.eps <= 1:
            raise SimulationError("eps_product needs eps in [0, 1]")
        return eps_product(spec.eps, spec.n)
    if kind == "rotated_w":
        return rotated_w(spec.n, spec.beta)
    if kind == "odd_parity_mixture":
        return odd_parity_mixture(spec.n)
    raise SimulationError(f"unknown state kind {kind!r}")


# ---------------------------------------------------------------- measures


def diagonal(state) -> np.ndarray:
    if isinstance(state, Statevector):
        return state.probabilities()
    rho = as_density(state)
    problems = rho.validate()
    if problems:
        raise SimulationError("invalid density matrix: " + ", ".join(problems))
    return rho.diagonal()


def felinity(state) -> float:
    """2 * sum_y <y|rho|y> <ybar|rho|ybar>; only the diagonal is needed.

    Reversing the diagonal pairs each index with its bitwise complement.
    """
    p = diagonal(state)
    return float(2.0 * np.dot(p, p[::-1]))


def felinity_dense(state) -> float:
    """Felinity evaluated literally with X^{(x)n} rho X^{(x)n}; O(4^n) oracle."""
    rho = as_density(state).entries
    n = int(round(math.log2(rho.shape[0])))
    xn = np.ones((1, 1))
    for _ in range(n):
        xn = np.kron(xn, np.array([[0, 1], [1, 0]]))
    flipped = xn @ rho @ xn
    return float(2.0 * np.real(sum(rho[y, y] * flipped[y, y] for y in range(2**n))))


def trace_distance(rho, sigma) -> float:
    a, b = as_density(rho), as_density(sigma)
    if a.n_qubits != b.n_qubits:
        raise SimulationError("dimension mismatch")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a.entries - b.entries))))


def fidelity_with(psi: Statevector, rho) -> float:
    """<psi|rho|psi>."""
    r = as_density(rho)
    if r.n_qubits != psi.n_qubits:
        raise SimulationError("dimension mismatch")
    a = psi.amplitudes
    return float(np.real(np.vdot(a, r.entries @ a)))


def branch_weights(state) -> tuple[float, float]:
    """(<0^n|rho|0^n>, <1^n|rho|1^n>)."""
    p = diagonal(state)
    return float(p[0]), float(p[-1])


def dicke_coefficients(psi: Statevector) -> np.ndarray:
    """alpha_k = <D^n_k|psi> for k = 0..n."""
    n = psi.n_qubits
    return np.array([np.vdot(dicke_vector(n, k), psi.amplitudes) for k in range(n + 1)])


def dicke_basis_felinity(alphas) -> float:
    """2 * sum_k |alpha_k|^2 |alpha_{n-k}|^2 / C(n, k) for a symmetric state."""
    a2 = np.abs(np.asarray(alphas)) ** 2
    n = len(a2) - 1
    return float(2.0 * sum(a2[k] * a2[n - k] / math.comb(n, k) for k in range(n + 1)))


def felinity_rotated_w(n: int, beta: float) -> float:
    if n > ROTATED_W_CAP:
        raise SimulationError(f"n={n} exceeds the rotated-W cap of {ROTATED_W_CAP}")
    return felinity(rotated_w(n, beta))


def rotated_w_decay_bound(n: int) -> float:
    """2 (1/2)^{n-2} n^3, the explicit-polynomial form of the decay bound."""
    return 2.0 * 0.5 ** (n - 2) * n**3


# ---------------------------------------------------------------- state files


def state_to_dict(state) -> dict:
    if isinstance(state, Statevector):
        return {"n": state.n_qubits, "amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes]}
    rho = as_density(state)
    return {
        "n": rho.n_qubits,
        "density_matrix": [[float(z.real), float(z.imag)] for z in rho.entries.ravel()],
    }


def state_from_dict(d: dict):
    if not isinstance(d, dict) or "n" not in d:
        raise SimulationError("state file must be an object with key 'n'")
    extra = set(d) - {"n", "amplitudes", "density_matrix"}
    if extra:
        raise SimulationError(f"unknown state keys {sorted(extra)}")
    n = int(d["n"])
    if "amplitudes" in d:
        return Statevector(n, np.array([complex(re, im) for re, im in d["amplitudes"]]))
    if "density_matrix" in d:
        flat = np.array([complex(re, im) for re, im in d["density_matrix"]])
        return DensityMatrix(n, flat.reshape(2**n, 2**n))
    raise SimulationError("state file needs 'amplitudes' or 'density_matrix'")
