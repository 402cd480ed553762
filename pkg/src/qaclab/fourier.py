"""Real-valued Boolean functions on {0,1}^n and their Fourier spectra.

Inputs and subsets share one index space: bit i of the index is x_i (or
membership of i in S). Characters are chi_S(x) = (-1)^{popcount(S & x)}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .sim import dense_unitary, run_all_inputs

MAX_ARITY = 16


class FourierError(ValueError):
    pass


def popcounts(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    w = np.zeros(2**n, dtype=np.int64)
    for i in range(n):
        w += (idx >> i) & 1
    return w


@dataclass(frozen=True)
class BooleanFn:
    """Truth table of f: {0,1}^n -> R. ``bounded`` is False for truncations."""

    n: int
    table: np.ndarray
    bounded: bool = True

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.shape != (2**self.n,):
            raise FourierError(f"table for arity {self.n} needs {2**self.n} entries, got {table.shape}")
        if self.bounded and np.any(np.abs(table) > 1 + 1e-9):
            raise FourierError("entries must lie in [-1, 1]")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __call__(self, x: int) -> float:
        return float(self.table[x])


@dataclass(frozen=True)
class FourierSpectrum:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (2**self.n,):
            raise FourierError(f"spectrum for arity {self.n} needs {2**self.n} entries")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, mask: int) -> float:
        return float(self.coeffs[mask])

    def levels(self) -> np.ndarray:
        """Squared mass per degree 0..n."""
        return np.bincount(popcounts(self.n), weights=self.coeffs**2, minlength=self.n + 1)


def _fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard butterfly, O(n 2^n)."""
    a = np.array(a, dtype=float)
    n = a.size.bit_length() - 1
    for i in range(n):
        a = a.reshape(-1, 2, 2**i)
        a = np.concatenate([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1)
    return a.reshape(-1)


def wht(f: BooleanFn) -> FourierSpectrum:
    return FourierSpectrum(f.n, _fwht(f.table) / 2**f.n)


def inverse_wht(spec: FourierSpectrum, bounded: bool = False) -> BooleanFn:
    return BooleanFn(spec.n, _fwht(spec.coeffs), bounded=bounded)


def wgk(f: BooleanFn | FourierSpectrum, k: int) -> float:
    """Fourier weight at degree k and above."""
    spec = wht(f) if isinstance(f, BooleanFn) else f
    if not 0 <= k <= spec.n:
        raise FourierError(f"level {k} outside [0, {spec.n}]")
    return float(np.sum(spec.coeffs[popcounts(spec.n) >= k] ** 2))


def correlation(f: BooleanFn, g: BooleanFn) -> float:
    if f.n != g.n:
        raise FourierError(f"arity mismatch: {f.n} vs {g.n}")
    return float(np.mean(f.table * g.table))


def spectral_correlation(f: BooleanFn, g: BooleanFn) -> float:
    """Same quantity as ``correlation`` computed as sum_S f^(S) g^(S)."""
    if f.n != g.n:
        raise FourierError(f"arity mismatch: {f.n} vs {g.n}")
    return float(np.dot(wht(f).coeffs, wht(g).coeffs))


def character(n: int, mask: int) -> BooleanFn:
    masked = np.arange(2**n) & mask
    bits = sum((masked >> i) & 1 for i in range(n)) if n else np.zeros(1, dtype=int)
    return BooleanFn(n, 1.0 - 2.0 * (bits % 2))


def parity_fn(n: int) -> BooleanFn:
    if n < 1:
        raise FourierError("n must be at least 1")
    return BooleanFn(n, 1.0 - 2.0 * (popcounts(n) % 2))


def majority_fn(n: int) -> BooleanFn:
    """+1 iff |x| <= n/2 (ties go to +1), else -1."""
    if n < 1:
        raise FourierError("n must be at least 1")
    return BooleanFn(n, np.where(2 * popcounts(n) <= n, 1.0, -1.0))


def constant_fn(n: int, value: float = 1.0) -> BooleanFn:
    return BooleanFn(n, np.full(2**n, float(value)))


def maj_truncate(n: int, k: int, mode: str = "at_least") -> BooleanFn:
    """MAJ_n with every coefficient below (``at_least``) or from (``below``) level k zeroed."""
    if not 0 <= k <= n + 1:
        raise FourierError(f"level {k} outside [0, {n}]")
    coeffs = np.array(wht(majority_fn(n)).coeffs)
    deg = popcounts(n)
    if mode == "at_least":
        coeffs[deg < k] = 0.0
    elif mode == "below":
        coeffs[deg >= k] = 0.0
    else:
        raise FourierError(f"unknown mode {mode!r}")
    return inverse_wht(FourierSpectrum(n, coeffs))


def fit_majority_alpha(ns, ks=None) -> dict:
    """Largest alpha with W^{>=k}[MAJ_n] >= alpha k^{-1/2} over the sweep (k >= 1)."""
    ratios = {}
    for n in ns:
        spec = wht(majority_fn(n))
        for k in ks or range(1, n + 1):
            w = wgk(spec, k)
            if w > 1e-15:
                ratios[(n, k)] = w * np.sqrt(k)
    worst = min(ratios, key=ratios.get)
    return {"alpha": ratios[worst], "argmin": worst, "ratios": ratios}


def extract_fc(circuit: Circuit) -> BooleanFn:
    """f_C(x) = <x,0^m| C^dag Z_t C |x,0^m> for every input x."""
    t = _output_register(circuit)
    cols = run_all_inputs(circuit)
    n = circuit.n_qubits
    sign = 1.0 - 2.0 * ((np.arange(2**n) >> t) & 1)
    values = np.einsum("ix,i->x", np.abs(cols) ** 2, sign)
    return BooleanFn(circuit.n_inputs, values)


def observable_oc(circuit: Circuit) -> np.ndarray:
    """O_C = <0^m| C^dag Z_t C |0^m> as a 2^k x 2^k matrix, from the dense unitary."""
    t = _output_register(circuit)
    n, k = circuit.n_qubits, circuit.n_inputs
    u = dense_unitary(circuit)
    z = np.array([1.0, -1.0])[(np.arange(2**n) >> t) & 1]
    heis = u.conj().T @ (z[:, None] * u)
    return heis[: 2**k, : 2**k]


def _output_register(circuit: Circuit) -> int:
    if circuit.output is None:
        raise FourierError("circuit has no output register")
    if circuit.n_inputs > MAX_ARITY:
        raise FourierError(f"{circuit.n_inputs} inputs exceeds the arity cap of {MAX_ARITY}")
    return circuit.output


def load_truth_table(text: str) -> BooleanFn:
    values = [float(line) for line in text.split() if line.strip()]
    n = len(values).bit_length() - 1
    if 2**n != len(values) or not values:
        raise FourierError(f"truth table length {len(values)} is not a power of two")
    return BooleanFn(n, np.array(values), bounded=False)


def dump_truth_table(f: BooleanFn) -> str:
    return "".join(f"{v:.17g}\n" for v in f.table)


def spectrum_csv(spec: FourierSpectrum) -> str:
    deg = popcounts(spec.n)
    lines = ["mask,size,coefficient"]
    lines += [f"{m},{deg[m]},{spec.coeffs[m]:.17g}" for m in range(2**spec.n)]
    return "\n".join(lines) + "\n"

