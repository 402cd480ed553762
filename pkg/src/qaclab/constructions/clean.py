"""Clean computation and the Fourier-mass extraction state built on it."""
from __future__ import annotations

import math

import numpy as np

from ..circuit import MINUS, ZERO, Circuit, CircuitBuilder, CircuitError, H, cnot, dagger, u1
from ..fourier import BooleanFn, FourierError, extract_fc, popcounts, wgk, wht
from ..report import GadgetReport
from ..sim import Statevector, contract, require_cap, run, run_all_inputs, run_state, slice_norm


def make_clean(c: Circuit) -> Circuit:
    """Copy the inputs, run C on the copies, copy its output to a fresh t', undo.

    Layout of the result: inputs X on 0..n-1, C's qubits on n..n+N_c-1 (its
    inputs there receive the copies), t' last. The output register is t'.
    """
    if c.output is None:
        raise CircuitError("make_clean needs a circuit with an output register")
    n, nc = c.n_inputs, c.n_qubits
    t_new = n + nc
    require_cap(t_new + 1)
    copy = [cnot(i, n + i) for i in range(n)]
    b = CircuitBuilder(n, nc + 1, output=t_new)
    inner = list(range(n, n + nc))
    b.layer(*copy)
    b.extend(c, inner)
    b.layer(cnot(n + c.output, t_new))
    b.extend(dagger(c), inner)
    b.layer(*copy)
    return b.build()


def clean_amplitudes(c: Circuit, clean: Circuit | None = None) -> dict:
    """Amplitudes of C'|x>|0> on |x>|b>_{t'}|0...> against p_b(x) from f_C."""
    clean = make_clean(c) if clean is None else clean
    f = extract_fc(c)
    p0 = (1 + f.table) / 2
    p1 = (1 - f.table) / 2
    n = c.n_inputs
    t_new = clean.output
    cols = run_all_inputs(clean)
    xs = np.arange(2**n)
    return {"p0": p0, "p1": p1, "amp0": cols[xs, xs], "amp1": cols[xs | (1 << t_new), xs]}


def clean_computation_report(c: Circuit, tol: float = 1e-9, seed: int | None = None) -> GadgetReport:
    rep = GadgetReport("clean-comp", {"n_inputs": c.n_inputs, "n_ancilla": c.n_ancilla}, seed)
    data = clean_amplitudes(c)
    err0 = np.max(np.abs(data["amp0"] - data["p0"]))
    err1 = np.max(np.abs(data["amp1"] - data["p1"]))
    ret = np.abs(data["amp0"]) ** 2 + np.abs(data["amp1"]) ** 2
    ret_err = np.max(np.abs(ret - (data["p0"] ** 2 + data["p1"] ** 2)))
    rep.check("max_amp0_error", err0, "<=", 0.0, tol)
    rep.check("max_amp1_error", err1, "<=", 0.0, tol)
    rep.check("max_clean_return_error", ret_err, "<=", 0.0, tol)
    return rep


# ---------------------------------------------------------------- Fourier mass


def t_k_state(f: BooleanFn, k: int) -> Statevector:
    """Normalized sum over |S| >= k of f^(S)|S>, the basis string of S being its mask."""
    spec = wht(f)
    gamma = wgk(spec, k)
    if gamma <= 1e-12:
        raise FourierError(f"no Fourier mass at level >= {k}")
    amps = np.where(popcounts(f.n) >= k, spec.coeffs, 0.0) / math.sqrt(gamma)
    return Statevector(f.n, amps.astype(complex))


def psi_star_circuit(c: Circuit) -> Circuit:
    """H on X, the clean circuit, H on X again, from the all-zero state."""
    clean = make_clean(c)
    n = c.n_inputs
    hs = [u1(i, H) for i in range(n)]
    b = CircuitBuilder(0, clean.n_qubits, output=clean.output)
    b.layer(*hs)
    b.extend(clean)
    b.layer(*hs)
    return b.build()


def build_psi_star(c: Circuit) -> tuple[Circuit, Statevector]:
    circ = psi_star_circuit(c)
    return circ, run(circ)


def bilinear_extraction(psi_star: Statevector, f: BooleanFn, k: int, t_out: int) -> complex:
    """<T_k|_X <-|_{t'} <0...0|_rest psi*; equivalently the Hadamard-basis gadget on C'|+^n>|0>."""
    n = f.n
    rest = [q for q in range(n, psi_star.n_qubits)]
    bra = [MINUS if q == t_out else ZERO for q in rest]
    residue = contract(psi_star, bra, rest)
    return complex(np.vdot(t_k_state(f, k).amplitudes, residue.amplitudes))


def psi_star_report(c: Circuit, tol: float = 1e-9, seed: int | None = None) -> GadgetReport:
    n = c.n_inputs
    rep = GadgetReport("psi-star", {"n_inputs": n, "n_ancilla": c.n_ancilla}, seed)
    circ, psi = build_psi_star(c)
    f = extract_fc(c)
    spec = wht(f)
    xs = list(range(n))
    rep.check("zero_branch", slice_norm(psi, "bits", xs, [0] * n), ">=", 0.5, tol)
    for k in range(n + 1):
        w = wgk(spec, k)
        rep.record(f"W>={k}", w)
        rep.check(f"slice_norm>={k}", slice_norm(psi, "hamming_at_least", xs, k), ">=", w / 2, tol)
        if w > 1e-12:
            mag = abs(bilinear_extraction(psi, f, k, circ.output))
            rep.check(f"bilinear_k{k}", mag, "==", math.sqrt(w / 2), tol)
    return rep


def tk_hadamard_form(f: BooleanFn, k: int) -> np.ndarray:
    """gamma^{-1/2} sum_{|S|>=k} f^(S) |->_S |+>_{Sbar}, built as explicit product vectors."""
    spec = wht(f)
    gamma = wgk(spec, k)
    out = np.zeros(2**f.n, dtype=complex)
    deg = popcounts(f.n)
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    for s in np.nonzero(deg >= k)[0]:
        vec = np.ones(1)
        for q in reversed(range(f.n)):
            vec = np.kron(vec, minus if (s >> q) & 1 else plus)
        out += spec.coeffs[s] * vec
    return out / math.sqrt(gamma)


def hadamard_all(state: Statevector) -> Statevector:
    n = state.n_qubits
    b = CircuitBuilder(0, n)
    b.layer(*[u1(q, H) for q in range(n)])
    return run_state(b.build(), state)
