"""The W-state chain: uniform |0^n>+|W_n>, controlled W, arbitrary 0/W superpositions,
uncomputing W, and the poor man's fanout built from them."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..circuit import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    H,
    X,
    Z,
    cnot,
    compose,
    controlled_rot,
    dagger,
    eps_state,
    exact_gate,
    or_gate,
    state_prep_unitary,
    threshold_gate,
    u1,
)
from ..report import GadgetReport
from ..sim import Statevector, require_cap, run_state, slice_norm
from ..states import dicke_vector
from .amplification import amp_gamma, exact_amp_amp, reflection_from_prep

MAP_TOL = 1e-9


def zero_w_weights(n: int) -> dict:
    """Weights of the threshold-marked branch for |1/(n+1)>^n.

    ``p1`` is Pr[|x| = 1] = Pr[|x| = 0] = (1-p)^n, ``alpha`` the marked weight 2 p1.
    """
    p = 1.0 / (n + 1)
    p1 = (1 - p) ** n
    return {"p": p, "p1": p1, "alpha": 2 * p1}


def _prep_eps(qubits: Sequence[int], eps: float):
    s = eps_state(eps)
    return [u1(q, state_prep_unitary(s.amplitude0, s.amplitude1)) for q in qubits]


def _or_layers(b: CircuitBuilder, controls: Sequence[int], target: int) -> None:
    for g in or_gate(controls, target):
        b.layer(g)


def zero_w_prep(n: int) -> Circuit:
    """Prepare (|0^n> + |W_n>)/sqrt 2 on qubits 0..n-1; ancillas n (flag), n+1 end clean."""
    if n < 1:
        raise CircuitError("n must be at least 1")
    require_cap(n + 2)
    w = zero_w_weights(n)
    flag = n
    b = CircuitBuilder(0, n + 1, output=flag)
    b.layer(*_prep_eps(range(n), w["p"]))
    # flag = [|x| <= 1]
    b.layer(threshold_gate(range(n), flag, 2))
    b.layer(u1(flag, X))
    marked = b.build()
    return exact_amp_amp(marked, w["alpha"], flag)


def phi_prep(n: int) -> Circuit:
    """Prepares -(|1>_x|0^n> - |0>_x|W_n>)/sqrt 2 with x = 0, T = 1..n, ancillas n+1, n+2."""
    b = CircuitBuilder(0, n + 3)
    targets = list(range(1, n + 1))
    b.extend(zero_w_prep(n), [*targets, n + 1, n + 2])
    _or_layers(b, targets, 0)
    b.layer(u1(0, X))
    b.layer(u1(0, Z))
    return b.build()


def controlled_w(n: int) -> Circuit:
    """|b>_x|0^n> -> |b>_x (|0^n> or |W_n>), x = 0, T = 1..n, clean ancillas n+1, n+2."""
    require_cap(n + 3)
    targets = list(range(1, n + 1))
    b = CircuitBuilder(1, n + 2)
    b.extend(zero_w_prep(n), [*targets, n + 1, n + 2])
    b.extend(reflection_from_prep(phi_prep(n)))
    b.layer(u1(0, H))
    _or_layers(b, targets, 0)
    return b.build()


def any_0w(n: int, alpha: complex, beta: complex) -> Circuit:
    """alpha|0^n> + beta|W_n> on 0..n-1; x = n and ancillas n+1, n+2 end clean."""
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-12:
        raise CircuitError("|alpha|^2 + |beta|^2 must equal 1")
    require_cap(n + 3)
    x = n
    targets = list(range(n))
    b = CircuitBuilder(0, n + 3)
    b.layer(u1(x, state_prep_unitary(alpha, beta)))
    b.extend(controlled_w(n), [x, *targets, n + 1, n + 2])
    _or_layers(b, targets, x)
    return b.build()


def uncompute_w_prob(n: int) -> float:
    """Pr[Binom(n, 1/n) = 1] = (1 - 1/n)^{n-1}."""
    return (1 - 1 / n) ** (n - 1)


def psi2_prep(n: int) -> Circuit:
    """Prepares the intermediate state of the uncompute-W circuit from all zeros."""
    q, a0, a1 = n, n + 1, n + 2
    gamma = amp_gamma(uncompute_w_prob(n))
    b = CircuitBuilder(0, n + 3)
    b.layer(*_prep_eps(range(n), 1 / n), u1(q, X))
    b.layer(exact_gate(range(n), a0, 1))
    b.layer(controlled_rot([q, a0], a1, gamma))
    return b.build()


def uncompute_w(n: int) -> Circuit:
    """|1/n>^n|1>_q -> |W_n>|1>_q and |0^n>|0>_q -> |0^n>|0>_q; X = 0..n-1, q = n, a0, a1 clean.

    The sign flip before and after the reflection sits on a1, the one ancilla
    that is 1 exactly on the good branch.
    """
    if n < 2:
        raise CircuitError("n must be at least 2")
    require_cap(n + 3)
    q, a0, a1 = n, n + 1, n + 2
    gamma = amp_gamma(uncompute_w_prob(n))
    b = CircuitBuilder(n + 1, 2)
    b.layer(exact_gate(range(n), a0, 1))
    b.layer(controlled_rot([q, a0], a1, gamma))
    b.layer(u1(a1, Z))
    b.extend(reflection_from_prep(psi2_prep(n)))
    b.layer(u1(a1, Z))
    b.layer(cnot(q, a0))
    b.layer(cnot(q, a1))
    return b.build()


def poor_mans_fanout(n: int) -> Circuit:
    """|0>_b|0^n> -> |0>_b|0^n> and |1>_b|0^n> -> |1>_b|1/n>^n.

    b = 0, outputs 1..n, uncompute ancillas n+1, n+2, controlled-W ancillas n+3, n+4.
    """
    require_cap(n + 5)
    outs = list(range(1, n + 1))
    b = CircuitBuilder(1, n + 4)
    b.extend(controlled_w(n), [0, *outs, n + 3, n + 4])
    b.extend(dagger(uncompute_w(n)), [*outs, 0, n + 1, n + 2])
    return b.build()


# ---------------------------------------------------------------- map checks


def place(n_total: int, parts: Sequence[tuple[Sequence[int], np.ndarray]]) -> Statevector:
    """Product of register states ``parts`` (qubits, little-endian vector); other qubits |0>."""
    idx = np.arange(2**n_total)
    amps = np.ones(2**n_total, dtype=complex)
    used = 0
    for qubits, vec in parts:
        local = np.zeros_like(idx)
        for i, q in enumerate(qubits):
            local |= ((idx >> q) & 1) << i
            used |= 1 << q
        amps *= np.asarray(vec, dtype=complex)[local]
    amps *= (idx & ~used) == 0
    return Statevector(n_total, amps)


def product_vector(eps: float, n: int) -> np.ndarray:
    s = eps_state(eps).vector
    out = np.ones(1, dtype=complex)
    for _ in range(n):
        out = np.kron(s, out)
    return out


def basis_vector(n: int, index: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[index] = 1
    return v


def map_infidelity(c: Circuit, before: Statevector, after: Statevector) -> float:
    out = run_state(c, before)
    return float(1 - abs(np.vdot(after.amplitudes, out.amplitudes)) ** 2)


def ancilla_residual(c: Circuit, before: Statevector, ancillas: Sequence[int]) -> float:
    if not ancillas:
        return 0.0
    out = run_state(c, before)
    return 1 - slice_norm(out, "bits", list(ancillas), [0] * len(ancillas))


def _check_map(rep: GadgetReport, name: str, c: Circuit, before, after, ancillas) -> None:
    rep.check(f"{name}.infidelity", map_infidelity(c, before, after), "<=", 0.0, MAP_TOL)
    rep.check(f"{name}.ancilla_residual", ancilla_residual(c, before, ancillas), "<=", 0.0, MAP_TOL)


def _check_inverse(rep: GadgetReport, name: str, c: Circuit, seeds: Sequence[int]) -> None:
    both = compose(c, dagger(c))
    worst = 0.0
    for s in seeds:
        v = Statevector.basis(c.n_qubits, s % 2**c.n_qubits)
        worst = max(worst, map_infidelity(both, v, v))
    rep.check(f"{name}.dagger_roundtrip", worst, "<=", 0.0, MAP_TOL)


def w_chain_report(n: int, alpha: complex = 0.6, beta: complex = 0.8, seed: int | None = None) -> GadgetReport:
    rep = GadgetReport("w-chain", {"n": n, "alpha": alpha, "beta": beta}, seed)
    w = dicke_vector(n, 1)
    zero = basis_vector(n, 0)
    zw = zero_w_weights(n)
    rep.record("zero_w.p1", zw["p1"])
    rep.record("zero_w.marked_weight", zw["alpha"])
    rep.check("zero_w.p1_at_least_quarter", zw["p1"], ">=", 0.25)

    c = zero_w_prep(n)
    _check_map(rep, "zero_w", c, place(c.n_qubits, []), place(c.n_qubits, [(range(n), (zero + w) / math.sqrt(2))]), [n, n + 1])

    c = controlled_w(n)
    N = c.n_qubits
    ts = list(range(1, n + 1))
    anc = [n + 1, n + 2]
    for bit, target in ((0, zero), (1, w)):
        _check_map(rep, f"controlled_w.b{bit}", c, place(N, [([0], basis_vector(1, bit))]),
                   place(N, [([0], basis_vector(1, bit)), (ts, target)]), anc)

    c = any_0w(n, alpha, beta)
    _check_map(rep, "any_0w", c, place(c.n_qubits, []), place(c.n_qubits, [(range(n), alpha * zero + beta * w)]), [n, n + 1, n + 2])

    if n >= 2:
        c = uncompute_w(n)
        N = c.n_qubits
        xs = list(range(n))
        _check_map(rep, "uncompute_w.one", c, place(N, [(xs, product_vector(1 / n, n)), ([n], basis_vector(1, 1))]),
                   place(N, [(xs, w), ([n], basis_vector(1, 1))]), [n + 1, n + 2])
        _check_map(rep, "uncompute_w.zero", c, place(N, []), place(N, []), [n + 1, n + 2])

        c = poor_mans_fanout(n)
        N = c.n_qubits
        outs = list(range(1, n + 1))
        anc = list(range(n + 1, n + 5))
        _check_map(rep, "fanout.b0", c, place(N, []), place(N, []), anc)
        _check_map(rep, "fanout.b1", c, place(N, [([0], basis_vector(1, 1))]),
                   place(N, [([0], basis_vector(1, 1)), (outs, product_vector(1 / n, n))]), anc)
        _check_inverse(rep, "fanout", c, [0, 1, 3, 5])
    return rep
