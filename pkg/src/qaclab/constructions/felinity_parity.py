"""Turning a state-preparation circuit into a circuit correlated with PARITY."""
from __future__ import annotations

from typing import Sequence

from ..circuit import Circuit, CircuitBuilder, CircuitError, cz_layer, dagger, or_gate
from ..fourier import correlation, extract_fc, parity_fn, wht
from ..report import GadgetReport
from ..sim import partial_trace, require_cap, run
from ..states import felinity


def felinity_to_parity_circuit(c: Circuit, targets: Sequence[int]) -> Circuit:
    """X_a . G . C^dag . L . C with L = cz(x_i, t_i) and G the NOR reflection onto a fresh a.

    G alone flips a on the |0^m> branch, giving <Z_a> = 1 - 2|<psi|L_x|psi>|^2
    and correlation -fel; the trailing X on a (so G becomes OR) makes it +fel.

    Inputs x_0..x_{n-1} sit on qubits 0..n-1, the m qubits of ``c`` on n..n+m-1,
    and the output register a on n+m.
    """
    if c.n_inputs != 0:
        raise CircuitError("expected a state-preparation circuit (no inputs)")
    targets = list(targets)
    m = c.n_qubits
    if not targets or len(set(targets)) != len(targets) or any(not 0 <= t < m for t in targets):
        raise CircuitError(f"target subset {targets} invalid for {m} qubits")
    n = len(targets)
    a = n + m
    require_cap(a + 1)
    prep = list(range(n, n + m))
    b = CircuitBuilder(n, m + 1, output=a)
    b.extend(c, prep)
    b.layer(*cz_layer(range(n), [n + t for t in targets]))
    b.extend(dagger(c), prep)
    for layer in or_gate(prep, a):
        b.layer(layer)
    return b.build()


def felinity_parity_report(
    c: Circuit, targets: Sequence[int], tol: float = 1e-9, seed: int | None = None
) -> GadgetReport:
    targets = list(targets)
    rep = GadgetReport("fel-par", {"prep_qubits": c.n_qubits, "targets": targets}, seed)
    fel = felinity(partial_trace(run(c), targets))
    cprime = felinity_to_parity_circuit(c, targets)
    f = extract_fc(cprime)
    n = len(targets)
    corr = correlation(f, parity_fn(n))
    top = wht(f)[2**n - 1]
    rep.record("felinity", fel)
    rep.check("corr_minus_fel", abs(corr - fel), "<=", 0.0, tol)
    rep.check("top_coeff_minus_fel", abs(top - fel), "<=", 0.0, tol)
    rep.record("correlation", corr)
    return rep
