"""One layer of block reflections turning a Dicke state into a felinity witness."""
from __future__ import annotations

import math

import numpy as np

from ..circuit import PLUS, Circuit, CircuitBuilder, CircuitError, eps_state, reflection
from ..report import GadgetReport
from ..sim import Statevector, partial_trace, require_cap, run_state, slice_norm
from ..states import dicke_vector, felinity
from .partition import log2_clamped


def layer_block_count(k: int) -> int:
    """max(1, floor(k / log2 k))."""
    lg = log2_clamped(k)
    return max(1, math.floor(k / lg)) if lg > 0 else 1


def binomial_point(n: int, k: int) -> float:
    """Pr[Binom(n, k/n) = k]."""
    p = k / n
    return math.comb(n, k) * p**k * (1 - p) ** (n - k)


def dicke_layer_circuit(n: int, k: int, n_blocks: int | None = None) -> Circuit:
    """Data on 0..n-1 in contiguous blocks B_i, target t_i on n+i.

    Gate i is I - 2|p>^{m_i}<p|^{m_i} (x) |+><+| on B_i and t_i with |p> = sqrt(1-p)|0> + sqrt(p)|1>.
    """
    if not 1 <= k <= n:
        raise CircuitError(f"need 1 <= k <= n, got k={k}, n={n}")
    ell = layer_block_count(k) if n_blocks is None else n_blocks
    if not 1 <= ell <= n:
        raise CircuitError(f"block count {ell} outside [1, {n}]")
    require_cap(n + ell)
    p = eps_state(k / n)
    blocks = np.array_split(np.arange(n), ell)
    gates = [reflection([*map(int, blk), n + i], [p] * len(blk) + [PLUS]) for i, blk in enumerate(blocks)]
    b = CircuitBuilder(n, ell)
    b.layer(*gates)
    return b.build()


def dicke_felinity_layer(n: int, k: int, n_blocks: int | None = None) -> tuple[Circuit, GadgetReport]:
    circ = dicke_layer_circuit(n, k, n_blocks)
    ell = circ.n_ancilla
    rep = GadgetReport("dicke-layer", {"n": n, "k": k, "blocks": ell, "log_base": 2})
    if k > n / 2:
        rep.notes.append("k > n/2: outside the usual range k <= n/2, identities still checked")
    if k <= 2 and n_blocks is None:
        rep.notes.append("k <= 2: block count clamped")
    init = np.zeros(2 ** (n + ell), dtype=complex)
    init[: 2**n] = dicke_vector(n, k)
    psi = run_state(circ, Statevector(n + ell, init))
    targets = list(range(n, n + ell))
    w1 = slice_norm(psi, "bits", targets, [1] * ell)
    w0 = slice_norm(psi, "bits", targets, [0] * ell)
    fel = felinity(partial_trace(psi, targets))
    exact = binomial_point(n, k)
    rep.check("all_ones_weight", w1, "==", exact, 1e-9)
    rep.record("all_zeros_weight", w0)
    rep.check("felinity_vs_branch_product", fel, ">=", w0 * w1, 1e-12)
    rep.check("binomial_fact", exact, ">=", math.exp(-1) / math.sqrt(k), 1e-12)
    rep.check("felinity_vs_1_over_8k", fel, ">=", 1 / (8 * k), informational=True)
    return circ, rep
