"""Seeded verification routines, one per lemma id, and the report bundle."""
from __future__ import annotations

import itertools
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .circuit import ONE, ZERO, CircuitBuilder, SingleQubitUnitary, cnot, controlled_rot, reflection, state_prep_unitary, u1
from .constructions.amplification import amp_amp_report, skewed_nekomata_amplify
from .constructions.clean import clean_computation_report, hadamard_all, psi_star_report, t_k_state, tk_hadamard_form
from .constructions.dicke_layer import dicke_felinity_layer
from .constructions.felinity_parity import felinity_parity_report
from .constructions.partition import partition_report
from .constructions.wchain import w_chain_report
from .corpus import (
    make_rng,
    random_density,
    random_input_circuit,
    random_prep_circuit,
    random_qubit_state,
    random_statevector,
)
from .fourier import extract_fc, majority_fn, popcounts, wgk, wht
from .majority import (
    ac0_postprocess_contract,
    approx_t_report,
    majority_report,
    rows_to_csv,
    weak_copy_report,
    weak_copy_table,
)
from .report import GadgetReport, dumps
from .sim import DensityMatrix, Statevector, as_density, partial_trace
from .states import (
    dicke_basis_felinity,
    dicke_coefficients,
    felinity,
    felinity_dense,
    rotated_w,
    rotated_w_decay_bound,
    trace_distance,
)


@dataclass
class ExperimentConfig:
    """Parameters of one verification run. Unset fields take per-lemma defaults."""

    lemma_id: str
    n: int | None = None
    k: int | None = None
    t: float | None = None
    a: float | None = None
    d: float = 8.0
    seed: int = 0
    count: int | None = None
    tol: float = 1e-9
    extra: dict = field(default_factory=dict)


def _pick(value, default):
    return default if value is None else value


# ---------------------------------------------------------------- routines


def verify_clean_comp(cfg: ExperimentConfig) -> GadgetReport:
    rep = GadgetReport("clean-comp", {"inputs": _pick(cfg.n, 2), "count": _pick(cfg.count, 20)}, cfg.seed)
    n = _pick(cfg.n, 2)
    for i in range(_pick(cfg.count, 20)):
        c = random_input_circuit(make_rng(cfg.seed, i), min_inputs=n, max_inputs=n)
        rep.merge(clean_computation_report(c, cfg.tol), f"c{i}")
    return rep


def verify_psi_star(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 2)
    rep = GadgetReport("psi-star", {"inputs": n, "count": _pick(cfg.count, 20)}, cfg.seed)
    for i in range(_pick(cfg.count, 20)):
        c = random_input_circuit(make_rng(cfg.seed, i), min_inputs=n, max_inputs=n)
        rep.merge(psi_star_report(c, cfg.tol), f"c{i}")
    return rep


def verify_tk_extract(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 3)
    rep = GadgetReport("tk-extract", {"n": n}, cfg.seed)
    c = random_input_circuit(make_rng(cfg.seed), min_inputs=n, max_inputs=n)
    for name, f in (("random", extract_fc(c)), ("majority", majority_fn(n))):
        spec = wht(f)
        for k in range(n + 1):
            if wgk(spec, k) <= 1e-12:
                continue
            tk = t_k_state(f, k)
            support = float(np.sum(tk.probabilities()[popcounts(n) >= k]))
            rep.check(f"{name}.k{k}.support", support, "==", 1.0, cfg.tol)
            diff = np.max(np.abs(hadamard_all(tk).amplitudes - tk_hadamard_form(f, k)))
            rep.check(f"{name}.k{k}.hadamard_form", float(diff), "<=", 0.0, cfg.tol)
    return rep


def verify_fel_par(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 3)
    count = _pick(cfg.count, 10)
    rep = GadgetReport("fel-par", {"prep_qubits": n, "count": count}, cfg.seed)
    worst = 0.0
    for i in range(count):
        c = random_prep_circuit(make_rng(cfg.seed, i), min_qubits=n, max_qubits=n)
        for size in range(1, n + 1):
            for T in itertools.combinations(range(n), size):
                sub = felinity_parity_report(c, T, cfg.tol)
                worst = max(worst, sub.measured["corr_minus_fel"], sub.measured["top_coeff_minus_fel"])
    rep.check("max_abs_corr_minus_fel", worst, "<=", 0.0, cfg.tol)
    return rep


def verify_lipschitz(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 4)
    count = _pick(cfg.count, 200)
    rep = GadgetReport("lipschitz", {"n": n, "count": count}, cfg.seed)
    worst_excess, worst_range = -math.inf, 0.0
    for i in range(count):
        rng = make_rng(cfg.seed, i)
        rho = _random_state(rng, n)
        sigma = _random_state(rng, n) if i % 3 else _perturbed(rng, rho, n)
        fr, fs = felinity(rho), felinity(sigma)
        worst_excess = max(worst_excess, abs(fr - fs) - 8 * trace_distance(rho, sigma))
        worst_range = max(worst_range, -fr, fr - 1)
    rep.check("max_excess_over_8td", worst_excess, "<=", 0.0, cfg.tol)
    rep.check("range_violation", worst_range, "<=", 0.0, cfg.tol)
    return rep


def _random_state(rng, n):
    kind = rng.integers(3)
    if kind == 0:
        return random_statevector(rng, n)
    return random_density(rng, n, rank=int(rng.integers(1, 2**n + 1)))


def _perturbed(rng, rho, n):
    """A state close to ``rho``: mix in a small amount of another random state."""
    eps = float(rng.uniform(0, 0.1))
    other = as_density(random_statevector(rng, n)).entries
    return DensityMatrix(n, (1 - eps) * as_density(rho).entries + eps * other)


def verify_monotone(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 5)
    count = _pick(cfg.count, 200)
    rep = GadgetReport("monotone", {"n": n, "count": count}, cfg.seed)
    worst = -math.inf
    worst_product = -math.inf
    for i in range(count):
        rng = make_rng(cfg.seed, i)
        m = int(rng.integers(2, n + 1))
        rho = _random_state(rng, m)
        f = felinity(rho)
        for q in range(m):
            keep = [p for p in range(m) if p != q]
            worst = max(worst, f - felinity(partial_trace(rho, keep)))
        prod = Statevector.product([random_qubit_state(rng) for _ in range(m)])
        worst_product = max(worst_product, felinity(prod) - 2.0 ** (1 - m))
    rep.check("max_increase_after_trace", worst, "<=", 0.0, cfg.tol)
    rep.check("product_bound_excess", worst_product, "<=", 0.0, cfg.tol)
    return rep


def verify_dicke_layer(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 4)
    _, rep = dicke_felinity_layer(n, _pick(cfg.k, max(1, n // 2)))
    rep.seed = cfg.seed
    return rep


def verify_partition(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 12)
    return partition_report(n, _pick(cfg.k, n // 2), cfg.seed, cfg.extra.get("blocks"))


def amp_test_circuit(rng, alpha: float, qubits: int):
    """C|0> = sqrt(alpha)|good>|1>_f + sqrt(1-alpha)|bad>|0>_f with random good/bad states."""
    prep = random_prep_circuit(rng, min_qubits=qubits, max_qubits=qubits, max_gates=2)
    f = qubits
    b = CircuitBuilder(0, qubits + 1, output=f)
    b.extend(prep, range(qubits))
    b.layer(u1(f, state_prep_unitary(math.sqrt(1 - alpha), math.sqrt(alpha))))
    b.layer(reflection([f, *range(qubits)], [ONE] + [random_qubit_state(rng) for _ in range(qubits)]))
    b.layer(reflection([f, *range(qubits)], [ZERO] + [random_qubit_state(rng) for _ in range(qubits)]))
    return b.build()


def verify_amp_amp(cfg: ExperimentConfig) -> GadgetReport:
    qubits = _pick(cfg.n, 2)
    rep = GadgetReport("amp-amp", {"qubits": qubits}, cfg.seed)
    for j, alpha in enumerate((0.25, 1 / 3, 0.5, 1.0)):
        c = amp_test_circuit(make_rng(cfg.seed, j), alpha, qubits)
        rep.merge(amp_amp_report(c, alpha, tol=cfg.tol), f"alpha{j}")
    # skewed branches: sqrt(0.7)|00>|0> + sqrt(0.3)|11>|1>
    b = CircuitBuilder(0, 3)
    b.layer(u1(2, state_prep_unitary(math.sqrt(0.7), math.sqrt(0.3))))
    b.layer(cnot(2, 0))
    b.layer(cnot(2, 1))
    rep.merge(skewed_nekomata_amplify(b.build(), [0, 1]), "skewed_edge")
    rep.merge(skewed_nekomata_amplify(skewed_example(), [0, 1]), "skewed")
    return rep


def skewed_example():
    """0.5 on |00>, 0.2 on |11>, 0.3 on the bad string with q0 = 1, q1 = 0."""
    b = CircuitBuilder(0, 2)
    b.layer(u1(0, state_prep_unitary(math.sqrt(0.5), math.sqrt(0.5))))
    b.layer(controlled_rot([0], 1, 0.6))
    return b.build()


def verify_w_chain(cfg: ExperimentConfig) -> GadgetReport:
    rep = w_chain_report(_pick(cfg.n, 3))
    rep.seed = cfg.seed
    return rep


def verify_weak_copy(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 4)
    return weak_copy_report(n, _pick(cfg.t, n / 2), cfg.tol, cfg.seed)


def verify_approx_t(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 256)
    return approx_t_report(n, _pick(cfg.t, n / 2), _pick(cfg.a, 4.0), cfg.d, cfg.seed)


def verify_majority_corr(cfg: ExperimentConfig) -> GadgetReport:
    rep, _ = majority_report(_pick(cfg.n, 255), _pick(cfg.a, 2.0), cfg.d, cfg.extra.get("c_prime", 1.0), cfg.seed)
    return rep


def verify_rotated_w(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 6)
    grid = np.linspace(0, math.pi, _pick(cfg.count, 13))
    rep = GadgetReport("rotated-w", {"n": n, "grid": len(grid)}, cfg.seed)
    rng = make_rng(cfg.seed)
    dual = conv = decay = 0.0
    for beta in grid:
        psi = rotated_w(n, beta)
        direct = felinity(psi)
        dual = max(dual, abs(direct - dicke_basis_felinity(dicke_coefficients(psi))))
        # Z-commuting factors around R_y(beta) leave felinity unchanged
        rz = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 2)))
        u = rz @ np.array([[math.cos(beta / 2), math.sin(beta / 2)], [-math.sin(beta / 2), math.cos(beta / 2)]]) @ rz.conj()
        other = felinity(rotated_w(n, beta, SingleQubitUnitary.from_matrix(u)))
        conv = max(conv, abs(direct - other))
        decay = max(decay, direct - rotated_w_decay_bound(n))
    rep.check("dual_path", dual, "<=", 0.0, cfg.tol)
    rep.check("convention_independence", conv, "<=", 0.0, cfg.tol)
    rep.check("decay_bound_excess", decay, "<=", 0.0, informational=True)
    rep.check("beta_zero", felinity(rotated_w(n, 0.0)), "==", 0.0, 1e-12)
    if n <= 8:
        rep.check("dense_oracle", abs(felinity_dense(rotated_w(n, 1.0)) - felinity(rotated_w(n, 1.0))), "<=", 0.0, cfg.tol)
    return rep


def verify_post_process(cfg: ExperimentConfig) -> GadgetReport:
    n = _pick(cfg.n, 3)
    m = _pick(cfg.k, 3)
    rng = make_rng(cfg.seed)
    dist = {}
    for x in range(2**n):
        p = rng.dirichlet(np.ones(2**m))
        dist[x] = {y: float(p[y]) for y in range(2**m)}

    def post(y):
        return int(bin(y).count("1") * 2 > m)

    def g(x):
        return int(bin(x).count("1") * 2 > n)

    rep = ac0_postprocess_contract(dist, post, g, n, cfg.seed)
    # brute-force expectation over (x, y) pairs
    brute = sum(p * (1 if post(y) == g(x) else -1) for x in range(2**n) for y, p in dist[x].items()) / 2**n
    rep.check("brute_force", abs(brute - rep.measured["correlation"]), "<=", 0.0, 1e-12)
    exact = {x: {int(g(x)) * (2**m - 1): 1.0} for x in range(2**n)}
    perfect = ac0_postprocess_contract(exact, post, g, n)
    rep.check("perfect_contract", perfect.measured["correlation"], "==", 1.0, 1e-12)
    return rep


VERIFIERS: dict[str, tuple[str, Callable[[ExperimentConfig], GadgetReport]]] = {
    "clean-comp": ("clean computation amplitudes p_b(x) on random circuits", verify_clean_comp),
    "psi-star": ("Fourier mass moved onto Hamming slices, bilinear extraction", verify_psi_star),
    "tk-extract": ("|T_k> support and Hadamard-basis form", verify_tk_extract),
    "fel-par": ("felinity of a prepared state equals parity correlation", verify_fel_par),
    "lipschitz": ("felinity is 8-Lipschitz in trace distance, range [0, 1]", verify_lipschitz),
    "monotone": ("tracing out a qubit never lowers felinity; product-state bound", verify_monotone),
    "dicke-layer": ("block-reflection layer on a Dicke state", verify_dicke_layer),
    "partition": ("random block partition hit probability", verify_partition),
    "amp-amp": ("single-round exact amplification and skewed branches", verify_amp_amp),
    "w-chain": ("zero/W preparation, controlled W, uncompute W, poor man's fanout", verify_w_chain),
    "weak-copy": ("weak-copy test output law against simulation", verify_weak_copy),
    "approx-t": ("APPROX_t acceptance at the design parameters", verify_approx_t),
    "majority-corr": ("threshold-ladder majority correlation and loss terms", verify_majority_corr),
    "rotated-w": ("rotated-W felinity, dual path and decay", verify_rotated_w),
    "post-process": ("classical post-processing contract", verify_post_process),
}


def run_verification(cfg: ExperimentConfig) -> GadgetReport:
    if cfg.lemma_id not in VERIFIERS:
        raise KeyError(cfg.lemma_id)
    return VERIFIERS[cfg.lemma_id][1](cfg)


# ---------------------------------------------------------------- bundle


def default_suite() -> list[ExperimentConfig]:
    return [
        ExperimentConfig("clean-comp", n=2, count=50),
        ExperimentConfig("psi-star", n=3, count=50),
        ExperimentConfig("tk-extract", n=4),
        ExperimentConfig("fel-par", n=4, count=20),
        ExperimentConfig("lipschitz", n=4),
        ExperimentConfig("monotone", n=5),
        ExperimentConfig("dicke-layer", n=8, k=4),
        ExperimentConfig("partition", n=12, k=6, extra={"blocks": 2}),
        ExperimentConfig("amp-amp", n=2),
        ExperimentConfig("w-chain", n=4),
        ExperimentConfig("weak-copy", n=6, t=3),
        ExperimentConfig("approx-t", n=256, t=128, a=4),
        ExperimentConfig("majority-corr", n=255, a=2),
        ExperimentConfig("rotated-w", n=8),
        ExperimentConfig("post-process", n=3, k=3),
    ]


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_bundle(configs: list[ExperimentConfig], out: Path, jobs: int = 1, tables: bool = True) -> dict:
    """Run every config, write one JSON per run plus summary.json and sweep CSVs."""
    out = Path(out)
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            reports = list(pool.map(run_verification, configs))
    else:
        reports = [run_verification(c) for c in configs]
    entries = []
    for i, (cfg, rep) in enumerate(zip(configs, reports)):
        name = f"{i:02d}-{cfg.lemma_id}.json"
        write_atomic(out / name, rep.to_json())
        entries.append({"file": name, "lemma_id": cfg.lemma_id, "seed": cfg.seed, "passed": rep.passed,
                        "failures": rep.failures(), "config": asdict(cfg)})
    if tables:
        write_atomic(out / "weak_copy.csv", rows_to_csv(weak_copy_table(8, list(range(9)))))
        _, res = majority_report(255, 2.0)
        write_atomic(out / "majority.csv", rows_to_csv(res.table()))
    summary = {
        "tool": "qaclab",
        "version": __version__,
        "runs": len(entries),
        "passed_runs": sum(e["passed"] for e in entries),
        "passed": all(e["passed"] for e in entries),
        "entries": entries,
    }
    write_atomic(out / "summary.json", dumps(summary))
    return summary
