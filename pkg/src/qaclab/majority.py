"""Weak-copy threshold tests, the amplified APPROX_t discriminator, and the exact
correlation of the threshold-ladder majority circuit.

Only the weak-copy circuit is simulated as a statevector. Amplification
stages are exact probability computations over independent copies, and the
classical approximate-majority step is replaced by its input/output contract:
output 1 when fewer than 0.7 m of the m OR-blocks fire, 0 when more than 0.8 m
do, anything in between.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import stats

from .circuit import PLUS, ZERO, Circuit, CircuitBuilder, reflection
from .constructions.amplification import reflection_from_prep
from .constructions.wchain import any_0w, place, poor_mans_fanout, product_vector
from .report import GadgetReport
from .sim import Statevector, evolve, require_cap

BUDGET = 10**7  # max (thresholds x weights x block count) work units


class MajorityError(ValueError):
    pass


# ---------------------------------------------------------------- weak copy


@dataclass(frozen=True)
class WeakCopyParams:
    n: int
    t: float
    r: float = field(init=False)
    alpha_t: float = field(init=False)
    gamma_t: float = field(init=False)
    s: float = field(init=False)
    a: float = field(init=False)
    b: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        n, t = self.n, self.t
        if n < 2 or not 0 <= t <= n:
            raise MajorityError(f"need n >= 2 and 0 <= t <= n, got n={n}, t={t}")
        r = math.sqrt(1 - 1 / n)
        alpha_t = r**t
        gamma_t = (t / n) * r ** (t - 1)
        s = math.hypot(alpha_t, gamma_t)
        vals = {
            "r": r,
            "alpha_t": alpha_t,
            "gamma_t": gamma_t,
            "s": s,
            "a": math.sqrt((s - gamma_t) / (2 * s)),
            "b": math.sqrt((s + gamma_t) / (2 * s)),
            "lam": lambda_t(n, t),
        }
        for k, v in vals.items():
            object.__setattr__(self, k, v)

    def invariant_errors(self) -> dict:
        a, b, s = self.a, self.b, self.s
        return {
            "norm": abs(a * a + b * b - 1),
            "cos": abs(1 - 2 * a * a - self.gamma_t / s),
            "sin": abs(2 * a * b - self.alpha_t / s),
        }


def lambda_t(n: int, t: float) -> float:
    return math.exp(-t / n) / (1 + (t / n) ** 2)


def weak_copy_prob(n: int, t: float, ell: int) -> float:
    """Exact Pr[output 1] of the weak-copy test on a weight-``ell`` input."""
    if not 0 <= ell <= n:
        raise MajorityError(f"weight {ell} outside [0, {n}]")
    r2 = 1 - 1 / n
    return ((t - ell) / n) ** 2 * r2**ell / (r2 + (t / n) ** 2)


def weak_copy_asymptotic(n: int, t: float, ell: int) -> float:
    """lambda_t ((ell - t)/n)^2, the leading-order form."""
    return lambda_t(n, t) * ((ell - t) / n) ** 2


def weak_copy_circuit(n: int, t: float) -> Circuit:
    """(I - 2|0^n><0^n| (x) |+><+|_o) R on the weak copy 0..n-1 and output o = n.

    R reflects about a|0^n> + b|W_n>, using helper qubits n+1..n+3 that end clean.
    """
    p = WeakCopyParams(n, t)
    require_cap(n + 4)
    prep = any_0w(n, p.a, p.b)
    refl = reflection_from_prep(prep, targets=range(n))
    b = CircuitBuilder(n, 4, output=n)
    b.extend(refl, [*range(n), n + 1, n + 2, n + 3])
    b.layer(reflection([*range(n), n], [ZERO] * n + [PLUS]))
    return b.build()


def weak_copy_input(n_total: int, bits: Sequence[int]) -> Statevector:
    """|x_1/n> ... |x_n/n> on qubits 0..n-1, everything else |0>."""
    n = len(bits)
    parts = [([i], product_vector(x / n, 1)) for i, x in enumerate(bits)]
    return place(n_total, parts)


def simulate_weak_copy(n: int, t: float) -> np.ndarray:
    """Born probability of output 1 for every weight 0..n (one input per weight, batched)."""
    c = weak_copy_circuit(n, t)
    N = c.n_qubits
    cols = [weak_copy_input(N, [1] * ell + [0] * (n - ell)).amplitudes for ell in range(n + 1)]
    out = evolve(c, np.stack(cols, axis=1))
    ones = ((np.arange(2**N) >> c.output) & 1).astype(bool)
    return np.sum(np.abs(out[ones]) ** 2, axis=0)


def weak_copy_report(n: int, t: float, tol: float = 1e-9, seed: int | None = None) -> GadgetReport:
    rep = GadgetReport("weak-copy", {"n": n, "t": t}, seed)
    p = WeakCopyParams(n, t)
    for k, v in p.invariant_errors().items():
        rep.check(f"params.{k}", v, "<=", 0.0, 1e-12)
    rep.check("lambda_range_low", p.lam, ">=", math.exp(-1) / 2, 1e-12)
    rep.check("lambda_range_high", p.lam, "<=", 1.0, 1e-12)
    sim = simulate_weak_copy(n, t)
    formula = np.array([weak_copy_prob(n, t, ell) for ell in range(n + 1)])
    rep.check("max_formula_error", float(np.max(np.abs(sim - formula))), "<=", 0.0, tol)
    rep.record("probabilities", [float(v) for v in formula])
    if float(t).is_integer():
        rep.check("zero_at_threshold", float(sim[int(t)]), "<=", 0.0, tol)
    c = weak_copy_circuit(n, t)
    refl = c.layers[: -1]
    twice = Circuit(c.n_inputs, c.n_ancilla, None, refl + refl)
    v = weak_copy_input(c.n_qubits, [1] + [0] * (n - 1))
    back = evolve(twice, v.amplitudes)
    rep.check("reflection_involution", float(1 - abs(np.vdot(v.amplitudes, back)) ** 2), "<=", 0.0, tol)
    return rep


def weak_copy_table(n: int, t_values: Sequence[float]) -> list[tuple]:
    return [(n, t, ell, weak_copy_prob(n, t, ell)) for t in t_values for ell in range(n + 1)]


def fanout_weak_copy_crosscheck(bits: Sequence[int], t: float, copies: int = 1) -> dict:
    """Full simulation: poor man's fanout on each input bit, then ``copies`` weak-copy tests.

    Copy u of the encoded input collects output u of every fanout. Returns the
    simulated joint distribution of the test outputs and the product prediction.
    """
    n = len(bits)
    if copies > n:
        raise MajorityError("at most n weak copies per fanout")
    fan = poor_mans_fanout(n)
    test = weak_copy_circuit(n, t)
    fsize, tsize = fan.n_qubits, test.n_qubits
    total = n * fsize + copies * (tsize - n)
    require_cap(total)
    b = CircuitBuilder(0, total)
    for i in range(n):
        b.extend(fan, range(i * fsize, (i + 1) * fsize))
    outs = []
    for u in range(copies):
        base = n * fsize + u * (tsize - n)
        data = [i * fsize + 1 + u for i in range(n)]
        b.extend(test, [*data, *range(base, base + tsize - n)])
        outs.append(base)
    c = b.build()
    init = place(total, [([i * fsize], product_vector(float(x), 1)) for i, x in enumerate(bits)])
    psi = evolve(c, init.amplitudes)
    probs = np.abs(psi) ** 2
    idx = np.arange(2**total)
    joint = np.zeros(2**copies)
    key = np.zeros_like(idx)
    for j, o in enumerate(outs):
        key |= ((idx >> o) & 1) << j
    np.add.at(joint, key, probs)
    q = weak_copy_prob(n, t, sum(bits))
    pred = np.array([math.prod(q if (k >> j) & 1 else 1 - q for j in range(copies)) for k in range(2**copies)])
    return {"simulated": joint, "predicted": pred, "qubits": total}


# ---------------------------------------------------------------- APPROX_t


@dataclass(frozen=True)
class ApproxTDesign:
    n: int
    t: float
    a: float
    d: float
    lam: float
    r_reps: int
    m_reps: int
    s_copies: int

    @classmethod
    def build(cls, n: int, t: float, a: float, d: float = 8.0) -> "ApproxTDesign":
        if n < 2 or a <= 0 or d <= 0:
            raise MajorityError("need n >= 2, a > 0, d > 0")
        lam = lambda_t(n, t)
        r_reps = math.ceil(3 * n * a * a / lam)
        m_reps = max(1, math.ceil(d * math.log2(n)))
        s_copies = math.ceil(r_reps * m_reps / n)
        return cls(n, t, a, d, lam, r_reps, m_reps, s_copies)

    @property
    def low_cut(self) -> int:
        """Largest block count strictly below 0.7 m."""
        return (7 * self.m_reps - 1) // 10

    @property
    def high_cut(self) -> int:
        """Smallest block count strictly above 0.8 m."""
        return (8 * self.m_reps) // 10 + 1


def block_fire_prob(q: float, r_reps: int) -> float:
    """Pr[OR of r independent Bernoulli(q)] = 1 - (1-q)^r."""
    if q >= 1:
        return 1.0
    return float(-math.expm1(r_reps * math.log1p(-q)))


def approx_t_bounds(design: ApproxTDesign, ell: int) -> tuple[float, float]:
    """(lowest, highest) possible Pr[output 1] over post-processors meeting the contract."""
    w = block_fire_prob(weak_copy_prob(design.n, design.t, ell), design.r_reps)
    m = design.m_reps
    surely_one = float(stats.binom.cdf(design.low_cut, m, w))
    surely_zero = float(stats.binom.sf(design.high_cut - 1, m, w))
    return surely_one, 1.0 - surely_zero


def approx_t_accept_prob(design: ApproxTDesign, ell: int) -> float:
    """Pr[output 1] with the undetermined region counted as output 0."""
    return approx_t_bounds(design, ell)[0]


def approx_t_reject_prob(design: ApproxTDesign, ell: int) -> float:
    """Pr[output 0] with the undetermined region counted as output 1."""
    return 1.0 - approx_t_bounds(design, ell)[1]


def approx_t_report(n: int, t: float, a: float, d: float = 8.0, seed: int | None = None) -> GadgetReport:
    design = ApproxTDesign.build(n, t, a, d)
    rep = GadgetReport("approx-t", {"n": n, "t": t, "a": a, "d": d}, seed)
    rep.record("r_reps", design.r_reps)
    rep.record("m_reps", design.m_reps)
    rep.record("s_copies", design.s_copies)
    rep.record("lambda_t", design.lam)
    inner, outer = math.sqrt(n) / (2 * a), math.sqrt(n) / a
    worst_in, worst_out = 1.0, 0.0
    accept = []
    factors_out = []
    for ell in range(n + 1):
        lo, hi = approx_t_bounds(design, ell)
        accept.append(lo)
        if abs(ell - t) < inner:
            worst_in = min(worst_in, lo)
        elif abs(ell - t) > outer:
            worst_out = max(worst_out, hi)
        if ell != t:
            f = weak_copy_prob(n, t, ell) / weak_copy_asymptotic(n, t, ell)
            if not 2 / 3 <= f <= 4 / 3 and abs(ell - t) <= outer * 4:
                factors_out.append(ell)
    rep.check("inside_accept", worst_in, ">=", 1 - 1 / n)
    rep.check("outside_accept", worst_out, "<=", 1 / n)
    rep.record("correction_factor_outside_window", factors_out)
    window = math.sqrt(n) * math.log2(n) ** 2
    rep.check("monotone_violation", monotone_violation(t, accept, window), "<=", 0.0, 1e-12)
    return rep


def monotone_violation(t: float, values: Sequence[float], window: float) -> float:
    """Largest increase of ``values`` as |ell - t| grows, within the window."""
    worst = 0.0
    for ell in range(len(values) - 1):
        # step away from t on each side
        if ell >= t and ell + 1 - t <= window:
            worst = max(worst, values[ell + 1] - values[ell])
        if ell + 1 <= t and t - ell <= window:
            worst = max(worst, values[ell] - values[ell + 1])
    return worst


# ---------------------------------------------------------------- majority


@dataclass
class MajorityResult:
    n: int
    a: float
    d: float
    c_prime: float
    gamma: float
    eta: float
    L: float
    t_plus: list[float]
    t_minus: list[float]
    weights: np.ndarray  # Pr[|x| = ell]
    corr_by_weight: np.ndarray  # pessimistic 2 Pr[agree | ell] - 1
    region: list[str]
    degenerate: bool

    @property
    def correlation(self) -> float:
        return float(np.dot(self.weights, self.corr_by_weight))

    def loss_terms(self) -> dict:
        """Disagreement mass per region; they add up to (1 - correlation)/2."""
        miss = self.weights * (1 - self.corr_by_weight) / 2
        out = {"test": 0.0, "central": 0.0, "tail": 0.0}
        for ell, reg in enumerate(self.region):
            out[reg] += float(miss[ell])
        return out

    def region_mass(self) -> dict:
        out = {"test": 0.0, "central": 0.0, "tail": 0.0}
        for ell, reg in enumerate(self.region):
            out[reg] += float(self.weights[ell])
        return out

    def table(self) -> list[tuple]:
        agree = (1 + self.corr_by_weight) / 2
        return [(self.n, f"a={self.a:g};d={self.d:g}", ell, float(agree[ell])) for ell in range(self.n + 1)]


def ladder(n: int, a: float, c_prime: float = 1.0) -> tuple[list[float], list[float], float, float, float]:
    gamma = math.sqrt(n) / a
    eta = math.sqrt(n) / (2 * a)
    L = c_prime * math.log2(n) * math.sqrt(n)
    steps = int(math.floor(L / eta + 1e-12))
    plus = [n / 2 + j * eta for j in range(1, steps + 1) if n / 2 + j * eta <= n]
    minus = [n / 2 - j * eta for j in range(1, steps + 1) if n / 2 - j * eta >= 0]
    return plus, minus, gamma, eta, L


def weight_region(n: int, ell: int, gamma: float, L: float) -> str:
    dev = abs(ell - n / 2)
    if dev <= gamma:
        return "central"
    if dev > L:
        return "tail"
    return "test"


def _any_fires(probs: np.ndarray) -> np.ndarray:
    """1 - prod(1 - p) along the threshold axis, stable for small p."""
    with np.errstate(divide="ignore"):
        return -np.expm1(np.sum(np.log1p(-probs), axis=0))


def majority_circuit_correlation(n: int, a: float, d: float = 8.0, c_prime: float = 1.0, mirrored: bool = False) -> MajorityResult:
    """Exact per-weight pessimistic correlation of the threshold-ladder circuit with MAJ_n.

    ``mirrored`` evaluates the circuit that complements its input, runs the same
    tests, and lets the lower ladder vote for 1; by symmetry it has the same
    correlation.
    """
    plus, minus, gamma, eta, L = ladder(n, a, c_prime)
    if (len(plus) + len(minus)) * (n + 1) * max(1, math.ceil(d * math.log2(n))) > BUDGET:
        raise MajorityError("parameter choice exceeds the compute budget")
    lo = {}
    hi = {}
    for t in sorted(set(plus) | set(minus)):
        design = ApproxTDesign.build(n, t, a, d)
        pairs = [approx_t_bounds(design, ell) for ell in range(n + 1)]
        lo[t] = np.array([p[0] for p in pairs])
        hi[t] = np.array([p[1] for p in pairs])
    ells = np.arange(n + 1)
    weights = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float) / 2.0**n
    corr = np.zeros(n + 1)
    for ell in ells:
        seen = n - ell if mirrored else ell
        maj_one = ell > n / 2
        right, wrong = (plus, minus) if (maj_one != mirrored) else (minus, plus)
        a_lo = _any_fires(np.array([[lo[t][seen]] for t in right])) if right else np.zeros(1)
        b_hi = _any_fires(np.array([[hi[t][seen]] for t in wrong])) if wrong else np.zeros(1)
        corr[ell] = float(a_lo[0] - b_hi[0])
    region = [weight_region(n, int(ell), gamma, L) for ell in ells]
    return MajorityResult(n, a, d, c_prime, gamma, eta, L, plus, minus, weights, corr, region, gamma >= n / 2)


def majority_report(n: int, a: float, d: float = 8.0, c_prime: float = 1.0, seed: int | None = None) -> tuple[GadgetReport, MajorityResult]:
    res = majority_circuit_correlation(n, a, d, c_prime)
    rep = GadgetReport("majority-corr", {"n": n, "a": a, "d": d, "c_prime": c_prime, "log_base": 2}, seed)
    corr = res.correlation
    rep.record("correlation", corr)
    rep.record("thresholds", len(res.t_plus) + len(res.t_minus))
    rep.record("degenerate", res.degenerate)
    if res.degenerate:
        rep.notes.append("gamma >= n/2: every weight lies in the central band")
    loss = res.loss_terms()
    mass = res.region_mass()
    for k in ("test", "central", "tail"):
        rep.record(f"loss.{k}", loss[k])
        rep.record(f"mass.{k}", mass[k])
    rep.check("loss_sum", sum(loss.values()), "==", (1 - corr) / 2, 1e-12)
    rep.check("coin_floor", corr, ">=", 0.0, informational=not res.degenerate)
    k = len(res.t_plus) + len(res.t_minus)
    rep.check("test_loss_bound", loss["test"], "<=", k / n, informational=True)
    rep.check("tail_mass_bound", mass["tail"], "<=", 2 * math.exp(-2 * res.L**2 / n), informational=True)
    rep.record("central_scale", res.gamma / math.sqrt(n))
    rep.check("asymptotic_target", corr, ">=", 1 - 1 / a, informational=True)
    mirror = majority_circuit_correlation(n, a, d, c_prime, mirrored=True).correlation
    rep.check("mirror_symmetry", abs(mirror - corr), "<=", 0.0, 1e-12)
    return rep, res


# ---------------------------------------------------------------- post-processing


def ac0_postprocess_contract(
    dist: Mapping[int, Mapping[int, float]],
    post_fn: Callable[[int], int],
    g_target: Callable[[int], int],
    n: int,
    seed: int | None = None,
) -> GadgetReport:
    """Correlation of post_fn(y), y ~ dist[x], with g(x) over uniform x in {0,1}^n.

    ``dist[x]`` maps outcome strings to probabilities. Computed once through
    per-input agreement and once through the expected sign product.
    """
    rep = GadgetReport("post-process", {"n": n}, seed)
    agree = np.zeros(2**n)
    signed = 0.0
    for x in range(2**n):
        gx = g_target(x)
        for y, p in dist[x].items():
            hit = post_fn(y) == gx
            agree[x] += p * hit
            signed += p * (1 if hit else -1)
    corr = float(np.mean(2 * agree - 1))
    delta = float(np.max(1 - agree))
    rep.record("max_delta", delta)
    rep.record("correlation", corr)
    rep.check("sign_product_path", abs(signed / 2**n - corr), "<=", 0.0, 1e-12)
    rep.check("closure_bound", corr, ">=", 1 - 2 * delta, 1e-12)
    return rep


# ---------------------------------------------------------------- CSV


def rows_to_csv(rows: Sequence[tuple], header=("n", "t_or_design", "l", "probability")) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for n, t, ell, p in rows:
        t_text = f"{t:.17g}" if isinstance(t, float) else str(t)
        buf.write(f"{n},{t_text},{ell},{p:.17g}\n")
    return buf.getvalue()
