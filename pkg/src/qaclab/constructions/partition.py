"""Random block partitions and the exact probability that every block is hit."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..corpus import make_rng
from ..fourier import popcounts
from ..report import GadgetReport

EXHAUSTIVE_MAX_N = 20


class PartitionError(ValueError):
    pass


def log2_clamped(k: int) -> float:
    return math.log2(k) if k > 1 else 0.0


def block_count(k: int) -> int:
    """max(1, floor(k / log2(k)^2)); k = 1 has log2 k = 0 and takes one block."""
    lg = log2_clamped(k)
    return max(1, math.floor(k / lg**2)) if lg > 0 else 1


def block_partition(n: int, k: int, seed: int, n_blocks: int | None = None) -> list[list[int]]:
    """Uniformly permute [n] and cut it into near-equal contiguous pieces."""
    if not 1 <= k <= n:
        raise PartitionError(f"need 1 <= k <= n, got k={k}, n={n}")
    ell = block_count(k) if n_blocks is None else n_blocks
    if ell < 1 or ell > n:
        raise PartitionError(f"block count {ell} outside [1, {n}]")
    perm = make_rng(seed).permutation(n)
    return [sorted(int(q) for q in part) for part in np.array_split(perm, ell)]


def _check_blocks(n: int, subsets: Sequence[Sequence[int]]) -> None:
    flat = [q for s in subsets for q in s]
    if sorted(flat) != list(range(n)) or any(len(s) == 0 for s in subsets):
        raise PartitionError("blocks must be nonempty and partition range(n)")


def hit_count(n: int, w: int, sizes: Sequence[int]) -> int:
    """Weight-w strings with a 1 in every block, by inclusion-exclusion over missed blocks."""
    total = 0
    for r in range(len(sizes) + 1):
        for missed in itertools.combinations(sizes, r):
            total += (-1) ** r * math.comb(n - sum(missed), w)
    return total


def all_blocks_hit_probability(n: int, k: int, subsets: Sequence[Sequence[int]]) -> Fraction:
    """Exact Pr[every block contains a 1] for x uniform on strings of weight >= k."""
    _check_blocks(n, subsets)
    sizes = [len(s) for s in subsets]
    hit = sum(hit_count(n, w, sizes) for w in range(k, n + 1))
    slice_size = sum(math.comb(n, w) for w in range(k, n + 1))
    return Fraction(hit, slice_size)


def all_blocks_hit_exhaustive(n: int, k: int, subsets: Sequence[Sequence[int]]) -> Fraction:
    """Same probability by enumerating all 2^n strings (n <= 20)."""
    if n > EXHAUSTIVE_MAX_N:
        raise PartitionError(f"exhaustive enumeration capped at n={EXHAUSTIVE_MAX_N}")
    _check_blocks(n, subsets)
    xs = np.arange(2**n, dtype=np.int64)
    in_slice = popcounts(n) >= k
    ok = in_slice.copy()
    for s in subsets:
        mask = sum(1 << q for q in s)
        ok &= (xs & mask) != 0
    return Fraction(int(ok.sum()), int(in_slice.sum()))


def partition_report(n: int, k: int, seed: int, n_blocks: int | None = None) -> GadgetReport:
    blocks = block_partition(n, k, seed, n_blocks)
    ell = len(blocks)
    rep = GadgetReport("partition", {"n": n, "k": k, "blocks": ell, "log_base": 2}, seed)
    if k <= 2 and n_blocks is None:
        rep.notes.append("k <= 2: log2 k <= 1, block count clamped to max(1, floor)")
    prob = all_blocks_hit_probability(n, k, blocks)
    rep.record("block_sizes", [len(b) for b in blocks])
    rep.record("probability", float(prob))
    if n <= EXHAUSTIVE_MAX_N:
        brute = all_blocks_hit_exhaustive(n, k, blocks)
        rep.require("exhaustive_agrees", brute == prob)
    if ell == 1:
        rep.require("single_block_certain", prob == 1)
    rep.check("large_k_bound", float(prob), ">=", 0.9, informational=True)
    return rep
