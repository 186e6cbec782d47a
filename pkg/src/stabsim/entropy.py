"""Seedable randomness and fast Bernoulli sampling.

Two mechanisms cover the whole probability range: gap sampling, which walks
from hit to hit with geometric jumps at expected cost O(np + 1), and a
truncated-plus-refinement hybrid that draws one byte per trial for the
8-bit truncation of p and ORs in a sparse refinement correction.  Above
one half the complement is sampled and inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bitvec import BitBuffer

# Dispatch thresholds: below the cutoff gap sampling wins, above it the
# byte-compare hybrid; probabilities past one half go through the
# complement.  The refinement part of a split is always below the cutoff.
GEOMETRIC_CUTOFF = 0.02


def make_rng(seed=None) -> np.random.Generator:
    """A seedable 64-bit pseudorandom generator; OS entropy when unseeded."""
    return np.random.default_rng(seed)


def random_bits(rng: np.random.Generator, count: int) -> int:
    """`count` independent fair bits packed into an int."""
    if count <= 0:
        return 0
    return int.from_bytes(rng.bytes((count + 7) // 8), "little") & ((1 << count) - 1)


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class ProbabilitySplit:
    """Decomposition p = 1 - (1 - p_trunc)(1 - p_refine).

    p_trunc is the largest multiple of 2**-8 not exceeding p, cheap to
    sample with one byte per trial; p_refine is the small leftover, cheap
    to sample by gap walking.  ORing the two bit streams recovers p.
    """

    p: float
    p_trunc: float = field(init=False)
    p_refine: float = field(init=False)

    def __post_init__(self):
        p = _check_probability(self.p)
        trunc = math.floor(256.0 * p) / 256.0
        refine = 0.0 if trunc >= 1.0 else (p - trunc) / (1.0 - trunc)
        object.__setattr__(self, "p_trunc", trunc)
        object.__setattr__(self, "p_refine", refine)


def sample_hits_geometric(num_trials: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in [0, num_trials) that hit, each independently with probability p.

    Generated by cumulating geometric gaps drawn by inverse CDF from uniform
    variates, so the expected work is proportional to the number of hits.
    """
    p = _check_probability(p)
    if p == 0.0 or num_trials <= 0:
        return np.empty(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(num_trials, dtype=np.int64)
    log1m = math.log1p(-p)
    chunks = []
    pos = -1
    while pos < num_trials:
        expect = (num_trials - pos) * p
        draw = int(expect * 1.1) + 16
        v = 1.0 - rng.random(draw)  # uniform in (0, 1]
        gaps = np.floor(np.log(v) / log1m).astype(np.int64) + 1
        positions = pos + np.cumsum(gaps)
        chunks.append(positions)
        pos = int(positions[-1])
    hits = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
    return hits[hits < num_trials]


def bernoulli_bools(count: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """`count` independent Bernoulli(p) samples as a bool array.

    Routes through gap sampling, the hybrid, or the complement depending
    on p.
    """
    p = _check_probability(p)
    if p > 0.5:
        return ~bernoulli_bools(count, 1.0 - p, rng)
    if p < GEOMETRIC_CUTOFF:
        out = np.zeros(count, dtype=bool)
        out[sample_hits_geometric(count, p, rng)] = True
        return out
    return _hybrid_bools(count, p, rng)


def _hybrid_bools(count: int, p: float, rng: np.random.Generator) -> np.ndarray:
    split = ProbabilitySplit(p)
    threshold = round(256.0 * split.p_trunc)
    out = rng.integers(0, 256, size=count, dtype=np.uint8) < threshold
    if split.p_refine > 0.0:
        out[sample_hits_geometric(count, split.p_refine, rng)] = True
    return out


def _pack_bools(bools: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bools, bitorder="little").tobytes(), "little")


def fill_bernoulli_hybrid(dst: BitBuffer, p: float, rng: np.random.Generator) -> None:
    """Fill dst with i.i.d. Bernoulli(p) bits via truncation plus refinement."""
    _check_probability(p)
    dst.bits = _pack_bools(_hybrid_bools(dst.num_bits, p, rng))


def fill_bernoulli(dst: BitBuffer, p: float, rng: np.random.Generator) -> None:
    """Fill dst with i.i.d. Bernoulli(p) bits, choosing the best strategy."""
    p = _check_probability(p)
    if p > 0.5:
        fill_bernoulli(dst, 1.0 - p, rng)
        dst.invert()
    elif p < GEOMETRIC_CUTOFF:
        dst.clear()
        hits = sample_hits_geometric(dst.num_bits, p, rng)
        if hits.size:
            bools = np.zeros(dst.num_bits, dtype=bool)
            bools[hits] = True
            dst.bits = _pack_bools(bools)
    else:
        fill_bernoulli_hybrid(dst, p, rng)
