"""Seeded Monte Carlo check of the analytic fidelity engine.

Every trial draws per-qudit uniforms for channel loss, storage
depolarization and stored-survivor errors, then replays the same decode
rules as the analytic model. The generator is Philox (counter-based,
documented, reproducible across platforms); trials are processed in
fixed blocks of ``BLOCK_TRIALS`` and block b uses ``key = seed XOR b``,
so totals are bit-identical no matter how blocks are grouped across
workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fidelity import (
    QRS,
    Configuration,
    FidelityParams,
    Unencoded,
    memory_depolarization_prob,
)
from .netmodel import ParameterError

__all__ = ["GENERATOR_NAME", "BLOCK_TRIALS", "TrialPlan", "Estimate",
           "simulate_unencoded", "simulate_encoded", "simulate", "simulate_chunked"]

GENERATOR_NAME = "philox4x64"
BLOCK_TRIALS = 1 << 16


@dataclass(frozen=True)
class TrialPlan:
    """A reproducible Monte Carlo run: same plan, bit-identical estimate."""

    config: Configuration
    params: FidelityParams
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error."""

    mean: float
    std_error: float
    trials: int
    generator: str = GENERATOR_NAME


def _block_rng(seed: int, block: int) -> np.random.Generator:
    key = (int(seed) ^ int(block)) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(key=key))


def _block_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, BLOCK_TRIALS)
    return [BLOCK_TRIALS] * full + ([rest] if rest else [])


def _unencoded_block(plan: TrialPlan, block: int, size: int) -> tuple[float, float]:
    """Outcome sum and sum of squares for one block of unencoded trials."""
    config, params = plan.config, plan.params
    dim = config.coding.dimension
    base = min(d for d, c in zip(params.dwell_s, config.counts) if c > 0)
    rng = _block_rng(plan.seed, block)
    outcome = np.ones(size)
    for count, p, dwell in zip(config.counts, params.p, params.dwell_s):
        if count == 0:
            continue
        p_d = memory_depolarization_prob(max(dwell - base, 0.0), params.T2_s)
        u_loss = rng.random((count, size))
        outcome[np.any(u_loss >= p, axis=0)] = 0.0
        u_dep = rng.random((count, size))
        depolarized = (u_dep < p_d).sum(axis=0)
        outcome = outcome * (1.0 / dim) ** depolarized
    return float(outcome.sum()), float((outcome * outcome).sum())


def _encoded_block(plan: TrialPlan, block: int, size: int) -> tuple[float, float]:
    """Success count (and square sum) for one block of QRS trials."""
    config, params = plan.config, plan.params
    n = config.coding.n
    t = config.coding.tolerance
    err_scale = 1.0 - 1.0 / n**2
    counts = config.counts
    occupied = [l for l, c in enumerate(counts) if c > 0]

    rng = _block_rng(plan.seed, block)
    losses = {}
    u_err = {}
    for l in occupied:
        losses[l] = (rng.random((counts[l], size)) >= params.p[l]).sum(axis=0)
        u_err[l] = rng.random((counts[l], size))

    # Earliest occupied arrival where the erasure bound holds.
    decode_at = np.full(size, -1, dtype=np.int64)
    erasures = np.zeros(size, dtype=np.int64)
    seen = np.zeros(size, dtype=np.int64)
    for idx, l in enumerate(occupied):
        seen = seen + losses[l]
        pending = sum(counts[m] for m in occupied[idx + 1:])
        e_here = seen + pending
        newly = (decode_at < 0) & (e_here <= t)
        decode_at[newly] = idx
        erasures[newly] = e_here[newly]

    success = decode_at == 0
    for idx in range(1, len(occupied)):
        sel = decode_at == idx
        if not sel.any():
            continue
        ref = occupied[idx]
        u_total = np.zeros(size, dtype=np.int64)
        for l in occupied[:idx]:
            dwell = max(params.dwell_s[l] - params.dwell_s[ref], 0.0)
            q = memory_depolarization_prob(dwell, params.T2_s) * err_scale
            survivor = np.arange(counts[l])[:, None] < (counts[l] - losses[l])[None, :]
            u_total += ((u_err[l] < q) & survivor).sum(axis=0)
        success = np.where(sel, 2 * u_total + erasures <= t, success)

    outcome = success.astype(np.float64)
    return float(outcome.sum()), float((outcome * outcome).sum())


def _kernel(plan: TrialPlan):
    if isinstance(plan.config.coding, QRS):
        return _encoded_block
    if isinstance(plan.config.coding, Unencoded):
        return _unencoded_block
    raise ParameterError(f"unknown coding: {plan.config.coding!r}")


def _combine(total: float, total_sq: float, trials: int) -> Estimate:
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    return Estimate(mean=mean, std_error=math.sqrt(var / trials), trials=trials)


def simulate(plan: TrialPlan) -> Estimate:
    """Run the full plan and return mean with standard error."""
    kernel = _kernel(plan)
    total = 0.0
    total_sq = 0.0
    for block, size in enumerate(_block_sizes(plan.trials)):
        s, sq = kernel(plan, block, size)
        total += s
        total_sq += sq
    return _combine(total, total_sq, plan.trials)


def simulate_unencoded(plan: TrialPlan) -> Estimate:
    """Sample the fidelity of an unencoded packet.

    Per trial each qudit survives its channel independently; any loss
    zeroes the outcome. Each stored qudit (on paths that wait for a
    slower occupied path) contributes factor 1/D with probability p_d,
    else 1, matching the analytic expectation (1 - p_d) + p_d / D.
    """
    if not isinstance(plan.config.coding, Unencoded):
        raise ParameterError("simulate_unencoded requires an Unencoded configuration")
    return simulate(plan)


def simulate_encoded(plan: TrialPlan) -> Estimate:
    """Sample the decode success of a QRS codeword.

    Per trial each qudit is lost independently; decoding happens at the
    earliest occupied-path arrival whose erasure count (in-flight qudits
    included) is within tolerance. Survivors stored until then pick up
    unlocated errors with probability p_d * (1 - 1/n^2); the trial
    succeeds iff 2u + e <= t.
    """
    if not isinstance(plan.config.coding, QRS):
        raise ParameterError("simulate_encoded requires a QRS configuration")
    return simulate(plan)


def simulate_chunked(plan: TrialPlan, n_chunks: int) -> Estimate:
    """Run the plan as ``n_chunks`` groups of whole blocks.

    Each block's stream depends only on (seed, block index), so any
    chunk count combines, by exact summation of per-chunk sums, to the
    same totals as a single run. This is the contract a parallel
    executor must follow.
    """
    if n_chunks < 1:
        raise ParameterError(f"n_chunks must be >= 1, got {n_chunks}")
    kernel = _kernel(plan)
    sizes = _block_sizes(plan.trials)
    bounds = [round(i * len(sizes) / n_chunks) for i in range(n_chunks + 1)]
    total = 0.0
    total_sq = 0.0
    for i in range(n_chunks):
        # One worker's share: a contiguous run of whole blocks.
        for block in range(bounds[i], bounds[i + 1]):
            s, sq = kernel(plan, block, sizes[block])
            total += s
            total_sq += sq
    return _combine(total, total_sq, plan.trials)
