"""Run summaries and nonparametric significance machinery.

The two-sample rank-sum test and the paired signed-rank test are
implemented from scratch because the evaluation protocol needs exact
p-values in the presence of ties (final fitnesses are often identical
zeros), which off-the-shelf exact methods refuse.  Small samples are
enumerated exactly with integer arithmetic (doubled mid-ranks), larger
ones use the tie-corrected normal approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, groupby
from typing import List, Optional, Sequence

import numpy as np

# Exact enumeration limits: C(20, 10) subsets for the rank-sum test,
# 2^25 sign patterns (counted by dynamic programming) for the signed-rank.
RANK_SUM_EXACT_LIMIT = 20
SIGNED_RANK_EXACT_LIMIT = 25

SYMBOL_MINUS = "minus"    # peer performs worse than the reference
SYMBOL_PLUS = "plus"      # peer performs better
SYMBOL_APPROX = "approx"  # no significant difference


@dataclass(frozen=True)
class FunctionSummary:
    mean: float
    std: float
    success_rate: float
    mean_nfe_to_success: Optional[float]
    rank: int = 1


@dataclass(frozen=True)
class PairwiseVerdict:
    symbol: str
    p_value: float


def summarize(final_fitnesses: Sequence[float],
              nfe_successes: Sequence[Optional[int]]) -> FunctionSummary:
    """Per-function statistics over independent runs.

    ``nfe_successes[i]`` is run i's evaluations-to-success, or None for a
    failed run; the NFE average covers successful runs only.  Std uses the
    sample divisor (n-1); a single run reports std 0.
    """
    if len(final_fitnesses) == 0:
        raise ValueError("summarize needs at least one run")
    if len(final_fitnesses) != len(nfe_successes):
        raise ValueError("fitness and NFE lists must align run-for-run")
    values = np.asarray(final_fitnesses, dtype=float)
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    hits = [int(v) for v in nfe_successes if v is not None]
    sr = len(hits) / len(values)
    nfe = float(np.mean(hits)) if hits else None
    return FunctionSummary(mean=mean, std=std, success_rate=sr, mean_nfe_to_success=nfe)


def rank_algorithms(means: Sequence[float]) -> List[int]:
    """Competition ranking of mean results: smaller is better, exact ties
    share the smallest rank of their group (0, 0, 5 -> 1, 1, 3)."""
    if len(means) == 0:
        raise ValueError("rank_algorithms needs at least one entry")
    order = sorted(range(len(means)), key=lambda i: means[i])
    ranks = [0] * len(means)
    for pos, i in enumerate(order):
        if pos > 0 and means[i] == means[order[pos - 1]]:
            ranks[i] = ranks[order[pos - 1]]
        else:
            ranks[i] = pos + 1
    return ranks


def _doubled_midranks(values: Sequence[float]) -> List[int]:
    """Mid-ranks of the pooled sample, doubled so they are exact integers."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    doubled = [0] * len(values)
    pos = 1
    for _, grp in groupby(order, key=lambda i: values[i]):
        idx = list(grp)
        t = len(idx)
        dr = 2 * pos + (t - 1)  # 2 * average of pos .. pos+t-1
        for i in idx:
            doubled[i] = dr
        pos += t
    return doubled


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def rank_sum_p_value(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value.

    Exact when the pooled size is at most RANK_SUM_EXACT_LIMIT: the p-value
    is the fraction of all C(n1+n2, n1) rank assignments whose rank sum is
    at least as far from its null mean as the observed one.  Larger samples
    use the tie-corrected normal approximation (no continuity correction).
    """
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise ValueError("rank-sum test needs at least 2 observations per sample")
    pooled = list(a) + list(b)
    doubled = _doubled_midranks(pooled)
    total = n1 + n2
    observed2 = sum(doubled[:n1])          # doubled rank sum of sample a
    mean2 = n1 * (total + 1)               # doubled null mean

    if total <= RANK_SUM_EXACT_LIMIT:
        target = abs(observed2 - mean2)
        hits = 0
        count = 0
        for subset in combinations(doubled, n1):  # positional, so ties enumerate fully
            count += 1
            if abs(sum(subset) - mean2) >= target:
                hits += 1
        return hits / count

    ties = [len(list(g)) for _, g in groupby(sorted(pooled))]
    tie_term = sum(t ** 3 - t for t in ties)
    var = n1 * n2 / 12.0 * ((total + 1) - tie_term / (total * (total - 1)))
    if var <= 0:
        return 1.0
    z = (observed2 - mean2) / (2.0 * math.sqrt(var))
    return min(1.0, 2.0 * _normal_sf(abs(z)))


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> PairwiseVerdict:
    """Verdict on peer sample ``b`` against reference sample ``a``.

    Below-alpha p-values are directed by the sample medians (minimization:
    the smaller median is the better performer); equal medians fall back to
    means, and a still-unbroken tie reports "approx".
    """
    p = rank_sum_p_value(a, b)
    if p >= alpha:
        return PairwiseVerdict(SYMBOL_APPROX, p)
    med_a, med_b = float(np.median(a)), float(np.median(b))
    if med_a == med_b:
        med_a, med_b = float(np.mean(a)), float(np.mean(b))
    if med_b > med_a:
        return PairwiseVerdict(SYMBOL_MINUS, p)
    if med_b < med_a:
        return PairwiseVerdict(SYMBOL_PLUS, p)
    return PairwiseVerdict(SYMBOL_APPROX, p)


def wilcoxon_signed_rank(paired_diffs: Sequence[float]) -> float:
    """Two-sided paired signed-rank p-value.

    Zero differences are dropped; tied magnitudes get mid-ranks.  With up
    to SIGNED_RANK_EXACT_LIMIT non-zero differences the exact two-sided
    p-value is computed by counting sign patterns (subset-sum dynamic
    programming over doubled ranks); beyond that the tie-corrected normal
    approximation is used.  All differences zero gives p = 1.
    """
    diffs = [d for d in paired_diffs if d != 0]
    n = len(diffs)
    if n == 0:
        return 1.0
    doubled = _doubled_midranks([abs(d) for d in diffs])
    total2 = sum(doubled)
    w2 = sum(r for d, r in zip(diffs, doubled) if d > 0)

    if n <= SIGNED_RANK_EXACT_LIMIT:
        # ways[s] = number of sign patterns whose positive-rank (doubled)
        # sum is s; exact integer arithmetic throughout.
        ways = np.zeros(total2 + 1, dtype=np.uint64)
        ways[0] = 1
        for r in doubled:  # doubled mid-ranks are always >= 2
            ways[r:] += ways[:-r].copy()
        target = abs(2 * w2 - total2)
        sums2 = np.arange(total2 + 1)
        hits = int(ways[np.abs(2 * sums2 - total2) >= target].sum())
        return hits / float(2 ** n)

    ties = [len(list(g)) for _, g in groupby(sorted(abs(d) for d in diffs))]
    tie_term = sum(t ** 3 - t for t in ties)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    if var <= 0:
        return 1.0
    z = (w2 / 2.0 - mean) / math.sqrt(var)
    return min(1.0, 2.0 * _normal_sf(abs(z)))


def finner_adjust(p_values: Sequence[float], mode: str = "step_down") -> List[float]:
    """Adjusted p-values for a family of k simultaneous comparisons.

    ``step_down``: sort p ascending and take the running maximum of
    1 - (1 - p_(j))^(k/j), the usual step-down procedure (APVs are
    monotone and never below the raw p).  ``single_step``: the closed
    form 1 - (1 - p)^k applied to every entry independently.
    Results are clipped to [0, 1] and returned in the input order.
    """
    k = len(p_values)
    if k == 0:
        raise ValueError("finner_adjust needs at least one p-value")
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
    if mode == "single_step":
        return [min(1.0, 1.0 - (1.0 - p) ** k) for p in p_values]
    if mode != "step_down":
        raise ValueError(f"unknown finner mode {mode!r}")
    order = sorted(range(k), key=lambda i: p_values[i])
    adjusted = [0.0] * k
    running = 0.0
    for j, i in enumerate(order, start=1):
        running = max(running, 1.0 - (1.0 - p_values[i]) ** (k / j))
        adjusted[i] = min(1.0, running)
    return adjusted
