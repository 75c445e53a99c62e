"""Rank-based two-sample analysis: Mann-Whitney U, effect sizes, post-hoc power.

The U statistic reported for (a, b) counts pairs where a exceeds b (ties count
one half), so a sample that sits mostly below its counterpart yields a small U
and a negative z.  One-tailed p-values are always for the alternative "a is
stochastically smaller than b"; swap the arguments for the other direction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Sequence

# Largest per-group size for which the exact null distribution is computed
# automatically; beyond this the normal approximation is accurate and the
# exact table grows needlessly large.
EXACT_N_LIMIT = 12

# Asymptotic relative efficiency of the rank test vs the t test under normal
# shift alternatives (3/pi); used to shrink the effective n in power
# calculations.
ARE_NORMAL = 0.9549296585513721


class Method(str, Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"


class InvalidInputError(ValueError):
    """Raised for empty samples or non-finite values."""


class DegenerateVarianceError(ValueError):
    """Raised when a statistic is undefined because the data show no spread."""


class UseApproximationError(ValueError):
    """Raised when an exact computation is requested outside its size bound."""


class TiesRequireApproximationError(ValueError):
    """Raised when the plain exact method is forced on tied data."""


@dataclass
class StatsReport:
    n1: int
    n2: int
    U: float
    z: float
    p_two_tailed: float
    p_one_tailed: float
    r_effect: float
    median1_N: float
    median2_N: float
    cohens_d: float
    power: float
    method: Method
    tie_correction_applied: bool
    continuity_correction: bool = False
    degenerate_variance: bool = False
    alpha: float = 0.05
    power_tails: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


def _check_sample(values: Sequence[float], name: str) -> list[float]:
    vals = [float(v) for v in values]
    if not vals:
        raise InvalidInputError(f"sample {name} is empty")
    if not all(math.isfinite(v) for v in vals):
        raise InvalidInputError(f"sample {name} contains non-finite values")
    return vals


def midranks(values: Sequence[float]) -> list[float]:
    """Ranks 1..n with tied values sharing the mean of their rank span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _tie_counts(pooled: Sequence[float]) -> list[int]:
    counts: dict[float, int] = {}
    for v in pooled:
        counts[v] = counts.get(v, 0) + 1
    return [c for c in counts.values() if c > 1]


def median(sample: Sequence[float]) -> float:
    """Middle of the sorted sample; mean of the central pair for even n."""
    vals = _check_sample(sample, "median input")
    vals.sort()
    n = len(vals)
    mid = n // 2
    if n % 2 == 1:
        return vals[mid]
    return (vals[mid - 1] + vals[mid]) / 2.0


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _norm_ppf(p: float) -> float:
    # Newton refinement on an erf-based bisection; plenty for p in (1e-12, 1).
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _norm_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_MW_TABLE_CACHE: dict[tuple[int, int], list[int]] = {}

# Auto method selection builds the exact table only for modest sizes; the
# table work grows with n1*n2 even when min(n1, n2) is small.
_AUTO_EXACT_MAX_N = 50


def mw_exact_counts(n1: int, n2: int) -> list[int]:
    """Counts of rank arrangements per U value via the standard recurrence

        c(n1, n2, u) = c(n1-1, n2, u - n2) + c(n1, n2-1, u)

    with c(0, n2, 0) = c(n1, 0, 0) = 1, built iteratively (no recursion
    limit issues for skewed sizes like (1, 5000)).
    """
    key = (n1, n2)
    if key in _MW_TABLE_CACHE:
        return _MW_TABLE_CACHE[key]
    if n1 == 0 or n2 == 0:
        table = [1]
        _MW_TABLE_CACHE[key] = table
        return table
    # prev_row[j] is the table for (i-1, j); build i = 1..n1 in order
    prev_row: list[list[int]] = [[1] for _ in range(n2 + 1)]
    cur_row: list[list[int]] = [[]] * (n2 + 1)
    for i in range(1, n1 + 1):
        cur_row = [[1]] + [[] for _ in range(n2)]
        for j in range(1, n2 + 1):
            a = prev_row[j]  # (i-1, j)
            b = cur_row[j - 1]  # (i, j-1)
            size = i * j + 1
            table = [0] * size
            for u in range(size):
                v = 0
                if 0 <= u - j < len(a):
                    v += a[u - j]
                if u < len(b):
                    v += b[u]
                table[u] = v
            cur_row[j] = table
        prev_row = cur_row
    table = cur_row[n2]
    _MW_TABLE_CACHE[key] = table
    return table


def exact_mw_p(u: float, n1: int, n2: int, *, force: bool = False) -> float:
    """One-tailed lower exact p-value P(U <= u) for untied samples.

    Sizes beyond EXACT_N_LIMIT raise UseApproximationError unless `force` is
    set (the table is exact at any size, just increasingly pointless).
    """
    if n1 < 1 or n2 < 1:
        raise InvalidInputError("sample sizes must be >= 1")
    if min(n1, n2) > EXACT_N_LIMIT and not force:
        raise UseApproximationError(
            f"min(n1, n2) = {min(n1, n2)} exceeds {EXACT_N_LIMIT}; "
            "use the normal approximation"
        )
    counts = mw_exact_counts(n1, n2)
    total = sum(counts)
    upto = int(math.floor(u))
    if upto < 0:
        return 0.0
    upto = min(upto, n1 * n2)
    return sum(counts[: upto + 1]) / total


def _exact_p_from_midranks(
    pooled_ranks: Sequence[float], n1: int, u_obs: float
) -> tuple[float, float]:
    """Exact permutation p-values (lower, upper) for U, conditioning on ties.

    Works on the observed midranks: counts all C(N, n1) subsets by rank sum
    with a subset-sum dynamic program over doubled ranks (doubling makes
    midranks integral).
    """
    n = len(pooled_ranks)
    doubled = [int(round(2 * r)) for r in pooled_ranks]
    # dp[j][s] = number of size-j subsets with doubled rank sum s
    max_sum = sum(sorted(doubled)[n - n1 :])
    dp = [[0] * (max_sum + 1) for _ in range(n1 + 1)]
    dp[0][0] = 1
    for w in doubled:
        for j in range(n1, 0, -1):
            row_prev = dp[j - 1]
            row = dp[j]
            for s in range(max_sum - w, -1, -1):
                if row_prev[s]:
                    row[s + w] += row_prev[s]
    total = math.comb(n, n1)
    # U = R1 - n1(n1+1)/2; in doubled units U2 = S - n1(n1+1)
    u2_obs = int(round(2 * u_obs))
    offset = n1 * (n1 + 1)
    lower = 0
    upper = 0
    for s, c in enumerate(dp[n1]):
        if not c:
            continue
        u2 = s - offset
        if u2 <= u2_obs:
            lower += c
        if u2 >= u2_obs:
            upper += c
    return lower / total, upper / total


def mann_whitney(
    sample_a: Sequence[float],
    sample_b: Sequence[float],
    *,
    method: str = "auto",
    continuity: bool = False,
    tie_exact: bool = False,
    alpha: float = 0.05,
    power_tails: int = 1,
) -> StatsReport:
    """Two-sample rank test with both normal-approximation and exact paths.

    method: "auto" picks exact for small untied samples, otherwise the
    normal approximation with midranks and tie-corrected variance.
    continuity: apply the 0.5 continuity correction to z (off by default).
    tie_exact: allow the exact path on tied data via a permutation DP over
    the observed midranks.
    """
    a = _check_sample(sample_a, "a")
    b = _check_sample(sample_b, "b")
    n1, n2 = len(a), len(b)
    pooled = a + b
    ranks = midranks(pooled)
    r1 = sum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    ties = _tie_counts(pooled)
    has_ties = bool(ties)

    degenerate = len(set(pooled)) == 1
    mu_u = n1 * n2 / 2.0
    n = n1 + n2
    tie_term = sum(t**3 - t for t in ties) / (n * (n - 1)) if n > 1 else 0.0
    var_u = n1 * n2 / 12.0 * ((n + 1) - tie_term)

    if degenerate or var_u <= 0.0:
        z = float("nan")
        p_two = float("nan")
        p_one = float("nan")
        used = Method.NORMAL_APPROX
    else:
        sigma = math.sqrt(var_u)
        diff = u1 - mu_u
        if continuity:
            if diff > 0.5:
                diff -= 0.5
            elif diff < -0.5:
                diff += 0.5
            else:
                diff = 0.0
        z = diff / sigma

        want_exact = method == "exact" or (
            method == "auto"
            and min(n1, n2) <= EXACT_N_LIMIT
            and max(n1, n2) <= _AUTO_EXACT_MAX_N
            and (not has_ties or tie_exact)
        )
        if method not in ("auto", "exact", "normal"):
            raise ValueError(f"unknown method {method!r}")
        if method == "exact" and min(n1, n2) > EXACT_N_LIMIT:
            raise UseApproximationError(
                "sample too large for the exact method; use method='normal'"
            )
        if method == "exact" and has_ties and not tie_exact:
            raise TiesRequireApproximationError(
                "tied data: pass tie_exact=True for the permutation DP "
                "or use the normal approximation"
            )

        if want_exact and min(n1, n2) <= EXACT_N_LIMIT:
            if has_ties:
                p_lower, p_upper = _exact_p_from_midranks(ranks, n1, u1)
            else:
                p_lower = exact_mw_p(u1, n1, n2)
                # symmetric distribution: P(U >= u) = P(U <= n1 n2 - u)
                p_upper = exact_mw_p(n1 * n2 - u1, n1, n2)
            p_one = p_lower
            p_two = min(1.0, 2.0 * min(p_lower, p_upper))
            used = Method.EXACT
        else:
            p_one = _norm_cdf(z)
            p_two = 2.0 * _norm_cdf(-abs(z))
            used = Method.NORMAL_APPROX

    r_effect = z / math.sqrt(n) if not math.isnan(z) else float("nan")

    try:
        d = cohens_d(a, b)
    except (DegenerateVarianceError, InvalidInputError):
        d = float("nan")
    n_harm = 2.0 * n1 * n2 / (n1 + n2)
    if math.isnan(d) or n_harm < 2.0:
        pw = float("nan")
    else:
        pw = power_two_sample(abs(d), n_harm, alpha=alpha, tails=power_tails)

    return StatsReport(
        n1=n1,
        n2=n2,
        U=u1,
        z=z,
        p_two_tailed=p_two,
        p_one_tailed=p_one,
        r_effect=r_effect,
        median1_N=median(a),
        median2_N=median(b),
        cohens_d=d,
        power=pw,
        method=used,
        tie_correction_applied=has_ties,
        continuity_correction=continuity,
        degenerate_variance=degenerate,
        alpha=alpha,
        power_tails=power_tails,
    )


def cohens_d(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Standardised mean difference (mean_a - mean_b) / pooled sd.

    Pooled sd uses n-1 denominators; both samples need at least 2 values.
    """
    a = _check_sample(sample_a, "a")
    b = _check_sample(sample_b, "b")
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise InvalidInputError("cohens_d needs at least 2 values per sample")
    ma = sum(a) / n1
    mb = sum(b) / n2
    ssa = sum((v - ma) ** 2 for v in a)
    ssb = sum((v - mb) ** 2 for v in b)
    pooled_var = (ssa + ssb) / (n1 + n2 - 2)
    if pooled_var <= 0.0:
        raise DegenerateVarianceError("pooled variance is zero")
    return (ma - mb) / math.sqrt(pooled_var)


def power_two_sample(
    d: float,
    n_per_group: float,
    alpha: float = 0.05,
    tails: int = 1,
    are_correction: bool = True,
    method: str = "normal",
) -> float:
    """Power of a two-sample comparison at standardised effect size d.

    Normal approximation: Phi(d * sqrt(n_eff / 2) - z_crit), with the second
    tail added when tails=2.  are_correction shrinks n by the rank-test
    asymptotic relative efficiency (x0.955), matching how power is quoted
    for Mann-Whitney analyses.  method="nct" uses the noncentral-t instead
    of the normal approximation.
    """
    if d < 0:
        raise ValueError("d must be >= 0 (direction is irrelevant to power)")
    if n_per_group < 2:
        raise ValueError("n_per_group must be >= 2")
    if not 0.0 < alpha <= 0.5:
        raise ValueError("alpha must be in (0, 0.5]")
    if tails not in (1, 2):
        raise ValueError("tails must be 1 or 2")

    n_eff = n_per_group * ARE_NORMAL if are_correction else float(n_per_group)
    ncp = d * math.sqrt(n_eff / 2.0)

    if method == "normal":
        z_crit = _norm_ppf(1.0 - alpha / tails)
        power = _norm_cdf(ncp - z_crit)
        if tails == 2:
            power += _norm_cdf(-ncp - z_crit)
        return power
    if method == "nct":
        from scipy.stats import nct, t as t_dist

        df = 2.0 * n_eff - 2.0
        t_crit = t_dist.ppf(1.0 - alpha / tails, df)
        power = float(nct.sf(t_crit, df, ncp))
        if tails == 2:
            power += float(nct.cdf(-t_crit, df, ncp))
        return power
    raise ValueError(f"unknown method {method!r}")
