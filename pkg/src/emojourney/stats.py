"""One-sample t-test and Pearson correlation with an in-repo t CDF.

The Student-t tail probability is computed through the regularized
incomplete beta function, evaluated with the continued-fraction expansion
(modified Lentz iteration). No external stats package is involved, so the
values can be checked independently against published tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateDataError, OutOfRangeError

_CF_MAX_ITER = 500
_CF_EPS = 1e-15
_CF_TINY = 1e-300


@dataclass(frozen=True)
class StatSummary:
    """Sample size, mean, sample sd (n-1), t statistic, and two-sided p."""

    n: int
    mean: float
    sd: float
    t: float
    p_two_sided: float


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta, modified Lentz iteration.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise OutOfRangeError("a and b must be > 0")
    if not 0.0 <= x <= 1.0:
        raise OutOfRangeError(f"x={x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    front = math.exp(
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    # The continued fraction converges fast for x below the split point.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ Student-t with df degrees of freedom."""
    if df <= 0:
        raise OutOfRangeError("df must be > 0")
    if not math.isfinite(t):
        raise OutOfRangeError(f"t not finite: {t!r}")
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def student_t_cdf(t: float, df: float) -> float:
    """P(T <= t) for T ~ Student-t with df degrees of freedom."""
    half_tail = 0.5 * student_t_two_sided(t, df)
    return 1.0 - half_tail if t >= 0 else half_tail


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def one_sample_t(ratings: Sequence[float], mu0: float) -> StatSummary:
    """One-sample t-test of the ratings' mean against mu0.

    t = (mean - mu0) / (sd / sqrt(n)) with the sample sd (n-1 denominator);
    the two-sided p comes from the t distribution with n-1 degrees of
    freedom. Fewer than two ratings or zero variance is Degenerate.
    """
    n = len(ratings)
    if n < 2:
        raise DegenerateDataError(f"need at least 2 ratings, got {n}")
    mean = _mean(ratings)
    ss = math.fsum((v - mean) ** 2 for v in ratings)
    if ss <= 0.0:
        raise DegenerateDataError("ratings have zero variance")
    sd = math.sqrt(ss / (n - 1))
    t = (mean - mu0) / (sd / math.sqrt(n))
    return StatSummary(n=n, mean=mean, sd=sd, t=t, p_two_sided=student_t_two_sided(t, n - 1))


def pearson_r(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Sample Pearson correlation and its two-sided p value.

    p uses the exact transform t = r * sqrt((n-2) / (1-r^2)) against the
    t distribution with n-2 degrees of freedom. Requires equal lengths,
    n >= 3, and nonconstant inputs.
    """
    if len(x) != len(y):
        raise OutOfRangeError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise DegenerateDataError(f"need at least 3 pairs, got {n}")
    mx = _mean(x)
    my = _mean(y)
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    ssx = math.fsum(v * v for v in dx)
    ssy = math.fsum(v * v for v in dy)
    if ssx <= 0.0 or ssy <= 0.0:
        raise DegenerateDataError("inputs must be nonconstant")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(ssx * ssy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, student_t_two_sided(t, n - 2)
