"""Effect sizes and Welch's t-test without a statistics library."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateInputError, InputError


@dataclass(frozen=True)
class SeparabilityStat:
    feature: str
    comparison: tuple
    cohens_d: float
    t_statistic: float
    p_value: float


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    m = math.fsum(xs) / n
    return m, math.fsum((x - m) ** 2 for x in xs) / (n - 1)


def cohens_d(group_a: Sequence[float], group_b: Sequence[float]) -> float:
    """Standardised mean difference ``(mean_a - mean_b) / pooled_sd``."""
    na, nb = len(group_a), len(group_b)
    if na < 2 or nb < 2:
        raise InputError("cohens_d needs at least two values per group")
    ma, va = _mean_var(group_a)
    mb, vb = _mean_var(group_b)
    pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
    if pooled <= 0:
        raise DegenerateInputError("pooled variance is zero")
    return (ma - mb) / math.sqrt(pooled)


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a: float, b: float, abs_tol: float = 1e-10,
                     rel_tol: float = 1e-10, max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    tol = abs_tol
    if rel_tol and whole != 0:
        tol = min(abs_tol, rel_tol * abs(whole))
    stack = [(a, fa, b, fb, m, fm, whole, tol, max_depth)]
    total = 0.0
    while stack:
        a, fa, b, fb, m, fm, whole, tol, depth = stack.pop()
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
        else:
            stack.append((a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1))
            stack.append((m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1))
    return total


def t_upper_tail(t: float, df: float) -> float:
    """P(T > t) for Student's t, t >= 0.

    With ``x = sqrt(df) tan(phi)`` the density becomes ``C cos(phi)^(df-1)`` on
    ``[0, pi/2)``, which is bounded for df >= 1 and integrated directly.
    """
    if df <= 0:
        raise InputError("degrees of freedom must be positive")
    if t < 0:
        return 1.0 - t_upper_tail(-t, df)
    log_c = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(math.pi)
    phi0 = math.atan(t / math.sqrt(df))
    power = df - 1.0

    def integrand(phi):
        c = math.cos(phi)
        if c <= 0.0:
            return 0.0 if power > 0 else (1.0 if power == 0 else math.inf)
        return math.exp(log_c + power * math.log(c))

    if df < 1:
        # integrable singularity at pi/2: fall back to the density in x on a mapped interval
        def in_x(u):
            if u >= 1.0:
                return 0.0
            x = t + u / (1.0 - u)
            return math.exp(log_c - 0.5 * math.log(df) - (df + 1) / 2 * math.log1p(x * x / df)) / (1.0 - u) ** 2
        return adaptive_simpson(in_x, 0.0, 1.0)
    return adaptive_simpson(integrand, phi0, math.pi / 2)


def welch_t(group_a: Sequence[float], group_b: Sequence[float]) -> tuple[float, float]:
    """Welch's t statistic and two-sided p-value (Welch-Satterthwaite df)."""
    na, nb = len(group_a), len(group_b)
    if na < 2 or nb < 2:
        raise InputError("welch_t needs at least two values per group")
    ma, va = _mean_var(group_a)
    mb, vb = _mean_var(group_b)
    sa, sb = va / na, vb / nb
    if sa + sb == 0:
        raise DegenerateInputError("both groups have zero variance")
    t = (ma - mb) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
    p = min(1.0, 2.0 * t_upper_tail(abs(t), df))
    return t, p


def separability(feature: str, comparison: tuple, group_a, group_b) -> SeparabilityStat:
    t, p = welch_t(group_a, group_b)
    return SeparabilityStat(feature, comparison, cohens_d(group_a, group_b), t, p)
