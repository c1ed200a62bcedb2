"""Brute-force reference implementations used as test oracles.

Each function follows the textbook definition with plain loops and shares no
code with the package.  Levels are read as the decimal they print as
(``0.1`` means one tenth), compared in exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction


def _dec(v):
    return Fraction(repr(float(v)))


def quantile_bf(values, level):
    """inf{x : #{v <= x} / n >= level}, scanning candidates in order."""
    n = len(values)
    target = _dec(level)
    for x in sorted(values):
        if Fraction(sum(1 for v in values if v <= x), n) >= target:
            return x
    raise AssertionError("level above 1")


def quantile_update_bf(scores, alpha):
    best, best_obj = None, None
    for c in sorted(set(scores)):
        obj = abs(sum(1 for s in scores if s > c) - alpha * len(scores))
        if best_obj is None or obj < best_obj:
            best, best_obj = c, obj
    return best


def suffix_z_bf(flags, alpha):
    L = len(flags)
    out = []
    for j in range(L):
        c = sum(1 for f in flags[j:] if f)
        n = L - j
        out.append(abs(c - n * (1.0 - alpha)) / math.sqrt(n))
    return out


def drift_scan_bf(flags, alpha, sigma, min_window=0):
    """(detected, first trigger offset, max statistic)."""
    z = suffix_z_bf(flags, alpha)
    peak = max(z) if z else 0.0
    if len(flags) >= min_window:
        for j, v in enumerate(z):
            if v > sigma:
                return True, j, peak
    return False, None, peak


def full_conformal_constant_bf(center, cal_y, ys, alpha):
    """Grid membership for a learner that predicts ``center`` everywhere."""
    m = len(cal_y)
    k = math.ceil((m + 1) * (1 - _dec(alpha)))
    k = max(1, min(k, m + 1))
    mask = []
    for y in ys:
        scores = sorted([abs(v - center) for v in cal_y] + [abs(y - center)])
        mask.append(abs(y - center) <= scores[k - 1])
    return mask


def runs_bf(ys, mask):
    """Maximal runs of included grid values as closed intervals."""
    out, start = [], None
    for i, inc in enumerate(mask):
        if inc and start is None:
            start = i
        if not inc and start is not None:
            out.append((ys[start], ys[i - 1]))
            start = None
    if start is not None:
        out.append((ys[start], ys[len(ys) - 1]))
    return out


def ks_bf(a, b):
    best = 0.0
    for x in list(a) + list(b):
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best
