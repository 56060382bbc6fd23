"""Polylogarithms on the real line and the closed-form asymptotic constants.

The chain-count asymptotics are governed by two functions of the vertex
penalization lambda:

    c(lam) = lam*Li2(1-lam)/(1-lam) / (zeta(2)^(1/3) (zeta(3)-Li3(1-lam))^(2/3))
    e(lam) = 3*delta(lam) - c(lam)*ln(lam),
    delta(lam)^3 = (zeta(3) - Li3(1-lam)) / zeta(2)

ln N(n,n,[c(lam) n^(2/3)]) = e(lam) n^(2/3) (1+o(1)); at lam=1 these reduce to
the classical typical-chain constants, as lam -> infinity c tends to
3/pi^(2/3) (the maximal vertex count), and the length-constrained analogue
scales both by pi^(1/3)/2.  This module also carries the few-vertex count
formulas, the random-point-model expectations and the numerical bound on the
longest chain in that model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import DomainError

# zeta(2), zeta(3) to 20 significant digits; no runtime zeta evaluation.
ZETA2 = 1.6449340668482264365
ZETA3 = 1.2020569031595942854

_SERIES_CUTOFF = 0.5


def polylog(order: int, x: float) -> float:
    """Li_2 or Li_3 for real x <= 1.

    Direct series for |x| <= 1/2; the Li(1)-neighbourhood identities for
    x in (1/2, 1]; the duplication identity Li_s(x^2) = 2^(1-s)(Li_s(x) +
    Li_s(-x)) for x in (-1, -1/2]; inversion for x < -1.
    """
    if order == 2:
        return _li2(float(x))
    if order == 3:
        return _li3(float(x))
    raise DomainError("only orders 2 and 3 are supported")


def _series(order: int, x: float) -> float:
    # geometric convergence: |x| <= 1/2 by construction
    total = 0.0
    power = x
    k = 1
    while True:
        term = power / k**order
        total += term
        if abs(term) <= 1e-17 * max(1.0, abs(total)) or k > 200:
            return total
        k += 1
        power *= x


def _li2(x: float) -> float:
    if x > 1.0:
        raise DomainError(f"Li2 is real only for x <= 1 (got {x})")
    if x == 1.0:
        return ZETA2
    if x > _SERIES_CUTOFF:
        # Li2(x) + Li2(1-x) = zeta(2) - ln(x)ln(1-x)
        return ZETA2 - math.log(x) * math.log1p(-x) - _series(2, 1.0 - x)
    if x >= -_SERIES_CUTOFF:
        return _series(2, x)
    if x >= -1.0:
        # duplication: Li2(x) = Li2(x^2)/2 - Li2(-x)
        return 0.5 * _li2(x * x) - _li2(-x)
    # inversion: Li2(x) = -zeta(2) - ln^2(-x)/2 - Li2(1/x), 1/x in (-1,0)
    lg = math.log(-x)
    return -ZETA2 - 0.5 * lg * lg - _li2(1.0 / x)


def _li3(x: float) -> float:
    if x > 1.0:
        raise DomainError(f"Li3 is real only for x <= 1 (got {x})")
    if x == 1.0:
        return ZETA3
    if x > _SERIES_CUTOFF:
        # Landen: Li3(x) + Li3(1-x) + Li3(1-1/x)
        #   = zeta(3) + ln^3(x)/6 + zeta(2)ln(x) - ln^2(x)ln(1-x)/2
        lx = math.log(x)
        rhs = ZETA3 + lx**3 / 6.0 + ZETA2 * lx - 0.5 * lx * lx * math.log1p(-x)
        return rhs - _series(3, 1.0 - x) - _li3(1.0 - 1.0 / x)
    if x >= -_SERIES_CUTOFF:
        return _series(3, x)
    if x >= -1.0:
        # duplication: Li3(x) = Li3(x^2)/4 - Li3(-x)
        return 0.25 * _li3(x * x) - _li3(-x)
    # inversion: Li3(x) = Li3(1/x) - zeta(2)ln(-x) - ln^3(-x)/6
    lg = math.log(-x)
    return _li3(1.0 / x) - ZETA2 * lg - lg**3 / 6.0


@dataclass(frozen=True)
class Theorem1Constants:
    lam: float
    delta: float
    c: float
    e: float


@dataclass(frozen=True)
class JarnikConstants:
    lam: float
    c_j: float
    e_j: float


_NEAR_ONE = 1e-6


def _penalized_dilog_ratio(lam: float) -> float:
    """lam * Li2(1-lam) / (1-lam), with the removable singularity at lam=1
    handled by the Taylor expansion Li2(w)/w = sum w^(k-1)/k^2."""
    w = 1.0 - lam
    if abs(w) < _NEAR_ONE:
        ratio = 1.0 + w / 4.0 + w * w / 9.0 + w**3 / 16.0
        return lam * ratio
    # grouped as Li2(w) * (lam/w): lam*Li2(w) alone can overflow for huge lam
    return _li2(w) * (lam / w)


def theorem1_constants(lam: float) -> Theorem1Constants:
    """Evaluate (c, delta, e) at a penalization lam > 0."""
    if not lam > 0.0:
        raise DomainError("lambda must be positive")
    gap = ZETA3 - _li3(1.0 - lam)  # zeta(3) - Li3(1-lam) > 0 for lam > 0
    if gap <= 0.0:
        # below ~1e-15 the cancellation rounds to zero; leading order
        # zeta(3) - Li3(1-lam) = zeta(2) lam (1 + O(lam ln lam))
        gap = ZETA2 * lam
    delta = (gap / ZETA2) ** (1.0 / 3.0)
    c = _penalized_dilog_ratio(lam) / (ZETA2 ** (1.0 / 3.0) * gap ** (2.0 / 3.0))
    e = 3.0 * delta - c * math.log(lam)
    return Theorem1Constants(lam=lam, delta=delta, c=c, e=e)


def max_vertices_constant() -> float:
    """lim_{lam->inf} c(lam) = 3/pi^(2/3): the maximal-vertex-count constant."""
    return 3.0 / math.pi ** (2.0 / 3.0)


def invert_c(c_target: float, tol: float = 1e-10) -> float:
    """The lam with c(lam) = c_target, by bisection on ln(lam).

    c is strictly increasing from 0 to 3/pi^(2/3), so the target must lie in
    that open interval.
    """
    cmax = max_vertices_constant()
    if not 0.0 < c_target < cmax:
        raise DomainError(
            f"c target must lie in (0, 3/pi^(2/3)) = (0, {cmax:.6f}); got {c_target}"
        )
    lo, hi = -60.0, 1.0
    while theorem1_constants(math.exp(hi)).c < c_target:
        if hi >= 690.0:
            # c approaches 3/pi^(2/3) only logarithmically; beyond exp(690)
            # the required lam is not representable in double precision
            raise DomainError("c target too close to the 3/pi^(2/3) supremum")
        hi = min(2.0 * hi, 690.0)
    while theorem1_constants(math.exp(lo)).c > c_target:
        lo *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if theorem1_constants(math.exp(mid)).c < c_target:
            lo = mid
        else:
            hi = mid
        if abs(theorem1_constants(math.exp(0.5 * (lo + hi))).c - c_target) <= tol:
            break
    return math.exp(0.5 * (lo + hi))


_JARNIK_SCALE = math.pi ** (1.0 / 3.0) / 2.0


def jarnik_constants(lam: float) -> JarnikConstants:
    """Length-constrained analogues: c_J = (pi^(1/3)/2) c, e_J = (pi^(1/3)/2) e."""
    base = theorem1_constants(lam)
    return JarnikConstants(lam=lam, c_j=_JARNIK_SCALE * base.c, e_j=_JARNIK_SCALE * base.e)


def few_vertices_log_count(n: int, s: float, c: float) -> float:
    """Leading-order ln N(n,n,[c n^s]) for s in (0, 2/3):

        ((2-3s) c ln n + 2c - 3c ln c) n^s
    """
    if not 0.0 < s < 2.0 / 3.0:
        raise DomainError("s must lie in (0, 2/3)")
    if not c > 0.0:
        raise DomainError("c must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    return ((2.0 - 3.0 * s) * c * math.log(n) + 2.0 * c - 3.0 * c * math.log(c)) * n**s


def few_vertices_log_count_u(n: int, u: float) -> float:
    """The u-sequence form of the same asymptotic: u * ln(n^2 / u^3).

    For u = c n^s this matches few_vertices_log_count up to exactly 2c n^s
    (the n-independent term), i.e. to the stated o(1)*u precision.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not u > 0.0:
        raise DomainError("u must be positive")
    return u * math.log(n * n / u**3)


class RandomChainExpectation(NamedTuple):
    exact: Fraction
    log_exact: float


def random_expected_chains(n: int, k: int) -> RandomChainExpectation:
    """Expected number of k-point convex chains among n^2 uniform points:
    exactly C(n^2, k) / (k! (k+1)!)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0 <= k <= n * n:
        raise DomainError("k must lie in [0, n^2]")
    num = math.comb(n * n, k)
    den = math.factorial(k) * math.factorial(k + 1)
    frac = Fraction(num, den)
    log_exact = _log_fraction(frac)
    return RandomChainExpectation(exact=frac, log_exact=log_exact)


def random_expected_chains_asymptotic(n: int, s: float, c: float) -> float:
    """Leading-order log of the same expectation at k = [c n^s]:

        ln E = c (2-3s) n^s ln n + (3c - 3c ln c) n^s + o(n^s)
    """
    if not 0.0 < s <= 2.0 / 3.0:
        raise DomainError("s must lie in (0, 2/3]")
    if not c > 0.0:
        raise DomainError("c must be positive")
    return c * (2.0 - 3.0 * s) * n**s * math.log(n) + 3.0 * c * (1.0 - math.log(c)) * n**s


def _log_fraction(f: Fraction) -> float:
    def log_int(v: int) -> float:
        if v.bit_length() <= 900:
            return math.log(v)
        shift = v.bit_length() - 64
        return math.log(v >> shift) + shift * math.log(2.0)

    if f == 0:
        return float("-inf")
    return log_int(f.numerator) - log_int(f.denominator)


def subchain_gap(d: float, c: float) -> float:
    """Feasibility gap of the longest-chain bound in the random model:

        (d-c) ln(d/(d-c)) + c ln(d/c) - 3c(1 - ln c)

    d is feasible iff the gap is <= 0 for every c in (0, d).
    """
    if not 0.0 < c < d:
        raise DomainError("need 0 < c < d")
    return (d - c) * math.log(d / (d - c)) + c * math.log(d / c) - 3.0 * c * (1.0 - math.log(c))


def _max_gap(d: float, grid: int = 10_000) -> float:
    # coarse grid then golden-section refinement around the best cell
    best_c, best = d / 2.0, -math.inf
    for i in range(1, grid):
        c = d * i / grid
        g = subchain_gap(d, c)
        if g > best:
            best, best_c = g, c
    lo = max(d / grid, best_c - 2.0 * d / grid)
    hi = min(d * (1.0 - 1.0 / grid), best_c + 2.0 * d / grid)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = subchain_gap(d, x1), subchain_gap(d, x2)
    for _ in range(100):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = subchain_gap(d, x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = subchain_gap(d, x1)
        if b - a < 1e-12:
            break
    return max(best, f1, f2)


def random_max_bound() -> float:
    """Largest d such that the subchain gap stays <= 0 on all of (0, d);
    outer bisection on d over (2, e).  Reported to 3 decimals."""
    lo, hi = 2.0, math.e - 1e-12
    if _max_gap(hi) <= 0.0:
        return round(hi, 3)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _max_gap(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return round(0.5 * (lo + hi), 3)


def renyi_sulanke_constant() -> float:
    """2*Gamma(5/3)/(3 pi)^(1/3): the convex-hull-above-the-parabola vertex
    constant used as the comparison lower bound in the random model."""
    return 2.0 * math.gamma(5.0 / 3.0) / (3.0 * math.pi) ** (1.0 / 3.0)
