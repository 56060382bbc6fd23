"""Grand-canonical ensembles over convex chains.

Three product measures on multiplicity functions, distinguished by what the
per-direction weight rho_x prices:

  endpoint:  rho_x = z1^x1 * z2^x2, plus a factor lam per occupied direction
  length:    rho_x = z^|x|            (|x| = euclidean length), same lam
  mixed:     rho_x = y^(x1+x2) * z^|x|, lam = 1

Under each measure the multiplicities nu(x) are independent with
P(nu=0) = (1-rho)/(1+(lam-1)rho) and P(nu=k) = lam rho^k (1-rho)/(1+(lam-1)rho)
for k >= 1.  Because the total probability of a chain depends only on its
endpoint, vertex count (and/or length), conditioning on those statistics is
uniform on the fiber; the factorization

  N(n1,n2,N) = z1^-n1 z2^-n2 lam^-N * prod_x [(1+(lam-1)rho_x)/(1-rho_x)]
               * Q(endpoint=(n1,n2), vertices=N)

turns hit frequencies of the sampler into unbiased count estimates.

Truncation: sums and samplers run over the directions whose activation
probability survives a certified tail bound (total neglected activation mass
below the params tolerance).  For events that pin the endpoint (or bound the
length) the support is restricted further to the directions that can occur in
a hit; the excluded directions' zero-probability factors cancel exactly
against the prefactor, so that restriction introduces no truncation error at
all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .chain import ConvexChain, VertexMap, chain_from_sparse
from .errors import BudgetError, CalibrationError, DomainError
from .lattice import Direction, triangle_arrays
from . import analytic

SQRT2 = math.sqrt(2.0)
_SUPPORT_CAP = 200_000  # max coordinate sum the truncation search will accept


# ---------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of one of the three measures, with its validity domain."""

    kind: str
    z1: float = 0.0
    z2: float = 0.0
    z: float = 0.0
    y: float = 0.0
    lam: float = 1.0
    truncation_tolerance: float = 1e-12

    def __post_init__(self):
        if self.kind not in ("endpoint", "length", "mixed"):
            raise DomainError(f"unknown ensemble kind {self.kind!r}")
        if not self.truncation_tolerance > 0.0:
            raise DomainError("truncation tolerance must be positive")
        if self.kind == "endpoint":
            if not (0.0 <= self.z1 < 1.0 and 0.0 <= self.z2 < 1.0):
                raise DomainError("endpoint kind needs z1, z2 in [0,1)")
            if not self.lam > 0.0:
                raise DomainError("lambda must be positive")
        elif self.kind == "length":
            if not 0.0 < self.z < 1.0:
                raise DomainError("length kind needs z in (0,1)")
            if not self.lam > 0.0:
                raise DomainError("lambda must be positive")
        else:
            if not (self.y > 0.0 and self.z > 0.0):
                raise DomainError("mixed kind needs positive y and z")
            if self.lam != 1.0:
                raise DomainError("mixed kind fixes lambda = 1")
            # weights are monotone in l/m in [1/sqrt2, 1]; checking the
            # diagonal family and the axes bounds every direction
            if max(self._mixed_ratios()) >= 1.0:
                raise DomainError(
                    "invalid mixed parameters: weight >= 1 on the diagonal "
                    "direction family or the axes"
                )

    def _mixed_ratios(self) -> tuple[float, float]:
        return (self.y * self.z ** (1.0 / SQRT2), self.y * self.z)

    @staticmethod
    def endpoint(z1: float, z2: Optional[float] = None, lam: float = 1.0,
                 truncation_tolerance: float = 1e-12) -> "EnsembleParams":
        if z2 is None:
            z2 = z1
        return EnsembleParams(kind="endpoint", z1=float(z1), z2=float(z2),
                              lam=float(lam),
                              truncation_tolerance=truncation_tolerance)

    @staticmethod
    def length(z: float, lam: float = 1.0,
               truncation_tolerance: float = 1e-12) -> "EnsembleParams":
        return EnsembleParams(kind="length", z=float(z), lam=float(lam),
                              truncation_tolerance=truncation_tolerance)

    @staticmethod
    def mixed(y: float, z: float,
              truncation_tolerance: float = 1e-12) -> "EnsembleParams":
        return EnsembleParams(kind="mixed", y=float(y), z=float(z), lam=1.0,
                              truncation_tolerance=truncation_tolerance)

    def max_weight_ratio(self) -> float:
        """q such that every direction with coordinate sum m has rho <= q^m."""
        if self.kind == "endpoint":
            return max(self.z1, self.z2)
        if self.kind == "length":
            return self.z ** (1.0 / SQRT2)
        return max(self._mixed_ratios())


def weight(params: EnsembleParams, x: Direction) -> float:
    """The per-direction weight rho_x in [0,1)."""
    if params.kind == "endpoint":
        return params.z1 ** x.x1 * params.z2 ** x.x2
    if params.kind == "length":
        return params.z ** x.euclidean_length
    w = params.y ** (x.x1 + x.x2) * params.z ** x.euclidean_length
    if w >= 1.0:
        raise DomainError(f"mixed weight >= 1 at direction {x}")
    return w


class Marginal(NamedTuple):
    p_zero: float
    p_active: float
    geometric_ratio: float


def marginal(params: EnsembleParams, x: Direction) -> Marginal:
    """Marginal law of nu(x): P(0) = p_zero, and conditionally on being
    active the multiplicity is 1 + Geometric(ratio rho)."""
    rho = weight(params, x)
    if rho >= 1.0:
        raise DomainError(f"weight >= 1 at direction {x}")
    denom = 1.0 + (params.lam - 1.0) * rho
    p_zero = (1.0 - rho) / denom
    return Marginal(p_zero=p_zero, p_active=1.0 - p_zero, geometric_ratio=rho)


# ---------------------------------------------------------------------------
# truncated support

@dataclass(frozen=True)
class Support:
    """Direction set a computation runs over, as parallel arrays."""

    x1: np.ndarray
    x2: np.ndarray
    length: np.ndarray
    rho: np.ndarray
    p_active: np.ndarray
    neglected_mass: float
    max_coord_sum: int

    @property
    def size(self) -> int:
        return int(self.x1.size)


def _tail_geom(q: float, m0: int, degree: int) -> float:
    """sum_{m > m0} m^degree * q^m, exactly (degrees 0..2)."""
    if q <= 0.0:
        return 0.0
    one = 1.0 - q
    head = q ** (m0 + 1)
    if degree == 0:
        return head / one
    if degree == 1:
        return head * ((m0 + 1) / one + q / one**2)
    return head * (
        (m0 + 1) ** 2 / one
        + 2.0 * (m0 + 1) * q / one**2
        + q * (1.0 + q) / one**3
    )


def _moment_tail_bound(params: EnsembleParams, m0: int) -> float:
    """Certified bound on every neglected moment sum (endpoint, vertex,
    length) when directions with coordinate sum > m0 are dropped.

    Shell m holds at most m+1 directions, each with rho <= q^m, coordinate
    and length factors <= m, E[nu] <= lam q^m / ((1-q^(m0+1)) min(1,lam)).
    """
    q = params.max_weight_ratio()
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return math.inf
    slack = 1.0 - q ** (m0 + 1)
    coef = params.lam / (slack * min(1.0, params.lam))
    # m * (m+1) * q^m  <=  (m^2 + m) q^m
    return coef * (_tail_geom(q, m0, 2) + _tail_geom(q, m0, 1))


def _activation_tail_bound(params: EnsembleParams, m0: int) -> float:
    q = params.max_weight_ratio()
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return math.inf
    coef = max(1.0, params.lam)
    return coef * (_tail_geom(q, m0, 1) + _tail_geom(q, m0, 0))


def _select_truncation(params: EnsembleParams) -> int:
    tol = params.truncation_tolerance
    if params.max_weight_ratio() <= 0.0:
        return 1
    m0 = 16
    while _moment_tail_bound(params, m0) >= tol or _activation_tail_bound(params, m0) >= tol:
        m0 *= 2
        if m0 > _SUPPORT_CAP:
            raise BudgetError(
                "truncated direction set would exceed the support cap; "
                "parameters are too close to the convergence boundary"
            )
    # shrink back to the smallest sufficient cutoff
    lo, hi = m0 // 2, m0
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if _moment_tail_bound(params, mid) < tol and _activation_tail_bound(params, mid) < tol:
            hi = mid
        else:
            lo = mid
    return hi


def _weights_for(params: EnsembleParams, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    if params.kind == "endpoint":
        return np.power(params.z1, x1) * np.power(params.z2, x2)
    ell = np.hypot(x1, x2)
    if params.kind == "length":
        return np.exp(ell * math.log(params.z))
    return np.exp((x1 + x2) * math.log(params.y) + ell * math.log(params.z))


def build_support(
    params: EnsembleParams,
    box: Optional[tuple[int, int]] = None,
    max_length: Optional[float] = None,
) -> Support:
    """Truncated (or box-restricted) direction set with per-direction laws.

    Without a box the cutoff is chosen so the certified excluded activation
    mass and moment tails stay below the params tolerance.  With a box the
    set is exactly {x : x1 <= box[0], x2 <= box[1]} (neglected mass 0): for
    endpoint-pinned events this restriction is lossless because activity
    outside the box forces a miss and its zero-probability factors cancel
    against the prefactor.
    """
    if box is not None:
        m0 = int(box[0]) + int(box[1])
        neglected = 0.0
        if m0 < 1:
            empty = np.zeros(0)
            return Support(empty.astype(np.int64), empty.astype(np.int64),
                           empty, empty, empty, 0.0, 0)
    else:
        m0 = _select_truncation(params)
        neglected = _activation_tail_bound(params, m0)
    x1, x2 = triangle_arrays(max(m0, 1))
    if box is not None:
        keep = (x1 <= box[0]) & (x2 <= box[1])
        x1, x2 = x1[keep], x2[keep]
    if max_length is not None:
        keep = np.hypot(x1, x2) <= max_length
        x1, x2 = x1[keep], x2[keep]
    x1 = x1.astype(np.int64)
    x2 = x2.astype(np.int64)
    rho = _weights_for(params, x1, x2)
    if rho.size and float(rho.max()) >= 1.0:
        raise DomainError("some direction weight is >= 1; parameters invalid")
    lam = params.lam
    p_active = lam * rho / (1.0 + (lam - 1.0) * rho)
    return Support(
        x1=x1, x2=x2, length=np.hypot(x1, x2), rho=rho, p_active=p_active,
        neglected_mass=float(neglected), max_coord_sum=int(m0),
    )


def _mean_multiplicity(params: EnsembleParams, s: Support) -> np.ndarray:
    lam = params.lam
    return lam * s.rho / ((1.0 - s.rho) * (1.0 + (lam - 1.0) * s.rho))


# ---------------------------------------------------------------------------
# exact moment and covariance sums

@dataclass(frozen=True)
class MomentReport:
    expected_endpoint: tuple[float, float]
    expected_vertices: float
    expected_length: float
    truncation_bound: float


def moments(params: EnsembleParams, support: Optional[Support] = None) -> MomentReport:
    """Exact truncated sums of the calibration functionals with a certified
    tail bound folded into truncation_bound."""
    s = support if support is not None else build_support(params)
    mean = _mean_multiplicity(params, s)
    e1 = float(np.dot(s.x1, mean))
    e2 = float(np.dot(s.x2, mean))
    en = float(s.p_active.sum())
    el = float(np.dot(s.length, mean))
    bound = _moment_tail_bound(params, s.max_coord_sum) if support is None else 0.0
    return MomentReport(
        expected_endpoint=(e1, e2), expected_vertices=en, expected_length=el,
        truncation_bound=float(bound),
    )


def per_direction_blocks(params: EnsembleParams, x: Direction) -> tuple[float, float, float]:
    """(Var(nu), Cov(1_{nu!=0}, nu), Var(1_{nu!=0})) at one direction."""
    rho = weight(params, x)
    lam = params.lam
    denom = 1.0 + (lam - 1.0) * rho
    var_nu = lam * rho * ((1.0 + rho) * denom - lam * rho) / ((1.0 - rho) ** 2 * denom**2)
    cov = lam * rho / denom**2
    var_ind = lam * rho * (1.0 - rho) / denom**2
    return var_nu, cov, var_ind


@dataclass(frozen=True)
class CovarianceReport:
    """Covariance matrix of (X1, X2, X3) = (sum x1 nu, sum x2 nu, #occupied)."""

    matrix: np.ndarray
    var_length: float

    def standard_deviations(self) -> tuple[float, float, float]:
        d = np.sqrt(np.clip(np.diag(self.matrix), 0.0, None))
        return float(d[0]), float(d[1]), float(d[2])


def covariance(params: EnsembleParams, support: Optional[Support] = None) -> CovarianceReport:
    if params.kind != "endpoint":
        raise DomainError("covariance is defined for endpoint-kind parameters")
    return _covariance_any(params, support)


def _covariance_any(params: EnsembleParams, support: Optional[Support] = None) -> CovarianceReport:
    s = support if support is not None else build_support(params)
    lam = params.lam
    denom = 1.0 + (lam - 1.0) * s.rho
    var_nu = lam * s.rho * ((1.0 + s.rho) * denom - lam * s.rho) / ((1.0 - s.rho) ** 2 * denom**2)
    cov = lam * s.rho / denom**2
    var_ind = lam * s.rho * (1.0 - s.rho) / denom**2
    a11 = float(np.dot(s.x1 * s.x1, var_nu))
    a22 = float(np.dot(s.x2 * s.x2, var_nu))
    a12 = float(np.dot(s.x1 * s.x2, var_nu))
    a13 = float(np.dot(s.x1, cov))
    a23 = float(np.dot(s.x2, cov))
    a33 = float(var_ind.sum())
    mat = np.array([[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]])
    vlen = float(np.dot(s.length * s.length, var_nu))
    return CovarianceReport(matrix=mat, var_length=vlen)


# ---------------------------------------------------------------------------
# calibration

def calibrate(
    kind: str,
    n: int,
    lam: Optional[float] = None,
    c: Optional[float] = None,
    s: Optional[float] = None,
    L: Optional[float] = None,
    refine: bool = True,
    truncation_tolerance: float = 1e-12,
) -> EnsembleParams:
    """Parameters whose expectations match the requested targets.

    endpoint kind:
      * lam given          -> z = 1 - delta(lam)/n^(1/3), expected endpoint (n,n)
      * c given (no s)     -> lam solving c(lam) = c, then as above
      * c and s given      -> few-vertex regime z = 1 - c/n^(1-s),
                              lam = c^3 n^(3s-2)
    length kind (lam given): z = exp(-pi^(1/3) delta(lam)/n^(1/3)),
      expected total length n.
    mixed kind (L given): (y, z) with expected endpoint (n,n) and expected
      length L*n, seeded from the limit-curve family for L.

    With refine=True a damped Newton iteration on the exact truncated sums
    drives the endpoint (or length) target to machine-level relative error.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if kind == "endpoint":
        return _calibrate_endpoint(n, lam, c, s, refine, truncation_tolerance)
    if kind == "length":
        if lam is None:
            lam = 1.0
        return _calibrate_length(n, lam, refine, truncation_tolerance)
    if kind == "mixed":
        if L is None:
            raise DomainError("mixed calibration needs the length ratio L")
        return _calibrate_mixed(n, L, refine, truncation_tolerance)
    raise DomainError(f"unknown ensemble kind {kind!r}")


def _calibrate_endpoint(n, lam, c, s, refine, tol) -> EnsembleParams:
    if c is not None and s is not None:
        if not 0.0 < s < 2.0 / 3.0:
            raise DomainError("few-vertex regime needs s in (0, 2/3)")
        if not c > 0.0:
            raise DomainError("c must be positive")
        z0 = 1.0 - c / n ** (1.0 - s)
        lam_eff = c**3 * float(n) ** (3.0 * s - 2.0)
        if not 0.0 < z0 < 1.0:
            raise DomainError("n too small for the requested few-vertex regime")
    else:
        if c is not None:
            lam = analytic.invert_c(c)
        if lam is None:
            lam = 1.0
        if not lam > 0.0:
            raise DomainError("lambda must be positive")
        delta = analytic.theorem1_constants(lam).delta
        z0 = 1.0 - delta / n ** (1.0 / 3.0)
        lam_eff = lam
        if not 0.0 < z0 < 1.0:
            raise DomainError("n too small for this lambda (z would leave (0,1))")

    params = EnsembleParams.endpoint(z0, lam=lam_eff, truncation_tolerance=tol)
    if not refine:
        return params

    def resid(p: EnsembleParams) -> float:
        return moments(p).expected_endpoint[0] - n

    def update(p: EnsembleParams, znew: float) -> EnsembleParams:
        return replace(p, z1=znew, z2=znew)

    z = _newton_1d(params, z0, resid, update, target_scale=float(n),
                   lo=0.0, hi=1.0)
    return update(params, z)


def _calibrate_length(n, lam, refine, tol) -> EnsembleParams:
    if not lam > 0.0:
        raise DomainError("lambda must be positive")
    delta = analytic.theorem1_constants(lam).delta
    z0 = math.exp(-math.pi ** (1.0 / 3.0) * delta / n ** (1.0 / 3.0))
    params = EnsembleParams.length(z0, lam=lam, truncation_tolerance=tol)
    if not refine:
        return params

    def resid(p: EnsembleParams) -> float:
        return moments(p).expected_length - n

    def update(p: EnsembleParams, znew: float) -> EnsembleParams:
        return replace(p, z=znew)

    z = _newton_1d(params, z0, resid, update, target_scale=float(n),
                   lo=0.0, hi=1.0)
    return update(params, z)


def _newton_1d(params, x0, resid, update, target_scale, lo, hi,
               rel_tol=1e-11, max_iter=60):
    x = x0
    f = resid(update(params, x))
    for _ in range(max_iter):
        if abs(f) <= rel_tol * target_scale:
            return x
        h = max(1e-9, 1e-7 * (1.0 - x))
        f2 = resid(update(params, min(x + h, hi - 1e-15)))
        slope = (f2 - f) / h
        if slope == 0.0:
            break
        step = -f / slope
        xn = x + step
        # damp into the open interval
        while not (lo < xn < hi):
            step *= 0.5
            xn = x + step
            if abs(step) < 1e-18:
                raise CalibrationError("Newton step collapsed", residuals=(f,))
        fn = resid(update(params, xn))
        tries = 0
        while abs(fn) > abs(f) and tries < 40:
            step *= 0.5
            xn = x + step
            fn = resid(update(params, xn))
            tries += 1
        x, f = xn, fn
    if abs(f) <= 1e-6 * target_scale:
        return x
    raise CalibrationError("endpoint calibration did not converge", residuals=(f,))


def _calibrate_mixed(n, L, refine, tol) -> EnsembleParams:
    from . import shapes  # local import: shapes pulls in quadrature machinery

    branch, param = shapes.solve_family_parameter(L)
    scale = n ** (1.0 / 3.0)

    # continuum seed: decay rate -kappa(theta) = A*(alpha + cos(theta-pi/4))
    # (beta branch: A*(beta - cos(theta-pi/4))), with A fixed by the endpoint
    # condition (2 zeta(3)/zeta(2)) * int cos(theta) kappa^-3 = 1.
    kernel = shapes.family_kernel(branch, param)
    integral = shapes.quad_composite(
        lambda u: np.cos(u) * kernel(u), 0.0, math.pi / 2.0
    )
    a_scale = (2.0 * analytic.ZETA3 / analytic.ZETA2 * integral) ** (1.0 / 3.0)
    if branch == "alpha":
        g = -a_scale / SQRT2
        d = -a_scale * param
    else:
        g = a_scale / SQRT2
        d = -a_scale * param

    def params_of(gv: float, dv: float) -> EnsembleParams:
        return EnsembleParams.mixed(
            y=math.exp(gv / scale), z=math.exp(dv / scale),
            truncation_tolerance=tol,
        )

    params = params_of(g, d)
    if not refine:
        return params

    def resid_vec(gv, dv):
        p = params_of(gv, dv)
        rep = moments(p)
        return np.array([rep.expected_endpoint[0] - n,
                         rep.expected_length - L * n])

    vec = np.array([g, d])
    f = resid_vec(*vec)
    target = float(n)
    for _ in range(60):
        if np.max(np.abs(f)) <= 1e-9 * target:
            break
        jac = np.zeros((2, 2))
        h = 1e-6
        for j in range(2):
            pert = vec.copy()
            pert[j] += h
            try:
                jac[:, j] = (resid_vec(*pert) - f) / h
            except DomainError:
                pert[j] -= 2 * h
                jac[:, j] = (f - resid_vec(*pert)) / h
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError as exc:
            raise CalibrationError("singular Jacobian in mixed calibration",
                                   residuals=tuple(f)) from exc
        lam_damp = 1.0
        for _ in range(40):
            cand = vec + lam_damp * step
            try:
                fc = resid_vec(*cand)
            except DomainError:
                lam_damp *= 0.5
                continue
            if np.max(np.abs(fc)) < np.max(np.abs(f)) or lam_damp < 1e-6:
                vec, f = cand, fc
                break
            lam_damp *= 0.5
        else:
            raise CalibrationError("mixed calibration stalled", residuals=tuple(f))
    else:
        if np.max(np.abs(f)) > 1e-4 * target:
            raise CalibrationError("mixed calibration did not converge",
                                   residuals=tuple(f))
    return params_of(*vec)


# ---------------------------------------------------------------------------
# sampling

def _spawn_generator(seed, index: int = 0) -> np.random.Generator:
    """Documented split function: replica block i uses the i-th child of
    SeedSequence(seed), so results do not depend on worker scheduling."""
    ss = np.random.SeedSequence(seed)
    if index == 0:
        return np.random.default_rng(ss)
    return np.random.default_rng(ss.spawn(index + 1)[index])


def _draw_block(s: Support, count: int, rng: np.random.Generator):
    """count independent draws over the support; returns the active entries
    as (row, col, multiplicity) plus per-row aggregates (X1, X2, N)."""
    u = rng.random((count, s.size))
    act = u < s.p_active
    rows, cols = act.nonzero()
    mult = rng.geometric(1.0 - s.rho[cols]) if rows.size else np.zeros(0, dtype=np.int64)
    x1 = np.bincount(rows, weights=s.x1[cols] * mult, minlength=count).astype(np.int64)
    x2 = np.bincount(rows, weights=s.x2[cols] * mult, minlength=count).astype(np.int64)
    nv = act.sum(axis=1)
    return rows, cols, mult, x1, x2, nv


def sample(params: EnsembleParams, seed) -> VertexMap:
    """One draw of the product measure over the truncated support.

    Deterministic for a fixed seed.  The truncation discards total activation
    mass below params.truncation_tolerance (see build_support); the realized
    support of a draw is reported by the returned map itself.
    """
    return sample_many(params, 1, seed)[0]


def sample_many(params: EnsembleParams, count: int, seed) -> list[VertexMap]:
    """count independent draws sharing one truncated support build."""
    if count < 1:
        raise DomainError("count must be >= 1")
    s = build_support(params)
    rng = _spawn_generator(seed)
    out: list[VertexMap] = []
    done = 0
    chunk = max(1, min(count, int(2e6 / max(1, s.size))))
    while done < count:
        b = min(chunk, count - done)
        rows, cols, mult, *_ = _draw_block(s, b, rng)
        for i in range(b):
            pick = rows == i
            entries = {
                Direction(int(s.x1[cb]), int(s.x2[cb])): int(m)
                for cb, m in zip(cols[pick], mult[pick])
            }
            out.append(VertexMap(entries))
        done += b
    return out


@dataclass(frozen=True)
class Constraint:
    """Conditioning event: any combination of an exact endpoint, an exact
    vertex count, and a half-open total-length interval."""

    endpoint: Optional[tuple[int, int]] = None
    vertices: Optional[int] = None
    length: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.endpoint is None and self.vertices is None and self.length is None:
            raise DomainError("constraint must pin at least one statistic")
        if self.length is not None and not self.length[0] < self.length[1]:
            raise DomainError("length interval must satisfy lo < hi")


@dataclass(frozen=True)
class ConditionedSample:
    vertex_map: VertexMap
    chain: ConvexChain
    attempts: int
    offsets: dict


def _check_constraint_kind(params: EnsembleParams, constraint: Constraint) -> None:
    if constraint.endpoint is not None and params.kind == "length":
        raise DomainError("endpoint constraint is inconsistent with the length kind")
    if constraint.length is not None and params.kind == "endpoint":
        raise DomainError("length constraint is inconsistent with the endpoint kind")


def _window_sigmas(params: EnsembleParams, s: Support) -> tuple[float, float, float, float]:
    rep = _covariance_any(params, s)
    s1, s2, s3 = rep.standard_deviations()
    return s1, s2, s3, math.sqrt(max(rep.var_length, 0.0))


def _conditioned_support(params: EnsembleParams, constraint: Constraint,
                         w1: float, w2: float, wl: float) -> Support:
    if constraint.endpoint is not None:
        bx = int(math.floor(constraint.endpoint[0] + w1))
        by = int(math.floor(constraint.endpoint[1] + w2))
        max_len = None
        if constraint.length is not None:
            max_len = constraint.length[1] + wl
        return build_support(params, box=(bx, by), max_length=max_len)
    if constraint.length is not None:
        return build_support(params, max_length=constraint.length[1] + wl)
    return build_support(params)


DEFAULT_SOFT_WINDOW = 2.0


def sample_conditioned(
    params: EnsembleParams,
    constraint: Constraint,
    window: Optional[float] = None,
    seed=0,
    max_attempts: int = 10_000_000,
) -> ConditionedSample:
    """One conditioned draw; see sample_conditioned_many for the semantics."""
    return sample_conditioned_many(
        params, constraint, 1, window=window, seed=seed, max_attempts=max_attempts
    )[0]


def sample_conditioned_many(
    params: EnsembleParams,
    constraint: Constraint,
    count: int,
    window: Optional[float] = None,
    seed=0,
    max_attempts: int = 10_000_000,
) -> list[ConditionedSample]:
    """Rejection sampling of the conditioned measure.

    window=None (or 0) is exact mode: the conditional law on each fiber is
    uniform, inherited from the product measure depending only on the pinned
    statistics.  A positive window w accepts offsets within w standard
    deviations per conditioned coordinate (sigmas from the covariance sums);
    the achieved offsets are reported per sample.  The acceptance probability
    of exact endpoint conditioning decays polynomially (roughly n^(-5/3) at
    calibrated parameters), which is what max_attempts guards.
    """
    _check_constraint_kind(params, constraint)
    if count < 1:
        raise DomainError("count must be >= 1")
    exact = window is None or window == 0.0
    s_probe = build_support(params)
    sig1 = sig2 = sigN = sigL = 0.0
    if not exact:
        sig1, sig2, sigN, sigL = _window_sigmas(params, s_probe)
    w1 = 0.0 if exact else window * sig1
    w2 = 0.0 if exact else window * sig2
    wN = 0.0 if exact else window * sigN
    wL = 0.0 if exact else window * sigL

    s = _conditioned_support(params, constraint, w1, w2, wL)
    rng = _spawn_generator(seed)
    results: list[ConditionedSample] = []
    attempts = 0
    best_miss = math.inf
    best_offsets: dict = {}
    block = 256
    need_len = constraint.length is not None

    while len(results) < count:
        if attempts >= max_attempts:
            raise BudgetError(
                f"conditioned sampler exhausted {attempts} attempts "
                f"({len(results)}/{count} accepted); nearest miss {best_offsets}"
            )
        block = min(block, max_attempts - attempts)
        rows, cols, mult, x1, x2, nv = _draw_block(s, block, rng)
        attempts += block
        ok = np.ones(block, dtype=bool)
        miss = np.zeros(block)
        if constraint.endpoint is not None:
            d1 = x1 - constraint.endpoint[0]
            d2 = x2 - constraint.endpoint[1]
            ok &= (np.abs(d1) <= w1) & (np.abs(d2) <= w2)
            miss += (np.abs(d1) / max(sig1, 1.0)) ** 2 + (np.abs(d2) / max(sig2, 1.0)) ** 2
        if constraint.vertices is not None:
            dN = nv - constraint.vertices
            ok &= np.abs(dN) <= wN
            miss += (np.abs(dN) / max(sigN, 1.0)) ** 2
        if need_len:
            ell = np.bincount(rows, weights=s.length[cols] * mult, minlength=block)
            lo, hi = constraint.length
            ok &= (ell >= lo - wL) & (ell < hi + wL)
            mid = 0.5 * (lo + hi)
            miss += (np.abs(ell - mid) / max(sigL, 1.0)) ** 2
        hit_rows = np.where(ok)[0]
        # rows from nonzero() are row-major sorted: slice actives per hit
        row_starts = np.searchsorted(rows, hit_rows, side="left")
        row_ends = np.searchsorted(rows, hit_rows, side="right")
        for r, lo_i, hi_i in zip(hit_rows, row_starts, row_ends):
            cpick = cols[lo_i:hi_i]
            mpick = mult[lo_i:hi_i]
            chain = chain_from_sparse(s.x1[cpick], s.x2[cpick], mpick)
            entries = {
                Direction(int(s.x1[cb]), int(s.x2[cb])): int(m)
                for cb, m in zip(cpick, mpick)
            }
            offsets: dict = {}
            if constraint.endpoint is not None:
                offsets["endpoint"] = (int(x1[r] - constraint.endpoint[0]),
                                       int(x2[r] - constraint.endpoint[1]))
            if constraint.vertices is not None:
                offsets["vertices"] = int(nv[r] - constraint.vertices)
            if need_len:
                offsets["length"] = float(ell[r] - 0.5 * (constraint.length[0] + constraint.length[1]))
            results.append(ConditionedSample(
                vertex_map=VertexMap(entries), chain=chain,
                attempts=attempts, offsets=offsets,
            ))
            if len(results) >= count:
                break
        if hit_rows.size == 0:
            i = int(np.argmin(miss))
            if miss[i] < best_miss:
                best_miss = float(miss[i])
                best_offsets = {"X1": int(x1[i]), "X2": int(x2[i]), "N": int(nv[i])}
        if block < 65536:
            block *= 2
    return results


# ---------------------------------------------------------------------------
# the count estimator

@dataclass(frozen=True)
class CountEstimate:
    estimate: float
    standard_error: float
    hits: int
    replicas: int
    log_prefactor: float
    zero_hits: bool
    upper_bound: Optional[float] = None


def log_prefactor(params: EnsembleParams, n1: int, n2: int, vertices: int) -> float:
    """log of the factor turning Q(endpoint=(n1,n2), N=vertices) into the
    exact count, restricted to the box support (restriction is lossless,
    see module docstring)."""
    if params.kind != "endpoint":
        raise DomainError("the count identity needs endpoint-kind parameters")
    if not (0.0 < params.z1 < 1.0 and 0.0 < params.z2 < 1.0):
        raise DomainError("prefactor needs z1, z2 in (0,1)")
    s = build_support(params, box=(n1, n2))
    lam = params.lam
    tail = float(np.sum(np.log1p((lam - 1.0) * s.rho) - np.log1p(-s.rho)))
    return (
        -n1 * math.log(params.z1)
        - n2 * math.log(params.z2)
        - vertices * math.log(lam)
        + tail
    )


def log_probability(params: EnsembleParams, nu: VertexMap, n1: int, n2: int) -> float:
    """log Q(nu) over the box support {x1<=n1, x2<=n2} (same restriction as
    log_prefactor, so the two compose into the exact counting identity)."""
    s = build_support(params, box=(n1, n2))
    lam = params.lam
    logp = float(np.sum(np.log1p(-s.rho) - np.log1p((lam - 1.0) * s.rho)))
    for d, m in nu.items():
        rho = weight(params, d)
        logp += m * math.log(rho) + math.log(lam)
    return logp


def estimate_count(
    n1: int,
    n2: int,
    vertices: int,
    params: EnsembleParams,
    replicas: int = 100_000,
    seed=0,
    threads: int = 1,
    block_size: int = 50_000,
) -> CountEstimate:
    """Monte Carlo estimate of the exact chain count via the factorization
    identity: hit frequency of {endpoint=(n1,n2), N=vertices} times the
    exactly computed prefactor.  Standard error by the delta method.

    Replicas are drawn in fixed blocks; block i uses the i-th spawned child
    of the master seed, so the result is bitwise independent of the thread
    count used to evaluate the blocks.
    """
    if params.kind != "endpoint":
        raise DomainError("estimate_count needs endpoint-kind parameters")
    if replicas < 1000:
        raise DomainError("use at least 1000 replicas")
    if vertices < 0:
        raise DomainError("vertex count must be nonnegative")
    lp = log_prefactor(params, n1, n2, vertices)
    s = build_support(params, box=(n1, n2))

    blocks = [(i, min(block_size, replicas - i * block_size))
              for i in range((replicas + block_size - 1) // block_size)]

    def run_block(args) -> int:
        index, size = args
        rng = _spawn_generator(seed, index)
        hits = 0
        step = 20_000
        done = 0
        while done < size:
            b = min(step, size - done)
            _, _, _, x1, x2, nv = _draw_block(s, b, rng)
            hits += int(np.sum((x1 == n1) & (x2 == n2) & (nv == vertices)))
            done += b
        return hits

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(run_block, blocks))
    else:
        hits = sum(map(run_block, blocks))

    phat = hits / replicas
    scale = math.exp(lp)
    if hits == 0:
        return CountEstimate(
            estimate=0.0, standard_error=0.0, hits=0, replicas=replicas,
            log_prefactor=lp, zero_hits=True,
            upper_bound=scale * 3.0 / replicas,
        )
    se = scale * math.sqrt(phat * (1.0 - phat) / replicas)
    return CountEstimate(
        estimate=scale * phat, standard_error=se, hits=hits,
        replicas=replicas, log_prefactor=lp, zero_hits=False,
    )


# ---------------------------------------------------------------------------
# angular decomposition

def angular_masses(
    params: EnsembleParams,
    sector_edges: Sequence[float],
    support: Optional[Support] = None,
) -> list[float]:
    """Exact expected euclidean-length mass per angular sector.

    Sector j collects directions with angle in [edges[j], edges[j+1]); a
    direction exactly on an interior edge contributes half to each adjacent
    sector (the outermost edges keep their full mass inboard), which keeps
    the decomposition exactly symmetric under x1 <-> x2.
    """
    edges = np.asarray(sector_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise DomainError("need at least two sector edges")
    if np.any(np.diff(edges) <= 0.0):
        raise DomainError("sector edges must be strictly increasing")
    if edges[0] < 0.0 or edges[-1] > math.pi / 2.0 + 1e-15:
        raise DomainError("sector edges must lie in [0, pi/2]")
    s = support if support is not None else build_support(params)
    mean = _mean_multiplicity(params, s)
    mass = s.length * mean
    theta = np.arctan2(s.x2, s.x1)
    inside = (theta >= edges[0]) & (theta <= edges[-1])
    theta = theta[inside]
    mass = mass[inside]
    idx = np.searchsorted(edges, theta, side="right") - 1
    idx = np.clip(idx, 0, edges.size - 2)
    sums = np.bincount(idx, weights=mass, minlength=edges.size - 1)
    # split the interior boundary atoms
    for j in range(1, edges.size - 1):
        on_edge = theta == edges[j]
        if np.any(on_edge):
            atom = float(mass[on_edge].sum())
            sums[j] -= 0.5 * atom
            sums[j - 1] += 0.5 * atom
    return [float(v) for v in sums]
