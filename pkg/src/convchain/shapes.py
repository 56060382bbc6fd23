"""Limit-shape curves and chain-to-curve distance functionals.

Endpoint-conditioned chains concentrate on the parabola sqrt(y) = 1-sqrt(1-x)
(equivalently (x+y)^2 = 4y); length-conditioned chains on the convex quarter
circle; chains with both endpoint and length pinned on a one-parameter family
C_L, L in (sqrt2, 2), built from the angular-mass kernels

    alpha branch (L > pi/2): K(u) = (alpha + cos(u - pi/4))^-3
    beta  branch (L < pi/2): K(u) = (beta  - cos(u - pi/4))^-3

as x(phi) = int_0^phi cos(u) K(u) du, y(phi) = int_0^phi sin(u) K(u) du,
both scaled by 1/x(pi/2).  With that normalization the endpoint is (1,1)
(x(pi/2) = y(pi/2) by the u <-> pi/2-u symmetry) and the arc length of the
scaled curve reproduces the defining ratio

    L = sqrt2 * int_0^{pi/4} K0 / int_0^{pi/4} cos(u) K0   (K0 unshifted)

identically, so solving that ratio for the parameter and integrating the
kernel is self-consistent.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .chain import ConvexChain
from .errors import DomainError

SQRT2 = math.sqrt(2.0)
PARABOLA_LENGTH = 1.0 + math.log(1.0 + SQRT2) / SQRT2
CIRCLE_LENGTH = math.pi / 2.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class CurveSpec:
    """A sampled limit curve in [0,1]^2 from (0,0) to (1,1)."""

    kind: str
    points: np.ndarray
    nominal_length: float
    param: Optional[float] = None

    def arc_length(self) -> float:
        d = np.diff(self.points, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())


def parabola_height(x):
    """y = (1 - sqrt(1-x))^2 on [0,1]."""
    return (1.0 - np.sqrt(np.clip(1.0 - np.asarray(x, dtype=float), 0.0, None))) ** 2


def parabola(grid_points: int) -> CurveSpec:
    """The parabola sampled along the diagonal coordinate v in [0, sqrt2]:
    (x, y) = (sqrt2 v - v^2/2, v^2/2), which is exactly symmetric and keeps
    chord lengths uniform where the x-parametrization degenerates."""
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    v = np.linspace(0.0, SQRT2, grid_points)
    pts = np.column_stack([SQRT2 * v - 0.5 * v * v, 0.5 * v * v])
    return CurveSpec(kind="parabola", points=pts, nominal_length=PARABOLA_LENGTH)


def circle(grid_points: int) -> CurveSpec:
    """Convex quarter circle from (0,0) to (1,1): (sin t, 1 - cos t).

    This is the increasing-slope arc (center (0,1)); the slopes run from 0
    at the origin to vertical at (1,1), matching chain convexity.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    t = np.linspace(0.0, math.pi / 2.0, grid_points)
    pts = np.column_stack([np.sin(t), 1.0 - np.cos(t)])
    return CurveSpec(kind="circle", points=pts, nominal_length=CIRCLE_LENGTH)


# ---------------------------------------------------------------------------
# quadrature

def quad_composite(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    grade_toward: Optional[float] = None,
    panels: int = 64,
) -> float:
    """Composite Gauss-Legendre with panel doubling until the value settles.

    grade_toward places geometrically shrinking panels against one endpoint,
    which resolves the integrable (x-x0)^-3-type blow-ups of the family
    kernels near the parameter boundary.
    """
    def edges_for(k: int) -> np.ndarray:
        if grade_toward is None:
            return np.linspace(a, b, k + 1)
        t = np.linspace(0.0, 1.0, k + 1)
        g = t**3  # cubic clustering toward 0
        if abs(grade_toward - a) < abs(grade_toward - b):
            return a + (b - a) * g
        return b - (b - a) * g[::-1]

    def evaluate(k: int) -> float:
        e = edges_for(k)
        mid = 0.5 * (e[:-1] + e[1:])
        half = 0.5 * (e[1:] - e[:-1])
        u = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = f(u.ravel()).reshape(u.shape)
        return float(np.sum(vals @ _GL_WEIGHTS * half))

    prev = evaluate(panels)
    for _ in range(8):
        panels *= 2
        cur = evaluate(panels)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


def family_kernel(branch: str, param: float) -> Callable[[np.ndarray], np.ndarray]:
    """The curve-parametrization kernel K(u) on [0, pi/2]."""
    if branch == "alpha":
        return lambda u: (param + np.cos(u - math.pi / 4.0)) ** -3.0
    if branch == "beta":
        return lambda u: (param - np.cos(u - math.pi / 4.0)) ** -3.0
    raise DomainError(f"unknown branch {branch!r}")


def _length_ratio(branch: str, param: float) -> float:
    """L = sqrt2 * int_0^{pi/4} (param +- cos w)^-3 / int cos w (...)^-3."""
    if branch == "alpha":
        den = lambda w: (param + np.cos(w)) ** -3.0
        sing_end = math.pi / 4.0
    else:
        den = lambda w: (param - np.cos(w)) ** -3.0
        sing_end = 0.0
    top = quad_composite(den, 0.0, math.pi / 4.0, grade_toward=sing_end)
    bot = quad_composite(lambda w: np.cos(w) * den(w), 0.0, math.pi / 4.0,
                         grade_toward=sing_end)
    return SQRT2 * top / bot


def solve_family_parameter(L: float) -> tuple[str, float]:
    """(branch, parameter) of the curve C_L.

    L > pi/2 selects the alpha branch (alpha in (-1/sqrt2, inf), decreasing
    in L); L <= pi/2 the beta branch (beta in (1, inf), increasing in L,
    covering pi/2 only in the beta -> inf limit).  Bisection to 1e-10 in L.
    """
    if not SQRT2 < L < 2.0:
        raise DomainError(
            f"L must lie strictly between sqrt2 (the diagonal) and 2 (the "
            f"two sides of the square); got {L}"
        )
    tol = 1e-10
    if L > CIRCLE_LENGTH:
        lo, hi = -1.0 / SQRT2 + 1e-9, 1.0
        while _length_ratio("alpha", hi) > L:
            hi *= 2.0
            if hi > 1e9:
                break
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _length_ratio("alpha", mid) > L:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14 * max(1.0, abs(hi)):
                break
        param = 0.5 * (lo + hi)
        if abs(_length_ratio("alpha", param) - L) > tol * max(1.0, L):
            raise DomainError(f"failed to match L={L} on the alpha branch")
        return "alpha", param
    lo, hi = 1.0 + 1e-9, 2.0
    while _length_ratio("beta", hi) < L:
        hi *= 2.0
        if hi > 1e9:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _length_ratio("beta", mid) < L:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * max(1.0, abs(hi)):
            break
    param = 0.5 * (lo + hi)
    if abs(_length_ratio("beta", param) - L) > tol * max(1.0, L):
        raise DomainError(f"failed to match L={L} on the beta branch")
    return "beta", param


def family_curve(L: float, grid_points: int = 10_001) -> CurveSpec:
    """The curve C_L sampled on a uniform tangent-angle grid.

    The unnormalized primitives X(phi), Y(phi) of cos(u)K(u), sin(u)K(u) are
    accumulated per segment with Gauss-Legendre panels and both scaled by
    1/X(pi/2); the tangent angle IS the parameter, so the uniform grid is
    self-grading in arc length.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    branch, param = solve_family_parameter(L)
    kern = family_kernel(branch, param)
    phi = np.linspace(0.0, math.pi / 2.0, grid_points)
    mid = 0.5 * (phi[:-1] + phi[1:])
    half = 0.5 * (phi[1:] - phi[:-1])
    u = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    ku = kern(u.ravel()).reshape(u.shape)
    w = _GL_WEIGHTS[None, :] * half[:, None]
    dx = np.sum(np.cos(u) * ku * w, axis=1)
    dy = np.sum(np.sin(u) * ku * w, axis=1)
    x = np.concatenate([[0.0], np.cumsum(dx)])
    y = np.concatenate([[0.0], np.cumsum(dy)])
    scale = 1.0 / x[-1]
    pts = np.column_stack([x * scale, y * scale])
    return CurveSpec(kind=f"family_{branch}", points=pts, nominal_length=L,
                     param=param)


# ---------------------------------------------------------------------------
# distances

def _normalized_chain_points(chain: ConvexChain, n: float) -> np.ndarray:
    v = np.asarray(chain.vertices, dtype=float)
    if v.shape[0] >= 2:
        mids = 0.5 * (v[:-1] + v[1:])
        v = np.vstack([v, mids])
    return v / float(n)


def polyline_distance(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to a polyline, by segment projection."""
    a = poly[:-1]
    ab = poly[1:] - a
    denom = np.einsum("kd,kd->k", ab, ab)
    denom = np.where(denom == 0.0, 1.0, denom)
    out = np.empty(points.shape[0])
    chunk = max(1, int(2e6 / max(1, a.shape[0])))
    for i in range(0, points.shape[0], chunk):
        p = points[i : i + chunk]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("mkd,kd->mk", ap, ab) / denom[None, :], 0.0, 1.0)
        d = ap - t[:, :, None] * ab[None, :, :]
        out[i : i + chunk] = np.sqrt(np.einsum("mkd,mkd->mk", d, d).min(axis=1))
    return out


def sup_distance(chain: ConvexChain, curve: CurveSpec, n: float) -> float:
    """Largest deviation of the 1/n-scaled chain from the limit curve.

    Parabola curves use the vertical neighbourhood functional
    max |y/n - l(x/n)| over vertices and side midpoints; points overshooting
    x/n > 1 (possible under soft conditioning) add their horizontal
    overshoot, since the parabola has no extension past x = 1.  Other curves
    use the euclidean distance to the sampled polyline.
    """
    ex, ey = chain.endpoint
    if len(chain.vertices) > 1 and (ex == 0 or ey == 0):
        warnings.warn("chain endpoint lies on an axis; distance is degenerate")
    pts = _normalized_chain_points(chain, n)
    if curve.kind == "parabola":
        over = np.clip(pts[:, 0] - 1.0, 0.0, None)
        d = np.abs(pts[:, 1] - parabola_height(np.minimum(pts[:, 0], 1.0))) + over
        return float(d.max())
    return float(polyline_distance(pts, curve.points).max())
