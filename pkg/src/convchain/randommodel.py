"""The random-point analogue: convexity probability of uniform points.

k points drawn uniformly in the unit square form, together with the corners
(0,0) and (1,1), a convex chain with probability exactly 1/(k!(k+1)!).  The
Monte Carlo check here is the empirical counterpart of that closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError


def is_convex_through_corners(points: Sequence[tuple[float, float]]) -> bool:
    """True iff sorting the points by x (ties by y) gives, with the corners
    prepended/appended, strictly increasing coordinates and strictly
    increasing side slopes.

    x-ties have probability zero for random inputs; the y-tiebreak only makes
    the predicate total (a tied pair then fails the strict-increase test).
    """
    pts = sorted((float(x), float(y)) for x, y in points)
    for x, y in pts:
        if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
            raise DomainError("points must lie strictly inside the unit square")
    full = [(0.0, 0.0), *pts, (1.0, 1.0)]
    dxs = [full[i + 1][0] - full[i][0] for i in range(len(full) - 1)]
    dys = [full[i + 1][1] - full[i][1] for i in range(len(full) - 1)]
    if any(dx <= 0.0 for dx in dxs) or any(dy <= 0.0 for dy in dys):
        return False
    for i in range(len(dxs) - 1):
        # slope increase via cross product; dx > 0 on both sides
        if dys[i] * dxs[i + 1] >= dys[i + 1] * dxs[i]:
            return False
    return True


@dataclass(frozen=True)
class ConvexProbabilityEstimate:
    k: int
    trials: int
    estimate: float
    standard_error: float
    exact: float


def exact_convex_probability(k: int) -> float:
    if k < 1:
        raise DomainError("k must be >= 1")
    return 1.0 / (math.factorial(k) * math.factorial(k + 1))


def convex_probability_mc(
    k: int, trials: int, seed=0, chunk: int = 250_000
) -> ConvexProbabilityEstimate:
    """Monte Carlo frequency of the convexity event over i.i.d. uniform
    k-point samples, with the binomial standard error and the exact target."""
    if k < 1:
        raise DomainError("k must be >= 1")
    if trials < 10_000:
        raise DomainError("use at least 10^4 trials")
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        pts = rng.random((b, k, 2))
        order = np.argsort(pts[:, :, 0], axis=1)
        srt = np.take_along_axis(pts, order[:, :, None], axis=1)
        xs = np.concatenate(
            [np.zeros((b, 1)), srt[:, :, 0], np.ones((b, 1))], axis=1
        )
        ys = np.concatenate(
            [np.zeros((b, 1)), srt[:, :, 1], np.ones((b, 1))], axis=1
        )
        dx = np.diff(xs, axis=1)
        dy = np.diff(ys, axis=1)
        ok = np.all(dx > 0.0, axis=1) & np.all(dy > 0.0, axis=1)
        cross = dy[:, :-1] * dx[:, 1:] - dy[:, 1:] * dx[:, :-1]
        ok &= np.all(cross < 0.0, axis=1)
        hits += int(ok.sum())
        done += b
    phat = hits / trials
    se = math.sqrt(phat * (1.0 - phat) / trials)
    return ConvexProbabilityEstimate(
        k=k, trials=trials, estimate=phat, standard_error=se,
        exact=exact_convex_probability(k),
    )
