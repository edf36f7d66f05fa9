"""Independent grid-search oracle for the entropy bound at small p.

Enumerates the feasible phase-mass splits on a regular grid (the last
free pattern is determined by the total-mass constraint), evaluates the
objective directly from its defining sum, and refines locally around the
best grid point.  Written against the formulas only; shares no code path
with the engine's optimizer.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def _objective(probs: np.ndarray, mask_value: int, p: int, nu: np.ndarray) -> float:
    pa = 0.0
    total = 0.0
    for x in range(1 << p):
        for z in range(1 << p):
            if (x ^ z) & mask_value:
                continue
            w = probs[x] * probs[z]
            pa += w
            if w <= 0.0:
                continue
            t = 0.5 * (1.0 - abs((probs[x] - 2.0 * nu[x]) * (probs[z] - 2.0 * nu[z])) / w)
            t = min(max(t, 0.0), 0.5)
            if 0.0 < t < 1.0:
                total += w * (-t * math.log2(t) - (1.0 - t) * math.log2(1.0 - t))
    return 1.0 - total / pa


def entropy_bound_grid(
    probs: np.ndarray,
    qx: float,
    mask_value: int,
    step: float = 1e-3,
    refine_rounds: int = 3,
) -> float:
    """Minimum of the objective over the nu polytope by exhaustive search.

    Free coordinates are every pattern but the last positive one, each
    gridded over [0, min(Q, qx)]; the last coordinate is qx minus the
    rest and must land in its own box.  The best grid point is refined
    ``refine_rounds`` times on a 10x finer local grid.
    """
    probs = np.asarray(probs, dtype=float)
    p = int(round(math.log2(probs.size)))
    if qx <= 0.0:
        return _objective(probs, mask_value, p, np.zeros(probs.size))

    pos = [i for i in range(probs.size) if probs[i] > 0.0]
    free, last = pos[:-1], pos[-1]

    def feasible_nu(free_vals: tuple[float, ...]) -> np.ndarray | None:
        nu = np.zeros(probs.size)
        for i, v in zip(free, free_vals):
            nu[i] = v
        rest = qx - sum(free_vals)
        if rest < -1e-12 or rest > probs[last] + 1e-12:
            return None
        nu[last] = min(max(rest, 0.0), probs[last])
        return nu

    def axes(center: list[float] | None, width: float, h: float) -> list[np.ndarray]:
        out = []
        for pos_i, i in enumerate(free):
            top = min(probs[i], qx)
            if center is None:
                lo, hi = 0.0, top
            else:
                lo = max(0.0, center[pos_i] - width)
                hi = min(top, center[pos_i] + width)
            n = max(int(round((hi - lo) / h)), 1)
            out.append(np.linspace(lo, hi, n + 1))
        return out

    best_val = math.inf
    best_free: list[float] | None = None
    grid_step = step
    grids = axes(None, 0.0, grid_step)
    for _ in range(refine_rounds + 1):
        for combo in itertools.product(*grids):
            nu = feasible_nu(combo)
            if nu is None:
                continue
            val = _objective(probs, mask_value, p, nu)
            if val < best_val:
                best_val = val
                best_free = list(combo)
        assert best_free is not None
        grid_step /= 10.0
        grids = axes(best_free, grid_step * 10.0, grid_step)
    return best_val
