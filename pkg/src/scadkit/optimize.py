"""Projected local descent on a box intersected with one linear equality.

The feasible set is {u : lo <= u_i <= hi, sum_i c_i u_i = t} with strictly
positive coefficients c.  Euclidean projection onto it is clip(v + mu*c)
for the unique shift mu making the equality hold; since the constraint
value is piecewise linear and nondecreasing in mu, the shift is found
exactly by walking the sorted clip breakpoints.  The descent is spectral
projected gradient (Barzilai-Borwein steps, nonmonotone Armijo), run on
all starts at once so every operation is a whole-array one.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

_FEAS_TOL = 1e-10


def _check_feasible_target(coeff: np.ndarray, target: float, lo: float, hi: float) -> None:
    if np.any(coeff <= 0.0):
        raise ValueError("projection coefficients must be strictly positive")
    total = float(coeff.sum())
    if not lo * total - _FEAS_TOL <= target <= hi * total + _FEAS_TOL:
        raise ValueError(f"target {target} outside feasible range [{lo * total}, {hi * total}]")


def project_box_hyperplane_batch(
    v: np.ndarray,
    coeff: np.ndarray,
    target: float,
    lo: float = -1.0,
    hi: float = 1.0,
) -> np.ndarray:
    """Row-wise Euclidean projection of v (S, K) onto the feasible set.

    g(mu) = coeff . clip(v + mu*coeff) is piecewise linear and
    nondecreasing in mu: coordinate i is pinned at lo below (lo - v_i)/c_i,
    linear in between, pinned at hi above (hi - v_i)/c_i.  Sweeping the
    sorted breakpoints accumulates slope and intercept, after which the
    segment containing the target is solved exactly.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    coeff = np.asarray(coeff, dtype=float)
    _check_feasible_target(coeff, target, lo, hi)
    n_rows, k = v.shape
    c = coeff[None, :]
    mus = np.concatenate(((lo - v) / c, (hi - v) / c), axis=1)
    dslope = np.broadcast_to(np.concatenate((coeff * coeff, -coeff * coeff)), (n_rows, 2 * k))
    dconst = np.concatenate((c * v - coeff[None, :] * lo, coeff[None, :] * hi - c * v), axis=1)
    order = np.argsort(mus, axis=1, kind="stable")
    mus = np.take_along_axis(mus, order, axis=1)
    slope = np.cumsum(np.take_along_axis(dslope, order, axis=1), axis=1)
    const = lo * float(coeff.sum()) + np.cumsum(np.take_along_axis(dconst, order, axis=1), axis=1)
    g_at = const + mus * slope

    reaches = g_at >= target
    first = np.where(reaches.any(axis=1), reaches.argmax(axis=1), 2 * k - 1)
    mu = np.empty(n_rows)
    rows = np.arange(n_rows)
    at_start = first == 0
    mu[at_start] = mus[at_start, 0]
    mid = ~at_start
    prev = first[mid] - 1
    seg_slope = slope[rows[mid], prev]
    seg_const = const[rows[mid], prev]
    interior = np.where(
        seg_slope > 0.0,
        (target - seg_const) / np.where(seg_slope > 0.0, seg_slope, 1.0),
        mus[rows[mid], prev],
    )
    # rows whose g never reaches the target sit at the top plateau
    interior = np.where(reaches.any(axis=1)[mid], interior, mus[mid, -1])
    mu[mid] = interior
    return np.clip(v + mu[:, None] * c, lo, hi)


def project_box_hyperplane(
    v: np.ndarray,
    coeff: np.ndarray,
    target: float,
    lo: float = -1.0,
    hi: float = 1.0,
) -> np.ndarray:
    """Euclidean projection of one vector onto the feasible set."""
    return project_box_hyperplane_batch(v[None, :], coeff, target, lo, hi)[0]


def minimize_projected_multistart(
    f_batch: Callable[[np.ndarray], np.ndarray],
    f_grad_batch: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    starts: np.ndarray,
    coeff: np.ndarray,
    target: float,
    max_iter: int = 500,
    f_tol: float = 1e-8,
    patience: int = 5,
) -> tuple[np.ndarray, np.ndarray]:
    """Spectral projected gradient descent from every start row at once.

    Barzilai-Borwein step lengths with a nonmonotone Armijo search against
    the worst of the last eight objective values per row; a row stops once
    accepted steps have improved its best value by less than f_tol for
    ``patience`` iterations in a row, or its line search dies.  Returns
    the best iterate and objective value per row.
    """
    u = project_box_hyperplane_batch(np.asarray(starts, dtype=float), coeff, target)
    f, g = f_grad_batch(u)
    best_u = u.copy()
    best_f = f.copy()
    recent = np.repeat(f[:, None], 8, axis=1)
    n_updates = np.zeros(f.size, dtype=int)
    step = np.ones(f.size)
    stalled = np.zeros(f.size, dtype=int)
    active = np.ones(f.size, dtype=bool)

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        f_ref = recent[idx].max(axis=1)
        trial = step[idx].copy()
        cand = np.empty((idx.size, u.shape[1]))
        f_cand = np.full(idx.size, np.inf)
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(60):
            rows = np.flatnonzero(pending)
            if rows.size == 0:
                break
            sub = idx[rows]
            c_rows = project_box_hyperplane_batch(u[sub] - trial[rows, None] * g[sub], coeff, target)
            delta = c_rows - u[sub]
            move = np.einsum("ij,ij->i", delta, delta)
            dead = move < 1e-28
            fc = f_batch(c_rows)
            ok = (fc <= f_ref[rows] - 1e-4 * move / trial[rows]) & ~dead
            cand[rows[ok]] = c_rows[ok]
            f_cand[rows[ok]] = fc[ok]
            pending[rows[ok | dead]] = False
            active[sub[dead]] = False
            trial[rows[~ok & ~dead]] *= 0.5
        acc = np.flatnonzero(np.isfinite(f_cand))
        if acc.size == 0:
            break
        sub = idx[acc]
        f_new, g_new = f_grad_batch(cand[acc])
        s = cand[acc] - u[sub]
        y = g_new - g[sub]
        sy = np.einsum("ij,ij->i", s, y)
        ss = np.einsum("ij,ij->i", s, s)
        step[sub] = np.where(sy > 0.0, np.clip(ss / np.where(sy > 0.0, sy, 1.0), 1e-10, 1e8), 1.0)
        u[sub] = cand[acc]
        f[sub] = f_new
        g[sub] = g_new
        recent[sub, n_updates[sub] % 8] = f_new
        n_updates[sub] += 1
        improved = f_new < best_f[sub] - f_tol
        stalled[sub] = np.where(improved, 0, stalled[sub] + 1)
        better = f_new < best_f[sub]
        best_u[sub[better]] = cand[acc][better]
        best_f[sub[better]] = f_new[better]
        active[sub[stalled[sub] >= patience]] = False
        # rows whose line search was exhausted without acceptance stop too
        rejected = idx[~np.isfinite(f_cand)]
        active[rejected] = False
    return best_u, best_f


def minimize_projected(
    f_only: Callable[[np.ndarray], float],
    f_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    u0: np.ndarray,
    coeff: np.ndarray,
    target: float,
    max_iter: int = 500,
    f_tol: float = 1e-8,
) -> tuple[np.ndarray, float]:
    """Single-start wrapper around the batched descent."""

    def fb(u: np.ndarray) -> np.ndarray:
        return np.array([f_only(row) for row in u])

    def fgb(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pairs = [f_grad(row) for row in u]
        return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])

    best_u, best_f = minimize_projected_multistart(
        fb, fgb, np.asarray(u0, dtype=float)[None, :], coeff, target,
        max_iter=max_iter, f_tol=f_tol,
    )
    return best_u[0], float(best_f[0])


def multistart_points(
    k: int, rng: np.random.Generator, n_starts: int = 16
) -> np.ndarray:
    """Start points in [-1, 1]^K: sign corners, the center, random fills."""
    starts: list[np.ndarray] = [np.zeros(k)]
    if k <= 4:
        for bits in range(1 << k):
            corner = np.array([1.0 if (bits >> i) & 1 else -1.0 for i in range(k)])
            starts.append(corner)
    else:
        starts.append(np.ones(k))
        starts.append(-np.ones(k))
        for _ in range(6):
            starts.append(rng.choice([-1.0, 1.0], size=k))
    while len(starts) < n_starts:
        starts.append(rng.uniform(-1.0, 1.0, size=k))
    return np.array(starts)
