"""Key-rate engine for selective advantage distillation over GHZ raw keys.

Given the error-pattern distribution and a per-Bob CAD on/off mask, this
module computes: the parity-check acceptance set and probability, the
collective-attack lower bound on Eve's uncertainty about a distilled bit
(a constrained minimization over the adversary's phase-mass split across
error patterns), post-distillation error accounting, error-correction
leakage, the assembled asymptotic rate, the no-distillation baseline, and
the exhaustive search over masks.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .bits import BitPattern, binary_entropy, binary_entropy_arr
from .noise import ErrorDistribution, NoiseScenario, distribution_from_scenario, marginal_link_error
from .optimize import minimize_projected_multistart, multistart_points

_NU_FEAS_TOL = 1e-8
_SMOOTH_EPS = 1e-10
_TIE_TOL = 1e-9
_PAIR_CAP = 1 << 24


def _h_tau(t: np.ndarray) -> np.ndarray:
    """h on arrays already clipped to [0, 1/2]; maskless for speed."""
    ts = np.maximum(t, 1e-300)
    return -(ts * np.log2(ts) + (1.0 - ts) * np.log2(1.0 - ts))


class DegenerateAcceptanceError(ValueError):
    """The acceptance probability vanished (pathological distribution)."""


@dataclass(frozen=True)
class CadMask:
    """Flag register over the Bobs: bit i set means Bob_i runs CAD."""

    mask: BitPattern

    @classmethod
    def from_string(cls, bits: str) -> "CadMask":
        return cls(BitPattern.from_string(bits))

    @classmethod
    def none(cls, p: int) -> "CadMask":
        return cls(BitPattern(0, p))

    @classmethod
    def all_on(cls, p: int) -> "CadMask":
        return cls(BitPattern((1 << p) - 1, p))

    @property
    def width(self) -> int:
        return self.mask.width

    def popcount(self) -> int:
        return self.mask.popcount()

    def is_on(self, j: int) -> bool:
        return self.mask.bit(j) == 1

    def __str__(self) -> str:
        return str(self.mask)


@dataclass(frozen=True, eq=False)
class NuVector:
    """Phase-flip mass assigned to each error pattern by a candidate attack."""

    p: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (1 << self.p,):
            raise ValueError(f"expected {1 << self.p} entries, got shape {values.shape}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def nu(self, pattern: Union[BitPattern, int]) -> float:
        v = pattern.value if isinstance(pattern, BitPattern) else int(pattern)
        return float(self.values[v])

    @classmethod
    def zeros(cls, p: int) -> "NuVector":
        return cls(p, np.zeros(1 << p))


@dataclass(frozen=True, eq=False)
class KeyRateReport:
    """Everything the rate formula composes, plus the achieving attack split.

    For a nonzero mask, ``rate == (p_accept / 2) * (entropy_bound - leak_ec)``
    exactly as composed.  The all-off mask (produced only by ``best_mask``
    and sweeps) instead carries the no-CAD baseline protocol: full
    throughput, entropy term ``1 - h(qx)``, and ``rate == baseline_rate``.
    """

    mask: CadMask
    p_accept: float
    entropy_bound: float
    post_cad_errors: tuple[float, ...]
    leak_ec: float
    rate: float
    minimizer: NuVector | None
    baseline_rate: float


def _check_mask(d: ErrorDistribution, mask: CadMask) -> None:
    if mask.width != d.p:
        raise ValueError(f"mask width {mask.width} does not match party count {d.p}")


def acceptance_set(mask: CadMask) -> set[tuple[BitPattern, BitPattern]]:
    """All (left, right) error-pattern pairs passing every enabled parity check.

    A pair is accepted when the two patterns agree on every mask bit, so the
    set has 2^(2p - popcount(mask)) elements.
    """
    p = mask.width
    mval = mask.mask.value
    free = [b for b in range(p) if not (mval >> b) & 1]
    if (1 << (p + len(free))) > _PAIR_CAP:
        # 2^(2p - popcount) pairs; refuse to materialize beyond the cap
        raise ValueError("acceptance set too large to materialize")
    pairs = set()
    for x in range(1 << p):
        base = x & mval
        for combo in range(1 << len(free)):
            z = base
            for i, b in enumerate(free):
                if (combo >> i) & 1:
                    z |= 1 << b
            pairs.add((BitPattern(x, p), BitPattern(z, p)))
    return pairs


def p_accept(d: ErrorDistribution, mask: CadMask) -> float:
    """Probability a two-round block passes every enabled Bob's parity check.

    Patterns are grouped by their restriction to the mask bits; the left
    and right patterns must land in the same group, so the probability is
    the sum of squared group masses.
    """
    _check_mask(d, mask)
    keys = np.arange(1 << d.p) & mask.mask.value
    masses = np.bincount(keys, weights=d.probs, minlength=1 << d.p)
    pa = float(masses @ masses)
    if pa <= 0.0:
        raise DegenerateAcceptanceError("acceptance probability is zero")
    return pa


def tau(q_x: float, q_z: float, nu_x: float, nu_z: float) -> float:
    """Conditional flip probability of one accepted pair term, in [0, 1/2]."""
    if q_x <= 0.0 or q_z <= 0.0:
        raise ValueError("tau requires strictly positive pattern probabilities")
    for nu, q in ((nu_x, q_x), (nu_z, q_z)):
        if nu < -_NU_FEAS_TOL or nu > q + _NU_FEAS_TOL:
            raise ValueError(f"phase mass {nu} outside [0, {q}]")
    t = 0.5 * (1.0 - abs((q_x - 2.0 * nu_x) * (q_z - 2.0 * nu_z)) / (q_x * q_z))
    return float(min(max(t, 0.0), 0.5))


def _positive_groups(d: ErrorDistribution, mask: CadMask) -> tuple[np.ndarray, list[np.ndarray]]:
    """Positive-probability pattern indices and their grouping by mask bits.

    Returns (pos, groups) where pos are the pattern values with Q > 0 and
    each group holds positions into pos that share the same checked bits.
    """
    pos = np.flatnonzero(d.probs > 0.0)
    keys = pos & mask.mask.value
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    boundaries = np.flatnonzero(np.diff(sorted_keys)) + 1
    groups = [np.asarray(g) for g in np.split(order, boundaries)]
    return pos, groups


def _feasible_nu(d: ErrorDistribution, nu: NuVector) -> np.ndarray:
    """Validate nu against d within tolerance and clip it onto the polytope."""
    if nu.p != d.p:
        raise ValueError(f"nu width {nu.p} does not match party count {d.p}")
    v = np.asarray(nu.values, dtype=float)
    if float(v.min(initial=0.0)) < -_NU_FEAS_TOL:
        raise ValueError("negative phase mass")
    excess = v - d.probs
    if float(excess.max(initial=0.0)) > _NU_FEAS_TOL:
        raise ValueError("phase mass exceeds its pattern probability")
    if abs(float(v.sum()) - d.qx) > _NU_FEAS_TOL:
        raise ValueError(f"phase masses sum to {float(v.sum())}, expected {d.qx}")
    return np.minimum(np.maximum(v, 0.0), d.probs)


def entropy_objective(d: ErrorDistribution, mask: CadMask, nu: NuVector) -> float:
    """Eve-uncertainty objective at one feasible phase-mass split, in [0, 1]."""
    _check_mask(d, mask)
    v = _feasible_nu(d, nu)
    pa = p_accept(d, mask)
    pos, groups = _positive_groups(d, mask)
    q = d.probs[pos]
    u = (q - 2.0 * v[pos]) / q
    total = 0.0
    for g in groups:
        ug = u[g]
        qg = q[g]
        t = 0.5 * (1.0 - np.abs(np.outer(ug, ug)))
        np.clip(t, 0.0, 0.5, out=t)
        total += float(np.outer(qg, qg).ravel() @ binary_entropy_arr(t).ravel())
    return float(min(max(1.0 - total / pa, 0.0), 1.0))


def _content_seed(d: ErrorDistribution, mask: CadMask) -> int:
    digest = hashlib.blake2b(digest_size=8)
    digest.update(d.probs.tobytes())
    digest.update(struct.pack("<d", d.qx))
    digest.update(struct.pack("<ii", d.p, mask.mask.value))
    return int.from_bytes(digest.digest(), "little")


def entropy_bound(
    d: ErrorDistribution,
    mask: CadMask,
    n_starts: int = 16,
    seed: int | None = None,
) -> tuple[float, NuVector]:
    """Minimum of the uncertainty objective over all feasible phase splits.

    Variables are changed to u = (Q - 2*nu)/Q per positive-probability
    pattern, turning the feasible set into a box cut by one hyperplane.
    The absolute value in the pair terms is smoothed during descent and
    the winner is re-scored exactly.  Multi-start projected descent; the
    start seed is derived from the inputs, so repeated calls agree.

    Returns the bound and the achieving phase-mass split.
    """
    _check_mask(d, mask)
    if d.qx > 1.0 + 1e-12:
        raise ValueError(f"phase error rate {d.qx} exceeds total pattern mass 1")
    if d.qx <= 1e-15:
        # the zero split is the only feasible point
        return 1.0, NuVector.zeros(d.p)
    pa = p_accept(d, mask)
    pos, groups = _positive_groups(d, mask)
    q = d.probs[pos]
    target = 1.0 - 2.0 * d.qx  # sum_i q_i u_i, since sum_i q_i = 1

    # Pad the groups into one rectangular index table so every objective
    # evaluation is a handful of whole-array operations.  Padding entries
    # reuse position 0 but carry weight 0, so they contribute nothing.
    width = max(g.size for g in groups)
    gidx = np.zeros((len(groups), width), dtype=np.intp)
    qpad = np.zeros((len(groups), width))
    for row, g in enumerate(groups):
        gidx[row, : g.size] = g
        qpad[row, : g.size] = q[g]
    w_pad = qpad[:, :, None] * qpad[:, None, :]
    eps2 = _SMOOTH_EPS * _SMOOTH_EPS

    k = q.size
    flat_cols = gidx.ravel()

    def f_batch(u: np.ndarray) -> np.ndarray:
        ug = u[:, gidx]
        t = ug[:, :, :, None] * ug[:, :, None, :]
        tm = 0.5 * (1.0 - np.sqrt(t * t + eps2))
        np.clip(tm, 0.0, 0.5, out=tm)
        return 1.0 - np.einsum("gij,sgij->s", w_pad, _h_tau(tm)) / pa

    def f_grad_batch(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ug = u[:, gidx]
        t = ug[:, :, :, None] * ug[:, :, None, :]
        phi = np.sqrt(t * t + eps2)
        tm = 0.5 * (1.0 - phi)
        np.clip(tm, 0.0, 0.5, out=tm)
        total = np.einsum("gij,sgij->s", w_pad, _h_tau(tm))
        ts = np.maximum(tm, 1e-18)
        hp = np.log2((1.0 - ts) / ts)
        contrib = np.einsum("sgij,sgj->sgi", hp * (t / phi) * w_pad, ug)
        rows = u.shape[0]
        cols = (np.arange(rows)[:, None] * k + flat_cols[None, :]).ravel()
        grad = np.bincount(cols, weights=contrib.reshape(rows, -1).ravel(), minlength=rows * k)
        return 1.0 - total / pa, grad.reshape(rows, k) / pa

    def exact_value(u: np.ndarray) -> float:
        # exact (unsmoothed) objective at one point
        ug = u[gidx]
        t = 0.5 * (1.0 - np.abs(ug[:, :, None] * ug[:, None, :]))
        np.clip(t, 0.0, 0.5, out=t)
        val = 1.0 - float(np.sum(w_pad * _h_tau(t))) / pa
        return min(max(val, 0.0), 1.0)

    def slsqp_objective(u: np.ndarray) -> tuple[float, np.ndarray]:
        fv, gv = f_grad_batch(u[None, :])
        return float(fv[0]), gv[0]

    def slsqp_polish(u0: np.ndarray) -> np.ndarray:
        res = _scipy_minimize(
            slsqp_objective,
            u0,
            jac=True,
            method="SLSQP",
            bounds=[(-1.0, 1.0)] * k,
            constraints=[{"type": "eq", "fun": lambda u: float(q @ u) - target, "jac": lambda u: q}],
            options={"maxiter": 120, "ftol": 1e-12},
        )
        return np.clip(res.x, -1.0, 1.0)

    rng = np.random.default_rng(_content_seed(d, mask) if seed is None else seed)
    starts = multistart_points(k, rng, n_starts=n_starts)
    spg_iters = 60 if k > 32 else 120
    best_u, best_f = minimize_projected_multistart(
        f_batch, f_grad_batch, starts, q, target, max_iter=spg_iters
    )
    order = np.argsort(best_f)
    candidates = [np.clip(best_u[i], -1.0, 1.0) for i in order]
    # second-order polish of the leading basins sharpens the first-order tail
    for i in order[: 1 if k > 32 else 2]:
        candidates.append(slsqp_polish(np.clip(best_u[i], -1.0, 1.0)))
    winner = min(candidates, key=exact_value)
    best_val = exact_value(winner)
    nu_vals = np.zeros(1 << d.p)
    nu_vals[pos] = np.minimum(np.maximum(q * (1.0 - winner) / 2.0, 0.0), q)
    return best_val, NuVector(d.p, nu_vals)


def post_cad_error(d: ErrorDistribution, mask: CadMask, j: int) -> float:
    """Post-distillation error accounting for Bob_j.

    With CAD on the marginal error is charged as its square over the
    acceptance probability; with CAD off it is unchanged.
    """
    _check_mask(d, mask)
    marginal = marginal_link_error(d, j)
    if mask.is_on(j):
        return marginal * marginal / p_accept(d, mask)
    return marginal


def leak_ec(post_errors) -> float:
    """Error-correction leakage: the worst Bob's binary entropy."""
    errors = list(post_errors)
    if not errors:
        raise ValueError("no post-distillation error rates given")
    return max(binary_entropy(e) for e in errors)


def no_cad_rate(d: ErrorDistribution) -> float:
    """Asymptotic rate of the plain protocol without any distillation."""
    worst = max(marginal_link_error(d, j) for j in range(1, d.p + 1))
    return 1.0 - binary_entropy(d.qx) - binary_entropy(worst)


def baseline_report(d: ErrorDistribution) -> KeyRateReport:
    """Report for the all-off mask, i.e. the plain protocol."""
    marginals = tuple(marginal_link_error(d, j) for j in range(1, d.p + 1))
    leak = leak_ec(marginals)
    bound = 1.0 - binary_entropy(d.qx)
    rate = bound - leak
    return KeyRateReport(
        mask=CadMask.none(d.p),
        p_accept=1.0,
        entropy_bound=bound,
        post_cad_errors=marginals,
        leak_ec=leak,
        rate=rate,
        minimizer=None,
        baseline_rate=rate,
    )


def key_rate(source: Union[NoiseScenario, ErrorDistribution], mask: CadMask) -> KeyRateReport:
    """Full report for one nonzero mask: (p_a / 2) * (entropy bound - leakage)."""
    d = distribution_from_scenario(source) if isinstance(source, NoiseScenario) else source
    _check_mask(d, mask)
    if mask.mask.value == 0:
        raise ValueError("all-off mask has no distillation step; see best_mask / no_cad_rate")
    pa = p_accept(d, mask)
    bound, nu = entropy_bound(d, mask)
    post = tuple(post_cad_error(d, mask, j) for j in range(1, d.p + 1))
    leak = leak_ec(post)
    rate = (pa / 2.0) * (bound - leak)
    return KeyRateReport(
        mask=mask,
        p_accept=pa,
        entropy_bound=bound,
        post_cad_errors=post,
        leak_ec=leak,
        rate=rate,
        minimizer=nu,
        baseline_rate=no_cad_rate(d),
    )


def best_mask(d: ErrorDistribution) -> tuple[CadMask, KeyRateReport]:
    """Argmax of the rate over all 2^p masks, the all-off mask included.

    Rates within 1e-9 are treated as ties and broken toward fewer enabled
    Bobs, then the smaller numeric mask; masks are scanned in that
    preference order so the first strict improvement wins.
    """
    order = sorted(range(1 << d.p), key=lambda v: (v.bit_count(), v))
    best: tuple[CadMask, KeyRateReport] | None = None
    for value in order:
        mask = CadMask(BitPattern(value, d.p))
        report = baseline_report(d) if value == 0 else key_rate(d, mask)
        if best is None or report.rate > best[1].rate + _TIE_TOL:
            best = (mask, report)
    assert best is not None
    return best
