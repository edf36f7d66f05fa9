"""Grid sweeps, best-mask search, and the validation harness.

Produces the CSV interchange files consumed by the figure generator:
comma-separated, header row, UTF-8, LF line endings, floats rendered
with 10 significant digits (%.10g), rows ordered by Q ascending then
mask ascending.  Output is byte-stable for a fixed spec and seeds.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from . import keyrate, oracle, simulate
from .bits import BitPattern
from .config import ScenarioSpec
from .keyrate import CadMask, KeyRateReport
from .noise import NoiseScenario, distribution_from_scenario

CSV_HEADER = "Q,mask,p_accept,entropy_bound,leak_ec,rate_raw,rate_clamped,baseline_rate"


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _point_report(links: tuple[float, ...], qx: float, mask_value: int, p: int) -> KeyRateReport:
    d = distribution_from_scenario(NoiseScenario(links, qx))
    mask = CadMask(BitPattern(mask_value, p))
    if mask_value == 0:
        return keyrate.baseline_report(d)
    return keyrate.key_rate(d, mask)


def _worker(args: tuple[tuple[float, ...], float, int, int]) -> KeyRateReport:
    return _point_report(*args)


def _csv_row(q: float, report: KeyRateReport) -> str:
    return ",".join(
        (
            _fmt(q),
            str(report.mask),
            _fmt(report.p_accept),
            _fmt(report.entropy_bound),
            _fmt(report.leak_ec),
            _fmt(report.rate),
            _fmt(max(0.0, report.rate)),
            _fmt(report.baseline_rate),
        )
    )


def _write_lines(out: Union[str, Path], lines: Iterable[str]) -> None:
    path = Path(out)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def run_sweep(spec: ScenarioSpec, out: Union[str, Path], jobs: int = 1) -> None:
    """One CSV row per (Q, mask), mask 0 carrying the no-CAD baseline protocol."""
    masks = sorted(m.mask.value for m in spec.mask_objects())
    if not masks:
        raise ValueError("spec lists no concrete masks to sweep")
    points = [
        (tuple(m * q for m in spec.link_pattern),
         q if spec.qx_rule == "equal-q" else float(spec.qx_rule),
         mask_value,
         spec.p)
        for q in spec.q_values()
        for mask_value in masks
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_worker, points, chunksize=4))
    else:
        reports = [_worker(args) for args in points]
    lines = [CSV_HEADER]
    for q, report in zip((q for q in spec.q_values() for _ in masks), reports):
        lines.append(_csv_row(q, report))
    _write_lines(out, lines)


def _search_worker(args: tuple[tuple[float, ...], float, int]) -> tuple[CadMask, KeyRateReport]:
    links, qx, _p = args
    d = distribution_from_scenario(NoiseScenario(links, qx))
    return keyrate.best_mask(d)


def run_search(spec: ScenarioSpec, out: Union[str, Path], jobs: int = 1) -> None:
    """One CSV row per Q holding the argmax mask over all 2^p settings."""
    points = [
        (tuple(m * q for m in spec.link_pattern),
         q if spec.qx_rule == "equal-q" else float(spec.qx_rule),
         spec.p)
        for q in spec.q_values()
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            winners = list(pool.map(_search_worker, points, chunksize=1))
    else:
        winners = [_search_worker(args) for args in points]
    lines = [CSV_HEADER]
    for q, (_mask, report) in zip(spec.q_values(), winners):
        lines.append(_csv_row(q, report))
    _write_lines(out, lines)


@dataclass(frozen=True)
class CheckRow:
    name: str
    passed: bool
    detail: str

    def render(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def mc_check_rows(
    result: simulate.SimResult,
    analytic_pa: float,
    analytic_post: tuple[float, ...],
    label: str,
) -> list[CheckRow]:
    """Three-sigma agreement checks of one simulation against analytic values."""
    rows = []
    blocks = result.blocks_total
    sigma_pa = math.sqrt(max(analytic_pa * (1.0 - analytic_pa), 0.0) / blocks)
    diff = abs(result.p_accept_hat - analytic_pa)
    rows.append(
        CheckRow(
            f"{label} p_accept",
            diff <= 3.0 * sigma_pa + 1e-15,
            f"hat={_fmt(result.p_accept_hat)} analytic={_fmt(analytic_pa)} "
            f"|diff|={_fmt(diff)} 3sigma={_fmt(3.0 * sigma_pa)}",
        )
    )
    accepted = max(result.blocks_accepted, 1)
    for j, (hat, ref) in enumerate(zip(result.post_error_hat, analytic_post), start=1):
        clipped = min(max(ref, 0.0), 1.0)
        sigma = math.sqrt(clipped * (1.0 - clipped) / accepted)
        diff = abs(hat - ref)
        rows.append(
            CheckRow(
                f"{label} post_error Bob_{j}",
                not math.isnan(hat) and diff <= 3.0 * sigma + 1e-15,
                f"hat={_fmt(hat)} analytic={_fmt(ref)} |diff|={_fmt(diff)} 3sigma={_fmt(3.0 * sigma)}",
            )
        )
    return rows


def oracle_check_rows(a: oracle.AttackState, mask: CadMask, label: str) -> list[CheckRow]:
    """Soundness of the analytic bound against one exact attack."""
    d = a.error_distribution()
    rho, pa_exact = oracle.conditioned_rho_aem(a, mask)
    pa_comb = keyrate.p_accept(d, mask)
    h_exact = oracle.conditional_entropy(rho, "a", ("eve", "m"))
    bound, _ = keyrate.entropy_bound(d, mask)
    margin = h_exact - bound
    return [
        CheckRow(
            f"{label} p_accept identity",
            abs(pa_exact - pa_comb) <= 1e-10,
            f"exact={_fmt(pa_exact)} combinatorial={_fmt(pa_comb)}",
        ),
        CheckRow(
            f"{label} soundness",
            margin >= -1e-9,
            f"exact H(A|EM)={_fmt(h_exact)} bound={_fmt(bound)} margin={_fmt(margin)}",
        ),
    ]


def run_validate(
    spec: ScenarioSpec,
    out: Union[str, Path],
    rounds: int = 200_000,
    n_seeds: int = 5,
    base_seed: int = 0,
    n_attacks: int = 20,
) -> bool:
    """Monte Carlo and exact-oracle agreement report; True when all checks pass.

    Simulations run at the first, middle and last grid Q for every concrete
    mask and seed.  Oracle checks run only for p <= 3 (the exact state
    dimension explodes beyond that) and are skipped with a notice above.
    """
    qs = list(spec.q_values())
    picks = sorted({qs[0], qs[len(qs) // 2], qs[-1]})
    rows: list[CheckRow] = []
    for q in picks:
        scenario = spec.scenario_at(q)
        d = distribution_from_scenario(scenario)
        for mask in spec.mask_objects():
            if mask.mask.value == 0:
                analytic_pa = 1.0
            else:
                analytic_pa = keyrate.p_accept(d, mask)
            post = tuple(keyrate.post_cad_error(d, mask, j) for j in range(1, spec.p + 1))
            for s in range(n_seeds):
                cfg = simulate.SimConfig(scenario, mask, rounds, base_seed + s)
                result = simulate.run_sim(cfg)
                rows.extend(
                    mc_check_rows(result, analytic_pa, post, f"Q={_fmt(q)} mask={mask} seed={base_seed + s}")
                )
    notices: list[str] = []
    if spec.p <= 3:
        rng = np.random.default_rng(base_seed)
        nonzero = [m for m in spec.mask_objects() if m.mask.value != 0]
        for i in range(n_attacks):
            attack = oracle.AttackState.random(spec.p, rng, peak=8.0 if i % 2 else 1.0)
            for mask in nonzero:
                rows.extend(oracle_check_rows(attack, mask, f"attack={i} mask={mask}"))
    else:
        notices.append(f"NOTE  oracle checks skipped: p={spec.p} exceeds the exact-state cap of 3")

    passed = all(r.passed for r in rows)
    lines = [f"validation report for scenario {spec.name!r}"]
    lines.extend(notices)
    lines.extend(r.render() for r in rows)
    lines.append(f"{'ALL CHECKS PASSED' if passed else 'CHECKS FAILED'} ({len(rows)} checks)")
    _write_lines(out, lines)
    return passed


def load_attack_file(path: Union[str, Path]) -> tuple[list[oracle.AttackState], list[CadMask]]:
    """Attack description: JSON with p, masks, and per-attack lambda tables.

    Schema: {"p": 2, "masks": ["11", "10"],
             "attacks": [{"name": "a0", "lambdas": [[l0_0, l0_1], ...]}]}
    with one [lambda^0, lambda^1] pair per error pattern in ascending
    numeric order.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    p = int(data["p"])
    masks = [CadMask.from_string(m) for m in data["masks"]]
    attacks = []
    for item in data["attacks"]:
        lam = np.asarray(item["lambdas"], dtype=float)
        attacks.append(oracle.AttackState(p, lam))
    return attacks, masks


def run_oracle_checks(path: Union[str, Path], out: Union[str, Path]) -> bool:
    """Exact-oracle report for every attack/mask pair in a JSON attack file."""
    attacks, masks = load_attack_file(path)
    rows: list[CheckRow] = []
    for i, attack in enumerate(attacks):
        for mask in masks:
            rows.extend(oracle_check_rows(attack, mask, f"attack={i} mask={mask}"))
    passed = all(r.passed for r in rows)
    lines = [f"oracle report for {path}"]
    lines.extend(r.render() for r in rows)
    lines.append(f"{'ALL CHECKS PASSED' if passed else 'CHECKS FAILED'} ({len(rows)} checks)")
    _write_lines(out, lines)
    return passed
