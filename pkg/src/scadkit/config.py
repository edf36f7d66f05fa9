"""Scenario files: a sectioned key-value format with line diagnostics.

Grammar (documented in the README): blank lines and full-line or trailing
``#`` comments are ignored; ``[section]`` opens a section; ``key = value``
entries belong to the current section.  Sections are ``scenario``,
``grid`` and ``masks``; unknown sections or keys, duplicates, and type
errors are reported as ``path:line: message``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .bits import MAX_WIDTH
from .keyrate import CadMask
from .noise import NoiseScenario

BEST_TOKEN = "best"


class SpecError(Exception):
    """Scenario-file problem, anchored to a file and line."""

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        self.message = message
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class _Entry:
    value: str
    line: int


_SCHEMA = {
    "scenario": {"name", "parties", "link_pattern", "qx"},
    "grid": {"q_start", "q_stop", "q_step"},
    "masks": {"use"},
}


def _parse_sections(path: Union[str, Path]) -> dict[str, dict[str, _Entry]]:
    path = Path(path)
    sections: dict[str, dict[str, _Entry]] = {}
    section_lines: dict[str, int] = {}
    current: str | None = None
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(str(path), 0, f"cannot read file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise SpecError(str(path), lineno, f"unknown section [{name}]")
            if name in sections:
                raise SpecError(str(path), lineno, f"duplicate section [{name}]")
            sections[name] = {}
            section_lines[name] = lineno
            current = name
            continue
        if "=" not in line:
            raise SpecError(str(path), lineno, f"expected 'key = value', got {line!r}")
        if current is None:
            raise SpecError(str(path), lineno, "entry before any [section] header")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[current]:
            raise SpecError(str(path), lineno, f"unknown key {key!r} in section [{current}]")
        if key in sections[current]:
            raise SpecError(str(path), lineno, f"duplicate key {key!r}")
        sections[current][key] = _Entry(value, lineno)
    for name in _SCHEMA:
        if name not in sections:
            raise SpecError(str(path), len(text.splitlines()) or 1, f"missing section [{name}]")
    return sections


@dataclass(frozen=True)
class ScenarioSpec:
    """One sweep family: link-noise multipliers, a Q grid and the masks to score."""

    name: str
    p: int
    link_pattern: tuple[float, ...]
    qx_rule: Union[str, float]  # "equal-q" or an explicit rate
    q_start: float
    q_stop: float
    q_step: float
    masks: tuple[str, ...]
    search_best: bool

    def q_values(self) -> np.ndarray:
        count = int(np.floor((self.q_stop - self.q_start) / self.q_step + 1e-9)) + 1
        return self.q_start + self.q_step * np.arange(count)

    def scenario_at(self, q: float) -> NoiseScenario:
        links = tuple(m * q for m in self.link_pattern)
        qx = q if self.qx_rule == "equal-q" else float(self.qx_rule)
        return NoiseScenario(links, qx)

    def mask_objects(self) -> list[CadMask]:
        return [CadMask.from_string(m) for m in self.masks]


def _number(path: str, entry: _Entry, name: str) -> float:
    try:
        return float(entry.value)
    except ValueError as exc:
        raise SpecError(path, entry.line, f"{name} must be a number, got {entry.value!r}") from exc


def load_spec(path: Union[str, Path]) -> ScenarioSpec:
    """Parse and validate one scenario file."""
    sections = _parse_sections(path)
    spath = str(path)

    def require(section: str, key: str) -> _Entry:
        if key not in sections[section]:
            raise SpecError(spath, 1, f"missing key {key!r} in section [{section}]")
        return sections[section][key]

    name_e = require("scenario", "name")
    parties_e = require("scenario", "parties")
    pattern_e = require("scenario", "link_pattern")
    qx_e = require("scenario", "qx")
    try:
        p = int(parties_e.value)
    except ValueError as exc:
        raise SpecError(spath, parties_e.line, f"parties must be an integer, got {parties_e.value!r}") from exc
    if not 2 <= p <= MAX_WIDTH:
        raise SpecError(spath, parties_e.line, f"parties {p} outside [2, {MAX_WIDTH}]")

    multipliers = []
    for piece in pattern_e.value.split(","):
        try:
            m = float(piece)
        except ValueError as exc:
            raise SpecError(spath, pattern_e.line, f"bad multiplier {piece.strip()!r}") from exc
        if m <= 0.0:
            raise SpecError(spath, pattern_e.line, f"multipliers must be positive, got {m}")
        multipliers.append(m)
    if len(multipliers) != p:
        raise SpecError(
            spath, pattern_e.line, f"expected {p} link multipliers, got {len(multipliers)}"
        )

    qx_rule: Union[str, float]
    if qx_e.value == "equal-q":
        qx_rule = "equal-q"
    else:
        qx_rule = _number(spath, qx_e, "qx")
        if not 0.0 <= qx_rule <= 0.5:
            raise SpecError(spath, qx_e.line, f"qx {qx_rule} outside [0, 0.5]")

    start_e, stop_e, step_e = (require("grid", k) for k in ("q_start", "q_stop", "q_step"))
    q_start = _number(spath, start_e, "q_start")
    q_stop = _number(spath, stop_e, "q_stop")
    q_step = _number(spath, step_e, "q_step")
    if q_start < 0.0:
        raise SpecError(spath, start_e.line, f"q_start {q_start} must be >= 0")
    if q_step <= 0.0:
        raise SpecError(spath, step_e.line, f"q_step {q_step} must be > 0")
    if q_stop < q_start:
        raise SpecError(spath, stop_e.line, f"q_stop {q_stop} below q_start {q_start}")
    if max(multipliers) * q_stop >= 0.5:
        raise SpecError(
            spath,
            stop_e.line,
            f"max link noise {max(multipliers) * q_stop} reaches 0.5 at the grid top",
        )
    if qx_rule == "equal-q" and q_stop > 0.5:
        raise SpecError(spath, stop_e.line, f"qx equals Q and q_stop {q_stop} exceeds 0.5")

    masks_e = require("masks", "use")
    tokens = [t.strip() for t in masks_e.value.split(",") if t.strip()]
    if not tokens:
        raise SpecError(spath, masks_e.line, "mask list is empty")
    masks: list[str] = []
    search_best = False
    for token in tokens:
        if token == BEST_TOKEN:
            search_best = True
            continue
        if set(token) - {"0", "1"} or len(token) != p:
            raise SpecError(
                spath, masks_e.line, f"mask {token!r} is not a {p}-bit string of 0/1"
            )
        if token in masks:
            raise SpecError(spath, masks_e.line, f"duplicate mask {token!r}")
        masks.append(token)
    if not masks and not search_best:
        raise SpecError(spath, masks_e.line, "mask list is empty")

    return ScenarioSpec(
        name=name_e.value,
        p=p,
        link_pattern=tuple(multipliers),
        qx_rule=qx_rule,
        q_start=q_start,
        q_stop=q_stop,
        q_step=q_step,
        masks=tuple(masks),
        search_best=search_best,
    )
