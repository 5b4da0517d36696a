"""Empirical density-bound verification harness.

The harness realizes the quantifiers of the density claim numerically: it
samples points of the remaining set that are outside the exceptional cover
at its horizon, samples axis-aligned rectangles through each point with
diameter below each grid value t, and certifies the observed density ratio
against the piecewise-constant floor.

Applicability per (point, t) pair realizes the "sufficiently small t"
quantifier: when the floor at t is positive, the underlying argument needs
every tested rectangle to miss the cubes below the branch's separation
index, which is guaranteed exactly when t does not exceed the point's
distance to those cubes.  Pairs where t is still too large for the point
are labeled "deferred" and their observations are reported but not counted
as violations of the claim; pairs at flagged (exceptional) points are
labeled and tallied separately, since violations there demonstrate the
necessity of the exclusion rather than contradict the bound.

Everything is deterministic given the seed: points and per-point rectangle
streams derive from disjoint substreams of one root seed, and reports use
shortest-round-trip float formatting so artifact bytes are reproducible.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .auxfn import RateFunction
from .errors import AcceptanceTooLow
from .interval1d import Location
from .setmodel import CompactSetModel, ExceptionalCover, is_exceptional

__all__ = [
    "ScanConfig",
    "PointSample",
    "ScanRow",
    "TSummary",
    "ScanReport",
    "SeparationRow",
    "SeparationReport",
    "EnvelopeRow",
    "EnvelopeReport",
    "thread_count",
    "sample_points",
    "scan_density_bound",
    "separation_check",
    "scan_deficit_envelope",
]

_ASPECT_FLOOR = 0.05
_ASPECT_CEIL = 20.0


def thread_count() -> int:
    """Worker cap from DENSITOMETER_THREADS; defaults to 1 (sequential)."""
    raw = os.environ.get("DENSITOMETER_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class ScanConfig:
    """Sampling plan: diameter grid, counts, seed, aspect range, cover indexes."""

    t_grid: tuple[float, ...]
    points: int
    rects_per_point: int
    seed: int
    aspect_range: tuple[float, float] = (0.2, 5.0)
    m: int = 3
    s_hi: int = 4

    def __post_init__(self) -> None:
        if not self.t_grid:
            raise ValueError("t grid must be nonempty")
        if any(not (math.isfinite(t) and t > 0.0) for t in self.t_grid):
            raise ValueError(f"t values must be positive and finite, got {self.t_grid}")
        if len(set(self.t_grid)) != len(self.t_grid):
            raise ValueError("t grid must not repeat values")
        if self.points < 1 or self.rects_per_point < 1:
            raise ValueError("point and rectangle counts must be >= 1")
        lo, hi = self.aspect_range
        if not (_ASPECT_FLOOR <= lo <= hi <= _ASPECT_CEIL):
            raise ValueError(
                f"aspect range must sit inside [{_ASPECT_FLOOR}, {_ASPECT_CEIL}], got {self.aspect_range}"
            )
        if not 1 <= self.m <= self.s_hi:
            raise ValueError(f"need 1 <= m <= s_hi, got m = {self.m}, s_hi = {self.s_hi}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class PointSample:
    points: tuple[tuple[float, float], ...]
    acceptance_rate: float
    draws: int


def _substreams(config: ScanConfig, lane: int, count: int) -> list[np.random.SeedSequence]:
    # lane 0: point sampling; lane 1: density rects; lane 2: separation rects
    root = np.random.SeedSequence(config.seed)
    lanes = root.spawn(3)
    return lanes[lane].spawn(count) if count else [lanes[lane]]


def sample_points(
    model: CompactSetModel, cover: ExceptionalCover, config: ScanConfig
) -> PointSample:
    """Uniform points of the outer box that are scannable at the horizon.

    Rejects points inside or on any materialized cube and points the cover
    reaches; reports the acceptance rate.  Raises AcceptanceTooLow when the
    rate sits under 1% after a million draws.
    """
    if cover.m != config.m or cover.s_hi != config.s_hi:
        raise ValueError(
            f"cover was built for (m, s_hi) = ({cover.m}, {cover.s_hi}), "
            f"config says ({config.m}, {config.s_hi})"
        )
    rng = np.random.Generator(np.random.PCG64(_substreams(config, 0, 1)[0]))
    outer = model.outer
    accepted: list[tuple[float, float]] = []
    draws = 0
    batch = max(1024, 4 * config.points)
    while len(accepted) < config.points:
        pts = rng.uniform(
            (outer.x.lo, outer.y.lo), (outer.x.hi, outer.y.hi), size=(batch, 2)
        )
        px, py = pts[:, 0], pts[:, 1]
        in_cube = np.zeros(batch, dtype=bool)
        xs, ys, ws = model.xs, model.ys, model.sides
        # closed-cube hit, vectorized over cubes x batch
        in_cube = (
            (xs[None, :] <= px[:, None])
            & (px[:, None] <= (xs + ws)[None, :])
            & (ys[None, :] <= py[:, None])
            & (py[:, None] <= (ys + ws)[None, :])
        ).any(axis=1)
        strict_inner = (
            (outer.x.lo < px) & (px < outer.x.hi) & (outer.y.lo < py) & (py < outer.y.hi)
        )
        for i in np.flatnonzero(~in_cube & strict_inner):
            draws_here = draws + int(i) + 1
            point = (float(px[i]), float(py[i]))
            if cover.locate(point) is Location.OUTSIDE:
                accepted.append(point)
                if len(accepted) == config.points:
                    return PointSample(
                        tuple(accepted), len(accepted) / draws_here, draws_here
                    )
        draws += batch
        if draws >= 10**6 and len(accepted) / draws < 0.01:
            raise AcceptanceTooLow(
                f"{len(accepted)} of {draws} draws accepted; lower m or enlarge the box"
            )
    raise AssertionError("unreachable")  # pragma: no cover


def _draw_rects(
    rng: np.random.Generator,
    point: tuple[float, float],
    t: float,
    config: ScanConfig,
    model: CompactSetModel,
) -> np.ndarray:
    """(n, 4) array of [x0, x1, y0, y1]: rectangles strictly containing the
    point with Euclidean diagonal < t, log-uniform aspect, clipped to the box."""
    n = config.rects_per_point
    px, py = point
    u = rng.uniform(0.0, 1.0, n)
    u = np.where(u > 0.0, u, 0.5)
    d = t * u
    lo, hi = config.aspect_range
    aspect = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    height = d / np.sqrt(1.0 + aspect * aspect)
    width = aspect * height
    vx = rng.uniform(0.0, 1.0, n)
    vx = np.where(vx > 0.0, vx, 0.5)
    vy = rng.uniform(0.0, 1.0, n)
    vy = np.where(vy > 0.0, vy, 0.5)
    x0 = px - width * vx
    y0 = py - height * vy
    x1 = x0 + width
    y1 = y0 + height
    outer = model.outer
    return np.stack(
        [
            np.maximum(x0, outer.x.lo),
            np.minimum(x1, outer.x.hi),
            np.maximum(y0, outer.y.lo),
            np.minimum(y1, outer.y.hi),
        ],
        axis=1,
    )


def _candidate_cubes(model: CompactSetModel, point: tuple[float, float], t: float) -> np.ndarray:
    px, py = point
    xs, ys, ws = model.xs, model.ys, model.sides
    mask = (
        (xs <= px + t)
        & (xs + ws >= px - t)
        & (ys <= py + t)
        & (ys + ws >= py - t)
    )
    return np.flatnonzero(mask)


def _rect_ratios(model: CompactSetModel, rects: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Truncated-set density of each rectangle; exact overlap arithmetic."""
    x0, x1, y0, y1 = rects[:, 0], rects[:, 1], rects[:, 2], rects[:, 3]
    area = (x1 - x0) * (y1 - y0)
    if candidates.size == 0:
        return np.ones(len(rects))
    cx0 = model.xs[candidates]
    cy0 = model.ys[candidates]
    cw = model.sides[candidates]
    wx = np.minimum(x1[:, None], (cx0 + cw)[None, :]) - np.maximum(x0[:, None], cx0[None, :])
    wy = np.minimum(y1[:, None], (cy0 + cw)[None, :]) - np.maximum(y0[:, None], cy0[None, :])
    overlap = (np.maximum(wx, 0.0) * np.maximum(wy, 0.0)).sum(axis=1)
    return np.clip(1.0 - overlap / area, 0.0, 1.0)


def _separation_prefix(branch, trunc: int) -> int | None:
    """Cube prefix a positive-floor branch needs rectangles to miss.

    None when the floor is vacuous (<= 0) or the prefix exceeds the
    truncation (the pair can then only be deferred)."""
    if branch.is_top or branch.floor <= 0.0 or branch.s_next is None:
        return None
    prefix = branch.s_next**branch.s_next - 1
    if prefix > trunc:
        return -1  # sentinel: gate required but unverifiable at this truncation
    return prefix


@dataclass(frozen=True)
class ScanRow:
    """Observed minimum over the cumulative rectangle family at one (t, point)."""

    t: float
    point_id: int
    x: float
    y: float
    min_ratio: float
    floor: float
    margin: float
    violations: int
    regime: str


@dataclass(frozen=True)
class TSummary:
    t: float
    floor: float
    applicable: int
    deferred: int
    exceptional: int
    min_margin_applicable: float | None
    violations_applicable: int
    violations_deferred: int
    violations_exceptional: int


@dataclass(frozen=True)
class ScanReport:
    config: ScanConfig
    rows: tuple[ScanRow, ...]
    summaries: tuple[TSummary, ...]
    acceptance_rate: float | None
    draws: int | None
    runtime_seconds: float

    @property
    def violations_applicable(self) -> int:
        return sum(s.violations_applicable for s in self.summaries)

    @property
    def passed(self) -> bool:
        """No violations among applicable pairs at scannable points."""
        return self.violations_applicable == 0

    def to_csv(self) -> str:
        lines = ["t,point_id,x,y,min_ratio,floor,margin,violations,regime"]
        for r in self.rows:
            lines.append(
                f"{r.t!r},{r.point_id},{r.x!r},{r.y!r},{r.min_ratio!r},"
                f"{r.floor!r},{r.margin!r},{r.violations},{r.regime}"
            )
        return "\n".join(lines) + "\n"


def _scan_one_point(
    model: CompactSetModel,
    config: ScanConfig,
    t_sorted: tuple[float, ...],
    branches,
    prefixes,
    seed_seq: np.random.SeedSequence,
    point: tuple[float, float],
    scannable: bool,
) -> list[tuple[float, int, str]]:
    """Per point: (min_ratio, violations, regime) for each t, cumulatively."""
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    out = []
    pools: list[np.ndarray] = []
    for k, t in enumerate(t_sorted):
        rects = _draw_rects(rng, point, t, config, model)
        ratios = _rect_ratios(model, rects, _candidate_cubes(model, point, t))
        pools.append(ratios)
        family = np.concatenate(pools)
        min_ratio = float(family.min())
        floor = branches[k].floor
        violations = int(np.count_nonzero(family < floor))
        if not scannable:
            regime = "exceptional"
        elif prefixes[k] is None:
            regime = "applicable"
        elif prefixes[k] == -1:
            regime = "deferred"
        else:
            delta = model.distance_to_cubes(point, prefixes[k])
            regime = "applicable" if t <= delta else "deferred"
        out.append((min_ratio, violations, regime))
    return out


def scan_density_bound(
    model: CompactSetModel,
    cover: ExceptionalCover,
    ratefn: RateFunction,
    config: ScanConfig,
    *,
    points: Sequence[tuple[float, float]] | None = None,
) -> ScanReport:
    """Certify sampled density ratios against the floor at every grid t.

    Points come from :func:`sample_points` unless supplied explicitly, in
    which case each one is classified first and exceptional ones are
    flagged rather than rejected (their violations land in a separate
    tally).  Per point, rectangle families are nested across the ascending
    t grid, so the reported minima are non-increasing in t.
    """
    import time

    start = time.perf_counter()
    order = sorted(range(len(config.t_grid)), key=lambda i: config.t_grid[i])
    t_sorted = tuple(config.t_grid[i] for i in order)
    branches = tuple(ratefn.branch_at(t) for t in t_sorted)
    prefixes = tuple(_separation_prefix(b, model.trunc) for b in branches)

    acceptance: float | None = None
    draws: int | None = None
    if points is None:
        sample = sample_points(model, cover, config)
        pts = sample.points
        flags = [True] * len(pts)
        acceptance = sample.acceptance_rate
        draws = sample.draws
    else:
        pts = tuple((float(x), float(y)) for x, y in points)
        flags = [is_exceptional(model, cover, p).is_scannable for p in pts]

    seeds = _substreams(config, 1, len(pts))
    worker: Callable[[int], list[tuple[float, int, str]]] = lambda i: _scan_one_point(
        model, config, t_sorted, branches, prefixes, seeds[i], pts[i], flags[i]
    )
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_point = list(pool.map(worker, range(len(pts))))
    else:
        per_point = [worker(i) for i in range(len(pts))]

    rows: list[ScanRow] = []
    summaries: list[TSummary] = []
    for k, t in enumerate(t_sorted):
        floor = branches[k].floor
        tallies = {"applicable": [0, 0], "deferred": [0, 0], "exceptional": [0, 0]}
        margins: list[float] = []
        for i, point in enumerate(pts):
            min_ratio, violations, regime = per_point[i][k]
            margin = min_ratio - floor
            tallies[regime][0] += 1
            tallies[regime][1] += violations
            if regime == "applicable":
                margins.append(margin)
            rows.append(
                ScanRow(
                    t=t,
                    point_id=i,
                    x=point[0],
                    y=point[1],
                    min_ratio=min_ratio,
                    floor=floor,
                    margin=margin,
                    violations=violations,
                    regime=regime,
                )
            )
        summaries.append(
            TSummary(
                t=t,
                floor=floor,
                applicable=tallies["applicable"][0],
                deferred=tallies["deferred"][0],
                exceptional=tallies["exceptional"][0],
                min_margin_applicable=min(margins) if margins else None,
                violations_applicable=tallies["applicable"][1],
                violations_deferred=tallies["deferred"][1],
                violations_exceptional=tallies["exceptional"][1],
            )
        )
    return ScanReport(
        config=config,
        rows=tuple(rows),
        summaries=tuple(summaries),
        acceptance_rate=acceptance,
        draws=draws,
        runtime_seconds=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class SeparationRow:
    t: float
    s_next: int | None
    prefix: int
    checked_points: int
    checked_rects: int
    violations: int
    deferred_points: int
    exceptional_points: int


@dataclass(frozen=True)
class SeparationReport:
    """Check of the inferred separation hypothesis (labeled as such).

    For applicable (point, t) pairs every drawn rectangle must miss all
    cubes below the branch's separation index; the hypothesis is an
    inference from the diameter bracketing, not a quoted statement, so
    violations here are findings against that inference."""

    config: ScanConfig
    rows: tuple[SeparationRow, ...]
    runtime_seconds: float

    @property
    def passed(self) -> bool:
        return all(r.violations == 0 for r in self.rows)

    def to_csv(self) -> str:
        lines = [
            "t,s_next,prefix,checked_points,checked_rects,violations,"
            "deferred_points,exceptional_points"
        ]
        for r in self.rows:
            s_next = "" if r.s_next is None else str(r.s_next)
            lines.append(
                f"{r.t!r},{s_next},{r.prefix},{r.checked_points},{r.checked_rects},"
                f"{r.violations},{r.deferred_points},{r.exceptional_points}"
            )
        return "\n".join(lines) + "\n"


def separation_check(
    model: CompactSetModel,
    cover: ExceptionalCover,
    ratefn: RateFunction,
    config: ScanConfig,
    *,
    points: Sequence[tuple[float, float]] | None = None,
) -> SeparationReport:
    """Count rectangle overlaps against the cubes a branch requires missed."""
    start = time.perf_counter()
    order = sorted(range(len(config.t_grid)), key=lambda i: config.t_grid[i])
    t_sorted = tuple(config.t_grid[i] for i in order)
    branches = tuple(ratefn.branch_at(t) for t in t_sorted)
    prefixes = tuple(_separation_prefix(b, model.trunc) for b in branches)

    if points is None:
        pts = sample_points(model, cover, config).points
        flags = [True] * len(pts)
    else:
        pts = tuple((float(x), float(y)) for x, y in points)
        flags = [is_exceptional(model, cover, p).is_scannable for p in pts]

    seeds = _substreams(config, 2, len(pts))
    rect_seeds = [s.spawn(len(t_sorted)) for s in seeds]
    rows = []
    for k, t in enumerate(t_sorted):
        prefix = prefixes[k]
        if prefix is None or prefix == -1:
            rows.append(
                SeparationRow(
                    t=t,
                    s_next=branches[k].s_next,
                    prefix=0 if prefix is None else -1,
                    checked_points=0,
                    checked_rects=0,
                    violations=0,
                    deferred_points=len(pts),
                    exceptional_points=sum(1 for f in flags if not f),
                )
            )
            continue
        checked = rect_count = violations = deferred = exceptional = 0
        for i, point in enumerate(pts):
            if not flags[i]:
                exceptional += 1
                continue
            delta = model.distance_to_cubes(point, prefix)
            if t > delta:
                deferred += 1
                continue
            rng = np.random.Generator(np.random.PCG64(rect_seeds[i][k]))
            rects = _draw_rects(rng, point, t, config, model)
            cx0 = model.xs[:prefix]
            cy0 = model.ys[:prefix]
            cw = model.sides[:prefix]
            x0, x1, y0, y1 = rects[:, 0], rects[:, 1], rects[:, 2], rects[:, 3]
            wx = np.minimum(x1[:, None], (cx0 + cw)[None, :]) - np.maximum(
                x0[:, None], cx0[None, :]
            )
            wy = np.minimum(y1[:, None], (cy0 + cw)[None, :]) - np.maximum(
                y0[:, None], cy0[None, :]
            )
            hit = ((wx > 0.0) & (wy > 0.0)).any(axis=1)
            checked += 1
            rect_count += len(rects)
            violations += int(np.count_nonzero(hit))
        rows.append(
            SeparationRow(
                t=t,
                s_next=branches[k].s_next,
                prefix=prefix,
                checked_points=checked,
                checked_rects=rect_count,
                violations=violations,
                deferred_points=deferred,
                exceptional_points=exceptional,
            )
        )
    return SeparationReport(
        config=config, rows=tuple(rows), runtime_seconds=time.perf_counter() - start
    )


@dataclass(frozen=True)
class EnvelopeRow:
    t: float
    worst_deficit: float | None
    envelope: float
    passed: bool | None
    deficit_product: float | None
    envelope_product: float


@dataclass(frozen=True)
class EnvelopeReport:
    """Worst observed deficits against the deficit envelope, with the
    |log t|-weighted decay trace."""

    rows: tuple[EnvelopeRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.rows)

    def to_csv(self) -> str:
        lines = ["t,worst_deficit,envelope,passed,deficit_product,envelope_product"]
        for r in self.rows:
            wd = "" if r.worst_deficit is None else repr(r.worst_deficit)
            dp = "" if r.deficit_product is None else repr(r.deficit_product)
            ps = "" if r.passed is None else str(r.passed)
            lines.append(
                f"{r.t!r},{wd},{r.envelope!r},{ps},{dp},{r.envelope_product!r}"
            )
        return "\n".join(lines) + "\n"


def scan_deficit_envelope(report: ScanReport, ratefn: RateFunction) -> EnvelopeReport:
    """Per t: worst deficit 1 - min_ratio over applicable rows vs the envelope.

    The deficit bound is the complement of the floor bound, so passing here
    is implied by a passing density scan; the added value is the decay trace
    deficit * |log t| against envelope * |log t| for plotting.
    """
    rows = []
    for summary in report.summaries:
        t = summary.t
        envelope = 1.0 - summary.floor
        applicable = [
            r.min_ratio
            for r in report.rows
            if r.t == t and r.regime == "applicable"
        ]
        if applicable:
            worst = 1.0 - min(applicable)
            passed = worst <= envelope
            dp = worst * abs(math.log(t))
        else:
            worst, passed, dp = None, None, None
        rows.append(
            EnvelopeRow(
                t=t,
                worst_deficit=worst,
                envelope=envelope,
                passed=passed,
                deficit_product=dp,
                envelope_product=envelope * abs(math.log(t)),
            )
        )
    return EnvelopeReport(rows=tuple(rows))
