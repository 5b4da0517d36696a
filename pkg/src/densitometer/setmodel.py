"""Box-minus-squares set models, density ratios, and the exceptional cover.

A model materializes cubes 1..N of a weight sequence inside an open outer
box by deterministic shelf packing.  Density ratios against axis-aligned
rectangles are exact on the truncated set and carry a certified lower bound
for the untruncated one.  The exceptional cover unites, for blocks
s = m..s_hi of the schedule, the 2^s-dilation of the block's cubes; its
total measure is bounded analytically across all blocks s >= m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dilation import Rectangle, RectUnion, dilate_2d
from .errors import (
    EmptyRect,
    HorizonExhausted,
    OutOfRange,
    PackingInfeasible,
    TruncationTooSmall,
)
from .interval1d import Location
from .logdomain import LOG_ZERO, LogBracket, log_sum
from .weights import WeightSequence, tail_sum

__all__ = [
    "CompactSetModel",
    "DensityResult",
    "BlockDilation",
    "ExceptionalCover",
    "ExceptionalVerdict",
    "build_packing",
    "density_ratio",
    "cover_measure_bound",
    "build_cover",
    "is_exceptional",
]


class CompactSetModel:
    """Open outer box minus open squares 1..N with sides from a weight sequence.

    Cube geometry lives in numpy arrays (lower-left corners ``xs``, ``ys``
    and ``sides``); the remaining set is the closed complement of the open
    cubes within the closed outer box.  ``removed_area`` sums the sequence
    areas, so the measure bookkeeping identity
    ``measure_remaining + removed_area == outer.area`` is exact up to float
    rounding, and ``residual_tail`` brackets the area that cubes beyond the
    truncation would still remove.
    """

    __slots__ = ("outer", "seq", "trunc", "xs", "ys", "sides", "removed_area", "residual_tail")

    def __init__(
        self,
        outer: Rectangle,
        seq: WeightSequence,
        trunc: int,
        xs: np.ndarray,
        ys: np.ndarray,
        sides: np.ndarray,
    ) -> None:
        if trunc < 1:
            raise ValueError(f"truncation must keep at least one cube, got {trunc}")
        if not (len(xs) == len(ys) == len(sides) == trunc):
            raise ValueError("cube arrays must have exactly trunc entries")
        self.outer = outer
        self.seq = seq
        self.trunc = trunc
        self.xs = np.asarray(xs, dtype=np.float64)
        self.ys = np.asarray(ys, dtype=np.float64)
        self.sides = np.asarray(sides, dtype=np.float64)
        for n in range(1, trunc + 1):
            w = seq.w(n)
            if abs(self.sides[n - 1] - w) > 1e-12 * w:
                raise ValueError(f"cube {n} side {self.sides[n - 1]} differs from weight {w}")
        if np.any(self.sides[1:] > self.sides[:-1]):
            raise ValueError("cube sides must be non-increasing")
        inside = (
            (self.xs >= outer.x.lo)
            & (self.xs + self.sides <= outer.x.hi)
            & (self.ys >= outer.y.lo)
            & (self.ys + self.sides <= outer.y.hi)
        )
        if not bool(np.all(inside)):
            raise ValueError("every cube must lie inside the outer box")
        self.removed_area = math.fsum(seq.w2(n) for n in range(1, trunc + 1))
        self.residual_tail = tail_sum(seq, trunc + 1)

    @property
    def measure_remaining(self) -> float:
        return self.outer.area - self.removed_area

    def cube(self, n: int) -> Rectangle:
        """Open cube n (1-based)."""
        if not 1 <= n <= self.trunc:
            raise OutOfRange(f"cube index must be in 1..{self.trunc}, got {n}")
        x, y, w = float(self.xs[n - 1]), float(self.ys[n - 1]), float(self.sides[n - 1])
        return Rectangle.from_bounds(x, x + w, y, y + w)

    def cubes(self, n_lo: int = 1, n_hi: int | None = None) -> tuple[Rectangle, ...]:
        if n_hi is None:
            n_hi = self.trunc
        return tuple(self.cube(n) for n in range(n_lo, n_hi + 1))

    def locate_in_cubes(self, point: tuple[float, float]) -> tuple[Location, int | None]:
        """(INSIDE, n) strictly inside cube n, (BOUNDARY, n) on a cube edge,
        (OUTSIDE, None) otherwise."""
        x, y = point
        hit = (
            (self.xs <= x)
            & (x <= self.xs + self.sides)
            & (self.ys <= y)
            & (y <= self.ys + self.sides)
        )
        for i in np.flatnonzero(hit):
            if (
                self.xs[i] < x < self.xs[i] + self.sides[i]
                and self.ys[i] < y < self.ys[i] + self.sides[i]
            ):
                return Location.INSIDE, int(i) + 1
        idx = np.flatnonzero(hit)
        if idx.size:
            return Location.BOUNDARY, int(idx[0]) + 1
        return Location.OUTSIDE, None

    def distance_to_cubes(self, point: tuple[float, float], upto: int) -> float:
        """Euclidean distance from the point to the union of cubes 1..upto.

        Zero when the point touches or enters one of them.
        """
        if not 1 <= upto <= self.trunc:
            raise OutOfRange(f"prefix length must be in 1..{self.trunc}, got {upto}")
        x, y = point
        xs, ys, ws = self.xs[:upto], self.ys[:upto], self.sides[:upto]
        dx = np.maximum(np.maximum(xs - x, x - (xs + ws)), 0.0)
        dy = np.maximum(np.maximum(ys - y, y - (ys + ws)), 0.0)
        return float(np.sqrt(np.min(dx * dx + dy * dy)))

    def to_json(self) -> dict:
        return {
            "outer": [self.outer.x.lo, self.outer.x.hi, self.outer.y.lo, self.outer.y.hi],
            "cubes": [
                [float(x), float(y), float(w)] for x, y, w in zip(self.xs, self.ys, self.sides)
            ],
            "trunc": self.trunc,
            "seq": self.seq.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CompactSetModel":
        x0, x1, y0, y1 = obj["outer"]
        cubes = obj["cubes"]
        xs = np.array([c[0] for c in cubes], dtype=np.float64)
        ys = np.array([c[1] for c in cubes], dtype=np.float64)
        sides = np.array([c[2] for c in cubes], dtype=np.float64)
        return cls(
            Rectangle.from_bounds(x0, x1, y0, y1),
            WeightSequence.from_json(obj["seq"]),
            int(obj["trunc"]),
            xs,
            ys,
            sides,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CompactSetModel):
            return NotImplemented
        return (
            self.outer == other.outer
            and self.seq == other.seq
            and self.trunc == other.trunc
            and bool(np.all(self.xs == other.xs))
            and bool(np.all(self.ys == other.ys))
            and bool(np.all(self.sides == other.sides))
        )


def build_packing(seq: WeightSequence, trunc: int, outer: Rectangle) -> CompactSetModel:
    """Deterministic shelf packing of cubes 1..trunc into the outer box.

    Cubes go left to right in rows; a row's height is the side of its first
    cube, rows stack bottom-up with no separation margin (open cubes touching
    along edges are still disjoint).  Feasibility precondition: total removed
    area at most half the box and the first side at most the shorter box
    side; with non-increasing sides this guarantees the shelves fit.
    """
    if trunc < 1:
        raise ValueError(f"truncation must keep at least one cube, got {trunc}")
    if seq.n_max is not None and trunc > seq.n_max:
        raise OutOfRange(f"sequence defines {seq.n_max} areas, cannot materialize {trunc}")
    total = math.fsum(seq.w2(n) for n in range(1, trunc + 1))
    w1 = seq.w(1)
    min_side = min(outer.x.length, outer.y.length)
    if total > 0.5 * outer.area or w1 > min_side:
        raise PackingInfeasible(
            f"total area {total:.6g} (limit {0.5 * outer.area:.6g}) with first side "
            f"{w1:.6g} (limit {min_side:.6g})"
        )
    xs = np.empty(trunc)
    ys = np.empty(trunc)
    sides = np.empty(trunc)
    x_cursor = outer.x.lo
    row_base = outer.y.lo
    row_height = 0.0
    for n in range(1, trunc + 1):
        w = seq.w(n)
        if row_height == 0.0:
            row_height = w
        elif x_cursor + w > outer.x.hi:
            row_base += row_height
            x_cursor = outer.x.lo
            row_height = w
        if row_base + row_height > outer.y.hi:
            raise PackingInfeasible(
                f"rows overflow the box at cube {n}: base {row_base:.6g} + height "
                f"{row_height:.6g} exceeds {outer.y.hi:.6g}"
            )
        xs[n - 1] = x_cursor
        ys[n - 1] = row_base
        sides[n - 1] = w
        x_cursor += w
    return CompactSetModel(outer, seq, trunc, xs, ys, sides)


@dataclass(frozen=True)
class DensityResult:
    """Exact truncated-set density of a rectangle, with the true-set bracket.

    ``ratio_n`` is 1 minus the removed fraction over cubes 1..N; the density
    of the untruncated set lies in [``lower_bound_true``, ``ratio_n``].
    """

    ratio_n: float
    lower_bound_true: float
    rect: Rectangle
    clipped: bool
    overlap_total: float


def density_ratio(model: CompactSetModel, rect: Rectangle) -> DensityResult:
    """Exact overlap arithmetic for |rect minus cubes| / |rect| within the box.

    A rectangle reaching outside the outer box is clipped first (flagged);
    one with no interior inside the box raises EmptyRect.
    """
    ox, oy = model.outer.x, model.outer.y
    x_lo, x_hi = max(rect.x.lo, ox.lo), min(rect.x.hi, ox.hi)
    y_lo, y_hi = max(rect.y.lo, oy.lo), min(rect.y.hi, oy.hi)
    if not (x_lo < x_hi and y_lo < y_hi):
        raise EmptyRect(f"rectangle {rect.bounds} has no interior inside the outer box")
    clipped = (x_lo, x_hi, y_lo, y_hi) != rect.bounds
    area = (x_hi - x_lo) * (y_hi - y_lo)
    wx = np.minimum(x_hi, model.xs + model.sides) - np.maximum(x_lo, model.xs)
    wy = np.minimum(y_hi, model.ys + model.sides) - np.maximum(y_lo, model.ys)
    pieces = np.maximum(wx, 0.0) * np.maximum(wy, 0.0)
    overlap = math.fsum(pieces[pieces > 0.0].tolist())
    ratio_n = min(1.0, max(0.0, 1.0 - overlap / area))
    tail_hi = model.residual_tail.linear_hi
    return DensityResult(
        ratio_n=ratio_n,
        lower_bound_true=max(0.0, ratio_n - tail_hi / area),
        rect=Rectangle.from_bounds(x_lo, x_hi, y_lo, y_hi),
        clipped=clipped,
        overlap_total=overlap,
    )


@dataclass(frozen=True)
class BlockDilation:
    """One cover block: the 2^s-dilation of cubes n(s)..n(s+1)-1."""

    s: int
    gamma: float
    n_lo: int
    n_hi: int
    union: RectUnion
    block_area: float

    @property
    def exact_measure(self) -> float:
        return self.union.measure

    @property
    def identity_rhs(self) -> float:
        """(2*gamma + 1)^2 times the block's input area."""
        return (2.0 * self.gamma + 1.0) ** 2 * self.block_area


@dataclass(frozen=True)
class ExceptionalCover:
    """Union of block dilations for s = m..s_hi plus the analytic tail bound."""

    m: int
    s_hi: int
    blocks: tuple[BlockDilation, ...]
    measure_bound_bracket: LogBracket

    @classmethod
    def empty(cls) -> "ExceptionalCover":
        """Degenerate cover with no blocks and bound zero."""
        return cls(m=1, s_hi=0, blocks=(), measure_bound_bracket=LogBracket(LOG_ZERO, LOG_ZERO))

    @property
    def measure_bound(self) -> float:
        """Certified upper bound for the full cover measure, all blocks s >= m."""
        return self.measure_bound_bracket.linear_hi

    def per_block_locate(self, point: tuple[float, float]) -> tuple[tuple[int, Location], ...]:
        return tuple((b.s, b.union.locate(point)) for b in self.blocks)

    def locate(self, point: tuple[float, float]) -> Location:
        verdicts = [loc for _, loc in self.per_block_locate(point)]
        if any(v is Location.INSIDE for v in verdicts):
            return Location.INSIDE
        if any(v is Location.BOUNDARY for v in verdicts):
            return Location.BOUNDARY
        return Location.OUTSIDE

    def materialized_measure_prefix(self) -> tuple[float, ...]:
        """Running sums of per-block exact measures (an over-count of the union)."""
        out, acc = [], 0.0
        for b in self.blocks:
            acc += b.exact_measure
            out.append(acc)
        return tuple(out)


def cover_measure_bound(
    seq: WeightSequence, m: int, *, rel_tol: float = 1e-15, s_cap: int = 400
) -> LogBracket:
    """Bracket for the analytic bound sum_{s >= m} (2*2^s + 1)^2 * r(n(s)).

    Terms accumulate until one is certainly below rel_tol of the running
    total; HorizonExhausted if that never happens within s_cap blocks (the
    sum still converges for any admissible sequence, but certifying it would
    need a deeper scan).
    """
    if m < 1:
        raise OutOfRange(f"cover start index must be >= 1, got {m}")
    los: list[float] = []
    his: list[float] = []
    for s in range(m, s_cap + 1):
        factor = 2.0 * math.log(2 ** (s + 1) + 1)
        tail = tail_sum(seq, s**s)
        term = tail.scaled(factor)
        los.append(term.lo)
        his.append(term.hi)
        if term.is_zero:
            break
        if term.hi <= log_sum(his) + math.log(rel_tol):
            break
    else:
        raise HorizonExhausted(
            f"cover bound did not stabilize within {s_cap} blocks from m = {m}"
        )
    return LogBracket(log_sum(los), log_sum(his))


def build_cover(model: CompactSetModel, m: int, s_hi: int) -> ExceptionalCover:
    """Materialize block dilations s = m..s_hi; the bound covers all s >= m.

    Raises TruncationTooSmall when the model does not hold every cube of
    block s_hi.
    """
    if not 1 <= m <= s_hi:
        raise OutOfRange(f"need 1 <= m <= s_hi, got m = {m}, s_hi = {s_hi}")
    needed = (s_hi + 1) ** (s_hi + 1) - 1
    if needed > model.trunc:
        raise TruncationTooSmall(
            f"cover horizon s_hi = {s_hi} needs cubes through {needed}, model holds {model.trunc}"
        )
    blocks = []
    for s in range(m, s_hi + 1):
        n_lo, n_hi = s**s, (s + 1) ** (s + 1) - 1
        gamma = float(2**s)
        union = dilate_2d(model.cubes(n_lo, n_hi), gamma, block=(s, n_lo, n_hi))
        block_area = math.fsum(model.seq.w2(n) for n in range(n_lo, n_hi + 1))
        blocks.append(
            BlockDilation(
                s=s, gamma=gamma, n_lo=n_lo, n_hi=n_hi, union=union, block_area=block_area
            )
        )
    return ExceptionalCover(
        m=m,
        s_hi=s_hi,
        blocks=tuple(blocks),
        measure_bound_bracket=cover_measure_bound(model.seq, m),
    )


@dataclass(frozen=True)
class ExceptionalVerdict:
    """Point classification against the cubes and the cover, at horizon."""

    point: tuple[float, float]
    cube_location: Location
    cube_index: int | None
    per_block: tuple[tuple[int, Location], ...]
    overall: str

    @property
    def is_scannable(self) -> bool:
        return self.overall == "outside-cover-up-to-horizon"


def is_exceptional(
    model: CompactSetModel, cover: ExceptionalCover, point: tuple[float, float]
) -> ExceptionalVerdict:
    """Classify a point: cube boundary, in-cover, inside an uncovered cube,
    or outside the cover up to its horizon.

    Cube-boundary hits win (they are excluded from every claim); covered
    points are next, including interiors of the cover's own cubes; a point
    inside an uncovered cube is not part of the remaining set at all.
    """
    if model.outer.locate(point) is not Location.INSIDE:
        raise OutOfRange(f"point {point} is not strictly inside the outer box")
    cube_loc, cube_idx = model.locate_in_cubes(point)
    per_block = cover.per_block_locate(point)
    if cube_loc is Location.BOUNDARY:
        overall = "on-cube-boundary"
    elif any(loc is not Location.OUTSIDE for _, loc in per_block):
        overall = "in-cover"
    elif cube_loc is Location.INSIDE:
        overall = "in-cube"
    else:
        overall = "outside-cover-up-to-horizon"
    return ExceptionalVerdict(
        point=(float(point[0]), float(point[1])),
        cube_location=cube_loc,
        cube_index=cube_idx,
        per_block=per_block,
        overall=overall,
    )
