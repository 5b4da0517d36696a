"""Square-side weight sequences and their convergence indexes.

A weight sequence fixes the sides w_n of a family of removed squares, via
the areas w_n^2.  Three shapes are supported:

* ``power``      w_n^2 = c * n**(-p)  with c > 0, p > 1,
* ``geometric``  w_n^2 = c * rho**n   with c > 0, 0 < rho < 1,
* ``explicit``   a finite non-increasing list of positive areas.

Everything downstream needs tail sums r_n = sum_{m >= n} w_m^2 and three
asymptotic indexes of the area sequence:

* the solution a_n of n * (r_n / n)**a_n = 1 and its liminf,
* the convergence exponent  limsup_n  log n / |log w_n^2|,
* the box-dimension style exponent  inf { a : (w_n^2)**(a-1) * r_n -> 0 }.

For a power sequence all three equal 1/p; for a geometric sequence all are 0.
Magnitudes are carried in natural-log form (see :mod:`densitometer.logdomain`)
so that probes such as n = 20**20 stay representable.  liminf/limsup are
estimated as tail minima/maxima over a caller-supplied probe grid; estimates
carry a convergence diagnostic instead of pretending to be exact limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    DegenerateIndex,
    GridTooCoarse,
    InadmissibleParameter,
    NeverHolds,
    NotClosedForm,
    OutOfRange,
    ZeroTail,
)
from .logdomain import LogBracket, log_add, log_sub, log_sum

__all__ = [
    "WeightSequence",
    "IndexEstimate",
    "ExponentScan",
    "OnsetReport",
    "ComparabilityReport",
    "IndexReport",
    "default_probes",
    "tail_sum",
    "log_tail_sum",
    "index_a",
    "index_e_bt",
    "index_e_bm",
    "verify_finally_inequalities",
    "log_comparability",
    "tail_lower_exponent",
    "analyze",
]


def default_probes(limit: int = 10**6) -> tuple[int, ...]:
    """Dense low range plus a geometric grid 2^k, capped at ``limit``."""
    if limit < 2:
        raise OutOfRange(f"probe limit must be >= 2, got {limit}")
    probes = set(range(1, min(32, limit) + 1))
    k = 5
    while 2**k < limit:
        probes.add(2**k)
        k += 1
    probes.add(limit)
    return tuple(sorted(probes))


@dataclass(frozen=True)
class WeightSequence:
    """Immutable descriptor of an area sequence w_n^2, n >= 1."""

    kind: str
    c: float = 1.0
    p: float = 0.0
    rho: float = 0.0
    w2_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "power":
            if not (math.isfinite(self.c) and self.c > 0):
                raise ValueError(f"power form needs c > 0, got {self.c}")
            if not (math.isfinite(self.p) and self.p > 1):
                raise ValueError(
                    f"power form needs p > 1 for a summable area sequence, got {self.p}"
                )
        elif self.kind == "geometric":
            if not (math.isfinite(self.c) and self.c > 0):
                raise ValueError(f"geometric form needs c > 0, got {self.c}")
            if not (0 < self.rho < 1):
                raise ValueError(f"geometric form needs 0 < rho < 1, got {self.rho}")
        elif self.kind == "explicit":
            vals = self.w2_values
            if not vals:
                raise ValueError("explicit form needs at least one area")
            if any(not math.isfinite(v) or v <= 0 for v in vals):
                raise ValueError("explicit areas must be finite and positive")
            if any(b > a for a, b in zip(vals, vals[1:])):
                raise ValueError("explicit areas must be non-increasing")
        else:
            raise ValueError(f"unknown sequence kind: {self.kind!r}")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def power(cls, c: float, p: float) -> "WeightSequence":
        return cls(kind="power", c=float(c), p=float(p))

    @classmethod
    def geometric(cls, c: float, rho: float) -> "WeightSequence":
        return cls(kind="geometric", c=float(c), rho=float(rho))

    @classmethod
    def explicit(cls, w2_values: Sequence[float]) -> "WeightSequence":
        return cls(kind="explicit", w2_values=tuple(float(v) for v in w2_values))

    # -- basic queries --------------------------------------------------------

    @property
    def is_closed_form(self) -> bool:
        return self.kind in ("power", "geometric")

    @property
    def n_max(self) -> int | None:
        """Largest index with a defined area; None for closed forms."""
        return len(self.w2_values) if self.kind == "explicit" else None

    def _check_index(self, n: int) -> None:
        if n < 1:
            raise OutOfRange(f"sequence indexes start at 1, got {n}")
        if self.kind == "explicit" and n > len(self.w2_values):
            raise OutOfRange(
                f"explicit sequence has {len(self.w2_values)} areas, index {n} undefined"
            )

    def log_w2(self, n: int) -> float:
        """Natural log of w_n^2."""
        self._check_index(n)
        if self.kind == "power":
            return math.log(self.c) - self.p * math.log(n)
        if self.kind == "geometric":
            try:
                return math.log(self.c) + n * math.log(self.rho)
            except OverflowError as exc:
                raise OutOfRange(f"index {n} exceeds the float log-domain horizon") from exc
        return math.log(self.w2_values[n - 1])

    def log_w(self, n: int) -> float:
        return 0.5 * self.log_w2(n)

    def w2(self, n: int) -> float:
        """Linear-domain area; underflows to 0.0 beyond the float horizon."""
        try:
            return math.exp(self.log_w2(n))
        except OverflowError:  # pragma: no cover - areas are < 1 in practice
            return math.inf

    def w(self, n: int) -> float:
        return math.exp(self.log_w(n))

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "p": self.p}
        if self.kind == "geometric":
            return {"kind": "geometric", "c": self.c, "rho": self.rho}
        return {"kind": "explicit", "w2": list(self.w2_values)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "WeightSequence":
        kind = obj.get("kind")
        if kind == "power":
            return cls.power(obj["c"], obj["p"])
        if kind == "geometric":
            return cls.geometric(obj["c"], obj["rho"])
        if kind == "explicit":
            return cls.explicit(obj["w2"])
        raise ValueError(f"unknown sequence descriptor kind: {kind!r}")


# -- tail sums -----------------------------------------------------------------

def _power_tail_bracket(c: float, p: float, n: int) -> LogBracket:
    """Certified bracket for sum_{m >= n} c * m**(-p).

    Explicit partial sum up to a cutoff M, then an Euler-Maclaurin closure
    at M whose remainder after the B_2 term is bounded in modulus by the
    first omitted term p(p+1)(p+2)/720 * M**(-p-3); the bracket is the
    midpoint estimate plus/minus that certified remainder.
    """
    log_c = math.log(c)
    # Cutoff chosen so the certified remainder is ~1e-16 relative.
    target = max(n, int(math.ceil(1500.0 * max(p, 1.0))))
    for _ in range(8):
        m_cut = target
        log_terms = [-p * math.log(m) for m in range(n, m_cut)]
        log_integral = (1.0 - p) * math.log(m_cut) - math.log(p - 1.0)
        log_half = -p * math.log(m_cut) - math.log(2.0)
        log_b2 = math.log(p / 12.0) - (p + 1.0) * math.log(m_cut)
        log_mid = log_sum(log_terms + [log_integral, log_half, log_b2])
        log_rem = math.log(p * (p + 1.0) * (p + 2.0) / 720.0) - (p + 3.0) * math.log(m_cut)
        if log_rem <= log_mid + math.log(5e-16):
            return LogBracket(log_sub(log_mid, log_rem) + log_c, log_add(log_mid, log_rem) + log_c)
        target *= 4
    return LogBracket(log_sub(log_mid, log_rem) + log_c, log_add(log_mid, log_rem) + log_c)


def tail_sum(seq: WeightSequence, n: int) -> LogBracket:
    """Certified log-domain bracket for r_n = sum_{m >= n} w_m^2.

    Closed forms are served at any index inside the float log-domain horizon;
    an explicit list has r_n = 0 exactly for every n past its end.
    """
    if n < 1:
        raise OutOfRange(f"tail sums start at n = 1, got {n}")
    if seq.kind == "geometric":
        log_r = math.log(seq.c) - math.log1p(-seq.rho)
        try:
            log_r += n * math.log(seq.rho)
        except OverflowError as exc:
            raise OutOfRange(f"index {n} exceeds the float log-domain horizon") from exc
        return LogBracket.exact(log_r)
    if seq.kind == "power":
        return _power_tail_bracket(seq.c, seq.p, n)
    return LogBracket.from_linear(math.fsum(seq.w2_values[n - 1 :]))


def log_tail_sum(seq: WeightSequence, n: int) -> LogBracket:
    """Like :func:`tail_sum` but refuses an exactly-zero tail."""
    bracket = tail_sum(seq, n)
    if bracket.is_zero:
        raise ZeroTail(f"r_{n} = 0 exactly; its logarithm is undefined")
    return bracket


# -- index estimators ----------------------------------------------------------

def _tail_slice(values: Sequence, minimum: int = 4) -> Sequence:
    """Last quartile of a probe trace, with a small floor."""
    count = max(min(len(values), minimum), len(values) // 4)
    return values[len(values) - count :]


def _closed_form_probes(seq: WeightSequence, probes: Sequence[int] | None, *, start: int = 2) -> list[int]:
    if not seq.is_closed_form:
        raise NotClosedForm(f"operation needs a closed-form sequence, got {seq.kind!r}")
    grid = list(probes) if probes is not None else list(default_probes())
    grid = [n for n in grid if n >= start]
    if not grid:
        raise OutOfRange(f"probe grid has no entries >= {start}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise OutOfRange("probe grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class IndexEstimate:
    """A liminf/limsup proxy over a probe grid plus its convergence diagnostic."""

    name: str
    estimate: float
    values: tuple[tuple[int, float], ...]
    tail_spread: float
    converged: bool


def index_a(seq: WeightSequence, probes: Sequence[int] | None = None) -> IndexEstimate:
    """liminf proxy for the solutions a_n of n * (r_n / n)**a_n = 1.

    Solving the defining equation in logs gives
    a_n = log n / (log n - log r_n); the estimate is the minimum over the
    tail of the probe grid.
    """
    grid = _closed_form_probes(seq, probes)
    values = []
    for n in grid:
        log_n = math.log(n)
        log_r = log_tail_sum(seq, n).mid
        if log_r >= log_n:
            raise DegenerateIndex(f"r_{n} >= n; the defining equation has no root in (0, 1]")
        values.append((n, log_n / (log_n - log_r)))
    tail = _tail_slice(values)
    spread = max(v for _, v in tail) - min(v for _, v in tail)
    return IndexEstimate(
        name="a",
        estimate=min(v for _, v in tail),
        values=tuple(values),
        tail_spread=spread,
        converged=spread < 0.01,
    )


def index_e_bt(seq: WeightSequence, probes: Sequence[int] | None = None) -> IndexEstimate:
    """limsup proxy for log n / |log w_n^2| (convergence exponent of the areas)."""
    grid = _closed_form_probes(seq, probes)
    values = []
    for n in grid:
        log_w2 = seq.log_w2(n)
        if log_w2 >= 0:
            raise DegenerateIndex(f"w_{n}^2 >= 1; |log w_n^2| vanishes or flips sign")
        values.append((n, math.log(n) / abs(log_w2)))
    tail = _tail_slice(values)
    spread = max(v for _, v in tail) - min(v for _, v in tail)
    return IndexEstimate(
        name="e_bt",
        estimate=max(v for _, v in tail),
        values=tuple(values),
        tail_spread=spread,
        converged=spread < 0.01,
    )


@dataclass(frozen=True)
class ExponentScan:
    """Result of the grid scan for inf { a : (w_n^2)**(a-1) * r_n -> 0 }."""

    estimate: float
    grid_step: float
    passing: tuple[float, ...]
    # Supplementary decay diagnostic: log-domain drop g(last) - g(first) per
    # passing exponent; a strongly negative drop certifies "-> 0" visibly.
    decay_drop: Mapping[float, float]


def index_e_bm(
    seq: WeightSequence,
    a_grid: Sequence[float] | None = None,
    probes: Sequence[int] | None = None,
) -> ExponentScan:
    """Smallest grid exponent a with (w_n^2)**(a-1) * r_n decreasing over the probe tail.

    Membership is monotone decrease of g_n = (a-1) log w_n^2 + log r_n along
    the probes; the scan reports the decay drop per exponent as a diagnostic
    rather than folding a fixed decay quota into membership (a quota of the
    kind "final < 1e-3 * initial" would misplace the transition for slowly
    decaying power tails; see the project decisions ledger).
    """
    grid = _closed_form_probes(seq, probes)
    if a_grid is None:
        a_grid = [round(0.01 * k, 10) for k in range(1, 100)]
    a_values = list(a_grid)
    if not a_values or any(b <= a for a, b in zip(a_values, a_values[1:])):
        raise GridTooCoarse("exponent grid must be nonempty and strictly increasing")
    if any(not 0 < a < 1 for a in a_values):
        raise GridTooCoarse("exponents must lie strictly inside (0, 1)")
    log_w2 = [seq.log_w2(n) for n in grid]
    log_r = [log_tail_sum(seq, n).mid for n in grid]
    passing: list[float] = []
    decay: dict[float, float] = {}
    for a in a_values:
        g = [(a - 1.0) * lw + lr for lw, lr in zip(log_w2, log_r)]
        tail = list(_tail_slice(g, minimum=6))
        if all(y < x for x, y in zip(tail, tail[1:])):
            passing.append(a)
            decay[a] = g[-1] - g[0]
    if not passing:
        raise GridTooCoarse("no grid exponent exhibits decrease; cannot bracket the infimum")
    # Membership must be an up-set of the grid, otherwise the grid is too
    # coarse relative to probe noise.
    first = a_values.index(passing[0])
    if passing != a_values[first:]:
        raise GridTooCoarse("passing exponents are not an up-set of the grid")
    step = a_values[1] - a_values[0] if len(a_values) > 1 else 0.0
    return ExponentScan(
        estimate=passing[0],
        grid_step=step,
        passing=tuple(passing),
        decay_drop=decay,
    )


# -- eventual inequalities -----------------------------------------------------

@dataclass(frozen=True)
class OnsetReport:
    """Onset indexes of the three eventual inequalities at (theta, delta)."""

    theta: float
    delta: float
    epsilon: float
    horizon: int
    onset_area_bound: int       # w_n^2 <  (1/n)**(1/theta)
    onset_tail_vs_area: int     # r_n   <  (w_n^2)**(1-delta)
    onset_tail_power: int       # r_n   <  (1/n)**epsilon


def verify_finally_inequalities(
    seq: WeightSequence,
    theta: float,
    delta: float,
    probes: Sequence[int] | None = None,
) -> OnsetReport:
    """Find probe onsets past which the three tail inequalities hold.

    Admissibility requires e_bt < theta < 1 and e_bt < delta < 1, where e_bt
    is the estimated convergence exponent; epsilon = (1/theta) * (1 - delta).
    The onset is the smallest probe from which an inequality holds at every
    later probe up to the horizon.  Comparisons against tail sums use the
    certified upper end of the bracket, so "holds" is bracketing-robust.
    """
    grid = _closed_form_probes(seq, probes, start=1)
    e_bt = index_e_bt(seq, [n for n in grid if n >= 2]).estimate
    for name, value in (("theta", theta), ("delta", delta)):
        if not e_bt < value < 1:
            raise InadmissibleParameter(
                f"{name} = {value} outside the admissible window ({e_bt:.6g}, 1)"
            )
    epsilon = (1.0 / theta) * (1.0 - delta)

    def onset(pred) -> int:
        flags = [pred(n) for n in grid]
        idx = None
        for i in range(len(flags) - 1, -1, -1):
            if not flags[i]:
                break
            idx = i
        if idx is None:
            raise NeverHolds(f"inequality fails at the horizon n = {grid[-1]}")
        return grid[idx]

    onset_area = onset(lambda n: seq.log_w2(n) < -(1.0 / theta) * math.log(n))
    onset_tail_area = onset(
        lambda n: tail_sum(seq, n).certainly_lt((1.0 - delta) * seq.log_w2(n))
    )
    onset_tail_power = onset(
        lambda n: tail_sum(seq, n).certainly_lt(-epsilon * math.log(n))
    )
    return OnsetReport(
        theta=theta,
        delta=delta,
        epsilon=epsilon,
        horizon=grid[-1],
        onset_area_bound=onset_area,
        onset_tail_vs_area=onset_tail_area,
        onset_tail_power=onset_tail_power,
    )


# -- comparability of log n and |log w_n| ---------------------------------------

@dataclass(frozen=True)
class ComparabilityReport:
    """Two-sided tail bounds for the ratio log n / |log w_n|."""

    liminf_proxy: float
    limsup_proxy: float
    comparable: bool
    values: tuple[tuple[int, float], ...]


def log_comparability(
    seq: WeightSequence, probes: Sequence[int] | None = None
) -> ComparabilityReport:
    """Check whether log n and |log w_n| agree up to bounded constants.

    The verdict is "comparable" when the tail minimum of the ratio exceeds
    0.01 and the tail maximum stays below 100.  Geometric sequences fail the
    lower bound: the ratio collapses like log n / n.
    """
    grid = _closed_form_probes(seq, probes)
    values = []
    for n in grid:
        log_w = seq.log_w(n)
        if log_w >= 0:
            raise DegenerateIndex(f"w_{n} >= 1; |log w_n| vanishes or flips sign")
        values.append((n, math.log(n) / abs(log_w)))
    tail = [v for _, v in _tail_slice(values)]
    lo, hi = min(tail), max(tail)
    return ComparabilityReport(
        liminf_proxy=lo,
        limsup_proxy=hi,
        comparable=(lo > 0.01 and hi < 100.0),
        values=tuple(values),
    )


def tail_lower_exponent(
    seq: WeightSequence,
    probes: Sequence[int] | None = None,
    margin: float = 0.1,
) -> float | None:
    """Exponent mu with r_n >= n**(-mu) at every probe >= 2, if one exists.

    For a power sequence mu = p - 1 + margin is returned once verified against
    the certified lower bracket end; None when verification fails (geometric
    tails sink below every power).
    """
    grid = _closed_form_probes(seq, probes)
    if seq.kind == "power":
        mu = seq.p - 1.0 + margin
    else:
        # No power lower envelope is expected; still try the margin itself.
        mu = margin
    ok = all(tail_sum(seq, n).certainly_ge(-mu * math.log(n)) for n in grid)
    return mu if ok else None


# -- combined report -----------------------------------------------------------

@dataclass(frozen=True)
class IndexReport:
    """Bundle of index estimates, admissible parameters and onsets."""

    seq: WeightSequence
    a_est: float
    e_bt_est: float
    e_bm_est: float
    a_converged: bool
    e_bt_converged: bool
    theta: float | None = None
    delta: float | None = None
    epsilon: float | None = None
    mu: float | None = None
    onsets: OnsetReport | None = None
    comparability: ComparabilityReport | None = None

    def to_json(self) -> dict:
        out = {
            "seq": self.seq.to_json(),
            "a_est": self.a_est,
            "e_bt_est": self.e_bt_est,
            "e_bm_est": self.e_bm_est,
            "a_converged": self.a_converged,
            "e_bt_converged": self.e_bt_converged,
            "theta": self.theta,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "mu": self.mu,
        }
        if self.onsets is not None:
            out["onsets"] = {
                "area_bound": self.onsets.onset_area_bound,
                "tail_vs_area": self.onsets.onset_tail_vs_area,
                "tail_power": self.onsets.onset_tail_power,
                "horizon": self.onsets.horizon,
            }
        if self.comparability is not None:
            out["log_ratio"] = {
                "liminf_proxy": self.comparability.liminf_proxy,
                "limsup_proxy": self.comparability.limsup_proxy,
                "comparable": self.comparability.comparable,
            }
        return out


def analyze(
    seq: WeightSequence,
    theta: float | None = None,
    delta: float | None = None,
    probes: Sequence[int] | None = None,
) -> IndexReport:
    """Estimate all indexes; include onsets when (theta, delta) are supplied."""
    a = index_a(seq, probes)
    e_bt = index_e_bt(seq, probes)
    e_bm = index_e_bm(seq, probes=probes)
    onsets = None
    epsilon = None
    if theta is not None and delta is not None:
        onsets = verify_finally_inequalities(seq, theta, delta, probes)
        epsilon = onsets.epsilon
    return IndexReport(
        seq=seq,
        a_est=a.estimate,
        e_bt_est=e_bt.estimate,
        e_bm_est=e_bm.estimate,
        a_converged=a.converged,
        e_bt_converged=e_bt.converged,
        theta=theta,
        delta=delta,
        epsilon=epsilon,
        mu=tail_lower_exponent(seq, probes),
        onsets=onsets,
        comparability=log_comparability(seq, probes),
    )
