"""Generational variance of the deviation S(n) = H(n) - n/2.

Indices are split into generations (consecutive blocks).  For generation t
the spread M_t is the standard deviation of S over the block, and
alpha(t) = log2(M_t / M_{t-1}) measures how fast the noise grows from one
generation to the next.

S is a half-integer, so everything is accumulated on the integer 2*S and
converted to floating point only at the last division.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_N0 = 1000
DEFAULT_NMAX = 11_000_000


@dataclass(frozen=True)
class Deviations:
    """S(n) for n in n_lo..n_hi, stored as the exact integers 2*S(n)."""

    n_lo: int
    twice: np.ndarray

    @property
    def n_hi(self) -> int:
        return self.n_lo + len(self.twice) - 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1, dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return self.twice / 2.0

    def window(self, lo: int, hi: int) -> np.ndarray:
        """2*S over the half-open interval (lo, hi]."""
        if lo + 1 < self.n_lo or hi > self.n_hi:
            raise ValueError(f"interval ({lo}, {hi}] outside deviations {self.n_lo}..{self.n_hi}")
        return self.twice[lo + 1 - self.n_lo : hi + 1 - self.n_lo]


def deviations(terms: Sequence[int] | np.ndarray, n_min: int, n_max: int) -> Deviations:
    """S(n) for n_min <= n <= n_max, where ``terms[i]`` is the term at n = i + 1.

    ``terms`` may be a History (its values() view is used) or any array.
    """
    if hasattr(terms, "values") and callable(terms.values):
        terms = terms.values()
    terms = np.asarray(terms)
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"bad range {n_min}..{n_max}")
    if n_max > len(terms):
        raise ValueError(f"range ends at {n_max} but only {len(terms)} terms are available")
    h = terms[n_min - 1 : n_max].astype(np.int64)
    n = np.arange(n_min, n_max + 1, dtype=np.int64)
    return Deviations(n_min, 2 * h - n)


@dataclass(frozen=True)
class GenerationScheme:
    """How [n_min, n_max] is cut into generations.

    ``geometric``: boundaries n0, 2*n0, 4*n0, ... clipped to n_max.
    ``explicit``: the given boundary list; generation t is (b[t-1], b[t]].
    """

    kind: str = "geometric"
    n_min: int = DEFAULT_N0
    n_max: int = DEFAULT_NMAX
    n0: int = DEFAULT_N0
    ratio: int = 2
    boundaries: tuple[int, ...] = ()

    @classmethod
    def explicit(cls, boundaries: Sequence[int]) -> "GenerationScheme":
        b = tuple(int(x) for x in boundaries)
        if len(b) < 2:
            raise ValueError("need at least two boundaries")
        return cls(kind="explicit", n_min=b[0], n_max=b[-1], n0=b[0], boundaries=b)

    @classmethod
    def geometric(cls, n0: int = DEFAULT_N0, n_max: int = DEFAULT_NMAX, ratio: int = 2) -> "GenerationScheme":
        return cls(kind="geometric", n_min=n0, n_max=n_max, n0=n0, ratio=ratio)


def segment(scheme: GenerationScheme) -> list[tuple[int, int]]:
    """Half-open intervals (lo, hi] tiling (n_min, n_max]."""
    if scheme.kind == "explicit":
        b = list(scheme.boundaries)
    elif scheme.kind == "geometric":
        if scheme.n0 < 1 or scheme.ratio < 2:
            raise ValueError("geometric scheme needs n0 >= 1 and ratio >= 2")
        if scheme.n_min != scheme.n0:
            raise ValueError("geometric scheme starts at n0")
        b = [scheme.n0]
        while b[-1] < scheme.n_max:
            b.append(min(b[-1] * scheme.ratio, scheme.n_max))
    else:
        raise ValueError(f"unknown scheme kind {scheme.kind!r}")
    if b[0] < 1:
        raise ValueError("generations must start at n >= 1")
    for lo, hi in zip(b, b[1:]):
        if hi <= lo:
            raise ValueError(f"empty or inverted generation ({lo}, {hi}]")
    if len(b) < 2:
        raise ValueError("scheme yields no generations")
    return list(zip(b, b[1:]))


@dataclass(frozen=True)
class Generation:
    t: int
    n_lo: int  # exclusive
    n_hi: int  # inclusive
    count: int
    sum2: int  # sum of 2S
    sumsq2: int  # sum of (2S)^2
    clamped: bool = False

    @property
    def mean(self) -> float:
        return float(Fraction(self.sum2, 2 * self.count))

    @property
    def mean_square(self) -> float:
        return float(Fraction(self.sumsq2, 4 * self.count))

    @property
    def variance_exact(self) -> Fraction:
        # <S^2> - <S>^2 over one common denominator
        num = self.count * self.sumsq2 - self.sum2 * self.sum2
        return Fraction(max(num, 0), 4 * self.count * self.count)

    @property
    def variance(self) -> float:
        return float(self.variance_exact)

    @property
    def stddev(self) -> float:
        return math.sqrt(self.variance)


@dataclass
class GenerationStats:
    generations: list[Generation]
    alpha: list[tuple[int, float]] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)  # t with no alpha (zero spread)
    notes: list[str] = field(default_factory=list)

    @property
    def stddevs(self) -> list[float]:
        return [g.stddev for g in self.generations]

    def alpha_at(self, t: int) -> float | None:
        return dict(self.alpha).get(t)


def _exact_sums(x: np.ndarray) -> tuple[int, int]:
    """Sum and sum of squares of an int64 array as Python ints, without overflow."""
    if len(x) == 0:
        return 0, 0
    peak = int(np.abs(x).max())
    if peak >= 3_000_000_000:
        # squares would not fit int64
        return sum(int(v) for v in x), sum(int(v) * int(v) for v in x)
    sq_max = max(peak * peak, 1)
    chunk = max(1, (2**62) // sq_max)
    s = ss = 0
    for i in range(0, len(x), chunk):
        part = x[i : i + chunk]
        s += int(part.sum())
        ss += int((part * part).sum())
    return s, ss


def moments(devs: Deviations, intervals: Sequence[tuple[int, int]]) -> GenerationStats:
    gens = []
    for t, (lo, hi) in enumerate(intervals, start=1):
        x = devs.window(lo, hi)
        if len(x) == 0:
            raise ValueError(f"generation {t} ({lo}, {hi}] has no elements")
        s, ss = _exact_sums(x.astype(np.int64))
        count = len(x)
        clamped = count * ss - s * s < 0
        gens.append(Generation(t, lo, hi, count, s, ss, clamped))
    stats = GenerationStats(gens)
    alpha_series(stats)
    return stats


def alpha_series(stats: GenerationStats) -> list[tuple[int, float]]:
    """Fill and return stats.alpha: (t, log2(M_t / M_{t-1})) for t >= 2."""
    stats.alpha = []
    stats.skipped = []
    gens = stats.generations
    for prev, cur in zip(gens, gens[1:]):
        m_prev, m_cur = prev.stddev, cur.stddev
        if m_prev > 0 and m_cur > 0:
            stats.alpha.append((cur.t, math.log2(m_cur / m_prev)))
        else:
            stats.skipped.append(cur.t)
    if stats.skipped:
        stats.notes.append(
            "alpha undefined (zero spread) for t = " + ", ".join(map(str, stats.skipped))
        )
    return stats.alpha


def alpha_from_spreads(spreads: Sequence[float]) -> list[float]:
    """alpha for a bare list of M_t values."""
    return [math.log2(b / a) for a, b in zip(spreads, spreads[1:]) if a > 0 and b > 0]


def generation_stats(terms, scheme: GenerationScheme) -> GenerationStats:
    intervals = segment(scheme)
    devs = deviations(terms, intervals[0][0] + 1, intervals[-1][1])
    stats = moments(devs, intervals)
    if scheme.kind == "geometric" and len(intervals) >= 2:
        lo, hi = intervals[-1]
        full = lo * scheme.ratio
        if hi < full:
            t = len(intervals)
            stats.notes.append(
                f"generation {t} ({lo}, {hi}] is truncated at n_max and spans "
                f"{(hi - lo) / (full - lo):.0%} of a full generation; alpha({t}) "
                f"is not comparable to the others. Boundaries ending at {lo} avoid this."
            )
    return stats


def full_generations(scheme: GenerationScheme) -> GenerationScheme:
    """The explicit scheme with a truncated final geometric generation dropped."""
    intervals = segment(scheme)
    bounds = [intervals[0][0]] + [hi for _, hi in intervals]
    if scheme.kind == "geometric" and bounds[-1] < bounds[-2] * scheme.ratio:
        bounds.pop()
    return GenerationScheme.explicit(bounds)


STATS_HEADER = ("t", "n_lo", "n_hi", "count", "mean", "stddev", "alpha")


def format_csv(stats: GenerationStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_HEADER)
    alpha = dict(stats.alpha)
    for g in stats.generations:
        a = alpha.get(g.t)
        w.writerow([
            g.t, g.n_lo, g.n_hi, g.count, repr(g.mean), repr(g.stddev),
            "" if a is None else repr(a),
        ])
    return buf.getvalue()


def write_csv(stats: GenerationStats, path: Path | str) -> None:
    Path(path).write_text(format_csv(stats), newline="")
