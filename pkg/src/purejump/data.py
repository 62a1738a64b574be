"""
Tick data ingestion and the single-day analysis protocol.

Raw trades are read from a two-column CSV, simultaneous prices are averaged,
the series is sampled on a regular clock by previous-tick interpolation and
log-transformed.  The threshold constant is then scanned over a grid of
``delta`` values small enough that the count threshold stays below one
diffusive standard deviation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Tuple, Union

import numpy as np

from .errors import DomainError, LoadError
from .sim import SamplePath
from .teststat import TestReport, ThresholdSpec, run_test

SESSION = (9.5 * 3600, 16.0 * 3600)


@dataclass(frozen=True)
class TickSeries:
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        if self.timestamps.shape != self.prices.shape:
            raise DomainError("timestamps and prices must have the same length")
        if np.any(self.prices <= 0):
            raise DomainError("prices must be positive")
        if np.any(np.diff(self.timestamps) < 0):
            raise DomainError("timestamps must be nondecreasing")

    def __len__(self):
        return self.timestamps.size


def load_ticks(source: Union[str, IO[str], IO[bytes]]) -> TickSeries:
    """Parse a ``timestamp,price`` CSV (seconds from midnight) into a sorted series.

    ``source`` is a path, a text stream or a byte stream.  All bad rows are
    collected before raising so the error lists every offending line number.
    """
    if isinstance(source, str):
        with open(source, encoding="utf-8", newline="") as fh:
            return load_ticks(fh)
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise LoadError("empty tick file")
    if [h.strip().lower() for h in header] != ["timestamp", "price"]:
        raise LoadError(f"expected header 'timestamp,price', got {','.join(header)!r}", [1])
    ts, px, bad = [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != 2:
                raise ValueError
            t, p = float(row[0]), float(row[1])
        except ValueError:
            bad.append(lineno)
            continue
        if not (math.isfinite(t) and math.isfinite(p)) or p <= 0:
            bad.append(lineno)
            continue
        ts.append(t)
        px.append(p)
    if bad:
        raise LoadError(f"malformed or non-positive rows at lines {bad}", bad)
    if not ts:
        raise LoadError("tick file has no data rows")
    ts = np.asarray(ts)
    px = np.asarray(px)
    order = np.argsort(ts, kind="stable")
    return TickSeries(ts[order], px[order])


def regularize(ticks: TickSeries, interval: float = 10.0,
               session: Tuple[float, float] = SESSION) -> SamplePath:
    """Previous-tick log prices on ``open, open+interval, ..., <= close`` with ``T = 1``."""
    if not interval > 0:
        raise DomainError(f"interval must be positive, got {interval}")
    open_, close = session
    if not close > open_:
        raise DomainError("session close must be after open")
    inside = (ticks.timestamps >= open_) & (ticks.timestamps <= close)
    if np.count_nonzero(inside) < 2:
        raise DomainError("need at least 2 ticks inside the session")
    # simultaneous prices are replaced by their mean
    uniq, inv = np.unique(ticks.timestamps, return_inverse=True)
    mean_px = np.bincount(inv, weights=ticks.prices) / np.bincount(inv)
    grid = open_ + interval * np.arange(int(math.floor((close - open_) / interval + 1e-9)) + 1)
    idx = np.searchsorted(uniq, grid, side="right") - 1
    if idx[0] < 0:
        raise DomainError(f"leading gap: no tick at or before the first grid time {grid[0]}")
    return SamplePath(np.log(mean_px[idx]), T=1.0)


def sigma_star_sq(path: SamplePath) -> float:
    """Truncated realized variance ``sum dY**2 * 1{|dY| <= dt**(1/4)} / T``."""
    d = path.increments()
    keep = np.abs(d) <= path.dt**0.25
    return float(np.sum(d[keep] ** 2) / path.T)


@dataclass(frozen=True)
class DeltaGrid:
    deltas: Tuple[float, ...]
    kappa: float
    varpi: float
    sigma_star_sq: float
    delta_max: float
    empty: bool = field(default=False)

    def admissible(self, delta: float, n: int, T: float = 1.0) -> bool:
        dt = T / n
        lhs = delta * math.log(n) ** self.kappa * dt**self.varpi
        return lhs <= math.sqrt(self.sigma_star_sq) * dt**0.5


def delta_grid(path: SamplePath, kappa: float = 2.0, varpi: float = 1.5, step: float = 0.1,
               start: float = None) -> DeltaGrid:
    """Grid ``step, 2*step, ...`` of thresholds with ``delta (log n)**kappa dt**varpi <= sigma* dt**(1/2)``."""
    if not kappa >= 0:
        raise DomainError(f"kappa must be nonnegative, got {kappa}")
    if not varpi > 0.5:
        raise DomainError(f"varpi must exceed 1/2, got {varpi}")
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    s2 = sigma_star_sq(path)
    n, dt = path.n, path.dt
    dmax = math.sqrt(s2) * dt ** (0.5 - varpi) / math.log(n) ** kappa
    grid = DeltaGrid((), kappa, varpi, s2, dmax, empty=True)
    first = step if start is None else start
    m = 0
    deltas = []
    while True:
        d = round(first + m * step, 12)
        if d > dmax or not grid.admissible(d, n, path.T):
            break
        deltas.append(d)
        m += 1
    return DeltaGrid(tuple(deltas), kappa, varpi, s2, dmax, empty=not deltas)


def fixed_grid(path: SamplePath, lo: float = 1.0, hi: float = 8.0, step: float = 0.1,
               kappa: float = 2.0, varpi: float = 1.5) -> DeltaGrid:
    """An explicit ``lo..hi`` grid, without the admissibility filter."""
    m = int(round((hi - lo) / step))
    deltas = tuple(round(lo + i * step, 12) for i in range(m + 1))
    s2 = sigma_star_sq(path)
    dmax = math.sqrt(s2) * path.dt ** (0.5 - varpi) / math.log(path.n) ** kappa
    return DeltaGrid(deltas, kappa, varpi, s2, dmax, empty=not deltas)


def analyze_day(path: SamplePath, grid: DeltaGrid, theta: float = 0.05) -> List[Tuple[float, TestReport]]:
    """Run the count test once per ``delta`` in the grid (studentized with ``sigma_tilde``)."""
    if not grid.deltas:
        raise DomainError("delta grid is empty")
    return [(d, run_test(path, ThresholdSpec.scaled(d, grid.kappa, grid.varpi, 2), theta))
            for d in grid.deltas]


def day_csv(results: Iterable[Tuple[float, TestReport]]) -> str:
    lines = ["delta,statistic,critical,reject"]
    for d, rep in results:
        reject = "inconclusive" if rep.inconclusive else str(int(rep.reject_h0))
        lines.append(f"{d!r},{rep.studentized!r},{rep.critical_z!r},{reject}")
    return "\n".join(lines) + "\n"


def day_summary(path: SamplePath, results: List[Tuple[float, TestReport]]) -> dict:
    ok = [r for _, r in results if not r.inconclusive]
    stats = np.array([r.studentized for r in ok])
    return dict(n=path.n, T=path.T, sigma_star_sq=sigma_star_sq(path), grid_size=len(results),
                inconclusive=len(results) - len(ok),
                rejections=int(sum(r.reject_h0 for r in ok)),
                min_statistic=float(stats.min()) if ok else math.nan,
                max_statistic=float(stats.max()) if ok else math.nan,
                studentization="sigma_tilde")
