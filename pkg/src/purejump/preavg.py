"""
Pre-averaged two-scale count ratio for noisy observations.

The observations are cut into non-overlapping blocks of ``block_size``
points.  Inside each block all ``gap``-step increments are averaged, which
shrinks additive iid noise while keeping the diffusion and jump signal.
The block averages are then treated as the increments of a coarser series
with spacing ``T / n_blocks`` and fed to the ordinary count ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStatisticError, DomainError
from .sim import SamplePath
from .teststat import ThresholdSpec, compute_alpha, count_small


@dataclass(frozen=True)
class PreAvgSpec:
    block_size: int = 234
    gap: int = 50
    threshold: ThresholdSpec = ThresholdSpec.direct(9.0, varpi=1.5, k=2)

    def __post_init__(self):
        if self.block_size < 2 or self.gap < 1 or self.gap >= self.block_size:
            raise DomainError(f"need 1 <= gap < block_size, got gap={self.gap}, "
                              f"block_size={self.block_size}")


DEFAULT_PREAVG = PreAvgSpec()


@dataclass(frozen=True)
class PreAveraged:
    """Block averages ``zbar`` and the spacing of the series they are increments of."""

    zbar: np.ndarray
    T: float

    @property
    def n_blocks(self) -> int:
        return self.zbar.size

    @property
    def dt(self) -> float:
        return self.T / self.n_blocks

    def as_path(self) -> SamplePath:
        """Cumulated block averages, so that ``path.increments() == zbar``."""
        return SamplePath(np.concatenate([[0.0], np.cumsum(self.zbar)]), T=self.T)

    def to_csv(self) -> str:
        lines = ["block,time,zbar"]
        for j, z in enumerate(self.zbar):
            lines.append(f"{j + 1},{(j + 1) * self.dt!r},{float(z)!r}")
        return "\n".join(lines) + "\n"


def preaverage_blocks(path: SamplePath, spec: PreAvgSpec) -> PreAveraged:
    """Average the ``gap``-step increments inside each block of ``block_size`` observations.

    Block ``j`` holds observations ``j*M .. j*M + M - 1`` (``M = block_size``);
    its value is the mean of the ``M - gap`` differences ``Z[i] - Z[i-gap]``
    with both ends inside the block.  Trailing observations that do not fill a
    block are dropped.
    """
    m, k = spec.block_size, spec.gap
    n_blocks = path.values.size // m
    if n_blocks < 4:
        raise DomainError(f"pre-averaging needs at least 4 blocks, got {n_blocks}")
    blocks = path.values[: n_blocks * m].reshape(n_blocks, m)
    zbar = (blocks[:, k:] - blocks[:, :-k]).mean(axis=1)
    return PreAveraged(zbar, path.T)


def v_bar(noisy_path: SamplePath, spec: PreAvgSpec = DEFAULT_PREAVG) -> dict:
    """Count ratio on the pre-averaged series.

    Returns a record with ``v_bar``, the fine and coarse counts and the
    thresholds used.  ``status`` is ``"inconclusive"`` when the coarse count
    is zero.
    """
    th = spec.threshold
    if th.k != 2:
        raise DomainError("the pre-averaged ratio is defined for k = 2")
    pre = preaverage_blocks(noisy_path, spec)
    series = pre.as_path()
    alpha = compute_alpha(th, series.n)
    fine = alpha * pre.dt**th.varpi
    coarse = alpha * (th.k * pre.dt) ** th.varpi
    u = count_small(series, 1, 0, fine)
    uk = count_small(series, th.k, 0, coarse)
    rec = dict(n=noisy_path.n, n_blocks=pre.n_blocks, block_size=spec.block_size, gap=spec.gap,
               alpha=alpha, varpi=th.varpi, k=th.k, fine_threshold=fine,
               coarse_threshold=coarse, u_fine=u, u_coarse=uk)
    if uk == 0:
        rec.update(status="inconclusive", v_bar=math.nan)
    else:
        rec.update(status="ok", v_bar=u / uk)
    return rec


def v_bar_value(noisy_path: SamplePath, spec: PreAvgSpec = DEFAULT_PREAVG) -> float:
    rec = v_bar(noisy_path, spec)
    if rec["status"] != "ok":
        raise DegenerateStatisticError("zero coarse count", u_fine=rec["u_fine"], u_coarse=rec["u_coarse"])
    return rec["v_bar"]
