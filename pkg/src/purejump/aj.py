"""
Truncated power variation ratio test, used as a baseline.

``S_n = B(p, u_n, dt) / B(p, u_n, k*dt)`` tends to ``k**(1 - p/2)`` when a
Brownian component is present and to 1 under a pure-jump alternative with
``p > max(1, beta)``.  The test is one-sided: small studentized values
reject the diffusion null.

The studentizing constant ``C`` in ``v_n**2 = C * B(2p) / B(p)**2`` is either
given by the caller or calibrated once by Monte Carlo on Brownian paths and
cached per ``(p, k, truncation)``.
"""

from __future__ import annotations

import logging
import math
import threading
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .data import sigma_star_sq
from .errors import ConsistencyWarning, DegenerateStatisticError, DomainError
from .sim import Brownian, ModelSpec, SamplePath, SeedLike, child_seed, simulate
from .teststat import TestReport, normal_quantile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AjSpec:
    """Parameters of the baseline test.

    The truncation level is ``u_n = alpha_u * sigma_star * dt**rho`` where
    ``sigma_star`` is the square root of the truncated realized variance of
    the path (``adaptive=True``) or 1 (``adaptive=False``).
    """

    p: float = 1.5
    alpha_u: float = 5.0
    rho: float = 0.48
    k: int = 2
    calibration_c: Union[float, str] = "monte-carlo"
    adaptive: bool = True

    def __post_init__(self):
        if not 1 < self.p < 2:
            raise DomainError(f"p must lie in (1, 2), got {self.p}")
        if not 0 < self.rho < 0.5:
            raise DomainError(f"rho must lie in (0, 1/2), got {self.rho}")
        if not self.alpha_u > 0:
            raise DomainError(f"alpha_u must be positive, got {self.alpha_u}")
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k}")
        c = self.calibration_c
        if isinstance(c, str):
            if c != "monte-carlo":
                raise DomainError(f"calibration_c must be positive or 'monte-carlo', got {c!r}")
        elif not c > 0:
            raise DomainError(f"calibration_c must be positive, got {c}")
        if self.rho > (self.p - 1) / self.p:
            warnings.warn(f"rho={self.rho} exceeds (p-1)/p={(self.p - 1) / self.p:.4f}; "
                          "S_n need not tend to 1 under the pure-jump alternative",
                          ConsistencyWarning, stacklevel=3)


def truncated_power_variation(path: SamplePath, p: float, u: float, step: int = 1) -> float:
    """``sum |dY|**p * 1{|dY| <= u}`` over non-overlapping ``step``-increments."""
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")
    if not u > 0:
        raise DomainError(f"truncation must be positive, got {u}")
    a = np.abs(path.increments(step))
    return float(np.sum(a[a <= u] ** p))


def truncation_level(path: SamplePath, spec: AjSpec) -> float:
    scale = math.sqrt(sigma_star_sq(path)) if spec.adaptive else 1.0
    if scale == 0:
        scale = 1.0
    return spec.alpha_u * scale * path.dt**spec.rho


def _components(path: SamplePath, spec: AjSpec):
    u = truncation_level(path, spec)
    b_fine = truncated_power_variation(path, spec.p, u)
    b_coarse = truncated_power_variation(path, spec.p, u, step=spec.k)
    b_2p = truncated_power_variation(path, 2 * spec.p, u)
    return u, b_fine, b_coarse, b_2p


def s_n(path: SamplePath, spec: AjSpec) -> float:
    _, b_fine, b_coarse, _ = _components(path, spec)
    if b_coarse == 0:
        raise DegenerateStatisticError("zero coarse power variation", b_fine=b_fine, b_coarse=b_coarse)
    return b_fine / b_coarse


def h0_limit(p: float, k: int = 2) -> float:
    return k ** (1 - p / 2)


def _raw_ratio(path: SamplePath, spec: AjSpec) -> float:
    """``(S_n - k**(1-p/2)) / sqrt(B(2p) / B(p)**2)``; unit constant."""
    _, b_fine, b_coarse, b_2p = _components(path, spec)
    if b_coarse == 0 or b_fine == 0:
        return math.nan
    return (b_fine / b_coarse - h0_limit(spec.p, spec.k)) / math.sqrt(b_2p / b_fine**2)


# ---------------------------------------------------------------------------
# Calibration of C
# ---------------------------------------------------------------------------

_cache: dict = {}
_cache_lock = threading.Lock()


def calibrate_constant(spec: AjSpec, reps: int = 10_000, n: int = 23_400, seed: SeedLike = 20_110_901) -> float:
    """Variance of the unit-constant studentized ``S_n`` over Brownian paths."""
    model = ModelSpec(diffusion=Brownian(1.0))
    vals = np.array([_raw_ratio(simulate(model, n, 1.0, child_seed(seed, r)), spec) for r in range(reps)])
    vals = vals[np.isfinite(vals)]
    return float(np.var(vals, ddof=1))


def _cache_key(spec: AjSpec):
    return (spec.p, spec.k, spec.alpha_u, spec.rho, spec.adaptive)


def resolve_constant(spec: AjSpec, reps: int = 10_000, n: int = 23_400) -> float:
    if not isinstance(spec.calibration_c, str):
        return float(spec.calibration_c)
    key = _cache_key(spec)
    c = _cache.get(key)
    if c is None:
        with _cache_lock:
            c = _cache.get(key)
            if c is None:
                log.info("calibrating AJ constant for p=%s k=%s (%d reps, n=%d)", spec.p, spec.k, reps, n)
                c = calibrate_constant(spec, reps=reps, n=n)
                _cache[key] = c
    return c


def set_cached_constant(spec: AjSpec, value: float) -> None:
    with _cache_lock:
        _cache[_cache_key(spec)] = float(value)


# ---------------------------------------------------------------------------
# Test
# ---------------------------------------------------------------------------

def aj_test(path: SamplePath, spec: Optional[AjSpec] = None, theta: float = 0.05,
            constant: Optional[float] = None) -> TestReport:
    """Left-tailed level-``theta`` test; rejects when the studentized ``S_n`` is below ``z_theta``.

    ``constant`` overrides both ``spec.calibration_c`` and the calibration cache.
    """
    if spec is None:
        spec = AjSpec()
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    c = resolve_constant(spec) if constant is None else float(constant)
    z = normal_quantile(theta)
    u, b_fine, b_coarse, b_2p = _components(path, spec)
    extra = dict(p=spec.p, rho=spec.rho, alpha_u=spec.alpha_u, u_n=u, b_fine=b_fine,
                 b_coarse=b_coarse, b_2p=b_2p, calibration_c=c)
    base = dict(family="aj", n=path.n, T=path.T, theta=theta, critical_z=z, k=spec.k)
    if b_coarse == 0 or b_fine == 0:
        return TestReport(status="inconclusive", statistic=math.nan, studentized=math.nan,
                          reject_h0=False, extra=dict(extra, v_n_sq=math.nan), **base)
    stat = b_fine / b_coarse
    v_sq = c * b_2p / b_fine**2
    stud = (stat - h0_limit(spec.p, spec.k)) / math.sqrt(v_sq)
    return TestReport(status="ok", statistic=stat, studentized=stud, reject_h0=bool(stud < z),
                      extra=dict(extra, v_n_sq=v_sq), **base)
