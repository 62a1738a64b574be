"""
Two-scale small-increment count test for the presence of a Brownian component.

The test counts increments whose magnitude is at most ``alpha * dt**varpi``
at the sampling spacing ``dt`` and at ``2*dt``.  Under a diffusion the ratio
of the two counts tends to ``2**(3/2 - varpi)``; under a pure-jump model with
stability index ``beta`` it tends to ``2**(1 + min(1/beta - varpi, 0))``,
which is strictly larger.  Large studentized ratios reject the null of a
diffusion component.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateStatisticError, DomainError
from .sim import SamplePath

# ---------------------------------------------------------------------------
# Standard normal quantile (Wichura, AS 241, PPND16)
# ---------------------------------------------------------------------------

_A = (3.387132872796366608, 133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125, 45921.953931549871457, 67265.770927008700853,
      33430.575583588128105, 2509.0809287301226727)
_B = (1.0, 42.313330701600911252, 687.1870074920579083, 5394.1960214247511077,
      21213.794301586595867, 39307.89580009271061, 28729.085735721942674,
      5226.495278852545925)
_C = (1.42343711074968357734, 4.6303378461565452959, 5.7694972214606914055,
      3.64784832476320460504, 1.27045825245236838258, 0.24178072517745061177,
      0.0227238449892691845833, 7.7454501427834140764e-4)
_D = (1.0, 2.05319162663775882187, 1.6763848301838038494, 0.68976733498510000455,
      0.14810397642748007459, 0.0151986665636164571966, 5.475938084995344946e-4,
      1.05075007164441684324e-9)
_E = (6.6579046435011037772, 5.4637849111641143699, 1.7848265399172913358,
      0.29656057182850489123, 0.026532189526576123093, 0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 0.59983220655588793769, 0.13692988092273580531, 0.0148753612908506148525,
      7.868691311456132591e-4, 1.8463183175100546818e-5, 1.4215117583164458887e-7,
      2.04426310338993978564e-15)


def _poly(coef, x):
    acc = 0.0
    for c in reversed(coef):
        acc = acc * x + c
    return acc


def normal_quantile(p: float) -> float:
    """Inverse of the standard normal CDF, relative accuracy about 1e-16."""
    if not 0 < p < 1:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        z = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        z = _poly(_E, r) / _poly(_F, r)
    return -z if q < 0 else z


# ---------------------------------------------------------------------------
# Threshold and report types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdSpec:
    """Threshold ``alpha * dt**varpi`` with ``alpha`` fixed or ``delta * log(n)**kappa``.

    Exactly one of ``alpha`` (direct mode) or ``delta`` (scaled mode) is set.
    The defaults reproduce the configuration of the size and power tables.
    """

    delta: Optional[float] = 2.0
    kappa: float = 2.0
    varpi: float = 1.5
    k: int = 2
    alpha: Optional[float] = None

    def __post_init__(self):
        if (self.alpha is None) == (self.delta is None):
            raise DomainError("give exactly one of alpha (direct) or delta (scaled)")
        if self.alpha is not None and not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.delta is not None and not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta}")
        if not self.kappa >= 0:
            raise DomainError(f"kappa must be nonnegative, got {self.kappa}")
        if not self.varpi > 0.5:
            raise DomainError(f"varpi must exceed 1/2, got {self.varpi}")
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k}")

    @classmethod
    def direct(cls, alpha: float, varpi: float = 1.5, k: int = 2) -> "ThresholdSpec":
        return cls(delta=None, alpha=alpha, varpi=varpi, k=k)

    @classmethod
    def scaled(cls, delta: float = 2.0, kappa: float = 2.0, varpi: float = 1.5, k: int = 2) -> "ThresholdSpec":
        return cls(delta=delta, kappa=kappa, varpi=varpi, k=k)


@dataclass
class TestReport:
    """Outcome of one test on one path.

    ``status`` is ``"ok"`` or ``"inconclusive"``; an inconclusive report has
    ``reject_h0 = False`` and NaN for every quantity it could not compute.
    ``statistic`` is the ratio the decision is based on (``v_tilde`` for the
    count test, ``S_n`` for the power-variation baseline).
    """

    __test__ = False  # keep pytest from collecting this class

    family: str
    status: str
    n: int
    T: float
    theta: float
    statistic: float
    studentized: float
    critical_z: float
    reject_h0: bool
    alpha: float = math.nan
    varpi: float = math.nan
    k: int = 2
    u_fine: int = -1
    u_coarse: int = -1
    u_offset: int = -1
    u_l: float = math.nan
    v_tilde: float = math.nan
    sigma_tilde_sq: float = math.nan
    extra: dict = field(default_factory=dict)

    @property
    def inconclusive(self) -> bool:
        return self.status != "ok"

    def to_record(self) -> dict:
        """Flat key-value record; ``extra`` entries are merged in at top level."""
        rec = asdict(self)
        extra = rec.pop("extra")
        rec.update(extra)
        return rec


# ---------------------------------------------------------------------------
# Counts and statistics
# ---------------------------------------------------------------------------

def compute_alpha(spec: ThresholdSpec, n: int) -> float:
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if spec.alpha is not None:
        return float(spec.alpha)
    return spec.delta * math.log(n) ** spec.kappa


def count_small(path: SamplePath, step: int, offset: int, threshold: float,
                limit: Optional[int] = None) -> int:
    """Number of non-overlapping ``step``-increments from ``offset`` with ``|increment| <= threshold``.

    ``limit`` caps how many leading increments are examined.
    """
    if step < 1:
        raise DomainError(f"step must be >= 1, got {step}")
    if not 0 <= offset < step:
        raise DomainError(f"offset must lie in [0, step), got offset={offset}, step={step}")
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    inc = path.increments(step, offset)
    if limit is not None:
        inc = inc[:max(int(limit), 0)]
    return int(np.count_nonzero(np.abs(inc) <= threshold))


def thresholds(spec: ThresholdSpec, path: SamplePath):
    """Fine and coarse thresholds ``alpha*dt**varpi`` and ``alpha*(k*dt)**varpi``."""
    a = compute_alpha(spec, path.n)
    dt = path.dt
    return a, a * dt**spec.varpi, a * (spec.k * dt) ** spec.varpi


def v_n(path: SamplePath, spec: ThresholdSpec) -> float:
    """Two-scale ratio ``U(dt) / U(k dt)`` for any ``k >= 2``."""
    _, fine, coarse = thresholds(spec, path)
    u = count_small(path, 1, 0, fine)
    uk = count_small(path, spec.k, 0, coarse)
    if uk == 0:
        raise DegenerateStatisticError("zero coarse count", u_fine=u, u_coarse=uk)
    return u / uk


def v_tilde(path: SamplePath, spec: ThresholdSpec):
    """Ratio of the fine count to the average of the two 2-step counts.

    Returns ``(v_tilde, u_fine, u_coarse, u_offset, u_l)``.
    """
    if spec.k != 2:
        raise DomainError("v_tilde is defined for k = 2 only")
    _, fine, coarse = thresholds(spec, path)
    u = count_small(path, 1, 0, fine)
    u2 = count_small(path, 2, 0, coarse)
    u2_shift = count_small(path, 2, 1, coarse, limit=path.n // 2 - 1)
    u_l = (u2 + u2_shift) / 2
    if u_l == 0:
        raise DegenerateStatisticError("zero coarse count", u_fine=u, u_coarse=u2, u_offset=u2_shift)
    return u / u_l, u, u2, u2_shift, u_l


def sigma_tilde_sq(u_fine: int, u_l: float, n: int, T: float, varpi: float) -> float:
    """Variance estimate that studentizes ``v_tilde``."""
    if not u_l > 0:
        raise DegenerateStatisticError("zero coarse count", u_fine=u_fine, u_l=u_l)
    dt = T / n
    e = 1.5 - varpi
    return (u_fine + 2**e * u_l / 2) / (dt**e * u_l**2)


def sigma_hat_sq(u_fine: int, n: int, T: float, varpi: float, k: int = 2) -> float:
    """Variance estimate that studentizes ``v_n``."""
    if not u_fine > 0:
        raise DegenerateStatisticError("zero fine count", u_fine=u_fine)
    dt = T / n
    e = 1.5 - varpi
    return (1 + k**e) * k ** (2 * e) / (dt**e * u_fine)


def h0_limit(varpi: float, k: int = 2) -> float:
    return k ** (1.5 - varpi)


def h1_limit(beta: float, varpi: float, k: int = 2) -> float:
    return k ** (1 + min(1 / beta - varpi, 0.0))


def run_test(path: SamplePath, spec: ThresholdSpec = ThresholdSpec(), theta: float = 0.05) -> TestReport:
    """Level-``theta`` test of H0 (diffusion present) against H1 (pure jumps).

    H0 is rejected when ``dt**((varpi-3/2)/2) * (v_tilde - 2**(3/2-varpi)) / sigma_tilde``
    exceeds the upper ``theta`` normal quantile.  A zero coarse count yields an
    inconclusive report rather than an exception.
    """
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    alpha, _, _ = thresholds(spec, path)
    z = normal_quantile(1 - theta)
    base = dict(family="vtilde", n=path.n, T=path.T, theta=theta, critical_z=z,
                alpha=alpha, varpi=spec.varpi, k=spec.k)
    try:
        vt, u, u2, u2s, u_l = v_tilde(path, spec)
    except DegenerateStatisticError as exc:
        c = exc.counts
        return TestReport(status="inconclusive", statistic=math.nan, studentized=math.nan,
                          reject_h0=False, u_fine=c["u_fine"], u_coarse=c["u_coarse"],
                          u_offset=c["u_offset"], u_l=0.0, **base)
    s2 = sigma_tilde_sq(u, u_l, path.n, path.T, spec.varpi)
    stud = path.dt ** ((spec.varpi - 1.5) / 2) * (vt - h0_limit(spec.varpi)) / math.sqrt(s2)
    return TestReport(status="ok", statistic=vt, studentized=stud, reject_h0=bool(stud > z),
                      u_fine=u, u_coarse=u2, u_offset=u2s, u_l=u_l, v_tilde=vt,
                      sigma_tilde_sq=s2, **base)


def critical_value(report: TestReport) -> float:
    """The rejection boundary on the ``v_tilde`` scale for a finished report."""
    dt = report.T / report.n
    return (h0_limit(report.varpi)
            + report.critical_z * dt ** (0.75 - report.varpi / 2) * math.sqrt(report.sigma_tilde_sq))
