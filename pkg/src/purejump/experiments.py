"""
Monte Carlo harness for size, power and sampling-distribution experiments.

Replication ``r`` of any cell is simulated from ``child_seed(master_seed, r)``,
so results depend only on the plan and the master seed: the worker count,
chunking and the position of a cell inside a grid never change a number.
Cells sharing a master seed therefore use common random numbers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .aj import AjSpec, aj_test, resolve_constant
from .errors import DomainError
from .preavg import PreAvgSpec, v_bar
from .sim import Brownian, ModelSpec, Stable, child_seed, simulate
from .teststat import ThresholdSpec, count_small, run_test


# ---------------------------------------------------------------------------
# Per-path evaluators; each returns (statistic, studentized, reject, inconclusive)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VTildeEval:
    spec: ThresholdSpec = ThresholdSpec()
    theta: float = 0.05

    def __call__(self, path):
        rep = run_test(path, self.spec, self.theta)
        return rep.statistic, rep.studentized, rep.reject_h0, rep.inconclusive


@dataclass(frozen=True)
class AjEval:
    spec: AjSpec
    constant: float
    theta: float = 0.05

    def __call__(self, path):
        rep = aj_test(path, self.spec, self.theta, constant=self.constant)
        return rep.statistic, rep.studentized, rep.reject_h0, rep.inconclusive


@dataclass(frozen=True)
class VBarEval:
    spec: PreAvgSpec = PreAvgSpec()

    def __call__(self, path):
        rec = v_bar(path, self.spec)
        bad = rec["status"] != "ok"
        return rec["v_bar"], math.nan, False, bad


@dataclass(frozen=True)
class CountEval:
    """Number of ``step``-increments at most ``alpha * (step*dt)**varpi``."""

    alpha: float
    varpi: float
    step: int = 1

    def __call__(self, path):
        u = count_small(path, self.step, 0, self.alpha * (self.step * path.dt) ** self.varpi)
        return float(u), math.nan, False, False


@dataclass(frozen=True)
class IncrementEval:
    """Every one-step increment of the path (for increment histograms)."""

    def __call__(self, path):
        return path.increments()


def make_evaluator(test: Union[ThresholdSpec, AjSpec, PreAvgSpec], theta: float = 0.05):
    if isinstance(test, ThresholdSpec):
        return VTildeEval(test, theta)
    if isinstance(test, AjSpec):
        return AjEval(test, resolve_constant(test), theta)
    if isinstance(test, PreAvgSpec):
        return VBarEval(test)
    raise DomainError(f"no evaluator for {test!r}")


# ---------------------------------------------------------------------------
# Replication engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    key: str
    model: ModelSpec
    n: int
    evaluator: Callable
    T: float = 1.0
    meta: Tuple[Tuple[str, object], ...] = ()


def _chunk(cell: Cell, master_seed, start: int, stop: int):
    out = []
    for r in range(start, stop):
        path = simulate(cell.model, cell.n, cell.T, child_seed(master_seed, r))
        out.append(cell.evaluator(path))
    return out


def _chunks(reps: int, workers: int):
    size = max(1, math.ceil(reps / (4 * workers)))
    return [(s, min(s + size, reps)) for s in range(0, reps, size)]


def replicate(cell: Cell, reps: int, master_seed: int, workers: int = 1) -> list:
    """Evaluate ``reps`` independent paths of a cell, in replication order."""
    if reps < 1:
        raise DomainError(f"replications must be >= 1, got {reps}")
    if workers <= 1:
        return _chunk(cell, master_seed, 0, reps)
    spans = _chunks(reps, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_chunk, [cell] * len(spans), [master_seed] * len(spans),
                         [s for s, _ in spans], [e for _, e in spans])
        return [o for part in parts for o in part]


@dataclass
class McSummary:
    """Rejection frequency of one cell.

    ``R`` counts the conclusive replications the rate is computed from;
    ``inconclusive`` replications are reported separately and excluded.
    """

    cell_key: str
    rejection_rate: float
    R: int
    mc_se: float
    inconclusive: int
    mean_statistic: float = math.nan
    se_statistic: float = math.nan
    meta: Dict[str, object] = field(default_factory=dict)

    @classmethod
    def from_outcomes(cls, key: str, outcomes: Sequence, meta=None) -> "McSummary":
        stat = np.array([o[0] for o in outcomes], dtype=float)
        reject = np.array([bool(o[2]) for o in outcomes])
        bad = np.array([bool(o[3]) for o in outcomes])
        good = ~bad
        r = int(good.sum())
        p = float(reject[good].mean()) if r else math.nan
        se = math.sqrt(p * (1 - p) / r) if r else math.nan
        s = stat[good & np.isfinite(stat)]
        mean = float(s.mean()) if s.size else math.nan
        sse = float(s.std(ddof=1) / math.sqrt(s.size)) if s.size > 1 else math.nan
        return cls(key, p, r, se, int(bad.sum()), mean, sse, dict(meta or {}))


CSV_COLUMNS = ["cell_key", "rejection_rate", "R", "mc_se", "inconclusive"]


def summaries_csv(rows: Sequence[McSummary], extra_columns: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + ["mean_statistic", "se_statistic"] + list(extra_columns))
    for s in rows:
        w.writerow([s.cell_key, repr(s.rejection_rate), s.R, repr(s.mc_se), s.inconclusive,
                    repr(s.mean_statistic), repr(s.se_statistic)]
                   + [s.meta.get(c, "") for c in extra_columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Plans
# ---------------------------------------------------------------------------

@dataclass
class ExperimentPlan:
    """A grid of labelled models times sample sizes, one test, one replication budget."""

    models: List[Tuple[str, ModelSpec]]
    n_grid: List[int]
    test: Union[ThresholdSpec, AjSpec, PreAvgSpec] = ThresholdSpec()
    theta: float = 0.05
    replications: int = 2000
    master_seed: int = 1
    T: float = 1.0

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if not self.models or not self.n_grid:
            raise DomainError("plan needs at least one model and one sample size")
        if any(n < 2 for n in self.n_grid):
            raise DomainError("every sample size must be >= 2")
        if not 0 < self.theta < 1:
            raise DomainError("theta must lie in (0, 1)")

    def cells(self) -> List[Cell]:
        ev = make_evaluator(self.test, self.theta)
        return [Cell(f"{label}|n={n}", model, n, ev, self.T, (("model", label), ("n", n)))
                for label, model in self.models for n in self.n_grid]


def run_cell(cell: Cell, reps: int, master_seed: int, workers: int = 1) -> McSummary:
    return McSummary.from_outcomes(cell.key, replicate(cell, reps, master_seed, workers), dict(cell.meta))


def mc_rejection_rate(plan: ExperimentPlan, workers: int = 1) -> List[McSummary]:
    return [run_cell(c, plan.replications, plan.master_seed, workers) for c in plan.cells()]


SWEEPABLE = ("jump_scale", "delta", "noise_sd")


def _with_value(plan: ExperimentPlan, parameter: str, value: float) -> ExperimentPlan:
    if parameter == "jump_scale":
        models = []
        for label, m in plan.models:
            if m.jump is None:
                raise DomainError(f"model {label!r} has no jump component to rescale")
            models.append((label, replace(m, jump=Stable(m.jump.beta, value))))
        return replace(plan, models=models)
    if parameter == "noise_sd":
        return replace(plan, models=[(label, replace(m, noise_sd=value)) for label, m in plan.models])
    if parameter == "delta":
        if not isinstance(plan.test, ThresholdSpec) or plan.test.delta is None:
            raise DomainError("a delta sweep needs a scaled threshold")
        return replace(plan, test=replace(plan.test, delta=value))
    raise DomainError(f"cannot sweep {parameter!r}; choose one of {SWEEPABLE}")


def sweep(plan: ExperimentPlan, parameter: str, values: Sequence[float],
          workers: int = 1) -> List[Tuple[float, McSummary]]:
    """Rerun the plan once per value of one scalar (jump scale, delta or noise sd)."""
    out = []
    for v in values:
        for s in mc_rejection_rate(_with_value(plan, parameter, v), workers):
            s.cell_key = f"{s.cell_key}|{parameter}={v!r}"
            s.meta[parameter] = v
            out.append((v, s))
    return out


def sweep_csv(rows: Sequence[Tuple[float, McSummary]], parameter: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([parameter] + CSV_COLUMNS)
    for v, s in rows:
        w.writerow([repr(v), s.cell_key, repr(s.rejection_rate), s.R, repr(s.mc_se), s.inconclusive])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Histograms and the small-increment table
# ---------------------------------------------------------------------------

STATISTICS = ("increments", "v_tilde", "studentized", "aj_studentized", "v_bar")


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    size: int

    def to_csv(self) -> str:
        lines = ["left,right,count"]
        for a, b, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            lines.append(f"{a!r},{b!r},{int(c)}")
        return "\n".join(lines) + "\n"


def statistic_values(model: ModelSpec, n: int, statistic: str, reps: int, master_seed: int = 1,
                     T: float = 1.0, spec=None, workers: int = 1) -> np.ndarray:
    """Finite values of a per-path statistic over ``reps`` simulated paths."""
    if statistic not in STATISTICS:
        raise DomainError(f"unknown statistic {statistic!r}; choose one of {STATISTICS}")
    if statistic == "increments":
        cell = Cell("hist", model, n, IncrementEval(), T)
        vals = np.concatenate(replicate(cell, reps, master_seed, workers))
    else:
        if statistic in ("v_tilde", "studentized"):
            ev = VTildeEval(spec or ThresholdSpec())
        elif statistic == "aj_studentized":
            aj = spec or AjSpec()
            ev = AjEval(aj, resolve_constant(aj))
        else:
            ev = VBarEval(spec or PreAvgSpec())
        col = 1 if statistic in ("studentized", "aj_studentized") else 0
        vals = np.array([o[col] for o in replicate(Cell("hist", model, n, ev, T), reps, master_seed, workers)])
    return vals[np.isfinite(vals)]


def histogram_export(model: ModelSpec, n: int, statistic: str = "v_tilde", bins: int = 50,
                     reps: int = 1000, master_seed: int = 1, T: float = 1.0, spec=None,
                     value_range: Optional[Tuple[float, float]] = None, workers: int = 1) -> Histogram:
    if bins < 10:
        raise DomainError(f"need at least 10 bins, got {bins}")
    vals = statistic_values(model, n, statistic, reps, master_seed, T, spec, workers)
    counts, edges = np.histogram(vals, bins=bins, range=value_range)
    return Histogram(edges, counts, float(vals.mean()) if vals.size else math.nan, int(vals.size))


def mixture_models(beta: float = 1.25, sigma: float = 0.5) -> Dict[str, ModelSpec]:
    """Mixture, pure-jump and diffusion-only models of the motivating histograms."""
    return {"mixture": ModelSpec(diffusion=Brownian(sigma), jump=Stable(beta, 1.0)),
            "pure_jump": ModelSpec(jump=Stable(beta, 1.0)),
            "diffusion": ModelSpec(diffusion=Brownian(sigma))}


MIXTURE_GRID = dict(beta=1.25, sigmas=(0.25, 0.5), n=(195, 780, 23_400))


def noisy_models(noise_sd: float = 0.01) -> Dict[str, ModelSpec]:
    """Brownian plus Cauchy (null) and Cauchy alone (alternative), both with noise."""
    return {"h0": ModelSpec(diffusion=Brownian(1.0), jump=Stable(1.0, 1.0), noise_sd=noise_sd),
            "h1": ModelSpec(jump=Stable(1.0, 1.0), noise_sd=noise_sd)}


TABLE1_BETAS = (1.5, 1.0, 0.5)
TABLE1_SIGMA = 0.5


def table1_demo(seed: int = 1, reps: int = 500, n: int = 23_400, alpha: float = 2.0,
                varpi: float = 1.0, sigma: float = TABLE1_SIGMA, workers: int = 1) -> Dict[float, Dict[str, float]]:
    """Average counts of increments at most ``alpha * dt**varpi``.

    Rows are stability indices, columns the mixture ``Y = sigma W + S``, the
    scaled Brownian motion ``sigma W`` and the stable process ``S`` alone.
    """
    ev = CountEval(alpha, varpi)
    table = {}
    for beta in TABLE1_BETAS:
        models = {"Y": ModelSpec(diffusion=Brownian(sigma), jump=Stable(beta, 1.0)),
                  "W": ModelSpec(diffusion=Brownian(sigma)),
                  "S": ModelSpec(jump=Stable(beta, 1.0))}
        table[beta] = {name: run_cell(Cell(f"table1|{name}|beta={beta}", m, n, ev), reps, seed, workers).mean_statistic
                       for name, m in models.items()}
    return table


def table1_csv(table: Dict[float, Dict[str, float]]) -> str:
    lines = ["beta,Y,W,S"]
    for beta, row in table.items():
        lines.append(f"{beta!r},{row['Y']!r},{row['W']!r},{row['S']!r}")
    return "\n".join(lines) + "\n"


def mc_mean(model: ModelSpec, n: int, evaluator, reps: int, master_seed: int = 1, T: float = 1.0,
            workers: int = 1) -> Tuple[float, float, int]:
    """Monte Carlo mean of the evaluator's statistic with its standard error."""
    s = run_cell(Cell("mean", model, n, evaluator, T), reps, master_seed, workers)
    return s.mean_statistic, s.se_statistic, s.R
