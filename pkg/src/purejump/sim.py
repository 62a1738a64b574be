"""
Seeded simulation of jump-diffusion price paths on an equispaced grid.

Every generative model is described declaratively by a :class:`ModelSpec`
and turned into a :class:`SamplePath` by :func:`simulate`.  Paths are pure
functions of ``(model, n, T, seed)``: each component (diffusion, jumps,
noise) draws from its own child stream of the seed, so switching one
component on or off never changes the draws of the others.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError

SeedLike = Union[int, np.random.SeedSequence]

_DIFFUSION, _JUMP, _NOISE = 0, 1, 2


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------

def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.SeedSequence(seed)


def child_seed(master: SeedLike, *key: int) -> np.random.SeedSequence:
    """Deterministic child of ``master`` addressed by an integer key path.

    ``child_seed(s, r)`` is the seed of replication ``r``; it does not depend
    on how many other children were derived before, which is what makes
    serial and parallel Monte Carlo runs agree.
    """
    ss = as_seed_sequence(master)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(int(k) for k in key))


def rng(seed: SeedLike) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(as_seed_sequence(seed)))


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SamplePath:
    """Observations ``Y_{t_i}``, ``t_i = t0 + i*T/n``, ``i = 0..n``."""

    values: np.ndarray
    T: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DomainError("path values must be one-dimensional")
        if values.size < 3:
            raise DomainError(f"a path needs n >= 2 increments, got {values.size - 1}")
        if not self.T > 0:
            raise DomainError(f"horizon T must be positive, got {self.T}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return self.T / self.n

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.T * np.arange(self.n + 1) / self.n

    def increments(self, step: int = 1, offset: int = 0) -> np.ndarray:
        """Non-overlapping ``step``-increments starting at index ``offset``."""
        idx = self.values[offset::step]
        return np.diff(idx)

    def scaled(self, c: float) -> "SamplePath":
        return SamplePath(self.values * c, self.T, self.t0)

    def __eq__(self, other):
        if not isinstance(other, SamplePath):
            return NotImplemented
        return (self.T == other.T and self.t0 == other.t0
                and np.array_equal(self.values, other.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time", "value"])
        for t, v in zip(self.times, self.values):
            writer.writerow([repr(float(t)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SamplePath":
        """Inverse of :meth:`to_csv`; the grid must be equispaced."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["time", "value"]:
            raise DomainError("path CSV must start with the header 'time,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:] if (a, b) != ("", "")])
        t, v = data[:, 0], data[:, 1]
        n = v.size - 1
        T = t[-1] - t[0]
        if n >= 2 and not np.allclose(np.diff(t), T / n, rtol=1e-9, atol=1e-12):
            raise DomainError("path CSV times are not equispaced")
        return cls(v, T=T, t0=t[0])


@dataclass(frozen=True)
class Brownian:
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DomainError(f"volatility must be nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class OrnsteinUhlenbeck:
    """``dX = -X dt + dW``, ``X_0 = 0``."""


@dataclass(frozen=True)
class Heston:
    """``dX = sqrt(v) dW``, ``dv = kappa_v (eta - v) dt + gamma sqrt(v) dB``, ``d<W,B> = rho dt``."""

    eta: float = 1 / 16
    gamma: float = 0.5
    kappa_v: float = 5.0
    rho: float = -0.5
    v0: Optional[float] = None  # defaults to eta

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError("heston eta must be positive")
        if not self.gamma >= 0:
            raise DomainError("heston gamma must be nonnegative")
        if not self.kappa_v > 0:
            raise DomainError("heston kappa_v must be positive")
        if not -1 <= self.rho <= 1:
            raise DomainError("heston rho must lie in [-1, 1]")
        if self.v0 is not None and not self.v0 >= 0:
            raise DomainError("heston v0 must be nonnegative")

    @property
    def initial_variance(self) -> float:
        return self.eta if self.v0 is None else self.v0


@dataclass(frozen=True)
class ExpDecay:
    """Deterministic drift ``exp(-gamma t)``."""

    gamma: float = 1.0


@dataclass(frozen=True)
class Stable:
    """``scale * S_beta`` with ``S_beta`` the standard symmetric beta-stable Levy process."""

    beta: float
    scale: float = 1.0

    def __post_init__(self):
        _check_stable(self.beta, self.scale)


Diffusion = Union[Brownian, OrnsteinUhlenbeck, Heston]


@dataclass(frozen=True)
class ModelSpec:
    diffusion: Optional[Diffusion] = None
    drift: Optional[ExpDecay] = None
    jump: Optional[Stable] = None
    noise_sd: float = 0.0

    def __post_init__(self):
        if self.diffusion is None and self.drift is None and self.jump is None:
            raise DomainError("a model needs at least one of diffusion, drift or jump")
        if not self.noise_sd >= 0:
            raise DomainError(f"noise_sd must be nonnegative, got {self.noise_sd}")


# Simulation presets --------------------------------------------------------

def h0_model(beta: float, jump_scale: float = 0.5) -> ModelSpec:
    """Mixture null model: OU diffusion plus ``jump_scale * S_beta``."""
    return ModelSpec(diffusion=OrnsteinUhlenbeck(), jump=Stable(beta, jump_scale))


def h1_model(beta: float, gamma: Optional[float] = None, jump_scale: float = 0.5) -> ModelSpec:
    """Pure-jump alternative: ``exp(-gamma t) + jump_scale * S_beta``.

    ``gamma`` defaults to 1 for ``beta > 1``.  For ``beta <= 1`` it defaults to
    no drift at all, since the pure-jump asymptotics need a driftless path in
    the finite-variation regime.
    """
    if gamma is None:
        gamma = 1.0 if beta > 1 else 0.0
    drift = ExpDecay(gamma) if gamma > 0 else None
    if drift is None:
        return ModelSpec(jump=Stable(beta, jump_scale))
    return ModelSpec(drift=drift, jump=Stable(beta, jump_scale))


def heston_model(beta: float, jump_scale: float = 0.25, **heston) -> ModelSpec:
    return ModelSpec(diffusion=Heston(**heston), jump=Stable(beta, jump_scale))


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def _check_stable(beta, scale):
    if not 0 < beta <= 2:
        raise DomainError(f"stability index must lie in (0, 2], got {beta}")
    if not scale >= 0:
        raise DomainError(f"stable scale must be nonnegative, got {scale}")


def _cms(beta: float, gen: np.random.Generator, count: int) -> np.ndarray:
    # Chambers-Mallows-Stuck, symmetric case; characteristic function exp(-|u|^beta).
    v = gen.uniform(-np.pi / 2, np.pi / 2, count)
    w = gen.standard_exponential(count)
    if beta == 1.0:
        return np.tan(v)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return (np.sin(beta * v) / np.cos(v) ** (1.0 / beta)
                * (np.cos((1.0 - beta) * v) / w) ** ((1.0 - beta) / beta))


def sample_stable(beta: float, scale: float, count: int, seed: SeedLike) -> np.ndarray:
    """Draw iid symmetric stable variates with characteristic function ``exp(-|scale*u|^beta)``.

    ``beta=2`` gives ``N(0, 2*scale**2)`` and ``beta=1`` the Cauchy law with
    scale ``scale``.
    """
    _check_stable(beta, scale)
    count = int(count)
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    draws = _cms(beta, rng(seed), count)
    if scale == 0:
        return np.zeros(count)
    return scale * draws


def _ou(n: int, dt: float, gen: np.random.Generator) -> np.ndarray:
    a = math.exp(-dt)
    sd = math.sqrt(-math.expm1(-2 * dt) / 2)
    x = lfilter([1.0], [1.0, -a], sd * gen.standard_normal(n))
    return np.concatenate([[0.0], x])


def heston_paths(spec: Heston, n: int, T: float, seed: SeedLike):
    """Full-truncation Euler scheme for the Heston log-price diffusion.

    Returns ``(x, v)`` where ``x`` has ``n+1`` points starting at 0 and ``v``
    is the positive part of the Euler variance state, the quantity that
    actually enters both drift and diffusion coefficients.
    """
    gen = rng(seed)
    dt = T / n
    sq = math.sqrt(dt)
    z1 = gen.standard_normal(n)
    z2 = spec.rho * z1 + math.sqrt(1 - spec.rho**2) * gen.standard_normal(n)
    k, eta, g = spec.kappa_v, spec.eta, spec.gamma
    x = np.empty(n + 1)
    v = np.empty(n + 1)
    x[0] = 0.0
    state = spec.initial_variance
    v[0] = max(state, 0.0)
    xi = 0.0
    for i in range(n):
        vp = state if state > 0.0 else 0.0
        root = math.sqrt(vp)
        xi += root * sq * z1[i]
        state = state + k * (eta - vp) * dt + g * root * sq * z2[i]
        x[i + 1] = xi
        v[i + 1] = state if state > 0.0 else 0.0
    return x, v


def _diffusion_part(diffusion, n, T, seed):
    dt = T / n
    if isinstance(diffusion, Brownian):
        w = rng(seed).standard_normal(n) * (diffusion.sigma * math.sqrt(dt))
        return np.concatenate([[0.0], np.cumsum(w)])
    if isinstance(diffusion, OrnsteinUhlenbeck):
        return _ou(n, dt, rng(seed))
    if isinstance(diffusion, Heston):
        return heston_paths(diffusion, n, T, seed)[0]
    raise DomainError(f"unknown diffusion component {diffusion!r}")


def simulate(model: ModelSpec, n: int, T: float = 1.0, seed: SeedLike = 0) -> SamplePath:
    """Simulate ``Y = X + drift + scale*S_beta (+ noise)`` at ``t_i = i*T/n``."""
    n = int(n)
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    dt = T / n
    y = np.zeros(n + 1)
    if model.diffusion is not None:
        y += _diffusion_part(model.diffusion, n, T, child_seed(seed, _DIFFUSION))
    if model.drift is not None:
        y += np.exp(-model.drift.gamma * dt * np.arange(n + 1))
    if model.jump is not None and model.jump.scale > 0:
        jumps = sample_stable(model.jump.beta, model.jump.scale * dt ** (1 / model.jump.beta),
                              n, child_seed(seed, _JUMP))
        y[1:] += np.cumsum(jumps)
    path = SamplePath(y, T=T)
    if model.noise_sd > 0:
        path = add_noise(path, model.noise_sd, child_seed(seed, _NOISE))
    return path


def add_noise(path: SamplePath, noise_sd: float, seed: SeedLike) -> SamplePath:
    """Add iid ``N(0, noise_sd**2)`` microstructure noise to every observation."""
    if not noise_sd >= 0:
        raise DomainError(f"noise_sd must be nonnegative, got {noise_sd}")
    if noise_sd == 0:
        return path
    eps = rng(seed).standard_normal(path.n + 1) * noise_sd
    return SamplePath(path.values + eps, T=path.T, t0=path.t0)


def constant_path(n: int, T: float = 1.0, value: float = 0.0) -> SamplePath:
    return SamplePath(np.full(int(n) + 1, float(value)), T=T)


def path_from_increments(increments: Sequence[float], T: float = 1.0, start: float = 0.0) -> SamplePath:
    inc = np.asarray(increments, dtype=float)
    return SamplePath(np.concatenate([[start], start + np.cumsum(inc)]), T=T)
