"""Test whether a Brownian component is needed in a discretely observed price path."""

__version__ = "0.1.0"

from .errors import (ConsistencyWarning, DegenerateStatisticError, DomainError, LoadError,
                     PureJumpError)
from .sim import (Brownian, ExpDecay, Heston, ModelSpec, OrnsteinUhlenbeck, SamplePath, Stable,
                  add_noise, child_seed, h0_model, h1_model, heston_model, sample_stable, simulate)
from .teststat import (TestReport, ThresholdSpec, compute_alpha, count_small, normal_quantile,
                       run_test, sigma_hat_sq, sigma_tilde_sq, v_n, v_tilde)

__all__ = [
    "ConsistencyWarning", "DegenerateStatisticError", "DomainError", "LoadError", "PureJumpError",
    "Brownian", "ExpDecay", "Heston", "ModelSpec", "OrnsteinUhlenbeck", "SamplePath", "Stable",
    "add_noise", "child_seed", "h0_model", "h1_model", "heston_model", "sample_stable", "simulate",
    "TestReport", "ThresholdSpec", "compute_alpha", "count_small", "normal_quantile", "run_test",
    "sigma_hat_sq", "sigma_tilde_sq", "v_n", "v_tilde",
]
