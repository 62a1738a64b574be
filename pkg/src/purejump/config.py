"""
YAML configuration for models, tests and experiment plans.

A model is a mapping such as::

    diffusion: {type: heston, eta: 0.0625, gamma: 0.5, kappa_v: 5, rho: -0.5}
    drift: {gamma: 1.0}
    jump: {beta: 1.5, scale: 0.5}
    noise_sd: 0.0

or a preset, ``{preset: h0, beta: 1.5}`` (also ``h1``, ``heston``), where
``beta`` may be a list to expand into one model per value.  A plan adds
``n``, ``test``, ``theta``, ``reps`` and ``seed``; see ``README.md``.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

import yaml

from .aj import AjSpec
from .errors import DomainError
from .experiments import ExperimentPlan
from .preavg import PreAvgSpec
from .sim import (Brownian, ExpDecay, Heston, ModelSpec, OrnsteinUhlenbeck, Stable, h0_model,
                  h1_model, heston_model)
from .teststat import ThresholdSpec

_DIFFUSIONS = {"brownian": Brownian, "ou": OrnsteinUhlenbeck, "heston": Heston}


def model_from_dict(d: Dict[str, Any]) -> ModelSpec:
    d = dict(d)
    preset = d.pop("preset", None)
    d.pop("label", None)
    if preset is not None:
        beta = d.pop("beta")
        if preset == "h0":
            return h0_model(beta, d.pop("jump_scale", 0.5))
        if preset == "h1":
            return h1_model(beta, d.pop("gamma", None), d.pop("jump_scale", 0.5))
        if preset == "heston":
            return heston_model(beta, d.pop("jump_scale", 0.25), **d)
        raise DomainError(f"unknown model preset {preset!r}")
    diffusion = d.get("diffusion")
    if diffusion is not None:
        diffusion = dict(diffusion)
        kind = diffusion.pop("type", None)
        if kind not in _DIFFUSIONS:
            raise DomainError(f"unknown diffusion type {kind!r}")
        diffusion = _DIFFUSIONS[kind](**diffusion)
    drift = ExpDecay(**d["drift"]) if d.get("drift") else None
    jump = Stable(**d["jump"]) if d.get("jump") else None
    return ModelSpec(diffusion=diffusion, drift=drift, jump=jump, noise_sd=float(d.get("noise_sd", 0.0)))


def model_to_dict(m: ModelSpec) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    if isinstance(m.diffusion, Brownian):
        out["diffusion"] = {"type": "brownian", "sigma": m.diffusion.sigma}
    elif isinstance(m.diffusion, OrnsteinUhlenbeck):
        out["diffusion"] = {"type": "ou"}
    elif isinstance(m.diffusion, Heston):
        h = m.diffusion
        out["diffusion"] = {"type": "heston", "eta": h.eta, "gamma": h.gamma, "kappa_v": h.kappa_v,
                            "rho": h.rho, "v0": h.v0}
    if m.drift is not None:
        out["drift"] = {"gamma": m.drift.gamma}
    if m.jump is not None:
        out["jump"] = {"beta": m.jump.beta, "scale": m.jump.scale}
    out["noise_sd"] = m.noise_sd
    return out


def expand_models(entries: List[Dict[str, Any]]) -> List[Tuple[str, ModelSpec]]:
    """Labelled models; a list-valued ``beta`` in a preset expands to one model each."""
    out = []
    for i, e in enumerate(entries):
        betas = e.get("beta")
        if "preset" in e and isinstance(betas, list):
            for b in betas:
                out.append((f"{e.get('label', e['preset'])}|beta={b}", model_from_dict({**e, "beta": b})))
            continue
        label = e.get("label") or (f"{e['preset']}|beta={betas}" if "preset" in e else f"model{i}")
        out.append((label, model_from_dict(e)))
    return out


def spec_from_dict(d: Dict[str, Any]):
    d = dict(d or {})
    family = d.pop("family", "vtilde")
    if family == "vtilde":
        if "alpha" in d:
            return ThresholdSpec.direct(d.pop("alpha"), **d)
        return ThresholdSpec.scaled(**d)
    if family == "aj":
        return AjSpec(**d)
    if family == "preavg":
        th = d.pop("threshold", {"alpha": 9.0})
        return PreAvgSpec(threshold=spec_from_dict({"family": "vtilde", **th}), **d)
    raise DomainError(f"unknown test family {family!r}")


def plan_from_dict(d: Dict[str, Any]) -> ExperimentPlan:
    n = d.get("n")
    n_grid = [int(x) for x in (n if isinstance(n, list) else [n])]
    return ExperimentPlan(models=expand_models(d["models"]), n_grid=n_grid,
                          test=spec_from_dict(d.get("test")), theta=float(d.get("theta", 0.05)),
                          replications=int(d.get("reps", 2000)), master_seed=int(d.get("seed", 1)),
                          T=float(d.get("T", 1.0)))


def load_yaml(path: str) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise DomainError(f"{path}: expected a mapping at top level")
    return data


def load_plan(path: str) -> ExperimentPlan:
    return plan_from_dict(load_yaml(path))
