"""Run configuration: YAML documents, defaults per model and environment overrides.

Environment variables prefixed ``SIDLAB_`` override keys; ``__`` separates
nesting levels, so ``SIDLAB_STATE__CENTER=0.4`` sets ``state.center``.
Values are parsed as YAML scalars.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass

import yaml

from .errors import InvalidArgumentError

ENV_PREFIX = "SIDLAB_"

_COMMON = {
    "seed": 0,
    "hbar": 1.0,
    "hbar_sequence": [1.0, 0.5, 0.25, 0.125, 0.0625],
    "n_times": 200,
    "window_fraction": 0.5,
    "epsilon": 1e-3,
    "star_order": 6,
    "out": "sidlab-out",
    "positivity": None,
    "sharpening": None,
}

DEFAULTS = {
    "free_translation": {
        "model": {"name": "free_translation", "params": {}},
        "state": {"center": 0.3, "width": 0.1, "coherence": 0.2, "coherence_weight": 0.5},
        "observable": {"coefficients": [1.0, 0.5, 0.25], "regular": 0.2},
        "sigma": 0.08,
        "sigmas": [0.08, 0.07, 0.06],
        "sharpening": {"omega": 0.3, "delta_omega": 0.04},
    },
    "oscillator": {
        "model": {"name": "oscillator", "params": {}},
        "state": {"center": 2.5, "width": 0.15, "coherence": 0.1, "coherence_weight": 0.5},
        "observable": {"coefficients": [1.0, 0.3, 0.1], "regular": 0.2},
        "sigma": 0.3,
        "sigmas": [0.33, 0.31, 0.29],
        # the automatic level cutoff shrinks with hbar, so the band sits low
        "sharpening": {"omega": 0.3, "delta_omega": 0.04},
        "positivity": {"profile": "two_bumps", "centers": [0.24, 0.4], "width": 0.0667,
                       "hbar_sequence": [0.25, 0.125, 0.0625], "m": 8, "n_sets": 20},
    },
    "two_mode": {
        "model": {"name": "two_mode", "params": {}},
        "state": {"center": 2.0, "width": 0.15, "coherence": 0.2, "coherence_weight": 0.5},
        "observable": {"coefficients": [1.0, 0.3, 0.1], "regular": 0.2},
        # the 24-point four-dimensional chart has H steps up to about 0.53
        "sigma": 0.55,
        "sigmas": [0.6, 0.575, 0.55],
    },
}

STAGES = ("model", "state", "evolution", "decoherence", "diagonalization", "wigner",
          "classical", "appendix_a", "appendix_b", "export")


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (extra or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def default_config(model: str = "free_translation") -> dict:
    if model not in DEFAULTS:
        raise InvalidArgumentError(f"unknown model {model!r}; choose from {sorted(DEFAULTS)}")
    return _merge(_COMMON, DEFAULTS[model])


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out: dict = {}
    for key, raw in sorted(environ.items()):
        if not key.startswith(ENV_PREFIX):
            continue
        path = key[len(ENV_PREFIX):].lower().split("__")
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = yaml.safe_load(raw)
    return out


@dataclass(frozen=True)
class RunConfig:
    data: dict

    def __getitem__(self, key):
        return self.data[key]

    def get(self, key, default=None):
        return self.data.get(key, default)

    @property
    def model_name(self) -> str:
        return self.data["model"]["name"]

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)


def validate(cfg: dict) -> dict:
    def positive(name, value):
        if not isinstance(value, (int, float)) or not value > 0:
            raise InvalidArgumentError(f"{name} must be a positive number, got {value!r}")

    positive("hbar", cfg["hbar"])
    seq = cfg["hbar_sequence"]
    if not seq or any(not (isinstance(h, (int, float)) and h > 0) for h in seq):
        raise InvalidArgumentError("hbar_sequence must be a non-empty list of positive numbers")
    if list(seq) != sorted(seq, reverse=True):
        raise InvalidArgumentError("hbar_sequence must be decreasing")
    if not 0 < cfg["epsilon"] < 1:
        raise InvalidArgumentError("epsilon must lie in (0, 1)")
    if not isinstance(cfg["n_times"], int) or cfg["n_times"] < 2:
        raise InvalidArgumentError("n_times must be an integer >= 2")
    if not 0 < cfg["window_fraction"] <= 1:
        raise InvalidArgumentError("window_fraction must lie in (0, 1]")
    if not isinstance(cfg["star_order"], int) or cfg["star_order"] < 0:
        raise InvalidArgumentError("star_order must be a non-negative integer")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise InvalidArgumentError("seed must be a non-negative integer")
    positive("sigma", cfg["sigma"])
    st = cfg["state"]
    positive("state.width", st["width"])
    positive("state.coherence", st["coherence"])
    if not 0 <= st["coherence_weight"] <= 1:
        raise InvalidArgumentError("state.coherence_weight must lie in [0, 1]")
    if len(cfg["observable"]["coefficients"]) < 1:
        raise InvalidArgumentError("observable.coefficients must be non-empty")
    return cfg


def load_config(path=None, overrides: dict | None = None, environ=None, seed: int | None = None,
                out: str | None = None) -> RunConfig:
    """Resolve defaults, the YAML file, environment overrides and CLI flags, in that order."""
    doc: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise InvalidArgumentError(f"{path}: {exc.strerror or exc}") from exc
        except yaml.YAMLError as exc:
            raise InvalidArgumentError(f"{path}: invalid YAML ({exc})") from exc
        if not isinstance(doc, dict):
            raise InvalidArgumentError(f"{path}: top level must be a mapping")
    env = env_overrides(environ)
    model = "free_translation"
    for layer in (doc, env, overrides or {}):
        model = (layer.get("model") or {}).get("name") or model
    cfg = default_config(model)
    cfg = _merge(cfg, doc)
    cfg = _merge(cfg, env)
    cfg = _merge(cfg, overrides or {})
    if seed is not None:
        cfg["seed"] = int(seed)
    if out is not None:
        cfg["out"] = str(out)
    unknown = set(cfg) - set(_COMMON) - set(DEFAULTS[model])
    if unknown:
        raise InvalidArgumentError(f"unknown configuration keys: {sorted(unknown)}")
    return RunConfig(validate(cfg))
