"""Run configuration files and manifests.

A configuration is a flat YAML mapping.  Unknown keys are rejected so a typo
in a physics parameter fails loudly instead of silently using a default.

Example::

    initial_state: thermal
    mean_n: 10
    lambda_t: 12.2
    n_atoms: 200
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import yaml

from . import __version__
from .errors import ConfigError, InvalidParameterError
from .experiments import DEFAULT_SWEEP, INITIAL_STATES, ExperimentConfig
from .kick import AtomPreparation, InteractionParams

_FLOAT_KEYS = {
    "mean_n": 10.0,
    "a": math.sqrt(0.5),
    "b": math.sqrt(0.5),
    "phi": 0.0,
    "delta_over_lambda": 1.0,
    "chi_over_lambda": 1.0,
    "lambda_t": 12.2,
    "tail_tol": 1e-10,
}
_INT_KEYS = {"fock_n": 0, "n_atoms": 200, "workers": 1}
_OPTIONAL_KEYS = {"snapshot_every", "energy_floor", "lambda_t_values"}
KNOWN_KEYS = {"initial_state"} | set(_FLOAT_KEYS) | set(_INT_KEYS) | _OPTIONAL_KEYS


def _number(key, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return value


def resolve(raw) -> dict:
    """Validate a raw mapping and fill in every default."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a key-value mapping")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "initial_state" not in raw:
        raise ConfigError("initial_state", f"missing required key (one of {', '.join(INITIAL_STATES)})")
    if raw["initial_state"] not in INITIAL_STATES:
        raise ConfigError("initial_state", f"must be one of {', '.join(INITIAL_STATES)}")
    out = {"initial_state": raw["initial_state"]}
    for key, default in _FLOAT_KEYS.items():
        out[key] = _number(key, raw.get(key, default))
    for key, default in _INT_KEYS.items():
        out[key] = _number(key, raw.get(key, default), int)
    out["snapshot_every"] = None if raw.get("snapshot_every") is None else _number("snapshot_every", raw["snapshot_every"], int)
    out["energy_floor"] = None if raw.get("energy_floor") is None else _number("energy_floor", raw["energy_floor"])
    values = raw.get("lambda_t_values")
    if values is None:
        out["lambda_t_values"] = list(DEFAULT_SWEEP)
    else:
        if not isinstance(values, list) or not values:
            raise ConfigError("lambda_t_values", "expected a non-empty list of numbers")
        out["lambda_t_values"] = [_number("lambda_t_values", v) for v in values]
    # constructing the domain objects runs their own validation
    try:
        experiment_config(out)
    except InvalidParameterError as exc:
        raise ConfigError(_guess_key(str(exc)), str(exc)) from None
    return out


def _guess_key(message: str) -> str:
    for key in sorted(KNOWN_KEYS, key=len, reverse=True):
        if key in message:
            return key
    if "a^2 + b^2" in message or "a and b" in message:
        return "a"
    return "<config>"


def experiment_config(resolved: dict) -> ExperimentConfig:
    return ExperimentConfig(
        initial_state=resolved["initial_state"],
        mean_n=resolved["mean_n"],
        fock_n=resolved["fock_n"],
        atom=AtomPreparation(resolved["a"], resolved["b"], resolved["phi"]),
        params=InteractionParams(resolved["delta_over_lambda"], resolved["chi_over_lambda"], resolved["lambda_t"]),
        n_atoms=resolved["n_atoms"],
        snapshot_every=resolved["snapshot_every"],
        tail_tol=resolved["tail_tol"],
    )


def load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}".replace("\n", " ")) from None
    return resolve({} if raw is None else raw)


@dataclass
class RunManifest:
    command: str
    config: dict
    artifacts: dict = field(default_factory=dict)  # file name -> sha256
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        body = {
            "command": self.command,
            "config": self.config,
            "artifacts": self.artifacts,
            "version": self.version,
            "extra": self.extra,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        return cls(d["command"], d["config"], d["artifacts"], d["version"], d.get("extra", {}))
