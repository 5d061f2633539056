"""Strict JSON experiment configuration.

Physics parameters never have defaults; only ``output_dir`` may be omitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

EXPERIMENTS = (
    "ztrace",
    "zstats",
    "collapse",
    "info_timeseries",
    "redundancy",
    "recurrence",
    "ensemble_demo",
)

_positive = {"type": "number", "exclusiveMinimum": 0}
_complex = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ],
    "description": "real number or [re, im]",
}
_couplings = {
    "oneOf": [
        {"type": "array", "items": _positive, "minItems": 1},
        {
            "type": "object",
            "properties": {
                "distribution": {"const": "uniform"},
                "low": {"type": "number", "minimum": 0},
                "high": _positive,
                "n": {"type": "integer", "minimum": 1},
            },
            "required": ["distribution", "low", "high", "n"],
            "additionalProperties": False,
        },
    ],
    "description": "explicit coupling list, or a uniform draw on the open interval (low, high)",
}
_imbalance = {
    "oneOf": [
        {"type": "number", "minimum": -1, "maximum": 1},
        {"type": "array", "items": {"type": "number", "minimum": -1, "maximum": 1}, "minItems": 1},
    ],
    "description": "|alpha_k|^2 - |beta_k|^2, scalar (broadcast) or one per atom",
}
_grid = {
    "type": "object",
    "properties": {
        "start": {"type": "number", "minimum": 0},
        "stop": {"type": "number", "minimum": 0},
        "step": _positive,
        "num": {"type": "integer", "minimum": 1},
    },
    "required": ["start", "stop"],
    "oneOf": [{"required": ["step"]}, {"required": ["num"]}],
    "additionalProperties": False,
    "description": "start + k*step up to stop, or num points linearly spaced with both ends",
}

_common = {
    "experiment": {"enum": list(EXPERIMENTS)},
    "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    "output_dir": {"type": "string"},
}


def _schema(props: dict[str, Any], required: list[str], **extra: Any) -> dict[str, Any]:
    return {
        "type": "object",
        "properties": {**_common, **props},
        "required": ["experiment", "seed", *required],
        "additionalProperties": False,
        **extra,
    }


SCHEMAS: dict[str, dict[str, Any]] = {
    "ztrace": _schema(
        {"couplings": _couplings, "imbalance": _imbalance, "grid": _grid},
        ["couplings", "imbalance", "grid"],
    ),
    "zstats": _schema(
        {
            "couplings": _couplings,
            "imbalance": _imbalance,
            "horizon": _positive,
            "samples": {"type": "integer", "minimum": 1},
            "ensemble": {"type": "boolean"},
        },
        ["couplings", "imbalance", "horizon", "samples"],
    ),
    "collapse": _schema(
        {"couplings": _couplings, "imbalance": _imbalance, "a": _complex, "b": _complex, "grid": _grid},
        ["couplings", "imbalance", "a", "b", "grid"],
    ),
    "info_timeseries": _schema(
        {"a": _complex, "b": _complex, "g": _positive, "grid": _grid},
        ["a", "b", "g", "grid"],
    ),
    "redundancy": _schema(
        {
            "n_atoms": {
                "oneOf": [
                    {"type": "integer", "minimum": 1},
                    {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                ]
            },
            "flip_count": {"type": "integer", "minimum": 0},
            "flip_rate": {"type": "number", "minimum": 0, "maximum": 1},
            "trials": {"type": "integer", "minimum": 1},
        },
        ["n_atoms", "trials"],
        oneOf=[{"required": ["flip_count"]}, {"required": ["flip_rate"]}],
    ),
    "recurrence": _schema({"couplings": _couplings}, ["couplings"]),
    "ensemble_demo": _schema(
        {"p_up": {"type": "number", "exclusiveMinimum": 0.5, "maximum": 1}}, ["p_up"]
    ),
}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    params: dict[str, Any]
    output_dir: str | None
    source: dict[str, Any]


def full_schema() -> dict[str, Any]:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "pointerbasis experiment config",
        "oneOf": [
            {**s, "properties": {**s["properties"], "experiment": {"const": name}}}
            for name, s in SCHEMAS.items()
        ],
    }


def _key_of(err: jsonschema.ValidationError) -> str:
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        return ", ".join(extra)
    if err.validator == "required":
        return err.message.split("'")[1]
    path = ".".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def parse_config(data: Any) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>: config must be a JSON object")
    exp = data.get("experiment")
    if exp not in SCHEMAS:
        raise ConfigError(f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")
    validator = jsonschema.Draft202012Validator(SCHEMAS[exp])
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        raise ConfigError(f"{_key_of(err)}: {err.message}")
    params = {k: v for k, v in data.items() if k not in _common}
    return ExperimentConfig(exp, int(data["seed"]), params, data.get("output_dir"), data)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a config file. ``OSError`` propagates; bad content raises ``ConfigError``."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: not valid JSON ({exc})") from None
    return parse_config(data)


def canonical_json(data: Any) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
