"""Flat dotted-key configuration files with a strict key schema.

Syntax: one ``key = value`` per line, ``#`` comments, blank lines ignored.
Values are parsed as JSON where possible (numbers, booleans, lists, quoted
strings) and fall back to bare strings.  Unknown keys are rejected.
"""

from __future__ import annotations

import json
from importlib import resources

from .training import TrainConfig


class ConfigError(Exception):
    pass


# key -> (TrainConfig field, converter) or None for non-training keys
SCHEMA: dict[str, tuple[str, type] | None] = {
    "train.epochs": ("epochs", int),
    "train.batch_size": ("batch_size", int),
    "train.lr": ("lr", float),
    "train.margin": ("margin", float),
    "train.dim": ("dim", int),
    "train.reg_mode": ("reg_mode", str),
    "train.reg_radius": ("reg_radius", float),
    "train.activation": ("activation", str),
    "train.leaky_slope": ("leaky_slope", float),
    "train.weighting": ("weighting", str),
    "train.neg_forms": ("neg_forms", tuple),
    "train.filter_negatives": ("filter_negatives", bool),
    "train.entailed_ratio": ("entailed_ratio", float),
    "train.max_resample_attempts": ("max_resample_attempts", int),
    "train.plateau_factor": ("plateau_factor", float),
    "train.plateau_patience": ("plateau_patience", int),
    "train.early_stop_patience": ("early_stop_patience", int),
    "train.val_include_negatives": ("val_include_negatives", bool),
    "train.seed": ("seed", int),
    "closure.max_derived": None,
    "closure.strict_printed_rules": None,
    "eval.pool": None,
    "eval.head_pool": None,
    "eval.tie_mode": None,
}

DEFAULT_EXTRAS = {
    "closure.max_derived": 10 ** 8,
    "closure.strict_printed_rules": False,
    "eval.pool": None,
    "eval.head_pool": None,
    "eval.tie_mode": "optimistic",
}

PRESET_NAMES = (
    "relu-original", "leaky-relaxed", "neg-losses", "neg-filter",
    "ablate-leaky", "ablate-relaxed", "ablate-losses", "ablate-filter",
)


def parse_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, rhs = line.partition("=")
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown config key: {key!r}")
        values[key] = parse_value(rhs)
    return values


def load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        return parse_config_text(f.read(), source=path)


def load_preset(name: str) -> dict:
    if name not in PRESET_NAMES:
        raise ConfigError(
            f"unknown preset: {name!r} (choose from {', '.join(PRESET_NAMES)})")
    text = resources.files("elgeo").joinpath(f"presets/{name}.cfg").read_text("utf-8")
    return parse_config_text(text, source=f"preset:{name}")


def apply_overrides(values: dict, overrides: list[str]) -> dict:
    """Apply CLI ``key=value`` strings on top of file values."""
    out = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value: {item!r}")
        key, _, rhs = item.partition("=")
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key: {key!r}")
        out[key] = parse_value(rhs)
    return out


def to_train_config(values: dict) -> TrainConfig:
    kwargs = {}
    for key, val in values.items():
        spec = SCHEMA[key]
        if spec is None:
            continue
        attr, conv = spec
        if conv is tuple:
            if isinstance(val, str):
                val = [v for v in val.split(",") if v]
            kwargs[attr] = tuple(val)
        elif conv is bool:
            if not isinstance(val, bool):
                raise ConfigError(f"{key} expects true/false, got {val!r}")
            kwargs[attr] = val
        else:
            try:
                kwargs[attr] = conv(val)
            except (TypeError, ValueError):
                raise ConfigError(f"{key} expects {conv.__name__}, got {val!r}") from None
    try:
        return TrainConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def extras(values: dict) -> dict:
    out = dict(DEFAULT_EXTRAS)
    for key, val in values.items():
        if SCHEMA[key] is None:
            out[key] = val
    return out


def resolved(values: dict) -> dict:
    """Full key=value view with every default materialized (for manifests)."""
    cfg = to_train_config(values)
    out = {f"train.{k}": v for k, v in cfg.to_dict().items()}
    out.update(extras(values))
    return out
