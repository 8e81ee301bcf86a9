"""Run defaults: built-ins, overridden by a JSON config file, overridden by flags."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ValidationError

DEFAULTS = {
    "tol_sym": 1e-10,
    "tol_sum": 1e-10,
    "tol_herm": 1e-10,
    "tol_unitary": 1e-10,
    "tol_recon": 1e-9,
    "tol_semigroup": 1e-10,
    "tmin": 1e-3,
    "tmax": 1e2,
    "num_times": 50,
    "seed": 0,
}


class ConfigError(ValidationError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


def load_config(path=None) -> dict:
    """Defaults merged with the JSON object in ``path`` (if given and present)."""
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    p = Path(path)
    if not p.exists():
        return cfg
    text = p.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be an object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"{p}: unknown keys {sorted(unknown)}")
    for key, value in data.items():
        cfg[key] = type(DEFAULTS[key])(value)
    return cfg


def merge_flags(cfg: dict, flags: dict) -> dict:
    """Flag values that were actually given (not ``None``) win."""
    out = dict(cfg)
    out.update({k: v for k, v in flags.items() if k in DEFAULTS and v is not None})
    return out
