"""Run configuration: flat "key = value" text with dotted section prefixes.

Lines are `section.key = value`; '#' starts a comment; unknown keys are
errors. Flag overrides (--set key=value) take precedence over the file,
which takes precedence over defaults.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

_SCHEMES = ("euler", "rk4")
_RECIPES = ("minimizer", "perturbed_minimizer", "random")


@dataclass
class RunConfig:
    L1: float = None
    L2: float = None
    n1: int = 64
    n2: int = 64
    rho_amplitude: float = 0.0
    rho_k1: int = 1
    rho_k2: int = 0
    N: int = None
    recipe: str = "random"
    seed: int = 1
    phi_amplitude: float = 0.5
    a_amplitude: float = 0.1
    smoothing: int = 20
    target_epsilon0: float = None
    scheme: str = "euler"
    dt: float = None              # None means automatic
    safety: float = 0.8
    t_max: float = 200.0
    grad_tol: float = 1e-8
    record_every: int = 20
    series_path: str = "series.csv"
    snapshot_dir: str = None
    snapshot_every: int = 0       # in records; 0 writes the final state only
    warnings: list = field(default_factory=list)


def _parse_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"key '{key}': expected a number, got {text!r}")


def _parse_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"key '{key}': expected an integer, got {text!r}")


def _parse_dt(key, text):
    if text == "auto":
        return None
    return _parse_float(key, text)


def _parse_choice(choices):
    def parse(key, text):
        if text not in choices:
            raise ConfigurationError(
                f"key '{key}': expected one of {choices}, got {text!r}")
        return text
    return parse


def _parse_str(key, text):
    return text


_KEYS = {
    "geometry.L1": ("L1", _parse_float),
    "geometry.L2": ("L2", _parse_float),
    "geometry.n1": ("n1", _parse_int),
    "geometry.n2": ("n2", _parse_int),
    "geometry.rho_amplitude": ("rho_amplitude", _parse_float),
    "geometry.rho_k1": ("rho_k1", _parse_int),
    "geometry.rho_k2": ("rho_k2", _parse_int),
    "bundle.N": ("N", _parse_int),
    "init.recipe": ("recipe", _parse_choice(_RECIPES)),
    "init.seed": ("seed", _parse_int),
    "init.phi_amplitude": ("phi_amplitude", _parse_float),
    "init.a_amplitude": ("a_amplitude", _parse_float),
    "init.smoothing": ("smoothing", _parse_int),
    "init.target_epsilon0": ("target_epsilon0", _parse_float),
    "step.scheme": ("scheme", _parse_choice(_SCHEMES)),
    "step.dt": ("dt", _parse_dt),
    "step.safety": ("safety", _parse_float),
    "step.t_max": ("t_max", _parse_float),
    "step.grad_tol": ("grad_tol", _parse_float),
    "step.record_every": ("record_every", _parse_int),
    "output.series": ("series_path", _parse_str),
    "output.snapshot_dir": ("snapshot_dir", _parse_str),
    "output.snapshot_every": ("snapshot_every", _parse_int),
}


def parse_pairs(text):
    """(lineno, key, value) triples from config text; syntax errors carry the
    line number."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        pairs.append((lineno, key, value))
    return pairs


def parse_config(text, overrides=()):
    """Validated RunConfig from config text plus (key, value) overrides."""
    cfg = RunConfig()
    merged = {}
    for lineno, key, value in parse_pairs(text):
        if key not in _KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key '{key}'")
        merged[key] = value
    for key, value in overrides:
        if key not in _KEYS:
            raise ConfigurationError(f"unknown key '{key}' in override")
        merged[key] = value
    for key, value in merged.items():
        attr, parse = _KEYS[key]
        setattr(cfg, attr, parse(key, value))
    _validate(cfg)
    return cfg


def _validate(cfg):
    for key in ("L1", "L2"):
        if getattr(cfg, key) is None:
            raise ConfigurationError(f"missing required key 'geometry.{key}'")
        if getattr(cfg, key) <= 0:
            raise ConfigurationError(f"key 'geometry.{key}': must be positive")
    if cfg.N is None:
        raise ConfigurationError("missing required key 'bundle.N'")
    if cfg.N < 0:
        raise ConfigurationError("key 'bundle.N': must be non-negative")
    if cfg.n1 < 8 or cfg.n2 < 8:
        raise ConfigurationError("grid resolution must be at least 8")
    if cfg.target_epsilon0 is not None and cfg.target_epsilon0 <= 0:
        raise ConfigurationError("key 'init.target_epsilon0': must be positive")
    if not (0 < cfg.safety <= 1):
        raise ConfigurationError("key 'step.safety': must be in (0, 1]")
    if cfg.record_every < 1:
        raise ConfigurationError("key 'step.record_every': must be >= 1")
    if cfg.snapshot_every < 0:
        raise ConfigurationError("key 'output.snapshot_every': must be >= 0")
    if cfg.dt is not None and cfg.scheme == "euler":
        hmin = min(cfg.L1 / cfg.n1, cfg.L2 / cfg.n2)
        bound = hmin * hmin * float(np.exp(-2.0 * _rho_max(cfg))) / 4.0
        if cfg.dt > bound:
            cfg.warnings.append(
                f"step.dt = {cfg.dt:g} exceeds the explicit stability bound "
                f"{bound:g}; proceeding (user override)")


def _rho_max(cfg):
    return abs(cfg.rho_amplitude)


def build_rho(cfg):
    """Conformal factor samples from the rho_* keys (None when flat)."""
    if cfg.rho_amplitude == 0.0:
        return None
    i1 = np.arange(cfg.n1)[None, :] / cfg.n1
    i2 = np.arange(cfg.n2)[:, None] / cfg.n2
    return cfg.rho_amplitude * (np.cos(2 * np.pi * cfg.rho_k1 * i1)
                                * np.cos(2 * np.pi * cfg.rho_k2 * i2))
