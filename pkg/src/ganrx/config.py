"""Runtime configuration: built-in defaults, config-file parsing, flag
overrides.

Config files are UTF-8 ``key=value`` lines; blank lines and lines starting
with ``#`` are ignored. Unknown keys are rejected rather than silently
dropped. Precedence is built-in defaults < config file < command-line flags.
"""

from dataclasses import dataclass, fields

from .errors import UsageError

DEFAULT_ABUNDANCES = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
DEFAULT_METHODS = ("rx", "wrx", "ae", "gan-rx")


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    value = float(text)
    if value != value:  # NaN
        raise ValueError("nan is not a valid value")
    return value


def _parse_float_list(text: str):
    items = tuple(float(part) for part in text.split(",") if part.strip())
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return items


def _parse_str_list(text: str):
    items = tuple(part.strip() for part in text.split(",") if part.strip())
    if not items:
        raise ValueError("expected a comma-separated list")
    return items


@dataclass
class Config:
    """Every knob of the pipeline with its default value.

    ``train_seed = None`` means "draw a fresh seed and print it".
    """

    # scene
    width: int = 64
    height: int = 64
    bands: int = 40
    endmembers: int = 4
    noise_sigma: float = 0.02
    scene_seed: int = 1
    # implant protocol
    block: int = 4
    abundances: tuple = DEFAULT_ABUNDANCES
    # training
    alpha: float = 10.0
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    batch_size: int = 64
    epochs: int = 200
    train_seed: int = None
    # detection
    ridge: float = 1e-6
    wrx_iterations: int = 5
    # benchmark
    runs: int = 20
    methods: tuple = DEFAULT_METHODS
    seed_base: int = 1


_PARSERS = {
    "width": _parse_int,
    "height": _parse_int,
    "bands": _parse_int,
    "endmembers": _parse_int,
    "noise_sigma": _parse_float,
    "scene_seed": _parse_int,
    "block": _parse_int,
    "abundances": _parse_float_list,
    "alpha": _parse_float,
    "lr": _parse_float,
    "beta1": _parse_float,
    "beta2": _parse_float,
    "batch_size": _parse_int,
    "epochs": _parse_int,
    "train_seed": _parse_int,
    "ridge": _parse_float,
    "wrx_iterations": _parse_int,
    "runs": _parse_int,
    "methods": _parse_str_list,
    "seed_base": _parse_int,
}

assert set(_PARSERS) == {f.name for f in fields(Config)}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key=value`` lines into a {key: typed value} dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise UsageError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise UsageError(f"{source}:{lineno}: duplicate config key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise UsageError(
                f"{source}:{lineno}: bad value for {key!r}: {exc}"
            ) from exc
    return values


def load_config(path) -> dict:
    """Read and parse a config file; returns only the keys it sets."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path}: config file is not valid UTF-8") from exc
    return parse_config_text(text, source=str(path))


def build_config(path=None, overrides=None) -> Config:
    """Layer defaults, then optional config file, then explicit overrides."""
    cfg = Config()
    layers = []
    if path is not None:
        layers.append(load_config(path))
    if overrides:
        layers.append({k: v for k, v in overrides.items() if v is not None})
    for layer in layers:
        for key, value in layer.items():
            if key not in _PARSERS:
                raise UsageError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    return cfg
