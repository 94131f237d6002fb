"""Run configuration: one versioned JSON document drives every command."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

SEED_ENV_VAR = "TDE_SNN_SEED"


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field path."""

    def __init__(self, fld: str, message: str):
        super().__init__(f"config field {fld!r}: {message}")
        self.field = fld


@dataclass
class InputSpec:
    channels: int = 1
    height: int = 16
    width: int = 16
    events: str | None = None  # path to an event file; synthetic noise if None
    format: str = "csv"
    window: tuple[int, int] | None = None


@dataclass
class TrainSpec:
    steps: int = 200
    batch_size: int = 8
    lr: float = 0.02
    image_size: int = 16


@dataclass
class RunConfig:
    seed: int = 42
    t_steps: int = 4
    input: InputSpec = field(default_factory=InputSpec)
    channels: int = 8
    v_th: float = 1.0
    beta: float = 0.5
    surrogate_alpha: float = 2.0
    encoder_kernel: int = 3
    per_step_weights: bool = True
    alpha_init: float = 0.5
    variant: str = "sda"
    spatial_kernel: int = 7
    lif0_k_percent: float = 50.0
    gating: bool = True
    rounds: int = 1
    mode: str = "spiking"
    out_dir: str = "out"
    train: TrainSpec = field(default_factory=TrainSpec)


def _require(doc: dict, fld: str, kind, default=None, where: str = ""):
    path = f"{where}.{fld}" if where else fld
    if fld not in doc:
        if default is not None:
            return default
        raise ConfigError(path, "missing")
    value = doc[fld]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(path, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _positive(value, fld: str):
    if value <= 0:
        raise ConfigError(fld, f"must be positive, got {value}")
    return value


def load_config(path, seed_override: int | None = None) -> RunConfig:
    """Parse and validate a config file; raises ConfigError on any problem."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("path", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("json", f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("document", "top level must be an object")
    schema = _require(doc, "schema", int)
    if schema != 1:
        raise ConfigError("schema", f"unsupported version {schema}")

    cfg = RunConfig()
    cfg.seed = _require(doc, "seed", int, default=cfg.seed)
    cfg.t_steps = _positive(_require(doc, "T", int, default=cfg.t_steps), "T")
    cfg.channels = _positive(_require(doc, "channels", int, default=cfg.channels), "channels")

    inp = doc.get("input", {})
    if not isinstance(inp, dict):
        raise ConfigError("input", "must be an object")
    cfg.input.channels = _positive(_require(inp, "channels", int, default=1, where="input"), "input.channels")
    cfg.input.height = _positive(_require(inp, "height", int, default=16, where="input"), "input.height")
    cfg.input.width = _positive(_require(inp, "width", int, default=16, where="input"), "input.width")
    if "events" in inp:
        cfg.input.events = _require(inp, "events", str, where="input")
        cfg.input.format = _require(inp, "format", str, default="csv", where="input")
        if cfg.input.format not in ("csv", "bin"):
            raise ConfigError("input.format", f"must be csv or bin, got {cfg.input.format!r}")
        if "window" in inp:
            win = inp["window"]
            if not (isinstance(win, list) and len(win) == 2 and all(isinstance(v, int) for v in win)):
                raise ConfigError("input.window", "must be [t_begin, t_end] integers")
            cfg.input.window = (win[0], win[1])

    neuron = doc.get("neuron", {})
    if not isinstance(neuron, dict):
        raise ConfigError("neuron", "must be an object")
    cfg.v_th = _positive(_require(neuron, "v_th", float, default=cfg.v_th, where="neuron"), "neuron.v_th")
    cfg.beta = _require(neuron, "beta", float, default=cfg.beta, where="neuron")
    if not 0.0 <= cfg.beta <= 1.0:
        raise ConfigError("neuron.beta", f"must be in [0, 1], got {cfg.beta}")
    cfg.surrogate_alpha = _positive(
        _require(neuron, "surrogate_alpha", float, default=cfg.surrogate_alpha, where="neuron"),
        "neuron.surrogate_alpha",
    )

    enc = doc.get("encoder", {})
    if not isinstance(enc, dict):
        raise ConfigError("encoder", "must be an object")
    cfg.encoder_kernel = _positive(
        _require(enc, "kernel_size", int, default=cfg.encoder_kernel, where="encoder"),
        "encoder.kernel_size",
    )
    if cfg.encoder_kernel % 2 == 0:
        raise ConfigError("encoder.kernel_size", "must be odd")
    cfg.per_step_weights = _require(enc, "per_step_weights", bool, default=True, where="encoder")
    cfg.alpha_init = _require(enc, "alpha_init", float, default=cfg.alpha_init, where="encoder")
    if not 0.0 <= cfg.alpha_init <= 1.0:
        raise ConfigError("encoder.alpha_init", f"must be in [0, 1], got {cfg.alpha_init}")

    att = doc.get("attention", {})
    if not isinstance(att, dict):
        raise ConfigError("attention", "must be an object")
    cfg.variant = _require(att, "variant", str, default=cfg.variant, where="attention")
    if cfg.variant not in ("none", "tcsa", "sda"):
        raise ConfigError("attention.variant", f"must be none|tcsa|sda, got {cfg.variant!r}")
    cfg.spatial_kernel = _positive(
        _require(att, "spatial_kernel", int, default=cfg.spatial_kernel, where="attention"),
        "attention.spatial_kernel",
    )
    if cfg.spatial_kernel % 2 == 0:
        raise ConfigError("attention.spatial_kernel", "must be odd")
    cfg.lif0_k_percent = _require(
        att, "lif0_k_percent", float, default=cfg.lif0_k_percent, where="attention"
    )
    if not 0.0 < cfg.lif0_k_percent <= 100.0:
        raise ConfigError(
            "attention.lif0_k_percent", f"must be in (0, 100], got {cfg.lif0_k_percent}"
        )

    cfg.gating = _require(doc, "gating", bool, default=cfg.gating)
    cfg.rounds = _require(doc, "rounds", int, default=cfg.rounds)
    if cfg.rounds < 0:
        raise ConfigError("rounds", f"must be >= 0, got {cfg.rounds}")
    cfg.mode = _require(doc, "mode", str, default=cfg.mode)
    if cfg.mode not in ("spiking", "relaxed"):
        raise ConfigError("mode", f"must be spiking or relaxed, got {cfg.mode!r}")
    cfg.out_dir = _require(doc, "out_dir", str, default=cfg.out_dir)

    tr = doc.get("train", {})
    if not isinstance(tr, dict):
        raise ConfigError("train", "must be an object")
    cfg.train.steps = _require(tr, "steps", int, default=cfg.train.steps, where="train")
    if cfg.train.steps < 0:
        raise ConfigError("train.steps", f"must be >= 0, got {cfg.train.steps}")
    cfg.train.batch_size = _positive(
        _require(tr, "batch_size", int, default=cfg.train.batch_size, where="train"),
        "train.batch_size",
    )
    cfg.train.lr = _positive(
        _require(tr, "lr", float, default=cfg.train.lr, where="train"), "train.lr"
    )
    cfg.train.image_size = _positive(
        _require(tr, "image_size", int, default=cfg.train.image_size, where="train"),
        "train.image_size",
    )

    if seed_override is not None:
        cfg.seed = seed_override
    return cfg


def seed_from_env() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(SEED_ENV_VAR, f"must be an integer, got {raw!r}") from None
