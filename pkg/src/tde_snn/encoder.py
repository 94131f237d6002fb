"""Input pathways: event-frame accumulation, direct encoding, spiking encoder.

The spiking encoder turns one stem feature map F into a time-varying drive:

    A_0 = F
    A_t = alpha_t * F + (1 - alpha_t) * conv_t(A_{t-1})      t = 1..T

and the spike stream is the LIF response to A_1..A_T. With alpha identically
1 this collapses to direct encoding (the same stimulus at every step), the
baseline whose firing patterns are scarce. The preference coefficients
alpha_t live in [0, 1] and are written by the gating module between batches.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .neuron import LifParams, lif_forward
from .tensor import (
    BatchNormParams,
    ConvSpec,
    SpikeTrain,
    Tensor,
    batchnorm,
    conv2d,
    scale_combine,
)


@dataclass
class Event:
    """One DVS event: pixel (x, y), timestamp t in microseconds, polarity p."""

    x: int
    y: int
    t: int
    p: int

    def __post_init__(self):
        if self.p not in (-1, 1):
            raise ValueError(f"polarity must be -1 or +1, got {self.p}")


class EventFormatError(ValueError):
    """Raised for malformed event files; carries the offending record index."""

    def __init__(self, line: int, message: str):
        super().__init__(f"record {line}: {message}")
        self.line = line


def accumulate_events(
    events: list[Event], height: int, width: int, window: tuple[int, int]
) -> Tensor:
    """Signed polarity sum per pixel over [t_begin, t_end) -> [1, H, W] frame."""
    t0, t1 = window
    if t1 <= t0:
        raise ValueError(f"window [{t0}, {t1}) is empty")
    frame = np.zeros((1, height, width))
    for i, ev in enumerate(events):
        if not (0 <= ev.x < width and 0 <= ev.y < height):
            raise ValueError(
                f"event {i} at ({ev.x}, {ev.y}) outside {width}x{height} frame"
            )
        if t0 <= ev.t < t1:
            frame[0, ev.y, ev.x] += ev.p
    return Tensor(frame)


def read_events_csv(path) -> list[Event]:
    """Parse `x,y,t,p` integer lines (no header)."""
    events = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise EventFormatError(lineno, f"expected 4 fields, got {len(parts)}")
            try:
                x, y, t, p = (int(v) for v in parts)
            except ValueError:
                raise EventFormatError(lineno, f"non-integer field in {line!r}") from None
            try:
                events.append(Event(x, y, t, p))
            except ValueError as exc:
                raise EventFormatError(lineno, str(exc)) from None
    return events


_BIN_RECORD = struct.Struct("<HHQb")  # u16 x, u16 y, u64 t(us), i8 p; no padding


def read_events_bin(path) -> list[Event]:
    """Parse little-endian binary records (13 bytes each, no header)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) % _BIN_RECORD.size != 0:
        raise EventFormatError(
            len(blob) // _BIN_RECORD.size + 1,
            f"file size {len(blob)} is not a multiple of {_BIN_RECORD.size}",
        )
    events = []
    for i, (x, y, t, p) in enumerate(_BIN_RECORD.iter_unpack(blob), start=1):
        try:
            events.append(Event(x, y, t, p))
        except ValueError as exc:
            raise EventFormatError(i, str(exc)) from None
    return events


def write_events_csv(events: list[Event], path) -> None:
    with open(path, "w") as fh:
        for ev in events:
            fh.write(f"{ev.x},{ev.y},{ev.t},{ev.p}\n")


def write_events_bin(events: list[Event], path) -> None:
    with open(path, "wb") as fh:
        for ev in events:
            fh.write(_BIN_RECORD.pack(ev.x, ev.y, ev.t, ev.p))


def direct_encode(image: Tensor, t_steps: int) -> Tensor:
    """Replicate a [C, H, W] image at every step -> [T, C, H, W]."""
    if t_steps < 1:
        raise ValueError(f"need T >= 1, got {t_steps}")
    return Tensor(
        np.broadcast_to(image.data, (t_steps,) + image.data.shape).copy(),
        binary=image.binary,
    )


@dataclass
class EncoderState:
    """Stem Conv-BN plus per-step conv filters and preference coefficients."""

    stem_conv: ConvSpec
    stem_bn: BatchNormParams
    per_step_convs: list[ConvSpec]
    alpha: list[float] = field(default_factory=list)
    alpha_bar: list[float] = field(default_factory=list)

    def __post_init__(self):
        t = len(self.per_step_convs)
        if not self.alpha:
            self.alpha = [0.5] * t
        if not self.alpha_bar:
            self.alpha_bar = list(self.alpha)
        if len(self.alpha) != t or len(self.alpha_bar) != t:
            raise ValueError("alpha, alpha_bar and per_step_convs must share length T")
        for a in list(self.alpha) + list(self.alpha_bar):
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"preference coefficient {a} outside [0, 1]")

    @property
    def t_steps(self) -> int:
        return len(self.per_step_convs)


def init_encoder_state(
    seed: int,
    in_channels: int,
    channels: int,
    t_steps: int,
    kernel_size: int = 3,
    per_step_weights: bool = True,
    alpha_init: float = 0.5,
    weight_gain: float = 1.5,
) -> EncoderState:
    """Seeded encoder: stem conv [channels, in_channels, 3, 3] + T step convs.

    With per_step_weights=False all step convs share the t=1 weights (the
    subscript-free reading); the default keeps them independent.
    """
    stem_rng = rng_mod.stream(seed, "encoder/stem")
    k = 3
    stem = ConvSpec(
        out_channels=channels,
        in_channels=in_channels,
        kernel_size=k,
        padding=(k - 1) // 2,
        weights=stem_rng.normal(0.0, 1.0 / np.sqrt(in_channels * k * k), (channels, in_channels, k, k)),
        bias=np.zeros(channels),
    )
    if kernel_size % 2 == 0:
        raise ValueError("per-step kernel size must be odd to preserve shape")
    steps = []
    shared = None
    for t in range(1, t_steps + 1):
        if per_step_weights or shared is None:
            srng = rng_mod.stream(seed, f"encoder/step{t}")
            w = srng.normal(
                0.0,
                weight_gain / np.sqrt(channels * kernel_size**2),
                (channels, channels, kernel_size, kernel_size),
            )
            shared = w
        steps.append(
            ConvSpec(
                out_channels=channels,
                in_channels=channels,
                kernel_size=kernel_size,
                padding=(kernel_size - 1) // 2,
                weights=shared.copy(),
                bias=np.zeros(channels),
            )
        )
    return EncoderState(
        stem_conv=stem,
        stem_bn=BatchNormParams.identity(channels),
        per_step_convs=steps,
        alpha=[alpha_init] * t_steps,
        alpha_bar=[alpha_init] * t_steps,
    )


def se_features(stem_out: Tensor, state: EncoderState) -> Tensor:
    """Unroll the encoder recurrence from F = stem_out; returns A_1..A_T stacked."""
    if stem_out.data.ndim != 3:
        raise ValueError(f"expected [C,H,W] stem output, got {stem_out.shape}")
    blocks = []
    prev = stem_out
    for t in range(state.t_steps):
        spec = state.per_step_convs[t]
        evolved = conv2d(prev, spec)
        if evolved.shape != stem_out.shape:
            raise ValueError(
                f"per-step conv {t + 1} changed shape {stem_out.shape} -> {evolved.shape}"
            )
        a = state.alpha[t]
        cur = scale_combine(a, stem_out, 1.0 - a, evolved)
        blocks.append(cur.data)
        prev = cur
    return Tensor(np.stack(blocks))


def stem_forward(image: Tensor, state: EncoderState) -> Tensor:
    """Initial Conv-BN feature extraction (eval-mode statistics)."""
    return batchnorm(conv2d(image, state.stem_conv), state.stem_bn, training=False)


def se_encode(image: Tensor, state: EncoderState, p: LifParams) -> SpikeTrain:
    """Full encoder path: stem Conv-BN -> recurrence -> LIF spike stream."""
    if image.shape[0] != state.stem_conv.in_channels:
        raise ValueError(
            f"input channels {image.shape[0]} != stem in_channels "
            f"{state.stem_conv.in_channels}"
        )
    return lif_forward(se_features(stem_forward(image, state), state), p)


def baseline_encode(image: Tensor, state: EncoderState, p: LifParams) -> SpikeTrain:
    """Direct-encoding baseline through the same stem: replicate then LIF."""
    feats = direct_encode(stem_forward(image, state), state.t_steps)
    return lif_forward(feats, p)
