"""Multi-dimensional attention over membrane tensors.

Two variants share one config. The float reference ("tcsa") squeezes each
dimension by max, maps it, squashes to (0,1) with a sigmoid and applies the
gate as a full-tensor Hadamard product — three rounds of float multiplies.
The spike-driven variant ("sda") replaces the gate computation with two
neuron groups (top-k firing, then threshold firing with membrane output) and
fuses the per-dimension weights additively:

    H_att = s_temp*f_ch*s_spa + s_ch*f_spa*s_temp + s_spa*f_temp*s_ch + H

Every product carries at least two binary factors, so the whole path records
zero float multiplies on the ledger; the float weights are sigmoids of the
dual group's membrane potentials, which keeps them in (0,1) for the gating
module downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rng_mod
from .neuron import LifParams, lif0_topk, lif1_dual
from .tensor import ConvSpec, Tensor, broadcast_combine, conv2d, linear, maxpool_over

DIMS = ("temporal", "channel", "spatial")


@dataclass
class AttentionWeights:
    """Per-dimension (spike mask, float weight) pairs.

    Shapes: temporal [T,1,1,1], channel [1,C,1,1], spatial [1,1,H,W];
    spike members are binary.
    """

    temporal_spike: Tensor
    temporal_float: Tensor
    channel_spike: Tensor
    channel_float: Tensor
    spatial_spike: Tensor
    spatial_float: Tensor

    def pair(self, dim: str) -> tuple[Tensor, Tensor]:
        if dim not in DIMS:
            raise ValueError(f"unknown dimension {dim!r}")
        return getattr(self, f"{dim}_spike"), getattr(self, f"{dim}_float")


@dataclass
class AttentionConfig:
    variant: str  # none | tcsa | sda
    temporal_weights: np.ndarray | None = None  # [T, T]
    temporal_bias: np.ndarray | None = None
    channel_weights: np.ndarray | None = None  # [C, C]
    channel_bias: np.ndarray | None = None
    spatial_conv: ConvSpec | None = None
    lif0_k_percent: float = 50.0
    lif1: LifParams | None = None

    def __post_init__(self):
        if self.variant not in ("none", "tcsa", "sda"):
            raise ValueError(f"variant must be none|tcsa|sda, got {self.variant!r}")
        if self.variant != "none" and self.lif1 is None:
            self.lif1 = LifParams()


def init_attention_config(
    seed: int,
    variant: str,
    t_steps: int,
    channels: int,
    spatial_kernel: int = 7,
    lif0_k_percent: float = 50.0,
    lif1: LifParams | None = None,
) -> AttentionConfig:
    """Seeded maps: FC T->T, FC C->C, and a k x k conv on the squeezed plane."""
    if variant == "none":
        return AttentionConfig(variant="none")
    trng = rng_mod.stream(seed, "attention/temporal")
    crng = rng_mod.stream(seed, "attention/channel")
    srng = rng_mod.stream(seed, "attention/spatial")
    if spatial_kernel % 2 == 0:
        raise ValueError("spatial kernel must be odd")
    spatial = ConvSpec(
        out_channels=1,
        in_channels=1,
        kernel_size=spatial_kernel,
        padding=(spatial_kernel - 1) // 2,
        weights=srng.normal(0.0, 1.0 / spatial_kernel, (1, 1, spatial_kernel, spatial_kernel)),
        bias=np.zeros(1),
    )
    return AttentionConfig(
        variant=variant,
        temporal_weights=trng.normal(0.0, 1.0 / np.sqrt(t_steps), (t_steps, t_steps)),
        temporal_bias=np.zeros(t_steps),
        channel_weights=crng.normal(0.0, 1.0 / np.sqrt(channels), (channels, channels)),
        channel_bias=np.zeros(channels),
        spatial_conv=spatial,
        lif0_k_percent=lif0_k_percent,
        lif1=lif1 or LifParams(),
    )


def _check_maps(h: Tensor, cfg: AttentionConfig) -> None:
    t, c = h.shape[0], h.shape[1]
    if cfg.temporal_weights is None or cfg.temporal_weights.shape != (t, t):
        raise ValueError(
            f"temporal map {None if cfg.temporal_weights is None else cfg.temporal_weights.shape} "
            f"does not match T={t}"
        )
    if cfg.channel_weights is None or cfg.channel_weights.shape != (c, c):
        raise ValueError(
            f"channel map {None if cfg.channel_weights is None else cfg.channel_weights.shape} "
            f"does not match C={c}"
        )
    if cfg.spatial_conv is None:
        raise ValueError("spatial conv spec missing")


def _squeeze(h: Tensor, dim: str) -> Tensor:
    pooled = {"temporal": ("c", "h", "w"), "channel": ("t", "h", "w"), "spatial": ("t", "c")}
    return maxpool_over(h, pooled[dim])


def _apply_map(squeezed: Tensor, dim: str, cfg: AttentionConfig) -> Tensor:
    """Run the dimension's learned map on a squeezed tensor, keeping its shape."""
    if dim == "temporal":
        vec = Tensor(squeezed.data.reshape(-1), binary=squeezed.binary)
        out = linear(vec, cfg.temporal_weights, cfg.temporal_bias)
        return Tensor(out.data.reshape(squeezed.shape))
    if dim == "channel":
        vec = Tensor(squeezed.data.reshape(-1), binary=squeezed.binary)
        out = linear(vec, cfg.channel_weights, cfg.channel_bias)
        return Tensor(out.data.reshape(squeezed.shape))
    plane = Tensor(squeezed.data.reshape(squeezed.shape[2:])[None, :, :], binary=squeezed.binary)
    out = conv2d(plane, cfg.spatial_conv)
    return Tensor(out.data.reshape(squeezed.shape))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _tcsa(h: Tensor, cfg: AttentionConfig) -> tuple[Tensor, dict[str, Tensor]]:
    cur, gates = h, {}
    for dim in DIMS:
        gate = Tensor(_sigmoid(_apply_map(_squeeze(cur, dim), dim, cfg).data))
        gates[dim] = gate
        cur = broadcast_combine(gate, cur, "mul")
    return cur, gates


def tcsa_apply(h: Tensor, cfg: AttentionConfig) -> Tensor:
    """Sequential float gating: temporal, then channel, then spatial."""
    if cfg.variant != "tcsa":
        raise ValueError(f"tcsa_apply requires variant 'tcsa', got {cfg.variant!r}")
    _check_maps(h, cfg)
    return _tcsa(h, cfg)[0]


def sda_dim_weights(h: Tensor, dim: str, cfg: AttentionConfig) -> tuple[Tensor, Tensor]:
    """One dimension's (spike, float) weight pair.

    Pipeline: max-squeeze -> top-k firing -> learned map (binary input, so
    accumulate-only) -> dual neuron group. The temporal branch steps the dual
    group along the squeezed T axis; channel/spatial use a single step per
    unit (time-collapsed weight shapes). Floats are sigmoids of the dual
    group's pre-reset membranes.
    """
    if cfg.variant != "sda":
        raise ValueError(f"sda_dim_weights requires variant 'sda', got {cfg.variant!r}")
    if dim not in DIMS:
        raise ValueError(f"unknown dimension {dim!r}")
    _check_maps(h, cfg)
    squeezed = _squeeze(h, dim)
    fired = lif0_topk(squeezed, cfg.lif0_k_percent)
    mapped = _apply_map(fired, dim, cfg)
    if dim == "temporal":
        seq = Tensor(mapped.data.reshape(-1, 1))  # [T, 1], stepped as a time series
    else:
        seq = Tensor(mapped.data.reshape(1, -1))  # one integration step per unit
    spikes, membranes = lif1_dual(seq, cfg.lif1)
    shape = squeezed.shape
    return (
        Tensor(spikes.data.reshape(shape), binary=True),
        Tensor(_sigmoid(membranes.data.reshape(shape))),
    )


def sda_weights(h: Tensor, cfg: AttentionConfig) -> AttentionWeights:
    ts, tf = sda_dim_weights(h, "temporal", cfg)
    cs, cf = sda_dim_weights(h, "channel", cfg)
    ss, sf = sda_dim_weights(h, "spatial", cfg)
    return AttentionWeights(ts, tf, cs, cf, ss, sf)


def sda_fuse(h: Tensor, w: AttentionWeights) -> Tensor:
    """Additive cross-dimension fusion; every product is spike-gated."""
    for dim in DIMS:
        spike, flt = w.pair(dim)
        if spike is None or flt is None:
            raise ValueError(f"attention weights incomplete for {dim}")
        if not spike.binary:
            raise ValueError(f"{dim} spike weights are not binary-flagged")
    terms = (
        (w.temporal_spike, w.spatial_spike, w.channel_float),
        (w.channel_spike, w.temporal_spike, w.spatial_float),
        (w.spatial_spike, w.channel_spike, w.temporal_float),
    )
    out = h
    for mask_a, mask_b, flt in terms:
        mask = broadcast_combine(mask_a, mask_b, "mul")  # binary AND
        term = broadcast_combine(mask, flt, "mul")  # spike-gated float
        out = broadcast_combine(out, term, "add")
    return out


def attention_forward(h: Tensor, cfg: AttentionConfig) -> tuple[Tensor, AttentionWeights | None]:
    """Dispatch on variant; returns (modulated membranes, weights when available)."""
    if cfg.variant == "none":
        return h, None
    if cfg.variant == "tcsa":
        _check_maps(h, cfg)
        cur, gates = _tcsa(h, cfg)
        ones = {d: Tensor(np.ones_like(gates[d].data), binary=True) for d in DIMS}
        weights = AttentionWeights(
            ones["temporal"], gates["temporal"],
            ones["channel"], gates["channel"],
            ones["spatial"], gates["spatial"],
        )
        return cur, weights
    weights = sda_weights(h, cfg)
    return sda_fuse(h, weights), weights
