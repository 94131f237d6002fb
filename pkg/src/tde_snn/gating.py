"""Attention gating: temporal attention floats become encoder coefficients.

Per batch, the temporal float weights are averaged over samples and blended
halfway with the carried value:

    ahat_t  = mean_b g_float[t, b]
    alpha_t = abar_t + (ahat_t - abar_t) / 2        (== (abar_t + ahat_t)/2)
    abar_t  = alpha_t

The incremental form keeps |alpha - ahat| == |abar - ahat| / 2 exact in
floats. Updates happen once per batch, after the forward pass, so they steer
the *next* batch's encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attention import AttentionConfig, AttentionWeights, attention_forward
from .diversity import PatternHistogram, pattern_histogram
from .encoder import EncoderState, baseline_encode, se_encode
from .ledger import EnergyLedger, counting
from .neuron import LifParams, lif1_dual
from .tensor import ConvSpec, SpikeTrain, Tensor, conv2d_time
from . import rng as rng_mod


@dataclass
class GateInput:
    """Per-sample temporal attention floats [T, B] plus the carried coefficients."""

    g_float: np.ndarray
    alpha_bar: list[float]

    def __post_init__(self):
        self.g_float = np.asarray(self.g_float, dtype=np.float64)
        if self.g_float.ndim != 2:
            raise ValueError(f"g_float must be [T, B], got shape {self.g_float.shape}")
        if self.g_float.shape[1] < 1:
            raise ValueError("batch size must be >= 1")
        if self.g_float.shape[0] != len(self.alpha_bar):
            raise ValueError(
                f"g_float has T={self.g_float.shape[0]} but alpha_bar has "
                f"{len(self.alpha_bar)} entries"
            )
        if np.any(self.g_float < 0.0) or np.any(self.g_float > 1.0):
            raise ValueError("attention floats must lie in [0, 1]")


def attention_gate_update(gate_in: GateInput) -> list[float]:
    """Blend batch-mean attention into the carried coefficients (mutates alpha_bar)."""
    ahat = gate_in.g_float.mean(axis=1)
    alpha = []
    for t, a_hat in enumerate(ahat):
        a_new = a_hat + 0.5 * (gate_in.alpha_bar[t] - a_hat)
        gate_in.alpha_bar[t] = a_new
        alpha.append(float(a_new))
    return alpha


@dataclass
class TdeDiagnostics:
    ledger: EnergyLedger
    alpha: list[float]
    g_temporal_float: np.ndarray | None
    h_membrane: Tensor
    h_attended: Tensor
    body_spikes: SpikeTrain
    encoder_histogram: PatternHistogram
    weights: AttentionWeights | None


def tde_forward(
    image: Tensor,
    enc: EncoderState,
    att: AttentionConfig,
    p: LifParams,
    train: bool,
    body: ConvSpec,
    ledger: EnergyLedger | None = None,
) -> tuple[SpikeTrain, TdeDiagnostics]:
    """One sample through encoder -> body layer -> attention (-> gate update).

    Returns the first-layer spike train (the pattern-analysis target) and
    diagnostics carrying the modulated membranes, ledger and alpha snapshot.
    With train=True and an attention variant that produces temporal floats,
    the gate update runs with B=1 and rewrites enc.alpha for the next call.
    """
    led = ledger if ledger is not None else EnergyLedger()
    with counting(led, "encoder"):
        spikes = se_encode(image, enc, p)
    with counting(led, "body"):
        drive = conv2d_time(spikes, body)
        body_spikes, h_mem = lif1_dual(drive, p)
    with counting(led, "attention"):
        h_att, weights = attention_forward(h_mem, att)
    g_temp = None
    if weights is not None:
        g_temp = weights.temporal_float.data.reshape(-1)
    if train and g_temp is not None:
        enc.alpha = attention_gate_update(GateInput(g_temp[:, None], enc.alpha_bar))
    diag = TdeDiagnostics(
        ledger=led,
        alpha=list(enc.alpha),
        g_temporal_float=g_temp,
        h_membrane=h_mem,
        h_attended=h_att,
        body_spikes=body_spikes,
        encoder_histogram=pattern_histogram(spikes),
        weights=weights,
    )
    return spikes, diag


def tde_forward_batch(
    images: list[Tensor],
    enc: EncoderState,
    att: AttentionConfig,
    p: LifParams,
    train: bool,
    body: ConvSpec,
    ledger: EnergyLedger | None = None,
) -> list[tuple[SpikeTrain, TdeDiagnostics]]:
    """Run a batch read-only, then apply one gate update from the stacked floats."""
    results = [
        tde_forward(img, enc, att, p, train=False, body=body, ledger=ledger)
        for img in images
    ]
    floats = [d.g_temporal_float for _, d in results]
    if train and all(f is not None for f in floats) and floats:
        g = np.stack(floats, axis=1)
        enc.alpha = attention_gate_update(GateInput(g, enc.alpha_bar))
    return results


@dataclass
class Pipeline:
    """Seeded bundle of encoder, body layer and attention configs."""

    enc: EncoderState
    att: AttentionConfig
    body: ConvSpec
    params: LifParams = field(default_factory=LifParams)

    def forward(self, image: Tensor, train: bool = False, ledger: EnergyLedger | None = None):
        return tde_forward(image, self.enc, self.att, self.params, train, self.body, ledger)

    def baseline(self, image: Tensor) -> SpikeTrain:
        return baseline_encode(image, self.enc, self.params)


def build_pipeline(
    seed: int,
    in_channels: int,
    channels: int,
    t_steps: int,
    variant: str,
    encoder_kernel: int = 3,
    per_step_weights: bool = True,
    alpha_init: float = 0.5,
    spatial_kernel: int = 7,
    lif0_k_percent: float = 50.0,
    params: LifParams | None = None,
) -> Pipeline:
    from .attention import init_attention_config
    from .encoder import init_encoder_state

    params = params or LifParams()
    enc = init_encoder_state(
        seed,
        in_channels,
        channels,
        t_steps,
        kernel_size=encoder_kernel,
        per_step_weights=per_step_weights,
        alpha_init=alpha_init,
    )
    brng = rng_mod.stream(seed, "body")
    k = 3
    body = ConvSpec(
        out_channels=channels,
        in_channels=channels,
        kernel_size=k,
        padding=1,
        weights=brng.normal(0.0, 1.0 / np.sqrt(channels * k * k), (channels, channels, k, k)),
        bias=np.zeros(channels),
    )
    att = init_attention_config(
        seed,
        variant,
        t_steps,
        channels,
        spatial_kernel=spatial_kernel,
        lif0_k_percent=lif0_k_percent,
        lif1=params,
    )
    return Pipeline(enc=enc, att=att, body=body, params=params)
