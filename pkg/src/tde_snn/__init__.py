"""Desk-scale spiking network engine.

Modules:
    tensor     dense kernels (conv, pool, linear, batch norm, broadcast) with
               op-count instrumentation
    ledger     MUL/AC counters and the counting convention
    autodiff   tape-based reverse mode with a surrogate spike derivative
    neuron     LIF dynamics plus the top-k and dual (spike + membrane) groups
    encoder    event accumulation, direct encoding, spiking-encoder recurrence
    attention  float-gated reference attention and the spike-driven variant
    gating     batch-averaged temporal smoothing of encoder coefficients;
               full pipeline assembly
    energy     45 nm MUL/AC cost model, attention energy profiles
    diversity  firing-pattern histograms, coverage, entropy, raster export
    train      toy spiking box regressor (baseline vs enhanced encoder)
    cli        command-line entry point (`tde-snn`)
"""

from .attention import (
    AttentionConfig,
    AttentionWeights,
    attention_forward,
    init_attention_config,
    sda_dim_weights,
    sda_fuse,
    tcsa_apply,
)
from .autodiff import Tape, backward, finite_diff
from .diversity import (
    PatternHistogram,
    coverage,
    pattern_entropy,
    pattern_histogram,
    raster_export,
)
from .encoder import (
    EncoderState,
    Event,
    accumulate_events,
    baseline_encode,
    direct_encode,
    init_encoder_state,
    se_encode,
    se_features,
)
from .energy import PAPER_SHAPE, compare, energy_of, profile_attention
from .gating import (
    GateInput,
    Pipeline,
    attention_gate_update,
    build_pipeline,
    tde_forward,
    tde_forward_batch,
)
from .ledger import EnergyLedger, counting
from .neuron import LifParams, LifState, lif0_topk, lif1_dual, lif_forward, lif_step
from .tensor import (
    BatchNormParams,
    ConvSpec,
    SpikeTrain,
    Tensor,
    batchnorm,
    broadcast_combine,
    conv2d,
    linear,
    maxpool_over,
    spike_train,
    tensor,
)

__all__ = [name for name in dir() if not name.startswith("_")]
