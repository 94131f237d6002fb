"""Leaky integrate-and-fire dynamics and the two attention neuron groups.

Per step: H = V_prev + X (integrate), S = step(H - v_th) with step(0) = 1
(fire exactly at threshold), V' = beta * (H - v_th * S) (soft reset, leak).
Membrane updates are neuron-internal and not ledger-counted.

The attention groups differ from the plain neuron: the top-k group drops the
threshold and fires the most stimulated k percent of units; the dual group
fires by threshold but also exposes its pre-reset membrane H as a float
signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import SpikeTrain, Tensor


@dataclass
class LifParams:
    v_th: float = 1.0
    beta: float = 0.5
    surrogate_alpha: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if self.v_th <= 0:
            raise ValueError(f"v_th must be > 0, got {self.v_th}")


@dataclass
class LifState:
    """Membrane potentials of one neuron population."""

    v: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=np.float64)
        if not np.all(np.isfinite(self.v)):
            raise ValueError("membrane potentials must be finite")


def lif_step(state: LifState, x: Tensor, p: LifParams) -> tuple[Tensor, LifState]:
    """One integrate-fire-reset step; returns (binary spikes, next state)."""
    if x.shape != state.v.shape:
        raise ValueError(f"input shape {x.shape} != state shape {state.v.shape}")
    if not np.all(np.isfinite(x.data)):
        raise ValueError("non-finite input current")
    h = state.v + x.data
    s = (h >= p.v_th).astype(np.float64)
    v_next = p.beta * (h - p.v_th * s)
    return Tensor(s, binary=True), LifState(v_next)


def _fold(inputs: Tensor, p: LifParams, v0: np.ndarray | None):
    if inputs.data.ndim < 1 or inputs.shape[0] < 1:
        raise ValueError("need at least one time step")
    step_shape = inputs.data.shape[1:]
    state = LifState(np.zeros(step_shape) if v0 is None else v0)
    spikes, membranes = [], []
    for t in range(inputs.shape[0]):
        h = state.v + inputs.data[t]
        membranes.append(h)
        s, state = lif_step(state, Tensor(inputs.data[t]), p)
        spikes.append(s.data)
    return np.stack(spikes), np.stack(membranes)


def lif_forward(inputs: Tensor, p: LifParams, v0: np.ndarray | None = None) -> SpikeTrain:
    """Fold lif_step over the leading time axis, starting from v0 (zeros)."""
    spikes, _ = _fold(inputs, p, v0)
    return Tensor(spikes, binary=True)


def lif1_dual(inputs: Tensor, p: LifParams, v0: np.ndarray | None = None) -> tuple[SpikeTrain, Tensor]:
    """Threshold-firing group that also exposes pre-reset membranes H_t."""
    spikes, membranes = _fold(inputs, p, v0)
    return Tensor(spikes, binary=True), Tensor(membranes)


def lif0_topk(x: Tensor, k_percent: float) -> Tensor:
    """Fire exactly ceil(k% * N) units, the largest by value; no threshold.

    Ties break toward the lowest flat index. Selection is comparison-only and
    costs nothing on the ledger.
    """
    if not 0.0 < k_percent <= 100.0:
        raise ValueError(f"k_percent must be in (0, 100], got {k_percent}")
    if x.size == 0:
        raise ValueError("cannot select from an empty tensor")
    flat = x.data.ravel()
    n_fire = math.ceil(k_percent * flat.size / 100.0)
    order = np.argsort(-flat, kind="stable")
    mask = np.zeros(flat.size)
    mask[order[:n_fire]] = 1.0
    return Tensor(mask.reshape(x.shape), binary=True)
