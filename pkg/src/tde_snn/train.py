"""Toy spiking box regressor, trained once per variant on synthetic images.

The task: predict the normalized (cx, cy, w, h) of a single bright rectangle
in a noisy image, through a three-layer spiking conv net (stem Conv-BN ->
encoder -> LIF -> body conv -> LIF -> readout), with smooth-L1 loss. The
"baseline" variant feeds the stem feature identically at every step; the
"tde" variant evolves it with the per-step recurrence, modulates the body
membranes with spike-driven attention and updates the encoder coefficients
from the batch-averaged temporal weights after every step.

Spiking mode trains with the straight-through surrogate; top-k masks are
frozen during backprop. Everything is seeded through labeled streams.

Also hosts the gradient-check harness: a relaxed-mode two-layer conv+LIF
network whose tape gradients are compared against central finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import rng as rng_mod
from .gating import GateInput, attention_gate_update
from .neuron import lif0_topk
from .tensor import Tensor


def make_box_image(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """One [1, size, size] image with a bright rectangle; target is (cx, cy, w, h)/size."""
    w = rng.uniform(0.2, 0.45) * size
    h = rng.uniform(0.2, 0.45) * size
    cx = rng.uniform(w / 2 + 0.5, size - w / 2 - 0.5)
    cy = rng.uniform(h / 2 + 0.5, size - h / 2 - 0.5)
    img = rng.normal(0.0, 0.1, (1, size, size))
    x0, x1 = int(round(cx - w / 2)), int(round(cx + w / 2))
    y0, y1 = int(round(cy - h / 2)), int(round(cy + h / 2))
    img[0, y0:y1, x0:x1] += 1.0
    target = np.array([cx, cy, w, h]) / size
    return img, target


def _init_params(seed: int, channels: int, t_steps: int, variant: str) -> dict[str, np.ndarray]:
    k = 3

    def conv_init(label, c_out, c_in):
        r = rng_mod.stream(seed, label)
        return r.normal(0.0, 1.0 / np.sqrt(c_in * k * k), (c_out, c_in, k, k))

    params = {
        "stem_w": conv_init("toy/stem", channels, 1),
        "stem_b": np.zeros(channels),
        "bn_gamma": np.ones(channels),
        "bn_beta": np.zeros(channels),
        "body_w": conv_init("toy/body", channels, channels),
        "body_b": np.zeros(channels),
        "readout_w": rng_mod.stream(seed, "toy/readout").normal(
            0.0, 1.0 / np.sqrt(channels), (4, channels)
        ),
        "readout_b": np.zeros(4),
    }
    if variant == "tde":
        for t in range(1, t_steps + 1):
            params[f"step{t}_w"] = conv_init(f"toy/step{t}", channels, channels)
            params[f"step{t}_b"] = np.zeros(channels)
        trng = rng_mod.stream(seed, "toy/att_temporal")
        params["att_t_w"] = trng.normal(0.0, 1.0 / np.sqrt(t_steps), (t_steps, t_steps))
        params["att_t_b"] = np.zeros(t_steps)
        crng = rng_mod.stream(seed, "toy/att_channel")
        params["att_c_w"] = crng.normal(0.0, 1.0 / np.sqrt(channels), (channels, channels))
        params["att_c_b"] = np.zeros(channels)
        srng = rng_mod.stream(seed, "toy/att_spatial")
        params["att_s_w"] = srng.normal(0.0, 1.0 / 7.0, (1, 1, 7, 7))
        params["att_s_b"] = np.zeros(1)
    return params


def _lif_unroll(drives: list[ad.Var], v_th: float, beta: float, alpha: float, mode: str):
    """LIF recurrence over a list of per-step drive Vars; returns (spikes, membranes)."""
    v = None
    spikes, membranes = [], []
    for drive in drives:
        h = drive if v is None else ad.add(v, drive)
        s = ad.spike(h, v_th, alpha, mode)
        membranes.append(h)
        spikes.append(s)
        v = ad.scalar_mul(ad.sub(h, ad.scalar_mul(s, v_th)), beta)
    return spikes, membranes


def _sda_attention(tape, h_stack: ad.Var, leaves, k_percent, v_th, beta, alpha, mode):
    """Spike-driven attention on stacked membranes [T,C,H,W], inside the tape.

    Top-k masks are constants (straight-through); float weights are sigmoids
    of the dual group's membranes, differentiable w.r.t. the map parameters.
    """
    t_steps, channels = h_stack.shape[0], h_stack.shape[1]
    hh, ww = h_stack.shape[2], h_stack.shape[3]
    pairs = {}
    for dim, pooled in (
        ("temporal", ("c", "h", "w")),
        ("channel", ("t", "h", "w")),
        ("spatial", ("t", "c")),
    ):
        squeezed = ad.maxpool_over(h_stack, pooled)
        mask = lif0_topk(Tensor(squeezed.data), k_percent).data
        if dim == "temporal":
            mvec = tape.const(mask.reshape(-1))
            mapped = ad.linear(mvec, leaves["att_t_w"], leaves["att_t_b"])
            steps = [ad.reshape(ad.take(mapped, t), (1,)) for t in range(t_steps)]
            s_list, m_list = _lif_unroll(steps, v_th, beta, alpha, mode)
            s = ad.reshape(ad.stack(s_list), (t_steps, 1, 1, 1))
            m = ad.reshape(ad.stack(m_list), (t_steps, 1, 1, 1))
        elif dim == "channel":
            mvec = tape.const(mask.reshape(-1))
            mapped = ad.linear(mvec, leaves["att_c_w"], leaves["att_c_b"])
            s = ad.reshape(ad.spike(mapped, v_th, alpha, mode), (1, channels, 1, 1))
            m = ad.reshape(mapped, (1, channels, 1, 1))
        else:
            mplane = tape.const(mask.reshape(1, hh, ww))
            mapped = ad.conv2d(mplane, leaves["att_s_w"], leaves["att_s_b"], padding=3)
            s = ad.reshape(ad.spike(mapped, v_th, alpha, mode), (1, 1, hh, ww))
            m = ad.reshape(mapped, (1, 1, hh, ww))
        pairs[dim] = (s, ad.sigmoid(m))
    ts, tf = pairs["temporal"]
    cs, cf = pairs["channel"]
    ss, sf = pairs["spatial"]
    out = h_stack
    for mask_a, mask_b, flt in ((ts, ss, cf), (cs, ts, sf), (ss, cs, tf)):
        out = ad.add(out, ad.mul(ad.mul(mask_a, mask_b), flt))
    return out, tf


def _forward(tape, leaves, image, target, variant, alpha_list, cfg):
    """One sample's loss Var; also returns the temporal float values (tde)."""
    t_steps, v_th, beta, salpha, mode = (
        cfg["t_steps"],
        cfg["v_th"],
        cfg["beta"],
        cfg["surrogate_alpha"],
        cfg["mode"],
    )
    x = tape.const(image)
    stem = ad.conv2d(x, leaves["stem_w"], leaves["stem_b"], padding=1)
    feat = ad.batchnorm_eval(
        stem, leaves["bn_gamma"], leaves["bn_beta"],
        np.zeros(stem.shape[0]), np.ones(stem.shape[0]), 1e-5,
    )
    if variant == "baseline":
        drives = [feat] * t_steps
    else:
        drives, prev = [], feat
        for t in range(1, t_steps + 1):
            evolved = ad.conv2d(prev, leaves[f"step{t}_w"], leaves[f"step{t}_b"], padding=1)
            a = alpha_list[t - 1]
            cur = ad.add(ad.scalar_mul(feat, a), ad.scalar_mul(evolved, 1.0 - a))
            drives.append(cur)
            prev = cur
    enc_spikes, _ = _lif_unroll(drives, v_th, beta, salpha, mode)
    body = [ad.conv2d(s, leaves["body_w"], leaves["body_b"], padding=1) for s in enc_spikes]
    _, membranes = _lif_unroll(body, v_th, beta, salpha, mode)
    h_stack = ad.stack(membranes)
    g_temp = None
    if variant == "tde":
        h_stack, tf = _sda_attention(
            tape, h_stack, leaves, cfg["lif0_k_percent"], v_th, beta, salpha, mode
        )
        g_temp = tf.data.reshape(-1)
    pooled = ad.sum_axes(h_stack, (0, 2, 3))
    n = t_steps * h_stack.shape[2] * h_stack.shape[3]
    readout = ad.reshape(ad.scalar_mul(pooled, 1.0 / n), (h_stack.shape[1],))
    pred = ad.sigmoid(ad.linear(readout, leaves["readout_w"], leaves["readout_b"]))
    return ad.smooth_l1_mean(pred, target), g_temp


@dataclass
class Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            mhat = self.m[name] / (1 - self.beta1**self.t)
            vhat = self.v[name] / (1 - self.beta2**self.t)
            params[name] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def train_variant(
    variant: str,
    seed: int = 42,
    steps: int = 200,
    batch_size: int = 8,
    lr: float = 0.02,
    image_size: int = 16,
    channels: int = 6,
    t_steps: int = 4,
    mode: str = "spiking",
) -> list[float]:
    """Train one variant; returns the per-step mean loss curve."""
    if variant not in ("baseline", "tde"):
        raise ValueError(f"variant must be baseline or tde, got {variant!r}")
    cfg = {
        "t_steps": t_steps,
        "v_th": 1.0,
        "beta": 0.5,
        "surrogate_alpha": 2.0,
        "mode": mode,
        "lif0_k_percent": 50.0,
    }
    params = _init_params(seed, channels, t_steps, variant)
    opt = Adam(lr=lr)
    data_rng = rng_mod.stream(seed, "toy/data")
    alpha_list = [0.5] * t_steps
    alpha_bar = [0.5] * t_steps
    curve = []
    if steps == 0:
        img, tgt = make_box_image(data_rng, image_size)
        tape = ad.Tape()
        leaves = {k: tape.leaf(v) for k, v in params.items()}
        loss, _ = _forward(tape, leaves, img, tgt, variant, alpha_list, cfg)
        return [float(loss.data)]
    for _ in range(steps):
        batch_losses, grad_sum, g_floats = [], {}, []
        for _ in range(batch_size):
            img, tgt = make_box_image(data_rng, image_size)
            tape = ad.Tape()
            leaves = {k: tape.leaf(v) for k, v in params.items()}
            loss, g_temp = _forward(tape, leaves, img, tgt, variant, alpha_list, cfg)
            grads = ad.backward(tape, loss)
            for name, leaf in leaves.items():
                g = ad.grad_of(grads, leaf)
                grad_sum[name] = grad_sum.get(name, 0.0) + g
            batch_losses.append(float(loss.data))
            if g_temp is not None:
                g_floats.append(g_temp)
        mean_grads = {k: v / batch_size for k, v in grad_sum.items()}
        opt.step(params, mean_grads)
        if variant == "tde" and g_floats:
            g = np.stack(g_floats, axis=1)
            alpha_list = attention_gate_update(GateInput(g, alpha_bar))
        curve.append(float(np.mean(batch_losses)))
    return curve


def loss_curves_csv(curves: dict[str, list[float]]) -> str:
    lines = ["step,variant,loss"]
    for variant in sorted(curves):
        for i, loss in enumerate(curves[variant]):
            lines.append(f"{i},{variant},{loss!r}")
    return "\n".join(lines) + "\n"


def gradient_check(seed: int = 0, h: float = 1e-4, t_steps: int = 3) -> float:
    """Max relative error of tape gradients vs finite differences.

    Builds a two-layer conv+LIF net in relaxed mode on a 4x4 input; checks
    the gradient of every leaf (input, both conv kernels and biases).
    """
    rng = rng_mod.stream(seed, "gradcheck")
    x0 = rng.normal(0.0, 1.0, (1, 4, 4))
    w1 = rng.normal(0.0, 0.5, (2, 1, 3, 3))
    b1 = rng.normal(0.0, 0.1, 2)
    w2 = rng.normal(0.0, 0.5, (1, 2, 3, 3))
    b2 = rng.normal(0.0, 0.1, 1)
    leaf_values = {"x": x0, "w1": w1, "b1": b1, "w2": w2, "b2": b2}

    def run(values: dict[str, np.ndarray]):
        tape = ad.Tape()
        leaves = {k: tape.leaf(v) for k, v in values.items()}
        drive = ad.conv2d(leaves["x"], leaves["w1"], leaves["b1"], padding=1)
        s1, _ = _lif_unroll([drive] * t_steps, 1.0, 0.5, 2.0, "relaxed")
        body = [ad.conv2d(s, leaves["w2"], leaves["b2"], padding=1) for s in s1]
        s2, m2 = _lif_unroll(body, 1.0, 0.5, 2.0, "relaxed")
        total = ad.sum_all(ad.stack([ad.add(a, b) for a, b in zip(s2, m2)]))
        return tape, leaves, total

    tape, leaves, loss = run(leaf_values)
    grads = ad.backward(tape, loss)
    worst = 0.0
    for name, value in leaf_values.items():
        analytic = ad.grad_of(grads, leaves[name])

        def f(v, _name=name):
            trial = dict(leaf_values)
            trial[_name] = v
            _, _, out = run(trial)
            return float(out.data)

        numeric = ad.finite_diff(f, value.copy(), h=h)
        scale = max(float(np.max(np.abs(numeric))), 1e-8)
        err = float(np.max(np.abs(analytic - numeric))) / scale
        worst = max(worst, err)
    return worst
