"""Dense tensor kernels: conv, pool, linear, batch norm, broadcast arithmetic.

Tensors are row-major float64 arrays with the axis convention
[T (time), C (channels), H (height), W (width)]; lower-rank tensors drop the
leading axes (an image is [C, H, W], a vector is [n]). A tensor may be
flagged ``binary`` (spike data, values in {0, 1}), which switches the energy
accounting of multiplies from MUL to event-driven AC — see ledger.py for the
full convention. Every kernel here reports its op counts to the active
ledger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import ledger

AXIS_NAMES = ("t", "c", "h", "w")


@dataclass
class Tensor:
    """Dense array plus spike flag and optional gradient slot."""

    data: np.ndarray
    binary: bool = False
    grad: np.ndarray | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim and not self.data.flags.c_contiguous:
            self.data = np.ascontiguousarray(self.data)
        if self.data.ndim > 4:
            raise ValueError(f"rank {self.data.ndim} > 4 not supported")
        if self.binary and not _is_binary(self.data):
            raise ValueError("binary-flagged tensor has values outside {0, 1}")
        if self.grad is not None and self.grad.shape != self.data.shape:
            raise ValueError(
                f"grad shape {self.grad.shape} != data shape {self.data.shape}"
            )

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size


# SpikeTrain is a binary-flagged Tensor of shape [T, C, H, W].
SpikeTrain = Tensor


def _is_binary(a: np.ndarray) -> bool:
    return bool(np.all((a == 0.0) | (a == 1.0)))


def tensor(values, binary: bool = False) -> Tensor:
    return Tensor(np.asarray(values, dtype=np.float64), binary=binary)


def spike_train(values) -> SpikeTrain:
    """Construct a binary-flagged spike tensor, validating the {0,1} invariant."""
    return Tensor(np.asarray(values, dtype=np.float64), binary=True)


@dataclass
class ConvSpec:
    """2-D convolution parameters; weights [C_out, C_in, k, k], bias [C_out] or None."""

    out_channels: int
    in_channels: int
    kernel_size: int
    stride: int = 1
    padding: int = 0
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None

    def __post_init__(self):
        if self.kernel_size < 1:
            raise ValueError("kernel_size must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.padding < 0:
            raise ValueError("padding must be >= 0")
        expect = (self.out_channels, self.in_channels, self.kernel_size, self.kernel_size)
        if self.weights is None:
            self.weights = np.zeros(expect)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != expect:
            raise ValueError(f"weights shape {self.weights.shape} != declared {expect}")
        if self.bias is not None:
            self.bias = np.asarray(self.bias, dtype=np.float64)
            if self.bias.shape != (self.out_channels,):
                raise ValueError(
                    f"bias shape {self.bias.shape} != ({self.out_channels},)"
                )


@dataclass
class BatchNormParams:
    """Per-channel affine batch norm state."""

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = 1e-5
    momentum: float = 0.1

    @classmethod
    def identity(cls, channels: int, eps: float = 1e-5) -> "BatchNormParams":
        return cls(
            gamma=np.ones(channels),
            beta=np.zeros(channels),
            running_mean=np.zeros(channels),
            running_var=np.ones(channels),
            eps=eps,
        )


def out_extent(extent: int, k: int, stride: int, padding: int) -> int:
    span = extent + 2 * padding - k
    if span < 0 or span % stride != 0:
        raise ValueError(
            f"conv geometry invalid: extent {extent}, kernel {k}, "
            f"stride {stride}, padding {padding}"
        )
    return span // stride + 1


def conv2d_raw(
    x: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray | None,
    stride: int = 1,
    padding: int = 0,
) -> np.ndarray:
    """Direct cross-correlation of [C,H,W] with [Co,Ci,k,k] -> [Co,H',W'].

    Pure kernel, no op counting; shared by the counted conv2d and by autodiff.
    """
    c, h, w = x.shape
    co, ci, k, _ = weights.shape
    ho = out_extent(h, k, stride, padding)
    wo = out_extent(w, k, stride, padding)
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))
    win = win[:, ::stride, ::stride][:, :ho, :wo]
    out = np.einsum("chwij,ocij->ohw", win, weights, optimize=True)
    if bias is not None:
        out = out + bias[:, None, None]
    return np.ascontiguousarray(out)


def conv2d(x: Tensor, spec: ConvSpec) -> Tensor:
    """Counted convolution of a [C_in, H, W] tensor.

    Float inputs cost taps MULs per output plus the summation/bias ACs;
    binary inputs cost one AC per active spike reaching each output
    (event-driven), zero MULs.
    """
    if x.data.ndim != 3:
        raise ValueError(f"conv2d expects [C,H,W], got shape {x.shape}")
    if x.shape[0] != spec.in_channels:
        raise ValueError(
            f"input shape {x.shape} does not match weights {spec.weights.shape}: "
            f"channels {x.shape[0]} != spec.in_channels {spec.in_channels}"
        )
    out = conv2d_raw(x.data, spec.weights, spec.bias, spec.stride, spec.padding)
    n_out = out.size
    taps = spec.in_channels * spec.kernel_size**2
    if x.binary:
        active = _active_taps(x.data != 0.0, spec)
        ledger.add_ac(int(spec.out_channels * active))
    else:
        ledger.add_mul(taps * n_out)
        ledger.add_ac((taps - 1) * n_out)
    if spec.bias is not None:
        ledger.add_ac(n_out)
    return Tensor(out)


def _active_taps(mask: np.ndarray, spec: ConvSpec) -> int:
    """Total active input taps summed over all output positions (one channel)."""
    k, s, p = spec.kernel_size, spec.stride, spec.padding
    mp = np.pad(mask, ((0, 0), (p, p), (p, p)))
    win = np.lib.stride_tricks.sliding_window_view(mp, (k, k), axis=(1, 2))
    ho = out_extent(mask.shape[1], k, s, p)
    wo = out_extent(mask.shape[2], k, s, p)
    win = win[:, ::s, ::s][:, :ho, :wo]
    return int(win.sum())


def conv2d_time(x: Tensor, spec: ConvSpec) -> Tensor:
    """Apply one conv spec to every time slice of a [T, C, H, W] tensor."""
    if x.data.ndim != 4:
        raise ValueError(f"conv2d_time expects [T,C,H,W], got shape {x.shape}")
    slices = [conv2d(Tensor(x.data[t], binary=x.binary), spec).data for t in range(x.shape[0])]
    return Tensor(np.stack(slices))


def maxpool_over(x: Tensor, dims: Iterable[str]) -> Tensor:
    """Collapse the named axes of a [T,C,H,W] tensor to extent 1 by maximum.

    Comparisons are free under the counting convention.
    """
    dims = list(dims)
    if not dims:
        raise ValueError("dims must be nonempty")
    if x.size == 0:
        raise ValueError("cannot pool an empty tensor")
    if x.data.ndim != 4:
        raise ValueError(f"maxpool_over expects [T,C,H,W], got shape {x.shape}")
    axes = []
    for d in dims:
        if d not in AXIS_NAMES:
            raise ValueError(f"unknown axis name {d!r}; expected one of {AXIS_NAMES}")
        axes.append(AXIS_NAMES.index(d))
    out = x.data.max(axis=tuple(set(axes)), keepdims=True)
    return Tensor(out, binary=x.binary)


def batchnorm(
    x: Tensor,
    params: BatchNormParams,
    training: bool = False,
) -> Tensor:
    """Per-channel batch normalization with affine output.

    Training mode normalizes by batch statistics and folds them into the
    running stats (in place, scaled by momentum); eval mode uses the running
    stats. Channel axis is 0 for [C,H,W] input, 1 for [T,C,H,W].
    """
    if params.eps <= 0:
        raise ValueError("eps must be > 0")
    if x.data.ndim not in (3, 4):
        raise ValueError(f"batchnorm expects rank 3 or 4, got shape {x.shape}")
    c_axis = x.data.ndim - 3
    channels = x.shape[c_axis]
    for name in ("gamma", "beta", "running_mean", "running_var"):
        arr = getattr(params, name)
        if arr.shape != (channels,):
            raise ValueError(f"{name} length {arr.shape} != channel count {channels}")
    reduce_axes = tuple(i for i in range(x.data.ndim) if i != c_axis)
    if training:
        mean = x.data.mean(axis=reduce_axes)
        var = x.data.var(axis=reduce_axes)
        params.running_mean += params.momentum * (mean - params.running_mean)
        params.running_var += params.momentum * (var - params.running_var)
    else:
        mean, var = params.running_mean, params.running_var
    shape = [1] * x.data.ndim
    shape[c_axis] = channels
    scale = (params.gamma / np.sqrt(var + params.eps)).reshape(shape)
    shift = (params.beta - mean * params.gamma / np.sqrt(var + params.eps)).reshape(shape)
    out = x.data * scale + shift
    # fused scale+shift: one MUL and one AC per element
    ledger.add_mul(x.size)
    ledger.add_ac(x.size)
    return Tensor(out)


def broadcast_combine(a: Tensor, b: Tensor, op: str) -> Tensor:
    """Elementwise mul/add at the broadcast shape of the operands.

    mul with any binary operand is spike-gated: ACs only where every binary
    operand is active, and the result stays binary iff both operands are.
    """
    try:
        out_shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ValueError(f"shapes {a.shape} and {b.shape} do not broadcast") from None
    n_out = int(np.prod(out_shape)) if out_shape else 1
    if op == "add":
        ledger.add_ac(n_out)
        return Tensor(a.data + b.data)
    if op != "mul":
        raise ValueError(f"op must be 'mul' or 'add', got {op!r}")
    out = a.data * b.data
    if a.binary or b.binary:
        gate = np.ones(out_shape, dtype=bool)
        if a.binary:
            gate &= np.broadcast_to(a.data != 0.0, out_shape)
        if b.binary:
            gate &= np.broadcast_to(b.data != 0.0, out_shape)
        ledger.add_ac(int(gate.sum()))
        return Tensor(out, binary=a.binary and b.binary)
    ledger.add_mul(n_out)
    return Tensor(out)


def linear(x: Tensor, weights: np.ndarray, bias: np.ndarray | None = None) -> Tensor:
    """Counted fully-connected map of a 1-D tensor: y = W @ x (+ b)."""
    if x.data.ndim != 1:
        raise ValueError(f"linear expects a vector, got shape {x.shape}")
    weights = np.asarray(weights, dtype=np.float64)
    m, n = weights.shape
    if n != x.size:
        raise ValueError(f"weights shape {weights.shape} incompatible with input {x.shape}")
    out = weights @ x.data
    if x.binary:
        active = int(np.count_nonzero(x.data))
        ledger.add_ac(m * active)
    else:
        ledger.add_mul(m * n)
        ledger.add_ac(m * (n - 1))
    if bias is not None:
        out = out + bias
        ledger.add_ac(m)
    return Tensor(out)


def scale_combine(coeff: float, x: Tensor, coeff2: float, y: Tensor) -> Tensor:
    """coeff*x + coeff2*y elementwise (shared shape); 2 MULs + 1 AC per element."""
    if x.shape != y.shape:
        raise ValueError(f"shapes {x.shape} and {y.shape} differ")
    out = coeff * x.data + coeff2 * y.data
    ledger.add_mul(2 * x.size)
    ledger.add_ac(x.size)
    return Tensor(out)
