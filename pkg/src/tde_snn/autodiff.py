"""Minimal reverse-mode differentiation over the tensor kernels.

A Tape records primitive applications in execution order; backward() walks it
in reverse and accumulates vector-Jacobian products into every leaf. The
spike nonlinearity is non-differentiable, so its backward uses the smooth
arctangent surrogate sigma(u) = 1/2 + atan(pi*alpha*u/2)/pi:

* mode "spiking": hard step forward, sigma' backward (straight-through);
* mode "relaxed": sigma forward and sigma' backward, so central finite
  differences are a valid oracle for the whole graph.

Ops recorded here are not energy-counted; the ledger instruments the
simulation path, not training.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import AXIS_NAMES, conv2d_raw, out_extent


class Var:
    """A node value on a tape. Leaves receive gradients from backward()."""

    __slots__ = ("data", "tape", "is_leaf")

    def __init__(self, data: np.ndarray, tape: "Tape", is_leaf: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.tape = tape
        self.is_leaf = is_leaf

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


@dataclass
class Node:
    op: str
    inputs: tuple
    output: Var
    backward_fn: object  # grad_out -> tuple of grads aligned with inputs


@dataclass
class Tape:
    nodes: list = field(default_factory=list)
    leaves: list = field(default_factory=list)

    def leaf(self, data) -> Var:
        v = Var(np.asarray(data, dtype=np.float64), self, is_leaf=True)
        self.leaves.append(v)
        return v

    def const(self, data) -> Var:
        """A value outside the gradient path (e.g. a frozen spike mask)."""
        return Var(np.asarray(data, dtype=np.float64), self, is_leaf=False)

    def record(self, op: str, inputs, out_data, backward_fn) -> Var:
        out = Var(out_data, self)
        self.nodes.append(Node(op, tuple(inputs), out, backward_fn))
        return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and grad.shape[i] != 1:
            grad = grad.sum(axis=i, keepdims=True)
    return grad


def add(a: Var, b: Var) -> Var:
    def bwd(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return a.tape.record("add", (a, b), a.data + b.data, bwd)


def sub(a: Var, b: Var) -> Var:
    def bwd(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return a.tape.record("sub", (a, b), a.data - b.data, bwd)


def mul(a: Var, b: Var) -> Var:
    def bwd(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return a.tape.record("mul", (a, b), a.data * b.data, bwd)


def scalar_mul(a: Var, c: float) -> Var:
    return a.tape.record("scalar_mul", (a,), c * a.data, lambda g: (c * g,))


def add_scalar(a: Var, c: float) -> Var:
    return a.tape.record("add_scalar", (a,), a.data + c, lambda g: (g,))


def stack(vs: list[Var]) -> Var:
    def bwd(g):
        return tuple(g[t] for t in range(len(vs)))

    return vs[0].tape.record("stack", tuple(vs), np.stack([v.data for v in vs]), bwd)


def take(a: Var, t: int) -> Var:
    """Select index t along axis 0."""

    def bwd(g):
        full = np.zeros_like(a.data)
        full[t] = g
        return (full,)

    return a.tape.record("take", (a,), a.data[t], bwd)


def reshape(a: Var, shape: tuple[int, ...]) -> Var:
    old = a.shape

    def bwd(g):
        return (g.reshape(old),)

    return a.tape.record("reshape", (a,), a.data.reshape(shape), bwd)


def sum_axes(a: Var, axes: tuple[int, ...]) -> Var:
    def bwd(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return a.tape.record("sum_axes", (a,), a.data.sum(axis=axes, keepdims=True), bwd)


def sum_all(a: Var) -> Var:
    def bwd(g):
        return (np.full(a.shape, float(g)),)

    return a.tape.record("sum_all", (a,), np.asarray(a.data.sum()), bwd)


def mean_all(a: Var) -> Var:
    n = a.data.size

    def bwd(g):
        return (np.full(a.shape, float(g) / n),)

    return a.tape.record("mean_all", (a,), np.asarray(a.data.mean()), bwd)


def sigmoid(a: Var) -> Var:
    y = 1.0 / (1.0 + np.exp(-a.data))

    def bwd(g):
        return (g * y * (1.0 - y),)

    return a.tape.record("sigmoid", (a,), y, bwd)


def surrogate_forward(u: np.ndarray, alpha: float) -> np.ndarray:
    return 0.5 + np.arctan(np.pi * alpha * u / 2.0) / np.pi


def surrogate_grad(u: np.ndarray, alpha: float) -> np.ndarray:
    return (alpha / 2.0) / (1.0 + (np.pi * alpha * u / 2.0) ** 2)


def spike(a: Var, v_th: float, alpha: float, mode: str) -> Var:
    """Spike nonlinearity on membrane a: fires where a >= v_th."""
    u = a.data - v_th
    if mode == "spiking":
        out = (u >= 0.0).astype(np.float64)
    elif mode == "relaxed":
        out = surrogate_forward(u, alpha)
    else:
        raise ValueError(f"mode must be 'spiking' or 'relaxed', got {mode!r}")

    def bwd(g):
        return (g * surrogate_grad(u, alpha),)

    return a.tape.record("spike", (a,), out, bwd)


def linear(x: Var, w: Var, b: Var | None = None) -> Var:
    out = w.data @ x.data
    if b is not None:
        out = out + b.data

    def bwd(g):
        gx = w.data.T @ g
        gw = np.outer(g, x.data)
        if b is None:
            return gx, gw
        return gx, gw, g

    inputs = (x, w) if b is None else (x, w, b)
    return x.tape.record("linear", inputs, out, bwd)


def conv2d(x: Var, w: Var, b: Var | None = None, stride: int = 1, padding: int = 0) -> Var:
    out = conv2d_raw(x.data, w.data, b.data if b is not None else None, stride, padding)
    c, h, ww = x.shape
    co, ci, k, _ = w.shape
    ho = out_extent(h, k, stride, padding)
    wo = out_extent(ww, k, stride, padding)

    def bwd(g):
        xp = np.pad(x.data, ((0, 0), (padding, padding), (padding, padding)))
        win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))
        win = win[:, ::stride, ::stride][:, :ho, :wo]
        gw = np.einsum("ohw,chwij->ocij", g, win, optimize=True)
        gxp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                patch = np.einsum("ohw,oc->chw", g, w.data[:, :, i, j], optimize=True)
                gxp[:, i : i + ho * stride : stride, j : j + wo * stride : stride] += patch
        gx = gxp[:, padding : padding + h, padding : padding + ww]
        if b is None:
            return gx, gw
        return gx, gw, g.sum(axis=(1, 2))

    inputs = (x, w) if b is None else (x, w, b)
    return x.tape.record("conv2d", inputs, out, bwd)


def batchnorm_eval(x: Var, gamma: Var, beta: Var, running_mean, running_var, eps: float) -> Var:
    if eps <= 0:
        raise ValueError("eps must be > 0")
    c_axis = x.data.ndim - 3
    shape = [1] * x.data.ndim
    shape[c_axis] = x.shape[c_axis]
    inv = 1.0 / np.sqrt(np.asarray(running_var) + eps)
    xhat = (x.data - np.asarray(running_mean).reshape(shape)) * inv.reshape(shape)
    out = gamma.data.reshape(shape) * xhat + beta.data.reshape(shape)
    reduce_axes = tuple(i for i in range(x.data.ndim) if i != c_axis)

    def bwd(g):
        gx = g * (gamma.data * inv).reshape(shape)
        ggamma = (g * xhat).sum(axis=reduce_axes)
        gbeta = g.sum(axis=reduce_axes)
        return gx, ggamma, gbeta

    return x.tape.record("batchnorm_eval", (x, gamma, beta), out, bwd)


def maxpool_over(x: Var, dims) -> Var:
    """Max over named axes of a [T,C,H,W] Var; subgradient to the first argmax."""
    axes = sorted(AXIS_NAMES.index(d) for d in dims)
    kept = [i for i in range(4) if i not in axes]
    perm = kept + axes
    kept_shape = tuple(x.shape[i] for i in kept)
    xt = x.data.transpose(perm).reshape(kept_shape + (-1,))
    out = x.data.max(axis=tuple(axes), keepdims=True)

    def bwd(g):
        idx = np.argmax(xt, axis=-1)
        gt = np.zeros_like(xt)
        np.put_along_axis(gt, idx[..., None], g.reshape(kept_shape + (1,)), -1)
        full = gt.reshape(tuple(x.shape[i] for i in perm))
        inv = np.argsort(perm)
        return (full.transpose(inv),)

    return x.tape.record("maxpool", (x,), out, bwd)


def smooth_l1_mean(pred: Var, target: np.ndarray) -> Var:
    """Mean smooth-L1 (Huber, delta=1) loss against a constant target."""
    d = pred.data - np.asarray(target)
    small = np.abs(d) < 1.0
    loss = np.where(small, 0.5 * d * d, np.abs(d) - 0.5).mean()

    def bwd(g):
        return (float(g) * np.where(small, d, np.sign(d)) / d.size,)

    return pred.tape.record("smooth_l1", (pred,), np.asarray(loss), bwd)


def backward(tape: Tape, loss: Var) -> dict[int, np.ndarray]:
    """Gradients of a scalar loss w.r.t. every leaf, keyed by id(leaf)."""
    if loss.data.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        g = grads.pop(id(node.output), None)
        if g is None:
            continue
        for inp, gi in zip(node.inputs, node.backward_fn(g)):
            if gi is None:
                continue
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + gi
            else:
                grads[key] = gi
    return {id(v): grads[id(v)] for v in tape.leaves if id(v) in grads}


def grad_of(grads: dict[int, np.ndarray], v: Var) -> np.ndarray:
    return grads.get(id(v), np.zeros_like(v.data))


def finite_diff(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function, coordinate by coordinate."""
    if h <= 0:
        raise ValueError("step h must be > 0")
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = float(f(x))
        flat[i] = orig - h
        fm = float(f(x))
        flat[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError(f"non-finite function value near coordinate {i}")
        gflat[i] = (fp - fm) / (2.0 * h)
    return g
