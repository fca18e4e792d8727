"""Dense float64 tensors with tape-based reverse-mode automatic differentiation.

A ``Tensor`` wraps a contiguous float64 ndarray. Primitives are plain
functions; when called inside a ``with Tape():`` block and at least one input
requires a gradient, the primitive records a node (output, parents, backward
closure) on the tape. ``backward`` walks the tape in reverse, visiting each
node exactly once, and accumulates total derivatives into ``Tensor.grad``.

Every primitive validates that its output is finite; NaN/Inf raises
``NonFiniteError`` immediately rather than propagating silently. Tensors are
treated as immutable values once created (optimizers mutate parameter
``.data`` between steps, never mid-graph). A tape is single-threaded and is
consumed by its backward pass.
"""

import math

import numpy as np
from scipy.special import erf, expit

from .errors import ContractError, NonFiniteError, ShapeError

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)

_active_tape = None


def _check_finite(arr, op):
    # min/max both propagate NaN and expose either infinity without
    # allocating a full boolean mask.
    if arr.size and not (np.isfinite(arr.min()) and np.isfinite(arr.max())):
        raise NonFiniteError(f"non-finite values produced by '{op}'")


class Tensor:
    """A float64 n-d array plus gradient bookkeeping."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad=False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = np.ascontiguousarray(arr)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        _check_finite(self.data, "tensor")

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self):
        self.grad = None

    def accumulate_grad(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            np.add(self.grad, g, out=self.grad)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar; every op lives at module level
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Ordered record of primitive applications for one backward pass."""

    def __init__(self):
        self.nodes = []
        self.consumed = False

    def __enter__(self):
        global _active_tape
        if _active_tape is not None:
            raise ContractError("tapes do not nest; one tape per training step")
        _active_tape = self
        return self

    def __exit__(self, exc_type, exc, tb):
        global _active_tape
        _active_tape = None
        return False


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _record(out_data, parents, backward_fn, op):
    _check_finite(out_data, op)
    out = Tensor.__new__(Tensor)
    out.data = out_data
    out.grad = None
    tape = _active_tape
    if tape is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        tape.nodes.append((out, parents, backward_fn))
    else:
        out.requires_grad = False
    return out


def _sum_to(g, shape):
    """Reduce gradient ``g`` back to ``shape`` after numpy broadcasting."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    keep = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if keep:
        g = g.sum(axis=keep, keepdims=True)
    return g


def backward(loss, tape=None):
    """Backpropagate from a scalar loss through the (consumed) tape."""
    tape = tape if tape is not None else _active_tape
    if tape is None:
        raise ContractError("backward() requires an active or explicit tape")
    if tape.consumed:
        raise ContractError("tape already consumed by a previous backward pass")
    if loss.data.size != 1:
        raise ContractError(f"loss must be scalar, got shape {loss.shape}")
    tape.consumed = True
    loss.accumulate_grad(np.ones_like(loss.data))
    for out, parents, backward_fn in reversed(tape.nodes):
        if out.grad is None:
            continue
        backward_fn(out.grad)
        out.grad = None  # interior grads are transient
    tape.nodes.clear()


# ---------------------------------------------------------------------------
# elementwise primitives


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to(g, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to(g, b.shape))

    return _record(out, (a, b), bwd, "add")


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to(g, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to(-g, b.shape))

    return _record(out, (a, b), bwd, "sub")


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to(g * b.data, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to(g * a.data, b.shape))

    return _record(out, (a, b), bwd, "mul")


def absolute(a):
    a = as_tensor(a)
    out = np.abs(a.data)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * np.sign(a.data))

    return _record(out, (a,), bwd, "abs")


def gelu(a):
    """Exact (erf-based) Gaussian error linear unit."""
    a = as_tensor(a)
    cdf = 0.5 * (1.0 + erf(a.data * _INV_SQRT2))
    out = a.data * cdf

    def bwd(g):
        if a.requires_grad:
            pdf = np.exp(-0.5 * a.data * a.data) * _INV_SQRT2PI
            a.accumulate_grad(g * (cdf + a.data * pdf))

    return _record(out, (a,), bwd, "gelu")


def sigmoid(a):
    a = as_tensor(a)
    out = expit(a.data)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * out * (1.0 - out))

    return _record(out, (a,), bwd, "sigmoid")


# ---------------------------------------------------------------------------
# shape primitives


def reshape(a, shape):
    a = as_tensor(a)
    out = np.reshape(a.data, shape)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(np.reshape(g, a.shape))

    return _record(out, (a,), bwd, "reshape")


def transpose(a, axes):
    a = as_tensor(a)
    axes = tuple(axes)
    out = np.ascontiguousarray(np.transpose(a.data, axes))
    inverse = tuple(np.argsort(axes))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(np.transpose(g, inverse))

    return _record(out, (a,), bwd, "transpose")


def concat(tensors, axis):
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        pieces = np.split(g, splits, axis=axis)
        for t, piece in zip(tensors, pieces):
            if t.requires_grad:
                t.accumulate_grad(piece)

    return _record(out, tuple(tensors), bwd, "concat")


def narrow(a, axis, start, length):
    """Contiguous slice ``[start, start+length)`` along ``axis``."""
    a = as_tensor(a)
    if start < 0 or start + length > a.shape[axis]:
        raise ShapeError(
            f"narrow [{start}:{start + length}] out of range for axis {axis} "
            f"of shape {a.shape}"
        )
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    out = np.ascontiguousarray(a.data[index])

    def bwd(g):
        if a.requires_grad:
            full = np.zeros(a.shape)
            full[index] = g
            a.accumulate_grad(full)

    return _record(out, (a,), bwd, "narrow")


# ---------------------------------------------------------------------------
# linear algebra and reductions


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs >=2-d operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} x {b.shape}")
    out = np.matmul(a.data, b.data)

    def bwd(g):
        if a.requires_grad:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            a.accumulate_grad(_sum_to(ga, a.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b.accumulate_grad(_sum_to(gb, b.shape))

    return _record(out, (a, b), bwd, "matmul")


def softmax(a):
    """Numerically stable softmax over the last axis."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    np.exp(shifted, out=shifted)
    out = shifted / shifted.sum(axis=-1, keepdims=True)

    def bwd(g):
        if a.requires_grad:
            inner = (g * out).sum(axis=-1, keepdims=True)
            a.accumulate_grad(out * (g - inner))

    return _record(out, (a,), bwd, "softmax")


def layer_norm(x, gain, bias, eps=1e-5):
    """Normalize the last axis to zero mean / unit variance, then affine."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    out = xhat * gain.data + bias.data

    def bwd(g):
        if gain.requires_grad:
            gain.accumulate_grad(_sum_to(g * xhat, gain.shape))
        if bias.requires_grad:
            bias.accumulate_grad(_sum_to(g, bias.shape))
        if x.requires_grad:
            gx = g * gain.data
            m1 = gx.mean(axis=-1, keepdims=True)
            m2 = (gx * xhat).mean(axis=-1, keepdims=True)
            x.accumulate_grad(inv_std * (gx - m1 - xhat * m2))

    return _record(out, (x, gain, bias), bwd, "layer_norm")


def attention_core(q, k, v):
    """Scaled dot-product attention over stacked heads.

    ``q, k, v`` are (..., tokens, head_dim); softmax runs over keys. Fused
    into one node so only the attention weights are retained for backward.
    """
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    if q.shape[-1] != k.shape[-1] or k.shape[-2] != v.shape[-2]:
        raise ShapeError(
            f"attention shapes disagree: q{q.shape} k{k.shape} v{v.shape}"
        )
    scale = 1.0 / math.sqrt(q.shape[-1])
    scores = np.matmul(q.data * scale, np.swapaxes(k.data, -1, -2))
    scores -= scores.max(axis=-1, keepdims=True)
    np.exp(scores, out=scores)
    scores /= scores.sum(axis=-1, keepdims=True)
    weights = scores  # (..., tq, tk), kept for backward
    out = np.matmul(weights, v.data)

    def bwd(g):
        if v.requires_grad:
            v.accumulate_grad(np.matmul(np.swapaxes(weights, -1, -2), g))
        if q.requires_grad or k.requires_grad:
            dw = np.matmul(g, np.swapaxes(v.data, -1, -2))
            inner = (dw * weights).sum(axis=-1, keepdims=True)
            ds = weights * (dw - inner)
            if q.requires_grad:
                q.accumulate_grad(np.matmul(ds, k.data) * scale)
            if k.requires_grad:
                k.accumulate_grad(np.matmul(np.swapaxes(ds, -1, -2), q.data) * scale)

    return _record(out, (q, k, v), bwd, "attention_core")


def sum_all(a):
    a = as_tensor(a)
    out = np.asarray(a.data.sum())

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(np.full(a.shape, float(g)))

    return _record(out, (a,), bwd, "sum_all")


def mean_all(a):
    a = as_tensor(a)
    out = np.asarray(a.data.mean())
    inv = 1.0 / a.size

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(np.full(a.shape, float(g) * inv))

    return _record(out, (a,), bwd, "mean_all")


def l1_mean(a, b):
    """Mean absolute difference, one value per call: mean(|a - b|)."""
    return mean_all(absolute(sub(a, b)))
