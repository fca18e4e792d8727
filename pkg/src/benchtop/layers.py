"""Neural building blocks on top of the tensor engine.

Weight initialization follows one fixed scheme: linear weights uniform in
+/- 1/sqrt(fan_in) with zero biases, learned token/position embeddings
normal with sigma 0.02. All randomness flows through an explicit
``numpy.random.Generator`` so identical seeds give bit-identical models.
"""

import math

import numpy as np

from . import tensor as T
from .errors import ConfigError, ShapeError
from .tensor import Tensor


class Module:
    """Minimal parameter container: children and Tensors found by attribute.

    ``parameters()`` yields (qualified_name, tensor) pairs in sorted name
    order, which fixes optimizer and checkpoint layout deterministically.
    """

    def named_parameters(self, prefix=""):
        for name in sorted(vars(self)):
            value = getattr(self, name)
            qual = f"{prefix}{name}"
            if isinstance(value, Tensor):
                yield qual, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=qual + ".")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(prefix=f"{qual}.{i}.")
                    elif isinstance(item, Tensor):
                        yield f"{qual}.{i}", item

    def parameters(self):
        return [t for _, t in self.named_parameters()]

    def param_dict(self):
        return dict(self.named_parameters())


def parameter(data):
    return Tensor(data, requires_grad=True)


def linear_init(rng, fan_in, fan_out):
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def embedding_init(rng, *shape):
    return rng.normal(0.0, 0.02, size=shape)


class Linear(Module):
    def __init__(self, rng, d_in, d_out):
        self.d_in = d_in
        self.d_out = d_out
        self.weight = parameter(linear_init(rng, d_in, d_out))
        self.bias = parameter(np.zeros(d_out))

    def __call__(self, x):
        if x.shape[-1] != self.d_in:
            raise ShapeError(f"linear expects last dim {self.d_in}, got {x.shape}")
        lead = x.shape[:-1]
        flat = T.reshape(x, (-1, self.d_in))
        out = T.add(T.matmul(flat, self.weight), self.bias)
        return T.reshape(out, lead + (self.d_out,))


class LayerNorm(Module):
    def __init__(self, dim):
        self.gain = parameter(np.ones(dim))
        self.bias = parameter(np.zeros(dim))

    def __call__(self, x):
        return T.layer_norm(x, self.gain, self.bias)


class Mlp(Module):
    """Two-layer GELU MLP."""

    def __init__(self, rng, d_in, d_hidden, d_out):
        self.fc1 = Linear(rng, d_in, d_hidden)
        self.fc2 = Linear(rng, d_hidden, d_out)

    def __call__(self, x):
        return self.fc2(T.gelu(self.fc1(x)))


class MultiHeadAttention(Module):
    """Projected multi-head attention over (batch, tokens, d_model) inputs."""

    def __init__(self, rng, d_model, heads):
        if d_model % heads != 0:
            raise ConfigError(f"d_model {d_model} not divisible by heads {heads}")
        self.heads = heads
        self.d_model = d_model
        self.wq = Linear(rng, d_model, d_model)
        self.wk = Linear(rng, d_model, d_model)
        self.wv = Linear(rng, d_model, d_model)
        self.wo = Linear(rng, d_model, d_model)

    def _split(self, x, batch, tokens):
        head_dim = self.d_model // self.heads
        x = T.reshape(x, (batch, tokens, self.heads, head_dim))
        return T.transpose(x, (0, 2, 1, 3))

    def __call__(self, q, k, v):
        b, tq = q.shape[0], q.shape[1]
        tk = k.shape[1]
        qh = self._split(self.wq(q), b, tq)
        kh = self._split(self.wk(k), b, tk)
        vh = self._split(self.wv(v), b, tk)
        mixed = T.attention_core(qh, kh, vh)
        mixed = T.transpose(mixed, (0, 2, 1, 3))
        mixed = T.reshape(mixed, (b, tq, self.d_model))
        return self.wo(mixed)


def multihead_attention(q, k, v, heads, rng=None):
    """Functional single-call form over (tokens, d) inputs.

    Uses freshly initialized projections when no module is supplied; mainly a
    contract surface for tests, the model classes hold persistent modules.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if q.ndim != 2:
        raise ShapeError(f"expected (tokens, d) input, got {q.shape}")
    mha = MultiHeadAttention(rng, q.shape[-1], heads)
    q3, k3, v3 = (T.reshape(t, (1,) + t.shape) for t in (q, k, v))
    out = mha(q3, k3, v3)
    return T.reshape(out, q.shape)


class EncoderLayer(Module):
    """Pre-norm transformer encoder block (self-attention + MLP)."""

    def __init__(self, rng, d_model, heads, mlp_ratio=4):
        self.attn = MultiHeadAttention(rng, d_model, heads)
        self.ln1 = LayerNorm(d_model)
        self.ln2 = LayerNorm(d_model)
        self.mlp = Mlp(rng, d_model, mlp_ratio * d_model, d_model)

    def __call__(self, x):
        h = self.ln1(x)
        x = T.add(x, self.attn(h, h, h))
        return T.add(x, self.mlp(self.ln2(x)))


class DecoderLayer(Module):
    """Pre-norm transformer decoder block: self-attn, cross-attn, MLP."""

    def __init__(self, rng, d_model, heads, mlp_ratio=4):
        self.self_attn = MultiHeadAttention(rng, d_model, heads)
        self.cross_attn = MultiHeadAttention(rng, d_model, heads)
        self.ln1 = LayerNorm(d_model)
        self.ln2 = LayerNorm(d_model)
        self.ln3 = LayerNorm(d_model)
        self.mlp = Mlp(rng, d_model, mlp_ratio * d_model, d_model)

    def __call__(self, x, memory):
        h = self.ln1(x)
        x = T.add(x, self.self_attn(h, h, h))
        x = T.add(x, self.cross_attn(self.ln2(x), memory, memory))
        return T.add(x, self.mlp(self.ln3(x)))


def sinusoidal_embedding(steps, dim):
    """Classic sin/cos embedding of integer diffusion steps, shape (B, dim)."""
    steps = np.atleast_1d(np.asarray(steps, dtype=np.float64))
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half) / max(half - 1, 1))
    angles = steps[:, None] * freqs[None, :]
    emb = np.concatenate([np.sin(angles), np.cos(angles)], axis=1)
    if emb.shape[1] < dim:
        emb = np.concatenate([emb, np.zeros((emb.shape[0], dim - emb.shape[1]))], axis=1)
    return emb
