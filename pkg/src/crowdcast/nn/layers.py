"""Neural layers on top of the autodiff tensor: dense, attention, layer norm."""

from __future__ import annotations

import math

import numpy as np

from .tensor import Parameter, Tensor, matmul, softmax, transpose

LAYERNORM_EPS = 1e-6


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape if shape is not None else (fan_in, fan_out))


class Module:
    """Minimal parameter container; children are discovered by attribute scan."""

    def parameters(self) -> list[Parameter]:
        out = []
        for value in vars(self).values():
            if isinstance(value, Parameter):
                out.append(value)
            elif isinstance(value, Module):
                out.extend(value.parameters())
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        out.extend(item.parameters())
        return out

    def named_parameters(self) -> dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}


class Linear(Module):
    """Affine map y = x W + b on the trailing axis.

    Biases start uniform in +-1/sqrt(fan_in) rather than zero: the pipeline
    feeds exact-origin coordinates into the first layers, and a zero bias
    would park every ReLU on its kink there.
    """

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, name: str, scale: float = 1.0):
        self.n_in = n_in
        self.w = Parameter(xavier_uniform(rng, n_in, n_out) * scale, f"{name}.w")
        bound = 1.0 / math.sqrt(n_in)
        self.b = Parameter(rng.uniform(-bound, bound, size=n_out) * scale, f"{name}.b")

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.n_in:
            raise ValueError(f"{self.w.name}: expected trailing dim {self.n_in}, got {x.shape}")
        return matmul(x, self.w) + self.b


class TwoLayerEncoder(Module):
    """Two dense layers, ReLU then tanh; the shared shape of all embeddings."""

    def __init__(self, n_in: int, n_out: int, rng, name: str):
        self.l1 = Linear(n_in, n_out, rng, f"{name}.l1")
        self.l2 = Linear(n_out, n_out, rng, f"{name}.l2")

    def __call__(self, x: Tensor) -> Tensor:
        return self.l2(self.l1(x).relu()).tanh()


class LayerNorm(Module):
    def __init__(self, dim: int, name: str):
        self.gamma = Parameter(np.ones(dim), f"{name}.gamma")
        self.beta = Parameter(np.zeros(dim), f"{name}.beta")

    def __call__(self, x: Tensor) -> Tensor:
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        normed = centered * _reciprocal_sqrt(var)
        return normed * self.gamma + self.beta


def _reciprocal_sqrt(var: Tensor) -> Tensor:
    # 1/sqrt(var + eps) via primitives: sqrt then elementwise reciprocal
    s = (var + LAYERNORM_EPS).sqrt()
    return _reciprocal(s)


def _reciprocal(t: Tensor) -> Tensor:
    # d(1/x)/dx = -1/x^2; composed from existing ops would need division,
    # so implement directly against the tensor internals
    from . import tensor as T

    t = T._as_tensor(t)
    data = 1.0 / t.data

    def backward(g):
        if t.requires_grad:
            t._accumulate(-g * data * data)

    return T._make(data, (t,), backward)


def _split_heads(x: Tensor, heads: int) -> Tensor:
    """[..., L, d] -> [..., heads, L, d/heads] for 2-D or 3-D inputs."""
    if x.ndim == 2:
        length, d = x.shape
        return transpose(x.reshape(length, heads, d // heads), (1, 0, 2))
    batch, length, d = x.shape
    return transpose(x.reshape(batch, length, heads, d // heads), (0, 2, 1, 3))


def _merge_heads(x: Tensor) -> Tensor:
    if x.ndim == 3:
        heads, length, dh = x.shape
        return transpose(x, (1, 0, 2)).reshape(length, heads * dh)
    batch, heads, length, dh = x.shape
    return transpose(x, (0, 2, 1, 3)).reshape(batch, length, heads * dh)


class MultiHeadAttention(Module):
    """Scaled dot-product attention with per-head split and output projection."""

    def __init__(self, d_model: int, heads: int, rng, name: str):
        if d_model % heads != 0:
            raise ValueError(f"d_model={d_model} not divisible by heads={heads}")
        self.heads = heads
        self.d_model = d_model
        self.wq = Linear(d_model, d_model, rng, f"{name}.wq")
        self.wk = Linear(d_model, d_model, rng, f"{name}.wk")
        self.wv = Linear(d_model, d_model, rng, f"{name}.wv")
        self.wo = Linear(d_model, d_model, rng, f"{name}.wo")

    def __call__(self, q: Tensor, k: Tensor, v: Tensor, return_weights: bool = False):
        qh = _split_heads(self.wq(q), self.heads)
        kh = _split_heads(self.wk(k), self.heads)
        vh = _split_heads(self.wv(v), self.heads)
        scale = 1.0 / math.sqrt(self.d_model // self.heads)
        scores = matmul(qh, transpose(kh, _swap_last(kh.ndim))) * scale
        weights = softmax(scores, axis=-1)
        mixed = _merge_heads(matmul(weights, vh))
        out = self.wo(mixed)
        if return_weights:
            return out, weights.data.copy()
        return out


def _swap_last(ndim: int) -> tuple:
    axes = list(range(ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return tuple(axes)


def multi_head_attention(q: Tensor, k: Tensor, v: Tensor, heads: int, rng=None, name: str = "mha"):
    """Functional form: builds a fresh attention block and applies it."""
    rng = rng if rng is not None else np.random.default_rng(0)
    block = MultiHeadAttention(q.shape[-1], heads, rng, name)
    return block(q, k, v)


class FeedForward(Module):
    def __init__(self, d_model: int, hidden: int, rng, name: str):
        self.l1 = Linear(d_model, hidden, rng, f"{name}.l1")
        self.l2 = Linear(hidden, d_model, rng, f"{name}.l2")

    def __call__(self, x: Tensor) -> Tensor:
        return self.l2(self.l1(x).relu())


class EncoderLayer(Module):
    """Pre-norm-free transformer encoder layer: self-attention then FFN."""

    def __init__(self, d_model: int, heads: int, ff_dim: int, rng, name: str):
        self.attn = MultiHeadAttention(d_model, heads, rng, f"{name}.attn")
        self.ln1 = LayerNorm(d_model, f"{name}.ln1")
        self.ff = FeedForward(d_model, ff_dim, rng, f"{name}.ff")
        self.ln2 = LayerNorm(d_model, f"{name}.ln2")

    def __call__(self, x: Tensor) -> Tensor:
        x = self.ln1(x + self.attn(x, x, x))
        return self.ln2(x + self.ff(x))


class DecoderLayer(Module):
    """Cross-attention layer: queries/keys from the encoder, values evolve."""

    def __init__(self, d_model: int, heads: int, ff_dim: int, rng, name: str):
        self.attn = MultiHeadAttention(d_model, heads, rng, f"{name}.attn")
        self.ln1 = LayerNorm(d_model, f"{name}.ln1")
        self.ff = FeedForward(d_model, ff_dim, rng, f"{name}.ff")
        self.ln2 = LayerNorm(d_model, f"{name}.ln2")

    def __call__(self, enc: Tensor, state: Tensor, return_weights: bool = False):
        if return_weights:
            attended, weights = self.attn(enc, enc, state, return_weights=True)
        else:
            attended = self.attn(enc, enc, state)
        x = self.ln1(state + attended)
        out = self.ln2(x + self.ff(x))
        return (out, weights) if return_weights else out


def positional_encoding(n_steps: int, d_model: int) -> np.ndarray:
    """Sinusoidal position codes over step index."""
    pos = np.arange(n_steps, dtype=np.float64)[:, None]
    i = np.arange(0, d_model, 2, dtype=np.float64)
    div = np.exp(-math.log(10000.0) * i / d_model)
    pe = np.zeros((n_steps, d_model))
    pe[:, 0::2] = np.sin(pos * div)
    pe[:, 1::2] = np.cos(pos * div[: pe[:, 1::2].shape[1]])
    return pe
