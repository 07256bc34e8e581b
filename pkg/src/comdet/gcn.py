"""Three-layer graph-convolutional encoder with hand-written gradients.

The forward pass propagates attributes through the symmetrically normalized
adjacency (no self-loops are added; isolated nodes receive zero rows), applies
SELU at each layer, then maps the last activation to a non-negative embedding
whose rows have exactly unit L2 norm (or are exactly zero for degenerate
rows). Backward passes mirror the forward chain step by step, and training is
full-batch Adam. Everything is deterministic for a given seed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import Graph

SELU_ALPHA = 1.6732632423543772
SELU_LAMBDA = 1.0507009873554805
EPS = 1e-12

_MAGIC = b"CDGC"
_VERSION = 1


def selu(z: np.ndarray) -> np.ndarray:
    return SELU_LAMBDA * np.where(z > 0, z, SELU_ALPHA * np.expm1(z))


def selu_grad(z: np.ndarray) -> np.ndarray:
    return SELU_LAMBDA * np.where(z > 0, 1.0, SELU_ALPHA * np.exp(z))


def normalized_adjacency(g: Graph) -> sp.csr_matrix:
    """Symmetric normalization D^{-1/2} A D^{-1/2}; zero rows for isolated nodes."""
    rows = np.concatenate([g.edge_u, g.edge_v])
    cols = np.concatenate([g.edge_v, g.edge_u])
    data = np.ones(rows.size, dtype=np.float64)
    a = sp.csr_matrix((data, (rows, cols)), shape=(g.n, g.n))
    with np.errstate(divide="ignore"):
        dinv = 1.0 / np.sqrt(g.degrees.astype(np.float64))
    dinv[g.degrees == 0] = 0.0
    d = sp.diags(dinv)
    return (d @ a @ d).tocsr()


class GcnModel:
    """Encoder state: normalized adjacency plus three weight matrices."""

    def __init__(self, g: Graph, in_dim: int,
                 hidden_dims: tuple[int, int, int] = (256, 128, 64),
                 seed: int = 0) -> None:
        if in_dim < 1:
            raise ValueError("in_dim must be >= 1")
        if len(hidden_dims) != 3 or any(d < 1 for d in hidden_dims):
            raise ValueError("hidden_dims must be three positive sizes")
        self.a_norm = normalized_adjacency(g)
        self.in_dim = int(in_dim)
        self.hidden_dims = tuple(int(d) for d in hidden_dims)
        self.seed = int(seed)
        self.weights: list[np.ndarray] = []
        self.reinit(seed)

    def reinit(self, seed: int) -> None:
        """Fresh Glorot-uniform weights drawn from the given seed."""
        rng = np.random.default_rng(seed)
        self.seed = int(seed)
        dims = (self.in_dim, *self.hidden_dims)
        self.weights = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))

    @property
    def out_dim(self) -> int:
        return self.hidden_dims[-1]

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, dict]:
        """Embed attribute matrix ``x``; returns (embedding, cache for backward)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.a_norm.shape[0], self.in_dim):
            raise ValueError(
                f"expected attributes of shape {(self.a_norm.shape[0], self.in_dim)}, "
                f"got {x.shape}")
        cache: dict = {"ax": [], "z": [], "act": []}
        h = x
        for w in self.weights:
            ah = self.a_norm @ h
            z = ah @ w
            h = selu(z)
            cache["ax"].append(ah)
            cache["z"].append(z)
            cache["act"].append(h)

        # row-normalize by the (sign-safely shifted) row sum, squash, then
        # square and scale to exactly unit-norm rows
        rowsum = h.sum(axis=1, keepdims=True)
        den = rowsum + EPS * np.where(rowsum >= 0, 1.0, -1.0)
        xb = h / den
        xh = np.tanh(xb)
        r = np.linalg.norm(xh, axis=1, keepdims=True)
        u = xh ** 2 / (r + EPS)
        s = np.linalg.norm(u, axis=1, keepdims=True)
        nonzero = s > EPS
        xe = np.where(nonzero, u / np.where(nonzero, s, 1.0), 0.0)
        cache.update(h3=h, den=den, xb=xb, xh=xh, r=r, u=u, s=s, nonzero=nonzero)
        return xe, cache

    def backward(self, cache: dict, d_xe: np.ndarray) -> list[np.ndarray]:
        """Gradients of the loss w.r.t. the three weight matrices."""
        xh, r, u, s = cache["xh"], cache["r"], cache["u"], cache["s"]
        nonzero = cache["nonzero"]

        # unit-norm scaling: xe = u / s on non-degenerate rows
        safe_s = np.where(nonzero, s, 1.0)
        dot = (d_xe * u).sum(axis=1, keepdims=True)
        du = np.where(nonzero, d_xe / safe_s - u * dot / safe_s ** 3, 0.0)

        # u = xh^2 / (r + eps) with r = ||xh||
        rp = r + EPS
        inv_r = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0)
        row = (du * xh ** 2).sum(axis=1, keepdims=True)
        d_xh = 2.0 * xh * du / rp - xh * row * inv_r / rp ** 2

        # xh = tanh(xb)
        d_xb = d_xh * (1.0 - xh ** 2)

        # xb = h3 / den with den = rowsum(h3) + shift
        h3, den = cache["h3"], cache["den"]
        row = (d_xb * h3).sum(axis=1, keepdims=True)
        d_h = d_xb / den - row / den ** 2

        grads: list[np.ndarray] = [None] * len(self.weights)
        for layer in range(len(self.weights) - 1, -1, -1):
            dz = d_h * selu_grad(cache["z"][layer])
            grads[layer] = cache["ax"][layer].T @ dz
            if layer:
                d_h = self.a_norm @ (dz @ self.weights[layer].T)
        return grads


@dataclass
class AdamState:
    """Full-batch Adam with bias correction."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_weights(cls, weights: list[np.ndarray], lr: float = 0.001) -> "AdamState":
        return cls(lr=lr,
                   m=[np.zeros_like(w) for w in weights],
                   v=[np.zeros_like(w) for w in weights])

    def step(self, weights: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        for i, (w, grad) in enumerate(zip(weights, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad ** 2
            m_hat = self.m[i] / (1.0 - self.beta1 ** self.t)
            v_hat = self.v[i] / (1.0 - self.beta2 ** self.t)
            w -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class TrainingDiverged(RuntimeError):
    """Raised when the loss stops being finite; carries a diagnostic snapshot."""

    def __init__(self, epoch: int, loss: float, weight_norms: list[float]) -> None:
        self.epoch = epoch
        self.loss = loss
        self.weight_norms = weight_norms
        super().__init__(
            f"non-finite loss {loss!r} at epoch {epoch}; "
            f"weight norms {['%.3e' % x for x in weight_norms]}")


def train(model: GcnModel, x: np.ndarray, loss_provider, epochs: int = 300,
          learning_rate: float = 0.001, seed: int | None = None
          ) -> tuple[GcnModel, list[float]]:
    """Optimize the model full-batch; returns the model and per-epoch losses.

    ``loss_provider`` maps an embedding to ``(loss, d_loss/d_embedding)``.
    Passing ``seed`` re-initializes the weights first. Zero epochs (or a zero
    learning rate) leave the weights untouched.
    """
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if seed is not None:
        model.reinit(seed)
    adam = AdamState.for_weights(model.weights, lr=learning_rate)
    trace: list[float] = []
    for epoch in range(epochs):
        xe, cache = model.forward(x)
        loss, d_xe = loss_provider(xe)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch, float(loss),
                                   [float(np.linalg.norm(w)) for w in model.weights])
        grads = model.backward(cache, d_xe)
        adam.step(model.weights, grads)
        trace.append(float(loss))
    return model, trace


def save_checkpoint(model: GcnModel, path) -> None:
    """Write the versioned binary checkpoint (layout in docs/FORMATS.md)."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IqIIII", _VERSION, model.seed, model.in_dim,
                             *model.hidden_dims))
        for w in model.weights:
            fh.write(np.ascontiguousarray(w, dtype=np.float64).tobytes())


def load_checkpoint(path, g: Graph) -> GcnModel:
    """Rebuild a model from a checkpoint; the graph supplies the adjacency."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a model checkpoint (bad magic {magic!r})")
        version, seed, in_dim, d1, d2, d3 = struct.unpack("<IqIIII", fh.read(28))
        if version != _VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        model = GcnModel(g, in_dim, (d1, d2, d3), seed=seed)
        dims = (in_dim, d1, d2, d3)
        for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
            raw = fh.read(8 * fan_in * fan_out)
            if len(raw) != 8 * fan_in * fan_out:
                raise ValueError("checkpoint truncated")
            model.weights[i] = np.frombuffer(raw, dtype="<f8").reshape(fan_in, fan_out).copy()
        if fh.read(1):
            raise ValueError("trailing bytes after checkpoint payload")
    return model
