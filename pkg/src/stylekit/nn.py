"""Dense towers with hand-written backprop on numpy arrays.

Two encoders share one 1024-dim embedding space:

* ``StyleTower`` maps the 34-dim style vector through a 4-layer MLP
  (34 -> 128 -> 512 -> 768 -> 1024, ReLU after each hidden layer) plus a
  learned 512 -> 1024 projection of the second hidden activation added to
  the output pre-activation. The residual is a projection because the
  bridged dimensions differ, so an identity shortcut cannot exist.
* ``CodeTower`` hashes tokens into an 8192-bucket embedding table
  (128-dim), mean-pools, then projects 128 -> 512 -> 1024 with one ReLU.

Training runs in float32; float64 is for gradient checking. Forward
passes are deterministic for fixed weights and inputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .lexer import Token


class DimensionMismatch(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class EmptyTokenStream(ValueError):
    pass


class NonFiniteGradient(RuntimeError):
    def __init__(self, tensor_name: str):
        super().__init__(f"non-finite gradient in tensor {tensor_name!r}")
        self.tensor_name = tensor_name


def _kaiming_uniform(rng: np.random.Generator, fan_in: int, shape, dtype):
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class StyleTower:
    """Eq-style MLP encoder for normalized style vectors."""

    DEFAULT_LAYERS = (34, 128, 512, 768, 1024)

    def __init__(self, seed: int = 0, layers=DEFAULT_LAYERS, dtype=np.float32):
        if len(layers) != 5:
            raise ValueError("StyleTower takes exactly five layer sizes")
        self.layers = tuple(int(x) for x in layers)
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        d0, d1, d2, d3, d4 = self.layers
        self.params: dict[str, np.ndarray] = {}
        for i, (din, dout) in enumerate(zip(self.layers, self.layers[1:]), start=1):
            self.params[f"w{i}"] = _kaiming_uniform(rng, din, (dout, din), self.dtype)
            self.params[f"b{i}"] = np.zeros(dout, dtype=self.dtype)
        # residual projection from the second hidden activation
        self.params["wr"] = _kaiming_uniform(rng, d2, (d4, d2), self.dtype)
        self.params["br"] = np.zeros(d4, dtype=self.dtype)

    @property
    def in_dim(self) -> int:
        return self.layers[0]

    @property
    def out_dim(self) -> int:
        return self.layers[-1]

    def param_count(self) -> int:
        return sum(p.size for p in self.params.values())

    @staticmethod
    def analytic_param_count(layers) -> int:
        stack = sum(din * dout + dout for din, dout in zip(layers, layers[1:]))
        return stack + layers[2] * layers[4] + layers[4]

    def forward(self, s: np.ndarray, cache: dict | None = None) -> np.ndarray:
        s = np.asarray(s, dtype=self.dtype)
        squeeze = s.ndim == 1
        if squeeze:
            s = s[None, :]
        if s.shape[1] != self.in_dim:
            raise DimensionMismatch(f"expected {self.in_dim} features, got {s.shape[1]}")
        p = self.params
        z1 = s @ p["w1"].T + p["b1"]
        h1 = np.maximum(z1, 0)
        z2 = h1 @ p["w2"].T + p["b2"]
        h2 = np.maximum(z2, 0)
        z3 = h2 @ p["w3"].T + p["b3"]
        h3 = np.maximum(z3, 0)
        out = h3 @ p["w4"].T + p["b4"] + h2 @ p["wr"].T + p["br"]
        if cache is not None:
            cache.update(s=s, z1=z1, h1=h1, z2=z2, h2=h2, z3=z3, h3=h3)
        return out[0] if squeeze else out

    def backward(self, cache: dict, dout: np.ndarray) -> dict[str, np.ndarray]:
        dout = np.asarray(dout, dtype=self.dtype)
        if dout.ndim == 1:
            dout = dout[None, :]
        if dout.shape != (cache["s"].shape[0], self.out_dim):
            raise ShapeMismatch(f"upstream gradient has shape {dout.shape}")
        p = self.params
        s, z1, h1, z2, h2, z3, h3 = (
            cache["s"], cache["z1"], cache["h1"], cache["z2"],
            cache["h2"], cache["z3"], cache["h3"],
        )
        grads = {}
        grads["w4"] = dout.T @ h3
        grads["b4"] = dout.sum(axis=0)
        grads["wr"] = dout.T @ h2
        grads["br"] = dout.sum(axis=0)
        dh3 = dout @ p["w4"]
        dz3 = dh3 * (z3 > 0)
        grads["w3"] = dz3.T @ h2
        grads["b3"] = dz3.sum(axis=0)
        dh2 = dz3 @ p["w3"] + dout @ p["wr"]
        dz2 = dh2 * (z2 > 0)
        grads["w2"] = dz2.T @ h1
        grads["b2"] = dz2.sum(axis=0)
        dh1 = dz2 @ p["w2"]
        dz1 = dh1 * (z1 > 0)
        grads["w1"] = dz1.T @ s
        grads["b1"] = dz1.sum(axis=0)
        return grads


class CodeTower:
    """Hash-embedding encoder for token streams.

    Tokens are bucketed by a keyed blake2b hash of ``kind:text`` so the
    mapping is stable across processes for a fixed ``hash_seed``.
    """

    def __init__(self, seed: int = 0, vocab: int = 8192, embed_dim: int = 128,
                 hidden_dim: int = 512, out_dim: int = 1024, hash_seed: int = 0,
                 dtype=np.float32):
        self.vocab = vocab
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.out_dim = out_dim
        self.hash_seed = hash_seed
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        self.params = {
            "emb": (rng.uniform(-1.0, 1.0, size=(vocab, embed_dim))
                    / np.sqrt(embed_dim)).astype(self.dtype),
            "w1": _kaiming_uniform(rng, embed_dim, (hidden_dim, embed_dim), self.dtype),
            "b1": np.zeros(hidden_dim, dtype=self.dtype),
            "w2": _kaiming_uniform(rng, hidden_dim, (out_dim, hidden_dim), self.dtype),
            "b2": np.zeros(out_dim, dtype=self.dtype),
        }
        self._key = int(hash_seed).to_bytes(8, "little", signed=False)

    def param_count(self) -> int:
        return sum(p.size for p in self.params.values())

    def bucket(self, kind: str, text: str) -> int:
        digest = hashlib.blake2b(
            f"{kind}:{text}".encode("utf-8"), digest_size=8, key=self._key
        ).digest()
        return int.from_bytes(digest, "little") % self.vocab

    def bucket_ids(self, tokens: list[Token]) -> np.ndarray:
        real = [t for t in tokens if not t.is_synthetic()]
        if not real:
            raise EmptyTokenStream("code tower needs at least one real token")
        ids = [self.bucket(t.kind.value, t.text) for t in tokens]
        return np.asarray(ids, dtype=np.int64)

    def forward(self, ids_batch: list[np.ndarray], cache: dict | None = None) -> np.ndarray:
        pooled = np.stack([
            self.params["emb"][ids].mean(axis=0) for ids in ids_batch
        ]).astype(self.dtype)
        z1 = pooled @ self.params["w1"].T + self.params["b1"]
        h1 = np.maximum(z1, 0)
        out = h1 @ self.params["w2"].T + self.params["b2"]
        if cache is not None:
            cache.update(ids_batch=ids_batch, pooled=pooled, z1=z1, h1=h1)
        return out

    def backward(self, cache: dict, dout: np.ndarray) -> dict[str, np.ndarray]:
        dout = np.asarray(dout, dtype=self.dtype)
        if dout.shape != (len(cache["ids_batch"]), self.out_dim):
            raise ShapeMismatch(f"upstream gradient has shape {dout.shape}")
        p = self.params
        pooled, z1, h1 = cache["pooled"], cache["z1"], cache["h1"]
        grads = {}
        grads["w2"] = dout.T @ h1
        grads["b2"] = dout.sum(axis=0)
        dh1 = dout @ p["w2"]
        dz1 = dh1 * (z1 > 0)
        grads["w1"] = dz1.T @ pooled
        grads["b1"] = dz1.sum(axis=0)
        dpooled = dz1 @ p["w1"]
        demb = np.zeros_like(p["emb"])
        for row, ids in enumerate(cache["ids_batch"]):
            np.add.at(demb, ids, dpooled[row] / len(ids))
        grads["emb"] = demb
        return grads

    def embed_source_tokens(self, tokens: list[Token]) -> np.ndarray:
        return self.forward([self.bucket_ids(tokens)])[0]


@dataclass
class EncoderModel:
    """The trained pair of towers plus the shared hashing seed."""
    style: StyleTower
    code: CodeTower

    def param_count(self) -> int:
        return self.style.param_count() + self.code.param_count()


def l2_normalize(x: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / np.maximum(norms, eps)


def l2_normalize_backward(x: np.ndarray, dy: np.ndarray, eps: float = 1e-12):
    """Gradient of y = x / ||x|| given upstream dy (row-wise)."""
    norms = np.maximum(np.linalg.norm(x, axis=-1, keepdims=True), eps)
    y = x / norms
    return (dy - y * np.sum(y * dy, axis=-1, keepdims=True)) / norms


def new_adam_state(params: dict[str, np.ndarray]) -> dict:
    return {
        "t": 0,
        "m": {k: np.zeros_like(v) for k, v in params.items()},
        "v": {k: np.zeros_like(v) for k, v in params.items()},
    }


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: dict, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> dict[str, np.ndarray]:
    """One in-place Adam update; rejects non-finite gradients up front."""
    for name in params:
        if name not in grads:
            raise ShapeMismatch(f"missing gradient for {name!r}")
        if grads[name].shape != params[name].shape:
            raise ShapeMismatch(
                f"gradient {name!r}: {grads[name].shape} vs {params[name].shape}"
            )
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradient(name)
    state["t"] += 1
    t = state["t"]
    for name, p in params.items():
        g = grads[name].astype(p.dtype, copy=False)
        m = state["m"][name]
        v = state["v"][name]
        m *= beta1
        m += (1 - beta1) * g
        v *= beta2
        v += (1 - beta2) * np.square(g)
        m_hat = m / (1 - beta1 ** t)
        v_hat = v / (1 - beta2 ** t)
        p -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.dtype, copy=False)
    return params
