"""From-scratch dense network stack: MLP forward/backward, Adam, Polyak
averaging, random Fourier features, and a binary checkpoint format.

Training arithmetic is float32 by default; pass dtype=np.float64 when running
finite-difference gradient checks.  Reverse-mode gradients are exact, and
``backward`` also returns the gradient with respect to the network input
(needed to push the policy gradient through the critic's action slice).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np


class CheckpointError(Exception):
    """Raised for malformed or truncated checkpoint files."""


class NonFiniteError(Exception):
    """Raised when a gradient or update turns non-finite."""


# ---------------------------------------------------------------------------
# MLP
# ---------------------------------------------------------------------------

HEADS = ("linear", "tanh_pi")


@dataclass
class MLP:
    """Dense network with ReLU hidden layers and a configurable head.

    head "linear" is the critic, head "tanh_pi" the actor output pi * tanh(z),
    which keeps every component strictly inside (-pi, pi).
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    head: str = "linear"

    @classmethod
    def init(
        cls,
        sizes: list[int],
        rng: np.random.Generator,
        head: str = "linear",
        out_scale: float = 1.0,
        dtype=np.float32,
    ) -> "MLP":
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.

        ``out_scale`` scales the final layer's weights (the actor uses 1e-2 so
        initial phase deltas are near zero).
        """
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError("need >= 2 layer sizes, all >= 1")
        if head not in HEADS:
            raise ValueError(f"unknown head {head!r}")
        ws, bs = [], []
        for i, (nin, nout) in enumerate(zip(sizes[:-1], sizes[1:])):
            bound = 1.0 / np.sqrt(nin)
            w = rng.uniform(-bound, bound, size=(nin, nout)).astype(dtype)
            if i == len(sizes) - 2:
                w *= dtype(out_scale)
            ws.append(w)
            bs.append(np.zeros(nout, dtype=dtype))
        return cls(weights=ws, biases=bs, head=head)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "MLP":
        return MLP([w.copy() for w in self.weights],
                   [b.copy() for b in self.biases], self.head)

    def astype(self, dtype) -> "MLP":
        return MLP([w.astype(dtype) for w in self.weights],
                   [b.astype(dtype) for b in self.biases], self.head)

    def forward(self, x: np.ndarray):
        """Returns (output, cache); accepts (d,) or (batch, d) inputs."""
        x = np.asarray(x)
        single = x.ndim == 1
        a = x[None, :] if single else x
        if a.shape[1] != self.weights[0].shape[0]:
            raise ValueError(f"input width {a.shape[1]} != {self.weights[0].shape[0]}")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite network input")
        acts = [a]   # post-activation of each layer, acts[0] = input
        z_last = None
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ w + b
            if i < len(self.weights) - 1:
                acts.append(np.maximum(z, 0.0))
            else:
                z_last = z
        if self.head == "tanh_pi":
            out = np.pi * np.tanh(z_last)
        else:
            out = z_last
        cache = (acts, z_last, single)
        return (out[0] if single else out), cache

    def backward(self, cache, output_grad: np.ndarray):
        """Exact reverse-mode gradients.

        Returns ((weight_grads, bias_grads), input_grad) for the batch that
        produced ``cache``; output_grad carries any loss scaling (e.g. 1/B).
        """
        acts, z_last, single = cache
        g = np.asarray(output_grad)
        if single:
            g = g[None, :]
        if self.head == "tanh_pi":
            th = np.tanh(z_last)
            g = g * np.pi * (1.0 - th * th)
        wgrads = [None] * len(self.weights)
        bgrads = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            a_prev = acts[i]
            wgrads[i] = a_prev.T @ g
            bgrads[i] = np.sum(g, axis=0)
            g = g @ self.weights[i].T
            if i > 0:
                # ReLU subgradient: 0 at exactly 0.
                g = g * (acts[i] > 0.0)
        input_grad = g[0] if single else g
        return (wgrads, bgrads), input_grad


# ---------------------------------------------------------------------------
# Adam + Polyak
# ---------------------------------------------------------------------------


@dataclass
class Adam:
    """Bias-corrected Adam over an MLP's parameter list."""

    lr: float
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_mlp(cls, mlp: MLP, lr: float) -> "Adam":
        return cls(
            lr=lr,
            m_w=[np.zeros_like(w) for w in mlp.weights],
            v_w=[np.zeros_like(w) for w in mlp.weights],
            m_b=[np.zeros_like(b) for b in mlp.biases],
            v_b=[np.zeros_like(b) for b in mlp.biases],
        )

    def step(self, mlp: MLP, grads) -> None:
        """One in-place descent step; raises NonFiniteError on bad gradients."""
        wgrads, bgrads = grads
        for g in wgrads + bgrads:
            if not np.all(np.isfinite(g)):
                raise NonFiniteError("non-finite gradient in Adam step")
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for params, gs, ms, vs in (
            (mlp.weights, wgrads, self.m_w, self.v_w),
            (mlp.biases, bgrads, self.m_b, self.v_b),
        ):
            for i, g in enumerate(gs):
                ms[i] = self.beta1 * ms[i] + (1.0 - self.beta1) * g
                vs[i] = self.beta2 * vs[i] + (1.0 - self.beta2) * g * g
                mhat = ms[i] / c1
                vhat = vs[i] / c2
                params[i] -= (self.lr * mhat / (np.sqrt(vhat) + self.eps)).astype(
                    params[i].dtype
                )


def polyak_update(target: MLP, main: MLP, tau: float) -> None:
    """In-place target <- tau * main + (1 - tau) * target, every tensor."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    for pt, pm in zip(target.weights + target.biases, main.weights + main.biases):
        if pt.shape != pm.shape:
            raise ValueError("shape mismatch between target and main parameters")
        pt *= 1.0 - tau
        pt += tau * pm


# ---------------------------------------------------------------------------
# Random Fourier features
# ---------------------------------------------------------------------------


@dataclass
class FourierKernel:
    """Fixed random projection B (k x d); maps x -> [cos(2 pi B x), sin(2 pi B x)].

    B is drawn once at construction and never trained.
    """

    B: np.ndarray

    @classmethod
    def init(cls, k: int, d: int, sigma_b: float, rng: np.random.Generator,
             dtype=np.float32) -> "FourierKernel":
        return cls(B=(sigma_b * rng.standard_normal((k, d))).astype(dtype))

    @property
    def out_dim(self) -> int:
        return 2 * self.B.shape[0]

    def features(self, x: np.ndarray):
        """Returns (v, cache) with v of width 2k; accepts (d,) or (batch, d)."""
        x = np.asarray(x)
        single = x.ndim == 1
        xb = x[None, :] if single else x
        if xb.shape[1] != self.B.shape[1]:
            raise ValueError(f"input width {xb.shape[1]} != {self.B.shape[1]}")
        ang = 2.0 * np.pi * (xb @ self.B.T)
        v = np.concatenate([np.cos(ang), np.sin(ang)], axis=1)
        return (v[0] if single else v), (ang, single)

    def backward(self, cache, feat_grad: np.ndarray) -> np.ndarray:
        """Gradient of the feature map with respect to its input."""
        ang, single = cache
        g = np.asarray(feat_grad)
        if single:
            g = g[None, :]
        k = self.B.shape[0]
        g_ang = -np.sin(ang) * g[:, :k] + np.cos(ang) * g[:, k:]
        gin = 2.0 * np.pi * (g_ang @ self.B)
        return gin[0] if single else gin


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

MAGIC = b"IRSRL1"


def save_checkpoint(path, tensors: dict[str, np.ndarray]) -> None:
    """Binary format: magic, then per tensor: u32 name length, name (utf-8),
    u32 rank, u32 dims, little-endian float32 payload."""
    with open(path, "wb") as f:
        f.write(MAGIC)
        for name, arr in tensors.items():
            data = np.ascontiguousarray(arr, dtype="<f4")
            enc = name.encode("utf-8")
            f.write(struct.pack("<I", len(enc)))
            f.write(enc)
            f.write(struct.pack("<I", data.ndim))
            for d in data.shape:
                f.write(struct.pack("<I", d))
            f.write(data.tobytes())


def load_checkpoint(path) -> dict[str, np.ndarray]:
    """Inverse of save_checkpoint; raises CheckpointError on corruption."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"bad magic in {path}")
    tensors: dict[str, np.ndarray] = {}
    off = len(MAGIC)

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(raw):
            raise CheckpointError(f"truncated checkpoint {path}")
        out = raw[off : off + n]
        off += n
        return out

    while off < len(raw):
        (nlen,) = struct.unpack("<I", take(4))
        name = take(nlen).decode("utf-8")
        (rank,) = struct.unpack("<I", take(4))
        dims = [struct.unpack("<I", take(4))[0] for _ in range(rank)]
        count = int(np.prod(dims)) if dims else 1
        payload = take(4 * count)
        tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    return tensors


def mlp_tensors(prefix: str, mlp: MLP) -> dict[str, np.ndarray]:
    out = {}
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        out[f"{prefix}.w{i}"] = w
        out[f"{prefix}.b{i}"] = b
    return out


def mlp_from_tensors(prefix: str, tensors: dict[str, np.ndarray], head: str) -> MLP:
    ws, bs, i = [], [], 0
    while f"{prefix}.w{i}" in tensors:
        ws.append(tensors[f"{prefix}.w{i}"])
        bs.append(tensors[f"{prefix}.b{i}"])
        i += 1
    if not ws:
        raise CheckpointError(f"no tensors with prefix {prefix!r}")
    return MLP(weights=ws, biases=bs, head=head)
