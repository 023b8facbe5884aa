"""From-scratch feedforward autoencoder for anomaly detection and denoising.

Five layer sizes [d, h, b, h, d] with a strict bottleneck b < d, leaky
rectifier hidden units, identity output.  Training is mini-batch gradient
descent with momentum on mean squared reconstruction error, fully
deterministic under the configured seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .flows import fmt

LEAKY_SLOPE = 0.01
MODEL_FORMAT = "mlp-v1"


def _leaky(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, z, LEAKY_SLOPE * z)


def _leaky_grad(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, 1.0, LEAKY_SLOPE)


@dataclass
class TrainConfig:
    learning_rate: float = 0.02
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 200
    seed: int = 0
    # None means per-layer Glorot scale sqrt(6 / (fan_in + fan_out))
    init_scale: float | None = None

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class Mlp:
    """Bottlenecked reconstruction network.

    Holds one weight matrix (out x in) and bias vector per affine layer.
    The middle activation is the latent code.
    """

    def __init__(self, weights, biases, allow_wide_bottleneck: bool = False):
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        if len(self.weights) != 4 or len(self.biases) != 4:
            raise ValueError("expected 4 affine layers (sizes [d, h, b, h, d])")
        sizes = self.layer_sizes
        if sizes[0] != sizes[-1]:
            raise ValueError("input and output widths must match")
        if not allow_wide_bottleneck and sizes[2] >= sizes[0]:
            raise ValueError(
                f"bottleneck {sizes[2]} must be strictly smaller than input {sizes[0]}")
        for w, b in zip(self.weights, self.biases):
            if w.shape[0] != b.shape[0]:
                raise ValueError("bias length must match weight rows")
        for prev, nxt in zip(self.weights, self.weights[1:]):
            if nxt.shape[1] != prev.shape[0]:
                raise ValueError("adjacent layer shapes do not chain")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    @classmethod
    def random(cls, layer_sizes, seed: int = 0, init_scale: float | None = None,
               allow_wide_bottleneck: bool = False) -> "Mlp":
        """Glorot-style uniform initialization, deterministic under seed."""
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) != 5:
            raise ValueError("layer_sizes must be [d, h, b, h, d]")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            scale = init_scale
            if scale is None:
                scale = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-scale, scale, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, allow_wide_bottleneck=allow_wide_bottleneck)

    def _forward_batch(self, x: np.ndarray):
        """Returns pre-activations and activations per layer; x is (n, d)."""
        pre, acts = [], [x]
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            pre.append(z)
            a = z if i == last else _leaky(z)
            acts.append(a)
        return pre, acts

    def forward(self, x) -> np.ndarray:
        """Reconstruction of a single input vector."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.layer_sizes[0],):
            raise ValueError(
                f"input has shape {x.shape}, expected ({self.layer_sizes[0]},)")
        _, acts = self._forward_batch(x[None, :])
        return acts[-1][0]

    def encode(self, x) -> np.ndarray:
        """Bottleneck activation (the latent representation)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.layer_sizes[0],):
            raise ValueError(
                f"input has shape {x.shape}, expected ({self.layer_sizes[0]},)")
        _, acts = self._forward_batch(x[None, :])
        return acts[2][0]

    def reconstruction_error(self, x) -> float:
        """Mean squared error between x and its reconstruction."""
        x = np.asarray(x, dtype=float)
        y = self.forward(x)
        return float(np.mean((x - y) ** 2))

    def detect(self, x, threshold: float) -> bool:
        """True when reconstruction error exceeds the calibrated threshold."""
        return self.reconstruction_error(x) > threshold

    def denoise(self, x) -> np.ndarray:
        """Reconstruction used as a cleaned-up stand-in for the input."""
        return self.forward(x)

    def loss_and_gradients(self, batch: np.ndarray):
        """MSE loss over the batch and gradients for every weight and bias."""
        x = np.asarray(batch, dtype=float)
        pre, acts = self._forward_batch(x)
        n, d = x.shape
        diff = acts[-1] - x
        loss = float(np.mean(diff ** 2))
        grad_out = 2.0 * diff / (n * d)
        grads = [None] * len(self.weights)
        last = len(self.weights) - 1
        dz = grad_out
        for i in range(last, -1, -1):
            if i != last:
                dz = dz * _leaky_grad(pre[i])
            grads[i] = (dz.T @ acts[i], dz.sum(axis=0))
            if i > 0:
                dz = dz @ self.weights[i]
        return loss, grads

    def dumps(self) -> str:
        """Versioned plain-text serialization; round-trips exactly."""
        lines = [MODEL_FORMAT, " ".join(str(s) for s in self.layer_sizes)]
        for w, b in zip(self.weights, self.biases):
            for row in w:
                lines.append(" ".join(fmt(v) for v in row))
            lines.append(" ".join(fmt(v) for v in b))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Mlp":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != MODEL_FORMAT:
            raise ValueError(f"unrecognized model format (expected {MODEL_FORMAT!r})")
        sizes = tuple(int(s) for s in lines[1].split())
        weights, biases = [], []
        pos = 2
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            rows = []
            for _ in range(fan_out):
                rows.append([float(v) for v in lines[pos].split()])
                pos += 1
            weights.append(np.array(rows))
            biases.append(np.array([float(v) for v in lines[pos].split()]))
            pos += 1
        if pos != len(lines):
            raise ValueError("trailing data after model parameters")
        return cls(weights, biases, allow_wide_bottleneck=True)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "Mlp":
        return cls.loads(Path(path).read_text())


def train(m: Mlp, data, cfg: TrainConfig) -> list[float]:
    """Mini-batch gradient descent with momentum; trains m in place.

    Returns the full-data loss after each epoch.  Identical seeds give
    identical histories.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.size == 0:
        raise ValueError("training data must be nonempty")
    if x.shape[1] != m.layer_sizes[0]:
        raise ValueError(
            f"training vectors have width {x.shape[1]}, model expects {m.layer_sizes[0]}")
    rng = np.random.default_rng(cfg.seed)
    velocity = [(np.zeros_like(w), np.zeros_like(b))
                for w, b in zip(m.weights, m.biases)]
    history = []
    n = len(x)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = x[order[start:start + cfg.batch_size]]
            _, grads = m.loss_and_gradients(batch)
            for i, (dw, db) in enumerate(grads):
                vw, vb = velocity[i]
                vw = cfg.momentum * vw - cfg.learning_rate * dw
                vb = cfg.momentum * vb - cfg.learning_rate * db
                velocity[i] = (vw, vb)
                m.weights[i] = m.weights[i] + vw
                m.biases[i] = m.biases[i] + vb
        loss, _ = m.loss_and_gradients(x)
        history.append(loss)
    return history


def detection_threshold(m: Mlp, normal_data) -> float:
    """Three-sigma threshold over reconstruction errors of held-out normal data."""
    errors = np.array([m.reconstruction_error(x) for x in np.asarray(normal_data, dtype=float)])
    if errors.size == 0:
        raise ValueError("need at least one calibration vector")
    return float(errors.mean() + 3.0 * errors.std())


def train_autoencoder(data, layer_sizes, cfg: TrainConfig) -> tuple[Mlp, list[float]]:
    """Convenience: build a seeded network and train it on the data."""
    m = Mlp.random(layer_sizes, seed=cfg.seed, init_scale=cfg.init_scale)
    history = train(m, data, cfg)
    return m, history
