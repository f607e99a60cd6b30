"""Fully-connected syndrome -> logical-label decoder, written directly in numpy.

ReLU hidden layers, logistic outputs, mean binary cross-entropy loss, Adam.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2
from .channel import SyndromeExtractor, iter_error_chunks
from .codes import CodeSpec
from .decoders import DecodeResult

MAGIC = b"SMHCMLP\x00"
FORMAT_VERSION = 1


class TrainingError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass
class MlpSpec:
    level: int
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    @property
    def output_dim(self) -> int:
        return self.dims[-1]

    def copy(self) -> "MlpSpec":
        return MlpSpec(self.level, [w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class TrainConfig:
    p_train: float = 0.04
    num_samples: int = 1 << 20
    batch_size: int = 512
    learning_rate: float = 1e-3
    lr_decay: float = 0.7  # multiplicative, applied after every epoch
    epochs: int = 6
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainResult:
    spec: MlpSpec
    loss_history: list[float] = field(default_factory=list)


def default_dims(level: int, hidden_layers: int = 3, hidden_width: int | None = None) -> list[int]:
    width = hidden_width or 16 * 3**level
    return [3**level - 2**level] + [width] * hidden_layers + [2**level]


def init_mlp(level: int, seed: int = 0, dims: list[int] | None = None) -> MlpSpec:
    """He-style uniform initialization from a seeded stream; zero biases."""
    dims = dims or default_dims(level)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpSpec(level, weights, biases)


def zero_mlp(level: int, dims: list[int] | None = None) -> MlpSpec:
    dims = dims or default_dims(level)
    return MlpSpec(
        level,
        [np.zeros((a, b)) for a, b in zip(dims[:-1], dims[1:])],
        [np.zeros(b) for b in dims[1:]],
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def forward(spec: MlpSpec, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Returns output logits and the per-layer activations (inputs first)."""
    acts = [np.asarray(x, dtype=np.float64)]
    h = acts[0]
    last = len(spec.weights) - 1
    for i, (w, b) in enumerate(zip(spec.weights, spec.biases)):
        z = h @ w + b
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return h, acts


def bce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^z) - y z, stable for either sign of z
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def loss_and_grads(spec: MlpSpec, x: np.ndarray, y: np.ndarray) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean binary cross-entropy over batch and output bits, with parameter gradients."""
    y = np.asarray(y, dtype=np.float64)
    logits, acts = forward(spec, x)
    loss = bce_from_logits(logits, y)
    delta = (_sigmoid(logits) - y) / y.size
    gw: list[np.ndarray] = [None] * len(spec.weights)  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * len(spec.weights)  # type: ignore[list-item]
    for i in range(len(spec.weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ spec.weights[i].T) * (acts[i] > 0)
    return loss, gw, gb


def dataset_loss(spec: MlpSpec, x: np.ndarray, y: np.ndarray, chunk: int = 1 << 16) -> float:
    total = 0.0
    for lo in range(0, len(x), chunk):
        logits, _ = forward(spec, x[lo : lo + chunk])
        yy = y[lo : lo + chunk].astype(np.float64)
        total += float(np.sum(np.logaddexp(0.0, logits) - yy * logits))
    return total / (len(x) * y.shape[1])


def generate_dataset(code: CodeSpec, p_train: float, num_samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Syndrome bits (inputs) and ground-truth label bits (targets) as uint8 arrays."""
    ext = SyndromeExtractor(code)
    xs, ys = [], []
    for chunk in iter_error_chunks(p_train, code.n, seed, 0, num_samples):
        batch = ext.label_batch(chunk)
        xs.append(batch.syndromes)
        ys.append(batch.labels)
    if not xs:
        return np.zeros((0, code.num_syndrome_bits), np.uint8), np.zeros((0, code.k), np.uint8)
    return np.concatenate(xs), np.concatenate(ys)


def train(spec: MlpSpec, cfg: TrainConfig, x: np.ndarray, y: np.ndarray) -> TrainResult:
    """Mini-batch Adam on mean BCE. ``loss_history[0]`` is the loss before any update."""
    if x.shape[1] != spec.input_dim or y.shape[1] != spec.output_dim:
        raise ValueError(f"dataset shape {x.shape[1]}->{y.shape[1]} does not match network {spec.dims}")
    if len(x) == 0:
        raise ValueError("empty dataset")
    spec = spec.copy()
    rng = np.random.default_rng(cfg.seed)
    params = spec.weights + spec.biases
    m1 = [np.zeros_like(a) for a in params]
    m2 = [np.zeros_like(a) for a in params]
    step = 0
    lr = cfg.learning_rate
    history = [dataset_loss(spec, x, y)]
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(x))
        for lo in range(0, len(x), cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            loss, gw, gb = loss_and_grads(spec, x[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss {loss} at epoch {epoch}, step {step}")
            step += 1
            c1 = 1 - cfg.beta1**step
            c2 = 1 - cfg.beta2**step
            for a, g, ma, va in zip(params, gw + gb, m1, m2):
                ma *= cfg.beta1
                ma += (1 - cfg.beta1) * g
                va *= cfg.beta2
                va += (1 - cfg.beta2) * g * g
                a -= lr * (ma / c1) / (np.sqrt(va / c2) + cfg.eps)
        lr *= cfg.lr_decay
        history.append(dataset_loss(spec, x, y))
        if not np.isfinite(history[-1]):
            raise TrainingError(f"training diverged after epoch {epoch}: loss {history[-1]}")
    return TrainResult(spec, history)


def predict_proba(spec: MlpSpec, syndromes: np.ndarray) -> np.ndarray:
    logits, _ = forward(spec, np.atleast_2d(syndromes))
    return _sigmoid(logits)


def predict(spec: MlpSpec, syndromes: np.ndarray) -> np.ndarray:
    """Label bits; an output of exactly 0.5 maps to 1."""
    return (predict_proba(spec, syndromes) >= 0.5).astype(np.uint8)


def predict_one(spec: MlpSpec, syndrome) -> DecodeResult:
    q = predict_proba(spec, np.asarray(list(syndrome), dtype=np.uint8)[None, :])[0]
    bits = q >= 0.5
    posterior = float(np.prod(np.where(bits, q, 1 - q)))
    return DecodeResult(gf2.from_bits(bits.astype(int)), spec.output_dim, posterior, bool(np.any(q == 0.5)))


class NeuralDecoder:
    def __init__(self, spec: MlpSpec):
        self.spec = spec

    def decode(self, syndrome) -> DecodeResult:
        if isinstance(syndrome, (int, np.integer)):
            syndrome = gf2.to_bits(int(syndrome), self.spec.input_dim)
        return predict_one(self.spec, syndrome)

    def decode_batch(self, syndromes: np.ndarray) -> np.ndarray:
        out = np.empty(len(syndromes), dtype=np.int64)
        for lo in range(0, len(syndromes), 1 << 16):
            out[lo : lo + (1 << 16)] = gf2.bits_to_keys(predict(self.spec, syndromes[lo : lo + (1 << 16)]))
        return out


# -- model files --------------------------------------------------------------------


def model_bytes(spec: MlpSpec) -> bytes:
    dims = spec.dims
    parts = [MAGIC, struct.pack("<III", FORMAT_VERSION, spec.level, len(spec.weights))]
    parts.append(struct.pack(f"<{len(dims)}I", *dims))
    for w, b in zip(spec.weights, spec.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    return b"".join(parts)


def save_model(spec: MlpSpec, path) -> None:
    Path(path).write_bytes(model_bytes(spec))


def parse_model(data: bytes) -> MlpSpec:
    def take(nbytes: int) -> bytes:
        nonlocal pos
        if pos + nbytes > len(data):
            raise ModelFormatError("model file is truncated")
        out = data[pos : pos + nbytes]
        pos += nbytes
        return out

    pos = 0
    if take(len(MAGIC)) != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, level, n_layers = struct.unpack("<III", take(12))
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    if not 1 <= n_layers <= 64:
        raise ModelFormatError(f"implausible layer count {n_layers}")
    dims = list(struct.unpack(f"<{n_layers + 1}I", take(4 * (n_layers + 1))))
    weights, biases = [], []
    for a, b in zip(dims[:-1], dims[1:]):
        weights.append(np.frombuffer(take(8 * a * b), dtype="<f8").astype(np.float64).reshape(a, b))
        biases.append(np.frombuffer(take(8 * b), dtype="<f8").astype(np.float64))
    if pos != len(data):
        raise ModelFormatError("trailing bytes after model parameters")
    return MlpSpec(level, weights, biases)


def load_model(path, code: CodeSpec | None = None) -> MlpSpec:
    spec = parse_model(Path(path).read_bytes())
    if code is not None:
        check_compatible(spec, code)
    return spec


def check_compatible(spec: MlpSpec, code: CodeSpec) -> None:
    if spec.level != code.level or spec.input_dim != code.num_syndrome_bits or spec.output_dim != code.k:
        raise ModelFormatError(
            f"dimension mismatch: model is level {spec.level} ({spec.input_dim}->{spec.output_dim}), "
            f"code is level {code.level} ({code.num_syndrome_bits}->{code.k})"
        )
