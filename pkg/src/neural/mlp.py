"""
Dense Network
Two-hidden-layer perceptron (64 and 128 rectified units, linear output) with
manual forward and reverse-mode passes, plus a portable binary checkpoint format.
"""
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ContractViolation

logger = logging.getLogger(__name__)

HIDDEN_DIMS = (64, 128)
CHECKPOINT_FORMAT_VERSION = 1
_HEADER_LENGTH = struct.Struct("<I")


@dataclass
class MlpParams:
    """Weights (fan_in, fan_out) and biases per layer; x @ W + b orientation."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(HIDDEN_DIMS) + 1 or len(self.biases) != len(self.weights):
            raise ContractViolation(f"expected {len(HIDDEN_DIMS) + 1} dense layers")
        dims = self.layer_dims
        if tuple(dims[1:-1]) != HIDDEN_DIMS:
            raise ContractViolation(f"hidden widths must be {HIDDEN_DIMS}, got {tuple(dims[1:-1])}")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[k], dims[k + 1]) or b.shape != (dims[k + 1],):
                raise ContractViolation(f"layer {k} has inconsistent shapes {w.shape} / {b.shape}")

    @classmethod
    def init(cls, input_dim: int, output_dim: int, rng: np.random.Generator) -> "MlpParams":
        """Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases."""
        dims = (input_dim, *HIDDEN_DIMS, output_dim)
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights=weights, biases=biases)

    @property
    def layer_dims(self) -> Tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def arrays(self) -> List[np.ndarray]:
        """Layer-major parameter list: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> "MlpParams":
        return cls(weights=[np.asarray(a) for a in arrays[0::2]], biases=[np.asarray(a) for a in arrays[1::2]])

    def copy(self) -> "MlpParams":
        return MlpParams.from_arrays([a.copy() for a in self.arrays()])

    def zeros_like(self) -> "MlpParams":
        return MlpParams.from_arrays([np.zeros_like(a) for a in self.arrays()])

    def __add__(self, other: "MlpParams") -> "MlpParams":
        return MlpParams.from_arrays([a + b for a, b in zip(self.arrays(), other.arrays())])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


def _as_batch(params: MlpParams, x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    if batch.ndim != 2 or batch.shape[1] != params.input_dim:
        raise ContractViolation(f"input width {batch.shape[-1]} does not match network input {params.input_dim}")
    return batch, single


def _activations(params: MlpParams, batch: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Layer inputs and hidden pre-activations of one forward pass."""
    inputs, pre = [batch], []
    h = batch
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        if k < last:
            h = np.maximum(z, 0.0)
            inputs.append(h)
    return inputs, pre


def forward(params: MlpParams, x) -> np.ndarray:
    """Network output for one input vector or a (batch, input) matrix."""
    batch, single = _as_batch(params, x)
    _, pre = _activations(params, batch)
    out = pre[-1]
    return out[0] if single else out


def backward(params: MlpParams, x, upstream) -> Tuple[MlpParams, np.ndarray]:
    """
    Reverse-mode gradients of <upstream, forward(x)>.

    For a batch, parameter gradients are summed over rows and the input gradient
    keeps one row per sample.
    """
    batch, single = _as_batch(params, x)
    grad = np.asarray(upstream, dtype=float)
    grad = grad[None, :] if single else grad
    if grad.shape != (batch.shape[0], params.output_dim):
        raise ContractViolation(f"upstream gradient shape {grad.shape} does not match network output")

    inputs, pre = _activations(params, batch)
    weight_grads: List[np.ndarray] = [None] * len(params.weights)
    bias_grads: List[np.ndarray] = [None] * len(params.weights)
    for k in reversed(range(len(params.weights))):
        if k < len(params.weights) - 1:
            grad = grad * (pre[k] > 0.0)
        weight_grads[k] = inputs[k].T @ grad
        bias_grads[k] = grad.sum(axis=0)
        grad = grad @ params.weights[k].T

    grads = MlpParams(weights=weight_grads, biases=bias_grads)
    return grads, (grad[0] if single else grad)


def to_bytes(params: MlpParams, meta: Optional[Dict[str, Any]] = None) -> bytes:
    """
    Serialize as: 4-byte little-endian header length, UTF-8 JSON header, then every
    parameter as little-endian float64, layer-major (W row-major, then b).
    """
    header = json.dumps(
        {"format_version": CHECKPOINT_FORMAT_VERSION, "layer_dims": list(params.layer_dims), "meta": meta or {}},
        sort_keys=True,
    ).encode("utf-8")
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in params.arrays())
    return _HEADER_LENGTH.pack(len(header)) + header + body


def from_bytes(blob: bytes) -> Tuple[MlpParams, Dict[str, Any]]:
    (length,) = _HEADER_LENGTH.unpack_from(blob, 0)
    start = _HEADER_LENGTH.size
    header = json.loads(blob[start:start + length].decode("utf-8"))
    if header.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise ContractViolation(f"unsupported checkpoint format {header.get('format_version')}")
    dims = header["layer_dims"]
    values = np.frombuffer(blob, dtype="<f8", offset=start + length).astype(float)
    expected = sum(fan_in * fan_out + fan_out for fan_in, fan_out in zip(dims[:-1], dims[1:]))
    if values.size != expected:
        raise ContractViolation(f"checkpoint body holds {values.size} values, header promises {expected}")

    arrays, offset = [], 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        for shape in ((fan_in, fan_out), (fan_out,)):
            size = int(np.prod(shape))
            arrays.append(values[offset:offset + size].reshape(shape))
            offset += size
    return MlpParams.from_arrays(arrays), header["meta"]


def save_checkpoint(path, params: MlpParams, meta: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(to_bytes(params, meta))
    logger.debug("Saved checkpoint %s", path)
    return path


def load_checkpoint(path) -> Tuple[MlpParams, Dict[str, Any]]:
    return from_bytes(Path(path).read_bytes())
