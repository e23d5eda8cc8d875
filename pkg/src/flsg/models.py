"""Domain types and the FLSG binary model format.

Models travel between clients and the aggregator as flat float32 parameter
vectors; whoever produces them is responsible for flattening deterministically.
Layer structure never enters the pipeline.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    LengthMismatch,
    NonFiniteValue,
    UnsupportedDtype,
    UnsupportedVersion,
)

MAGIC = b"FLSG"
FORMAT_VERSION = 0x01
DTYPE_F32 = 0x01
HEADER = struct.Struct("<4sBBI")  # magic, version, dtype, param count


def _as_f32_vector(values, *, what: str) -> np.ndarray:
    # Owned copy: freezing a caller's array would be a surprising side effect.
    arr = np.array(values, dtype=np.float32, order="C", copy=True)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{what} must be a flat vector, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatch(f"{what} must hold at least one parameter")
    arr.flags.writeable = False
    return arr


class ModelVector:
    """A flat, ordered vector of finite float32 model parameters."""

    __slots__ = ("params",)

    def __init__(self, params):
        arr = _as_f32_vector(params, what="model")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValue("model parameters must be finite")
        self.params: np.ndarray = arr

    @property
    def param_count(self) -> int:
        return int(self.params.size)

    def __len__(self) -> int:
        return self.param_count

    def __eq__(self, other) -> bool:
        # Bitwise equality: serialization must be a bijection, so -0.0 != 0.0.
        if not isinstance(other, ModelVector):
            return NotImplemented
        return self.params.tobytes() == other.params.tobytes()

    def __hash__(self):
        return hash(self.params.tobytes())

    def __repr__(self) -> str:
        return f"ModelVector(p={self.param_count})"


@dataclass(frozen=True)
class DifferentialVector:
    """Per-client update direction: local model minus global model, in float32."""

    client_index: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_f32_vector(self.values, what="differential vector"))
        if self.client_index < 0:
            raise ValueError("client_index must be non-negative")


@dataclass(frozen=True)
class L2Norms:
    """Client-indexed Euclidean norms of the differential vectors (float64)."""

    norms: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.norms, dtype=np.float64)
        if arr.ndim != 1:
            raise DimensionMismatch("norms must be a flat vector")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise ValueError("norms must be finite and non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "norms", arr)

    def __len__(self) -> int:
        return int(self.norms.size)


class CosineDistanceMatrix:
    """Symmetric n-by-n matrix of pairwise cosine distances with a zero diagonal."""

    __slots__ = ("n", "entries")

    def __init__(self, entries: np.ndarray):
        arr = np.ascontiguousarray(entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got {arr.shape}")
        arr.flags.writeable = False
        self.entries = arr
        self.n = int(arr.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CosineDistanceMatrix):
            return NotImplemented
        return self.entries.tobytes() == other.entries.tobytes()

    def __hash__(self):
        return hash(self.entries.tobytes())

    def to_csv(self) -> str:
        """Row-major CSV rendering with 17 significant digits per entry."""
        lines = [",".join(f"{v:.17g}" for v in row) for row in self.entries]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClusterLabels:
    """Benign(1)/noise(0) marks per client.  accepted_count == 0 means the
    clustering found no majority cluster (the all-noise outcome)."""

    labels: tuple
    accepted_count: int = field(init=False)

    def __post_init__(self):
        labels = tuple(int(v) for v in self.labels)
        if any(v not in (0, 1) for v in labels):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "accepted_count", sum(labels))

    @property
    def all_noise(self) -> bool:
        return self.accepted_count == 0

    def accepted_indices(self) -> list:
        return [i for i, v in enumerate(self.labels) if v == 1]

    def __len__(self) -> int:
        return len(self.labels)


def min_cluster_size_for(n: int) -> int:
    """Smallest admissible majority-cluster size: floor(n/2) + 1."""
    return n // 2 + 1


@dataclass(frozen=True)
class RoundConfig:
    """Static per-round parameters shared by every pipeline stage.

    ``noise_range`` scales the Gaussian noise; by default the standard
    deviation is noise_range * median_norm, or noise_range alone when
    ``absolute_sigma`` is set.  ``accept_all_on_no_cluster`` controls the
    fallback when the clustering returns all-noise: accept every model
    (clipping and noising still apply) instead of failing the round.
    """

    n: int
    p: int
    cascade_stages: int = 4
    noise_range: float = 0.001
    rng_seed: int = 0
    absolute_sigma: bool = False
    accept_all_on_no_cluster: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.cascade_stages < 1:
            raise ValueError("cascade_stages must be >= 1")
        if not (self.noise_range >= 0.0):
            raise ValueError("noise_range must be >= 0")
        if not (0 <= self.rng_seed < 2**64):
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    @property
    def min_cluster_size(self) -> int:
        return min_cluster_size_for(self.n)


# -- FLSG wire format --------------------------------------------------------

def serialize_model(model: ModelVector) -> bytes:
    """Encode a model as magic, version, dtype, u32-LE count, f32-LE params."""
    header = HEADER.pack(MAGIC, FORMAT_VERSION, DTYPE_F32, model.param_count)
    return header + model.params.astype("<f4", copy=False).tobytes()


def deserialize_model(data: bytes) -> ModelVector:
    """Inverse of :func:`serialize_model`; rejects malformed byte images."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not an FLSG model image")
    if len(data) < HEADER.size:
        raise LengthMismatch("truncated FLSG header")
    _, version, dtype, count = HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"unsupported format version {version:#x}")
    if dtype != DTYPE_F32:
        raise UnsupportedDtype(f"unsupported dtype byte {dtype:#x}")
    payload = data[HEADER.size:]
    if len(payload) != 4 * count:
        raise LengthMismatch(
            f"declared {count} parameters ({4 * count} bytes) but payload has {len(payload)} bytes"
        )
    if count == 0:
        raise LengthMismatch("model must declare at least one parameter")
    params = np.frombuffer(payload, dtype="<f4")
    if not np.all(np.isfinite(params)):
        raise NonFiniteValue("model payload contains NaN or Inf")
    return ModelVector(params)
