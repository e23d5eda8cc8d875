"""Mock remote attestation for the aggregation pipeline.

A real deployment would attest enclave hardware; here the prover holds a
pre-shared device key and answers a client nonce with a keyed MAC over
(measurement || nonce).  The measurement is a SHA-256 digest of the pipeline
build artifact, which clients are assumed to know out of band.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from pathlib import Path

NONCE_LEN = 16
MEASUREMENT_LEN = 32
MAC_LEN = 32
QUOTE_LEN = NONCE_LEN + MEASUREMENT_LEN + MAC_LEN

# The modules whose code constitutes "the pipeline" for measurement purposes.
_PIPELINE_MODULES = (
    "aggregate.py",
    "clustering.py",
    "cosine.py",
    "models.py",
    "numeric.py",
    "pipeline.py",
    "preprocess.py",
    "rng.py",
)


@dataclass(frozen=True)
class AttestationQuote:
    nonce: bytes
    measurement: bytes
    mac: bytes

    def __post_init__(self):
        if len(self.nonce) != NONCE_LEN:
            raise ValueError(f"nonce must be {NONCE_LEN} bytes")
        if len(self.measurement) != MEASUREMENT_LEN:
            raise ValueError(f"measurement must be {MEASUREMENT_LEN} bytes")
        if len(self.mac) != MAC_LEN:
            raise ValueError(f"mac must be {MAC_LEN} bytes")

    def to_bytes(self) -> bytes:
        return self.nonce + self.measurement + self.mac

    @classmethod
    def from_bytes(cls, data: bytes) -> "AttestationQuote":
        if len(data) != QUOTE_LEN:
            raise ValueError(f"quote must be {QUOTE_LEN} bytes, got {len(data)}")
        return cls(
            nonce=data[:NONCE_LEN],
            measurement=data[NONCE_LEN : NONCE_LEN + MEASUREMENT_LEN],
            mac=data[NONCE_LEN + MEASUREMENT_LEN :],
        )


def quote_mac(device_key: bytes, measurement: bytes, nonce: bytes) -> bytes:
    return hmac.new(device_key, measurement + nonce, hashlib.sha256).digest()


def make_quote(device_key: bytes, measurement: bytes, nonce: bytes) -> AttestationQuote:
    """Answer a client challenge; the MAC binds the measurement to the nonce."""
    return AttestationQuote(
        nonce=nonce,
        measurement=measurement,
        mac=quote_mac(device_key, measurement, nonce),
    )


def verify_quote(
    quote: AttestationQuote,
    device_key: bytes,
    expected_measurement: bytes,
    expected_nonce: bytes,
) -> bool:
    """Accept iff the nonce is ours, the measurement matches, and the MAC checks.

    The nonce comparison is what defeats replayed quotes.
    """
    if quote.nonce != expected_nonce:
        return False
    if quote.measurement != expected_measurement:
        return False
    expected_mac = quote_mac(device_key, quote.measurement, quote.nonce)
    return hmac.compare_digest(expected_mac, quote.mac)


def pipeline_measurement() -> bytes:
    """SHA-256 over the pipeline module sources, in fixed name order."""
    package_dir = Path(__file__).resolve().parent.parent
    digest = hashlib.sha256()
    for name in _PIPELINE_MODULES:
        digest.update(name.encode())
        digest.update((package_dir / name).read_bytes())
    return digest.digest()
