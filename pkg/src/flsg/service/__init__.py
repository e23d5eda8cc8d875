"""Attested scheduler service: framed wire protocol, mock-TEE attestation,
per-client AEAD sessions, the unified-key model store, and the TCP
server/client pair that drive a defended aggregation round."""

from .attestation import AttestationQuote, make_quote, pipeline_measurement, verify_quote
from .client import FlClient
from .server import SchedulerServer, ServiceConfig
from .store import ModelStore
from .wire import ErrorCode, MsgType

__all__ = [
    "AttestationQuote",
    "ErrorCode",
    "FlClient",
    "ModelStore",
    "MsgType",
    "SchedulerServer",
    "ServiceConfig",
    "make_quote",
    "pipeline_measurement",
    "verify_quote",
]
