"""Client side of the scheduler protocol.

Drives the handshake in order: challenge the scheduler's attestation, verify
the quote against the expected pipeline measurement, run the ephemeral key
exchange, then submit models and wait for the aggregated result inside the
authenticated session.
"""

from __future__ import annotations

import secrets
import socket
import struct

from ..errors import (
    AttestationFailure,
    AuthFailure,
    DimensionMismatch,
    DuplicateSubmission,
    FrameError,
    InsufficientModels,
    ProtocolError,
    ProtocolOrderViolation,
    UnknownRound,
)
from ..models import ModelVector, deserialize_model, serialize_model
from .attestation import AttestationQuote, NONCE_LEN, verify_quote
from .session import PUBLIC_KEY_LEN, SessionCrypto, derive_session_key, generate_keypair
from .wire import ErrorCode, MsgType, parse_error, recv_frame, send_frame

_SUBMIT_HEADER = struct.Struct("<Q")

_ERROR_EXCEPTIONS = {
    ErrorCode.PROTOCOL_ORDER: ProtocolOrderViolation,
    ErrorCode.AUTH_FAILURE: AuthFailure,
    ErrorCode.DUPLICATE_SUBMISSION: DuplicateSubmission,
    ErrorCode.DIMENSION_MISMATCH: DimensionMismatch,
    ErrorCode.UNKNOWN_ROUND: UnknownRound,
    ErrorCode.INSUFFICIENT_MODELS: InsufficientModels,
}


def raise_for_error(code: ErrorCode):
    raise _ERROR_EXCEPTIONS.get(code, ProtocolError)(f"scheduler reported {code.name}")


class FlClient:
    def __init__(self, host: str, port: int, device_key: bytes, expected_measurement: bytes):
        self.host = host
        self.port = port
        self.device_key = device_key
        self.expected_measurement = expected_measurement
        self.sock: socket.socket | None = None
        self.crypto: SessionCrypto | None = None
        self.client_id: int | None = None

    def __enter__(self):
        self.connect()
        return self

    def __exit__(self, *exc):
        self.close()

    def connect(self) -> None:
        self.sock = socket.create_connection((self.host, self.port))

    def close(self) -> None:
        if self.sock is not None:
            try:
                self.sock.close()
            except OSError:
                pass
            self.sock = None

    def _exchange(self, msg_type: MsgType, payload: bytes) -> tuple[MsgType, bytes]:
        assert self.sock is not None, "not connected"
        send_frame(self.sock, msg_type, payload)
        resp_type, resp = recv_frame(self.sock)
        if resp_type == MsgType.ERROR:
            raise_for_error(parse_error(resp))
        return resp_type, resp

    def attest(self, nonce: bytes | None = None) -> AttestationQuote:
        """Challenge the scheduler; raises AttestationFailure on a bad quote."""
        nonce = secrets.token_bytes(NONCE_LEN) if nonce is None else nonce
        resp_type, resp = self._exchange(MsgType.ATTEST_REQ, nonce)
        if resp_type != MsgType.ATTEST_RESP:
            raise FrameError(f"expected ATTEST_RESP, got {resp_type.name}")
        quote = AttestationQuote.from_bytes(resp)
        if not verify_quote(quote, self.device_key, self.expected_measurement, nonce):
            raise AttestationFailure("scheduler attestation did not verify")
        return quote

    def key_exchange(self) -> int:
        private, client_public = generate_keypair()
        resp_type, resp = self._exchange(MsgType.KEYX_REQ, client_public)
        if resp_type != MsgType.KEYX_RESP:
            raise FrameError(f"expected KEYX_RESP, got {resp_type.name}")
        if len(resp) != PUBLIC_KEY_LEN + 4:
            raise FrameError("malformed key-exchange response")
        server_public = resp[:PUBLIC_KEY_LEN]
        (client_id,) = struct.unpack("<I", resp[PUBLIC_KEY_LEN:])
        key = derive_session_key(
            private, server_public, client_public=client_public, server_public=server_public
        )
        self.crypto = SessionCrypto(key, is_server=False)
        self.client_id = client_id
        return client_id

    def handshake(self) -> int:
        """Attest then exchange keys; returns the assigned client id."""
        self.attest()
        return self.key_exchange()

    def submit_model(self, round_id: int, model: ModelVector) -> None:
        assert self.crypto is not None, "key exchange not completed"
        plaintext = _SUBMIT_HEADER.pack(round_id) + serialize_model(model)
        sealed = self.crypto.seal(plaintext, aad=bytes([MsgType.MODEL_SUBMIT]))
        resp_type, resp = self._exchange(MsgType.MODEL_SUBMIT, sealed)
        if resp_type != MsgType.SUBMIT_ACK:
            raise FrameError(f"expected SUBMIT_ACK, got {resp_type.name}")
        ack = self.crypto.open(resp, aad=bytes([MsgType.SUBMIT_ACK]))
        (acked_round,) = _SUBMIT_HEADER.unpack(ack)
        if acked_round != round_id:
            raise ProtocolError(f"scheduler acknowledged round {acked_round}, not {round_id}")

    def receive_global(self, timeout: float | None = 30.0) -> tuple[int, ModelVector]:
        assert self.sock is not None and self.crypto is not None
        self.sock.settimeout(timeout)
        try:
            resp_type, resp = recv_frame(self.sock)
        finally:
            self.sock.settimeout(None)
        if resp_type == MsgType.ERROR:
            raise_for_error(parse_error(resp))
        if resp_type != MsgType.GLOBAL_MODEL:
            raise FrameError(f"expected GLOBAL_MODEL, got {resp_type.name}")
        plaintext = self.crypto.open(resp, aad=bytes([MsgType.GLOBAL_MODEL]))
        (round_id,) = _SUBMIT_HEADER.unpack_from(plaintext)
        model = deserialize_model(plaintext[_SUBMIT_HEADER.size :])
        return round_id, model
