"""Length-prefixed binary framing for the scheduler protocol.

Frame layout: magic "FLG1", one message-type byte, payload length as 32-bit
little-endian unsigned, then the payload.  Payloads above 256 MiB are
rejected before allocation.
"""

from __future__ import annotations

import socket
import struct
from enum import IntEnum

from ..errors import FrameError

MAGIC = b"FLG1"
MAX_PAYLOAD = 256 * 1024 * 1024
_HEADER = struct.Struct("<4sBI")


class MsgType(IntEnum):
    ATTEST_REQ = 0x01
    ATTEST_RESP = 0x02
    KEYX_REQ = 0x03
    KEYX_RESP = 0x04
    MODEL_SUBMIT = 0x05
    SUBMIT_ACK = 0x06
    GLOBAL_MODEL = 0x07
    ERROR = 0x7F


class ErrorCode(IntEnum):
    PROTOCOL_ORDER = 0x0001
    AUTH_FAILURE = 0x0002
    DUPLICATE_SUBMISSION = 0x0003
    DIMENSION_MISMATCH = 0x0004
    UNKNOWN_ROUND = 0x0005
    INSUFFICIENT_MODELS = 0x0006
    BAD_FRAME = 0x0007
    BAD_MODEL = 0x0008
    INTERNAL = 0x00FF


def pack_frame(msg_type: MsgType, payload: bytes) -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise FrameError(f"payload of {len(payload)} bytes exceeds the 256 MiB limit")
    return _HEADER.pack(MAGIC, int(msg_type), len(payload)) + payload


def pack_error(code: ErrorCode) -> bytes:
    return pack_frame(MsgType.ERROR, struct.pack("<H", int(code)))


def parse_error(payload: bytes) -> ErrorCode:
    if len(payload) != 2:
        raise FrameError("error frame payload must be exactly 2 bytes")
    return ErrorCode(struct.unpack("<H", payload)[0])


def recv_exactly(sock: socket.socket, count: int) -> bytes:
    chunks = []
    remaining = count
    while remaining > 0:
        chunk = sock.recv(remaining)
        if not chunk:
            raise ConnectionError("peer closed the connection mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def recv_frame(sock: socket.socket) -> tuple[MsgType, bytes]:
    header = recv_exactly(sock, _HEADER.size)
    magic, type_byte, length = _HEADER.unpack(header)
    if magic != MAGIC:
        raise FrameError("bad frame magic")
    try:
        msg_type = MsgType(type_byte)
    except ValueError:
        raise FrameError(f"unknown message type {type_byte:#x}") from None
    if length > MAX_PAYLOAD:
        raise FrameError(f"declared payload of {length} bytes exceeds the 256 MiB limit")
    return msg_type, recv_exactly(sock, length)


def send_frame(sock: socket.socket, msg_type: MsgType, payload: bytes) -> None:
    sock.sendall(pack_frame(msg_type, payload))
