import socket
import struct
import threading

import pytest

from flsg.errors import FrameError
from flsg.service.wire import (
    ErrorCode,
    MAX_PAYLOAD,
    MsgType,
    pack_error,
    pack_frame,
    parse_error,
    recv_frame,
    send_frame,
)


def socket_pair():
    a, b = socket.socketpair()
    return a, b


def test_frame_layout():
    frame = pack_frame(MsgType.ATTEST_REQ, b"abc")
    assert frame[:4] == b"FLG1"
    assert frame[4] == 0x01
    assert struct.unpack("<I", frame[5:9]) == (3,)
    assert frame[9:] == b"abc"


def test_send_recv_round_trip():
    a, b = socket_pair()
    try:
        send_frame(a, MsgType.MODEL_SUBMIT, b"\x00" * 1000)
        msg_type, payload = recv_frame(b)
        assert msg_type == MsgType.MODEL_SUBMIT
        assert payload == b"\x00" * 1000
    finally:
        a.close()
        b.close()


def test_bad_magic_rejected():
    a, b = socket_pair()
    try:
        a.sendall(b"NOPE" + bytes(5))
        with pytest.raises(FrameError):
            recv_frame(b)
    finally:
        a.close()
        b.close()


def test_unknown_type_rejected():
    a, b = socket_pair()
    try:
        a.sendall(b"FLG1" + bytes([0x42]) + struct.pack("<I", 0))
        with pytest.raises(FrameError):
            recv_frame(b)
    finally:
        a.close()
        b.close()


def test_oversize_declared_payload_rejected():
    a, b = socket_pair()
    try:
        a.sendall(b"FLG1" + bytes([0x01]) + struct.pack("<I", MAX_PAYLOAD + 1))
        with pytest.raises(FrameError):
            recv_frame(b)
    finally:
        a.close()
        b.close()


def test_oversize_outgoing_payload_rejected():
    class Oversize(bytes):
        def __len__(self):
            return MAX_PAYLOAD + 1

    with pytest.raises(FrameError):
        pack_frame(MsgType.ATTEST_REQ, Oversize())


def test_eof_mid_frame():
    a, b = socket_pair()
    a.sendall(b"FLG1")
    a.close()
    try:
        with pytest.raises(ConnectionError):
            recv_frame(b)
    finally:
        b.close()


def test_fragmented_delivery():
    a, b = socket_pair()
    frame = pack_frame(MsgType.GLOBAL_MODEL, b"fragmented-payload")

    def dribble():
        for i in range(len(frame)):
            a.sendall(frame[i : i + 1])

    t = threading.Thread(target=dribble)
    t.start()
    try:
        msg_type, payload = recv_frame(b)
        assert msg_type == MsgType.GLOBAL_MODEL
        assert payload == b"fragmented-payload"
    finally:
        t.join()
        a.close()
        b.close()


def test_error_frame_round_trip():
    frame = pack_error(ErrorCode.DUPLICATE_SUBMISSION)
    assert frame[4] == 0x7F
    assert parse_error(frame[9:]) == ErrorCode.DUPLICATE_SUBMISSION
    with pytest.raises(FrameError):
        parse_error(b"\x01")
