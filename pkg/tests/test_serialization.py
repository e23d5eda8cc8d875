import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flsg.errors import (
    BadMagic,
    DimensionMismatch,
    LengthMismatch,
    NonFiniteValue,
    UnsupportedDtype,
    UnsupportedVersion,
)
from flsg.models import ModelVector, deserialize_model, serialize_model

from conftest import random_model


def test_header_layout_single_zero():
    data = serialize_model(ModelVector([0.0]))
    # magic(4) + version(1) + dtype(1) + count(4) + one f32
    assert len(data) == 14
    assert data[:4] == b"FLSG"
    assert data[4] == 0x01
    assert data[5] == 0x01
    assert struct.unpack("<I", data[6:10]) == (1,)
    assert data[10:] == b"\x00\x00\x00\x00"


def test_ieee_payload_bytes():
    data = serialize_model(ModelVector([1.0, -2.5]))
    assert data[10:] == bytes.fromhex("0000803f000020c0")


def test_round_trip_random(rng):
    for _ in range(100):
        model = random_model(rng, int(rng.integers(1, 200)))
        assert deserialize_model(serialize_model(model)) == model


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(width=32, allow_nan=False, allow_infinity=False), min_size=1, max_size=64))
def test_round_trip_is_byte_bijection(values):
    model = ModelVector(values)
    image = serialize_model(model)
    back = deserialize_model(image)
    assert back == model
    assert serialize_model(back) == image


def test_bad_magic():
    data = b"XXXX" + serialize_model(ModelVector([1.0]))[4:]
    with pytest.raises(BadMagic):
        deserialize_model(data)


def test_truncated_input_is_bad_magic():
    with pytest.raises(BadMagic):
        deserialize_model(b"FL")


def test_unsupported_version():
    data = bytearray(serialize_model(ModelVector([1.0])))
    data[4] = 0x02
    with pytest.raises(UnsupportedVersion):
        deserialize_model(bytes(data))


def test_unsupported_dtype():
    data = bytearray(serialize_model(ModelVector([1.0])))
    data[5] = 0x02
    with pytest.raises(UnsupportedDtype):
        deserialize_model(bytes(data))


def test_length_mismatch():
    # header declares two parameters but only one is present
    data = struct.pack("<4sBBI", b"FLSG", 1, 1, 2) + b"\x00" * 4
    with pytest.raises(LengthMismatch):
        deserialize_model(data)


def test_truncated_header_is_length_mismatch():
    with pytest.raises(LengthMismatch):
        deserialize_model(b"FLSG\x01")


def test_non_finite_payload():
    data = struct.pack("<4sBBI", b"FLSG", 1, 1, 1) + struct.pack("<f", float("inf"))
    with pytest.raises(NonFiniteValue):
        deserialize_model(data)
    with pytest.raises(NonFiniteValue):
        ModelVector([float("nan")])


def test_zero_parameters_rejected():
    data = struct.pack("<4sBBI", b"FLSG", 1, 1, 0)
    with pytest.raises(LengthMismatch):
        deserialize_model(data)
    with pytest.raises(DimensionMismatch):
        ModelVector([])


def test_negative_zero_survives():
    model = ModelVector([-0.0, 0.0])
    back = deserialize_model(serialize_model(model))
    assert back == model
    assert np.signbit(back.params[0])
    assert not np.signbit(back.params[1])


def test_params_are_immutable(rng):
    model = random_model(rng, 8)
    with pytest.raises(ValueError):
        model.params[0] = 1.0
