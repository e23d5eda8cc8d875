"""Per-client session keys and record encryption.

Key agreement is ephemeral X25519; both sides feed the raw shared secret and
the handshake transcript (client public key || server public key) through
HKDF-SHA256 to a 32-byte session key.  Records are sealed with
ChaCha20-Poly1305 under a deterministic nonce: one direction byte, three zero
bytes, then a 64-bit big-endian counter that each side increments per record
sent.  A (key, nonce) pair is therefore never reused, and the frame's message
type rides as associated data so it cannot be swapped.
"""

from __future__ import annotations

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from ..errors import AuthFailure

SESSION_KEY_LEN = 32
PUBLIC_KEY_LEN = 32
DIR_CLIENT_TO_SERVER = 0x01
DIR_SERVER_TO_CLIENT = 0x02
_HKDF_INFO = b"flsg/session/v1"


def generate_keypair() -> tuple[X25519PrivateKey, bytes]:
    private = X25519PrivateKey.generate()
    return private, public_bytes(private)


def public_bytes(private: X25519PrivateKey) -> bytes:
    from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

    return private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def derive_session_key(
    private: X25519PrivateKey,
    peer_public: bytes,
    client_public: bytes,
    server_public: bytes,
) -> bytes:
    """HKDF over the X25519 shared secret, bound to the handshake transcript."""
    shared = private.exchange(X25519PublicKey.from_public_bytes(peer_public))
    return HKDF(
        algorithm=hashes.SHA256(),
        length=SESSION_KEY_LEN,
        salt=None,
        info=_HKDF_INFO + client_public + server_public,
    ).derive(shared)


class SessionCrypto:
    """Directional AEAD channel with strictly increasing nonce counters."""

    def __init__(self, key: bytes, *, is_server: bool):
        if len(key) != SESSION_KEY_LEN:
            raise ValueError(f"session key must be {SESSION_KEY_LEN} bytes")
        self._aead = ChaCha20Poly1305(key)
        self._send_dir = DIR_SERVER_TO_CLIENT if is_server else DIR_CLIENT_TO_SERVER
        self._recv_dir = DIR_CLIENT_TO_SERVER if is_server else DIR_SERVER_TO_CLIENT
        self.send_counter = 0
        self.recv_counter = 0

    @staticmethod
    def _nonce(direction: int, counter: int) -> bytes:
        return bytes([direction, 0, 0, 0]) + counter.to_bytes(8, "big")

    def seal(self, plaintext: bytes, aad: bytes = b"") -> bytes:
        nonce = self._nonce(self._send_dir, self.send_counter)
        self.send_counter += 1
        return self._aead.encrypt(nonce, plaintext, aad)

    def open(self, ciphertext: bytes, aad: bytes = b"") -> bytes:
        nonce = self._nonce(self._recv_dir, self.recv_counter)
        try:
            plaintext = self._aead.decrypt(nonce, ciphertext, aad)
        except InvalidTag:
            raise AuthFailure("record failed authentication") from None
        self.recv_counter += 1
        return plaintext
