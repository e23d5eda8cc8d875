"""Round-scoped model store holding only ciphertext.

Submitted models arrive under per-client session keys; the scheduler
re-encrypts them under one fresh round key before they touch the store, so a
dump of the store never reveals a local model.  Entries are bound to their
round and client by the AEAD associated data.
"""

from __future__ import annotations

import secrets
import struct

from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from ..errors import DuplicateSubmission

_NONCE_LEN = 12


class ModelStore:
    def __init__(self, round_id: int):
        self.round_id = round_id
        self.round_key = secrets.token_bytes(32)
        self._aead = ChaCha20Poly1305(self.round_key)
        self._entries: dict[int, bytes] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def client_ids(self) -> list[int]:
        return sorted(self._entries)

    def ciphertexts(self) -> dict[int, bytes]:
        """The raw stored bytes; exposed so tests can audit for plaintext."""
        return dict(self._entries)

    def _aad(self, client_id: int) -> bytes:
        return struct.pack("<QI", self.round_id, client_id)

    def put(self, client_id: int, model_bytes: bytes) -> None:
        if client_id in self._entries:
            raise DuplicateSubmission(
                f"client {client_id} already submitted for round {self.round_id}"
            )
        nonce = secrets.token_bytes(_NONCE_LEN)
        sealed = nonce + self._aead.encrypt(nonce, model_bytes, self._aad(client_id))
        self._entries[client_id] = sealed

    def get(self, client_id: int) -> bytes:
        sealed = self._entries[client_id]
        return self._aead.decrypt(sealed[:_NONCE_LEN], sealed[_NONCE_LEN:], self._aad(client_id))

    def decrypt_all(self) -> dict[int, bytes]:
        return {cid: self.get(cid) for cid in self.client_ids()}
