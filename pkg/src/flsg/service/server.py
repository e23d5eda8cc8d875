"""The scheduler: attests itself, runs sessions, stores models, drives rounds.

Each connection walks a fixed state machine (attest -> key exchange -> ready);
any message outside its state is answered with a PROTOCOL_ORDER error and the
connection is closed.  Submitted models are decrypted from the session key,
validated, and immediately re-encrypted under the round key into the store.
When the quorum is reached the round runs: models are decrypted in client-id
order, pushed through the defense pipeline, and the new global model is sent
to every live session.
"""

from __future__ import annotations

import logging
import socket
import struct
import threading
from dataclasses import dataclass, field, replace

from ..errors import (
    AuthFailure,
    DuplicateSubmission,
    FrameError,
    InsufficientModels,
    SerializationError,
)
from ..models import ModelVector, RoundConfig, deserialize_model, serialize_model
from ..pipeline import RoundReport, run_defense_round
from ..rng import NoiseSource
from .attestation import NONCE_LEN, make_quote, pipeline_measurement
from .session import (
    PUBLIC_KEY_LEN,
    SessionCrypto,
    derive_session_key,
    generate_keypair,
    public_bytes,
)
from .store import ModelStore
from .wire import ErrorCode, MsgType, pack_error, recv_frame, send_frame

log = logging.getLogger(__name__)

_SUBMIT_HEADER = struct.Struct("<Q")


@dataclass
class ServiceConfig:
    round_config: RoundConfig
    device_key: bytes
    host: str = "127.0.0.1"
    port: int = 0
    quorum: int | None = None  # default: all n clients
    auto_round: bool = True
    measurement: bytes | None = None

    def effective_quorum(self) -> int:
        return self.quorum if self.quorum is not None else self.round_config.n


@dataclass
class _Connection:
    sock: socket.socket
    state: str = "attest"
    crypto: SessionCrypto | None = None
    client_id: int | None = None
    send_lock: threading.Lock = field(default_factory=threading.Lock)

    def send(self, msg_type: MsgType, payload: bytes) -> None:
        with self.send_lock:
            send_frame(self.sock, msg_type, payload)

    def send_error(self, code: ErrorCode) -> None:
        with self.send_lock:
            self.sock.sendall(pack_error(code))


class _AbortConnection(Exception):
    """Internal: error frame already sent, tear the connection down."""


class SchedulerServer:
    def __init__(self, config: ServiceConfig, initial_global: ModelVector):
        if initial_global.param_count != config.round_config.p:
            raise ValueError("initial global model does not match configured parameter count")
        self.config = config
        self.measurement = (
            config.measurement if config.measurement is not None else pipeline_measurement()
        )
        self._global = initial_global
        self._noise = NoiseSource(config.round_config.rng_seed)
        self._store = ModelStore(round_id=0)
        self._lock = threading.RLock()
        self._connections: list[_Connection] = []
        self._next_client_id = 0
        self._listener: socket.socket | None = None
        self._accept_thread: threading.Thread | None = None
        self._stopping = threading.Event()
        self.last_report: RoundReport | None = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((self.config.host, self.config.port))
        listener.listen()
        # closing a socket does not wake a blocked accept(); poll instead
        listener.settimeout(0.2)
        self._listener = listener
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        log.info("scheduler listening on %s:%d", *self.address)

    @property
    def address(self) -> tuple[str, int]:
        if self._listener is None:
            raise RuntimeError("server is not started")
        host, port = self._listener.getsockname()[:2]
        return host, port

    def stop(self) -> None:
        self._stopping.set()
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            conns = list(self._connections)
        for conn in conns:
            try:
                conn.sock.close()
            except OSError:
                pass
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=2.0)

    def serve_forever(self) -> None:
        self.start()
        try:
            self._stopping.wait()
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stopping.is_set():
            try:
                sock, _addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            sock.settimeout(None)
            conn = _Connection(sock=sock)
            with self._lock:
                self._connections.append(conn)
            threading.Thread(target=self._serve_connection, args=(conn,), daemon=True).start()

    # -- per-connection protocol --------------------------------------------

    def _serve_connection(self, conn: _Connection) -> None:
        try:
            while True:
                msg_type, payload = recv_frame(conn.sock)
                self._dispatch(conn, msg_type, payload)
        except (_AbortConnection, ConnectionError):
            pass
        except FrameError:
            try:
                conn.send_error(ErrorCode.BAD_FRAME)
            except OSError:
                pass
        except OSError:
            pass
        except Exception:
            log.exception("connection handler failed")
            try:
                conn.send_error(ErrorCode.INTERNAL)
            except OSError:
                pass
        finally:
            try:
                conn.sock.close()
            except OSError:
                pass
            with self._lock:
                if conn in self._connections:
                    self._connections.remove(conn)

    def _dispatch(self, conn: _Connection, msg_type: MsgType, payload: bytes) -> None:
        if msg_type == MsgType.ATTEST_REQ and conn.state == "attest":
            self._handle_attest(conn, payload)
        elif msg_type == MsgType.KEYX_REQ and conn.state == "keyx":
            self._handle_key_exchange(conn, payload)
        elif msg_type == MsgType.MODEL_SUBMIT and conn.state == "ready":
            self._handle_submit(conn, payload)
        else:
            conn.send_error(ErrorCode.PROTOCOL_ORDER)
            raise _AbortConnection

    def _handle_attest(self, conn: _Connection, payload: bytes) -> None:
        if len(payload) != NONCE_LEN:
            conn.send_error(ErrorCode.BAD_FRAME)
            raise _AbortConnection
        quote = make_quote(self.config.device_key, self.measurement, payload)
        conn.send(MsgType.ATTEST_RESP, quote.to_bytes())
        conn.state = "keyx"

    def _handle_key_exchange(self, conn: _Connection, payload: bytes) -> None:
        if len(payload) != PUBLIC_KEY_LEN:
            conn.send_error(ErrorCode.BAD_FRAME)
            raise _AbortConnection
        private, server_public = generate_keypair()
        key = derive_session_key(
            private, payload, client_public=payload, server_public=server_public
        )
        with self._lock:
            client_id = self._next_client_id
            self._next_client_id += 1
        conn.crypto = SessionCrypto(key, is_server=True)
        conn.client_id = client_id
        conn.send(MsgType.KEYX_RESP, server_public + struct.pack("<I", client_id))
        conn.state = "ready"
        log.info("client %d registered", client_id)

    def _handle_submit(self, conn: _Connection, payload: bytes) -> None:
        assert conn.crypto is not None and conn.client_id is not None
        try:
            plaintext = conn.crypto.open(payload, aad=bytes([MsgType.MODEL_SUBMIT]))
        except AuthFailure:
            conn.send_error(ErrorCode.AUTH_FAILURE)
            raise _AbortConnection from None
        if len(plaintext) < _SUBMIT_HEADER.size:
            conn.send_error(ErrorCode.BAD_FRAME)
            raise _AbortConnection
        (round_id,) = _SUBMIT_HEADER.unpack_from(plaintext)
        model_bytes = plaintext[_SUBMIT_HEADER.size :]

        run_after = False
        with self._lock:
            if round_id != self._store.round_id:
                conn.send_error(ErrorCode.UNKNOWN_ROUND)
                return
            try:
                model = deserialize_model(model_bytes)
            except SerializationError:
                conn.send_error(ErrorCode.BAD_MODEL)
                return
            if model.param_count != self.config.round_config.p:
                conn.send_error(ErrorCode.DIMENSION_MISMATCH)
                return
            try:
                self._store.put(conn.client_id, model_bytes)
            except DuplicateSubmission:
                conn.send_error(ErrorCode.DUPLICATE_SUBMISSION)
                return
            log.info(
                "round %d: stored model from client %d (%d/%d)",
                round_id, conn.client_id, len(self._store), self.config.effective_quorum(),
            )
            if self.config.auto_round and len(self._store) >= self.config.effective_quorum():
                run_after = True
        conn.send(MsgType.SUBMIT_ACK, conn.crypto.seal(
            _SUBMIT_HEADER.pack(round_id), aad=bytes([MsgType.SUBMIT_ACK])
        ))
        if run_after:
            self._maybe_run_round()

    def _maybe_run_round(self) -> None:
        # Re-check under the lock: a concurrent submission may have already
        # triggered this round, leaving the fresh store empty.
        with self._lock:
            if len(self._store) >= self.config.effective_quorum():
                self.run_round()

    # -- aggregation --------------------------------------------------------

    @property
    def global_model(self) -> ModelVector:
        with self._lock:
            return self._global

    @property
    def current_round(self) -> int:
        with self._lock:
            return self._store.round_id

    def store_snapshot(self) -> dict[int, bytes]:
        """Ciphertext entries of the current round, for auditing."""
        with self._lock:
            return self._store.ciphertexts()

    def run_round(self) -> tuple[ModelVector, RoundReport]:
        """Aggregate the stored models and broadcast the new global model."""
        with self._lock:
            quorum = self.config.effective_quorum()
            if len(self._store) < quorum:
                raise InsufficientModels(
                    f"round {self._store.round_id}: {len(self._store)} of {quorum} models stored"
                )
            plaintexts = self._store.decrypt_all()  # client-id order
            models = [deserialize_model(b) for b in plaintexts.values()]
            round_config = replace(self.config.round_config, n=len(models))
            new_global, report = run_defense_round(
                self._global, models, round_config, noise=self._noise
            )
            finished = self._store.round_id
            self._global = new_global
            self.last_report = report
            self._store = ModelStore(round_id=finished + 1)
            recipients = [c for c in self._connections if c.state == "ready"]
        log.info(
            "round %d aggregated %d models, accepted %d",
            finished, len(models), report.accepted_count,
        )
        payload = _SUBMIT_HEADER.pack(finished) + serialize_model(new_global)
        for conn in recipients:
            try:
                with conn.send_lock:
                    sealed = conn.crypto.seal(payload, aad=bytes([MsgType.GLOBAL_MODEL]))
                    send_frame(conn.sock, MsgType.GLOBAL_MODEL, sealed)
            except OSError:
                continue
        return new_global, report
