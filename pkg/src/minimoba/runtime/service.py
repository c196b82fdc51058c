"""Threaded TCP service hosting the memory pool and the model hub.

Request/reply payloads (all little-endian unless noted; transport framing
is defined in `wire`):

  PUSH     request: a serialized SampleFrame.
           reply ACK: u8 status; ok -> u64 pool size, u64 evicted total;
           err -> utf-8 message.
  SAMPLE   request: u32 n, f64 recency_bias, u64 seed.
           reply SAMPLE: u8 status; ok -> u8 shortfall + segment block;
           err -> utf-8 message.
  MODEL    request: u8 sub, then per sub:
             0 GET latest            -> reply MODEL: u8 status + snapshot
             1 SET (snapshot bytes)  -> reply ACK: u8 status (+ u64 version)
             2 ARCHIVE COUNT         -> reply MODEL: u8 0 + u32 count
             3 ARCHIVE GET (u32 i)   -> reply MODEL: u8 status + snapshot
           status 0 is success; 1 carries a utf-8 message (or means
           "no model yet" for GET).
  REGISTER request: utf-8 actor name.
           reply ACK: u8 0, u8 has_model, u64 latest version.

Handler errors are reported in-band with status 1; malformed transport
frames close the connection.
"""
from __future__ import annotations

import socket
import struct
import threading

from ..rng import Rng
from .errors import PipelineError
from .frames import SampleFrame, unpack_frame
from .pool import MemoryPool
from .segcodec import decode_segments, encode_segments
from .snapshot import ModelHub, ModelSnapshot
from .wire import Command, recv_message, send_message

_SAMPLE_REQ = struct.Struct("<IdQ")

MODEL_GET = 0
MODEL_SET = 1
MODEL_ARCHIVE_COUNT = 2
MODEL_ARCHIVE_GET = 3

OK = 0
ERR = 1


class PoolService:
    """Serves one MemoryPool and one ModelHub over TCP."""

    def __init__(self, capacity: int = 1024, archive_every: int = 20,
                 host: str = "127.0.0.1", port: int = 0):
        self.pool = MemoryPool(capacity)
        self.hub = ModelHub(archive_every=archive_every)
        self.registered: dict[str, int] = {}
        self._reg_lock = threading.Lock()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(32)
        self.address: tuple[str, int] = self._listener.getsockname()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._conns: set[socket.socket] = set()
        self._conn_lock = threading.Lock()

    # -- lifecycle -------------------------------------------------------

    def start(self) -> "PoolService":
        t = threading.Thread(target=self._accept_loop,
                             name="pool-accept", daemon=True)
        t.start()
        self._threads.append(t)
        return self

    def stop(self) -> None:
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        with self._conn_lock:
            for conn in list(self._conns):
                try:
                    conn.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                conn.close()
        for t in list(self._threads):
            t.join(timeout=5.0)

    def __enter__(self) -> "PoolService":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    # -- serving ---------------------------------------------------------

    def _accept_loop(self) -> None:
        self._listener.settimeout(0.2)
        while not self._stop.is_set():
            try:
                conn, _addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            t = threading.Thread(target=self._serve, args=(conn,),
                                 name="pool-conn", daemon=True)
            t.start()
            self._threads.append(t)

    def _serve(self, conn: socket.socket) -> None:
        with self._conn_lock:
            self._conns.add(conn)
        try:
            while not self._stop.is_set():
                try:
                    command, payload = recv_message(conn)
                except (PipelineError, OSError):
                    break  # EOF, garbage, or shutdown: drop the connection
                reply_cmd, reply = self._handle(command, payload)
                try:
                    send_message(conn, reply_cmd, reply)
                except OSError:
                    break
        finally:
            with self._conn_lock:
                self._conns.discard(conn)
            conn.close()

    def _handle(self, command: Command,
                payload: bytes) -> tuple[Command, bytes]:
        try:
            if command == Command.PUSH:
                return Command.ACK, self._handle_push(payload)
            if command == Command.SAMPLE:
                return Command.SAMPLE, self._handle_sample(payload)
            if command == Command.MODEL:
                return self._handle_model(payload)
            if command == Command.REGISTER:
                return Command.ACK, self._handle_register(payload)
            raise PipelineError(f"unsupported command {command!r}")
        except PipelineError as exc:
            err = bytes([ERR]) + str(exc).encode()
            reply_cmd = Command.SAMPLE if command == Command.SAMPLE else Command.ACK
            return reply_cmd, err

    def _handle_push(self, payload: bytes) -> bytes:
        frame = SampleFrame.from_bytes(payload)  # checksum verified here
        segments = unpack_frame(frame)
        self.pool.push(segments)
        return (bytes([OK]) + struct.pack(
            "<QQ", len(self.pool), self.pool.counters.evicted))

    def _handle_sample(self, payload: bytes) -> bytes:
        if len(payload) != _SAMPLE_REQ.size:
            raise PipelineError("sample: bad request")
        n, bias, seed = _SAMPLE_REQ.unpack(payload)
        segments, shortfall = self.pool.sample(n, bias, Rng(seed))
        return (bytes([OK, int(shortfall)]) + encode_segments(segments))

    def _handle_model(self, payload: bytes) -> tuple[Command, bytes]:
        if not payload:
            raise PipelineError("model: empty request")
        sub, rest = payload[0], payload[1:]
        if sub == MODEL_GET:
            latest = self.hub.latest()
            if latest is None:
                return Command.MODEL, bytes([ERR]) + b"no model published"
            return Command.MODEL, bytes([OK]) + latest.to_bytes()
        if sub == MODEL_SET:
            snap = ModelSnapshot.from_bytes(rest)
            self.hub.publish(snap)
            return Command.ACK, bytes([OK]) + struct.pack("<Q", snap.version)
        if sub == MODEL_ARCHIVE_COUNT:
            count = len(self.hub.archive())
            return Command.MODEL, bytes([OK]) + struct.pack("<I", count)
        if sub == MODEL_ARCHIVE_GET:
            (index,) = struct.unpack("<I", rest)
            archive = self.hub.archive()
            if not 0 <= index < len(archive):
                raise PipelineError(f"archive index {index} out of range")
            return Command.MODEL, bytes([OK]) + archive[index].to_bytes()
        raise PipelineError(f"model: unknown subcommand {sub}")

    def _handle_register(self, payload: bytes) -> bytes:
        name = payload.decode()
        with self._reg_lock:
            self.registered[name] = self.registered.get(name, 0) + 1
        latest = self.hub.latest()
        return bytes([OK, int(latest is not None)]) + struct.pack(
            "<Q", 0 if latest is None else latest.version)


def _check_ok(reply: bytes, what: str) -> bytes:
    if not reply:
        raise PipelineError(f"{what}: empty reply")
    if reply[0] != OK:
        raise PipelineError(f"{what}: {reply[1:].decode(errors='replace')}")
    return reply[1:]


class PoolClient:
    """Blocking request/reply client for PoolService."""

    def __init__(self, address: tuple[str, int], timeout: float = 30.0):
        self._sock = socket.create_connection(address, timeout=timeout)
        self._lock = threading.Lock()

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "PoolClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _call(self, command: Command, payload: bytes) -> tuple[Command, bytes]:
        with self._lock:
            send_message(self._sock, command, payload)
            return recv_message(self._sock)

    def push_frame(self, frame: SampleFrame) -> tuple[int, int]:
        """Returns (pool size, total evicted) after the push."""
        _, reply = self._call(Command.PUSH, frame.to_bytes())
        body = _check_ok(reply, "push")
        size, evicted = struct.unpack("<QQ", body)
        return size, evicted

    def sample(self, n: int, recency_bias: float = 0.0,
               seed: int = 0) -> tuple[list, bool]:
        _, reply = self._call(
            Command.SAMPLE, _SAMPLE_REQ.pack(n, recency_bias, seed))
        body = _check_ok(reply, "sample")
        shortfall = bool(body[0])
        return decode_segments(body[1:]), shortfall

    def get_model(self) -> ModelSnapshot | None:
        _, reply = self._call(Command.MODEL, bytes([MODEL_GET]))
        if reply and reply[0] != OK:
            return None
        return ModelSnapshot.from_bytes(_check_ok(reply, "model get"))

    def set_model(self, snapshot: ModelSnapshot) -> int:
        _, reply = self._call(Command.MODEL,
                              bytes([MODEL_SET]) + snapshot.to_bytes())
        body = _check_ok(reply, "model set")
        (version,) = struct.unpack("<Q", body)
        return version

    def archive_count(self) -> int:
        _, reply = self._call(Command.MODEL, bytes([MODEL_ARCHIVE_COUNT]))
        body = _check_ok(reply, "archive count")
        (count,) = struct.unpack("<I", body)
        return count

    def archive_get(self, index: int) -> ModelSnapshot:
        _, reply = self._call(
            Command.MODEL,
            bytes([MODEL_ARCHIVE_GET]) + struct.pack("<I", index))
        return ModelSnapshot.from_bytes(_check_ok(reply, "archive get"))

    def register(self, name: str) -> int | None:
        """Announce an actor; returns the latest model version, if any."""
        _, reply = self._call(Command.REGISTER, name.encode())
        body = _check_ok(reply, "register")
        has_model = bool(body[0])
        (version,) = struct.unpack("<Q", body[1:])
        return version if has_model else None
