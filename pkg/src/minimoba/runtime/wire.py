"""Stream-socket message framing for the pool service.

Every message is framed bit-exactly as:

    u8[4]  magic "MPF1"
    u8     command (PUSH=1, SAMPLE=2, ACK=3, MODEL=4, REGISTER=5)
    u32    payload length, big-endian
    u8[n]  payload
    u64    checksum, big-endian: FNV-1a-64 over the payload bytes

A reader rejects bad magic, unknown commands, oversized lengths and
checksum mismatches; connections are otherwise trusted to deliver frames
in order (TCP).
"""
from __future__ import annotations

import enum
import socket
import struct

from .checksum import fnv1a_64
from .errors import PipelineError

MAGIC = b"MPF1"
MAX_PAYLOAD = 1 << 28
_PREFIX = struct.Struct(">4sBI")
_SUFFIX = struct.Struct(">Q")


class Command(enum.IntEnum):
    PUSH = 1
    SAMPLE = 2
    ACK = 3
    MODEL = 4
    REGISTER = 5


def encode_message(command: Command, payload: bytes) -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise PipelineError(f"wire: payload of {len(payload)} bytes too large")
    return (_PREFIX.pack(MAGIC, int(command), len(payload)) + payload
            + _SUFFIX.pack(fnv1a_64(payload)))


def decode_message(buf: bytes) -> tuple[Command, bytes]:
    """Decode one complete message; rejects trailing bytes."""
    if len(buf) < _PREFIX.size + _SUFFIX.size:
        raise PipelineError("wire: truncated message")
    magic, command, length = _PREFIX.unpack_from(buf)
    if magic != MAGIC:
        raise PipelineError(f"wire: bad magic {magic!r}")
    if len(buf) != _PREFIX.size + length + _SUFFIX.size:
        raise PipelineError("wire: length mismatch")
    payload = buf[_PREFIX.size:_PREFIX.size + length]
    (checksum,) = _SUFFIX.unpack_from(buf, _PREFIX.size + length)
    if fnv1a_64(payload) != checksum:
        raise PipelineError("wire: checksum mismatch")
    try:
        return Command(command), payload
    except ValueError:
        raise PipelineError(f"wire: unknown command {command}") from None


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    got = 0
    while got < n:
        chunk = sock.recv(n - got)
        if not chunk:
            raise PipelineError("wire: connection closed mid-message")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def send_message(sock: socket.socket, command: Command,
                 payload: bytes) -> None:
    sock.sendall(encode_message(command, payload))


def recv_message(sock: socket.socket) -> tuple[Command, bytes]:
    prefix = _recv_exact(sock, _PREFIX.size)
    magic, command, length = _PREFIX.unpack_from(prefix)
    if magic != MAGIC:
        raise PipelineError(f"wire: bad magic {magic!r}")
    if length > MAX_PAYLOAD:
        raise PipelineError(f"wire: declared payload of {length} bytes")
    rest = _recv_exact(sock, length + _SUFFIX.size)
    return decode_message(prefix + rest)
