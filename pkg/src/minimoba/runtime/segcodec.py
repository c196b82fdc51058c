"""Binary trajectory-segment codec used on the actor -> pool -> learner path.

Floating payload fields travel as IEEE 754 binary16 to halve transport
volume, except behaviour probabilities and rewards, which stay binary32 so
importance ratios and returns reach the learner bit-exactly. Decoding
upcasts every floating field back to float32 for training.

Per-segment layout, little-endian, codec version 1:

    u8   codec version (= 1)
    u8   side
    u16  T (steps, 1..WINDOW)
    u16  lstm width H
    u16  reserved (= 0)
    u32  producing-model version
    f64  generation timestamp (unix seconds)
    f16  bootstrap value
    arrays, tightly packed in this order:
      f16: image[T,C,S,S]  units[T,U,W]  globals[T,G]  values[T]
           entry_h[H]  entry_c[H]
      f32: behavior_probs[T,6]  rewards[T]
      u8:  actions[T,6]  unit_mask[T,U]  six head masks  dones[T]

A segment block is a u32 segment count followed by that many segments.
"""
from __future__ import annotations

import struct

import numpy as np

from ..env.types import N_BUTTONS, N_MOVE_BINS, N_OFFSET_BINS
from ..features.schema import (
    GLOBAL_WIDTH,
    IMAGE_SIZE,
    MAX_UNITS,
    N_IMAGE_CHANNELS,
    UNIT_WIDTH,
)
from ..learner.segment import WINDOW, TrajectorySegment
from ..net.ops import N_HEADS
from .errors import PipelineError

CODEC_VERSION = 1
HEAD_WIDTHS = (N_BUTTONS, N_MOVE_BINS, N_MOVE_BINS,
               N_OFFSET_BINS, N_OFFSET_BINS, MAX_UNITS)

_HEADER = struct.Struct("<BBHHHIde")


def _f16_bytes(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype=np.float16).tobytes()


def _f32_bytes(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype=np.float32).tobytes()


def _u8_bytes(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype=np.uint8).tobytes()


def encode_segment(seg: TrajectorySegment) -> bytes:
    """Serialize one segment to the transport layout."""
    T = seg.length
    H = int(seg.entry_h.shape[0])
    parts = [_HEADER.pack(CODEC_VERSION, seg.side, T, H, 0,
                          seg.version, seg.timestamp, float(seg.bootstrap))]
    for a in (seg.image, seg.units, seg.globals, seg.values,
              seg.entry_h, seg.entry_c):
        parts.append(_f16_bytes(a))
    parts.append(_f32_bytes(seg.behavior_probs))
    parts.append(_f32_bytes(seg.rewards))
    parts.append(_u8_bytes(seg.actions))
    parts.append(_u8_bytes(seg.unit_mask))
    for m in seg.masks:
        parts.append(_u8_bytes(m))
    parts.append(_u8_bytes(seg.dones))
    return b"".join(parts)


def decode_segment(buf: bytes, offset: int = 0) -> tuple[TrajectorySegment, int]:
    """Decode one segment starting at `offset`; returns it and the new offset."""
    if len(buf) - offset < _HEADER.size:
        raise PipelineError("segment codec: truncated header")
    (version, side, T, H, _reserved, model_version,
     timestamp, bootstrap) = _HEADER.unpack_from(buf, offset)
    if version != CODEC_VERSION:
        raise PipelineError(f"segment codec: unknown version {version}")
    if not 1 <= T <= WINDOW:
        raise PipelineError(f"segment codec: bad length {T}")
    pos = offset + _HEADER.size

    def take(count: int, dtype, shape) -> np.ndarray:
        nonlocal pos
        nbytes = count * np.dtype(dtype).itemsize
        if len(buf) - pos < nbytes:
            raise PipelineError("segment codec: truncated payload")
        arr = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
        pos += nbytes
        return arr.reshape(shape).copy()

    def take_f16(shape) -> np.ndarray:
        return take(int(np.prod(shape)), np.float16, shape).astype(np.float32)

    image = take_f16((T, N_IMAGE_CHANNELS, IMAGE_SIZE, IMAGE_SIZE))
    units = take_f16((T, MAX_UNITS, UNIT_WIDTH))
    globals_ = take_f16((T, GLOBAL_WIDTH))
    values = take_f16((T,))
    entry_h = take_f16((H,))
    entry_c = take_f16((H,))
    behavior = take(T * N_HEADS, np.float32, (T, N_HEADS))
    rewards = take(T, np.float32, (T,))
    actions = take(T * N_HEADS, np.uint8, (T, N_HEADS)).astype(np.int64)
    unit_mask = take(T * MAX_UNITS, np.uint8, (T, MAX_UNITS)).astype(bool)
    masks = tuple(take(T * w, np.uint8, (T, w)).astype(bool)
                  for w in HEAD_WIDTHS)
    dones = take(T, np.uint8, (T,)).astype(bool)

    try:
        seg = TrajectorySegment(
            image=image, units=units, unit_mask=unit_mask, globals=globals_,
            masks=masks, actions=actions, behavior_probs=behavior,
            rewards=rewards, values=values, dones=dones,
            entry_h=entry_h, entry_c=entry_c,
            bootstrap=float(np.float16(bootstrap)),
            version=model_version, timestamp=timestamp, side=side)
    except Exception as exc:
        raise PipelineError(f"segment codec: invalid segment ({exc})") from exc
    return seg, pos


def encode_segments(segments: list[TrajectorySegment]) -> bytes:
    """Serialize a list of segments as a counted block."""
    parts = [struct.pack("<I", len(segments))]
    parts.extend(encode_segment(s) for s in segments)
    return b"".join(parts)


def decode_segments(buf: bytes) -> list[TrajectorySegment]:
    """Decode a counted block; rejects trailing garbage."""
    if len(buf) < 4:
        raise PipelineError("segment block: truncated count")
    (count,) = struct.unpack_from("<I", buf, 0)
    pos = 4
    out = []
    for _ in range(count):
        seg, pos = decode_segment(buf, pos)
        out.append(seg)
    if pos != len(buf):
        raise PipelineError("segment block: trailing bytes")
    return out
