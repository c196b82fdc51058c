"""Sample frames: the dispatch unit shipped from actors to the memory pool.

A frame wraps one compressed block of serialized segments:

    u8[4] magic "MSF1"
    u16   format version (= 1)
    u16   reserved (= 0)
    u32   model version (max over contained segments)
    f64   generation timestamp (unix seconds)
    u32   payload length (compressed bytes)
    u32   uncompressed length
    u64   checksum: FNV-1a-64 over the header (with this field zeroed)
          followed by the payload, so corruption anywhere in the frame
          is detected
    u8[payload length]  compressed segment block

The compression codec is pluggable; the contract is a lossless round trip.
The default is zlib.
"""
from __future__ import annotations

import struct
import time
import zlib
from dataclasses import dataclass

from ..learner.segment import TrajectorySegment
from .checksum import fnv1a_64
from .errors import PipelineError
from .segcodec import decode_segments, encode_segment, encode_segments

MAGIC = b"MSF1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHIdIIQ")
HEADER_SIZE = _HEADER.size

DEFAULT_MAX_FRAME_BYTES = 4 << 20  # uncompressed budget for frame splitting


@dataclass(frozen=True)
class SampleFrame:
    """One checksummed, compressed batch of trajectory segments."""

    model_version: int
    timestamp: float
    uncompressed_length: int
    payload: bytes
    checksum: int

    def _header(self, checksum: int) -> bytes:
        return _HEADER.pack(MAGIC, FORMAT_VERSION, 0, self.model_version,
                            self.timestamp, len(self.payload),
                            self.uncompressed_length, checksum)

    def compute_checksum(self) -> int:
        return fnv1a_64(self._header(0) + self.payload)

    def to_bytes(self) -> bytes:
        return self._header(self.checksum) + self.payload

    @classmethod
    def from_bytes(cls, buf: bytes) -> "SampleFrame":
        if len(buf) < HEADER_SIZE:
            raise PipelineError("frame: truncated header")
        (magic, fmt, _reserved, model_version, timestamp,
         payload_len, uncompressed_len, checksum) = _HEADER.unpack_from(buf)
        if magic != MAGIC:
            raise PipelineError(f"frame: bad magic {magic!r}")
        if fmt != FORMAT_VERSION:
            raise PipelineError(f"frame: unknown format version {fmt}")
        if len(buf) != HEADER_SIZE + payload_len:
            raise PipelineError("frame: length mismatch")
        frame = cls(model_version=model_version, timestamp=timestamp,
                    uncompressed_length=uncompressed_len,
                    payload=buf[HEADER_SIZE:], checksum=checksum)
        if frame.compute_checksum() != checksum:
            raise PipelineError("frame: checksum mismatch")
        return frame


def dispatch_pack(segments: list[TrajectorySegment], *,
                  compress=zlib.compress, now: float | None = None
                  ) -> SampleFrame:
    """Serialize, compress and checksum a non-empty list of segments."""
    if not segments:
        raise PipelineError("dispatch_pack: empty segment list")
    block = encode_segments(segments)
    payload = compress(block)
    frame = SampleFrame(
        model_version=max(s.version for s in segments),
        timestamp=time.time() if now is None else now,
        uncompressed_length=len(block),
        payload=payload,
        checksum=0)
    return SampleFrame(frame.model_version, frame.timestamp,
                       frame.uncompressed_length, frame.payload,
                       frame.compute_checksum())


def unpack_frame(frame: SampleFrame, *,
                 decompress=zlib.decompress) -> list[TrajectorySegment]:
    """Verify and decode a frame back into segments."""
    if frame.compute_checksum() != frame.checksum:
        raise PipelineError("frame: checksum mismatch")
    block = decompress(frame.payload)
    if len(block) != frame.uncompressed_length:
        raise PipelineError("frame: uncompressed length mismatch")
    return decode_segments(block)


def pack_frames(segments: list[TrajectorySegment],
                max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES, *,
                compress=zlib.compress,
                now: float | None = None) -> list[SampleFrame]:
    """Pack segments into one or more frames, splitting on an uncompressed
    size budget. A single segment larger than the budget still gets its own
    frame (segments are indivisible)."""
    if not segments:
        raise PipelineError("pack_frames: empty segment list")
    frames: list[SampleFrame] = []
    batch: list[TrajectorySegment] = []
    batch_bytes = 0
    for seg in segments:
        size = len(encode_segment(seg))
        if batch and batch_bytes + size > max_frame_bytes:
            frames.append(dispatch_pack(batch, compress=compress, now=now))
            batch, batch_bytes = [], 0
        batch.append(seg)
        batch_bytes += size
    frames.append(dispatch_pack(batch, compress=compress, now=now))
    return frames
