"""Model snapshots and the version-ordered hub that distributes them.

A snapshot carries a monotonically increasing version, the serialized
parameter blob, and an FNV-1a-64 digest of that blob. Consumers verify the
digest before loading; the hub rejects version regressions and corrupt
publications, and keeps a periodic archive for opponent sampling.
"""
from __future__ import annotations

import struct
import threading
from dataclasses import dataclass

from ..net.params import Params
from .checksum import fnv1a_64
from .errors import PipelineError

_HEADER = struct.Struct("<QQI")


@dataclass(frozen=True)
class ModelSnapshot:
    version: int
    payload: bytes  # Params.serialize() output
    digest: int

    @classmethod
    def from_params(cls, params: Params, version: int) -> "ModelSnapshot":
        payload = params.serialize()
        return cls(version=version, payload=payload,
                   digest=fnv1a_64(payload))

    def verify(self) -> None:
        if fnv1a_64(self.payload) != self.digest:
            raise PipelineError(
                f"snapshot v{self.version}: digest mismatch")

    def to_params(self, layout) -> Params:
        self.verify()
        return Params.deserialize(self.payload, layout)

    def to_bytes(self) -> bytes:
        return _HEADER.pack(self.version, self.digest,
                            len(self.payload)) + self.payload

    @classmethod
    def from_bytes(cls, buf: bytes) -> "ModelSnapshot":
        if len(buf) < _HEADER.size:
            raise PipelineError("snapshot: truncated header")
        version, digest, length = _HEADER.unpack_from(buf)
        if len(buf) != _HEADER.size + length:
            raise PipelineError("snapshot: length mismatch")
        snap = cls(version=version, payload=buf[_HEADER.size:],
                   digest=digest)
        snap.verify()
        return snap


class ModelHub:
    """Holds the latest snapshot plus a periodic archive.

    Publications must strictly increase the version; every archive_every-th
    accepted publication (starting with the first) is archived, so the
    opponent pool always has at least one historical entry once training
    has produced a model.
    """

    def __init__(self, archive_every: int = 20, max_archive: int = 64):
        if archive_every < 1:
            raise PipelineError("archive_every must be >= 1")
        self.archive_every = archive_every
        self.max_archive = max_archive
        self._latest: ModelSnapshot | None = None
        self._archive: list[ModelSnapshot] = []
        self._published = 0
        self._lock = threading.Lock()

    def publish(self, snapshot: ModelSnapshot) -> None:
        snapshot.verify()
        with self._lock:
            if self._latest is not None and snapshot.version <= self._latest.version:
                raise PipelineError(
                    f"version regression: {snapshot.version} after "
                    f"{self._latest.version}")
            self._latest = snapshot
            if self._published % self.archive_every == 0:
                self._archive.append(snapshot)
                if len(self._archive) > self.max_archive:
                    self._archive.pop(0)
            self._published += 1

    def latest(self) -> ModelSnapshot | None:
        with self._lock:
            return self._latest

    def archive(self) -> list[ModelSnapshot]:
        with self._lock:
            return list(self._archive)

    @property
    def published(self) -> int:
        with self._lock:
            return self._published
