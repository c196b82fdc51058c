"""Flat parameter vector with a named layout and bit-exact serialization.

Wire format: ``magic | version u32 | count u64 | layout digest 16B`` followed
by the parameters as little-endian float32 in layout order. The layout itself
is not serialized — the loader rebuilds it from the network config and the
digest guards against loading a snapshot into a mismatched architecture.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import NetError

MAGIC = b"MNP1"
_HEADER = struct.Struct("<4sIQ16s")


@dataclass(frozen=True)
class LayoutEntry:
    name: str
    shape: tuple[int, ...]
    offset: int

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1


def build_layout(named_shapes) -> tuple[LayoutEntry, ...]:
    """Assign contiguous offsets to (name, shape) pairs in order."""
    entries = []
    offset = 0
    for name, shape in named_shapes:
        entry = LayoutEntry(name, tuple(int(d) for d in shape), offset)
        entries.append(entry)
        offset += entry.size
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise NetError("layout has duplicate parameter names")
    return tuple(entries)


def layout_size(layout) -> int:
    return sum(e.size for e in layout)


def layout_digest(layout) -> bytes:
    text = ";".join(f"{e.name}:{e.shape}" for e in layout)
    return hashlib.blake2b(text.encode(), digest_size=16).digest()


@dataclass
class Params:
    """All network parameters as one float32 vector, addressable by name."""

    data: np.ndarray
    layout: tuple[LayoutEntry, ...]
    version: int = 0
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 1 or self.data.shape[0] != layout_size(self.layout):
            raise NetError(
                f"params vector has {self.data.shape} entries, layout "
                f"expects {layout_size(self.layout)}")
        self._index = {e.name: e for e in self.layout}

    @classmethod
    def zeros(cls, layout, version: int = 0) -> "Params":
        return cls(np.zeros(layout_size(layout), dtype=np.float32),
                   tuple(layout), version)

    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.layout)

    def get(self, name: str) -> np.ndarray:
        """View (not copy) of one named parameter, reshaped."""
        try:
            e = self._index[name]
        except KeyError:
            raise NetError(f"unknown parameter {name!r}") from None
        return self.data[e.offset:e.offset + e.size].reshape(e.shape)

    def set(self, name: str, values) -> None:
        view = self.get(name)
        view[...] = np.asarray(values, dtype=np.float32).reshape(view.shape)

    def copy(self) -> "Params":
        return Params(self.data.copy(), self.layout, self.version)

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        h.update(layout_digest(self.layout))
        h.update(self.data.tobytes())
        return h.hexdigest()

    def serialize(self) -> bytes:
        header = _HEADER.pack(MAGIC, self.version, self.data.shape[0],
                              layout_digest(self.layout))
        return header + self.data.astype("<f4", copy=False).tobytes()

    @classmethod
    def deserialize(cls, buf: bytes, layout) -> "Params":
        if len(buf) < _HEADER.size:
            raise NetError("params blob truncated before header")
        magic, version, count, digest = _HEADER.unpack_from(buf)
        if magic != MAGIC:
            raise NetError(f"bad params magic {magic!r}")
        if digest != layout_digest(layout):
            raise NetError("params layout digest mismatch")
        if count != layout_size(layout):
            raise NetError(
                f"params blob holds {count} values, layout expects "
                f"{layout_size(layout)}")
        body = buf[_HEADER.size:]
        if len(body) != 4 * count:
            raise NetError("params blob length does not match header count")
        data = np.frombuffer(body, dtype="<f4").astype(np.float32)
        return cls(data, tuple(layout), version)
