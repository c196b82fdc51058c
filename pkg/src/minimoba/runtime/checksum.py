"""64-bit FNV-1a, the checksum shared by sample frames and the wire protocol.

Reference algorithm: start from the 64-bit offset basis, then for every
byte XOR it in and multiply by the 64-bit FNV prime, truncating to 64 bits.
"""

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash of `data` as an unsigned integer."""
    h = FNV64_OFFSET
    for b in data:
        h = ((h ^ b) * FNV64_PRIME) & _MASK64
    return h
