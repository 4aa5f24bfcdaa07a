"""Length-prefixed binary framing shared by all serialized structures."""

from __future__ import annotations

import struct


class WireError(ValueError):
    pass


def pack(parts: list[bytes]) -> bytes:
    out = bytearray()
    for p in parts:
        out += struct.pack(">I", len(p))
        out += p
    return bytes(out)


class Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WireError("truncated input")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def take_u8(self) -> int:
        return self.take(1)[0]

    def take_u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def take_part(self) -> bytes:
        return self.take(self.take_u32())

    def expect_end(self) -> None:
        if self.pos != len(self.data):
            raise WireError("trailing bytes")

    def remaining(self) -> int:
        return len(self.data) - self.pos
