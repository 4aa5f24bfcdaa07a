"""Typed wrappers over the curve backend: G1, G2, Gt elements and
scalar helpers, with the canonical byte encodings used by every
serialized structure (compressed big-endian points, 32-byte scalars).
"""

from __future__ import annotations

import secrets

from . import curve
from .curve import params


class DecodeError(ValueError):
    """Raised when bytes do not decode to a valid group element."""


P = params.P
ORDER = params.R

_HALF_P = P // 2
_FLAG_SIGN = 0x80
_FLAG_INF = 0x40


def rand_scalar() -> int:
    """Uniform nonzero scalar in Z_q^*."""
    while True:
        k = secrets.randbelow(ORDER)
        if k:
            return k


def rand_scalar_any() -> int:
    return secrets.randbelow(ORDER)


def inv_mod_order(k: int) -> int:
    return pow(k, -1, ORDER)


def scalar_to_bytes(k: int) -> bytes:
    return (k % ORDER).to_bytes(32, "big")


def scalar_from_bytes(b: bytes) -> int:
    if len(b) != 32:
        raise DecodeError("scalar must be 32 bytes")
    k = int.from_bytes(b, "big")
    if k >= ORDER:
        raise DecodeError("scalar out of range")
    return k


class G1:
    __slots__ = ("pt",)

    def __init__(self, pt):
        self.pt = pt

    @classmethod
    def generator(cls) -> "G1":
        return cls(params.G1_GEN)

    @classmethod
    def identity(cls) -> "G1":
        return cls(None)

    def is_identity(self) -> bool:
        return self.pt is None

    def __add__(self, other: "G1") -> "G1":
        return G1(curve.g1_add(self.pt, other.pt))

    def __sub__(self, other: "G1") -> "G1":
        return G1(curve.g1_add(self.pt, curve.g1_neg(other.pt)))

    def __neg__(self) -> "G1":
        return G1(curve.g1_neg(self.pt))

    def __mul__(self, k: int) -> "G1":
        return G1(curve.g1_mul(self.pt, k))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, G1) and self.pt == other.pt

    def __hash__(self):
        return hash(self.pt)

    def __repr__(self):
        return f"G1({self.to_bytes().hex()[:16]}...)"

    @staticmethod
    def msm(points: list["G1"], scalars: list[int]) -> "G1":
        return G1(curve.g1_multi_mul([p.pt for p in points], scalars))

    def to_bytes(self) -> bytes:
        if self.pt is None:
            out = bytearray(32)
            out[0] = _FLAG_INF
            return bytes(out)
        x, y = self.pt
        out = bytearray(x.to_bytes(32, "big"))
        if y > _HALF_P:
            out[0] |= _FLAG_SIGN
        return bytes(out)

    @classmethod
    def from_bytes(cls, b: bytes) -> "G1":
        if len(b) != 32:
            raise DecodeError("G1 element must be 32 bytes")
        flags = b[0] & 0xC0
        if flags & _FLAG_INF:
            if any(b[1:]) or b[0] != _FLAG_INF:
                raise DecodeError("malformed G1 identity encoding")
            return cls(None)
        body = bytes([b[0] & 0x3F]) + b[1:]
        x = int.from_bytes(body, "big")
        if x >= P:
            raise DecodeError("G1 x coordinate out of range")
        y = curve.fp_sqrt((x * x * x + 3) % P)
        if y is None:
            raise DecodeError("G1 x not on curve")
        if (y > _HALF_P) != bool(flags & _FLAG_SIGN):
            y = P - y
        return cls((x, y))


def _f2_gt(y) -> bool:
    ny = curve.f2_neg(y)
    return (y[1], y[0]) > (ny[1], ny[0])


class G2:
    __slots__ = ("pt",)

    def __init__(self, pt):
        self.pt = pt

    @classmethod
    def generator(cls) -> "G2":
        return cls(params.G2_GEN)

    @classmethod
    def identity(cls) -> "G2":
        return cls(None)

    def is_identity(self) -> bool:
        return self.pt is None

    def __add__(self, other: "G2") -> "G2":
        return G2(curve.g2_add(self.pt, other.pt))

    def __neg__(self) -> "G2":
        return G2(curve.g2_neg(self.pt))

    def __mul__(self, k: int) -> "G2":
        return G2(curve.g2_mul(self.pt, k))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, G2) and self.pt == other.pt

    def __hash__(self):
        return hash(self.pt)

    def __repr__(self):
        return f"G2({self.to_bytes().hex()[:16]}...)"

    def to_bytes(self) -> bytes:
        if self.pt is None:
            out = bytearray(64)
            out[0] = _FLAG_INF
            return bytes(out)
        (x0, x1), y = self.pt
        out = bytearray(x1.to_bytes(32, "big") + x0.to_bytes(32, "big"))
        if _f2_gt(y):
            out[0] |= _FLAG_SIGN
        return bytes(out)

    @classmethod
    def from_bytes(cls, b: bytes) -> "G2":
        if len(b) != 64:
            raise DecodeError("G2 element must be 64 bytes")
        flags = b[0] & 0xC0
        if flags & _FLAG_INF:
            if any(b[1:]) or b[0] != _FLAG_INF:
                raise DecodeError("malformed G2 identity encoding")
            return cls(None)
        x1 = int.from_bytes(bytes([b[0] & 0x3F]) + b[1:32], "big")
        x0 = int.from_bytes(b[32:], "big")
        if x0 >= P or x1 >= P:
            raise DecodeError("G2 x coordinate out of range")
        x = (x0, x1)
        from .curve.pure import B_G2, f2_add, f2_mul, f2_sqr

        y = curve.f2_sqrt(f2_add(f2_mul(f2_sqr(x), x), B_G2))
        if y is None:
            raise DecodeError("G2 x not on curve")
        if _f2_gt(y) != bool(flags & _FLAG_SIGN):
            y = curve.f2_neg(y)
        pt = (x, y)
        if not curve.g2_in_subgroup(pt):
            raise DecodeError("G2 point not in the prime-order subgroup")
        return cls(pt)


class Gt:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    @classmethod
    def one(cls) -> "Gt":
        return cls(curve.GT_ONE)

    def __mul__(self, other: "Gt") -> "Gt":
        return Gt(curve.gt_mul(self.v, other.v))

    def __pow__(self, e: int) -> "Gt":
        return Gt(curve.gt_pow(self.v, e))

    def inv(self) -> "Gt":
        return Gt(curve.gt_inv(self.v))

    def __eq__(self, other) -> bool:
        return isinstance(other, Gt) and self.v == other.v

    def __hash__(self):
        return hash(self.v)

    def to_bytes(self) -> bytes:
        return b"".join(c.to_bytes(32, "big") for c in self.v)

    @classmethod
    def from_bytes(cls, b: bytes) -> "Gt":
        if len(b) != 384:
            raise DecodeError("Gt element must be 384 bytes")
        coeffs = tuple(int.from_bytes(b[32 * i:32 * (i + 1)], "big") for i in range(12))
        if any(c >= P for c in coeffs):
            raise DecodeError("Gt coefficient out of range")
        return cls(coeffs)

    @staticmethod
    def multi_pow(bases: list["Gt"], exps: list[int]) -> "Gt":
        return Gt(curve.gt_multi_pow([b.v for b in bases], exps))


def pair(p: G1, q: G2) -> Gt:
    return Gt(curve.pairing(p.pt, q.pt))
