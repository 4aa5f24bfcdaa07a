"""Concrete cryptographic primitives shared by all modules.

Hashing is BLAKE2b-256 over length-prefixed parts, hash-to-curve maps
labels into G1, key derivation is PBKDF2-HMAC-SHA256 with 100,100
iterations, signatures are Ed25519, and the authenticated public-key
encryption is an X25519 + XSalsa20-Poly1305 box (libsodium) with the
ephemeral key derived from caller-supplied randomness so that a later
reveal of that randomness allows byte-exact re-encryption.
"""

from __future__ import annotations

import ctypes
import functools
import hashlib
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .curve import fp_sqrt
from .curve.params import P, R
from .groups import G1

H2G_TAG = b"TT-H2G1-v1"
KDF_ITERATIONS = 100_100

_HALF_P = P // 2


def hash(parts) -> bytes:  # noqa: A001  (module-scoped name per interface)
    """BLAKE2b-256 over 8-byte big-endian length-prefixed parts."""
    h = hashlib.blake2b(digest_size=32)
    for part in parts:
        if isinstance(part, str):
            part = part.encode()
        h.update(struct.pack(">Q", len(part)))
        h.update(part)
    return h.digest()


def scalar_from_digest(digest: bytes) -> int:
    return int.from_bytes(digest, "big") % R


@functools.lru_cache(maxsize=8192)
def _hash_to_g1_cached(label: bytes):
    ctr = 0
    while True:
        d = hash([H2G_TAG, label, struct.pack(">Q", ctr)])
        x = int.from_bytes(d, "big") % P
        y = fp_sqrt((x * x * x + 3) % P)
        if y is not None:
            # Deterministic sign choice driven by the hash output.
            want_high = bool(d[0] & 1)
            if (y > _HALF_P) != want_high:
                y = P - y
            return (x, y)
        ctr += 1


def hash_to_g1(label) -> G1:
    """Deterministic non-identity point of G1 for a nonempty label."""
    if isinstance(label, str):
        label = label.encode()
    if not label:
        raise ValueError("hash_to_g1 label must be nonempty")
    return G1(_hash_to_g1_cached(bytes(label)))


def kdf(login: str, pw: str) -> int:
    """Derive a member secret scalar in Z_q^* from login and password."""
    salt = hash(["tt-kdf", login])
    pw_bytes = pw.encode()
    ctr = 0
    while True:
        material = hashlib.pbkdf2_hmac(
            "sha256",
            pw_bytes if ctr == 0 else pw_bytes + bytes([ctr]),
            salt,
            KDF_ITERATIONS,
            dklen=64,
        )
        k = int.from_bytes(material, "big") % R
        if k:
            return k
        ctr += 1


# ---------------------------------------------------------------------------
# Digital signatures (Ed25519)


@dataclass(frozen=True)
class SigKeyPair:
    signing_key: bytes
    verify_key: bytes


def sig_keygen() -> SigKeyPair:
    sk = Ed25519PrivateKey.generate()
    return SigKeyPair(
        signing_key=sk.private_bytes_raw(),
        verify_key=sk.public_key().public_bytes_raw(),
    )


def sig_sign(signing_key: bytes, message: bytes) -> bytes:
    return Ed25519PrivateKey.from_private_bytes(signing_key).sign(message)


def sig_verify(verify_key: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(verify_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError, TypeError):
        return False


# ---------------------------------------------------------------------------
# Authenticated public-key encryption (libsodium crypto_box, sealed
# construction with deterministic ephemeral keys)


class TamperError(Exception):
    """Ciphertext failed authentication."""


class _Sodium:
    def __init__(self):
        lib = None
        for name in ("libsodium.so.23", "libsodium.so", "libsodium.dylib"):
            try:
                lib = ctypes.CDLL(name)
                break
            except OSError:
                continue
        if lib is None:
            raise RuntimeError("libsodium shared library not found")
        if lib.sodium_init() < 0:
            raise RuntimeError("libsodium initialization failed")
        self.lib = lib

    def seed_keypair(self, seed: bytes):
        pk = ctypes.create_string_buffer(32)
        sk = ctypes.create_string_buffer(32)
        if self.lib.crypto_box_seed_keypair(pk, sk, seed) != 0:
            raise RuntimeError("crypto_box_seed_keypair failed")
        return pk.raw, sk.raw

    def public_key(self, sk: bytes) -> bytes:
        pk = ctypes.create_string_buffer(32)
        if self.lib.crypto_scalarmult_base(pk, sk) != 0:
            raise RuntimeError("crypto_scalarmult_base failed")
        return pk.raw

    def box(self, m: bytes, nonce: bytes, pk: bytes, sk: bytes) -> bytes:
        out = ctypes.create_string_buffer(len(m) + 16)
        rc = self.lib.crypto_box_easy(
            out, m, ctypes.c_ulonglong(len(m)), nonce, pk, sk
        )
        if rc != 0:
            raise RuntimeError("crypto_box_easy failed")
        return out.raw

    def box_open(self, c: bytes, nonce: bytes, pk: bytes, sk: bytes) -> bytes:
        if len(c) < 16:
            raise TamperError("ciphertext too short")
        out = ctypes.create_string_buffer(len(c) - 16)
        rc = self.lib.crypto_box_open_easy(
            out, c, ctypes.c_ulonglong(len(c)), nonce, pk, sk
        )
        if rc != 0:
            raise TamperError("ciphertext authentication failed")
        return out.raw


_sodium = _Sodium()


@dataclass(frozen=True)
class BoxKeyPair:
    public_key: bytes
    secret_key: bytes


def pke_keygen(seed: bytes | None = None) -> BoxKeyPair:
    import secrets

    pk, sk = _sodium.seed_keypair(seed if seed is not None else secrets.token_bytes(32))
    return BoxKeyPair(public_key=pk, secret_key=sk)


def pke_encrypt(public_key: bytes, message: bytes, r: bytes) -> bytes:
    """Encrypt deterministically given 32 bytes of caller randomness r."""
    if len(r) != 32:
        raise ValueError("encryption randomness must be 32 bytes")
    epk, esk = _sodium.seed_keypair(hash(["tt-pke-eph", r]))
    nonce = hashlib.blake2b(epk + public_key, digest_size=24).digest()
    return epk + _sodium.box(message, nonce, public_key, esk)


def pke_decrypt(secret_key: bytes, ciphertext: bytes) -> bytes:
    if len(ciphertext) < 48:
        raise TamperError("ciphertext too short")
    epk, box = ciphertext[:32], ciphertext[32:]
    pk = _sodium.public_key(secret_key)
    nonce = hashlib.blake2b(epk + pk, digest_size=24).digest()
    return _sodium.box_open(box, nonce, epk, secret_key)
