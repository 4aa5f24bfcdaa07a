"""Instantly linkable, updatable DAA scheme on BN254.

Issuer setup is split into a persistent part (public coins only) and an
ephemeral per-epoch part, so credentials can be re-issued for a new
epoch from a stored update message without user interaction.  Members
hold a secret scalar f; the membership credential is a randomizable
BBS-style signature A = (g1 * h1^f * h2^s)^(1/(gamma+x)) on f.  A
signature under basename dom carries the base J = H(dom) and the
pseudonym K = J^f as its first two components, which makes linkage a
pseudonym equality check.
"""

from __future__ import annotations

import functools
import secrets
from dataclasses import dataclass, field

from .groups import (
    ORDER,
    DecodeError,
    G1,
    G2,
    Gt,
    inv_mod_order,
    pair,
    rand_scalar,
    rand_scalar_any,
    scalar_from_bytes,
    scalar_to_bytes,
)
from .primitives import hash, hash_to_g1, scalar_from_digest
from .wire import Reader, WireError, pack

SIG_TAG = b"TT-DAA-v1"
SIG_COMPONENTS = 9
_VERSION = 1


class DaaError(Exception):
    pass


class UnsupportedSecurityLevel(DaaError):
    pass


class InvalidCommitment(DaaError):
    pass


class InvalidUpdateMessage(DaaError):
    pass


class EpochMismatch(DaaError):
    pass


@dataclass(frozen=True)
class Gpk1:
    """Persistent group public key: generated from public coins only."""

    h1: G1
    h2: G1

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack([self.h1.to_bytes(), self.h2.to_bytes()])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Gpk1":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown gpk1 version")
        h1 = G1.from_bytes(r.take_part())
        h2 = G1.from_bytes(r.take_part())
        r.expect_end()
        return cls(h1=h1, h2=h2)


@dataclass(frozen=True)
class Gpk2:
    """Ephemeral group public key, bound to exactly one epoch."""

    epoch: str
    w: G2

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack([self.epoch.encode(), self.w.to_bytes()])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Gpk2":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown gpk2 version")
        epoch = r.take_part().decode()
        w = G2.from_bytes(r.take_part())
        r.expect_end()
        return cls(epoch=epoch, w=w)


@dataclass(frozen=True)
class IssuerPublicKey:
    gpk1: Gpk1
    gpk2: Gpk2
    _pairings: dict = field(default_factory=dict, compare=False, repr=False)

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack([self.gpk1.to_bytes(), self.gpk2.to_bytes()])

    @classmethod
    def from_bytes(cls, data: bytes) -> "IssuerPublicKey":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown issuer key version")
        gpk1 = Gpk1.from_bytes(r.take_part())
        gpk2 = Gpk2.from_bytes(r.take_part())
        r.expect_end()
        return cls(gpk1=gpk1, gpk2=gpk2)

    @property
    def epoch(self) -> str:
        return self.gpk2.epoch

    def base_pairings(self):
        """Fixed pairings used by sign/verify, cached per key."""
        cache = self._pairings
        if not cache:
            g1 = G1.generator()
            g2 = G2.generator()
            cache["e_g1_g2"] = pair(g1, g2)
            cache["e_h1_g2"] = pair(self.gpk1.h1, g2)
            cache["e_h2_g2"] = pair(self.gpk1.h2, g2)
            cache["e_h2_w"] = pair(self.gpk1.h2, self.gpk2.w)
        return cache


@dataclass(frozen=True)
class IssuerSecretKey:
    gamma: int
    epoch: str
    pk: IssuerPublicKey


@dataclass(frozen=True)
class JoinCommitment:
    """Schnorr proof of knowledge of f for F = h1^f, bound to gpk1 only."""

    F: G1
    c: bytes
    s_f: int
    nonce: bytes

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack(
            [self.F.to_bytes(), self.c, scalar_to_bytes(self.s_f), self.nonce]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "JoinCommitment":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown commitment version")
        F = G1.from_bytes(r.take_part())
        c = r.take_part()
        s_f = scalar_from_bytes(r.take_part())
        nonce = r.take_part()
        r.expect_end()
        if len(c) != 32:
            raise DecodeError("bad challenge length")
        return cls(F=F, c=c, s_f=s_f, nonce=nonce)


# The update message has the same shape and verification as a join
# commitment; only its lifecycle differs (stored on the ledger, reused
# each epoch).
UpdateMessage = JoinCommitment


@dataclass(frozen=True)
class Credential:
    A: G1
    x: int
    s: int
    epoch: str

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack(
            [
                self.A.to_bytes(),
                scalar_to_bytes(self.x),
                scalar_to_bytes(self.s),
                self.epoch.encode(),
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "Credential":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown credential version")
        A = G1.from_bytes(r.take_part())
        x = scalar_from_bytes(r.take_part())
        s = scalar_from_bytes(r.take_part())
        epoch = r.take_part().decode()
        r.expect_end()
        return cls(A=A, x=x, s=s, epoch=epoch)


@dataclass(frozen=True)
class DaaSignature:
    """sigma = (J, K, T, R1, R2, s_f, s_x, s_a, s_b).

    J is the basename base, K = J^f the pseudonym, T the randomized
    credential, (R1, R2) the proof commitments and the rest the
    Fiat-Shamir responses.
    """

    J: G1
    K: G1
    T: G1
    R1: G1
    R2: Gt
    s_f: int
    s_x: int
    s_a: int
    s_b: int

    def components(self):
        return (
            self.J,
            self.K,
            self.T,
            self.R1,
            self.R2,
            self.s_f,
            self.s_x,
            self.s_a,
            self.s_b,
        )

    def to_bytes(self) -> bytes:
        parts = [
            self.J.to_bytes(),
            self.K.to_bytes(),
            self.T.to_bytes(),
            self.R1.to_bytes(),
            self.R2.to_bytes(),
            scalar_to_bytes(self.s_f),
            scalar_to_bytes(self.s_x),
            scalar_to_bytes(self.s_a),
            scalar_to_bytes(self.s_b),
        ]
        return bytes([_VERSION, SIG_COMPONENTS]) + pack(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "DaaSignature":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown signature version")
        if r.take_u8() != SIG_COMPONENTS:
            raise DecodeError("unexpected signature component count")
        J = G1.from_bytes(r.take_part())
        K = G1.from_bytes(r.take_part())
        T = G1.from_bytes(r.take_part())
        R1 = G1.from_bytes(r.take_part())
        R2 = Gt.from_bytes(r.take_part())
        s_f = scalar_from_bytes(r.take_part())
        s_x = scalar_from_bytes(r.take_part())
        s_a = scalar_from_bytes(r.take_part())
        s_b = scalar_from_bytes(r.take_part())
        r.expect_end()
        return cls(J, K, T, R1, R2, s_f, s_x, s_a, s_b)


RevocationList = set  # of member secret scalars

RL_EMPTY: frozenset = frozenset()


# ---------------------------------------------------------------------------
# Setup


def setup1(security_level: int = 128) -> Gpk1:
    if security_level != 128:
        raise UnsupportedSecurityLevel(f"unsupported level {security_level}")
    return Gpk1(h1=hash_to_g1(b"tt-h1"), h2=hash_to_g1(b"tt-h2"))


def setup2(gpk1: Gpk1, epoch: str | None = None):
    if epoch is None:
        epoch = secrets.token_hex(8)
    gamma = rand_scalar()
    gpk2 = Gpk2(epoch=epoch, w=G2.generator() * gamma)
    pk = IssuerPublicKey(gpk1=gpk1, gpk2=gpk2)
    return gpk2, IssuerSecretKey(gamma=gamma, epoch=epoch, pk=pk)


def consistency_check(gpk1: Gpk1, gpk2: Gpk2, isk: IssuerSecretKey) -> bool:
    return (
        isk.epoch == gpk2.epoch
        and G2.generator() * isk.gamma == gpk2.w
        and isk.pk.gpk1 == gpk1
    )


# ---------------------------------------------------------------------------
# Join / issue


def _join_challenge(gpk1: Gpk1, nonce: bytes, F: G1, R: G1) -> bytes:
    return hash([gpk1.to_bytes(), nonce, F.to_bytes(), R.to_bytes()])


def join(pk_i: IssuerPublicKey, sk: int, nonce: bytes) -> JoinCommitment:
    return user_update_msg(pk_i.gpk1, sk, nonce=nonce)


def user_update_msg(gpk1: Gpk1, sk: int, nonce: bytes | None = None) -> UpdateMessage:
    """Schnorr commitment to f; the challenge binds gpk1 only, so the
    message stays verifiable across epochs."""
    sk %= ORDER
    if sk == 0:
        raise DaaError("member secret key must be nonzero")
    if nonce is None:
        nonce = secrets.token_bytes(32)
    F = gpk1.h1 * sk
    r_f = rand_scalar_any()
    R = gpk1.h1 * r_f
    c = _join_challenge(gpk1, nonce, F, R)
    s_f = (r_f + scalar_from_digest(c) * sk) % ORDER
    return JoinCommitment(F=F, c=c, s_f=s_f, nonce=nonce)


def verify_join_commitment(gpk1: Gpk1, com: JoinCommitment) -> bool:
    try:
        c_int = scalar_from_digest(com.c)
        R = gpk1.h1 * com.s_f - com.F * c_int
        return _join_challenge(gpk1, com.nonce, com.F, R) == com.c
    except (DecodeError, WireError, AttributeError, TypeError):
        return False


def issue(isk: IssuerSecretKey, com: JoinCommitment) -> Credential:
    if not verify_join_commitment(isk.pk.gpk1, com):
        raise InvalidCommitment("join commitment failed verification")
    gpk1 = isk.pk.gpk1
    while True:
        x = rand_scalar()
        if (isk.gamma + x) % ORDER:
            break
    s = rand_scalar_any()
    base = G1.generator() + com.F + gpk1.h2 * s
    A = base * inv_mod_order((isk.gamma + x) % ORDER)
    return Credential(A=A, x=x, s=s, epoch=isk.epoch)


def issuer_update(
    pk_new: IssuerPublicKey, u: UpdateMessage, isk_new: IssuerSecretKey
) -> Credential:
    if not verify_join_commitment(pk_new.gpk1, u):
        raise InvalidUpdateMessage("update message failed verification")
    return issue(isk_new, u)


def credential_valid(pk_i: IssuerPublicKey, cred: Credential, F: G1) -> bool:
    """Pairing check e(A, w * g2^x) == e(g1 * F * h2^s, g2)."""
    lhs = pair(cred.A, pk_i.gpk2.w + G2.generator() * cred.x)
    rhs = pair(G1.generator() + F + pk_i.gpk1.h2 * cred.s, G2.generator())
    return lhs == rhs


# ---------------------------------------------------------------------------
# Sign / verify / link


def nym_gen(sk: int, dom) -> G1:
    return hash_to_g1(dom) * sk


def nym_extract(sig: DaaSignature) -> G1:
    return sig.K


def verify_bsn(sig: DaaSignature, dom) -> bool:
    try:
        return sig.J == hash_to_g1(dom)
    except (ValueError, AttributeError):
        return False


@functools.lru_cache(maxsize=4096)
def _credential_base_pairing(a_bytes: bytes) -> Gt:
    return pair(G1.from_bytes(a_bytes), G2.generator())


def _sig_challenge(pk_i: IssuerPublicKey, sig_parts, msg: bytes) -> int:
    J, K, T, R1, R2 = sig_parts
    digest = hash(
        [
            SIG_TAG,
            pk_i.to_bytes(),
            J.to_bytes(),
            K.to_bytes(),
            T.to_bytes(),
            R1.to_bytes(),
            R2.to_bytes(),
            msg,
        ]
    )
    return scalar_from_digest(digest)


def sign(sk: int, cred: Credential, dom, msg: bytes, pk_i: IssuerPublicKey) -> DaaSignature:
    if not dom:
        raise DaaError("basename must be nonempty")
    if cred.epoch != pk_i.epoch:
        raise EpochMismatch(
            f"credential epoch {cred.epoch!r} does not match issuer epoch {pk_i.epoch!r}"
        )
    sk %= ORDER
    if sk == 0:
        raise DaaError("member secret key must be nonzero")
    base = pk_i.base_pairings()
    J = hash_to_g1(dom)
    K = J * sk
    a = rand_scalar_any()
    T = cred.A + pk_i.gpk1.h2 * a
    b = (cred.s + a * cred.x) % ORDER
    # e(T, g2) = e(A, g2) * e(h2, g2)^a, with e(A, g2) cached per credential
    e_T_g2 = _credential_base_pairing(cred.A.to_bytes()) * (base["e_h2_g2"] ** a)
    r_f, r_x, r_a, r_b = (rand_scalar_any() for _ in range(4))
    R1 = J * r_f
    R2 = Gt.multi_pow(
        [e_T_g2, base["e_h1_g2"], base["e_h2_g2"], base["e_h2_w"]],
        [r_x, -r_f % ORDER, -r_b % ORDER, -r_a % ORDER],
    )
    c = _sig_challenge(pk_i, (J, K, T, R1, R2), msg)
    return DaaSignature(
        J=J,
        K=K,
        T=T,
        R1=R1,
        R2=R2,
        s_f=(r_f + c * sk) % ORDER,
        s_x=(r_x + c * cred.x) % ORDER,
        s_a=(r_a + c * a) % ORDER,
        s_b=(r_b + c * b) % ORDER,
    )


def verify(pk_i: IssuerPublicKey, msg: bytes, dom, sig: DaaSignature, rl=RL_EMPTY) -> bool:
    try:
        if not isinstance(sig, DaaSignature):
            return False
        if sig.J.is_identity() or sig.K.is_identity():
            return False
        if not verify_bsn(sig, dom):
            return False
        c = _sig_challenge(pk_i, (sig.J, sig.K, sig.T, sig.R1, sig.R2), msg)
        # Schnorr check on the pseudonym: J^s_f == R1 * K^c
        if sig.J * sig.s_f != sig.R1 + sig.K * c:
            return False
        base = pk_i.base_pairings()
        e_T_g2 = pair(sig.T, G2.generator())
        e_T_w = pair(sig.T, pk_i.gpk2.w)
        # Credential check:
        #   e(T,g2)^s_x * e(h1,g2)^-s_f * e(h2,g2)^-s_b * e(h2,w)^-s_a
        #     * (e(g1,g2)^-1 * e(T,w))^c == R2
        lhs = Gt.multi_pow(
            [
                e_T_g2,
                base["e_h1_g2"],
                base["e_h2_g2"],
                base["e_h2_w"],
                base["e_g1_g2"].inv() * e_T_w,
            ],
            [sig.s_x, -sig.s_f % ORDER, -sig.s_b % ORDER, -sig.s_a % ORDER, c],
        )
        if lhs != sig.R2:
            return False
        for revoked in rl:
            if sig.K == sig.J * (revoked % ORDER):
                return False
        return True
    except (DaaError, DecodeError, WireError, AttributeError, TypeError, ValueError):
        return False


def link(sig0, sig1):
    """1 if same signer and basename, 0 if not, None for malformed input."""
    for s in (sig0, sig1):
        if not isinstance(s, DaaSignature):
            return None
        if s.J.is_identity() or s.K.is_identity():
            return None
    return 1 if nym_extract(sig0) == nym_extract(sig1) else 0
