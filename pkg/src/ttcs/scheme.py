"""The accountable commenting scheme, base and extended.

Base mode: a comment is a DAA signature over the message digest under a
basename (t, seq), published on the ledger in encrypted form.  Extended
mode additionally proves, in zero knowledge, that the commenter's key
is anchored by one of the verifier-signed genesis tuples, which lets
the public count registrations per verifier without learning who
comments.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass

from . import daa, zkp
from .groups import ORDER, DecodeError, G1, scalar_to_bytes
from .primitives import hash, pke_decrypt, pke_encrypt, sig_verify
from .wire import Reader, WireError, pack

DEFAULT_TAU = 20
GENESIS_BASENAME = zkp.GENESIS_BASENAME

_VERSION = 1


class SchemeError(Exception):
    pass


class ProofInvalid(SchemeError):
    pass


class NotVerified(SchemeError):
    pass


class AlreadyJoined(SchemeError):
    pass


class MalformedGenesisTuple(SchemeError):
    pass


@dataclass(frozen=True)
class SchemeParams:
    security_level: int
    crs: zkp.CRS
    tau: int = DEFAULT_TAU
    period_kind: str = "day"

    def __post_init__(self):
        if self.tau < 1:
            raise SchemeError("tau must be at least 1")


def setup(security_level: int = 128, tau: int = DEFAULT_TAU) -> SchemeParams:
    return SchemeParams(security_level=security_level, crs=zkp.zk_setup(security_level), tau=tau)


def keygen(params: SchemeParams, epoch: str | None = None):
    gpk1 = daa.setup1(params.security_level)
    _, isk = daa.setup2(gpk1, epoch=epoch)
    return isk.pk, isk


# ---------------------------------------------------------------------------
# Basenames


@dataclass(frozen=True, order=True)
class Basename:
    t: _dt.date
    seq: int

    def encode(self) -> bytes:
        return f"d:{self.t.isoformat()}:{self.seq}".encode()

    def __str__(self) -> str:
        return self.encode().decode()

    @classmethod
    def parse(cls, raw) -> "Basename":
        if isinstance(raw, bytes):
            raw = raw.decode()
        kind, date_s, seq_s = raw.split(":", 2)
        if kind != "d":
            raise SchemeError(f"unknown basename kind {kind!r}")
        return cls(t=_dt.date.fromisoformat(date_s), seq=int(seq_s))


def make_basename(date: _dt.date, seq: int) -> Basename:
    return Basename(t=date, seq=seq)


def validate_basename(dom: Basename, today: _dt.date, tau: int) -> bool:
    return dom.t == today and 1 <= dom.seq <= tau


# ---------------------------------------------------------------------------
# Genesis tuples


@dataclass(frozen=True)
class GenesisTuple:
    pk_v: bytes
    nym1: G1
    attestation: bytes

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack([self.pk_v, self.nym1.to_bytes(), self.attestation])

    @classmethod
    def from_bytes(cls, data: bytes) -> "GenesisTuple":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown genesis tuple version")
        pk_v = r.take_part()
        nym1 = G1.from_bytes(r.take_part())
        att = r.take_part()
        r.expect_end()
        return cls(pk_v=pk_v, nym1=nym1, attestation=att)

    def is_valid(self) -> bool:
        return sig_verify(self.pk_v, self.nym1.to_bytes(), self.attestation)


def make_genesis_tuple(sk_u: int, verifier_keys, attest) -> GenesisTuple:
    """attest: callable producing sig(sk_V, nym1_bytes); verifier_keys is pk_V."""
    nym1 = daa.nym_gen(sk_u, GENESIS_BASENAME)
    return GenesisTuple(pk_v=verifier_keys, nym1=nym1, attestation=attest(nym1.to_bytes()))


def attribute(gb: GenesisTuple) -> bytes:
    if not isinstance(gb, GenesisTuple) or not gb.is_valid():
        raise MalformedGenesisTuple("genesis tuple attestation does not verify")
    return gb.pk_v


# ---------------------------------------------------------------------------
# Join / issue orchestration


class IssuerState:
    """Issuer-side bookkeeping for the join protocol: the verification
    database ver[V,U] and the set of already-joined users."""

    def __init__(self, isk: daa.IssuerSecretKey, params: SchemeParams):
        self.isk = isk
        self.params = params
        self.ver: dict[tuple[bytes, str], int] = {}
        self.joined: set[str] = set()

    def mark_verified(self, pk_v: bytes, user: str) -> None:
        self.ver[(pk_v, user)] = 1

    def is_verified(self, user: str) -> bool:
        return any(u == user and bit == 1 for (_, u), bit in self.ver.items())


def issue_user(issuer: IssuerState, user: str, com: daa.JoinCommitment,
               proof: zkp.JoinProof) -> daa.Credential:
    if not issuer.is_verified(user):
        raise NotVerified(f"no verifier confirmed {user!r}")
    if user in issuer.joined:
        raise AlreadyJoined(user)
    if not zkp.verify_join(issuer.params.crs, com, issuer.isk.pk, proof):
        raise ProofInvalid("join proof rejected")
    cred = daa.issue(issuer.isk, com)
    issuer.joined.add(user)
    return cred


def join_user(pk_i: daa.IssuerPublicKey, params: SchemeParams, sk_u: int,
              nonce: bytes, verifier_attest=None):
    """User side of join: the commitment, its proof, and (extended mode)
    the genesis tuple when a verifier attestation callback is supplied."""
    com = daa.join(pk_i, sk_u, nonce)
    proof = zkp.prove_join(params.crs, com, pk_i, sk_u)
    gb = None
    if verifier_attest is not None:
        pk_v, attest = verifier_attest
        gb = make_genesis_tuple(sk_u, pk_v, attest)
    return com, proof, gb


# ---------------------------------------------------------------------------
# Comments


@dataclass(frozen=True)
class CommentRecord:
    sig: daa.DaaSignature
    nym: G1
    dom: Basename
    m_digest: bytes
    membership: zkp.MembershipProof | None = None
    gb_query_time: str = ""

    def to_bytes(self) -> bytes:
        parts = [
            self.dom.encode(),
            self.nym.to_bytes(),
            self.m_digest,
            self.sig.to_bytes(),
        ]
        if self.membership is not None:
            parts.append(self.membership.to_bytes())
            parts.append(self.gb_query_time.encode())
        return bytes([_VERSION, 1 if self.membership is not None else 0]) + pack(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CommentRecord":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown comment record version")
        extended = r.take_u8()
        if extended not in (0, 1):
            raise DecodeError("bad mode flag")
        dom = Basename.parse(r.take_part())
        nym = G1.from_bytes(r.take_part())
        m_digest = r.take_part()
        sig = daa.DaaSignature.from_bytes(r.take_part())
        membership = None
        query_time = ""
        if extended:
            membership = zkp.MembershipProof.from_bytes(r.take_part())
            query_time = r.take_part().decode()
        r.expect_end()
        if len(m_digest) != 32:
            raise DecodeError("bad message digest length")
        return cls(sig=sig, nym=nym, dom=dom, m_digest=m_digest,
                   membership=membership, gb_query_time=query_time)


def comment(pk_i: daa.IssuerPublicKey, sk_u: int, cred: daa.Credential,
            dom: Basename, m: bytes, params: SchemeParams | None = None,
            gb_subset=None, gb_query_time: str = ""):
    """Sign the message digest under dom; returns (nym, record).

    Extended mode engages when gb_subset (a list of GenesisTuple) is
    given: the record then carries a membership proof against it.
    """
    m_digest = hash([m])
    sig = daa.sign(sk_u, cred, dom.encode(), m_digest, pk_i)
    nym = daa.nym_extract(sig)
    membership = None
    if gb_subset is not None:
        if params is None:
            raise SchemeError("extended mode needs scheme parameters")
        nym1_list = [gb.nym1 for gb in gb_subset]
        membership = zkp.prove_membership(params.crs, nym, dom.encode(), nym1_list, sk_u)
    record = CommentRecord(sig=sig, nym=nym, dom=dom, m_digest=m_digest,
                           membership=membership, gb_query_time=gb_query_time)
    return nym, record


def verify_comment(pk_i: daa.IssuerPublicKey, nym: G1, dom: Basename, m: bytes,
                   record: CommentRecord, params: SchemeParams | None = None,
                   gb_subset=None, rl=daa.RL_EMPTY) -> bool:
    try:
        if record.dom != dom:
            return False
        m_digest = hash([m])
        if m_digest != record.m_digest:
            return False
        if daa.nym_extract(record.sig) != nym or record.nym != nym:
            return False
        if not daa.verify_bsn(record.sig, dom.encode()):
            return False
        if not daa.verify(pk_i, m_digest, dom.encode(), record.sig, rl):
            return False
        if gb_subset is not None:
            if record.membership is None or params is None:
                return False
            nym1_list = [gb.nym1 for gb in gb_subset]
            if not zkp.verify_membership(params.crs, nym, dom.encode(),
                                         nym1_list, record.membership):
                return False
        return True
    except (SchemeError, DecodeError, WireError, AttributeError, TypeError, ValueError):
        return False


# ---------------------------------------------------------------------------
# Claims


@dataclass(frozen=True)
class Evidence:
    record: CommentRecord
    r: bytes = b""
    m: bytes = b""

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack([self.record.to_bytes(), self.r, self.m])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Evidence":
        rd = Reader(data)
        if rd.take_u8() != _VERSION:
            raise DecodeError("unknown evidence version")
        record = CommentRecord.from_bytes(rd.take_part())
        r = rd.take_part()
        m = rd.take_part()
        rd.expect_end()
        return cls(record=record, r=r, m=m)


def claim(pk_i, sk_u, cred, dom: Basename, m: bytes, record: CommentRecord,
          r: bytes = b"") -> Evidence:
    return Evidence(record=record, r=r, m=m)


def verify_claim(pk_i, dom: Basename, m: bytes, record: CommentRecord,
                 evidence: Evidence, params: SchemeParams | None = None,
                 gb_subset=None, ledger_ciphertext: bytes | None = None,
                 billing_pk: bytes | None = None) -> bool:
    try:
        if evidence.record != record or evidence.m != m:
            return False
        if not verify_comment(pk_i, record.nym, dom, m, record,
                              params=params, gb_subset=gb_subset):
            return False
        if ledger_ciphertext is not None:
            if billing_pk is None or len(evidence.r) != 32:
                return False
            re_enc = pke_encrypt(billing_pk, record.to_bytes(), evidence.r)
            if re_enc != ledger_ciphertext:
                return False
        return True
    except (SchemeError, DecodeError, WireError, AttributeError, TypeError, ValueError):
        return False


# ---------------------------------------------------------------------------
# Ledger-bound encryption


@dataclass(frozen=True)
class BillingKey:
    public_key: bytes
    t_b: str


def encrypt_for_ledger(billing_key: BillingKey, record: CommentRecord, r: bytes) -> bytes:
    return pke_encrypt(billing_key.public_key, record.to_bytes(), r)


def decrypt_entry(secret_key: bytes, ciphertext: bytes) -> CommentRecord:
    return CommentRecord.from_bytes(pke_decrypt(secret_key, ciphertext))


# ---------------------------------------------------------------------------
# Sequence recovery


def recover_last_seq(sk_u: int, t: _dt.date, tau: int, nym_present) -> int:
    """Largest seq in 1..tau whose pseudonym is on the ledger, assuming
    contiguous use from 1; O(log tau) queries via bisection.

    nym_present: callable G1 -> bool (a ledger query).
    """
    def present(seq: int) -> bool:
        return nym_present(daa.nym_gen(sk_u, Basename(t, seq).encode()))

    lo, hi = 0, tau
    if not present(1):
        return 0
    lo = 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if present(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def next_basename(sk_u: int, t: _dt.date, tau: int, nym_present) -> Basename | None:
    """Next unused basename for this key and period; None when throttled."""
    last = recover_last_seq(sk_u, t, tau, nym_present)
    if last >= tau:
        return None
    return Basename(t, last + 1)
