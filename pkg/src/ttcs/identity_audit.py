"""Identity verification with commitment blinding and pseudo-probabilistic
auditing, plus the epoch rollover that re-issues credentials.

Flow: the user opens a session with the issuer and sends a hash binding
her personal data; the issuer answers with a signed commitment
c_I = h(r_I, sid, user_hash) whose nonce r_I stays hidden; a verifier
checks the user's identity and signs c_I (psi); only then does the
issuer run join-issue.  Afterwards the issuer reveals (sid, r_I) to the
verifier and both compare the first L bits of h(r_I, sid, "2") and
h(psi): equality triggers an audit (probability 2^-L), which neither
side can force or dodge once psi is fixed.
"""

from __future__ import annotations

import secrets
import time
from dataclasses import dataclass, field

from . import daa, scheme
from .primitives import hash, kdf, sig_keygen, sig_sign, sig_verify
from .wire import pack

DEFAULT_AUDIT_BITS = 7  # audit rate ~0.78%
SESSION_TTL = 3600.0


class IdentityError(Exception):
    pass


class UnknownSession(IdentityError):
    pass


class BadIssuerSignature(IdentityError):
    pass


class IdentityCheckFailed(IdentityError):
    pass


class SignatureInvalid(IdentityError):
    pass


class UnknownVerifier(IdentityError):
    pass


class SessionMismatch(IdentityError):
    pass


class SessionNotVerified(IdentityError):
    pass


class MalformedClaim(IdentityError):
    pass


# ---------------------------------------------------------------------------
# User side


def user_begin(login: str, pw: str, nbd: bytes):
    """Derive the member secret and the personal-data binding hash."""
    sk_u = kdf(login, pw)
    r_u = secrets.token_bytes(32)
    user_hash = hash([r_u, nbd, "1"])
    return sk_u, r_u, user_hash


# ---------------------------------------------------------------------------
# Audit math


def audit_check(r_i: bytes, sid: bytes, psi: bytes, audit_bits: int) -> bool:
    """True iff the first audit_bits bits of h(r_I, sid, "2") and h(psi)
    agree; both parties evaluate this identically."""
    if not 0 <= audit_bits <= 256:
        raise ValueError("audit_bits out of range")
    if audit_bits == 0:
        return True
    s = int.from_bytes(hash([r_i, sid, "2"]), "big") >> (256 - audit_bits)
    s2 = int.from_bytes(hash([psi]), "big") >> (256 - audit_bits)
    return s == s2


@dataclass(frozen=True)
class IssuerClaim:
    r_i: bytes
    sid: bytes
    user_hash: bytes
    psi: bytes


@dataclass(frozen=True)
class VerifierEvidence:
    r_u: bytes
    nbd: bytes
    evidence: bytes


@dataclass(frozen=True)
class AuditVerdict:
    claim_upheld: bool
    verifier_exonerated: bool


def public_audit_verify(claim: IssuerClaim, issuer_verify_key: bytes,
                        verifier_key: bytes, response: VerifierEvidence | None,
                        audit_bits: int = DEFAULT_AUDIT_BITS) -> AuditVerdict:
    """The public's verdict on an audit claim.

    The claim stands iff c_I reconstructs from its fields, psi is the
    verifier's signature over that c_I, and the audit condition holds.
    A responding verifier is exonerated iff (r_U, nbd) re-hash to the
    claimed user_hash and the identity evidence is nonempty.
    """
    if not isinstance(claim, IssuerClaim) or not (
        isinstance(claim.r_i, bytes)
        and isinstance(claim.sid, bytes)
        and isinstance(claim.user_hash, bytes)
        and isinstance(claim.psi, bytes)
    ):
        raise MalformedClaim("claim fields must be byte strings")
    if len(claim.user_hash) != 32:
        raise MalformedClaim("user hash must be 32 bytes")
    c_i = hash([claim.r_i, claim.sid, claim.user_hash])
    upheld = (
        sig_verify(verifier_key, c_i, claim.psi)
        and audit_check(claim.r_i, claim.sid, claim.psi, audit_bits)
    )
    exonerated = False
    if response is not None:
        exonerated = (
            hash([response.r_u, response.nbd, "1"]) == claim.user_hash
            and len(response.evidence) > 0
        )
    return AuditVerdict(claim_upheld=upheld, verifier_exonerated=exonerated)


# ---------------------------------------------------------------------------
# Verifier


class VerifierNode:
    def __init__(self, sig_keys=None, identity_predicate=None):
        self.keys = sig_keys or sig_keygen()
        self.identity_predicate = identity_predicate or (lambda nbd, evidence: True)
        self.archive: dict[bytes, VerifierEvidence] = {}

    @property
    def verify_key(self) -> bytes:
        return self.keys.verify_key

    def attest(self, nbd: bytes, c_i: bytes, r_u: bytes, sig_i: bytes,
               issuer_verify_key: bytes, evidence: bytes = b"ivs-dossier") -> bytes:
        if not sig_verify(issuer_verify_key, c_i, sig_i):
            raise BadIssuerSignature("issuer signature over c_I does not verify")
        if not self.identity_predicate(nbd, evidence):
            raise IdentityCheckFailed("identity evidence rejected")
        psi = sig_sign(self.keys.signing_key, c_i)
        self.archive[c_i] = VerifierEvidence(r_u=r_u, nbd=nbd, evidence=evidence)
        return psi

    def attest_genesis(self, nym1_bytes: bytes) -> bytes:
        return sig_sign(self.keys.signing_key, nym1_bytes)

    def audit_respond(self, c_i: bytes) -> VerifierEvidence:
        try:
            return self.archive[c_i]
        except KeyError:
            raise UnknownSession("no archived evidence for this commitment") from None

    def report_update(self, c_i: bytes) -> bytes:
        """Signed 'still valid' report used at epoch rollover."""
        return sig_sign(self.keys.signing_key, pack([b"update", c_i]))


# ---------------------------------------------------------------------------
# Issuer

_CREATED = "created"
_COMMITTED = "committed"
_VERIFIED = "verified"
_JOINED = "joined"


@dataclass
class Session:
    sid: bytes
    created_at: float
    state: str = _CREATED
    login: str = ""
    user_hash: bytes = b""
    r_i: bytes = b""
    c_i: bytes = b""
    sig_i: bytes = b""
    psi: bytes = b""
    pk_v: bytes = b""
    trace: list = field(default_factory=list)


class IssuerNode:
    """Issuer-side protocol state: sessions, accredited verifiers, the
    scheme issuing state and the audit parameter."""

    def __init__(self, params: scheme.SchemeParams, isk: daa.IssuerSecretKey,
                 sig_keys=None, audit_bits: int = DEFAULT_AUDIT_BITS,
                 clock=time.time, session_ttl: float = SESSION_TTL):
        if not 1 <= audit_bits <= 256:
            raise ValueError("audit bit count must be in 1..256")
        self.params = params
        self.issuing = scheme.IssuerState(isk, params)
        self.sig_keys = sig_keys or sig_keygen()
        self.audit_bits = audit_bits
        self.clock = clock
        self.session_ttl = session_ttl
        self.accredited: set[bytes] = set()
        self.sessions: dict[bytes, Session] = {}
        self.registrations: dict[bytes, str] = {}  # c_I -> login
        self.login_commitments: dict[str, bytes] = {}

    @property
    def pk(self) -> daa.IssuerPublicKey:
        return self.issuing.isk.pk

    @property
    def verify_key(self) -> bytes:
        return self.sig_keys.verify_key

    def accredit(self, pk_v: bytes) -> None:
        self.accredited.add(pk_v)

    def _session(self, sid: bytes) -> Session:
        sess = self.sessions.get(sid)
        if sess is None:
            raise UnknownSession(sid.hex() if isinstance(sid, bytes) else str(sid))
        if self.clock() - sess.created_at > self.session_ttl:
            del self.sessions[sid]
            raise UnknownSession("session expired")
        return sess

    def create_session(self) -> bytes:
        sid = secrets.token_bytes(32)
        self.sessions[sid] = Session(sid=sid, created_at=self.clock())
        return sid

    def receive_login(self, sid: bytes, login: str, user_hash: bytes) -> None:
        sess = self._session(sid)
        sess.login = login
        sess.user_hash = user_hash
        sess.trace.append("login")

    def issuer_commit(self, sid: bytes):
        """Choose r_I, commit to (r_I, sid, user_hash), sign; r_I stays
        secret until the audit phase."""
        sess = self._session(sid)
        if not sess.user_hash:
            raise IdentityError("no user hash for this session")
        sess.r_i = secrets.token_bytes(32)
        sess.c_i = hash([sess.r_i, sid, sess.user_hash])
        sess.sig_i = sig_sign(self.sig_keys.signing_key, sess.c_i)
        sess.state = _COMMITTED
        sess.trace.append("commit")
        return sess.c_i, sess.sig_i

    def issuer_accept(self, sid: bytes, psi: bytes, pk_v: bytes) -> None:
        """Accept the verifier-signed commitment; unlocks join-issue."""
        sess = self._session(sid)
        if pk_v not in self.accredited:
            raise UnknownVerifier("verifier key is not accredited")
        if not sig_verify(pk_v, sess.c_i, psi):
            for other in self.sessions.values():
                if other.sid != sid and other.c_i and sig_verify(pk_v, other.c_i, psi):
                    raise SessionMismatch("psi signs a different session's commitment")
            raise SignatureInvalid("psi does not verify over this session's commitment")
        sess.psi = psi
        sess.pk_v = pk_v
        sess.state = _VERIFIED
        sess.trace.append("psi")
        self.issuing.mark_verified(pk_v, sess.login)

    def join(self, sid: bytes, com: daa.JoinCommitment, proof,
             ledger=None) -> daa.Credential:
        """Run issue for a verified session; stores the join commitment
        as the update message for later epoch rollovers."""
        sess = self._session(sid)
        if sess.state != _VERIFIED:
            raise SessionNotVerified(f"session in state {sess.state!r}")
        cred = scheme.issue_user(self.issuing, sess.login, com, proof)
        sess.state = _JOINED
        sess.trace.append("join")
        self.registrations[sess.c_i] = sess.login
        self.login_commitments[sess.login] = sess.c_i
        if ledger is not None:
            login_digest = hash([sess.login])
            ledger.put_credential(login_digest, cred.to_bytes(), cred.epoch)
            ledger.put_update_msg(login_digest, com.to_bytes())
        return cred

    def start_audit(self, sid: bytes):
        """Reveal (sid, r_I) to the verifier; returns whether the session
        is selected for audit."""
        sess = self._session(sid)
        if not sess.psi:
            raise IdentityError("no verifier signature yet")
        return audit_check(sess.r_i, sid, sess.psi, self.audit_bits)

    def issuer_claim(self, sid: bytes) -> IssuerClaim:
        sess = self._session(sid)
        if not sess.psi:
            raise IdentityError("cannot claim before the verifier signed")
        return IssuerClaim(r_i=sess.r_i, sid=sid, user_hash=sess.user_hash, psi=sess.psi)

    # -- epoch rollover -----------------------------------------------------

    def epoch_rollover(self, ledger, verifier_reports, new_epoch: str) -> int:
        """Re-issue credentials for every reported registration under a
        fresh ephemeral key; unreported logins are implicitly revoked.

        verifier_reports: iterable of (pk_v, c_i, signature over
        ('update', c_i)).  Returns the number of re-issued credentials.
        """
        gpk1 = self.issuing.isk.pk.gpk1
        _, isk_new = daa.setup2(gpk1, epoch=new_epoch)
        old_issuing = self.issuing
        self.issuing = scheme.IssuerState(isk_new, self.params)
        self.issuing.ver = old_issuing.ver
        self.issuing.joined = set(old_issuing.joined)
        ledger.announce_epoch(new_epoch, isk_new.pk.to_bytes())
        count = 0
        skipped: list[str] = []
        for pk_v, c_i, report_sig in verifier_reports:
            if pk_v not in self.accredited or not sig_verify(
                pk_v, pack([b"update", c_i]), report_sig
            ):
                skipped.append("bad-signature")
                continue
            login = self.registrations.get(c_i)
            if login is None:
                skipped.append("unknown-commitment")
                continue
            login_digest = hash([login])
            try:
                u = daa.UpdateMessage.from_bytes(ledger.get_update_msg(login_digest))
                cred = daa.issuer_update(isk_new.pk, u, isk_new)
            except Exception:
                skipped.append(login)
                continue
            ledger.put_credential(login_digest, cred.to_bytes(), new_epoch)
            count += 1
        self.rollover_skipped = skipped
        return count


# ---------------------------------------------------------------------------
# Full registration flow (Fig. order; used by services, tests, harness)


@dataclass
class RegistrationResult:
    sk_u: int
    cred: daa.Credential
    gb: scheme.GenesisTuple
    sid: bytes
    c_i: bytes
    audit_selected: bool


def run_registration(issuer: IssuerNode, verifier: VerifierNode, login: str,
                     pw: str, nbd: bytes, ledger=None,
                     evidence: bytes = b"ivs-dossier") -> RegistrationResult:
    sk_u, r_u, user_hash = user_begin(login, pw, nbd)
    sid = issuer.create_session()
    issuer.receive_login(sid, login, user_hash)
    c_i, sig_i = issuer.issuer_commit(sid)
    psi = verifier.attest(nbd, c_i, r_u, sig_i, issuer.verify_key, evidence=evidence)
    issuer.issuer_accept(sid, psi, verifier.verify_key)
    com, proof, gb = scheme.join_user(
        issuer.pk, issuer.params, sk_u, nonce=sid,
        verifier_attest=(verifier.verify_key, verifier.attest_genesis),
    )
    cred = issuer.join(sid, com, proof, ledger=ledger)
    if ledger is not None:
        ledger.append_genesis(gb)
    selected = issuer.start_audit(sid)
    return RegistrationResult(
        sk_u=sk_u, cred=cred, gb=gb, sid=sid, c_i=c_i, audit_selected=selected
    )
