"""Identity verification and audit protocol tests: session machine,
audit math, claim verdicts, isolation, and epoch rollover."""

import datetime
import secrets

import pytest

from ttcs import daa, identity_audit as ia, ledger as L, scheme
from ttcs.primitives import hash as H, sig_keygen, sig_sign

TODAY = datetime.date(2026, 8, 9)


@pytest.fixture()
def world(params, isk):
    issuer = ia.IssuerNode(params, isk, audit_bits=4)
    verifier = ia.VerifierNode()
    issuer.accredit(verifier.verify_key)
    lg = L.Ledger(clock=lambda: TODAY)
    lg.announce_epoch(isk.epoch, issuer.pk.to_bytes())
    return issuer, verifier, lg


class TestUserBegin:
    def test_key_recomputable_across_devices(self):
        sk1, _, _ = ia.user_begin("alice", "pw", b"nbd")
        sk2, _, _ = ia.user_begin("alice", "pw", b"nbd")
        assert sk1 == sk2

    def test_fresh_r_u_fresh_hash(self):
        _, r1, h1 = ia.user_begin("alice", "pw", b"nbd")
        _, r2, h2 = ia.user_begin("alice", "pw", b"nbd")
        assert r1 != r2 and h1 != h2

    def test_user_hash_recomputable(self):
        _, r_u, user_hash = ia.user_begin("alice", "pw", b"nbd")
        assert H([r_u, b"nbd", "1"]) == user_hash


class TestCommitPhase:
    def test_commitment_signed(self, world):
        issuer, _, _ = world
        sid = issuer.create_session()
        issuer.receive_login(sid, "alice", H([b"uh"]))
        c_i, sig_i = issuer.issuer_commit(sid)
        from ttcs.primitives import sig_verify

        assert sig_verify(issuer.verify_key, c_i, sig_i)

    def test_distinct_sessions_distinct_commitments(self, world):
        issuer, _, _ = world
        cs = set()
        for _ in range(5):
            sid = issuer.create_session()
            issuer.receive_login(sid, "alice", H([b"uh"]))
            c_i, _ = issuer.issuer_commit(sid)
            cs.add(c_i)
        assert len(cs) == 5

    def test_commitment_binds_user_hash(self, world):
        issuer, _, _ = world
        sid = issuer.create_session()
        issuer.receive_login(sid, "alice", H([b"uh"]))
        c_i, _ = issuer.issuer_commit(sid)
        sess = issuer.sessions[sid]
        assert c_i == H([sess.r_i, sid, H([b"uh"])])
        assert c_i != H([sess.r_i, sid, H([b"other"])])

    def test_unknown_session(self, world):
        issuer, _, _ = world
        with pytest.raises(ia.UnknownSession):
            issuer.issuer_commit(b"\x00" * 32)

    def test_session_timeout(self, params, isk):
        now = [1000.0]
        issuer = ia.IssuerNode(params, isk, clock=lambda: now[0], session_ttl=3600)
        sid = issuer.create_session()
        issuer.receive_login(sid, "a", H([b"x"]))
        now[0] += 3601
        with pytest.raises(ia.UnknownSession):
            issuer.issuer_commit(sid)


class TestAttestation:
    def test_honest_flow(self, world):
        issuer, verifier, _ = world
        sid = issuer.create_session()
        issuer.receive_login(sid, "alice", H([b"uh"]))
        c_i, sig_i = issuer.issuer_commit(sid)
        psi = verifier.attest(b"nbd", c_i, b"\x01" * 32, sig_i, issuer.verify_key)
        from ttcs.primitives import sig_verify

        assert sig_verify(verifier.verify_key, c_i, psi)

    def test_forged_issuer_signature(self, world):
        issuer, verifier, _ = world
        with pytest.raises(ia.BadIssuerSignature):
            verifier.attest(b"nbd", b"c" * 32, b"r" * 32, b"\x00" * 64, issuer.verify_key)

    def test_identity_predicate_failure(self, world):
        issuer, _, _ = world
        strict = ia.VerifierNode(identity_predicate=lambda nbd, e: False)
        sid = issuer.create_session()
        issuer.receive_login(sid, "alice", H([b"uh"]))
        c_i, sig_i = issuer.issuer_commit(sid)
        with pytest.raises(ia.IdentityCheckFailed):
            strict.attest(b"nbd", c_i, b"\x01" * 32, sig_i, issuer.verify_key)


class TestAccept:
    def _committed_session(self, issuer):
        sid = issuer.create_session()
        issuer.receive_login(sid, f"user-{secrets.token_hex(4)}", H([secrets.token_bytes(8)]))
        c_i, sig_i = issuer.issuer_commit(sid)
        return sid, c_i, sig_i

    def test_honest_accept(self, world):
        issuer, verifier, _ = world
        sid, c_i, sig_i = self._committed_session(issuer)
        psi = verifier.attest(b"nbd", c_i, b"\x01" * 32, sig_i, issuer.verify_key)
        issuer.issuer_accept(sid, psi, verifier.verify_key)
        assert issuer.sessions[sid].state == "verified"

    def test_cross_session_psi_mismatch(self, world):
        issuer, verifier, _ = world
        sid_a, c_a, sig_a = self._committed_session(issuer)
        sid_b, _, _ = self._committed_session(issuer)
        psi_a = verifier.attest(b"nbd", c_a, b"\x01" * 32, sig_a, issuer.verify_key)
        with pytest.raises(ia.SessionMismatch):
            issuer.issuer_accept(sid_b, psi_a, verifier.verify_key)

    def test_unaccredited_verifier(self, world):
        issuer, verifier, _ = world
        rogue = ia.VerifierNode()
        sid, c_i, sig_i = self._committed_session(issuer)
        psi = rogue.attest(b"nbd", c_i, b"\x01" * 32, sig_i, issuer.verify_key)
        with pytest.raises(ia.UnknownVerifier):
            issuer.issuer_accept(sid, psi, rogue.verify_key)

    def test_garbage_signature_invalid(self, world):
        issuer, verifier, _ = world
        sid, c_i, sig_i = self._committed_session(issuer)
        with pytest.raises(ia.SignatureInvalid):
            issuer.issuer_accept(sid, b"\x00" * 64, verifier.verify_key)


class TestVerifiedBeforeIssue:
    def test_join_requires_verified_state(self, world):
        issuer, verifier, lg = world
        sk_u, r_u, user_hash = ia.user_begin("mallory", "pw", b"nbd")
        sid = issuer.create_session()
        issuer.receive_login(sid, "mallory", user_hash)
        issuer.issuer_commit(sid)
        com, proof, _ = scheme.join_user(issuer.pk, issuer.params, sk_u, nonce=sid)
        with pytest.raises(ia.SessionNotVerified):
            issuer.join(sid, com, proof, ledger=lg)

    def test_trace_order(self, world):
        issuer, verifier, lg = world
        res = ia.run_registration(issuer, verifier, "trace-user", "pw", b"nbd", ledger=lg)
        trace = issuer.sessions[res.sid].trace
        assert trace == ["login", "commit", "psi", "join"]


class TestAuditMath:
    def test_zero_bits_always_audit(self):
        assert ia.audit_check(b"r", b"s", b"p", 0) is True

    def test_full_width_never_in_practice(self):
        hits = sum(
            ia.audit_check(secrets.token_bytes(32), secrets.token_bytes(32),
                           secrets.token_bytes(64), 256)
            for _ in range(2000)
        )
        assert hits == 0

    def test_deterministic_given_inputs(self):
        r_i, sid, psi = secrets.token_bytes(32), secrets.token_bytes(32), secrets.token_bytes(64)
        first = ia.audit_check(r_i, sid, psi, 7)
        assert all(ia.audit_check(r_i, sid, psi, 7) == first for _ in range(50))

    def test_rate_l4_within_band(self):
        # Monte-Carlo over full protocol sessions; 3-sigma band around 1/16
        ks = sig_keygen()
        n, hits = 3000, 0
        for _ in range(n):
            r_i = secrets.token_bytes(32)
            sid = secrets.token_bytes(32)
            c_i = H([r_i, sid, H([secrets.token_bytes(32), b"nbd", "1"])])
            psi = sig_sign(ks.signing_key, c_i)
            hits += ia.audit_check(r_i, sid, psi, 4)
        assert 0.042 <= hits / n <= 0.083

    def test_unpredictability_chi_square(self):
        # before psi is fixed, outcomes over random r_I look Bernoulli(2^-L)
        from scipy import stats as sstats

        ks = sig_keygen()
        sid = secrets.token_bytes(32)
        user_hash = H([secrets.token_bytes(32), b"nbd", "1"])
        L_bits = 3
        hits = 0
        n = 1000
        for _ in range(n):
            r_i = secrets.token_bytes(32)
            c_i = H([r_i, sid, user_hash])
            psi = sig_sign(ks.signing_key, c_i)
            hits += ia.audit_check(r_i, sid, psi, L_bits)
        p = 2.0 ** -L_bits
        chi = sstats.chisquare([hits, n - hits], [n * p, n * (1 - p)])
        assert chi.pvalue > 0.01

    def test_issuer_cannot_flip_after_psi(self):
        ks = sig_keygen()
        r_i, sid = secrets.token_bytes(32), secrets.token_bytes(32)
        c_i = H([r_i, sid, H([b"u"])])
        psi = sig_sign(ks.signing_key, c_i)
        outcome = ia.audit_check(r_i, sid, psi, 4)
        # r_I and psi are fixed; the check is a pure function of them
        assert ia.audit_check(r_i, sid, psi, 4) == outcome


class TestClaims:
    def _audited_session(self, world, login="claimant"):
        issuer, verifier, lg = world
        res = ia.run_registration(issuer, verifier, login, "pw", b"nbd-data", ledger=lg)
        return issuer, verifier, res

    def test_honest_claim_verdict(self, world):
        issuer, verifier, res = self._audited_session(world)
        claim = issuer.issuer_claim(res.sid)
        verdict = ia.public_audit_verify(
            claim, issuer.verify_key, verifier.verify_key, None, audit_bits=4
        )
        assert verdict.claim_upheld == res.audit_selected

    def test_claim_field_mutations_rejected(self, world):
        issuer, verifier, res = self._audited_session(world, login="claimant2")
        claim = issuer.issuer_claim(res.sid)
        mutations = [
            ia.IssuerClaim(secrets.token_bytes(32), claim.sid, claim.user_hash, claim.psi),
            ia.IssuerClaim(claim.r_i, secrets.token_bytes(32), claim.user_hash, claim.psi),
            ia.IssuerClaim(claim.r_i, claim.sid, H([b"forged"]), claim.psi),
            ia.IssuerClaim(claim.r_i, claim.sid, claim.user_hash, b"\x00" * 64),
        ]
        for bad in mutations:
            verdict = ia.public_audit_verify(
                bad, issuer.verify_key, verifier.verify_key, None, audit_bits=4
            )
            assert not verdict.claim_upheld

    def test_malformed_claim_raises(self, world):
        issuer, verifier, _ = world
        with pytest.raises(ia.MalformedClaim):
            ia.public_audit_verify(
                ia.IssuerClaim(r_i=b"x", sid=b"y", user_hash=b"short", psi=b"z"),
                issuer.verify_key, verifier.verify_key, None,
            )

    def test_verifier_exoneration(self, world):
        issuer, verifier, res = self._audited_session(world, login="claimant3")
        claim = issuer.issuer_claim(res.sid)
        good = verifier.audit_respond(res.c_i)
        verdict = ia.public_audit_verify(
            claim, issuer.verify_key, verifier.verify_key, good, audit_bits=4
        )
        assert verdict.verifier_exonerated
        bad = ia.VerifierEvidence(r_u=secrets.token_bytes(32), nbd=good.nbd,
                                  evidence=good.evidence)
        verdict = ia.public_audit_verify(
            claim, issuer.verify_key, verifier.verify_key, bad, audit_bits=4
        )
        assert not verdict.verifier_exonerated


class TestSessionIsolation:
    def test_cross_pairing_five_sessions(self, world):
        issuer, verifier, _ = world
        sessions = []
        for i in range(5):
            sid = issuer.create_session()
            issuer.receive_login(sid, f"iso-{i}", H([secrets.token_bytes(8)]))
            c_i, sig_i = issuer.issuer_commit(sid)
            psi = verifier.attest(b"nbd", c_i, b"\x01" * 32, sig_i, issuer.verify_key)
            sessions.append((sid, c_i, sig_i, psi))
        for i, (sid_i, _, _, _) in enumerate(sessions):
            for j, (_, _, _, psi_j) in enumerate(sessions):
                if i == j:
                    issuer.issuer_accept(sid_i, psi_j, verifier.verify_key)
                else:
                    with pytest.raises((ia.SessionMismatch, ia.SignatureInvalid)):
                        issuer.issuer_accept(sid_i, psi_j, verifier.verify_key)


class TestEpochRollover:
    def test_reported_subset_reissued(self, params):
        _, isk = scheme.keygen(params, epoch="r-e1")
        issuer = ia.IssuerNode(params, isk)
        verifier = ia.VerifierNode()
        issuer.accredit(verifier.verify_key)
        lg = L.Ledger(clock=lambda: TODAY)
        lg.announce_epoch("r-e1", issuer.pk.to_bytes())
        users = {
            name: ia.run_registration(issuer, verifier, name, "pw", name.encode(), ledger=lg)
            for name in ("u1", "u2", "u3", "u4", "u5")
        }
        reported = ("u1", "u3", "u4")
        reports = [
            (verifier.verify_key, users[n].c_i, verifier.report_update(users[n].c_i))
            for n in reported
        ]
        count = issuer.epoch_rollover(lg, reports, "r-e2")
        assert count == 3
        pk2 = issuer.pk
        dom = scheme.make_basename(TODAY, 1)
        for name, res in users.items():
            if name in reported:
                cred2 = daa.Credential.from_bytes(lg.get_credential(H([name]), "r-e2"))
                nym, rec = scheme.comment(pk2, res.sk_u, cred2, dom, b"post")
                assert scheme.verify_comment(pk2, nym, dom, b"post", rec)
                assert nym == daa.nym_gen(res.sk_u, dom.encode())
            else:
                with pytest.raises(L.NotFound):
                    lg.get_credential(H([name]), "r-e2")
                with pytest.raises(daa.EpochMismatch):
                    scheme.comment(pk2, res.sk_u, res.cred, dom, b"post")

    def test_bad_report_signature_skipped(self, params):
        _, isk = scheme.keygen(params, epoch="r2-e1")
        issuer = ia.IssuerNode(params, isk)
        verifier = ia.VerifierNode()
        issuer.accredit(verifier.verify_key)
        lg = L.Ledger(clock=lambda: TODAY)
        res = ia.run_registration(issuer, verifier, "ux", "pw", b"n", ledger=lg)
        reports = [(verifier.verify_key, res.c_i, b"\x00" * 64)]
        assert issuer.epoch_rollover(lg, reports, "r2-e2") == 0
        assert issuer.rollover_skipped == ["bad-signature"]

    def test_old_epoch_signatures_fail_after_rollover(self, params):
        _, isk = scheme.keygen(params, epoch="r3-e1")
        issuer = ia.IssuerNode(params, isk)
        verifier = ia.VerifierNode()
        issuer.accredit(verifier.verify_key)
        lg = L.Ledger(clock=lambda: TODAY)
        res = ia.run_registration(issuer, verifier, "uy", "pw", b"n", ledger=lg)
        pk_old = issuer.pk
        dom = scheme.make_basename(TODAY, 1)
        nym, rec = scheme.comment(pk_old, res.sk_u, res.cred, dom, b"m")
        reports = [(verifier.verify_key, res.c_i, verifier.report_update(res.c_i))]
        issuer.epoch_rollover(lg, reports, "r3-e2")
        assert not scheme.verify_comment(issuer.pk, nym, dom, b"m", rec)
