"""Commenting scheme tests: basenames, comments, claims, genesis
attribution, ledger encryption, and sequence recovery."""

import datetime
import secrets

import pytest

from ttcs import daa, scheme, zkp
from ttcs.groups import rand_scalar
from ttcs.primitives import (
    TamperError,
    hash as H,
    kdf,
    pke_keygen,
    sig_keygen,
    sig_sign,
)

TODAY = datetime.date(2026, 8, 9)
YESTERDAY = TODAY - datetime.timedelta(days=1)


@pytest.fixture(scope="module")
def world():
    params = scheme.setup(128)
    pk, isk = scheme.keygen(params, epoch="s-e1")
    sk_u = kdf("alice", "correct horse")
    cred = daa.issue(isk, daa.join(pk, sk_u, b"nonce"))
    return params, pk, isk, sk_u, cred


class TestSetupParams:
    def test_deterministic(self):
        a, b = scheme.setup(128), scheme.setup(128)
        assert a.crs.to_bytes() == b.crs.to_bytes()

    def test_default_tau_is_20(self):
        assert scheme.setup(128).tau == 20
        assert scheme.DEFAULT_TAU == 20

    def test_tau_must_be_positive(self):
        with pytest.raises(scheme.SchemeError):
            scheme.setup(128, tau=0)

    def test_keygen_shares_gpk1(self, world):
        params = world[0]
        pk1, _ = scheme.keygen(params, epoch="x1")
        pk2, _ = scheme.keygen(params, epoch="x2")
        assert pk1.gpk1 == pk2.gpk1
        assert pk1.gpk2 != pk2.gpk2

    def test_keygen_consistency(self, world):
        params = world[0]
        pk, isk = scheme.keygen(params, epoch="x3")
        assert daa.consistency_check(pk.gpk1, pk.gpk2, isk)

    def test_key_serialization(self, world):
        pk = world[1]
        assert daa.IssuerPublicKey.from_bytes(pk.to_bytes()) == pk


class TestBasenames:
    def test_first_seq_valid(self):
        assert scheme.validate_basename(scheme.make_basename(TODAY, 1), TODAY, 20)

    def test_past_tau_invalid(self):
        assert not scheme.validate_basename(scheme.make_basename(TODAY, 21), TODAY, 20)
        assert not scheme.validate_basename(scheme.make_basename(TODAY, 0), TODAY, 20)

    def test_wrong_day_invalid(self):
        assert not scheme.validate_basename(scheme.make_basename(YESTERDAY, 1), TODAY, 20)

    def test_canonical_encoding(self):
        dom = scheme.make_basename(TODAY, 7)
        assert dom.encode() == b"d:2026-08-09:7"
        assert scheme.Basename.parse("d:2026-08-09:7") == dom

    def test_parse_rejects_unknown_kind(self):
        with pytest.raises(scheme.SchemeError):
            scheme.Basename.parse("x:2026-08-09:7")


class TestComment:
    def test_roundtrip(self, world):
        params, pk, _, sk_u, cred = world
        dom = scheme.make_basename(TODAY, 1)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"hello")
        assert scheme.verify_comment(pk, nym, dom, b"hello", rec)

    def test_message_swap_rejected(self, world):
        _, pk, _, sk_u, cred = world
        dom = scheme.make_basename(TODAY, 1)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"hello")
        assert not scheme.verify_comment(pk, nym, dom, b"other", rec)

    def test_nym_swap_rejected(self, world):
        _, pk, isk, sk_u, cred = world
        dom = scheme.make_basename(TODAY, 1)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"hello")
        other_sk = rand_scalar()
        other_nym = daa.nym_gen(other_sk, dom.encode())
        assert not scheme.verify_comment(pk, other_nym, dom, b"hello", rec)

    def test_same_key_same_dom_shares_nym(self, world):
        _, pk, _, sk_u, cred = world
        dom = scheme.make_basename(TODAY, 2)
        nym1, _ = scheme.comment(pk, sk_u, cred, dom, b"m1")
        nym2, _ = scheme.comment(pk, sk_u, cred, dom, b"m2")
        assert nym1 == nym2

    def test_tau_3_exactly_3_nyms(self, world):
        # exhaustive basename enumeration at tau = 3
        _, pk, _, sk_u, cred = world
        nyms = set()
        for seq in range(1, 4):
            dom = scheme.make_basename(TODAY, seq)
            nym, rec = scheme.comment(pk, sk_u, cred, dom, b"m")
            assert scheme.verify_comment(pk, nym, dom, b"m", rec)
            assert scheme.validate_basename(dom, TODAY, 3)
            nyms.add(nym.to_bytes())
        assert len(nyms) == 3
        assert not scheme.validate_basename(scheme.make_basename(TODAY, 4), TODAY, 3)

    def test_record_wire_roundtrip(self, world):
        _, pk, _, sk_u, cred = world
        dom = scheme.make_basename(TODAY, 1)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"hello")
        rt = scheme.CommentRecord.from_bytes(rec.to_bytes())
        assert rt == rec


class TestJoinIssueOrchestration:
    def test_full_round_trip(self, world):
        params, pk, isk, _, _ = world
        issuer = scheme.IssuerState(isk, params)
        vkeys = sig_keygen()
        issuer.mark_verified(vkeys.verify_key, "bob")
        sk = kdf("bob", "pw")
        com, proof, gb = scheme.join_user(
            pk, params, sk, b"n1",
            verifier_attest=(vkeys.verify_key, lambda m: sig_sign(vkeys.signing_key, m)),
        )
        cred = scheme.issue_user(issuer, "bob", com, proof)
        dom = scheme.make_basename(TODAY, 1)
        nym, rec = scheme.comment(pk, sk, cred, dom, b"m")
        assert scheme.verify_comment(pk, nym, dom, b"m", rec)
        assert gb.is_valid()
        assert gb.nym1 == daa.nym_gen(sk, b"1")

    def test_not_verified_rejected(self, world):
        params, pk, isk, _, _ = world
        issuer = scheme.IssuerState(isk, params)
        sk = rand_scalar()
        com, proof, _ = scheme.join_user(pk, params, sk, b"n2")
        with pytest.raises(scheme.NotVerified):
            scheme.issue_user(issuer, "carol", com, proof)

    def test_bad_proof_rejected(self, world):
        params, pk, isk, _, _ = world
        issuer = scheme.IssuerState(isk, params)
        vkeys = sig_keygen()
        issuer.mark_verified(vkeys.verify_key, "dave")
        sk = rand_scalar()
        com, _, _ = scheme.join_user(pk, params, sk, b"n3")
        wrong_proof = zkp.prove_join(params.crs, com, pk, rand_scalar())
        with pytest.raises(scheme.ProofInvalid):
            scheme.issue_user(issuer, "dave", com, wrong_proof)

    def test_double_join_rejected(self, world):
        params, pk, isk, _, _ = world
        issuer = scheme.IssuerState(isk, params)
        vkeys = sig_keygen()
        issuer.mark_verified(vkeys.verify_key, "erin")
        sk = rand_scalar()
        com, proof, _ = scheme.join_user(pk, params, sk, b"n4")
        scheme.issue_user(issuer, "erin", com, proof)
        with pytest.raises(scheme.AlreadyJoined):
            scheme.issue_user(issuer, "erin", com, proof)


class TestGenesisAttribution:
    def test_attribute_returns_verifier_key(self):
        vkeys = sig_keygen()
        gb = scheme.make_genesis_tuple(
            rand_scalar(), vkeys.verify_key, lambda m: sig_sign(vkeys.signing_key, m)
        )
        assert scheme.attribute(gb) == vkeys.verify_key

    def test_attribution_counts(self):
        v1, v2 = sig_keygen(), sig_keygen()
        tuples = []
        for i in range(3):
            tuples.append(scheme.make_genesis_tuple(
                rand_scalar(), v1.verify_key, lambda m: sig_sign(v1.signing_key, m)))
        for i in range(2):
            tuples.append(scheme.make_genesis_tuple(
                rand_scalar(), v2.verify_key, lambda m: sig_sign(v2.signing_key, m)))
        counts = {}
        for gb in tuples:
            pk_v = scheme.attribute(gb)
            counts[pk_v] = counts.get(pk_v, 0) + 1
        assert counts == {v1.verify_key: 3, v2.verify_key: 2}

    def test_invalid_attestation_malformed(self):
        vkeys = sig_keygen()
        gb = scheme.make_genesis_tuple(
            rand_scalar(), vkeys.verify_key, lambda m: sig_sign(vkeys.signing_key, m)
        )
        bad = scheme.GenesisTuple(pk_v=gb.pk_v, nym1=gb.nym1, attestation=b"\x00" * 64)
        with pytest.raises(scheme.MalformedGenesisTuple):
            scheme.attribute(bad)

    def test_genesis_serialization(self):
        vkeys = sig_keygen()
        gb = scheme.make_genesis_tuple(
            rand_scalar(), vkeys.verify_key, lambda m: sig_sign(vkeys.signing_key, m)
        )
        assert scheme.GenesisTuple.from_bytes(gb.to_bytes()) == gb


class TestExtendedMode:
    @pytest.fixture(scope="class")
    def extended_world(self, world):
        params, pk, isk, sk_u, cred = world
        vkeys = sig_keygen()
        attest = lambda m: sig_sign(vkeys.signing_key, m)
        gbs = [scheme.make_genesis_tuple(sk_u, vkeys.verify_key, attest)]
        for i in range(3):
            gbs.append(scheme.make_genesis_tuple(rand_scalar(), vkeys.verify_key, attest))
        return params, pk, sk_u, cred, gbs

    def test_extended_roundtrip(self, extended_world):
        params, pk, sk_u, cred, gbs = extended_world
        dom = scheme.make_basename(TODAY, 5)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"m", params=params,
                                  gb_subset=gbs, gb_query_time="2026-08-09T10:00:00Z")
        assert rec.membership is not None
        assert rec.gb_query_time == "2026-08-09T10:00:00Z"
        assert scheme.verify_comment(pk, nym, dom, b"m", rec, params=params, gb_subset=gbs)

    def test_extended_requires_proof(self, extended_world):
        params, pk, sk_u, cred, gbs = extended_world
        dom = scheme.make_basename(TODAY, 6)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"m")  # base mode record
        assert not scheme.verify_comment(pk, nym, dom, b"m", rec,
                                         params=params, gb_subset=gbs)

    def test_extended_wire_roundtrip(self, extended_world):
        params, pk, sk_u, cred, gbs = extended_world
        dom = scheme.make_basename(TODAY, 7)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"m", params=params, gb_subset=gbs)
        rt = scheme.CommentRecord.from_bytes(rec.to_bytes())
        assert scheme.verify_comment(pk, nym, dom, b"m", rt, params=params, gb_subset=gbs)


class TestClaims:
    @pytest.fixture(scope="class")
    def posted(self, world):
        _, pk, _, sk_u, cred = world
        box = pke_keygen()
        billing = scheme.BillingKey(public_key=box.public_key, t_b="2026-08")
        dom = scheme.make_basename(TODAY, 9)
        nym, rec = scheme.comment(pk, sk_u, cred, dom, b"the message")
        r = secrets.token_bytes(32)
        ct = scheme.encrypt_for_ledger(billing, rec, r)
        return pk, sk_u, cred, dom, rec, r, ct, billing, box

    def test_honest_claim_accepted(self, posted):
        pk, sk_u, cred, dom, rec, r, ct, billing, _ = posted
        ev = scheme.claim(pk, sk_u, cred, dom, b"the message", rec, r)
        assert scheme.verify_claim(pk, dom, b"the message", rec, ev,
                                   ledger_ciphertext=ct, billing_pk=billing.public_key)

    def test_wrong_randomness_rejected(self, posted):
        pk, sk_u, cred, dom, rec, r, ct, billing, _ = posted
        ev = scheme.Evidence(record=rec, r=secrets.token_bytes(32), m=b"the message")
        assert not scheme.verify_claim(pk, dom, b"the message", rec, ev,
                                       ledger_ciphertext=ct, billing_pk=billing.public_key)

    def test_different_message_rejected(self, posted):
        pk, sk_u, cred, dom, rec, r, ct, billing, _ = posted
        ev = scheme.Evidence(record=rec, r=r, m=b"some other text")
        assert not scheme.verify_claim(pk, dom, b"some other text", rec, ev,
                                       ledger_ciphertext=ct, billing_pk=billing.public_key)

    def test_claim_without_ciphertext_check(self, posted):
        pk, sk_u, cred, dom, rec, r, _, _, _ = posted
        ev = scheme.claim(pk, sk_u, cred, dom, b"the message", rec, r)
        assert scheme.verify_claim(pk, dom, b"the message", rec, ev)

    def test_evidence_wire_roundtrip(self, posted):
        pk, sk_u, cred, dom, rec, r, ct, billing, _ = posted
        ev = scheme.claim(pk, sk_u, cred, dom, b"the message", rec, r)
        rt = scheme.Evidence.from_bytes(ev.to_bytes())
        assert rt == ev


class TestLedgerEncryption:
    def test_roundtrip(self, world):
        _, pk, _, sk_u, cred = world
        box = pke_keygen()
        billing = scheme.BillingKey(public_key=box.public_key, t_b="2026-08")
        dom = scheme.make_basename(TODAY, 10)
        _, rec = scheme.comment(pk, sk_u, cred, dom, b"m")
        r = secrets.token_bytes(32)
        ct = scheme.encrypt_for_ledger(billing, rec, r)
        assert scheme.decrypt_entry(box.secret_key, ct) == rec
        # deterministic re-encryption
        assert scheme.encrypt_for_ledger(billing, rec, r) == ct

    def test_tampered_ciphertext(self, world):
        _, pk, _, sk_u, cred = world
        box = pke_keygen()
        billing = scheme.BillingKey(public_key=box.public_key, t_b="2026-08")
        dom = scheme.make_basename(TODAY, 11)
        _, rec = scheme.comment(pk, sk_u, cred, dom, b"m")
        ct = bytearray(scheme.encrypt_for_ledger(billing, rec, secrets.token_bytes(32)))
        ct[40] ^= 1
        with pytest.raises(TamperError):
            scheme.decrypt_entry(box.secret_key, bytes(ct))


class TestRecoverLastSeq:
    def _ledger_with(self, sk_u, seqs):
        posted = {
            daa.nym_gen(sk_u, scheme.Basename(TODAY, s).encode()).to_bytes()
            for s in seqs
        }
        return lambda nym: nym.to_bytes() in posted

    def test_no_comments(self, world):
        sk_u = world[3]
        assert scheme.recover_last_seq(sk_u, TODAY, 20, self._ledger_with(sk_u, [])) == 0

    def test_matches_linear_scan_oracle(self, world):
        sk_u = world[3]
        for used in (1, 2, 5, 12, 19):
            present = self._ledger_with(sk_u, range(1, used + 1))
            # independent oracle: linear scan over every possible seq
            oracle = max(
                (s for s in range(1, 21)
                 if present(daa.nym_gen(sk_u, scheme.Basename(TODAY, s).encode()))),
                default=0,
            )
            assert oracle == used
            assert scheme.recover_last_seq(sk_u, TODAY, 20, present) == oracle

    def test_all_tau_used(self, world):
        sk_u = world[3]
        present = self._ledger_with(sk_u, range(1, 21))
        assert scheme.recover_last_seq(sk_u, TODAY, 20, present) == 20
        assert scheme.next_basename(sk_u, TODAY, 20, present) is None

    def test_query_count_logarithmic(self, world):
        sk_u = world[3]
        queries = []
        present = self._ledger_with(sk_u, range(1, 8))

        def counting(nym):
            queries.append(1)
            return present(nym)

        scheme.recover_last_seq(sk_u, TODAY, 1024, counting)
        assert len(queries) <= 12  # O(log tau)
