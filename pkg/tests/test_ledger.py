"""Ledger tests: append-only semantics, nym index linearizability,
credentials, genesis stats, epochs, retention, durability, HTTP API."""

import base64
import datetime
import json
import random
import secrets
import threading

import pytest
from fastapi.testclient import TestClient

from ttcs import ledger as L, scheme
from ttcs.ledger_http import LedgerClient, build_app
from ttcs.groups import rand_scalar
from ttcs.primitives import hash as H, sig_keygen, sig_sign

TODAY = datetime.date(2026, 8, 9)


def _clock():
    return TODAY


def _comment_payload(seq=1, day=TODAY, ct=b"ciphertext"):
    return L.comment_payload(ct, bytes(32), "w1", scheme.Basename(day, seq), "b1")


def _genesis(vkeys=None):
    vkeys = vkeys or sig_keygen()
    gb = scheme.make_genesis_tuple(
        rand_scalar(), vkeys.verify_key, lambda m: sig_sign(vkeys.signing_key, m)
    )
    return gb, vkeys


class TestAppend:
    def test_indices_increase(self, fresh_ledger):
        a = fresh_ledger.append(L.KIND_COMMENT, _comment_payload(1))
        b = fresh_ledger.append(L.KIND_COMMENT, _comment_payload(2))
        assert (a, b) == (0, 1)

    def test_read_back_identical(self, fresh_ledger):
        payload = _comment_payload(3)
        idx = fresh_ledger.append(L.KIND_COMMENT, payload)
        assert fresh_ledger.get_entry(idx).payload == payload

    def test_malformed_dom_rejected(self, fresh_ledger):
        doc = json.loads(_comment_payload(1))
        doc["dom"] = "not-a-basename"
        with pytest.raises(L.ValidationFailed):
            fresh_ledger.append(L.KIND_COMMENT, json.dumps(doc).encode())

    def test_unknown_kind_rejected(self, fresh_ledger):
        with pytest.raises(L.ValidationFailed):
            fresh_ledger.append("mystery", b"{}")

    def test_non_json_rejected(self, fresh_ledger):
        with pytest.raises(L.ValidationFailed):
            fresh_ledger.append(L.KIND_COMMENT, b"\xff\xfe")


class TestNymIndex:
    def test_fresh_then_duplicate(self, fresh_ledger):
        nym = secrets.token_bytes(32)
        assert fresh_ledger.register_nym(nym) is True
        assert fresh_ledger.register_nym(nym) is False

    def test_query_counts(self, fresh_ledger):
        nym = secrets.token_bytes(32)
        assert fresh_ledger.query_nym(nym) == 0
        fresh_ledger.register_nym(nym)
        assert fresh_ledger.query_nym(nym) == 1

    def test_period_partitioning(self, fresh_ledger):
        nym = secrets.token_bytes(32)
        fresh_ledger.register_nym(nym, period=TODAY)
        assert fresh_ledger.query_nym(nym, period=TODAY) == 1
        tomorrow = TODAY + datetime.timedelta(days=1)
        assert fresh_ledger.query_nym(nym, period=tomorrow) == 0
        assert fresh_ledger.register_nym(nym, period=tomorrow) is True

    def test_concurrent_registration_one_fresh(self, fresh_ledger):
        # linearizability stress: 8 threads, exactly one sees fresh
        for _ in range(20):
            nym = secrets.token_bytes(32)
            results = []
            barrier = threading.Barrier(8)

            def reg():
                barrier.wait()
                results.append(fresh_ledger.register_nym(nym))

            threads = [threading.Thread(target=reg) for _ in range(8)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert sum(results) == 1
            assert fresh_ledger.query_nym(nym) == 8


class TestCredentials:
    def test_put_get(self, fresh_ledger):
        ld = H(["alice"])
        fresh_ledger.put_credential(ld, b"cred", "e1")
        assert fresh_ledger.get_credential(ld, "e1") == b"cred"

    def test_unknown_login_not_found(self, fresh_ledger):
        with pytest.raises(L.NotFound):
            fresh_ledger.get_credential(H(["nobody"]), "e1")

    def test_duplicate_epoch_rejected(self, fresh_ledger):
        ld = H(["alice"])
        fresh_ledger.put_credential(ld, b"cred", "e1")
        with pytest.raises(L.DuplicateEpochCredential):
            fresh_ledger.put_credential(ld, b"cred2", "e1")

    def test_multiple_epochs_served(self, fresh_ledger):
        ld = H(["alice"])
        fresh_ledger.put_credential(ld, b"c1", "e1")
        fresh_ledger.put_credential(ld, b"c2", "e2")
        assert fresh_ledger.get_credential(ld, "e1") == b"c1"
        assert fresh_ledger.get_credential(ld, "e2") == b"c2"

    def test_update_messages(self, fresh_ledger):
        ld = H(["bob"])
        fresh_ledger.put_update_msg(ld, b"u-bytes")
        assert fresh_ledger.get_update_msg(ld) == b"u-bytes"


class TestGenesis:
    def test_stats_exact_counts(self, fresh_ledger):
        v1, v2 = sig_keygen(), sig_keygen()
        for _ in range(3):
            gb, _ = _genesis(v1)
            fresh_ledger.append_genesis(gb)
        for _ in range(2):
            gb, _ = _genesis(v2)
            fresh_ledger.append_genesis(gb)
        assert fresh_ledger.verifier_stats() == {v1.verify_key: 3, v2.verify_key: 2}

    def test_pagination_covers_all_once(self, fresh_ledger):
        tuples = []
        for _ in range(7):
            gb, _ = _genesis()
            fresh_ledger.append_genesis(gb)
            tuples.append(gb)
        paged = []
        for off in range(0, 7, 3):
            paged.extend(fresh_ledger.list_genesis(offset=off, limit=3))
        assert paged == tuples

    def test_bad_attestation_rejected(self, fresh_ledger):
        gb, _ = _genesis()
        bad = scheme.GenesisTuple(pk_v=gb.pk_v, nym1=gb.nym1, attestation=b"\x01" * 64)
        with pytest.raises(L.InvalidAttestation):
            fresh_ledger.append_genesis(bad)


class TestEpochs:
    def test_announce_and_query(self, fresh_ledger):
        fresh_ledger.announce_epoch("e1", b"pk1")
        assert fresh_ledger.current_epoch() == "e1"
        assert fresh_ledger.epoch_pk("e1") == b"pk1"

    def test_non_monotone_rejected(self, fresh_ledger):
        fresh_ledger.announce_epoch("e2", b"pk")
        with pytest.raises(L.NonMonotoneEpoch):
            fresh_ledger.announce_epoch("e2", b"pk")
        with pytest.raises(L.NonMonotoneEpoch):
            fresh_ledger.announce_epoch("e1", b"pk")

    def test_numeric_style_labels_ordered_sanely(self, fresh_ledger):
        fresh_ledger.announce_epoch("e9", b"pk")
        fresh_ledger.announce_epoch("e10", b"pk")  # longer label sorts later
        assert fresh_ledger.current_epoch() == "e10"

    def test_credentials_after_announcement(self, fresh_ledger):
        fresh_ledger.announce_epoch("e1", b"pk")
        ld = H(["alice"])
        fresh_ledger.put_credential(ld, b"c", fresh_ledger.current_epoch())
        assert fresh_ledger.get_credential(ld, "e1") == b"c"


class TestChainAndDurability:
    def test_digest_chain_prefix_immutable(self, fresh_ledger):
        fresh_ledger.append(L.KIND_COMMENT, _comment_payload(1))
        prefix = list(fresh_ledger.chain)
        fresh_ledger.append(L.KIND_COMMENT, _comment_payload(2))
        assert fresh_ledger.chain[: len(prefix)] == prefix

    def test_replay_reconstructs_state(self, tmp_path):
        path = str(tmp_path / "ledger")
        lg = L.Ledger(path, clock=_clock)
        rng = random.Random(5)
        vkeys = sig_keygen()
        for i in range(40):
            op = rng.randrange(4)
            if op == 0:
                lg.append(L.KIND_COMMENT, _comment_payload(rng.randrange(1, 20)))
            elif op == 1:
                lg.register_nym(rng.randbytes(32))
            elif op == 2:
                gb, _ = _genesis(vkeys)
                lg.append_genesis(gb)
            else:
                try:
                    lg.put_credential(rng.randbytes(32), b"cred", "e1")
                except L.DuplicateEpochCredential:
                    pass
        digest = lg.state_digest()
        chain = list(lg.chain)
        lg.close()
        replayed = L.Ledger(path, clock=_clock)
        assert replayed.state_digest() == digest
        assert replayed.chain == chain
        assert replayed.total_bytes == sum(len(e.to_bytes()) for e in replayed.entries)

    def test_retention_purges_only_comments(self, tmp_path):
        lg = L.Ledger(str(tmp_path / "lg"), clock=_clock)
        old_day = TODAY - datetime.timedelta(days=35)
        recent_day = TODAY - datetime.timedelta(days=3)
        old_idx = lg.append(L.KIND_COMMENT, _comment_payload(1, day=old_day))
        new_idx = lg.append(L.KIND_COMMENT, _comment_payload(1, day=recent_day))
        gb, _ = _genesis()
        gen_idx = lg.append_genesis(gb)
        ld = H(["alice"])
        lg.put_credential(ld, b"cred", "e1")
        purged = lg.purge_comments(today=TODAY, keep_periods=30)
        assert purged == 1
        with pytest.raises(L.NotFound):
            lg.get_entry(old_idx)
        assert lg.get_entry(new_idx) is not None
        assert lg.get_entry(gen_idx) is not None
        assert lg.get_credential(ld, "e1") == b"cred"
        assert lg.verifier_stats() == {gb.pk_v: 1}
        # replay preserves the purge
        digest = lg.state_digest()
        lg.close()
        replayed = L.Ledger(str(tmp_path / "lg"), clock=_clock)
        assert replayed.state_digest() == digest
        with pytest.raises(L.NotFound):
            replayed.get_entry(old_idx)


class TestHttpApi:
    @pytest.fixture()
    def api(self):
        lg = L.Ledger(clock=_clock)
        return lg, TestClient(build_app(lg))

    def test_post_and_get_entry(self, api):
        lg, tc = api
        payload = _comment_payload(1)
        r = tc.post("/entries", json={
            "kind": "comment", "payload": base64.b64encode(payload).decode()})
        assert r.status_code == 200 and r.json() == {"index": 0}
        r = tc.get("/entries/0")
        assert base64.b64decode(r.json()["payload"]) == payload

    def test_validation_error_shape(self, api):
        _, tc = api
        r = tc.post("/entries", json={"kind": "comment", "payload": ""})
        assert r.status_code == 422
        doc = r.json()
        assert doc["code"] == "ValidationFailed" and "message" in doc

    def test_nym_endpoints(self, api):
        _, tc = api
        nym = secrets.token_bytes(32).hex()
        assert tc.post(f"/nyms/{nym}/register").json()["fresh"] is True
        assert tc.post(f"/nyms/{nym}/register").json()["fresh"] is False
        assert tc.get(f"/nyms/{nym}").json()["count"] == 2

    def test_credential_endpoints(self, api):
        lg, tc = api
        ld = H(["alice"])
        lg.put_credential(ld, b"cred", "e1")
        r = tc.get(f"/credentials/{ld.hex()}", params={"epoch": "e1"})
        assert base64.b64decode(r.json()["cred"]) == b"cred"
        r = tc.get(f"/credentials/{'0' * 64}", params={"epoch": "e1"})
        assert r.status_code == 404 and r.json()["code"] == "NotFound"

    def test_genesis_endpoints(self, api):
        lg, tc = api
        gb, vkeys = _genesis()
        lg.append_genesis(gb)
        r = tc.get("/genesis", params={"offset": 0, "limit": 10})
        assert r.json()["total"] == 1
        got = scheme.GenesisTuple.from_bytes(base64.b64decode(r.json()["tuples"][0]))
        assert got == gb
        r = tc.get("/genesis/stats")
        assert r.json()["stats"] == {vkeys.verify_key.hex(): 1}

    def test_epoch_endpoints(self, api):
        _, tc = api
        r = tc.post("/epoch", json={"epoch": "e1", "pk_i": base64.b64encode(b"pk").decode()})
        assert r.status_code == 200
        assert tc.get("/epoch").json()["epoch"] == "e1"
        r = tc.post("/epoch", json={"epoch": "e1", "pk_i": ""})
        assert r.status_code == 409 and r.json()["code"] == "NonMonotoneEpoch"

    def test_client_wrapper(self, api):
        lg, tc = api
        client = LedgerClient("http://ledger", client=tc)
        nym = secrets.token_bytes(32)
        assert client.register_nym(nym, period=TODAY) is True
        assert client.query_nym(nym, period=TODAY) == 1
        client.announce_epoch("e5", b"pk")
        assert client.current_epoch() == "e5"
        idx = client.append(L.KIND_COMMENT, _comment_payload(2))
        assert client.get_entry(idx).kind == L.KIND_COMMENT
        gb, _ = _genesis()
        client.append_genesis(gb)
        assert client.genesis_count() == 1
        assert client.stats()["comment_entries"] == 1
        with pytest.raises(L.NotFound):
            client.get_credential(H(["ghost"]), "e1")
