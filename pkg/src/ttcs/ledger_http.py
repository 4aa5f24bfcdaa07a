"""HTTP/1.1 JSON API over a Ledger instance, plus a thin client.

Binary fields travel base64-encoded; errors come back as
{"code": ..., "message": ...} with 4xx status.
"""

from __future__ import annotations

import base64
import datetime as _dt

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import ledger as ledger_mod
from .ledger import Ledger, LedgerError


def _err(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


_STATUS = {
    "ValidationFailed": 422,
    "NotFound": 404,
    "DuplicateEpochCredential": 409,
    "InvalidAttestation": 422,
    "NonMonotoneEpoch": 409,
}


def build_app(ledger: Ledger) -> FastAPI:
    app = FastAPI(title="append-only comment ledger")

    @app.exception_handler(LedgerError)
    async def _ledger_error(_request: Request, exc: LedgerError):
        name = type(exc).__name__
        return _err(_STATUS.get(name, 400), name, str(exc))

    @app.post("/entries")
    async def post_entry(body: dict):
        kind = body.get("kind", "")
        try:
            payload = base64.b64decode(body.get("payload", ""))
        except Exception:
            return _err(422, "ValidationFailed", "payload is not base64")
        index = ledger.append(kind, payload)
        return {"index": index}

    @app.get("/entries/{index}")
    async def get_entry(index: int):
        entry = ledger.get_entry(index)
        return {
            "index": entry.index,
            "kind": entry.kind,
            "timestamp": entry.timestamp,
            "payload": base64.b64encode(entry.payload).decode(),
        }

    @app.get("/nyms/{nym_hex}")
    async def get_nym(nym_hex: str, period: str | None = None):
        p = _dt.date.fromisoformat(period) if period else None
        return {"count": ledger.query_nym(bytes.fromhex(nym_hex), period=p)}

    @app.post("/nyms/{nym_hex}/register")
    async def register_nym(nym_hex: str, period: str | None = None):
        p = _dt.date.fromisoformat(period) if period else None
        return {"fresh": ledger.register_nym(bytes.fromhex(nym_hex), period=p)}

    @app.get("/credentials/{login_digest_hex}")
    async def get_credential(login_digest_hex: str, epoch: str):
        cred = ledger.get_credential(bytes.fromhex(login_digest_hex), epoch)
        return {"cred": base64.b64encode(cred).decode(), "epoch": epoch}

    @app.get("/genesis")
    async def list_genesis(offset: int = 0, limit: int = 100):
        tuples = ledger.list_genesis(offset=offset, limit=limit)
        return {
            "tuples": [base64.b64encode(gb.to_bytes()).decode() for gb in tuples],
            "total": ledger.genesis_count(),
        }

    @app.get("/genesis/stats")
    async def genesis_stats():
        stats = ledger.verifier_stats()
        return {"stats": {pk.hex(): n for pk, n in stats.items()}}

    @app.get("/stats")
    async def stats():
        return ledger.stats()

    @app.post("/epoch")
    async def post_epoch(body: dict):
        try:
            pk_bytes = base64.b64decode(body.get("pk_i", ""))
        except Exception:
            return _err(422, "ValidationFailed", "pk_i is not base64")
        index = ledger.announce_epoch(body.get("epoch", ""), pk_bytes)
        return {"index": index}

    @app.get("/epoch")
    async def get_epoch():
        epoch = ledger.current_epoch()
        return {"epoch": epoch}

    return app


class LedgerClient:
    """Same surface as Ledger, over HTTP (for the replay harness)."""

    def __init__(self, base_url: str, client=None):
        import httpx

        self._client = client or httpx.Client(base_url=base_url, timeout=30.0)
        self._own = client is None

    def close(self):
        if self._own:
            self._client.close()

    def _check(self, resp):
        if resp.status_code >= 400:
            doc = resp.json()
            name = doc.get("code", "LedgerError")
            exc_type = getattr(ledger_mod, name, LedgerError)
            raise exc_type(doc.get("message", ""))
        return resp.json()

    def append(self, kind: str, payload: bytes, timestamp=None) -> int:
        doc = self._check(
            self._client.post(
                "/entries",
                json={"kind": kind, "payload": base64.b64encode(payload).decode()},
            )
        )
        return doc["index"]

    def get_entry(self, index: int):
        doc = self._check(self._client.get(f"/entries/{index}"))
        return ledger_mod.LedgerEntry(
            index=doc["index"],
            kind=doc["kind"],
            timestamp=doc["timestamp"],
            payload=base64.b64decode(doc["payload"]),
        )

    def put_credential(self, login_digest: bytes, cred_bytes: bytes, epoch: str) -> int:
        return self.append(
            ledger_mod.KIND_CREDENTIAL,
            ledger_mod.credential_payload(login_digest, cred_bytes, epoch),
        )

    def get_credential(self, login_digest: bytes, epoch: str) -> bytes:
        doc = self._check(
            self._client.get(f"/credentials/{login_digest.hex()}", params={"epoch": epoch})
        )
        return base64.b64decode(doc["cred"])

    def put_update_msg(self, login_digest: bytes, u_bytes: bytes) -> int:
        return self.append(
            ledger_mod.KIND_UPDATE, ledger_mod.update_payload(login_digest, u_bytes)
        )

    def append_genesis(self, gb) -> int:
        return self.append(ledger_mod.KIND_GENESIS, ledger_mod.genesis_payload(gb))

    def genesis_count(self) -> int:
        return self.stats()["genesis_count"]

    def stats(self) -> dict:
        return self._check(self._client.get("/stats"))

    def register_nym(self, nym: bytes, period: _dt.date | None = None) -> bool:
        params = {"period": period.isoformat()} if period else {}
        doc = self._check(
            self._client.post(f"/nyms/{nym.hex()}/register", params=params)
        )
        return doc["fresh"]

    def query_nym(self, nym: bytes, period: _dt.date | None = None) -> int:
        params = {"period": period.isoformat()} if period else {}
        doc = self._check(self._client.get(f"/nyms/{nym.hex()}", params=params))
        return doc["count"]

    def announce_epoch(self, epoch: str, pk_i_bytes: bytes) -> int:
        doc = self._check(
            self._client.post(
                "/epoch",
                json={"epoch": epoch, "pk_i": base64.b64encode(pk_i_bytes).decode()},
            )
        )
        return doc["index"]

    def current_epoch(self):
        return self._check(self._client.get("/epoch"))["epoch"]
