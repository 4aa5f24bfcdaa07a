"""Append-only public ledger service.

Stores encrypted comment entries, genesis tuples, credentials and
update messages keyed by hashed login, and epoch announcements; serves
nym-freshness queries.  Entries are immutable once appended and covered
by a digest chain so a future consensus backend has a canonical
commitment.  Persistence is an append-only file of length-prefixed
entries plus an append-only index log for nym registrations; replaying
both reconstructs identical state.
"""

from __future__ import annotations

import base64
import datetime as _dt
import json
import os
import struct
import threading
from dataclasses import dataclass

from .primitives import hash
from .scheme import Basename, GenesisTuple, MalformedGenesisTuple
from .wire import WireError

KIND_COMMENT = "comment"
KIND_GENESIS = "genesis"
KIND_CREDENTIAL = "credential"
KIND_UPDATE = "update_msg"
KIND_EPOCH = "epoch"
KIND_PURGE = "purge"

_KINDS = {KIND_COMMENT, KIND_GENESIS, KIND_CREDENTIAL, KIND_UPDATE, KIND_EPOCH, KIND_PURGE}

RETENTION_PERIODS = 30


class LedgerError(Exception):
    pass


class ValidationFailed(LedgerError):
    pass


class NotFound(LedgerError):
    pass


class DuplicateEpochCredential(LedgerError):
    pass


class InvalidAttestation(LedgerError):
    pass


class NonMonotoneEpoch(LedgerError):
    pass


def _b64(b: bytes) -> str:
    return base64.b64encode(b).decode()


def _unb64(s: str) -> bytes:
    return base64.b64decode(s.encode())


def _epoch_key(label: str):
    return (len(label), label)


@dataclass(frozen=True)
class LedgerEntry:
    index: int
    kind: str
    timestamp: float
    payload: bytes

    def to_bytes(self) -> bytes:
        head = json.dumps(
            {"index": self.index, "kind": self.kind, "timestamp": self.timestamp},
            sort_keys=True,
        ).encode()
        return struct.pack(">I", len(head)) + head + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "LedgerEntry":
        if len(data) < 4:
            raise WireError("truncated entry")
        n = struct.unpack(">I", data[:4])[0]
        head = json.loads(data[4:4 + n])
        return cls(
            index=head["index"],
            kind=head["kind"],
            timestamp=head["timestamp"],
            payload=data[4 + n:],
        )


def comment_payload(ciphertext: bytes, m_digest: bytes, website: str,
                    dom: Basename, t_b: str) -> bytes:
    return json.dumps(
        {
            "ciphertext": _b64(ciphertext),
            "m_digest": m_digest.hex(),
            "website": website,
            "dom": str(dom),
            "t_b": t_b,
        },
        sort_keys=True,
    ).encode()


def genesis_payload(gb: GenesisTuple) -> bytes:
    return json.dumps({"gb": _b64(gb.to_bytes())}, sort_keys=True).encode()


def credential_payload(login_digest: bytes, cred_bytes: bytes, epoch: str) -> bytes:
    return json.dumps(
        {"login_digest": login_digest.hex(), "cred": _b64(cred_bytes), "epoch": epoch},
        sort_keys=True,
    ).encode()


def update_payload(login_digest: bytes, u_bytes: bytes) -> bytes:
    return json.dumps(
        {"login_digest": login_digest.hex(), "u": _b64(u_bytes)}, sort_keys=True
    ).encode()


def epoch_payload(epoch: str, pk_i_bytes: bytes) -> bytes:
    return json.dumps({"epoch": epoch, "pk_i": _b64(pk_i_bytes)}, sort_keys=True).encode()


def purge_payload(before: _dt.date) -> bytes:
    return json.dumps({"before": before.isoformat()}, sort_keys=True).encode()


class Ledger:
    """Single-node ledger with linearizable appends and nym registration.

    path=None keeps everything in memory (no durability); otherwise
    `<path>.log` holds entries and `<path>.nyms` the registration log.
    """

    def __init__(self, path: str | None = None, clock=None):
        self._lock = threading.RLock()
        self._clock = clock or (lambda: _dt.datetime.now(_dt.timezone.utc).date())
        self.path = path
        self.entries: list[LedgerEntry] = []
        self.chain: list[bytes] = []
        self.total_bytes = 0
        self._purged: set[int] = set()
        self._credentials: dict[tuple[bytes, str], bytes] = {}
        self._updates: dict[bytes, bytes] = {}
        self._genesis: list[int] = []  # entry indexes
        self._verifier_counts: dict[bytes, int] = {}
        self._epochs: list[str] = []
        self._nym_counts: dict[str, dict[bytes, int]] = {}
        self._log = None
        self._nym_log = None
        if path is not None:
            self._replay()
            self._log = open(path + ".log", "ab")
            self._nym_log = open(path + ".nyms", "ab")

    # -- persistence --------------------------------------------------------

    def _replay(self) -> None:
        log_path = self.path + ".log"
        if os.path.exists(log_path):
            with open(log_path, "rb") as fh:
                data = fh.read()
            pos = 0
            while pos < len(data):
                if pos + 4 > len(data):
                    raise LedgerError("corrupt ledger log (truncated frame)")
                n = struct.unpack(">I", data[pos:pos + 4])[0]
                frame = data[pos + 4:pos + 4 + n]
                if len(frame) != n:
                    raise LedgerError("corrupt ledger log (short frame)")
                entry = LedgerEntry.from_bytes(frame)
                self._apply(entry, frame)
                pos += 4 + n
        nym_path = self.path + ".nyms"
        if os.path.exists(nym_path):
            with open(nym_path, "rb") as fh:
                data = fh.read()
            pos = 0
            while pos < len(data):
                n = struct.unpack(">I", data[pos:pos + 4])[0]
                rec = json.loads(data[pos + 4:pos + 4 + n])
                self._bump_nym(rec["period"], bytes.fromhex(rec["nym"]))
                pos += 4 + n

    def _write_entry(self, frame: bytes) -> None:
        if self._log is not None:
            self._log.write(struct.pack(">I", len(frame)) + frame)
            self._log.flush()

    def _write_nym(self, period: str, nym: bytes) -> None:
        if self._nym_log is not None:
            rec = json.dumps({"period": period, "nym": nym.hex()}, sort_keys=True).encode()
            self._nym_log.write(struct.pack(">I", len(rec)) + rec)
            self._nym_log.flush()

    def close(self) -> None:
        with self._lock:
            for fh in (self._log, self._nym_log):
                if fh is not None:
                    fh.close()
            self._log = None
            self._nym_log = None

    # -- core append --------------------------------------------------------

    def _validate(self, kind: str, payload: bytes) -> None:
        if kind not in _KINDS:
            raise ValidationFailed(f"unknown entry kind {kind!r}")
        try:
            doc = json.loads(payload)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationFailed(f"payload is not valid JSON: {exc}") from exc
        try:
            if kind == KIND_COMMENT:
                Basename.parse(doc["dom"])
                if len(bytes.fromhex(doc["m_digest"])) != 32:
                    raise ValidationFailed("bad digest length")
                _unb64(doc["ciphertext"])
                str(doc["website"])
            elif kind == KIND_GENESIS:
                gb = GenesisTuple.from_bytes(_unb64(doc["gb"]))
                if not gb.is_valid():
                    raise InvalidAttestation("genesis attestation does not verify")
            elif kind == KIND_CREDENTIAL:
                login = bytes.fromhex(doc["login_digest"])
                if len(login) != 32:
                    raise ValidationFailed("bad login digest")
                key = (login, doc["epoch"])
                if key in self._credentials:
                    raise DuplicateEpochCredential(doc["epoch"])
                _unb64(doc["cred"])
            elif kind == KIND_UPDATE:
                if len(bytes.fromhex(doc["login_digest"])) != 32:
                    raise ValidationFailed("bad login digest")
                _unb64(doc["u"])
            elif kind == KIND_EPOCH:
                label = doc["epoch"]
                if self._epochs and _epoch_key(label) <= _epoch_key(self._epochs[-1]):
                    raise NonMonotoneEpoch(label)
            elif kind == KIND_PURGE:
                _dt.date.fromisoformat(doc["before"])
        except (LedgerError, ValueError, KeyError, TypeError) as exc:
            if isinstance(exc, LedgerError):
                raise
            raise ValidationFailed(f"malformed {kind} payload: {exc}") from exc

    def _apply(self, entry: LedgerEntry, frame: bytes) -> None:
        doc = json.loads(entry.payload)
        self.entries.append(entry)
        prev = self.chain[-1] if self.chain else b"\x00" * 32
        self.chain.append(hash([prev, frame]))
        self.total_bytes += len(frame)
        if entry.kind == KIND_CREDENTIAL:
            self._credentials[(bytes.fromhex(doc["login_digest"]), doc["epoch"])] = _unb64(
                doc["cred"]
            )
        elif entry.kind == KIND_UPDATE:
            self._updates[bytes.fromhex(doc["login_digest"])] = _unb64(doc["u"])
        elif entry.kind == KIND_GENESIS:
            gb = GenesisTuple.from_bytes(_unb64(doc["gb"]))
            self._genesis.append(entry.index)
            self._verifier_counts[gb.pk_v] = self._verifier_counts.get(gb.pk_v, 0) + 1
        elif entry.kind == KIND_EPOCH:
            self._epochs.append(doc["epoch"])
        elif entry.kind == KIND_PURGE:
            self._apply_purge(_dt.date.fromisoformat(doc["before"]))

    def _apply_purge(self, before: _dt.date) -> None:
        # Purge only hides comment payloads; the nym index stays keyed by
        # period (new periods start empty, old ones are archival anyway).
        for entry in self.entries:
            if entry.kind != KIND_COMMENT or entry.index in self._purged:
                continue
            doc = json.loads(entry.payload)
            if Basename.parse(doc["dom"]).t < before:
                self._purged.add(entry.index)

    def append(self, kind: str, payload: bytes, timestamp: float | None = None) -> int:
        with self._lock:
            self._validate(kind, payload)
            index = len(self.entries)
            entry = LedgerEntry(
                index=index,
                kind=kind,
                timestamp=0.0 if timestamp is None else timestamp,
                payload=payload,
            )
            frame = entry.to_bytes()
            self._apply(entry, frame)
            self._write_entry(frame)
            return index

    def get_entry(self, index: int) -> LedgerEntry:
        with self._lock:
            if not 0 <= index < len(self.entries):
                raise NotFound(f"no entry {index}")
            if index in self._purged:
                raise NotFound(f"entry {index} purged")
            return self.entries[index]

    # -- nym index ----------------------------------------------------------

    def _bump_nym(self, period: str, nym: bytes) -> int:
        counts = self._nym_counts.setdefault(period, {})
        counts[nym] = counts.get(nym, 0) + 1
        return counts[nym]

    def register_nym(self, nym: bytes, period: _dt.date | None = None) -> bool:
        """Record one occurrence; True when the nym was fresh."""
        with self._lock:
            p = (period or self._clock()).isoformat()
            count = self._bump_nym(p, nym)
            self._write_nym(p, nym)
            return count == 1

    def query_nym(self, nym: bytes, period: _dt.date | None = None) -> int:
        with self._lock:
            p = (period or self._clock()).isoformat()
            return self._nym_counts.get(p, {}).get(nym, 0)

    # -- credentials / updates ----------------------------------------------

    def put_credential(self, login_digest: bytes, cred_bytes: bytes, epoch: str) -> int:
        return self.append(KIND_CREDENTIAL, credential_payload(login_digest, cred_bytes, epoch))

    def get_credential(self, login_digest: bytes, epoch: str) -> bytes:
        with self._lock:
            try:
                return self._credentials[(login_digest, epoch)]
            except KeyError:
                raise NotFound("no credential for this login and epoch") from None

    def put_update_msg(self, login_digest: bytes, u_bytes: bytes) -> int:
        return self.append(KIND_UPDATE, update_payload(login_digest, u_bytes))

    def get_update_msg(self, login_digest: bytes) -> bytes:
        with self._lock:
            try:
                return self._updates[login_digest]
            except KeyError:
                raise NotFound("no update message for this login") from None

    # -- genesis tuples -------------------------------------------------------

    def append_genesis(self, gb: GenesisTuple) -> int:
        if not gb.is_valid():
            raise InvalidAttestation("genesis attestation does not verify")
        return self.append(KIND_GENESIS, genesis_payload(gb))

    def list_genesis(self, offset: int = 0, limit: int = 100) -> list[GenesisTuple]:
        with self._lock:
            picked = self._genesis[offset:offset + limit]
            out = []
            for idx in picked:
                doc = json.loads(self.entries[idx].payload)
                out.append(GenesisTuple.from_bytes(_unb64(doc["gb"])))
            return out

    def genesis_count(self) -> int:
        with self._lock:
            return len(self._genesis)

    def verifier_stats(self) -> dict[bytes, int]:
        with self._lock:
            return dict(self._verifier_counts)

    # -- epochs ---------------------------------------------------------------

    def announce_epoch(self, epoch: str, pk_i_bytes: bytes) -> int:
        return self.append(KIND_EPOCH, epoch_payload(epoch, pk_i_bytes))

    def current_epoch(self) -> str | None:
        with self._lock:
            return self._epochs[-1] if self._epochs else None

    def epoch_pk(self, epoch: str) -> bytes:
        with self._lock:
            for entry in reversed(self.entries):
                if entry.kind == KIND_EPOCH:
                    doc = json.loads(entry.payload)
                    if doc["epoch"] == epoch:
                        return _unb64(doc["pk_i"])
            raise NotFound(f"epoch {epoch!r} never announced")

    # -- retention ------------------------------------------------------------

    def purge_comments(self, today: _dt.date | None = None,
                       keep_periods: int = RETENTION_PERIODS) -> int:
        """Drop comment payloads older than keep_periods; genesis,
        credential and update entries are never purged."""
        with self._lock:
            before = (today or self._clock()) - _dt.timedelta(days=keep_periods)
            already = len(self._purged)
            self.append(KIND_PURGE, purge_payload(before))
            return len(self._purged) - already

    # -- state digest -----------------------------------------------------------

    def state_digest(self) -> bytes:
        """Digest over the full reconstructed state (for replay checks)."""
        with self._lock:
            parts = [self.chain[-1] if self.chain else b"\x00" * 32]
            parts.append(",".join(sorted(str(i) for i in self._purged)))
            for period in sorted(self._nym_counts):
                parts.append(period)
                for nym in sorted(self._nym_counts[period]):
                    parts.append(nym)
                    parts.append(str(self._nym_counts[period][nym]))
            return hash(parts)

    def comment_entry_sizes(self) -> list[int]:
        with self._lock:
            return [
                len(e.to_bytes())
                for e in self.entries
                if e.kind == KIND_COMMENT
            ]

    def stats(self) -> dict:
        with self._lock:
            sizes = self.comment_entry_sizes()
            return {
                "entries": len(self.entries),
                "total_bytes": self.total_bytes,
                "genesis_count": len(self._genesis),
                "comment_entries": len(sizes),
                "mean_comment_entry_bytes": (sum(sizes) / len(sizes)) if sizes else 0.0,
            }
