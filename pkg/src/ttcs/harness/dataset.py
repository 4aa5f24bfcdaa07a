"""Traffic datasets for the replay harness: (t, u, m) rows in JSONL or
CSV, plus a synthetic generator."""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass
from pathlib import Path

DELETED_NICK = "[deleted]"
SYNTHETIC_DELETED = "__deleted__"


class DatasetError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class TrafficEvent:
    t: float
    u: str
    m: str


def _normalize(events):
    out = [
        TrafficEvent(t=e.t, u=SYNTHETIC_DELETED if e.u == DELETED_NICK else e.u, m=e.m)
        for e in events
    ]
    out.sort(key=lambda e: e.t)
    return out


def load_dataset(path) -> list[TrafficEvent]:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return _normalize(_parse_csv(path, text))
    return _normalize(_parse_jsonl(path, text))


def _parse_jsonl(path, text):
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            events.append(TrafficEvent(t=float(doc["t"]), u=str(doc["u"]), m=str(doc["m"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DatasetError(path, lineno, f"bad JSONL row: {exc}") from exc
    return events


def _parse_csv(path, text):
    events = []
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row or (lineno == 1 and [c.strip().lower() for c in row[:3]] == ["t", "u", "m"]):
            continue
        if len(row) < 3:
            raise DatasetError(path, lineno, f"expected 3 columns, got {len(row)}")
        try:
            events.append(TrafficEvent(t=float(row[0]), u=row[1], m=",".join(row[2:])))
        except ValueError as exc:
            raise DatasetError(path, lineno, f"bad time value: {exc}") from exc
    return events


def gen_synthetic(users: int, comments: int, out, seed: int = 1,
                  span_hours: float = 24.0) -> list[TrafficEvent]:
    """Synthetic day of traffic: zipf-ish user activity, uniform times."""
    rng = random.Random(seed)
    weights = [1.0 / (i + 1) ** 0.8 for i in range(users)]
    total = sum(weights)
    weights = [w / total for w in weights]
    events = []
    for i in range(comments):
        t = rng.uniform(0.0, span_hours * 3600.0)
        u = rng.choices(range(users), weights=weights)[0]
        m = f"comment {i} from user {u}: " + "".join(
            rng.choices("abcdefghijklmnopqrstuvwxyz ", k=rng.randrange(20, 120))
        )
        events.append(TrafficEvent(t=t, u=f"user-{u}", m=m))
    events.sort(key=lambda e: e.t)
    if out is not None:
        with open(out, "w") as fh:
            for e in events:
                fh.write(json.dumps({"t": e.t, "u": e.u, "m": e.m}) + "\n")
    return events
