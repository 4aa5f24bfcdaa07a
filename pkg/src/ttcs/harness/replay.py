"""Traffic replay: precompute issuing and commenting, FCFS verification
in virtual time, core estimation and the cost model.

The replay clock is virtual: arrival times follow the dataset plus the
measured client/issuer preprocessing deltas, per-job service times are
measured wall-clock, and latency is evaluated in virtual time, so a
day-long trace replays in minutes.  Nym registration happens at
dispatch in arrival order, which keeps the published/rejected partition
deterministic for a given prepared stream.
"""

from __future__ import annotations

import base64
import datetime as _dt
import json
import secrets
import statistics
import time
from dataclasses import dataclass, field

from .. import daa, identity_audit, ledger as ledger_mod, scheme
from ..primitives import hash, pke_keygen
from .dataset import TrafficEvent

DEFAULT_BASE_DATE = _dt.date(2020, 1, 27)
DEFAULT_LATENCY_TARGET = 0.1
DEFAULT_ANONYMITY_SET = 100


@dataclass
class CostModel:
    dollars_per_core_hour: float = 0.05

    def __post_init__(self):
        if self.dollars_per_core_hour < 0:
            raise ValueError("cost rate must be nonnegative")


@dataclass
class PreparedJob:
    idx: int
    arrival: float
    t: float
    user: str
    period: _dt.date
    dom: scheme.Basename | None
    message: bytes
    entry_index: int | None
    over_threshold: bool
    injected_duplicate: bool = False


@dataclass
class PrecomputeStats:
    issue_u_times: list = field(default_factory=list)
    issue_i_times: list = field(default_factory=list)
    comment_times: list = field(default_factory=list)
    genesis_count: int = 0
    over_threshold: int = 0


@dataclass
class Measure:
    mean: float
    median: float
    variance: float

    @classmethod
    def of(cls, xs):
        if not xs:
            return cls(0.0, 0.0, 0.0)
        return cls(
            mean=statistics.fmean(xs),
            median=statistics.median(xs),
            variance=statistics.pvariance(xs) if len(xs) > 1 else 0.0,
        )

    def as_dict(self):
        return {"mean": self.mean, "median": self.median, "variance": self.variance}


@dataclass
class SimReport:
    cores: int
    total: int
    published: int
    rejected_duplicate: int
    rejected_over_threshold: int
    rejected_invalid: int
    issue_u: Measure
    issue_i: Measure
    commenting: Measure
    verification: Measure
    latency: Measure
    max_latency: float
    latency_target: float
    fraction_within_target: float
    genesis_tuples: int
    ledger_bytes: int
    mean_comment_entry_bytes: float
    duration_hours: float
    mode: str

    def as_dict(self):
        return {
            "cores": self.cores,
            "counts": {
                "total": self.total,
                "published": self.published,
                "rejected_duplicate": self.rejected_duplicate,
                "rejected_over_threshold": self.rejected_over_threshold,
                "rejected_invalid": self.rejected_invalid,
            },
            "measures": {
                "issuing_user": self.issue_u.as_dict(),
                "issuing_issuer": self.issue_i.as_dict(),
                "commenting": self.commenting.as_dict(),
                "verification": self.verification.as_dict(),
                "latency": self.latency.as_dict(),
            },
            "max_latency": self.max_latency,
            "latency_target": self.latency_target,
            "fraction_within_target": self.fraction_within_target,
            "genesis_tuples": self.genesis_tuples,
            "ledger_bytes": self.ledger_bytes,
            "mean_comment_entry_bytes": self.mean_comment_entry_bytes,
            "duration_hours": self.duration_hours,
            "mode": self.mode,
        }

    def render_table(self) -> str:
        rows = [
            ("issuing (user)", self.issue_u),
            ("issuing (issuer)", self.issue_i),
            ("commenting", self.commenting),
            ("verification", self.verification),
            ("latency", self.latency),
        ]
        lines = [f"{'measure':<18} {'mean':>9} {'median':>9} {'variance':>10}"]
        for name, m in rows:
            lines.append(f"{name:<18} {m.mean:>9.4f} {m.median:>9.4f} {m.variance:>10.6f}")
        lines.append("")
        lines.append(
            f"{'cores':>6} {'published':>10} {'dup':>6} {'over':>6} {'invalid':>8} "
            f"{'max lat':>9} {'<target':>8} {'genesis':>8} {'ledger MB':>10}"
        )
        lines.append(
            f"{self.cores:>6} {self.published:>10} {self.rejected_duplicate:>6} "
            f"{self.rejected_over_threshold:>6} {self.rejected_invalid:>8} "
            f"{self.max_latency:>9.3f} {self.fraction_within_target:>7.2%} "
            f"{self.genesis_tuples:>8} {self.ledger_bytes / 1e6:>10.2f}"
        )
        return "\n".join(lines)


class ReplayEnv:
    """Everything a replay run needs: issuer, verifier, ledger, billing key."""

    def __init__(self, tau: int = scheme.DEFAULT_TAU, extended: bool = False,
                 ledger=None, base_date: _dt.date = DEFAULT_BASE_DATE,
                 anonymity_set: int = DEFAULT_ANONYMITY_SET, epoch: str = "e1",
                 seed: int = 1):
        self.params = scheme.setup(128, tau=tau)
        self.tau = tau
        self.extended = extended
        self.anonymity_set = anonymity_set
        self.base_date = base_date
        self.seed = seed
        _, isk = scheme.keygen(self.params, epoch=epoch)
        self.issuer = identity_audit.IssuerNode(self.params, isk)
        self.verifier = identity_audit.VerifierNode()
        self.issuer.accredit(self.verifier.verify_key)
        self.ledger = ledger if ledger is not None else ledger_mod.Ledger()
        self.ledger.announce_epoch(epoch, self.pk.to_bytes())
        box = pke_keygen(seed=hash(["tt-replay-billing", str(seed)]))
        self.billing = scheme.BillingKey(public_key=box.public_key, t_b="billing-1")
        self.billing_sk = box.secret_key
        self.users: dict[str, identity_audit.RegistrationResult] = {}
        self.gb_pool: list[scheme.GenesisTuple] = []

    @property
    def pk(self):
        return self.issuer.pk

    def period_of(self, t: float) -> _dt.date:
        return self.base_date + _dt.timedelta(days=int(t // 86400.0))


def precompute(events: list[TrafficEvent], env: ReplayEnv):
    """Issue on first appearance, then sign+encrypt each comment and
    append it to the ledger; arrival = t + the measured deltas."""
    jobs: list[PreparedJob] = []
    stats = PrecomputeStats()
    seq_counter: dict[tuple[str, _dt.date], int] = {}
    for idx, ev in enumerate(events):
        issue_u = issue_i = 0.0
        if ev.u not in env.users:
            t0 = time.perf_counter()
            sk_u, r_u, user_hash = identity_audit.user_begin(
                ev.u, f"pw-{env.seed}-{ev.u}", ev.u.encode()
            )
            t1 = time.perf_counter()
            reg = _register_prepared(env, ev.u, sk_u, r_u, user_hash)
            t2 = time.perf_counter()
            issue_u = t1 - t0 + reg[1]
            issue_i = reg[2]
            stats.issue_u_times.append(issue_u)
            stats.issue_i_times.append(issue_i)
            stats.genesis_count += 1
        period = env.period_of(ev.t)
        key = (ev.u, period)
        seq = seq_counter.get(key, 0) + 1
        seq_counter[key] = seq
        message = ev.m.encode()
        if seq > env.tau:
            stats.over_threshold += 1
            jobs.append(
                PreparedJob(
                    idx=idx, arrival=ev.t, t=ev.t, user=ev.u, period=period,
                    dom=None, message=message, entry_index=None, over_threshold=True,
                )
            )
            continue
        dom = scheme.Basename(period, seq)
        reg = env.users[ev.u]
        t0 = time.perf_counter()
        _, record = scheme.comment(
            env.pk, reg.sk_u, reg.cred, dom, message,
            params=env.params,
            gb_subset=_gb_subset(env, reg) if env.extended else None,
            gb_query_time=period.isoformat() if env.extended else "",
        )
        r = secrets.token_bytes(32)
        ciphertext = scheme.encrypt_for_ledger(env.billing, record, r)
        t1 = time.perf_counter()
        comment_time = t1 - t0
        stats.comment_times.append(comment_time)
        payload = ledger_mod.comment_payload(
            ciphertext, record.m_digest, "w1", dom, env.billing.t_b
        )
        entry_index = env.ledger.append(ledger_mod.KIND_COMMENT, payload)
        arrival = ev.t + comment_time + issue_i + issue_u
        jobs.append(
            PreparedJob(
                idx=idx, arrival=arrival, t=ev.t, user=ev.u, period=period,
                dom=dom, message=message, entry_index=entry_index, over_threshold=False,
            )
        )
    return jobs, stats


def _register_prepared(env: ReplayEnv, user: str, sk_u, r_u, user_hash):
    """Issuer+verifier side of registration, timed per side."""
    issuer, verifier = env.issuer, env.verifier
    t_user = 0.0
    sid = issuer.create_session()
    issuer.receive_login(sid, user, user_hash)
    t0 = time.perf_counter()
    c_i, sig_i = issuer.issuer_commit(sid)
    t_issuer = time.perf_counter() - t0
    psi = verifier.attest(user.encode(), c_i, r_u, sig_i, issuer.verify_key)
    t0 = time.perf_counter()
    issuer.issuer_accept(sid, psi, verifier.verify_key)
    t_issuer += time.perf_counter() - t0
    t0 = time.perf_counter()
    com, proof, gb = scheme.join_user(
        env.pk, env.params, sk_u, nonce=sid,
        verifier_attest=(verifier.verify_key, verifier.attest_genesis),
    )
    t_user += time.perf_counter() - t0
    t0 = time.perf_counter()
    cred = issuer.join(sid, com, proof, ledger=env.ledger)
    t_issuer += time.perf_counter() - t0
    env.ledger.append_genesis(gb)
    reg = identity_audit.RegistrationResult(
        sk_u=sk_u, cred=cred, gb=gb, sid=sid, c_i=c_i, audit_selected=False
    )
    env.users[user] = reg
    env.gb_pool.append(gb)
    return reg, t_user, t_issuer


def _gb_subset(env: ReplayEnv, reg) -> list[scheme.GenesisTuple]:
    pool = env.gb_pool
    n = min(env.anonymity_set, len(pool))
    subset = pool[-n:]
    if reg.gb not in subset:
        subset = [reg.gb] + subset[1:]
    return subset


def simulate(jobs: list[PreparedJob], cores: int, env: ReplayEnv,
             stats: PrecomputeStats | None = None,
             latency_target: float = DEFAULT_LATENCY_TARGET) -> SimReport:
    """Dispatch jobs FCFS to `cores` virtual workers; each job decrypts
    its ledger entry, verifies, and registers the nym."""
    if cores < 1:
        raise ValueError("cores must be >= 1")
    stats = stats or PrecomputeStats()
    order = sorted(jobs, key=lambda j: (j.arrival, j.idx))
    free_at = [0.0] * cores
    verify_times = []
    latencies = []
    published = dup = over = invalid = 0
    for job in order:
        w = min(range(cores), key=free_at.__getitem__)
        start = max(job.arrival, free_at[w])
        t0 = time.perf_counter()
        outcome = _process(job, env)
        service = time.perf_counter() - t0
        t_f = start + service
        free_at[w] = t_f
        if outcome == "published":
            published += 1
            verify_times.append(service)
            latencies.append(t_f - job.arrival)
        elif outcome == "duplicate":
            dup += 1
            verify_times.append(service)
            latencies.append(t_f - job.arrival)
        elif outcome == "over_threshold":
            over += 1
        else:
            invalid += 1
    ledger_stats = env.ledger.stats()
    duration_hours = max(free_at) / 3600.0 if jobs else 0.0
    within = sum(1 for x in latencies if x <= latency_target)
    return SimReport(
        cores=cores,
        total=len(jobs),
        published=published,
        rejected_duplicate=dup,
        rejected_over_threshold=over,
        rejected_invalid=invalid,
        issue_u=Measure.of(stats.issue_u_times),
        issue_i=Measure.of(stats.issue_i_times),
        commenting=Measure.of(stats.comment_times),
        verification=Measure.of(verify_times),
        latency=Measure.of(latencies),
        max_latency=max(latencies) if latencies else 0.0,
        latency_target=latency_target,
        fraction_within_target=(within / len(latencies)) if latencies else 1.0,
        genesis_tuples=ledger_stats["genesis_count"],
        ledger_bytes=ledger_stats["total_bytes"],
        mean_comment_entry_bytes=ledger_stats["mean_comment_entry_bytes"],
        duration_hours=duration_hours,
        mode="extended" if env.extended else "base",
    )


def _process(job: PreparedJob, env: ReplayEnv) -> str:
    if job.over_threshold:
        return "over_threshold"
    try:
        entry = env.ledger.get_entry(job.entry_index)
        doc = json.loads(entry.payload)
        record = scheme.decrypt_entry(env.billing_sk, base64.b64decode(doc["ciphertext"]))
        dom = scheme.Basename.parse(doc["dom"])
        if not scheme.validate_basename(dom, job.period, env.tau):
            return "invalid"
        gb_subset = None
        if env.extended:
            gb_subset = _gb_subset(env, env.users[job.user])
        if not scheme.verify_comment(
            env.pk, record.nym, dom, job.message, record,
            params=env.params, gb_subset=gb_subset,
        ):
            return "invalid"
        fresh = env.ledger.register_nym(record.nym.to_bytes(), period=job.period)
        return "published" if fresh else "duplicate"
    except Exception:
        return "invalid"


def sample_service_time(env: ReplayEnv, runs: int = 32) -> float:
    """Median of warm verification runs for a random comment."""
    reg = next(iter(env.users.values()), None)
    if reg is None:
        sk_u, r_u, user_hash = identity_audit.user_begin("sampler", "pw", b"nbd")
        reg, _, _ = _register_prepared(env, "sampler", sk_u, r_u, user_hash)
    dom = scheme.Basename(env.base_date, env.tau)
    gb_subset = _gb_subset(env, reg) if env.extended else None
    nym, record = scheme.comment(
        env.pk, reg.sk_u, reg.cred, dom, b"sample", params=env.params, gb_subset=gb_subset
    )
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        scheme.verify_comment(env.pk, nym, dom, b"sample", record,
                              params=env.params, gb_subset=gb_subset)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def estimate_cores(events: list[TrafficEvent], latency_target: float = DEFAULT_LATENCY_TARGET,
                   service_time: float | None = None, env: ReplayEnv | None = None,
                   max_cores: int = 512) -> int:
    """Minimal FCFS worker count meeting the latency target, using a
    sampled constant verification time."""
    if service_time is None:
        env = env or ReplayEnv()
        service_time = sample_service_time(env)
    if not events:
        return 1
    arrivals = sorted(e.t for e in events)
    cores = 1
    while cores <= max_cores:
        free_at = [0.0] * cores
        ok = True
        for t in arrivals:
            w = min(range(cores), key=free_at.__getitem__)
            start = max(t, free_at[w])
            t_f = start + service_time
            free_at[w] = t_f
            if t_f > t + latency_target:
                ok = False
                break
        if ok:
            return cores
        cores += 1
    raise RuntimeError(f"no feasible core count up to {max_cores}")


def cost_report(report: SimReport, model: CostModel | None = None,
                hours: float | None = None) -> float:
    """Core-hours times the hourly rate, rounded to cents."""
    model = model or CostModel()
    h = report.duration_hours if hours is None else hours
    return round(report.cores * h * model.dollars_per_core_hour, 2)
