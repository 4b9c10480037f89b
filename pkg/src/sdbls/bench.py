"""Timing and size measurements.

Absolute numbers depend on the machine; what is meant to carry over is the
shape: issuance cheaper than verification, scan cost linear in the list
size, indexed cost flat, reconstruction cheaper than dealing.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

from . import bls, pvss
from .credential import IssuerIdentity, issue_claims
from .curve import G2, SCALAR_SIZE, G2Point, scalar_random
from .presentation import (
    SessionPolicy,
    make_basic_proof,
    make_one_time_proof,
    make_session,
    verify_basic,
    verify_one_time,
)
from .revocation import RevocationList, build_index, is_revoked_indexed, is_revoked_scan

CSV_FIELDS = ("operation", "parameter", "mean_seconds", "bytes")


@dataclass(frozen=True)
class BenchRow:
    operation: str
    parameter: int
    mean_seconds: float
    bytes: int | None = None


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    environment: str = field(default_factory=lambda: environment())

    def __post_init__(self):
        self.rows.sort(key=lambda r: (r.operation, r.parameter))

    def extend(self, other: "BenchReport") -> "BenchReport":
        return BenchReport(self.rows + other.rows, self.environment)

    def series(self, operation: str) -> list[tuple[int, float]]:
        return [(r.parameter, r.mean_seconds) for r in self.rows if r.operation == operation]

    def to_csv(self, gnuplot: bool = False) -> str:
        buf = io.StringIO()
        if gnuplot:
            buf.write(f"# {self.environment}\n# " + " ".join(CSV_FIELDS) + "\n")
            for r in self.rows:
                buf.write(f"{r.operation} {r.parameter} {r.mean_seconds:.9f} {'' if r.bytes is None else r.bytes}\n")
            return buf.getvalue()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in self.rows:
            writer.writerow([r.operation, r.parameter, f"{r.mean_seconds:.9f}", "" if r.bytes is None else r.bytes])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"environment": self.environment, "rows": [asdict(r) for r in self.rows]}, indent=1)


def environment() -> str:
    return f"{platform.python_implementation()} {platform.python_version()} on {platform.machine()} {platform.processor() or platform.system()}"


def _mean_time(fn: Callable[[], object], reps: int) -> float:
    fn()  # warm-up, untimed
    samples = []
    for _ in range(max(1, reps)):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.fmean(samples)


def linear_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least squares ``(slope, intercept, r_squared)``."""
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    slope, intercept = statistics.linear_regression(xs, ys)
    r = statistics.correlation(xs, ys)
    return slope, intercept, r * r


def claim_counts(max_claims: int) -> list[int]:
    counts, k = [], 1
    while k < max_claims:
        counts.append(k)
        k *= 2
    counts.append(max_claims)
    return counts


def bench_issue_verify(max_claims: int, reps: int = 3, seed: int = 0) -> BenchReport:
    """Issue, one-time present and verify k claims for geometric k up to max_claims.

    ``verify-basic`` and ``verify`` (one-time) are both reported; mean_seconds
    is the total for k claims.
    """
    if max_claims < 1:
        raise ValueError("max_claims must be >= 1")
    rng = random.Random(seed)
    issuer = IssuerIdentity(bls.keygen(rng))
    policy = SessionPolicy("bench", 3600, now=lambda: 0)
    session = make_session("bench", 0)
    rows = []
    for k in claim_counts(max_claims):
        texts = [f"claim-{j}=value" for j in range(k)]
        issued = []
        rows.append(BenchRow("issue", k, _mean_time(lambda: issued.append(issue_claims(issuer, texts, rng)[0]), reps)))
        claims = issued[-1]
        proofs = []
        rows.append(
            BenchRow("present", k, _mean_time(lambda: proofs.append([make_one_time_proof(c, session, rng) for c in claims]), reps))
        )
        basic = [make_basic_proof(c) for c in claims]
        otp = proofs[-1]
        rows.append(BenchRow("verify-basic", k, _mean_time(lambda: all(verify_basic(issuer.pk, p) for p in basic), reps)))
        rows.append(BenchRow("verify", k, _mean_time(lambda: all(verify_one_time(issuer.pk, p, policy) for p in otp), reps)))
    return BenchReport(rows)


def random_revocation_list(size: int, rng: random.Random) -> RevocationList:
    return RevocationList(scalar_random(rng) for _ in range(size))


def bench_revocation_scan(list_sizes: Iterable[int], reps: int = 3, seed: int = 0) -> BenchReport:
    """One basic-proof verification followed by a revocation check per size.

    ``scan`` multiplies every entry; ``indexed`` looks ``r`` up in a
    prebuilt index (index construction is reported separately).
    """
    sizes = list(list_sizes)
    if sizes != sorted(sizes):
        raise ValueError("list sizes must be ascending")
    rng = random.Random(seed)
    issuer = IssuerIdentity(bls.keygen(rng))
    claims, _ = issue_claims(issuer, ["bench=true"], rng)
    proof = make_basic_proof(claims[0])
    rows = []
    for size in sizes:
        lst = random_revocation_list(size, rng)

        def scan():
            return verify_basic(issuer.pk, proof) and not is_revoked_scan(proof.r, lst)

        start = time.perf_counter()
        index = build_index(lst)
        build = time.perf_counter() - start

        def indexed():
            return verify_basic(issuer.pk, proof) and not is_revoked_indexed(proof.r, index, lst)

        entry_bytes = len(lst.to_binary()) // size if size else SCALAR_SIZE
        rows.append(BenchRow("scan", size, _mean_time(scan, reps), entry_bytes))
        rows.append(BenchRow("indexed", size, _mean_time(indexed, max(reps, 20)), entry_bytes))
        rows.append(BenchRow("index-build", size, build))
    return BenchReport(rows)


def _scan_chunk(args: tuple[bytes, list[int]]) -> bool:
    r = G2Point.from_bytes(args[0])
    g2 = G2()
    return any(g2 * rev == r for rev in args[1])


def parallel_scan(r: G2Point, lst: RevocationList, pool: ProcessPoolExecutor, workers: int) -> bool:
    """Same answer as :func:`is_revoked_scan`, with the list split across processes."""
    entries = lst.entries
    step = -(-len(entries) // workers) or 1
    chunks = [(r.to_bytes(), list(entries[i:i + step])) for i in range(0, len(entries), step)]
    return any(pool.map(_scan_chunk, chunks))


def bench_parallel_scan(list_sizes: Iterable[int], workers: int, reps: int = 3, seed: int = 0) -> BenchReport:
    """Scan split over ``workers`` processes.

    Shows how the scan scales with cores. This is extra data, not part of
    the single-core measurements.
    """
    rng = random.Random(seed)
    issuer = IssuerIdentity(bls.keygen(rng))
    claims, _ = issue_claims(issuer, ["bench=true"], rng)
    proof = make_basic_proof(claims[0])
    rows = []
    with ProcessPoolExecutor(workers) as pool:
        for size in list_sizes:
            lst = random_revocation_list(size, rng)

            def scan():
                return verify_basic(issuer.pk, proof) and not parallel_scan(proof.r, lst, pool, workers)

            rows.append(BenchRow(f"scan-parallel/w={workers}", size, _mean_time(scan, reps)))
    return BenchReport(rows)


def bench_pvss(configs: Iterable[tuple[int, int]], reps: int = 3, seed: int = 0) -> BenchReport:
    """Deal and reconstruct per (t, n). Operation names carry t; parameter is n."""
    rng = random.Random(seed)
    rows = []
    for t, n in configs:
        keys = [pvss.IssuerDhKeys.generate(rng) for _ in range(n)]
        pks = [k.y for k in keys]
        rev = scalar_random(rng)
        dealt = []
        rows.append(BenchRow(f"deal/t={t}", n, _mean_time(lambda: dealt.append(pvss.deal(rev, t, n, pks, rng)), reps)))
        bundle, transcript = dealt[-1]
        shares = [pvss.RevealedShare(i, transcript.shares[i]) for i in range(1, t + 1)]
        rows.append(BenchRow(f"reconstruct/t={t}", n, _mean_time(lambda: pvss.reconstruct(shares, bundle), reps)))
    return BenchReport(rows)


def measure_sizes(seed: int = 0, session: str = "t1") -> dict[str, int]:
    """Raw cryptographic byte counts of real objects, without JSON/base64 envelope."""
    rng = random.Random(seed)
    issuer = IssuerIdentity(bls.keygen(rng))
    claims, records = issue_claims(issuer, ["above18=true"], rng)
    c = claims[0]
    otp = make_one_time_proof(c, session, rng)
    lst = RevocationList([records[0].rev])
    return {
        "signed_claim_core": len(c.h) + len(c.r.to_bytes()) + len(c.sigma.to_bytes()),
        "one_time_proof_core": len(otp.h)
        + len(otp.r.to_bytes())
        + len(otp.sigma_prime.to_bytes())
        + len(otp.pk_t.to_bytes())
        + len(otp.sigma_t.to_bytes())
        + len(otp.t.encode("utf-8")),
        "revocation_entry": len(lst.to_binary()),
    }
