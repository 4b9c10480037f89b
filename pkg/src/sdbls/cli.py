"""``sdbls`` command line.

Exit codes: 0 success, 1 verification false / revoked / quorum refused or
dealer complaint, 2 usage or malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import secrets
import sys
import time
from pathlib import Path
from typing import Sequence

from . import bench, bls, harness, pvss
from .codec import b64d, b64e
from .credential import (
    KDF_SHA256,
    KDFS,
    IssuerIdentity,
    SignedClaim,
    issue_claims,
    keypair_from_json,
    keypair_to_json,
    load_registry,
)
from .curve import EncodingError, G1Point, G2Point, scalar_from_bytes, scalar_random, scalar_to_bytes
from .presentation import (
    OneTimeProof,
    SessionPolicy,
    Verdict,
    check_one_time,
    make_basic_proof,
    make_one_time_proof,
    make_session,
    proof_from_json,
    verify_basic,
)
from .revocation import RevocationList, is_revoked_scan

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _rng(args) -> random.Random:
    seed = args.seed if args.seed is not None else os.environ.get("SDBLS_SEED")
    if seed is None:
        return secrets.SystemRandom()
    return random.Random(str(seed))


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise EncodingError(f"{path}: {err}") from err


def _write(args, text: str) -> None:
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def _issuer_pk(path) -> G2Point:
    obj = _read_json(path)
    if not isinstance(obj, dict) or "pk" not in obj:
        raise EncodingError(f"{path}: no 'pk' field")
    return G2Point.from_bytes(b64d(obj["pk"]))


def _dh_pks(paths: Sequence[str]) -> list[G1Point]:
    out = []
    for path in paths:
        obj = _read_json(path)
        if not isinstance(obj, dict) or "y" not in obj:
            raise EncodingError(f"{path}: no 'y' field")
        out.append(G1Point.from_bytes(b64d(obj["y"])))
    return out


def _load_claims(path) -> list[SignedClaim]:
    obj = _read_json(path)
    items = obj if isinstance(obj, list) else [obj]
    return [SignedClaim.from_json(c) for c in items]


def cmd_keygen(args) -> int:
    rng = _rng(args)
    if args.kind == "dh":
        keys = pvss.IssuerDhKeys.generate(rng)
        out = {"x": b64e(scalar_to_bytes(keys.x)), "y": b64e(keys.y.to_bytes())}
    else:
        out = keypair_to_json(bls.keygen(rng))
    _write(args, _dump(out))
    return EXIT_OK


def cmd_issue(args) -> int:
    keys = keypair_from_json(_read_json(args.key))
    issuer = IssuerIdentity(keys, args.registry)
    claims, _ = issue_claims(issuer, args.claim, _rng(args), args.kdf)
    _write(args, _dump([c.to_json() for c in claims]))
    return EXIT_OK


def cmd_present(args) -> int:
    claims = _load_claims(args.claims)
    if not 0 <= args.index < len(claims):
        raise UsageError(f"claim index {args.index} out of range (have {len(claims)})")
    claim = claims[args.index]
    if args.mode == "basic":
        proof = make_basic_proof(claim, args.disclose)
    else:
        iat = int(args.iat if args.iat is not None else time.time())
        proof = make_one_time_proof(claim, make_session(args.audience, iat), _rng(args), args.disclose)
    _write(args, _dump(proof.to_json()))
    return EXIT_OK


def cmd_verify(args) -> int:
    issuer_pk = _issuer_pk(args.issuer)
    proof = proof_from_json(_read_json(args.proof))
    if isinstance(proof, OneTimeProof):
        now = args.now if args.now is not None else time.time()
        policy = SessionPolicy(args.audience, args.max_age, now=lambda: now)
        verdict = check_one_time(issuer_pk, proof, policy, args.kdf)
    else:
        verdict = Verdict.ACCEPTED if verify_basic(issuer_pk, proof, args.kdf) else Verdict.REJECTED_SIGNATURE
    if verdict is Verdict.ACCEPTED and args.revocations:
        if is_revoked_scan(proof.r, RevocationList.load(args.revocations)):
            verdict = Verdict.REVOKED
    if verdict is Verdict.ACCEPTED:
        print(verdict.value)
        return EXIT_OK
    print(verdict.value, file=sys.stderr)
    return EXIT_FALSE


def cmd_revoke_list(args) -> int:
    lst = RevocationList.load(args.list)
    revs = [scalar_from_bytes(b64d(r)) for r in args.rev or ()]
    if args.h:
        if not args.registry:
            raise UsageError("--h needs --registry")
        by_h = {rec.h: rec.rev for rec in load_registry(args.registry)}
        for h in args.h:
            try:
                revs.append(by_h[b64d(h)])
            except KeyError:
                raise UsageError(f"no registry record for H={h}") from None
    for rev in revs:
        if not lst.publish(rev):
            print(f"already listed: {b64e(scalar_to_bytes(rev))}", file=sys.stderr)
    lst.save(args.list)
    print(len(lst))
    return EXIT_OK


def cmd_deal(args) -> int:
    t, n = _quorum(args.quorum)
    pks = _dh_pks(args.issuer_pks)
    rng = _rng(args)
    rev = scalar_from_bytes(b64d(args.secret)) if args.secret else scalar_random(rng)
    bundle, _ = pvss.deal(rev, t, n, pks, rng)
    _write(args, _dump(bundle.to_json()))
    print(f"r {b64e(bundle.r.to_bytes())}", file=sys.stderr)
    return EXIT_OK


def cmd_accept_share(args) -> int:
    obj = _read_json(args.key)
    x = scalar_from_bytes(b64d(obj["x"]))
    keys = pvss.IssuerDhKeys(x, G1Point.generator() * x)
    bundle = pvss.DealerBundle.from_json(_read_json(args.bundle))
    if args.issuer_pks and not pvss.verify_deal(bundle, _dh_pks(args.issuer_pks)):
        print("complaint: deal failed public verification", file=sys.stderr)
        return EXIT_FALSE
    try:
        s = pvss.accept_share(keys, args.index, bundle)
    except pvss.ShareComplaint as err:
        print(f"complaint: {err}", file=sys.stderr)
        return EXIT_FALSE
    _write(args, _dump(pvss.RevealedShare(args.index, s).to_json()))
    return EXIT_OK


def cmd_reveal(args) -> int:
    share = pvss.RevealedShare.from_json(_read_json(args.share))
    bundle = pvss.DealerBundle.from_json(_read_json(args.bundle))
    proof = pvss.prove_share_possession(share.i, share.s, bundle, _rng(args))
    out = share.to_json()
    out["proof"] = proof.to_json()
    _write(args, _dump(out))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    bundle = pvss.DealerBundle.from_json(_read_json(args.bundle))
    shares = []
    for path in args.shares:
        obj = _read_json(path)
        share = pvss.RevealedShare.from_json(obj)
        if "proof" in obj:
            proof = pvss.PossessionProof.from_json(obj["proof"])
            if proof.i != share.i or not pvss.verify_share_possession(proof, bundle):
                print(f"share {share.i}: possession proof rejected", file=sys.stderr)
                return EXIT_FALSE
        shares.append(share)
    try:
        rev = pvss.reconstruct(shares, bundle)
    except (pvss.InvalidShare, pvss.InsufficientShares) as err:
        print(str(err), file=sys.stderr)
        return EXIT_FALSE
    if args.list:
        lst = RevocationList.load(args.list)
        lst.publish(rev)
        lst.save(args.list)
    _write(args, b64e(scalar_to_bytes(rev)) + "\n")
    return EXIT_OK


def cmd_ceremony(args) -> int:
    config = harness.QuorumConfig.parse(args.quorum)
    seed = args.seed if args.seed is not None else os.environ.get("SDBLS_SEED", "0")
    record = harness.run_issuance_ceremony(config, args.claim, seed, args.kdf)
    status = EXIT_OK
    if args.revoke is not None:
        voters = [int(v) for v in args.voters.split(",")] if args.voters else list(range(1, config.vote_quorum + 1))
        outcome = harness.request_revocation(record, args.revoke, voters)
        print(f"revocation: {outcome.status}", file=sys.stderr)
        if outcome.status != "revoked":
            status = EXIT_FALSE
    _write(args, record.dumps())
    return status


def cmd_bench(args) -> int:
    which = set(args.which)
    report = bench.BenchReport([])
    if "issue" in which or "all" in which:
        report = report.extend(bench.bench_issue_verify(args.max_claims, args.reps))
    if "scan" in which or "all" in which:
        sizes = [int(s) for s in args.sizes.split(",")]
        report = report.extend(bench.bench_revocation_scan(sizes, args.reps))
        if args.parallel > 1:
            report = report.extend(bench.bench_parallel_scan(sizes, args.parallel, args.reps))
    if "pvss" in which or "all" in which:
        report = report.extend(bench.bench_pvss([_quorum(q) for q in args.configs.split(",")], args.reps))
    if "sizes" in which or "all" in which:
        sizes = bench.measure_sizes()
        report = report.extend(bench.BenchReport([bench.BenchRow(f"size/{k}", 0, 0.0, v) for k, v in sizes.items()]))
    if args.format == "json":
        _write(args, report.to_json() + "\n")
    else:
        _write(args, report.to_csv(gnuplot=args.gnuplot))
    return EXIT_OK


def _quorum(text: str) -> tuple[int, int]:
    try:
        t, n = (int(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"quorum must look like t:n, got {text!r}") from None
    return t, n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", help="deterministic RNG seed (testing only); also SDBLS_SEED")
    common.add_argument("--kdf", choices=KDFS, default=KDF_SHA256, help="claim digest function")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="sdbls", description="Selective-disclosure BLS credentials")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("keygen", parents=[common], help="BLS issuer key or revocation-issuer DH key")
    s.add_argument("--kind", choices=("bls", "dh"), default="bls")
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("issue", parents=[common], help="issue signed claims")
    s.add_argument("--key", required=True)
    s.add_argument("--claim", action="append", required=True)
    s.add_argument("--registry", help="append-only revocation registry (JSON lines)")
    s.set_defaults(func=cmd_issue)

    s = sub.add_parser("present", parents=[common], help="build a basic or one-time proof")
    s.add_argument("--claims", required=True)
    s.add_argument("--index", type=int, default=0)
    s.add_argument("--mode", choices=("basic", "one-time"), default="one-time")
    s.add_argument("--audience", default="verifier")
    s.add_argument("--iat", type=int, help="session timestamp (default now)")
    s.add_argument("--disclose", action="store_true")
    s.set_defaults(func=cmd_present)

    s = sub.add_parser("verify", parents=[common], help="verify a proof, then check revocation")
    s.add_argument("--issuer", required=True, help="JSON file with the issuer 'pk'")
    s.add_argument("--proof", required=True)
    s.add_argument("--revocations", help="revocation list file")
    s.add_argument("--audience", default="verifier")
    s.add_argument("--max-age", type=float, default=300.0)
    s.add_argument("--now", type=float)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("revoke-list", parents=[common], help="append revocations to a public list")
    s.add_argument("--list", required=True)
    s.add_argument("--rev", action="append", help="base64url revocation scalar")
    s.add_argument("--h", action="append", help="claim digest to look up in --registry")
    s.add_argument("--registry")
    s.set_defaults(func=cmd_revoke_list)

    s = sub.add_parser("deal", parents=[common], help="share a revocation secret")
    s.add_argument("--quorum", required=True, help="t:n")
    s.add_argument("--issuer-pks", nargs="+", required=True, help="DH key files, in index order")
    s.add_argument("--secret", help="base64url rev (default: fresh)")
    s.set_defaults(func=cmd_deal)

    s = sub.add_parser("accept-share", parents=[common], help="decrypt and check one share")
    s.add_argument("--key", required=True)
    s.add_argument("--index", type=int, required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--issuer-pks", nargs="*", help="run the public deal check first")
    s.set_defaults(func=cmd_accept_share)

    s = sub.add_parser("reveal", parents=[common], help="publish a share with a possession proof")
    s.add_argument("--share", required=True)
    s.add_argument("--bundle", required=True)
    s.set_defaults(func=cmd_reveal)

    s = sub.add_parser("reconstruct", parents=[common], help="recover rev from revealed shares")
    s.add_argument("--bundle", required=True)
    s.add_argument("--shares", nargs="+", required=True)
    s.add_argument("--list", help="also publish rev to this revocation list")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("ceremony", parents=[common], help="run the simulated threshold ceremony")
    s.add_argument("--quorum", required=True, help="t:n or t:n:vote_quorum")
    s.add_argument("--claim", action="append", required=True)
    s.add_argument("--revoke", type=int, help="claim index to revoke afterwards")
    s.add_argument("--voters", help="comma-separated issuer indices (default: first vote_quorum)")
    s.set_defaults(func=cmd_ceremony)

    s = sub.add_parser("bench", parents=[common], help="timing and size report")
    s.add_argument("--which", nargs="+", default=["all"], choices=("all", "issue", "scan", "pvss", "sizes"))
    s.add_argument("--max-claims", type=int, default=16)
    s.add_argument("--sizes", default="100,1000,10000")
    s.add_argument("--configs", default="2:3,3:5,5:9,7:10")
    s.add_argument("--reps", type=int, default=3)
    s.add_argument("--gnuplot", action="store_true", help="whitespace-separated columns")
    s.add_argument("--parallel", type=int, default=1, metavar="W",
                   help="also time the scan split over W processes (multi-core data, reported separately)")
    s.set_defaults(func=cmd_bench, format="csv")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (EncodingError, UsageError, ValueError, KeyError, TypeError, OSError) as err:
        print(f"sdbls {args.command}: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
