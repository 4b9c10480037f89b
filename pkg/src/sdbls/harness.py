"""Deterministic in-process simulation of threshold issuance and revocation.

Roles: one credential issuer, one revocation dealer, ``n`` revocation
issuers, one holder and one verifier. They exchange :class:`ActorMessage`
envelopes over a FIFO bus driven by a single-threaded loop. Every actor
draws randomness from its own RNG derived from the simulation seed, and
the clock only moves when told to, so a seed fixes the transcript byte for
byte.

Issuance of one claim::

    issuer  -> dealer       RevocationRequest {req}
    dealer  -> rev-issuers  DealBundle         (each runs accept_share)
    dealer  -> issuer       DealBundle         (issuer reads r = C_0)
    rev-i   -> issuer       ShareAccept | ShareComplaint
    issuer  -> dealer       RevocationRequest {req, h}   once all n accepted
    dealer  -> issuer       RevocationSignature {sigma_rev}; dealer forgets rev
    issuer  -> holder       ClaimDelivery

Revocation: voters broadcast RevocationVote; once a voter has seen
``vote_quorum`` votes it broadcasts its share (ShareReveal, with a proof of
possession) to every revocation issuer. When all reveals are in, each voter
reconstructs, dropping shares that fail the commitment check, and the
lowest-index voter publishes ``rev`` (ListUpdate to the verifier).
"""

from __future__ import annotations

import enum
import json
import os
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from . import bls, pvss
from .codec import b64d, b64e, canonical_json
from .credential import (
    KDF_SHA256,
    NONCE_SIZE,
    DishonestDealer,
    IssuerIdentity,
    SignedClaim,
    claim_digest,
    frame2,
    issue_with_external_revocation,
)
from .curve import G1Point, scalar_from_bytes, scalar_random, scalar_to_bytes
from .presentation import (
    BasicProof,
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

EPOCH = 1_700_000_000

ISSUER = "issuer"
DEALER = "dealer"
HOLDER = "holder"
VERIFIER = "verifier"


def rev_issuer(i: int) -> str:
    return f"rev-issuer-{i}"


class MessageKind(str, enum.Enum):
    REVOCATION_REQUEST = "RevocationRequest"
    DEAL_BUNDLE = "DealBundle"
    SHARE_ACCEPT = "ShareAccept"
    SHARE_COMPLAINT = "ShareComplaint"
    REVOCATION_VOTE = "RevocationVote"
    SHARE_REVEAL = "ShareReveal"
    LIST_UPDATE = "ListUpdate"
    PRESENTATION_SUBMIT = "PresentationSubmit"
    VERDICT_REPORT = "VerdictReport"
    REVOCATION_SIGNATURE = "RevocationSignature"
    CLAIM_DELIVERY = "ClaimDelivery"


@dataclass(frozen=True)
class ActorMessage:
    sender: str
    to: str
    kind: MessageKind
    payload: bytes
    seq: int

    def body(self) -> dict:
        return json.loads(self.payload)

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "from": self.sender,
            "to": self.to,
            "kind": self.kind.value,
            "payload": json.loads(self.payload),
        }


@dataclass(frozen=True)
class QuorumConfig:
    n: int
    t: int
    vote_quorum: int

    def __post_init__(self):
        if not 1 < self.t <= self.vote_quorum <= self.n:
            raise ValueError(f"need 1 < t <= vote_quorum <= n, got {self}")

    @classmethod
    def parse(cls, text: str) -> "QuorumConfig":
        """``"t:n"`` or ``"t:n:vote_quorum"``."""
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            return cls(n=parts[1], t=parts[0], vote_quorum=parts[0])
        if len(parts) == 3:
            return cls(n=parts[1], t=parts[0], vote_quorum=parts[2])
        raise ValueError(f"bad quorum string {text!r}")


@dataclass(frozen=True)
class FaultPlan:
    """Misbehaviour to inject. Keys are claim indices / issuer indices."""

    mismatched_ct: frozenset[tuple[int, int]] = frozenset()  # (claim, issuer)


@dataclass
class RevocationOutcome:
    status: str  # "revoked" | "refused" | "failed"
    rev: int | None = None
    cheaters: tuple[int, ...] = ()
    votes: int = 0


class Actor:
    def __init__(self, sim: "Simulation", role: str):
        self.sim = sim
        self.role = role
        self.rng = random.Random(f"{sim.seed}/{role}")

    def send(self, to: str, kind: MessageKind, body: dict) -> None:
        self.sim.post(self.role, to, kind, body)

    def handle(self, msg: ActorMessage) -> None:
        raise NotImplementedError(f"{self.role} cannot handle {msg.kind.value}")

    def state(self) -> dict:
        return {}


class CredentialIssuerActor(Actor):
    def __init__(self, sim, keys: bls.KeyPair):
        super().__init__(sim, ISSUER)
        self.identity = IssuerIdentity(keys)
        self.pending: dict[int, dict[str, Any]] = {}
        self.issued: dict[int, SignedClaim] = {}
        self.aborted: dict[int, str] = {}

    def request(self, req: int, m: str) -> None:
        nonce = self.rng.randbytes(NONCE_SIZE)
        self.pending[req] = {"m": m, "nonce": nonce, "bundle": None, "accepted": set()}
        self.send(DEALER, MessageKind.REVOCATION_REQUEST, {"req": req})

    def handle(self, msg):
        body = msg.body()
        req = body["req"]
        job = self.pending.get(req)
        if job is None:
            return
        if msg.kind is MessageKind.DEAL_BUNDLE:
            bundle = pvss.DealerBundle.from_json(body["bundle"])
            if not pvss.verify_deal(bundle, self.sim.issuer_dh_pks):
                self._abort(req, "deal failed public verification")
                return
            job["bundle"] = bundle
        elif msg.kind is MessageKind.SHARE_ACCEPT:
            job["accepted"].add(body["i"])
        elif msg.kind is MessageKind.SHARE_COMPLAINT:
            self._abort(req, f"complaint from issuer {body['i']}: {body['reason']}")
            return
        elif msg.kind is MessageKind.REVOCATION_SIGNATURE:
            self._finish(req, job, G1Point.from_bytes(b64d(body["sigma_rev"])))
            return
        else:
            super().handle(msg)
        if job["bundle"] is not None and len(job["accepted"]) == self.sim.config.n and "h" not in job:
            r = job["bundle"].r
            job["h"] = claim_digest(job["m"], job["nonce"], r, self.sim.kdf)
            self.send(DEALER, MessageKind.REVOCATION_REQUEST, {"req": req, "h": b64e(job["h"])})

    def _abort(self, req, reason):
        self.pending.pop(req, None)
        self.aborted[req] = reason

    def _finish(self, req, job, sigma_rev):
        self.pending.pop(req)
        try:
            claim = issue_with_external_revocation(
                self.identity, job["m"], job["bundle"].r, sigma_rev, job["nonce"], self.sim.kdf
            )
        except DishonestDealer as err:
            self.aborted[req] = str(err)
            return
        self.issued[req] = claim
        self.send(HOLDER, MessageKind.CLAIM_DELIVERY, {"req": req, "claim": claim.to_json()})

    def state(self):
        return {
            "pk": b64e(self.identity.pk.to_bytes()),
            "issued": {str(k): b64e(c.h) for k, c in sorted(self.issued.items())},
            "aborted": {str(k): v for k, v in sorted(self.aborted.items())},
            "registry_size": len(self.identity.registry),
        }


class DealerActor(Actor):
    """Holds ``rev`` only between dealing and signing; never sees m or nonce."""

    def __init__(self, sim):
        super().__init__(sim, DEALER)
        self.pending_rev: dict[int, int] = {}
        self.dealt = 0
        self.bundles: dict[int, pvss.DealerBundle] = {}

    def handle(self, msg):
        body = msg.body()
        req = body["req"]
        if msg.kind is MessageKind.REVOCATION_REQUEST and "h" not in body:
            self._deal(req)
        elif msg.kind is MessageKind.REVOCATION_REQUEST:
            rev = self.pending_rev.pop(req)
            r = self.bundles[req].r
            sigma_rev = bls.sign(rev, frame2(b64d(body["h"]), r))
            del rev
            self.send(ISSUER, MessageKind.REVOCATION_SIGNATURE, {"req": req, "sigma_rev": b64e(sigma_rev.to_bytes())})
        elif msg.kind is MessageKind.SHARE_COMPLAINT:
            self.pending_rev.pop(req, None)
        else:
            super().handle(msg)

    def _deal(self, req):
        cfg = self.sim.config
        rev = scalar_random(self.rng)
        bundle, transcript = pvss.deal(rev, cfg.t, cfg.n, self.sim.issuer_dh_pks, self.rng)
        for claim_idx, i in self.sim.faults.mismatched_ct:
            if claim_idx == req:
                bundle = _corrupt_ciphertext(bundle, i, transcript.shares[i] + 1, self.sim.issuer_dh_pks[i - 1], self.rng)
        if self.sim.debug_transcripts is not None:
            self.sim.debug_transcripts[req] = transcript
        del transcript
        self.pending_rev[req] = rev
        self.bundles[req] = bundle
        self.dealt += 1
        payload = {"req": req, "bundle": bundle.to_json()}
        for i in range(1, cfg.n + 1):
            self.send(rev_issuer(i), MessageKind.DEAL_BUNDLE, payload)
        self.send(ISSUER, MessageKind.DEAL_BUNDLE, payload)

    def state(self):
        return {"dealt": self.dealt, "holding_secrets": len(self.pending_rev)}


def _corrupt_ciphertext(bundle, i, wrong_share, y, rng):
    eph, ct = pvss.encrypt_share(i, wrong_share, y, rng)
    shares = tuple(
        pvss.ShareEntry(s.i, s.Y, eph, ct) if s.i == i else s for s in bundle.shares
    )
    return pvss.DealerBundle(bundle.n, bundle.t, bundle.commitments, shares)


class RevocationIssuerActor(Actor):
    def __init__(self, sim, index: int, keys: pvss.IssuerDhKeys):
        super().__init__(sim, rev_issuer(index))
        self.index = index
        self.keys = keys
        self.bundles: dict[int, pvss.DealerBundle] = {}
        self._shares: dict[int, int] = {}
        self.votes: dict[int, set[int]] = {}
        self.voting: set[int] = set()
        self.revealed: set[int] = set()
        self.reveals: dict[int, dict[int, int]] = {}
        self.expected_reveals: dict[int, int] = {}
        self.corrupt: set[int] = set()
        self.results: dict[int, RevocationOutcome] = {}

    def vote(self, req: int, n_voters: int, corrupt: bool = False) -> None:
        self.voting.add(req)
        self.expected_reveals[req] = n_voters
        if corrupt:
            self.corrupt.add(req)
        self._count_vote(req, self.index)
        for j in range(1, self.sim.config.n + 1):
            if j != self.index:
                self.send(rev_issuer(j), MessageKind.REVOCATION_VOTE, {"req": req, "i": self.index})

    def handle(self, msg):
        body = msg.body()
        req = body["req"]
        if msg.kind is MessageKind.DEAL_BUNDLE:
            self._accept(req, pvss.DealerBundle.from_json(body["bundle"]))
        elif msg.kind is MessageKind.REVOCATION_VOTE:
            self._count_vote(req, body["i"])
        elif msg.kind is MessageKind.SHARE_REVEAL:
            self._on_reveal(req, body)
        else:
            super().handle(msg)

    def _accept(self, req, bundle):
        try:
            if not pvss.verify_deal(bundle, self.sim.issuer_dh_pks):
                raise pvss.ShareComplaint(self.index, "deal failed public verification")
            s = pvss.accept_share(self.keys, self.index, bundle)
        except pvss.ShareComplaint as err:
            complaint = {"req": req, "i": self.index, "reason": err.reason}
            self.send(ISSUER, MessageKind.SHARE_COMPLAINT, complaint)
            self.send(DEALER, MessageKind.SHARE_COMPLAINT, complaint)
            return
        self.bundles[req] = bundle
        self._shares[req] = s
        self.send(ISSUER, MessageKind.SHARE_ACCEPT, {"req": req, "i": self.index})

    def _count_vote(self, req, voter):
        votes = self.votes.setdefault(req, set())
        votes.add(voter)
        if (
            req in self.voting
            and req not in self.revealed
            and len(votes) >= self.sim.config.vote_quorum
            and req in self._shares
        ):
            self._reveal(req)

    def _reveal(self, req):
        self.revealed.add(req)
        s = self._shares[req]
        proof = pvss.prove_share_possession(self.index, s, self.bundles[req], self.rng)
        if req in self.corrupt:
            s = (s + 1) % pvss.ORDER
        body = {
            "req": req,
            "i": self.index,
            "s": b64e(scalar_to_bytes(s)),
            "proof": proof.to_json(),
        }
        self._on_reveal(req, body)
        for j in range(1, self.sim.config.n + 1):
            if j != self.index:
                self.send(rev_issuer(j), MessageKind.SHARE_REVEAL, body)

    def _on_reveal(self, req, body):
        bundle = self.bundles.get(req)
        if bundle is None:
            return
        proof = pvss.PossessionProof.from_json(body["proof"])
        if proof.i != body["i"] or not pvss.verify_share_possession(proof, bundle):
            return
        got = self.reveals.setdefault(req, {})
        got[body["i"]] = scalar_from_bytes(b64d(body["s"]))
        if req in self.voting and len(got) == self.expected_reveals.get(req) and req not in self.results:
            self._reconstruct(req, bundle, got)

    def _reconstruct(self, req, bundle, got):
        shares = [pvss.RevealedShare(i, s) for i, s in sorted(got.items())]
        cheaters: tuple[int, ...] = ()
        try:
            rev = pvss.reconstruct(shares, bundle)
        except pvss.InvalidShare as err:
            cheaters = err.indices
            honest = [s for s in shares if s.i not in cheaters]
            try:
                rev = pvss.reconstruct(honest, bundle)
            except pvss.InsufficientShares:
                self.results[req] = RevocationOutcome("failed", cheaters=cheaters, votes=len(got))
                return
        self.results[req] = RevocationOutcome("revoked", rev, cheaters, len(self.votes[req]))
        if self.index == min(self.voting_peers(req)):
            self.sim.public_list_publish(rev)
            self.send(VERIFIER, MessageKind.LIST_UPDATE, {"req": req, "rev": b64e(scalar_to_bytes(rev))})

    def voting_peers(self, req):
        return self.votes.get(req, set())

    def state(self):
        return {
            "index": self.index,
            "y": b64e(self.keys.y.to_bytes()),
            "shares_held": sorted(self._shares),
            "revealed": sorted(self.revealed),
        }


class HolderActor(Actor):
    def __init__(self, sim):
        super().__init__(sim, HOLDER)
        self.wallet: dict[int, SignedClaim] = {}
        self.verdicts: list[str] = []

    def handle(self, msg):
        body = msg.body()
        if msg.kind is MessageKind.CLAIM_DELIVERY:
            self.wallet[body["req"]] = SignedClaim.from_json(body["claim"])
        elif msg.kind is MessageKind.VERDICT_REPORT:
            self.verdicts.append(body["verdict"])
        else:
            super().handle(msg)

    def present(self, req: int, mode: str, audience: str, disclose: bool = False):
        claim = self.wallet[req]
        if mode == "basic":
            return make_basic_proof(claim, disclose)
        if mode == "one-time":
            t = make_session(audience, self.sim.clock)
            return make_one_time_proof(claim, t, self.rng, disclose)
        raise ValueError(f"unknown presentation mode {mode!r}")

    def state(self):
        return {"wallet": {str(k): b64e(c.h) for k, c in sorted(self.wallet.items())}}


class VerifierActor(Actor):
    """Checks signature, then policy/replay, then revocation.

    Keeps every accepted ``sigma_t`` in a replay cache.
    """

    def __init__(self, sim, issuer_pk):
        super().__init__(sim, VERIFIER)
        self.issuer_pk = issuer_pk
        self.revocations = RevocationList()
        self.seen_session_sigs: set[bytes] = set()
        self.policy: SessionPolicy | None = None
        self.last_verdict: Verdict | None = None

    def handle(self, msg):
        body = msg.body()
        if msg.kind is MessageKind.LIST_UPDATE:
            self.poll()
        elif msg.kind is MessageKind.PRESENTATION_SUBMIT:
            verdict = self.judge(proof_from_json(body["proof"]))
            self.last_verdict = verdict
            self.send(HOLDER, MessageKind.VERDICT_REPORT, {"verdict": verdict.value})
        else:
            super().handle(msg)

    def poll(self):
        self.revocations = self.sim.public_list_snapshot()

    def judge(self, proof) -> Verdict:
        kdf = self.sim.kdf
        if isinstance(proof, OneTimeProof):
            verdict = check_one_time(self.issuer_pk, proof, self.policy, kdf)
            if verdict is not Verdict.ACCEPTED:
                return verdict
            key = proof.sigma_t.to_bytes()
            if key in self.seen_session_sigs:
                return Verdict.REJECTED_POLICY
            self.seen_session_sigs.add(key)
        elif not verify_basic(self.issuer_pk, proof, kdf):
            return Verdict.REJECTED_SIGNATURE
        if is_revoked_scan(proof.r, self.revocations):
            return Verdict.REVOKED
        return Verdict.ACCEPTED

    def state(self):
        return {"revocations": len(self.revocations), "sessions_seen": len(self.seen_session_sigs)}


class Simulation:
    def __init__(
        self,
        config: QuorumConfig,
        seed: int | str,
        kdf: str = KDF_SHA256,
        faults: FaultPlan = FaultPlan(),
        list_path: str | os.PathLike | None = None,
        keep_dealer_transcripts: bool = False,
    ):
        self.config = config
        self.seed = seed
        self.kdf = kdf
        self.faults = faults
        self.list_path = list_path
        self.clock = EPOCH
        self.log: list[ActorMessage] = []
        self._queue: deque[ActorMessage] = deque()
        self._seq: dict[str, int] = {}
        self._public_list = RevocationList()
        self.debug_transcripts: dict[int, pvss.DealTranscript] | None = {} if keep_dealer_transcripts else None

        setup = random.Random(f"{seed}/setup")
        dh_keys = [pvss.IssuerDhKeys.generate(setup) for _ in range(config.n)]
        self.issuer_dh_pks = [k.y for k in dh_keys]
        self.issuer = CredentialIssuerActor(self, bls.keygen(setup))
        self.dealer = DealerActor(self)
        self.rev_issuers = [RevocationIssuerActor(self, i, k) for i, k in enumerate(dh_keys, start=1)]
        self.holder = HolderActor(self)
        self.verifier = VerifierActor(self, self.issuer.identity.pk)
        self.actors: dict[str, Actor] = {
            a.role: a for a in [self.issuer, self.dealer, *self.rev_issuers, self.holder, self.verifier]
        }

    def post(self, sender: str, to: str, kind: MessageKind, body: dict) -> None:
        if to not in self.actors:
            raise KeyError(f"no actor {to!r}")
        seq = self._seq.get(sender, 0) + 1
        self._seq[sender] = seq
        msg = ActorMessage(sender, to, kind, canonical_json(body).encode("utf-8"), seq)
        self.log.append(msg)
        self._queue.append(msg)

    def run(self) -> int:
        delivered = 0
        while self._queue:
            msg = self._queue.popleft()
            self.actors[msg.to].handle(msg)
            delivered += 1
        return delivered

    def advance(self, seconds: int) -> None:
        self.clock += int(seconds)

    def policy(self, audience: str = "verifier", max_age: float = 300) -> SessionPolicy:
        return SessionPolicy(audience, max_age, now=lambda: self.clock)

    def public_list_publish(self, rev: int) -> bool:
        if self.list_path is not None:
            lst = RevocationList.load(self.list_path)
            added = lst.publish(rev)
            lst.save(self.list_path)
            return added
        return self._public_list.publish(rev)

    def public_list_snapshot(self) -> RevocationList:
        if self.list_path is not None:
            return RevocationList.load(self.list_path)
        return self._public_list.snapshot()

    def states(self) -> dict:
        return {role: actor.state() for role, actor in self.actors.items()}


@dataclass
class CeremonyRecord:
    sim: Simulation
    claims: list[str]
    requests: list[int] = field(default_factory=list)

    @property
    def issued(self) -> dict[int, SignedClaim]:
        return self.sim.holder.wallet

    def claim(self, claim_index: int) -> SignedClaim:
        return self.sim.holder.wallet[self.requests[claim_index]]

    def accepted_shares(self) -> int:
        return sum(len(ri._shares) for ri in self.sim.rev_issuers)

    def to_json(self) -> dict:
        cfg = self.sim.config
        return {
            "config": {"n": cfg.n, "t": cfg.t, "vote_quorum": cfg.vote_quorum},
            "seed": str(self.sim.seed),
            "kdf": self.sim.kdf,
            "messages": [m.to_json() for m in self.sim.log],
            "claims": {str(req): c.to_json() for req, c in sorted(self.sim.holder.wallet.items())},
            "final_state": self.sim.states(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def run_issuance_ceremony(
    config: QuorumConfig,
    claims: Sequence[str],
    seed: int | str,
    kdf: str = KDF_SHA256,
    faults: FaultPlan = FaultPlan(),
    list_path: str | os.PathLike | None = None,
    keep_dealer_transcripts: bool = False,
) -> CeremonyRecord:
    sim = Simulation(config, seed, kdf, faults, list_path, keep_dealer_transcripts)
    record = CeremonyRecord(sim, list(claims))
    for req, m in enumerate(claims):
        record.requests.append(req)
        sim.issuer.request(req, m)
        sim.run()
    return record


def request_revocation(
    record: CeremonyRecord,
    claim_index: int,
    voting_issuers: Iterable[int],
    corrupt: Iterable[int] = (),
) -> RevocationOutcome:
    """Have ``voting_issuers`` vote to revoke a claim; ``corrupt`` voters reveal a bad share."""
    sim = record.sim
    req = record.requests[claim_index]
    voters = sorted(set(voting_issuers))
    corrupt = set(corrupt)
    if any(not 1 <= i <= sim.config.n for i in voters):
        raise ValueError("voter index out of range")
    for i in voters:
        sim.rev_issuers[i - 1].vote(req, len(voters), corrupt=i in corrupt)
    sim.run()
    if len(voters) < sim.config.vote_quorum:
        return RevocationOutcome("refused", votes=len(voters))
    honest = [i for i in voters if i not in corrupt]
    outcomes = [sim.rev_issuers[i - 1].results.get(req) for i in (honest or voters)]
    outcome = outcomes[0] or RevocationOutcome("failed", votes=len(voters))
    return outcome


def submit_presentation(record: CeremonyRecord, proof: BasicProof | OneTimeProof, policy: SessionPolicy) -> Verdict:
    sim = record.sim
    sim.verifier.policy = policy
    sim.verifier.poll()
    sim.post(HOLDER, VERIFIER, MessageKind.PRESENTATION_SUBMIT, {"proof": proof.to_json()})
    sim.run()
    return sim.verifier.last_verdict


def run_presentation_session(
    record: CeremonyRecord,
    claim_index: int,
    policy: SessionPolicy,
    mode: str = "one-time",
    disclose: bool = False,
) -> tuple[Verdict, BasicProof | OneTimeProof]:
    """Holder presents one claim to the verifier; returns the verdict and the proof sent."""
    proof = record.sim.holder.present(record.requests[claim_index], mode, policy.expected_audience, disclose)
    return submit_presentation(record, proof, policy), proof
