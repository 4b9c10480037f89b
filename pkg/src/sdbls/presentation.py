"""Holder presentations and their verification.

A basic proof is the projection ``{H, r, sigma}`` of a signed claim, with
``m`` and its nonce attached only when disclosed. It is replayable.

A one-time proof folds a fresh session key into the signature::

    sigma'  = sigma + sign(sk_t, H:r)
    sigma_t = sign(sk_t, H:r:sigma':t:pk_t)

and verifies ``sigma'`` under ``A.pk + r + pk_t``. Because ``sigma_t``
covers ``sigma'`` and ``pk_t``, swapping in another session key breaks it.
"""

from __future__ import annotations

import enum
import json
import random
import secrets
import time
from dataclasses import dataclass, field
from typing import Callable

from . import bls
from .codec import b64d, b64e, canonical_json, join_fields, require
from .credential import DIGEST_SIZE, KDF_SHA256, NONCE_SIZE, SignedClaim, claim_digest, frame2
from .curve import EncodingError, G1Point, G2, G2Point, scalar_random


class Verdict(str, enum.Enum):
    ACCEPTED = "accepted"
    REJECTED_SIGNATURE = "rejected-signature"
    REJECTED_POLICY = "rejected-policy"
    REVOKED = "revoked"


def _disclosure_from_json(obj: dict) -> tuple[str | None, bytes | None]:
    has_m, has_nonce = "m" in obj, "nonce" in obj
    if has_m != has_nonce:
        raise EncodingError("m and nonce must be disclosed together")
    if not has_m:
        return None, None
    if not isinstance(obj["m"], str):
        raise EncodingError("m must be a string")
    nonce = b64d(obj["nonce"])
    if len(nonce) != NONCE_SIZE:
        raise EncodingError("nonce must be 16 bytes")
    return obj["m"], nonce


def _digest_from_json(obj: dict) -> bytes:
    h = b64d(obj["h"])
    if len(h) != DIGEST_SIZE:
        raise EncodingError("h must be 32 bytes")
    return h


@dataclass(frozen=True)
class BasicProof:
    h: bytes
    r: G2Point
    sigma: G1Point
    m: str | None = None
    nonce: bytes | None = None

    @property
    def disclosed(self) -> bool:
        return self.m is not None

    def to_json(self) -> dict:
        out = {"h": b64e(self.h), "r": b64e(self.r.to_bytes()), "sigma": b64e(self.sigma.to_bytes())}
        if self.disclosed:
            out["m"] = self.m
            out["nonce"] = b64e(self.nonce)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "BasicProof":
        require(obj, "h", "r", "sigma")
        m, nonce = _disclosure_from_json(obj)
        return cls(
            _digest_from_json(obj),
            G2Point.from_bytes(b64d(obj["r"])),
            G1Point.from_bytes(b64d(obj["sigma"])),
            m,
            nonce,
        )


@dataclass(frozen=True)
class OneTimeProof:
    h: bytes
    r: G2Point
    sigma_prime: G1Point
    t: str
    pk_t: G2Point
    sigma_t: G1Point
    m: str | None = None
    nonce: bytes | None = None

    @property
    def disclosed(self) -> bool:
        return self.m is not None

    def to_json(self) -> dict:
        out = {
            "h": b64e(self.h),
            "r": b64e(self.r.to_bytes()),
            "sigma_prime": b64e(self.sigma_prime.to_bytes()),
            "t": self.t,
            "pk_t": b64e(self.pk_t.to_bytes()),
            "sigma_t": b64e(self.sigma_t.to_bytes()),
        }
        if self.disclosed:
            out["m"] = self.m
            out["nonce"] = b64e(self.nonce)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "OneTimeProof":
        require(obj, "h", "r", "sigma_prime", "t", "pk_t", "sigma_t")
        if not isinstance(obj["t"], str):
            raise EncodingError("t must be a string")
        m, nonce = _disclosure_from_json(obj)
        return cls(
            _digest_from_json(obj),
            G2Point.from_bytes(b64d(obj["r"])),
            G1Point.from_bytes(b64d(obj["sigma_prime"])),
            obj["t"],
            G2Point.from_bytes(b64d(obj["pk_t"])),
            G1Point.from_bytes(b64d(obj["sigma_t"])),
            m,
            nonce,
        )


def proof_from_json(obj: dict) -> BasicProof | OneTimeProof:
    if isinstance(obj, dict) and "sigma_prime" in obj:
        return OneTimeProof.from_json(obj)
    return BasicProof.from_json(obj)


def make_session(audience: str, issued_at: int) -> str:
    """Session string ``t``: canonical JSON ``{"aud": ..., "iat": ...}``."""
    return canonical_json({"aud": audience, "iat": int(issued_at)})


@dataclass(frozen=True)
class SessionPolicy:
    expected_audience: str
    max_age: float
    now: Callable[[], float] = field(default=time.time, compare=False)

    def __post_init__(self):
        if self.max_age <= 0:
            raise ValueError("max_age must be positive")

    def accepts(self, t: str) -> bool:
        try:
            session = json.loads(t)
        except (json.JSONDecodeError, TypeError):
            return False
        if not isinstance(session, dict):
            return False
        aud, iat = session.get("aud"), session.get("iat")
        if aud != self.expected_audience or not isinstance(iat, int) or isinstance(iat, bool):
            return False
        age = self.now() - iat
        return 0 <= age <= self.max_age


def frame3(h: bytes, r: G2Point, sigma_prime: G1Point, t: str, pk_t: G2Point) -> bytes:
    return join_fields(h, r.to_bytes(), sigma_prime.to_bytes(), t.encode("utf-8"), pk_t.to_bytes())


def make_basic_proof(claim: SignedClaim, disclose: bool = False) -> BasicProof:
    if disclose:
        return BasicProof(claim.h, claim.r, claim.sigma, claim.m, claim.nonce)
    return BasicProof(claim.h, claim.r, claim.sigma)


def make_one_time_proof(
    claim: SignedClaim,
    t: str,
    rng: random.Random | None = None,
    disclose: bool = False,
) -> OneTimeProof:
    if not t:
        raise ValueError("session string t must be non-empty")
    sk_t = scalar_random(rng or secrets.SystemRandom())
    pk_t = G2() * sk_t
    sigma_prime = claim.sigma + bls.sign(sk_t, frame2(claim.h, claim.r))
    sigma_t = bls.sign(sk_t, frame3(claim.h, claim.r, sigma_prime, t, pk_t))
    del sk_t  # single use; never stored or returned
    m, nonce = (claim.m, claim.nonce) if disclose else (None, None)
    return OneTimeProof(claim.h, claim.r, sigma_prime, t, pk_t, sigma_t, m, nonce)


def _disclosure_ok(proof, kdf: str) -> bool:
    if not proof.disclosed:
        return True
    return proof.h == claim_digest(proof.m, proof.nonce, proof.r, kdf)


def verify_basic(issuer_pk: G2Point, proof: BasicProof, kdf: str = KDF_SHA256) -> bool:
    pk = bls.aggregate_pks([issuer_pk, proof.r])
    if not bls.verify(pk, frame2(proof.h, proof.r), proof.sigma):
        return False
    return _disclosure_ok(proof, kdf)


def check_one_time(
    issuer_pk: G2Point, proof: OneTimeProof, policy: SessionPolicy, kdf: str = KDF_SHA256
) -> Verdict:
    """Verify a one-time proof, telling policy failures apart from crypto ones.

    Never returns :attr:`Verdict.REVOKED`; revocation is checked afterwards.
    """
    if not policy.accepts(proof.t):
        return Verdict.REJECTED_POLICY
    session_msg = frame3(proof.h, proof.r, proof.sigma_prime, proof.t, proof.pk_t)
    if not bls.verify(proof.pk_t, session_msg, proof.sigma_t):
        return Verdict.REJECTED_SIGNATURE
    pk = bls.aggregate_pks([issuer_pk, proof.r, proof.pk_t])
    if not bls.verify(pk, frame2(proof.h, proof.r), proof.sigma_prime):
        return Verdict.REJECTED_SIGNATURE
    if not _disclosure_ok(proof, kdf):
        return Verdict.REJECTED_SIGNATURE
    return Verdict.ACCEPTED


def verify_one_time(
    issuer_pk: G2Point, proof: OneTimeProof, policy: SessionPolicy, kdf: str = KDF_SHA256
) -> bool:
    return check_one_time(issuer_pk, proof, policy, kdf) is Verdict.ACCEPTED
