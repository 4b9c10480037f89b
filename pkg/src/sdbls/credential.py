"""Issuer side: signed claims carrying a per-claim revocation key.

Each claim ``m`` gets a fresh revocation secret ``rev`` with public key
``r = rev*G2`` and a 16-byte nonce. The holder receives
``{H, r, sigma, m, nonce}`` where::

    H     = digest(frame(m, nonce, r))
    sigma = sign(A.sk, frame2(H, r)) + sign(rev, frame2(H, r))

so ``sigma`` verifies under the aggregated key ``A.pk + r``. The issuer
keeps ``{H, rev}`` in an append-only registry to revoke later.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import bls
from .codec import b64d, b64e, join_fields, require
from .curve import EncodingError, G1Point, G2, G2Point, scalar_from_bytes, scalar_random, scalar_to_bytes

NONCE_SIZE = 16
DIGEST_SIZE = 32

KDF_SHA256 = "sha256"
KDF_MEMORY_HARD = "memory-hard"
KDFS = (KDF_SHA256, KDF_MEMORY_HARD)

# scrypt at 16 MiB; see README for the cost it adds per claim
_SCRYPT = dict(salt=b"SDBLS-V01/claim-digest", n=2**14, r=8, p=1, dklen=DIGEST_SIZE)


class DishonestDealer(Exception):
    """A revocation contribution did not verify under its own public key."""


def digest(data: bytes, kdf: str = KDF_SHA256) -> bytes:
    if kdf == KDF_SHA256:
        return hashlib.sha256(data).digest()
    if kdf == KDF_MEMORY_HARD:
        return hashlib.scrypt(data, maxmem=64 * 1024 * 1024, **_SCRYPT)
    raise ValueError(f"unknown kdf {kdf!r}; expected one of {KDFS}")


def frame(m: str, nonce: bytes, r: G2Point) -> bytes:
    if len(nonce) != NONCE_SIZE:
        raise ValueError(f"nonce must be {NONCE_SIZE} bytes")
    return join_fields(m.encode("utf-8"), nonce, r.to_bytes())


def frame2(h: bytes, r: G2Point) -> bytes:
    """The message every key (issuer, revocation, session) signs."""
    if len(h) != DIGEST_SIZE:
        raise ValueError(f"H must be {DIGEST_SIZE} bytes")
    return join_fields(h, r.to_bytes())


def claim_digest(m: str, nonce: bytes, r: G2Point, kdf: str = KDF_SHA256) -> bytes:
    return digest(frame(m, nonce, r), kdf)


@dataclass(frozen=True)
class SignedClaim:
    h: bytes
    r: G2Point
    sigma: G1Point
    m: str
    nonce: bytes

    def to_json(self) -> dict:
        return {
            "h": b64e(self.h),
            "r": b64e(self.r.to_bytes()),
            "sigma": b64e(self.sigma.to_bytes()),
            "m": self.m,
            "nonce": b64e(self.nonce),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SignedClaim":
        require(obj, "h", "r", "sigma", "m", "nonce")
        h, nonce = b64d(obj["h"]), b64d(obj["nonce"])
        if len(h) != DIGEST_SIZE or len(nonce) != NONCE_SIZE:
            raise EncodingError("h must be 32 bytes and nonce 16 bytes")
        if not isinstance(obj["m"], str):
            raise EncodingError("m must be a string")
        return cls(
            h=h,
            r=G2Point.from_bytes(b64d(obj["r"])),
            sigma=G1Point.from_bytes(b64d(obj["sigma"])),
            m=obj["m"],
            nonce=nonce,
        )


@dataclass(frozen=True)
class RevocationRecord:
    h: bytes
    rev: int = field(repr=False)

    def to_json(self) -> dict:
        return {"h": b64e(self.h), "rev": b64e(scalar_to_bytes(self.rev))}

    @classmethod
    def from_json(cls, obj: dict) -> "RevocationRecord":
        require(obj, "h", "rev")
        return cls(b64d(obj["h"]), scalar_from_bytes(b64d(obj["rev"])))


class IssuerIdentity:
    """Issuer key pair plus its private, append-only revocation registry.

    When ``registry_path`` is given, every new record is also appended to
    that file as one JSON line. Single writer only.
    """

    def __init__(self, keys: bls.KeyPair, registry_path: str | os.PathLike | None = None):
        self.keys = keys
        self._registry: list[RevocationRecord] = []
        self.registry_path = Path(registry_path) if registry_path is not None else None
        if self.registry_path is not None and self.registry_path.exists():
            self._registry.extend(load_registry(self.registry_path))

    @property
    def pk(self) -> G2Point:
        return self.keys.pk

    @property
    def registry(self) -> tuple[RevocationRecord, ...]:
        return tuple(self._registry)

    def _append(self, records: Sequence[RevocationRecord]) -> None:
        if self.registry_path is not None:
            with self.registry_path.open("a", encoding="utf-8") as fh:
                for rec in records:
                    fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
        self._registry.extend(records)

    def lookup(self, h: bytes) -> RevocationRecord | None:
        for rec in self._registry:
            if rec.h == h:
                return rec
        return None


def load_registry(path: str | os.PathLike) -> Iterator[RevocationRecord]:
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise EncodingError(f"{path}:{n}: {err}") from err
            yield RevocationRecord.from_json(obj)


def _sign_claim(issuer_sk: int, h: bytes, r: G2Point, sigma_rev: G1Point) -> G1Point:
    return bls.sign(issuer_sk, frame2(h, r)) + sigma_rev


def issue_claims(
    issuer: IssuerIdentity,
    claims: Iterable[str],
    rng: random.Random | None = None,
    kdf: str = KDF_SHA256,
) -> tuple[list[SignedClaim], list[RevocationRecord]]:
    claims = list(claims)
    if not claims:
        raise ValueError("no claims to issue")
    if any(not m for m in claims):
        raise ValueError("claim strings must be non-empty")
    rng = rng or secrets.SystemRandom()

    signed, records = [], []
    for m in claims:
        rev = scalar_random(rng)
        r = G2() * rev
        nonce = rng.randbytes(NONCE_SIZE)
        h = claim_digest(m, nonce, r, kdf)
        sigma = _sign_claim(issuer.keys.sk, h, r, bls.sign(rev, frame2(h, r)))
        signed.append(SignedClaim(h, r, sigma, m, nonce))
        records.append(RevocationRecord(h, rev))
    issuer._append(records)
    return signed, records


def issue_with_external_revocation(
    issuer: IssuerIdentity,
    m: str,
    r: G2Point,
    sigma_rev: G1Point,
    nonce: bytes,
    kdf: str = KDF_SHA256,
) -> SignedClaim:
    """Complete a claim whose revocation key is held by a dealer.

    The dealer's ``sigma_rev`` must verify under ``r`` before it is
    aggregated. Nothing is added to the issuer's registry.
    """
    if not m:
        raise ValueError("claim string must be non-empty")
    h = claim_digest(m, nonce, r, kdf)
    if not bls.verify(r, frame2(h, r), sigma_rev):
        raise DishonestDealer("sigma_rev does not verify under r")
    return SignedClaim(h, r, _sign_claim(issuer.keys.sk, h, r, sigma_rev), m, nonce)


def verify_claim(issuer_pk: G2Point, claim: SignedClaim, kdf: str = KDF_SHA256) -> bool:
    """Holder-side sanity check of a freshly received claim."""
    if claim.h != claim_digest(claim.m, claim.nonce, claim.r, kdf):
        return False
    return bls.verify(bls.aggregate_pks([issuer_pk, claim.r]), frame2(claim.h, claim.r), claim.sigma)


def keypair_to_json(keys: bls.KeyPair) -> dict:
    return {"sk": b64e(scalar_to_bytes(keys.sk)), "pk": b64e(keys.pk.to_bytes())}


def keypair_from_json(obj: dict) -> bls.KeyPair:
    require(obj, "sk")
    sk = scalar_from_bytes(b64d(obj["sk"]))
    if sk == 0:
        raise EncodingError("secret key is zero")
    keys = bls.KeyPair(sk, G2() * sk)
    if "pk" in obj and G2Point.from_bytes(b64d(obj["pk"])) != keys.pk:
        raise EncodingError("pk does not match sk")
    return keys
