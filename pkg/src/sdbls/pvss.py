"""Publicly verifiable sharing of a revocation secret among n issuers.

The dealer picks ``p(x) = rev + a_1 x + ... + a_{t-1} x^{t-1}`` over the
scalar field and publishes

* Feldman commitments ``C_j = a_j*G2`` (so ``C_0 = r``),
* exponent shares ``Y_i = p(i)*y_i`` against each issuer's G1 key ``y_i``,
* ``p(i)`` itself, encrypted to issuer i under an ephemeral DH key.

Anyone can check ``e(X_i, y_i) == e(G2, Y_i)`` with ``X_i = sum_j i^j C_j``.
Issuer i additionally checks that the decrypted scalar matches both
``X_i`` and ``Y_i``; a mismatch is a complaint against the dealer. That
last check is private to the receiver, which is the one point where this
scheme is not fully public.

Reconstruction works on scalars, so the result can go straight onto a
revocation list.
"""

from __future__ import annotations

import hashlib
import random
import secrets
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from .codec import b64d, b64e, canonical_json, require
from .curve import (
    ORDER,
    EncodingError,
    G1,
    G1Point,
    G2,
    G2Point,
    pairing_check,
    scalar_from_bytes,
    scalar_random,
    scalar_to_bytes,
)

TAG_SIZE = 16
CT_SIZE = 32 + TAG_SIZE
_KDF_LABEL = b"SDBLS-V01/pvss-share-key"
_POK_LABEL = b"SDBLS-V01/share-possession"
_AEAD_NONCE = bytes(12)  # each key encrypts exactly one share


class ShareComplaint(Exception):
    """Raised by a receiving issuer when its share is inconsistent."""

    def __init__(self, index: int, reason: str):
        super().__init__(f"share {index}: {reason}")
        self.index = index
        self.reason = reason


class InvalidShare(Exception):
    """A revealed share does not match the dealer's commitments."""

    def __init__(self, indices: Sequence[int]):
        super().__init__(f"invalid revealed share(s) from index {', '.join(map(str, indices))}")
        self.indices = tuple(indices)


class InsufficientShares(Exception):
    pass


@dataclass(frozen=True)
class IssuerDhKeys:
    x: int = field(repr=False)
    y: G1Point

    @classmethod
    def generate(cls, rng: random.Random | None = None) -> "IssuerDhKeys":
        x = scalar_random(rng)
        return cls(x, G1() * x)


@dataclass(frozen=True)
class ShareEntry:
    i: int
    Y: G1Point
    E: G1Point
    ct: bytes

    def to_json(self) -> dict:
        return {"i": self.i, "Y": b64e(self.Y.to_bytes()), "E": b64e(self.E.to_bytes()), "ct": b64e(self.ct)}

    @classmethod
    def from_json(cls, obj: dict) -> "ShareEntry":
        require(obj, "i", "Y", "E", "ct")
        if not isinstance(obj["i"], int) or isinstance(obj["i"], bool):
            raise EncodingError("share index must be an integer")
        ct = b64d(obj["ct"])
        if len(ct) != CT_SIZE:
            raise EncodingError(f"ciphertext must be {CT_SIZE} bytes")
        return cls(obj["i"], G1Point.from_bytes(b64d(obj["Y"])), G1Point.from_bytes(b64d(obj["E"])), ct)


@dataclass(frozen=True)
class DealerBundle:
    n: int
    t: int
    commitments: tuple[G2Point, ...]
    shares: tuple[ShareEntry, ...]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "commitments": [b64e(c.to_bytes()) for c in self.commitments],
            "shares": [s.to_json() for s in self.shares],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DealerBundle":
        require(obj, "n", "t", "commitments", "shares")
        if not isinstance(obj["commitments"], list) or not isinstance(obj["shares"], list):
            raise EncodingError("commitments and shares must be lists")
        return cls(
            int(obj["n"]),
            int(obj["t"]),
            tuple(G2Point.from_bytes(b64d(c)) for c in obj["commitments"]),
            tuple(ShareEntry.from_json(s) for s in obj["shares"]),
        )

    @property
    def r(self) -> G2Point:
        return self.commitments[0]

    def digest(self) -> bytes:
        return hashlib.sha256(canonical_json(self.to_json()).encode()).digest()

    def entry(self, i: int) -> ShareEntry:
        for s in self.shares:
            if s.i == i:
                return s
        raise KeyError(i)


@dataclass(frozen=True)
class DealTranscript:
    """Dealer-side secrets. Tests compare against it; production code drops it."""

    secret: int = field(repr=False)
    coefficients: tuple[int, ...] = field(repr=False)
    shares: dict[int, int] = field(repr=False)


@dataclass(frozen=True)
class RevealedShare:
    i: int
    s: int = field(repr=False)

    def to_json(self) -> dict:
        return {"i": self.i, "s": b64e(scalar_to_bytes(self.s))}

    @classmethod
    def from_json(cls, obj: dict) -> "RevealedShare":
        require(obj, "i", "s")
        return cls(int(obj["i"]), scalar_from_bytes(b64d(obj["s"])))


@dataclass(frozen=True)
class PossessionProof:
    i: int
    commit: G2Point
    response: int

    def to_json(self) -> dict:
        return {"i": self.i, "R": b64e(self.commit.to_bytes()), "z": b64e(scalar_to_bytes(self.response))}

    @classmethod
    def from_json(cls, obj: dict) -> "PossessionProof":
        require(obj, "i", "R", "z")
        return cls(int(obj["i"]), G2Point.from_bytes(b64d(obj["R"])), scalar_from_bytes(b64d(obj["z"])))


def eval_poly(coefficients: Sequence[int], x: int) -> int:
    acc = 0
    for a in reversed(coefficients):
        acc = (acc * x + a) % ORDER
    return acc


def commitment_at(commitments: Sequence[G2Point], i: int) -> G2Point:
    """X_i = sum_j i^j C_j, i.e. p(i)*G2 for an honest dealer."""
    acc = commitments[-1]
    for c in reversed(commitments[:-1]):
        acc = acc * i + c
    return acc


def _share_key(dh_point: G1Point) -> bytes:
    return hashlib.sha256(_KDF_LABEL + dh_point.to_bytes()).digest()


def _aad(i: int, eph: G1Point) -> bytes:
    return i.to_bytes(4, "big") + eph.to_bytes()


def encrypt_share(i: int, s: int, y: G1Point, rng: random.Random) -> tuple[G1Point, bytes]:
    k = scalar_random(rng)
    eph = G1() * k
    ct = ChaCha20Poly1305(_share_key(y * k)).encrypt(_AEAD_NONCE, scalar_to_bytes(s), _aad(i, eph))
    return eph, ct


def decrypt_share(i: int, x: int, eph: G1Point, ct: bytes) -> int:
    """Raises :class:`cryptography.exceptions.InvalidTag` on tampering."""
    plain = ChaCha20Poly1305(_share_key(eph * x)).decrypt(_AEAD_NONCE, ct, _aad(i, eph))
    return scalar_from_bytes(plain)


def deal(
    rev: int,
    t: int,
    n: int,
    issuer_pks: Sequence[G1Point],
    rng: random.Random | None = None,
) -> tuple[DealerBundle, DealTranscript]:
    if not 1 < t <= n:
        raise ValueError(f"need 1 < t <= n, got t={t}, n={n}")
    if len(issuer_pks) != n:
        raise ValueError(f"expected {n} issuer keys, got {len(issuer_pks)}")
    if len({y.to_bytes() for y in issuer_pks}) != n:
        raise ValueError("duplicate issuer keys")
    if not 0 < rev < ORDER:
        raise ValueError("secret must be a nonzero scalar")
    rng = rng or secrets.SystemRandom()

    coefficients = (rev,) + tuple(scalar_random(rng) for _ in range(t - 1))
    g2 = G2()
    commitments = tuple(g2 * a for a in coefficients)
    shares, entries = {}, []
    for i, y in enumerate(issuer_pks, start=1):
        s = eval_poly(coefficients, i)
        eph, ct = encrypt_share(i, s, y, rng)
        shares[i] = s
        entries.append(ShareEntry(i, y * s, eph, ct))
    return DealerBundle(n, t, commitments, tuple(entries)), DealTranscript(rev, coefficients, shares)


def verify_deal(bundle: DealerBundle, issuer_pks: Sequence[G1Point], r: G2Point | None = None) -> bool:
    """Public check of a deal; needs no secret.

    With ``r`` given, also require that the deal shares the secret behind
    that revocation key.
    """
    n, t = bundle.n, bundle.t
    if not 1 < t <= n or len(issuer_pks) != n:
        return False
    if len(bundle.commitments) != t or len(bundle.shares) != n:
        return False
    if [s.i for s in bundle.shares] != list(range(1, n + 1)):
        return False
    if bundle.commitments[0].is_identity():
        return False
    if r is not None and bundle.commitments[0] != r:
        return False
    g2 = G2()
    for entry, y in zip(bundle.shares, issuer_pks):
        if entry.Y.is_identity():
            return False
        if not pairing_check(commitment_at(bundle.commitments, entry.i), y, g2, entry.Y):
            return False
    return True


def accept_share(issuer: IssuerDhKeys, i: int, bundle: DealerBundle) -> int:
    """Decrypt and check issuer i's share. Call after :func:`verify_deal`."""
    try:
        entry = bundle.entry(i)
    except KeyError:
        raise ShareComplaint(i, "no share for this index") from None
    try:
        s = decrypt_share(i, issuer.x, entry.E, entry.ct)
    except InvalidTag:
        raise ShareComplaint(i, "ciphertext authentication failed") from None
    except EncodingError:
        raise ShareComplaint(i, "decrypted share out of range") from None
    if G2() * s != commitment_at(bundle.commitments, i):
        raise ShareComplaint(i, "share does not match commitments")
    if issuer.y * s != entry.Y:
        raise ShareComplaint(i, "share does not match exponent share")
    return s


def _challenge(bundle_digest: bytes, i: int, x_i: G2Point, commit: G2Point) -> int:
    h = hashlib.sha512(
        _POK_LABEL + bundle_digest + i.to_bytes(4, "big") + x_i.to_bytes() + commit.to_bytes()
    ).digest()
    return int.from_bytes(h, "big") % ORDER


def prove_share_possession(
    i: int, s: int, bundle: DealerBundle, rng: random.Random | None = None
) -> PossessionProof:
    """Schnorr proof of knowledge of s with X_i = s*G2, bound to ``bundle``."""
    k = scalar_random(rng or secrets.SystemRandom())
    commit = G2() * k
    c = _challenge(bundle.digest(), i, commitment_at(bundle.commitments, i), commit)
    return PossessionProof(i, commit, (k + c * s) % ORDER)


def verify_share_possession(proof: PossessionProof, bundle: DealerBundle) -> bool:
    if not 1 <= proof.i <= bundle.n:
        return False
    x_i = commitment_at(bundle.commitments, proof.i)
    c = _challenge(bundle.digest(), proof.i, x_i, proof.commit)
    return G2() * proof.response == proof.commit + x_i * c


def lagrange_at_zero(indices: Sequence[int]) -> dict[int, int]:
    coeffs = {}
    for i in indices:
        num, den = 1, 1
        for j in indices:
            if j != i:
                num = num * j % ORDER
                den = den * (j - i) % ORDER
        coeffs[i] = num * pow(den, -1, ORDER) % ORDER
    return coeffs


def interpolate_at_zero(points: dict[int, int]) -> int:
    """p(0) from ``{i: p(i)}``. No threshold or commitment checks."""
    lam = lagrange_at_zero(sorted(points))
    return sum(lam[i] * s for i, s in points.items()) % ORDER


def reconstruct(shares: Iterable[RevealedShare], bundle: DealerBundle) -> int:
    shares = list(shares)
    indices = [s.i for s in shares]
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate share indices")
    g2 = G2()
    bad = [
        s.i
        for s in shares
        if not 1 <= s.i <= bundle.n or g2 * s.s != commitment_at(bundle.commitments, s.i)
    ]
    if bad:
        raise InvalidShare(bad)
    if len(shares) < bundle.t:
        raise InsufficientShares(f"need {bundle.t} shares, got {len(shares)}")
    rev = interpolate_at_zero({s.i: s.s for s in shares[: bundle.t]})
    if g2 * rev != bundle.commitments[0]:
        raise AssertionError("reconstructed secret does not match C_0")
    return rev
