"""BLS signatures with public keys in G2 and signatures in G1."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .curve import DOMAIN_TAG, G1Point, G2, G2Point, hash_to_g1, pairing_check, scalar_random


@dataclass(frozen=True)
class KeyPair:
    sk: int = field(repr=False)
    pk: G2Point


def keygen(rng: random.Random | None = None) -> KeyPair:
    sk = scalar_random(rng)
    return KeyPair(sk, G2() * sk)


def sign(sk: int, msg: bytes) -> G1Point:
    if sk == 0:
        raise ValueError("refusing to sign with a zero secret key")
    return hash_to_g1(DOMAIN_TAG, msg) * sk


def verify(pk: G2Point, msg: bytes, sig: G1Point) -> bool:
    """Check e(pk, H(msg)) == e(G2, sig).

    An identity public key is rejected outright: it would accept the
    identity signature on any message.
    """
    if not isinstance(pk, G2Point) or not isinstance(sig, G1Point):
        raise TypeError("verify expects a G2Point key and a G1Point signature")
    if pk.is_identity():
        return False
    return pairing_check(pk, hash_to_g1(DOMAIN_TAG, msg), G2(), sig)


def _sum(points: Sequence):
    if not points:
        raise ValueError("cannot aggregate an empty list")
    total = points[0]
    for p in points[1:]:
        total = total + p
    return total


def aggregate_sigs(sigs: Sequence[G1Point]) -> G1Point:
    return _sum(list(sigs))


def aggregate_pks(pks: Sequence[G2Point]) -> G2Point:
    return _sum(list(pks))
