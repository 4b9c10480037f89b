"""Selective-disclosure BLS credentials with anonymous and threshold revocation."""

from .bls import KeyPair, aggregate_pks, aggregate_sigs, keygen, sign, verify
from .credential import IssuerIdentity, RevocationRecord, SignedClaim, issue_claims, issue_with_external_revocation
from .curve import G1, G2, G1Point, G2Point, GtElement, hash_to_g1, pairing
from .presentation import (
    BasicProof,
    OneTimeProof,
    SessionPolicy,
    Verdict,
    make_basic_proof,
    make_one_time_proof,
    verify_basic,
    verify_one_time,
)
from .revocation import RevocationList, build_index, is_revoked_indexed, is_revoked_scan

__version__ = "0.1.0"
