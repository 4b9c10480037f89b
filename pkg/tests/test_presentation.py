import base64
import dataclasses
import json

import pytest

from sdbls import bls
from sdbls.credential import frame2, issue_claims
from sdbls.curve import G1, G2, EncodingError, scalar_random
from sdbls.presentation import (
    BasicProof,
    OneTimeProof,
    SessionPolicy,
    Verdict,
    check_one_time,
    frame3,
    make_basic_proof,
    make_one_time_proof,
    make_session,
    proof_from_json,
    verify_basic,
    verify_one_time,
)

from tamper import FIELDS, tamper

NOW = 1_700_000_000


def b64(data):
    return base64.urlsafe_b64encode(data).rstrip(b"=")


@pytest.fixture
def policy():
    return SessionPolicy("shop.example", 300, now=lambda: NOW)


@pytest.fixture
def session():
    return make_session("shop.example", NOW - 10)


class TestBasic:
    def test_completeness_100(self, issuer, rng):
        claims, _ = issue_claims(issuer, [f"k{i}=v" for i in range(100)], rng)
        assert all(verify_basic(issuer.pk, make_basic_proof(c)) for c in claims)

    def test_disclosed(self, issuer, claim):
        proof = make_basic_proof(claim, disclose=True)
        assert verify_basic(issuer.pk, proof)
        assert not verify_basic(issuer.pk, dataclasses.replace(proof, m="above18=false"))

    def test_replay_is_accepted(self, issuer, claim):
        proof = make_basic_proof(claim)
        copy = BasicProof.from_json(json.loads(json.dumps(proof.to_json())))
        assert verify_basic(issuer.pk, proof) and verify_basic(issuer.pk, copy)

    def test_wrong_issuer(self, claim, rng):
        assert not verify_basic(bls.keygen(rng).pk, make_basic_proof(claim))

    @pytest.mark.parametrize("field", ["h", "r", "sigma"])
    def test_tamper(self, issuer, claim, field):
        proof = make_basic_proof(claim)
        bump = {"h": bytes(32), "r": claim.r + G2(), "sigma": claim.sigma + G1()}[field]
        assert not verify_basic(issuer.pk, dataclasses.replace(proof, **{field: bump}))

    def test_json_without_disclosure_omits_m(self, claim):
        obj = make_basic_proof(claim).to_json()
        assert set(obj) == {"h", "r", "sigma"}

    def test_json_half_disclosure_rejected(self, claim):
        obj = make_basic_proof(claim, disclose=True).to_json()
        del obj["nonce"]
        with pytest.raises(EncodingError):
            BasicProof.from_json(obj)


class TestOneTime:
    def test_completeness_100(self, issuer, rng, policy, session):
        claims, _ = issue_claims(issuer, [f"k{i}=v" for i in range(100)], rng)
        assert all(verify_one_time(issuer.pk, make_one_time_proof(c, session, rng), policy) for c in claims)

    def test_fresh_session_key_each_time(self, claim, rng, session):
        a = make_one_time_proof(claim, session, rng)
        b = make_one_time_proof(claim, session, rng)
        assert a.pk_t != b.pk_t and a.sigma_prime != b.sigma_prime

    def test_disclosure(self, issuer, claim, rng, policy, session):
        proof = make_one_time_proof(claim, session, rng, disclose=True)
        assert verify_one_time(issuer.pk, proof, policy)
        lie = dataclasses.replace(proof, m="above18=false")
        assert check_one_time(issuer.pk, lie, policy) is Verdict.REJECTED_SIGNATURE

    @pytest.mark.parametrize("field", FIELDS)
    def test_single_field_tamper(self, issuer, claim, rng, policy, session, field):
        proof = make_one_time_proof(claim, session, rng)
        assert not verify_one_time(issuer.pk, tamper(proof, field), policy)

    def test_stale_sigma_t(self, issuer, claim, rng, policy, session):
        old = make_one_time_proof(claim, make_session("shop.example", NOW - 100), rng)
        new = make_one_time_proof(claim, session, rng)
        spliced = dataclasses.replace(new, sigma_t=old.sigma_t)
        assert check_one_time(issuer.pk, spliced, policy) is Verdict.REJECTED_SIGNATURE

    def test_resigned_sigma_t_over_old_sigma_prime(self, issuer, claim, rng, policy, session):
        # attacker saw an old proof and re-binds its sigma' to a new session with their own key
        old = make_one_time_proof(claim, make_session("shop.example", NOW - 100), rng)
        sk_a = scalar_random(rng)
        pk_a = G2() * sk_a
        sigma_t = bls.sign(sk_a, frame3(old.h, old.r, old.sigma_prime, session, pk_a))
        forged = dataclasses.replace(old, t=session, pk_t=pk_a, sigma_t=sigma_t)
        assert check_one_time(issuer.pk, forged, policy) is Verdict.REJECTED_SIGNATURE

    def test_summed_session_key(self, issuer, claim, rng, policy, session):
        old = make_one_time_proof(claim, make_session("shop.example", NOW - 100), rng)
        sk_a = scalar_random(rng)
        pk_sum = old.pk_t + G2() * sk_a
        sigma_prime = old.sigma_prime + bls.sign(sk_a, frame2(old.h, old.r))
        sigma_t = old.sigma_t + bls.sign(sk_a, frame3(old.h, old.r, sigma_prime, session, pk_sum))
        forged = dataclasses.replace(
            old, t=session, pk_t=pk_sum, sigma_prime=sigma_prime, sigma_t=sigma_t
        )
        assert check_one_time(issuer.pk, forged, policy) is Verdict.REJECTED_SIGNATURE

    def test_holder_without_issuer_signature_cannot_forge(self, issuer, claim, rng, policy, session):
        stripped = dataclasses.replace(claim, sigma=G1().identity())
        proof = make_one_time_proof(stripped, session, rng)
        assert not verify_one_time(issuer.pk, proof, policy)

    def test_empty_session(self, claim, rng):
        with pytest.raises(ValueError):
            make_one_time_proof(claim, "", rng)

    def test_json_round_trip_and_dispatch(self, claim, rng, session):
        proof = make_one_time_proof(claim, session, rng, disclose=True)
        obj = json.loads(json.dumps(proof.to_json()))
        assert proof_from_json(obj) == proof
        assert isinstance(proof_from_json(make_basic_proof(claim).to_json()), BasicProof)

    def test_truncated_point_rejected(self, claim, rng, session):
        obj = make_one_time_proof(claim, session, rng).to_json()
        obj["pk_t"] = obj["pk_t"][:-8]
        with pytest.raises(EncodingError):
            OneTimeProof.from_json(obj)


class TestPolicy:
    @pytest.mark.parametrize(
        "t",
        [
            make_session("other.example", NOW - 10),
            make_session("shop.example", NOW - 301),
            make_session("shop.example", NOW + 5),
            "not json",
            '{"aud":"shop.example","iat":"x"}',
            '["shop.example"]',
        ],
    )
    def test_rejected_policy(self, issuer, claim, rng, policy, t):
        proof = make_one_time_proof(claim, t, rng)
        assert check_one_time(issuer.pk, proof, policy) is Verdict.REJECTED_POLICY

    def test_boundary_age_accepted(self, issuer, claim, rng, policy):
        proof = make_one_time_proof(claim, make_session("shop.example", NOW - 300), rng)
        assert check_one_time(issuer.pk, proof, policy) is Verdict.ACCEPTED

    def test_max_age_must_be_positive(self):
        with pytest.raises(ValueError):
            SessionPolicy("a", 0)

    def test_session_is_canonical(self):
        assert make_session("a", 5) == '{"aud":"a","iat":5}'


def test_frame3_layout():
    h = bytes(range(32))
    r, s, pk = G2() * 3, G1() * 5, G2() * 7
    expected = b":".join([b64(h), b64(r.to_bytes()), b64(s.to_bytes()), b64(b"t1"), b64(pk.to_bytes())])
    assert frame3(h, r, s, "t1", pk) == expected
