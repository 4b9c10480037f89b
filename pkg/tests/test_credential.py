import hashlib
import json

import pytest

from sdbls import bls
from sdbls.credential import (
    KDF_MEMORY_HARD,
    DishonestDealer,
    IssuerIdentity,
    RevocationRecord,
    SignedClaim,
    claim_digest,
    digest,
    frame,
    frame2,
    issue_claims,
    issue_with_external_revocation,
    load_registry,
    verify_claim,
)
from sdbls.curve import G1, G2, EncodingError, scalar_random

NONCE = bytes(range(16))
# framed bytes and digest computed with coreutils base64 / sha256sum
FRAME_ABOVE18 = (
    b"YWJvdmUxOD10cnVl:AAECAwQFBgcICQoLDA0ODw:"
    b"iTgCdbvI5dzqfcTdfgVQ_yrEgJBTlu2lUGJlD40lHJbrSAZzk3zG2dakSqpWymbcEikVyCSghX4u5BSj3Msjrmka5UMpeBMVoMdd8cBNbXpQoDD8hm8J1RYCDvgjJK-u"
)
H_ABOVE18 = "abbf9378af5077bcc243d1f8cecd6140383127b3c32c2e83bc7515fa2ac46786"
H_ABOVE18_B64 = "q7-TeK9Qd7zCQ9H4zs1hQDgxJ7PDLC6DvHUV-irEZ4Y"
R3_B64 = (
    "iTgCdbvI5dzqfcTdfgVQ_yrEgJBTlu2lUGJlD40lHJbrSAZzk3zG2dakSqpWymbcEikVyCSghX4u5BSj3Msjrmka5UMpeBMVoMdd8cBNbXpQoDD8hm8J1RYCDvgjJK-u"
)


class TestFraming:
    def test_known_frame_and_digest(self):
        r = G2() * 3
        assert frame("above18=true", NONCE, r) == FRAME_ABOVE18
        assert claim_digest("above18=true", NONCE, r).hex() == H_ABOVE18

    def test_deterministic(self):
        r = G2() * 3
        assert frame("m", NONCE, r) == frame("m", NONCE, r)

    def test_nonce_changes_digest(self):
        r = G2() * 3
        assert claim_digest("above18=true", NONCE, r) != claim_digest("above18=true", bytes(16), r)

    def test_field_boundaries_unambiguous(self):
        r = G2() * 3
        assert frame("a:b", NONCE, r) != frame("a", NONCE, r)
        assert frame("a:b", NONCE, r).count(b":") == 2

    def test_frame2_known_bytes(self):
        h = bytes.fromhex(H_ABOVE18)
        assert frame2(h, G2() * 3) == f"{H_ABOVE18_B64}:{R3_B64}".encode()

    def test_frame2_depends_on_r(self):
        h = bytes(32)
        assert frame2(h, G2() * 3) != frame2(h, G2() * 4)

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            frame("m", bytes(15), G2())
        with pytest.raises(ValueError):
            frame2(bytes(31), G2())

    def test_memory_hard_digest(self):
        data = b"above18=true"
        expected = hashlib.scrypt(data, salt=b"SDBLS-V01/claim-digest", n=2**14, r=8, p=1, dklen=32)
        assert digest(data, KDF_MEMORY_HARD) == expected
        assert digest(data, KDF_MEMORY_HARD) != digest(data)

    def test_unknown_kdf(self):
        with pytest.raises(ValueError):
            digest(b"x", "md5")


class TestIssuance:
    def test_single_claim_verifies_under_aggregate_key(self, issuer, rng):
        claims, records = issue_claims(issuer, ["above18=true"], rng)
        c = claims[0]
        pk = bls.aggregate_pks([issuer.pk, c.r])
        assert bls.verify(pk, frame2(c.h, c.r), c.sigma)
        assert not bls.verify(issuer.pk, frame2(c.h, c.r), c.sigma)
        assert c.h == claim_digest(c.m, c.nonce, c.r)
        assert records[0].h == c.h

    def test_fresh_keys_per_claim(self, issuer, rng):
        claims, records = issue_claims(issuer, ["a=1", "a=1"], rng)
        assert claims[0].r != claims[1].r
        assert claims[0].nonce != claims[1].nonce
        assert claims[0].h != claims[1].h

    def test_batch_of_64(self, issuer, rng):
        claims, records = issue_claims(issuer, [f"attr{i}=v" for i in range(64)], rng)
        assert len(issuer.registry) == 64
        for c, rec in zip(claims, records):
            assert G2() * rec.rev == c.r
            assert rec.h == c.h
        assert len({r.rev for r in records}) == 64
        assert len({c.nonce for c in claims}) == 64
        assert len({c.h for c in claims}) == 64

    def test_empty_inputs(self, issuer, rng):
        with pytest.raises(ValueError):
            issue_claims(issuer, [], rng)
        with pytest.raises(ValueError):
            issue_claims(issuer, ["ok", ""], rng)

    def test_memory_hard_claims(self, issuer, rng):
        claims, _ = issue_claims(issuer, ["x=1"], rng, kdf=KDF_MEMORY_HARD)
        assert verify_claim(issuer.pk, claims[0], KDF_MEMORY_HARD)
        assert not verify_claim(issuer.pk, claims[0])

    def test_registry_is_append_only_file(self, tmp_path, rng):
        path = tmp_path / "registry.jsonl"
        keys = bls.keygen(rng)
        issuer = IssuerIdentity(keys, path)
        issue_claims(issuer, ["a=1"], rng)
        first = path.read_text()
        issue_claims(issuer, ["b=2", "c=3"], rng)
        text = path.read_text()
        assert text.startswith(first)
        lines = text.splitlines()
        assert len(lines) == 3
        assert set(json.loads(lines[0])) == {"h", "rev"}
        reloaded = IssuerIdentity(keys, path)
        assert reloaded.registry == issuer.registry
        assert list(load_registry(path)) == list(issuer.registry)

    def test_claim_json_round_trip(self, claim):
        obj = claim.to_json()
        assert set(obj) == {"h", "r", "sigma", "m", "nonce"}
        assert SignedClaim.from_json(json.loads(json.dumps(obj))) == claim

    def test_claim_json_rejects_bad_fields(self, claim):
        obj = claim.to_json()
        obj["r"] = obj["r"][:-4]
        with pytest.raises(EncodingError):
            SignedClaim.from_json(obj)
        with pytest.raises(EncodingError):
            SignedClaim.from_json({"h": "x"})

    def test_record_json(self):
        rec = RevocationRecord(bytes(32), 12345)
        assert RevocationRecord.from_json(rec.to_json()) == rec


class TestExternalRevocation:
    def _dealer(self, m, nonce, rng):
        rev = scalar_random(rng)
        r = G2() * rev
        h = claim_digest(m, nonce, r)
        return rev, r, bls.sign(rev, frame2(h, r))

    def test_honest_dealer(self, issuer, rng):
        nonce = rng.randbytes(16)
        rev, r, sigma_rev = self._dealer("age=42", nonce, rng)
        c = issue_with_external_revocation(issuer, "age=42", r, sigma_rev, nonce)
        assert verify_claim(issuer.pk, c)
        assert issuer.registry == ()

    def test_tampered_dealer_signature(self, issuer, rng):
        nonce = rng.randbytes(16)
        rev, r, sigma_rev = self._dealer("age=42", nonce, rng)
        with pytest.raises(DishonestDealer):
            issue_with_external_revocation(issuer, "age=42", r, sigma_rev + G1(), nonce)

    def test_same_layout_as_local_issuance(self, issuer, rng, claim):
        nonce = rng.randbytes(16)
        rev, r, sigma_rev = self._dealer("above18=true", nonce, rng)
        ext = issue_with_external_revocation(issuer, "above18=true", r, sigma_rev, nonce).to_json()
        local = claim.to_json()
        assert list(ext) == list(local)
        assert {k: len(v) for k, v in ext.items()} == {k: len(v) for k, v in local.items()}
