import random

import pytest

from sdbls import bls
from sdbls.credential import IssuerIdentity, issue_claims


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def issuer(rng):
    return IssuerIdentity(bls.keygen(rng))


@pytest.fixture
def claim(issuer, rng):
    claims, _ = issue_claims(issuer, ["above18=true"], rng)
    return claims[0]


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, text = RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}")
