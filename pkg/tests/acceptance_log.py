"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

import contextlib

RESULTS = {}


@contextlib.contextmanager
def criterion(n, text):
    """Record criterion ``n``; the body may append detail via the yielded list."""
    detail = []
    try:
        yield detail
    except BaseException:
        RESULTS[n] = (False, " ".join([text, *detail]))
        print(f"FAIL criterion {n}: {text}")
        raise
    RESULTS[n] = (True, " ".join([text, *detail]))
    print(f"PASS criterion {n}: {' '.join([text, *detail])}")
