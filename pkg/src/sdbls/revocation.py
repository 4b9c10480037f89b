"""Public revocation lists.

A list holds revealed ``rev`` scalars and nothing else. A presented ``r``
is revoked when ``r == rev*G2`` for some entry. Only meaningful after the
presentation's signature has verified: a holder lying about ``r`` already
fails there.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Iterator

from .codec import b64d, b64e
from .curve import SCALAR_SIZE, EncodingError, G2, G2Point, scalar_from_bytes, scalar_to_bytes


class StaleIndex(Exception):
    """The index was built from fewer entries than the list now holds."""


class RevocationList:
    """Append-only, duplicate-free sequence of revealed revocation scalars."""

    def __init__(self, entries: Iterable[int] = ()):
        self._entries: list[int] = []
        self._seen: set[int] = set()
        for rev in entries:
            self.publish(rev)

    def publish(self, rev: int) -> bool:
        """Append ``rev``. Returns False (list unchanged) on a duplicate."""
        if not isinstance(rev, int) or rev == 0:
            raise ValueError("revocation scalar must be a nonzero int")
        scalar_to_bytes(rev)  # range check
        if rev in self._seen:
            return False
        self._entries.append(rev)
        self._seen.add(rev)
        return True

    @property
    def entries(self) -> tuple[int, ...]:
        return tuple(self._entries)

    def snapshot(self) -> "RevocationList":
        return RevocationList(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[int]:
        return iter(tuple(self._entries))

    def __contains__(self, rev: int) -> bool:
        return rev in self._seen

    def dumps(self) -> str:
        return "".join(b64e(scalar_to_bytes(rev)) + "\n" for rev in self._entries)

    @classmethod
    def loads(cls, text: str) -> "RevocationList":
        out = cls()
        for n, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                rev = scalar_from_bytes(b64d(line))
            except EncodingError as err:
                raise EncodingError(f"line {n}: {err}") from err
            if rev == 0:
                raise EncodingError(f"line {n}: zero revocation scalar")
            out.publish(rev)
        return out

    def to_binary(self) -> bytes:
        """Entries as back-to-back 32-byte big-endian scalars."""
        return b"".join(scalar_to_bytes(rev) for rev in self._entries)

    @classmethod
    def from_binary(cls, data: bytes) -> "RevocationList":
        if len(data) % SCALAR_SIZE:
            raise EncodingError(f"binary list length {len(data)} is not a multiple of {SCALAR_SIZE}")
        out = cls()
        for off in range(0, len(data), SCALAR_SIZE):
            rev = scalar_from_bytes(data[off:off + SCALAR_SIZE])
            if rev == 0:
                raise EncodingError(f"entry {off // SCALAR_SIZE}: zero revocation scalar")
            out.publish(rev)
        return out

    def save(self, path: str | os.PathLike) -> None:
        """Write as text (one base64url scalar per line) or, for ``*.bin``, raw binary."""
        if str(path).endswith(".bin"):
            with open(path, "wb") as fh:
                fh.write(self.to_binary())
        else:
            with open(path, "w", encoding="ascii") as fh:
                fh.write(self.dumps())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RevocationList":
        """Missing file means an empty list."""
        if not os.path.exists(path):
            return cls()
        if str(path).endswith(".bin"):
            with open(path, "rb") as fh:
                return cls.from_binary(fh.read())
        with open(path, encoding="ascii") as fh:
            return cls.loads(fh.read())


def publish_revocation(lst: RevocationList, rev: int) -> bool:
    return lst.publish(rev)


def is_revoked_scan(r: G2Point, lst: RevocationList) -> bool:
    """One G2 multiplication per entry."""
    g2 = G2()
    for rev in lst:
        if g2 * rev == r:
            return True
    return False


@dataclass(frozen=True)
class RevocationIndex:
    points: frozenset[bytes]
    source_length: int


def build_index(lst: RevocationList) -> RevocationIndex:
    g2 = G2()
    entries = lst.entries
    return RevocationIndex(frozenset((g2 * rev).to_bytes() for rev in entries), len(entries))


def is_revoked_indexed(r: G2Point, index: RevocationIndex, lst: RevocationList | None = None) -> bool:
    """Set lookup on ``serialize(r)``.

    Passing the list the index was built from makes staleness an error
    instead of a silent false negative.
    """
    if lst is not None and index.source_length < len(lst):
        raise StaleIndex(f"index covers {index.source_length} of {len(lst)} entries")
    return r.to_bytes() in index.points
