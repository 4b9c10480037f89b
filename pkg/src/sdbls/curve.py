"""BLS12-381 group arithmetic, pairing, hash-to-curve and point encodings.

Group operations are delegated to blst (via ``pyblst``). This module owns
the parts that the rest of the package relies on being stable: the
compressed encodings, the checks run when bytes come in from outside, and
the hash-to-curve domain tag.

Scalars are plain Python ints reduced modulo :data:`ORDER`.

Note on the curve constant: BLS12-381 is ``y^2 = x^3 + 4`` over F_p (and
``y^2 = x^3 + 4(1 + i)`` on the twist). Some write-ups quote ``+ 16``;
those parameters describe a different curve and are not used here.
"""

from __future__ import annotations

import random
import secrets
from typing import Union

import pyblst

#: Field modulus of F_p.
P = 0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB
#: Common prime order of G1, G2 and GT.
ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001

#: Artifact-wide hash-to-curve domain separation tag.
DOMAIN_TAG = b"SDBLS-V01"
#: RFC 9380 suite used by :func:`hash_to_g1`.
HASH_SUITE = "BLS12381G1_XMD:SHA-256_SSWU_RO_"

SCALAR_SIZE = 32
G1_SIZE = 48
G2_SIZE = 96

_G1_GEN = bytes.fromhex(
    "97f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac58"
    "6c55e83ff97a1aeffb3af00adb22c6bb"
)
_G2_GEN = bytes.fromhex(
    "93e02b6052719f607dacd3a088274f65596bd0d09920b61ab5da61bbdc7f5049"
    "334cf11213945d57e5ac7d055d042b7e024aa2b2f08f0a91260805272dc51051"
    "c6e47ad4fa403b02b4510b647ae3d1770bac0326a805bbefd48056c8c121bdb8"
)

_COMPRESSED = 0x80
_INFINITY = 0x40
_SIGN = 0x20

_SMALL_SCALAR = 1 << 12


class EncodingError(ValueError):
    """Bytes from outside could not be turned into a group element or scalar."""


class WrongLength(EncodingError):
    pass


class NonCanonicalEncoding(EncodingError):
    pass


class NotOnCurve(EncodingError):
    pass


class NotInSubgroup(EncodingError):
    pass


class ScalarOutOfRange(EncodingError):
    pass


def _raise_blst(err: ValueError) -> None:
    msg = str(err)
    if "NOT_IN_GROUP" in msg:
        raise NotInSubgroup(msg) from err
    if "NOT_ON_CURVE" in msg:
        raise NotOnCurve(msg) from err
    raise NonCanonicalEncoding(msg) from err


class _Point:
    """Shared behaviour of :class:`G1Point` and :class:`G2Point`."""

    __slots__ = ("_p",)
    _raw: type
    _size: int
    _gen: bytes

    def __init__(self, raw) -> None:
        if not isinstance(raw, self._raw):
            raise TypeError(f"expected {self._raw.__name__}, got {type(raw).__name__}")
        self._p = raw

    @classmethod
    def generator(cls):
        return cls(cls._raw.uncompress(cls._gen))

    @classmethod
    def identity(cls):
        return cls(cls._raw())

    def is_identity(self) -> bool:
        return self._p == self._raw()

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self._p + other._p)

    def __neg__(self):
        return type(self)(-self._p)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self._p + (-other._p))

    def __mul__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        k %= ORDER
        if k < _SMALL_SCALAR:
            return self._mul_small(k)
        return type(self)(self._p.scalar_mul(k))

    def _mul_small(self, k: int):
        # blst's multiplier runs a fixed 255-bit ladder; a few additions are
        # far cheaper for share indices and polynomial powers
        acc, base = self._raw(), self._p
        while k:
            if k & 1:
                acc = acc + base
            k >>= 1
            if k:
                base = base + base
        return type(self)(acc)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._p == other._p

    def __hash__(self) -> int:
        return hash(self.to_bytes())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_bytes().hex()[:16]}...)"

    def to_bytes(self) -> bytes:
        return bytes(self._p.compress())

    @classmethod
    def from_bytes(cls, data: bytes):
        """Decode a compressed point, rejecting anything non-canonical.

        Raises a distinct :class:`EncodingError` subclass for wrong length,
        bad flag bits / out-of-range coordinates, off-curve points and
        points outside the prime-order subgroup.
        """
        data = bytes(data)
        if len(data) != cls._size:
            raise WrongLength(f"{cls.__name__} needs {cls._size} bytes, got {len(data)}")
        flags = data[0]
        if not flags & _COMPRESSED:
            raise NonCanonicalEncoding("compression flag not set")
        body = bytes([flags & 0x1F]) + data[1:]
        if flags & _INFINITY:
            if flags & _SIGN or any(body):
                raise NonCanonicalEncoding("infinity encoding with nonzero bits")
            return cls.identity()
        # each 48-byte limb is one F_p coordinate (x.c1 then x.c0 on G2)
        for off in range(0, cls._size, G1_SIZE):
            if int.from_bytes(body[off:off + G1_SIZE], "big") >= P:
                raise NonCanonicalEncoding("coordinate not reduced modulo p")
        try:
            raw = cls._raw.uncompress(data)
        except ValueError as err:
            _raise_blst(err)
        return cls(raw)


class G1Point(_Point):
    """Element of the prime-order subgroup of E(F_p); signatures live here."""

    __slots__ = ()
    _raw = pyblst.BlstP1Element
    _size = G1_SIZE
    _gen = _G1_GEN


class G2Point(_Point):
    """Element of the prime-order subgroup of the twist; public keys live here."""

    __slots__ = ()
    _raw = pyblst.BlstP2Element
    _size = G2_SIZE
    _gen = _G2_GEN


class GtElement:
    """Target-group element, held as an un-exponentiated Miller loop value.

    Comparison applies the final exponentiation, so two Miller values that
    map to the same GT element compare equal. Not hashable and never
    serialized.
    """

    __slots__ = ("_m",)

    def __init__(self, miller) -> None:
        self._m = miller

    @classmethod
    def one(cls) -> "GtElement":
        return cls(pyblst.miller_loop(pyblst.BlstP1Element(), _G2_POINT._p))

    def __mul__(self, other: "GtElement") -> "GtElement":
        return GtElement(self._m * other._m)

    def __pow__(self, k: int) -> "GtElement":
        if k < 0:
            raise ValueError("negative exponent")
        result, base = None, self._m
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return GtElement(result) if result is not None else GtElement.one()

    def __eq__(self, other) -> bool:
        if not isinstance(other, GtElement):
            return NotImplemented
        return pyblst.final_verify(self._m, other._m)

    __hash__ = None  # type: ignore[assignment]


Point = Union[G1Point, G2Point]


_G1_POINT = G1Point.generator()
_G2_POINT = G2Point.generator()


def G1() -> G1Point:
    return _G1_POINT


def G2() -> G2Point:
    return _G2_POINT


def scalar_random(rng: random.Random | None = None) -> int:
    """Uniform nonzero scalar. ``rng`` defaults to the OS CSPRNG."""
    rng = rng or secrets.SystemRandom()
    while True:
        s = rng.randrange(ORDER)
        if s:
            return s


def g_mul(s: int, point: Point) -> Point:
    return point * s


def g_add(a: Point, b: Point) -> Point:
    if type(a) is not type(b):
        raise TypeError("cannot add points from different groups")
    return a + b


def pairing(q: G2Point, p: G1Point) -> GtElement:
    """e(Q, P) with Q in G2 and P in G1."""
    return GtElement(pyblst.miller_loop(p._p, q._p))


def pairing_check(q1: G2Point, p1: G1Point, q2: G2Point, p2: G1Point) -> bool:
    """Whether e(q1, p1) == e(q2, p2), sharing one final exponentiation."""
    return pyblst.final_verify(
        pyblst.miller_loop(p1._p, q1._p), pyblst.miller_loop(p2._p, q2._p)
    )


def hash_to_g1(domain_tag: bytes, msg: bytes) -> G1Point:
    """RFC 9380 ``BLS12381G1_XMD:SHA-256_SSWU_RO_`` under ``domain_tag``."""
    if not domain_tag:
        raise ValueError("domain tag must be non-empty")
    return G1Point(pyblst.BlstP1Element.hash_to_group(bytes(msg), bytes(domain_tag)))


def scalar_to_bytes(s: int) -> bytes:
    if not 0 <= s < ORDER:
        raise ScalarOutOfRange("scalar not in [0, n)")
    return s.to_bytes(SCALAR_SIZE, "big")


def scalar_from_bytes(data: bytes) -> int:
    if len(data) != SCALAR_SIZE:
        raise WrongLength(f"scalar needs {SCALAR_SIZE} bytes, got {len(data)}")
    s = int.from_bytes(data, "big")
    if s >= ORDER:
        raise ScalarOutOfRange("scalar encoding >= group order")
    return s


def serialize(x: Union[int, G1Point, G2Point]) -> bytes:
    if isinstance(x, _Point):
        return x.to_bytes()
    if isinstance(x, int):
        return scalar_to_bytes(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def deserialize(data: bytes) -> Union[int, G1Point, G2Point]:
    """Decode by length: 32 bytes scalar, 48 bytes G1, 96 bytes G2."""
    n = len(data)
    if n == SCALAR_SIZE:
        return scalar_from_bytes(data)
    if n == G1_SIZE:
        return G1Point.from_bytes(data)
    if n == G2_SIZE:
        return G2Point.from_bytes(data)
    raise WrongLength(f"no element is encoded in {n} bytes")
