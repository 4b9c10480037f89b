"""base64url helpers and the ':'-joined framing used for every signed payload."""

from __future__ import annotations

import base64
import binascii
import json
from typing import Any

from .curve import EncodingError

SEPARATOR = b":"


def b64e(data: bytes) -> str:
    """Unpadded base64url."""
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def b64d(text: str) -> bytes:
    if not isinstance(text, str):
        raise EncodingError(f"expected base64url string, got {type(text).__name__}")
    if "=" in text or any(c in text for c in "+/ \n"):
        raise EncodingError("base64url field must be unpadded url-safe alphabet")
    try:
        return base64.urlsafe_b64decode(text + "=" * (-len(text) % 4))
    except (binascii.Error, ValueError) as err:
        raise EncodingError(f"bad base64url: {err}") from err


def join_fields(*fields: bytes) -> bytes:
    """base64url-encode each field and join them with ':'."""
    return SEPARATOR.join(b64e(f).encode("ascii") for f in fields)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def require(obj: Any, *keys: str) -> None:
    if not isinstance(obj, dict):
        raise EncodingError("expected a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise EncodingError(f"missing field(s): {', '.join(missing)}")
