"""Credential primitives: salted password digests and API keys.

Digest format: ``pbkdf2_sha256$<iterations>$<salt hex>$<digest hex>`` with a
random 16-byte salt per user and a configurable iteration count. Keys are 32
lowercase hex characters from the process CSPRNG; comparisons go through
``hmac.compare_digest``.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets

DEFAULT_ITERATIONS = 210_000
KEY_LENGTH = 32
_SCHEME = "pbkdf2_sha256"


def hash_password(password: str, iterations: int = DEFAULT_ITERATIONS) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"{_SCHEME}${iterations}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, iterations, salt_hex, digest_hex = stored.split("$")
        if scheme != _SCHEME:
            return False
        salt = bytes.fromhex(salt_hex)
        expected = bytes.fromhex(digest_hex)
        iterations = int(iterations)
    except ValueError:
        return False
    candidate = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return hmac.compare_digest(candidate, expected)


def new_api_key() -> str:
    return secrets.token_hex(KEY_LENGTH // 2)


def plausible_key(key: str) -> bool:
    """Cheap format gate before any store lookup."""
    if len(key) != KEY_LENGTH:
        return False
    return all(ch in "0123456789abcdef" for ch in key)


def keys_equal(a: str, b: str) -> bool:
    return hmac.compare_digest(a.encode("utf-8"), b.encode("utf-8"))


def new_session_token() -> str:
    return secrets.token_urlsafe(32)
