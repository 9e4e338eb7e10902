"""Salted password hashing (scrypt) with self-describing digest records.

Plaintext passwords are hashed before anything is persisted; the digest
record stores the cost parameters it was created with so verification
works across parameter changes.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass

DEFAULT_LOG2_N = 14  # 16384
DEFAULT_R = 8
DEFAULT_P = 1
_SALT_BYTES = 16
_DIGEST_BYTES = 32


@dataclass(frozen=True)
class PasswordDigest:
    algorithm: str
    salt: str  # hex
    n: int
    r: int
    p: int
    digest: str  # hex

    def to_json_obj(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "salt": self.salt,
            "n": self.n,
            "r": self.r,
            "p": self.p,
            "digest": self.digest,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PasswordDigest":
        return cls(
            algorithm=str(obj["algorithm"]),
            salt=str(obj["salt"]),
            n=int(obj["n"]),
            r=int(obj["r"]),
            p=int(obj["p"]),
            digest=str(obj["digest"]),
        )


def hash_password(
    password: str,
    *,
    log2_n: int = DEFAULT_LOG2_N,
    r: int = DEFAULT_R,
    p: int = DEFAULT_P,
) -> PasswordDigest:
    if not password:
        raise ValueError("password must be nonempty")
    salt = secrets.token_bytes(_SALT_BYTES)
    n = 1 << log2_n
    raw = hashlib.scrypt(
        password.encode("utf-8"), salt=salt, n=n, r=r, p=p, dklen=_DIGEST_BYTES
    )
    return PasswordDigest(
        algorithm="scrypt", salt=salt.hex(), n=n, r=r, p=p, digest=raw.hex()
    )


def verify_password(password: str, record: PasswordDigest) -> bool:
    if record.algorithm != "scrypt":
        return False
    try:
        raw = hashlib.scrypt(
            password.encode("utf-8"),
            salt=bytes.fromhex(record.salt),
            n=record.n,
            r=record.r,
            p=record.p,
            dklen=len(record.digest) // 2,
        )
    except (ValueError, TypeError):
        return False
    return hmac.compare_digest(raw.hex(), record.digest)
