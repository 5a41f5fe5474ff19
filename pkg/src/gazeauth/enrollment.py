"""Password-triple enrollment: canonical encoding and salted iterated hashing.

The plaintext triple is never persisted; only a salted PBKDF2 digest of its
canonical encoding. Note the triple space is just 12^3 = 1728 values
(about 10.7 bits), so hashing here is hygiene against casual disclosure,
not protection against offline brute force.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import time
from dataclasses import dataclass

from .shapes import check_shape_id

DEFAULT_ITERATIONS = 100_000
SALT_BYTES = 16
ALGORITHMS = ("template", "dtree")


def encode_triple(triple) -> str:
    """Canonical text form of a three-shape password, e.g. 'l|e|c'."""
    items = [check_shape_id(s) for s in triple]
    if len(items) != 3:
        raise ValueError(f"password must name exactly 3 shapes, got {len(items)}")
    return "|".join(items)


def hash_triple(triple, salt: bytes, iterations: int) -> bytes:
    return hashlib.pbkdf2_hmac(
        "sha256", encode_triple(triple).encode("ascii"), salt, iterations
    )


@dataclass(frozen=True)
class Enrollment:
    user: str
    salt: bytes
    secret: bytes
    iterations: int
    algorithm: str = "template"
    created_at: float = 0.0

    def verify(self, triple) -> bool:
        try:
            candidate = hash_triple(triple, self.salt, self.iterations)
        except ValueError:
            return False
        return hmac.compare_digest(candidate, self.secret)


def make_enrollment(user: str, triple, algorithm: str = "template",
                    iterations: int = DEFAULT_ITERATIONS) -> Enrollment:
    if not user:
        raise ValueError("user id must be non-empty")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    salt = os.urandom(SALT_BYTES)
    return Enrollment(
        user=user,
        salt=salt,
        secret=hash_triple(triple, salt, iterations),
        iterations=iterations,
        algorithm=algorithm,
        created_at=time.time(),
    )
