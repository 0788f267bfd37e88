"""
Signature schemes behind one small interface.

``KeyRegistry`` is a keyed-hash registry living inside the simulator's trust
domain: fast and deterministic, used for DAG messages, echoes and dealer
roots. ``Ed25519Signer`` is a real public-key scheme, used by the benchmarks
so that dealer signatures cost what they would in deployment.
"""

from __future__ import annotations

import hashlib
import hmac
from typing import Protocol

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat


class Signer(Protocol):
    def sign(self, identity: str, data: bytes) -> bytes: ...

    def verify(self, identity: str, data: bytes, signature: bytes) -> bool: ...


class KeyRegistry:
    """HMAC-SHA256 keys derived from a seed, one per identity."""

    signature_size = 32

    def __init__(self, seed: int | bytes = 0):
        if isinstance(seed, int):
            seed = seed.to_bytes(16, "big", signed=True)
        self._seed = seed
        self._keys: dict[str, bytes] = {}

    def _key(self, identity: str) -> bytes:
        key = self._keys.get(identity)
        if key is None:
            key = hashlib.sha256(b"fino/key\x00" + self._seed + identity.encode()).digest()
            self._keys[identity] = key
        return key

    def sign(self, identity: str, data: bytes) -> bytes:
        return hmac.new(self._key(identity), data, hashlib.sha256).digest()

    def verify(self, identity: str, data: bytes, signature: bytes) -> bool:
        return hmac.compare_digest(self.sign(identity, data), signature)


class Ed25519Signer:
    """Ed25519 signatures with keys derived from a seed, one per identity."""

    signature_size = 64

    def __init__(self, seed: int | bytes = 0):
        if isinstance(seed, int):
            seed = seed.to_bytes(16, "big", signed=True)
        self._seed = seed
        self._private: dict[str, Ed25519PrivateKey] = {}
        self._public: dict[str, Ed25519PublicKey] = {}

    def _key(self, identity: str) -> Ed25519PrivateKey:
        key = self._private.get(identity)
        if key is None:
            raw = hashlib.sha256(b"fino/ed25519\x00" + self._seed + identity.encode()).digest()
            key = Ed25519PrivateKey.from_private_bytes(raw)
            self._private[identity] = key
            self._public[identity] = key.public_key()
        return key

    def public_key(self, identity: str) -> bytes:
        self._key(identity)
        return self._public[identity].public_bytes(Encoding.Raw, PublicFormat.Raw)

    def sign(self, identity: str, data: bytes) -> bytes:
        return self._key(identity).sign(data)

    def verify(self, identity: str, data: bytes, signature: bytes) -> bool:
        self._key(identity)
        try:
            self._public[identity].verify(signature, data)
        except InvalidSignature:
            return False
        return True
