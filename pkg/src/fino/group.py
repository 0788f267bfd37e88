"""
Prime-order Schnorr subgroups of safe-prime fields.

Group elements are plain ints in [1, p); scalars are ints mod q. The
quadratic-residue subgroup of Z_p^* for a safe prime p = 2q + 1 has prime
order q. Exponentiation goes through gmpy2.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

import gmpy2

# Safe primes p = 2q + 1. The 64..512-bit ones were found by a seeded
# next_prime search; modp1536 and modp2048 are RFC 3526 groups 5 and 14.
_SAFE_PRIMES = {
    "toy11": 23,
    "toy1019": 2039,
    "sp64": 0x9FF63C00F3CB0AFB,
    "sp128": 0xE7D9849E7929F1C1B2E97045E14C307F,
    "sp256": 0xF50B7984146BD1119D50D096C00679ACBB64672ADD511E969EE5FA7EFA4B697B,
    "sp512": int(
        "BDA59D847B8DD57A70B911B256D7085390A42162CFA379653F499B73DADD9F7A"
        "B9437A6AD2F1FF03C7794458A933424E48A6AC5CE0E64131A123FAF409B9445F",
        16,
    ),
    "modp1536": int(
        "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
        "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
        "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
        "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
        "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
        "9ED529077096966D670C354E4ABC9804F1746C08CA237327FFFFFFFFFFFFFFFF",
        16,
    ),
    "modp2048": int(
        "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
        "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
        "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
        "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
        "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
        "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
        "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
        "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
        16,
    ),
}

NAMED_GROUPS = tuple(_SAFE_PRIMES)


def _length_prefixed(parts) -> bytes:
    out = bytearray()
    for part in parts:
        if isinstance(part, int):
            part = part.to_bytes(max(1, (part.bit_length() + 7) // 8), "big")
        out += len(part).to_bytes(4, "big") + part
    return bytes(out)


@dataclass(frozen=True)
class SchnorrGroup:
    name: str
    p: int
    q: int
    g: int
    _p_mpz: object = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_p_mpz", gmpy2.mpz(self.p))

    @classmethod
    def named(cls, name: str) -> "SchnorrGroup":
        try:
            p = _SAFE_PRIMES[name]
        except KeyError:
            raise ValueError(f"unknown group {name!r}; choose from {list(NAMED_GROUPS)}") from None
        # 4 = 2^2 is a quadratic residue != 1, hence a generator of the order-q subgroup
        return cls(name, p, (p - 1) // 2, 4)

    @classmethod
    def with_bits(cls, bits: int) -> "SchnorrGroup":
        """Smallest named group with at least ``bits`` bits."""
        for name in NAMED_GROUPS:
            if _SAFE_PRIMES[name].bit_length() >= bits:
                return cls.named(name)
        raise ValueError(f"no named group with >= {bits} bits")

    @property
    def identity(self) -> int:
        return 1

    @property
    def element_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_bytes(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def exp(self, base: int, e: int) -> int:
        return int(gmpy2.powmod(base, e % self.q, self._p_mpz))

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return a * pow(b, -1, self.p) % self.p

    def is_element(self, a) -> bool:
        return isinstance(a, int) and 1 <= a < self.p and gmpy2.powmod(a, self.q, self._p_mpz) == 1

    def random_scalar(self, rng: random.Random) -> int:
        return rng.randrange(1, self.q)

    def hash_to_scalar(self, *parts) -> int:
        """Deterministic hash onto Z_q; parts are bytes or ints, length-prefixed."""
        data = b"fino/h2s\x00" + _length_prefixed(parts)
        wide = hashlib.shake_256(data).digest(self.scalar_bytes + 16)
        return int.from_bytes(wide, "big") % self.q

    def hash_to_group(self, *parts) -> int:
        """Element of the subgroup with unknown discrete log relative to g."""
        counter = 0
        while True:
            data = b"fino/h2g\x00" + _length_prefixed(parts + (counter,))
            wide = hashlib.shake_256(data).digest(self.element_bytes + 16)
            h = pow(int.from_bytes(wide, "big") % self.p, 2, self.p)
            if h not in (0, 1):
                return h
            counter += 1

    def encode(self, a: int) -> bytes:
        return a.to_bytes(self.element_bytes, "big")

    def encode_scalar(self, s: int) -> bytes:
        return s.to_bytes(self.scalar_bytes, "big")


def hash_to_scalar(group: SchnorrGroup, data: bytes) -> int:
    return group.hash_to_scalar(data)
