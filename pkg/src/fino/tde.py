"""
Threshold ElGamal in the style of Shoup and Gennaro's TDH2.

The ciphertext carries a proof that the encryptor knows the randomness
(``u = g^r`` and ``u_bar = g_bar^r`` share a discrete log), bound to the
masked payload, the label and an integrity tag by Fiat-Shamir. Decryption
shares carry Chaum-Pedersen proofs that ``log_g(vk_i) = log_u(u_i)``.

Encryption is a deterministic function of its explicit ``randomness``: the
proof nonce is derived from it. Re-encrypting the same message with the same
randomness therefore reproduces the ciphertext bit for bit.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Sequence

from .errors import BadThreshold, DecodeError, DecryptionFailed, InvalidCiphertext, NotEnoughShares, ShareVerificationFailed
from .field import lagrange_coefficients_at, poly_eval, poly_from_secret, PrimeField
from .group import SchnorrGroup
from .wire import Reader, lp, u32


@dataclass(frozen=True)
class TdePublicKey:
    group: SchnorrGroup
    k: int
    n: int
    h: int
    g_bar: int
    verification_keys: tuple[int, ...]

    def vk(self, validator_id: int) -> int:
        return self.verification_keys[validator_id]


@dataclass(frozen=True)
class TdeSecretShare:
    validator_id: int
    value: int


@dataclass(frozen=True)
class TdeCiphertext:
    c2: bytes
    label: bytes
    tag: bytes
    u: int
    u_bar: int
    e: int
    f: int

    def encode(self, group: SchnorrGroup) -> bytes:
        return (
            lp(self.c2) + lp(self.label) + self.tag
            + group.encode(self.u) + group.encode(self.u_bar)
            + group.encode_scalar(self.e) + group.encode_scalar(self.f)
        )

    @classmethod
    def read(cls, r: Reader, group: SchnorrGroup) -> "TdeCiphertext":
        c2, label, tag = r.lp(), r.lp(), r.take(32)
        u, u_bar = r.fixed(group.element_bytes), r.fixed(group.element_bytes)
        e, f = r.fixed(group.scalar_bytes), r.fixed(group.scalar_bytes)
        return cls(c2, label, tag, u, u_bar, e, f)

    @classmethod
    def decode(cls, data: bytes, group: SchnorrGroup) -> "TdeCiphertext":
        r = Reader(data)
        ct = cls.read(r, group)
        r.expect_end()
        return ct


@dataclass(frozen=True)
class DecryptionShare:
    validator_id: int
    u_i: int
    e_i: int
    f_i: int

    def encode(self, group: SchnorrGroup) -> bytes:
        return (
            u32(self.validator_id) + group.encode(self.u_i)
            + group.encode_scalar(self.e_i) + group.encode_scalar(self.f_i)
        )

    @classmethod
    def read(cls, r: Reader, group: SchnorrGroup) -> "DecryptionShare":
        return cls(r.u32(), r.fixed(group.element_bytes), r.fixed(group.scalar_bytes), r.fixed(group.scalar_bytes))

    @classmethod
    def decode(cls, data: bytes, group: SchnorrGroup) -> "DecryptionShare":
        r = Reader(data)
        ds = cls.read(r, group)
        r.expect_end()
        return ds


def _mask(group: SchnorrGroup, shared: int, length: int) -> bytes:
    return hashlib.shake_256(b"fino/tde-mask\x00" + group.encode(shared)).digest(length)


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _tag(group: SchnorrGroup, shared: int, message: bytes, label: bytes) -> bytes:
    return hashlib.sha256(b"fino/tde-tag\x00" + group.encode(shared) + lp(message) + lp(label)).digest()


def keygen(group: SchnorrGroup, k: int, n: int, rng: random.Random) -> tuple[TdePublicKey, list[TdeSecretShare]]:
    """Trusted-dealer setup: Shamir-share a random exponent over Z_q."""
    if not 1 <= k <= n:
        raise BadThreshold(f"need 1 <= k <= n, got k={k}, n={n}")
    scalars = PrimeField(group.q)
    sk = scalars(group.random_scalar(rng))
    poly = poly_from_secret(sk, k - 1, rng)
    shares = [TdeSecretShare(i, poly_eval(poly, i + 1).value) for i in range(n)]
    vks = tuple(group.exp(group.g, s.value) for s in shares)
    g_bar = group.hash_to_group(b"tdh2-g-bar", group.p)
    pk = TdePublicKey(group, k, n, group.exp(group.g, sk.value), g_bar, vks)
    return pk, shares


def _challenge(pk: TdePublicKey, c2: bytes, label: bytes, tag: bytes, u, w, u_bar, w_bar) -> int:
    return pk.group.hash_to_scalar(b"tdh2-enc", c2, label, tag, u, w, u_bar, w_bar)


def enc(pk: TdePublicKey, message: bytes, label: bytes, randomness: int) -> TdeCiphertext:
    G = pk.group
    r = randomness % G.q
    shared = G.exp(pk.h, r)
    c2 = _xor(message, _mask(G, shared, len(message)))
    tag = _tag(G, shared, message, label)
    s = G.hash_to_scalar(b"tdh2-nonce", r, message, label)
    u, u_bar = G.exp(G.g, r), G.exp(pk.g_bar, r)
    w, w_bar = G.exp(G.g, s), G.exp(pk.g_bar, s)
    e = _challenge(pk, c2, label, tag, u, w, u_bar, w_bar)
    f = (s + r * e) % G.q
    return TdeCiphertext(c2, label, tag, u, u_bar, e, f)


def verify_ciphertext(pk: TdePublicKey, ct: TdeCiphertext) -> bool:
    G = pk.group
    if not (G.is_element(ct.u) and G.is_element(ct.u_bar)):
        return False
    if not (0 <= ct.e < G.q and 0 <= ct.f < G.q) or len(ct.tag) != 32:
        return False
    w = G.div(G.exp(G.g, ct.f), G.exp(ct.u, ct.e))
    w_bar = G.div(G.exp(pk.g_bar, ct.f), G.exp(ct.u_bar, ct.e))
    return ct.e == _challenge(pk, ct.c2, ct.label, ct.tag, ct.u, w, ct.u_bar, w_bar)


def _ct_digest(pk: TdePublicKey, ct: TdeCiphertext) -> bytes:
    return hashlib.sha256(ct.encode(pk.group)).digest()


def _share_challenge(pk: TdePublicKey, ct_digest: bytes, vid: int, u_i, a, b) -> int:
    return pk.group.hash_to_scalar(b"tdh2-share", ct_digest, vid, u_i, a, b)


def share_gen(pk: TdePublicKey, sk_i: TdeSecretShare, ct: TdeCiphertext, *, check: bool = True) -> DecryptionShare:
    if check and not verify_ciphertext(pk, ct):
        raise InvalidCiphertext("ciphertext validity proof does not verify")
    G = pk.group
    digest = _ct_digest(pk, ct)
    x = sk_i.value
    u_i = G.exp(ct.u, x)
    s = G.hash_to_scalar(b"tdh2-share-nonce", x, digest)
    a, b = G.exp(ct.u, s), G.exp(G.g, s)
    e_i = _share_challenge(pk, digest, sk_i.validator_id, u_i, a, b)
    return DecryptionShare(sk_i.validator_id, u_i, e_i, (s + x * e_i) % G.q)


def share_verify(pk: TdePublicKey, ct: TdeCiphertext, ds: DecryptionShare, vk: int | None = None) -> bool:
    G = pk.group
    if vk is None:
        if not 0 <= ds.validator_id < pk.n:
            return False
        vk = pk.vk(ds.validator_id)
    if not G.is_element(ds.u_i) or not (0 <= ds.e_i < G.q and 0 <= ds.f_i < G.q):
        return False
    a = G.div(G.exp(ct.u, ds.f_i), G.exp(ds.u_i, ds.e_i))
    b = G.div(G.exp(G.g, ds.f_i), G.exp(vk, ds.e_i))
    return ds.e_i == _share_challenge(pk, _ct_digest(pk, ct), ds.validator_id, ds.u_i, a, b)


def dec(pk: TdePublicKey, ct: TdeCiphertext, shares: Sequence[DecryptionShare], *, verified: bool = False) -> bytes:
    """Combine k shares in the exponent and unmask.

    Shares are sorted by validator id and the first k distinct ones used.
    Pass ``verified=True`` when every share already passed ``share_verify``.
    """
    G = pk.group
    distinct = {}
    for ds in sorted(shares, key=lambda d: d.validator_id):
        distinct.setdefault(ds.validator_id, ds)
    if len(distinct) < pk.k:
        raise NotEnoughShares(f"have {len(distinct)} distinct shares, need {pk.k}")
    chosen = list(distinct.values())[: pk.k]
    if not verified:
        for ds in chosen:
            if not share_verify(pk, ct, ds):
                raise ShareVerificationFailed(f"share from validator {ds.validator_id} does not verify")
    lam = lagrange_coefficients_at([ds.validator_id + 1 for ds in chosen], 0, G.q)
    shared = G.identity
    for l, ds in zip(lam, chosen):
        shared = G.mul(shared, G.exp(ds.u_i, l))
    message = _xor(ct.c2, _mask(G, shared, len(ct.c2)))
    if _tag(G, shared, message, ct.label) != ct.tag:
        raise DecryptionFailed("integrity tag mismatch after combination")
    return message


def decrypt_with_key(pk: TdePublicKey, sk: int, ct: TdeCiphertext) -> bytes:
    """Single-key decryption with the full secret; a test oracle."""
    G = pk.group
    shared = G.exp(ct.u, sk)
    message = _xor(ct.c2, _mask(G, shared, len(ct.c2)))
    if _tag(G, shared, message, ct.label) != ct.tag:
        raise DecryptionFailed("integrity tag mismatch")
    return message


def decode_share(data: bytes, group: SchnorrGroup) -> DecryptionShare:
    try:
        return DecryptionShare.decode(data, group)
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
