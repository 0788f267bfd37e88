"""
Disperse and Retrieve for encrypted transactions.

A client encrypts its transaction under a fresh key (``tx-key``) and
entrusts that key to the validators in one of three ways:

* ``THRESHOLD``: the key encrypted under the validators' global threshold key.
* ``AVIDM``: Shamir shares of the key, one per validator, committed to by a
  dealer-signed Merkle root. Shares are not checked against each other when
  received; after reconstruction a validator regenerates every share,
  rebuilds the tree and compares roots.
* ``HYBRID``: both of the above. Retrieval reconstructs from whichever kind
  reaches the threshold first and then checks that both parts agree.

For Hybrid the Shamir polynomial is derived from the key itself, so a
validator holding only the key (from the threshold track) can still rebuild
the dealer's tree.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from . import merkle, sss, tde
from .errors import DecodeError, DecryptionFailed, NotEnoughShares, ShareVerificationFailed
from .field import FieldElement, Polynomial, PrimeField
from .group import SchnorrGroup
from .signing import KeyRegistry, Signer
from .wire import Reader, lp, sha256, u8, u32

_ZERO_NONCE = bytes(12)
_AEAD_AAD = b"fino/payload"


class Scheme(str, enum.Enum):
    THRESHOLD = "threshold"
    AVIDM = "avidm"
    HYBRID = "hybrid"

    @property
    def code(self) -> int:
        return list(Scheme).index(self)

    @property
    def uses_sss(self) -> bool:
        return self is not Scheme.THRESHOLD

    @property
    def uses_tde(self) -> bool:
        return self is not Scheme.AVIDM


class Ack(enum.Enum):
    ACK = "ack"
    DROP = "drop"


class Track(enum.Enum):
    FAST_SSS = "fast-sss"
    SLOW_TDE = "slow-tde"


class MaliciousMode(str, enum.Enum):
    OFF_POLYNOMIAL = "off_polynomial"
    BAD_ROOT = "bad_root"
    SPLIT_BRAIN_HYBRID = "split_brain_hybrid"


@dataclass
class CryptoContext:
    """Public parameters plus the trusted-setup threshold key material."""

    n: int
    f: int
    field: PrimeField
    group: SchnorrGroup
    tde_pk: tde.TdePublicKey
    tde_sks: list[tde.TdeSecretShare]
    signer: Signer

    @property
    def k(self) -> int:
        return self.f + 1

    @classmethod
    def setup(cls, n: int, f: int, field: PrimeField | str = "p25519", group: SchnorrGroup | str = "sp256",
              seed: int = 0, signer: Signer | None = None) -> "CryptoContext":
        if isinstance(field, str):
            field = PrimeField.named(field)
        if isinstance(group, str):
            group = SchnorrGroup.named(group)
        rng = random.Random(f"fino-setup/{seed}")
        pk, sks = tde.keygen(group, f + 1, n, rng)
        return cls(n, f, field, group, pk, sks, signer or KeyRegistry(seed))


# -- payload encryption -----------------------------------------------------

def key_bytes(key: FieldElement) -> bytes:
    return key.to_bytes()


def _aead(key: FieldElement) -> ChaCha20Poly1305:
    return ChaCha20Poly1305(sha256(b"fino/aead-key\x00", key_bytes(key)))


def encrypt_payload(key: FieldElement, plaintext: bytes) -> bytes:
    # a fresh key per transaction makes the fixed nonce safe
    return _aead(key).encrypt(_ZERO_NONCE, plaintext, _AEAD_AAD)


def decrypt_payload(key: FieldElement, ciphertext: bytes) -> bytes | None:
    try:
        return _aead(key).decrypt(_ZERO_NONCE, ciphertext, _AEAD_AAD)
    except InvalidTag:
        return None


def hybrid_polynomial(key: FieldElement, k: int) -> Polynomial:
    """Degree k-1 polynomial with ``key`` at the origin, coefficients from a KDF of the key."""
    fld = key.field
    width = fld.byte_length + 16
    coeffs = [key.value]
    for j in range(1, k):
        digest = hashlib.shake_256(b"fino/hybrid-coef\x00" + key_bytes(key) + u32(j)).digest(width)
        coeffs.append(int.from_bytes(digest, "big") % fld.p)
    return Polynomial(coeffs, fld)


def reencryption_randomness(key: FieldElement, group: SchnorrGroup) -> int:
    return group.hash_to_scalar(key_bytes(key), b"te-reenc")


def tde_label(payload_ct: bytes, dealer: str) -> bytes:
    return sha256(b"fino/tde-label\x00", lp(payload_ct), lp(dealer.encode()))


# -- wire types ---------------------------------------------------------------

@dataclass(frozen=True)
class Transaction:
    """Public part of a dispersal; this is what DAG batches carry."""

    tx_id: bytes
    dealer: str
    scheme: Scheme
    payload_ct: bytes
    root: bytes
    root_sig: bytes
    tde_ct: tde.TdeCiphertext | None

    @staticmethod
    def compute_id(dealer: str, scheme: Scheme, payload_ct: bytes, root: bytes,
                   tde_ct_bytes: bytes) -> bytes:
        return sha256(b"fino/tx\x00", lp(payload_ct), lp(dealer.encode()), u8(scheme.code),
                      lp(root), lp(tde_ct_bytes))

    def encode(self, group: SchnorrGroup) -> bytes:
        ct = self.tde_ct.encode(group) if self.tde_ct is not None else b""
        return (lp(self.dealer.encode()) + u8(self.scheme.code) + lp(self.payload_ct)
                + lp(self.root) + lp(self.root_sig) + lp(ct))

    @classmethod
    def decode(cls, data: bytes, group: SchnorrGroup) -> "Transaction":
        r = Reader(data)
        dealer = r.lp().decode()
        code = r.u8()
        if code >= len(Scheme):
            raise DecodeError(f"unknown scheme code {code}")
        scheme = list(Scheme)[code]
        payload_ct, root, root_sig, ct_bytes = r.lp(), r.lp(), r.lp(), r.lp()
        r.expect_end()
        ct = tde.TdeCiphertext.decode(ct_bytes, group) if ct_bytes else None
        tx_id = cls.compute_id(dealer, scheme, payload_ct, root, ct_bytes)
        return cls(tx_id, dealer, scheme, payload_ct, root, root_sig, ct)

    @property
    def label(self) -> bytes:
        return tde_label(self.payload_ct, self.dealer)


@dataclass(frozen=True)
class Envelope:
    """One validator's Shamir share with its Merkle membership proof."""

    share: sss.Share
    proof: merkle.MerkleProof

    def encode(self) -> bytes:
        return lp(self.share.encode()) + self.proof.encode()

    @classmethod
    def decode(cls, data: bytes, fld: PrimeField) -> "Envelope":
        r = Reader(data)
        share = sss.Share.decode(r.lp(), fld)
        proof = merkle.MerkleProof.read(r)
        r.expect_end()
        return cls(share, proof)


@dataclass
class DispersalBundle:
    tx: Transaction
    envelopes: dict[int, Envelope] = field(default_factory=dict)


@dataclass(frozen=True)
class RevealedShare:
    """A share presented during retrieval: either an SSS envelope or a TDE decryption share."""

    tx_id: bytes
    revealer: int
    envelope: Envelope | None = None
    tde_share: tde.DecryptionShare | None = None

    @property
    def kind(self) -> str:
        return "sss" if self.envelope is not None else "tde"

    def encode(self, group: SchnorrGroup) -> bytes:
        if self.envelope is not None:
            body = u8(0) + self.envelope.encode()
        else:
            body = u8(1) + self.tde_share.encode(group)
        return self.tx_id + u32(self.revealer) + body

    @classmethod
    def decode(cls, data: bytes, fld: PrimeField, group: SchnorrGroup) -> "RevealedShare":
        r = Reader(data)
        tx_id, revealer, kind = r.take(32), r.u32(), r.u8()
        rest = r.take(len(data) - r.pos)
        if kind == 0:
            return cls(tx_id, revealer, envelope=Envelope.decode(rest, fld))
        if kind == 1:
            return cls(tx_id, revealer, tde_share=tde.DecryptionShare.decode(rest, group))
        raise DecodeError(f"unknown share kind {kind}")


@dataclass(frozen=True)
class OpenOutcome:
    tx_id: bytes
    plaintext: bytes | None

    @property
    def opened(self) -> bool:
        return self.plaintext is not None

    @property
    def rejected(self) -> bool:
        return self.plaintext is None


# -- dispersal ---------------------------------------------------------------

def _root_message(root: bytes) -> bytes:
    return b"fino/root\x00" + root


def _envelopes(shares: Sequence[sss.Share], leaf_order: Sequence[int] | None = None):
    """Tree over the encoded shares; ``leaf_order`` permutes leaf positions."""
    order = list(range(len(shares))) if leaf_order is None else list(leaf_order)
    tree = merkle.build([shares[i].encode() for i in order])
    position = {vid: pos for pos, vid in enumerate(order)}
    envs = {s.validator_id: Envelope(s, tree.prove(position[s.validator_id])) for s in shares}
    return tree.root, envs


def _assemble(ctx: CryptoContext, dealer: str, scheme: Scheme, payload_ct: bytes, root: bytes,
              ct: tde.TdeCiphertext | None, envs: dict[int, Envelope]) -> DispersalBundle:
    root_sig = ctx.signer.sign(dealer, _root_message(root)) if root else b""
    ct_bytes = ct.encode(ctx.group) if ct is not None else b""
    tx_id = Transaction.compute_id(dealer, scheme, payload_ct, root, ct_bytes)
    return DispersalBundle(Transaction(tx_id, dealer, scheme, payload_ct, root, root_sig, ct), envs)


def client_disperse(ctx: CryptoContext, plaintext: bytes, scheme: Scheme | str, dealer: str,
                    rng: random.Random, malicious: MaliciousMode | str | None = None) -> DispersalBundle:
    """Encrypt ``plaintext`` under a fresh key and entrust the key to the validators.

    ``malicious`` builds a deliberately inconsistent dealing whose envelopes
    still pass the receive-time checks.
    """
    scheme = Scheme(scheme)
    malicious = MaliciousMode(malicious) if malicious is not None else None
    key = ctx.field.random(rng)
    payload_ct = encrypt_payload(key, plaintext)
    label = tde_label(payload_ct, dealer)

    ct = None
    if scheme is Scheme.THRESHOLD:
        ct = tde.enc(ctx.tde_pk, key_bytes(key), label, ctx.group.random_scalar(rng))
    elif scheme is Scheme.HYBRID:
        tde_key = key
        if malicious is MaliciousMode.SPLIT_BRAIN_HYBRID:
            tde_key = ctx.field(key.value + 1 + rng.randrange(ctx.field.p - 1))
        ct = tde.enc(ctx.tde_pk, key_bytes(tde_key), label, reencryption_randomness(tde_key, ctx.group))

    root, envs = b"", {}
    if scheme.uses_sss:
        if scheme is Scheme.HYBRID:
            poly = hybrid_polynomial(key, ctx.k)
        else:
            poly = sss.poly_from_secret(key, ctx.k - 1, rng)
        shares = sss.shares_from_polynomial(poly, ctx.n)
        order = None
        if malicious is MaliciousMode.OFF_POLYNOMIAL:
            victim = rng.randrange(ctx.n)
            s = shares[victim]
            shares[victim] = sss.Share(s.validator_id, s.x, s.y + 1 + rng.randrange(ctx.field.p - 1))
        elif malicious is MaliciousMode.BAD_ROOT:
            shift = 1 + rng.randrange(ctx.n - 1)
            order = [(i + shift) % ctx.n for i in range(ctx.n)]
        root, envs = _envelopes(shares, order)
    return _assemble(ctx, dealer, scheme, payload_ct, root, ct, envs)


def verify_root_signature(ctx: CryptoContext, tx: Transaction) -> bool:
    return bool(tx.root) and ctx.signer.verify(tx.dealer, _root_message(tx.root), tx.root_sig)


def ciphertext_ok(ctx: CryptoContext, tx: Transaction) -> bool:
    return tx.tde_ct is not None and tx.tde_ct.label == tx.label and tde.verify_ciphertext(ctx.tde_pk, tx.tde_ct)


def envelope_ok(ctx: CryptoContext, validator_id: int, tx: Transaction, envelope: Envelope | None) -> bool:
    """Format and membership checks only; never a polynomial-consistency check."""
    if envelope is None:
        return False
    share = envelope.share
    if share.validator_id != validator_id or share.x != sss.evaluation_point(ctx.field, validator_id):
        return False
    if envelope.proof.size != ctx.n:
        return False
    return merkle.verify(tx.root, share.encode(), envelope.proof)


def on_receive_envelope(ctx: CryptoContext, validator_id: int, tx: Transaction,
                        envelope: Envelope | None) -> Ack:
    """Acknowledge iff every part this scheme sends to ``validator_id`` checks out.

    A Hybrid validator that got no envelope acknowledges on the strength of
    the threshold ciphertext alone; it will reveal a decryption share.
    """
    if tx.scheme.uses_tde and not ciphertext_ok(ctx, tx):
        return Ack.DROP
    if tx.scheme.uses_sss:
        if not verify_root_signature(ctx, tx):
            return Ack.DROP
        if envelope is None and tx.scheme is Scheme.HYBRID:
            return Ack.ACK
        if not envelope_ok(ctx, validator_id, tx, envelope):
            return Ack.DROP
    return Ack.ACK


def disperse_complete(acks: Iterable[int], n: int, f: int) -> bool:
    return len(set(acks)) >= n - f


# -- revealing ----------------------------------------------------------------

def reveal_sss(tx: Transaction, validator_id: int, envelope: Envelope) -> RevealedShare:
    return RevealedShare(tx.tx_id, validator_id, envelope=envelope)


def reveal_tde(ctx: CryptoContext, tx: Transaction, validator_id: int,
               sk: tde.TdeSecretShare | None = None) -> RevealedShare:
    """Decryption share for ``tx``; the ciphertext is verified first (raises InvalidCiphertext)."""
    sk = sk or ctx.tde_sks[validator_id]
    return RevealedShare(tx.tx_id, validator_id, tde_share=tde.share_gen(ctx.tde_pk, sk, tx.tde_ct))


def revealed_valid(ctx: CryptoContext, tx: Transaction, rs: RevealedShare) -> bool:
    """Whether a revealed share is usable. The root signature is checked separately, once."""
    if rs.tx_id != tx.tx_id or not 0 <= rs.revealer < ctx.n:
        return False
    if rs.envelope is not None:
        return tx.scheme.uses_sss and envelope_ok(ctx, rs.revealer, tx, rs.envelope)
    if rs.tde_share is None or not tx.scheme.uses_tde or tx.tde_ct is None:
        return False
    if rs.tde_share.validator_id != rs.revealer:
        return False
    return tde.share_verify(ctx.tde_pk, tx.tde_ct, rs.tde_share)


def hybrid_track_select(valid_sss: int, k: int, timeout_elapsed: bool) -> Track:
    """Fast track until the reveal timeout, unless SSS already reached the threshold."""
    if valid_sss >= k or not timeout_elapsed:
        return Track.FAST_SSS
    return Track.SLOW_TDE


# -- post-verification and retrieval ----------------------------------------

def post_verify_avidm(poly: Polynomial, n: int, signed_root: bytes) -> bool:
    regenerated = sss.shares_from_polynomial(poly, n)
    return merkle.root_of([s.encode() for s in regenerated]) == signed_root


def post_verify_hybrid(ctx: CryptoContext, key: FieldElement, signed_root: bytes,
                       ct: tde.TdeCiphertext, label: bytes) -> bool:
    if not post_verify_avidm(hybrid_polynomial(key, ctx.k), ctx.n, signed_root):
        return False
    again = tde.enc(ctx.tde_pk, key_bytes(key), label, reencryption_randomness(key, ctx.group))
    return again == ct


def _first_k(shares: Iterable[RevealedShare], k: int) -> list[RevealedShare]:
    by_revealer: dict[int, RevealedShare] = {}
    for rs in shares:
        by_revealer.setdefault(rs.revealer, rs)
    return [by_revealer[i] for i in sorted(by_revealer)][:k]


def _key_from_tde(ctx: CryptoContext, tx: Transaction, shares: list[RevealedShare]) -> FieldElement | None:
    try:
        raw = tde.dec(ctx.tde_pk, tx.tde_ct, [rs.tde_share for rs in shares], verified=True)
    except DecryptionFailed:
        return None
    try:
        return ctx.field.decode(raw)
    except ValueError:
        return None


class Retrieval:
    """Per-transaction retrieval state at one validator.

    Shares are validated once on arrival and kept by kind. ``outcome`` is
    ``None`` while fewer than F+1 valid shares of a usable kind are held.
    """

    def __init__(self, ctx: CryptoContext, tx: Transaction):
        self.ctx = ctx
        self.tx = tx
        self.sss: dict[int, RevealedShare] = {}
        self.tde: dict[int, RevealedShare] = {}
        self.invalid = 0
        self.track: Track | None = None
        self._outcome: OpenOutcome | None = None
        self._root_ok = verify_root_signature(ctx, tx) if tx.scheme.uses_sss else True

    def add(self, rs: RevealedShare) -> bool:
        bucket = self.sss if rs.envelope is not None else self.tde
        if rs.revealer in bucket:
            return True
        if not revealed_valid(self.ctx, self.tx, rs):
            self.invalid += 1
            return False
        bucket[rs.revealer] = rs
        return True

    def valid_counts(self) -> tuple[int, int]:
        return len(self.sss), len(self.tde)

    def ready(self) -> bool:
        k = self.ctx.k
        if self.tx.scheme is Scheme.AVIDM:
            return len(self.sss) >= k
        if self.tx.scheme is Scheme.THRESHOLD:
            return len(self.tde) >= k
        return len(self.sss) >= k or len(self.tde) >= k

    def outcome(self) -> OpenOutcome | None:
        if self._outcome is None and self.ready():
            self._outcome = OpenOutcome(self.tx.tx_id, self._reconstruct())
        return self._outcome

    def _reconstruct(self) -> bytes | None:
        ctx, tx = self.ctx, self.tx
        k = ctx.k
        if not self._root_ok:
            return None
        if tx.scheme is Scheme.THRESHOLD:
            self.track = Track.SLOW_TDE
            key = _key_from_tde(ctx, tx, _first_k(self.tde.values(), k))
        elif len(self.sss) >= k:
            self.track = Track.FAST_SSS
            chosen = _first_k(self.sss.values(), k)
            poly = sss.reconstruct_polynomial([rs.envelope.share for rs in chosen], k)
            key = poly.secret
            if tx.scheme is Scheme.AVIDM and not post_verify_avidm(poly, ctx.n, tx.root):
                return None
        else:
            self.track = Track.SLOW_TDE
            key = _key_from_tde(ctx, tx, _first_k(self.tde.values(), k))
        if key is None:
            return None
        if tx.scheme is Scheme.HYBRID and not post_verify_hybrid(ctx, key, tx.root, tx.tde_ct, tx.label):
            return None
        return decrypt_payload(key, tx.payload_ct)


def retrieve(ctx: CryptoContext, tx: Transaction, revealed: Iterable[RevealedShare]) -> OpenOutcome | None:
    """Pending (``None``) until F+1 valid shares of a usable kind; then the fixed outcome."""
    r = Retrieval(ctx, tx)
    for rs in revealed:
        r.add(rs)
    return r.outcome()


def honest_reveals(ctx: CryptoContext, bundle: DispersalBundle, kind: str = "sss") -> list[RevealedShare]:
    """Every validator's revealed share of one kind, as honest validators would present them."""
    tx = bundle.tx
    if kind == "sss":
        return [reveal_sss(tx, vid, env) for vid, env in sorted(bundle.envelopes.items())]
    return [reveal_tde(ctx, tx, vid) for vid in range(ctx.n)]


__all__ = [
    "Ack", "CryptoContext", "DispersalBundle", "Envelope", "MaliciousMode", "NotEnoughShares",
    "OpenOutcome", "Retrieval", "RevealedShare", "Scheme", "ShareVerificationFailed", "Track",
    "Transaction", "ciphertext_ok", "client_disperse", "decrypt_payload", "disperse_complete",
    "encrypt_payload", "envelope_ok", "honest_reveals", "hybrid_polynomial", "hybrid_track_select",
    "on_receive_envelope", "post_verify_avidm", "post_verify_hybrid", "retrieve", "reveal_sss",
    "reveal_tde", "revealed_valid", "verify_root_signature",
]
