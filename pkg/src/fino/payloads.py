"""
Payloads carried inside DAG messages.

Transaction batches and every consensus payload ride in the same
messages; there is no other message type between validators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Union

from .commit_reveal import RevealedShare, Transaction
from .errors import DecodeError
from .field import PrimeField
from .group import SchnorrGroup
from .wire import Reader, lp, u8, u32, u64


class Codec(Protocol):
    field: PrimeField
    group: SchnorrGroup


@dataclass(frozen=True)
class TxBatch:
    txs: tuple[Transaction, ...]
    TAG = 0

    def encode(self, codec: Codec) -> bytes:
        return u32(len(self.txs)) + b"".join(lp(tx.encode(codec.group)) for tx in self.txs)


@dataclass(frozen=True)
class Proposal:
    view: int
    TAG = 1

    def encode(self, codec: Codec) -> bytes:
        return u64(self.view)


@dataclass(frozen=True)
class Vote:
    view: int
    TAG = 2

    def encode(self, codec: Codec) -> bytes:
        return u64(self.view)


@dataclass(frozen=True)
class Complaint:
    view: int
    TAG = 3

    def encode(self, codec: Codec) -> bytes:
        return u64(self.view)


@dataclass(frozen=True)
class ShareReveal:
    share: RevealedShare
    TAG = 4

    def encode(self, codec: Codec) -> bytes:
        return self.share.encode(codec.group)


Payload = Union[TxBatch, Proposal, Vote, Complaint, ShareReveal]
CONSENSUS_TYPES = (Proposal, Vote, Complaint, ShareReveal)


def encode_payload(p: Payload, codec: Codec) -> bytes:
    return u8(p.TAG) + lp(p.encode(codec))


def read_payload(r: Reader, codec: Codec) -> Payload:
    tag = r.u8()
    body = Reader(r.lp())
    if tag == TxBatch.TAG:
        count = body.u32()
        p = TxBatch(tuple(Transaction.decode(body.lp(), codec.group) for _ in range(count)))
    elif tag in (Proposal.TAG, Vote.TAG, Complaint.TAG):
        p = {Proposal.TAG: Proposal, Vote.TAG: Vote, Complaint.TAG: Complaint}[tag](body.u64())
    elif tag == ShareReveal.TAG:
        p = ShareReveal(RevealedShare.decode(body.data, codec.field, codec.group))
        body.pos = len(body.data)
    else:
        raise DecodeError(f"unknown payload tag {tag}")
    body.expect_end()
    return p
