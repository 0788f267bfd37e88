"""
DAG transport: numbered, signed, causally referenced broadcast.

Every validator echoes a signed digest of the first message it sees for
each (sender, seq) to everyone. A message is delivered once 2F+1 echoes for
one digest are in hand, its body is known, and every message it references
has been delivered. Two quorums of 2F+1 intersect in an honest validator,
so at most one digest per (sender, seq) can ever be delivered.

A validator that delivers a message without having seen echoes from all N
validators forwards the body with a 2F+1 echo certificate to the others.
This covers senders and echoers that talk to only part of the network.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence

from .errors import DecodeError, NotDelivered
from .payloads import Codec, Payload, encode_payload, read_payload
from .signing import Signer
from .wire import Reader, lp, sha256, u32, u64

Key = tuple[int, int]


def identity(vid: int) -> str:
    return f"validator-{vid}"


@dataclass(frozen=True)
class DagMessage:
    sender: int
    seq: int
    refs: tuple[Key, ...]
    payloads: tuple[Payload, ...]
    signature: bytes
    digest: bytes = field(compare=False, repr=False)

    @property
    def key(self) -> Key:
        return (self.sender, self.seq)

    @staticmethod
    def body_bytes(sender: int, seq: int, refs: Sequence[Key], payloads: Sequence[Payload], codec: Codec) -> bytes:
        out = [u32(sender), u64(seq), u32(len(refs))]
        out += [u32(s) + u64(q) for s, q in refs]
        out.append(u32(len(payloads)))
        out += [encode_payload(p, codec) for p in payloads]
        return b"".join(out)

    @classmethod
    def create(cls, sender: int, seq: int, refs: Sequence[Key], payloads: Sequence[Payload],
               codec: Codec, signer: Signer) -> "DagMessage":
        refs = tuple(sorted(set(refs)))
        payloads = tuple(payloads)
        digest = sha256(b"fino/dag\x00", cls.body_bytes(sender, seq, refs, payloads, codec))
        return cls(sender, seq, refs, payloads, signer.sign(identity(sender), digest), digest)

    def encode(self, codec: Codec) -> bytes:
        return self.body_bytes(self.sender, self.seq, self.refs, self.payloads, codec) + lp(self.signature)

    @classmethod
    def decode(cls, data: bytes, codec: Codec) -> "DagMessage":
        r = Reader(data)
        sender, seq = r.u32(), r.u64()
        refs = tuple((r.u32(), r.u64()) for _ in range(r.u32()))
        payloads = tuple(read_payload(r, codec) for _ in range(r.u32()))
        signature = r.lp()
        r.expect_end()
        digest = sha256(b"fino/dag\x00", cls.body_bytes(sender, seq, refs, payloads, codec))
        return cls(sender, seq, refs, payloads, signature, digest)

    def well_formed(self, n: int) -> bool:
        if not 0 <= self.sender < n or self.seq < 0:
            return False
        if len(set(self.refs)) != len(self.refs):
            return False
        for s, q in self.refs:
            if not 0 <= s < n or q < 0 or (s == self.sender and q >= self.seq):
                return False
        return self.seq == 0 or (self.sender, self.seq - 1) in self.refs


def _echo_bytes(sender: int, seq: int, digest: bytes) -> bytes:
    return b"fino/echo\x00" + u32(sender) + u64(seq) + digest


@dataclass(frozen=True)
class Echo:
    echoer: int
    sender: int
    seq: int
    digest: bytes
    signature: bytes

    @classmethod
    def create(cls, echoer: int, msg: DagMessage, signer: Signer) -> "Echo":
        sig = signer.sign(identity(echoer), _echo_bytes(msg.sender, msg.seq, msg.digest))
        return cls(echoer, msg.sender, msg.seq, msg.digest, sig)

    def verify(self, signer: Signer) -> bool:
        return signer.verify(identity(self.echoer), _echo_bytes(self.sender, self.seq, self.digest), self.signature)


@dataclass(frozen=True)
class CertifiedMessage:
    """A delivered message forwarded together with 2F+1 echoes on its digest."""

    msg: DagMessage
    certificate: tuple[Echo, ...]


class LocalDag:
    """Delivered messages with a per-message vector clock.

    Because every message references its sender's predecessor, a causal
    past is downward closed per sender and is summarized exactly by the
    highest seq it contains from each sender.
    """

    def __init__(self, n: int):
        self.n = n
        self.messages: dict[Key, DagMessage] = {}
        self.clocks: dict[Key, tuple[int, ...]] = {}
        self.order: list[Key] = []
        self.tips = [-1] * n

    def __contains__(self, key: Key) -> bool:
        return key in self.messages

    def __len__(self) -> int:
        return len(self.messages)

    def get(self, key: Key) -> DagMessage:
        try:
            return self.messages[key]
        except KeyError:
            raise NotDelivered(f"message {key} not delivered") from None

    def add(self, msg: DagMessage) -> None:
        missing = [ref for ref in msg.refs if ref not in self.messages]
        if missing:
            raise NotDelivered(f"references {missing} not delivered")
        clock = [-1] * self.n
        for ref in msg.refs:
            for i, v in enumerate(self.clocks[ref]):
                if v > clock[i]:
                    clock[i] = v
        clock[msg.sender] = msg.seq
        self.messages[msg.key] = msg
        self.clocks[msg.key] = tuple(clock)
        self.order.append(msg.key)
        if msg.seq > self.tips[msg.sender]:
            self.tips[msg.sender] = msg.seq

    def clock(self, key: Key) -> tuple[int, ...]:
        try:
            return self.clocks[key]
        except KeyError:
            raise NotDelivered(f"message {key} not delivered") from None

    def in_past(self, key: Key, of: Key) -> bool:
        """Whether ``key`` is in the causal past of ``of`` (a message is in its own past)."""
        return key[1] <= self.clock(of)[key[0]]

    def past_keys(self, of: Key, exclude: Sequence[int] | None = None) -> list[Key]:
        """Keys in the causal past of ``of`` and above the ``exclude`` clock."""
        clock = self.clock(of)
        lo = exclude or [-1] * self.n
        return [(s, q) for s in range(self.n) for q in range(lo[s] + 1, clock[s] + 1)]

    def linearize(self, keys: Iterable[Key]) -> list[Key]:
        """Topological order; ties broken by ascending (sender, seq)."""
        keys = set(keys)
        indegree = {k: 0 for k in keys}
        children: dict[Key, list[Key]] = {k: [] for k in keys}
        for k in keys:
            for ref in self.messages[k].refs:
                if ref in keys:
                    indegree[k] += 1
                    children[ref].append(k)
        heap = [k for k, d in indegree.items() if d == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            k = heapq.heappop(heap)
            out.append(k)
            for c in children[k]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    heapq.heappush(heap, c)
        return out

    def causal_past(self, of: Key) -> list[DagMessage]:
        return [self.messages[k] for k in self.linearize(self.past_keys(of))]


class Host(Protocol):
    now: int

    def send(self, src: int, dst: int, kind: str, obj) -> None: ...

    def set_timer(self, vid: int, at: int, key: tuple) -> None: ...


class DagTransport:
    """One validator's transport endpoint.

    ``available(msg)`` gates echoing: a validator echoes only messages whose
    transactions it can vouch for. ``on_deliver(msg)`` is the upcall.
    """

    def __init__(self, vid: int, n: int, f: int, codec: Codec, signer: Signer, host: Host,
                 available: Callable[[DagMessage], bool] | None = None,
                 on_deliver: Callable[[DagMessage], None] | None = None,
                 forward_delay: int = 1):
        self.vid = vid
        self.n = n
        self.f = f
        self.codec = codec
        self.signer = signer
        self.host = host
        self.available = available or (lambda msg: True)
        self.on_deliver = on_deliver or (lambda msg: None)
        self.forward_delay = forward_delay
        self.dag = LocalDag(n)
        self.next_seq = 0
        self.first_digest: dict[Key, bytes] = {}
        self.bodies: dict[bytes, DagMessage] = {}
        self.echoes: dict[Key, dict[bytes, dict[int, Echo]]] = {}
        self.parked: dict[Key, DagMessage] = {}
        self.waiting: set[Key] = set()
        self.equivocations: list[Key] = []
        self.dropped = 0
        self.delivered_digest: dict[Key, bytes] = {}
        self.deliver_ticks: dict[Key, int] = {}

    @property
    def quorum(self) -> int:
        return 2 * self.f + 1

    def make_message(self, payloads: Sequence[Payload], seq: int | None = None) -> DagMessage:
        seq = self.next_seq if seq is None else seq
        refs = {(s, t) for s, t in enumerate(self.dag.tips) if t >= 0 and s != self.vid}
        if seq > 0:
            refs.add((self.vid, seq - 1))
        return DagMessage.create(self.vid, seq, sorted(refs), payloads, self.codec, self.signer)

    def broadcast(self, payloads: Sequence[Payload]) -> DagMessage:
        msg = self.make_message(payloads)
        self.next_seq += 1
        for dst in range(self.n):
            self.host.send(self.vid, dst, "dag", msg)
        return msg

    # -- inbound --------------------------------------------------------

    def receive(self, obj) -> None:
        if isinstance(obj, CertifiedMessage):
            self.receive_message(obj.msg, obj.certificate)
        elif isinstance(obj, DagMessage):
            self.receive_message(obj)
        elif isinstance(obj, Echo):
            self.receive_echo(obj)
        else:
            raise TypeError(f"unexpected transport object {type(obj).__name__}")

    def _cert_ok(self, msg: DagMessage, cert: Sequence[Echo]) -> bool:
        echoers = set()
        for e in cert:
            if (e.sender, e.seq, e.digest) != (msg.sender, msg.seq, msg.digest) or not e.verify(self.signer):
                return False
            echoers.add(e.echoer)
        return len(echoers) >= self.quorum and all(0 <= i < self.n for i in echoers)

    def receive_message(self, msg: DagMessage, certificate: Sequence[Echo] | None = None) -> None:
        if not msg.well_formed(self.n) or not self.signer.verify(identity(msg.sender), msg.digest, msg.signature):
            self.dropped += 1
            return
        key = msg.key
        if key in self.dag:
            return
        self.bodies.setdefault(msg.digest, msg)
        if certificate is not None:
            if not self._cert_ok(msg, certificate):
                self.dropped += 1
                return
            slot = self.echoes.setdefault(key, {}).setdefault(msg.digest, {})
            for e in certificate:
                slot.setdefault(e.echoer, e)
        first = self.first_digest.get(key)
        if first is None:
            self.first_digest[key] = msg.digest
            if self.available(msg):
                self._echo(msg)
            else:
                self.parked[key] = msg
        elif first != msg.digest and certificate is None:
            self.equivocations.append(key)
        self._try_deliver(key)

    def _echo(self, msg: DagMessage) -> None:
        echo = Echo.create(self.vid, msg, self.signer)
        for dst in range(self.n):
            self.host.send(self.vid, dst, "echo", echo)

    def recheck_parked(self) -> None:
        """Echo parked messages that have become available."""
        for key in sorted(self.parked):
            msg = self.parked[key]
            if self.available(msg):
                del self.parked[key]
                self._echo(msg)

    def receive_echo(self, echo: Echo) -> None:
        if not 0 <= echo.echoer < self.n or not echo.verify(self.signer):
            self.dropped += 1
            return
        key = (echo.sender, echo.seq)
        if key in self.dag:
            slot = self.echoes.get(key, {}).get(echo.digest)
            if slot is not None:
                slot.setdefault(echo.echoer, echo)
            return
        self.echoes.setdefault(key, {}).setdefault(echo.digest, {}).setdefault(echo.echoer, echo)
        self._try_deliver(key)

    def _ready(self, key: Key) -> DagMessage | None:
        for digest, echoers in self.echoes.get(key, {}).items():
            if len(echoers) >= self.quorum and digest in self.bodies:
                return self.bodies[digest]
        return None

    def _try_deliver(self, key: Key) -> None:
        if key in self.dag:
            return
        msg = self._ready(key)
        if msg is None:
            return
        if any(ref not in self.dag for ref in msg.refs):
            self.waiting.add(key)
            return
        self._deliver(msg)
        progress = True
        while progress and self.waiting:
            progress = False
            for k in sorted(self.waiting):
                m = self._ready(k)
                if m is not None and all(ref in self.dag for ref in m.refs):
                    self.waiting.discard(k)
                    self._deliver(m)
                    progress = True

    def _deliver(self, msg: DagMessage) -> None:
        self.waiting.discard(msg.key)
        self.parked.pop(msg.key, None)
        self.dag.add(msg)
        self.delivered_digest[msg.key] = msg.digest
        self.deliver_ticks[msg.key] = self.host.now
        self.host.set_timer(self.vid, self.host.now + self.forward_delay, ("forward", msg.key))
        self.on_deliver(msg)

    def on_forward_timer(self, key: Key) -> None:
        digest = self.delivered_digest[key]
        echoers = self.echoes[key][digest]
        if len(echoers) >= self.n:
            return  # every validator echoed it, so every honest one will deliver unaided
        cert = tuple(echoers[i] for i in sorted(echoers)[: self.quorum])
        fwd = CertifiedMessage(self.dag.get(key), cert)
        for dst in range(self.n):
            if dst != self.vid:
                self.host.send(self.vid, dst, "dag", fwd)

    def causal_past(self, key: Key) -> list[DagMessage]:
        return self.dag.causal_past(key)


def decode_message(data: bytes, codec: Codec) -> DagMessage:
    try:
        return DagMessage.decode(data, codec)
    except (ValueError, IndexError, UnicodeDecodeError) as exc:
        raise DecodeError(str(exc)) from exc
