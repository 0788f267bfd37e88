"""
View-based consensus computed locally from the DAG.

A validator never sends a consensus message of its own kind: proposals,
votes, complaints and revealed shares are payloads of ordinary DAG
messages. Everything a validator decides follows from the messages it has
delivered, and the validity of a proposal or vote depends only on that
message's causal past, so every validator reaches the same verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import commit_reveal as cr
from .dag import DagMessage, DagTransport, Host, Key
from .errors import InvalidCiphertext
from .payloads import Complaint, Payload, Proposal, ShareReveal, TxBatch, Vote
from .signing import Signer


@dataclass(frozen=True)
class Timing:
    """Protocol timers in ticks."""

    view_timer: int
    cadence: int
    reveal_timeout: int
    batch_timeout: int
    forward_delay: int


class Observer:
    """Hooks for monitors and metrics; every method is a no-op here."""

    def on_deliver(self, v: "Validator", msg: DagMessage) -> None: ...

    def on_view_enter(self, v: "Validator", view: int, gate_ok: bool) -> None: ...

    def on_proposal_sent(self, v: "Validator", view: int, msg: DagMessage) -> None: ...

    def on_valid_proposal(self, v: "Validator", view: int, key: Key) -> None: ...

    def on_commit(self, v: "Validator", view: int, key: Key) -> None: ...

    def on_order(self, v: "Validator", view: int, tx_ids: Sequence[bytes]) -> None: ...

    def on_open(self, v: "Validator", outcome: cr.OpenOutcome) -> None: ...

    def on_complaint(self, v: "Validator", view: int) -> None: ...

    def on_shares_ready(self, v: "Validator", tx_id: bytes) -> None: ...


def leader(view: int, n: int) -> int:
    return view % n


class Validator:
    """An honest validator. Adversarial behaviours subclass this."""

    honest = True

    def __init__(self, vid: int, ctx: cr.CryptoContext, timing: Timing, host: Host, signer: Signer,
                 observer: Observer | None = None):
        self.vid = vid
        self.ctx = ctx
        self.n, self.f = ctx.n, ctx.f
        self.timing = timing
        self.host = host
        self.observer = observer or Observer()
        self.transport = DagTransport(vid, ctx.n, ctx.f, ctx, signer, host, available=self._available,
                                      on_deliver=self._on_deliver, forward_delay=timing.forward_delay)
        self.dag = self.transport.dag
        self.halted = False   # crashed validators stop doing anything
        self.quiet = False    # drain mode: keep delivering, stop creating messages

        # transactions
        self.txs: dict[bytes, cr.Transaction] = {}
        self.envelopes: dict[bytes, cr.Envelope] = {}
        self.acked: set[bytes] = set()
        self._tx_ok: dict[bytes, bool] = {}
        self.pending_batch: list[bytes] = []
        self.in_dag: set[bytes] = set()
        self.pending: list[Payload] = []

        # consensus state derived from the DAG
        self.view = 0
        self.view_entered: dict[int, int] = {}
        self.proposals: dict[int, Key] = {}
        self.valid_proposal: dict[int, bool] = {}
        self.votes: dict[int, dict[int, Key]] = {}
        self.complaints: dict[int, dict[int, int]] = {}
        self.voted: set[int] = set()
        self.complained: set[int] = set()
        self.committed_views: dict[int, int] = {}
        self.ordered_views: list[int] = []
        self.ordered_clock = [-1] * self.n
        self.eligible_clock = [-1] * self.n

        # committed sequence and retrieval
        self.committed: list[bytes] = []
        self.commit_msg: dict[bytes, Key] = {}
        self.retrievals: dict[bytes, cr.Retrieval] = {}
        self.stray_reveals: dict[bytes, list[cr.RevealedShare]] = {}
        self.revealed: dict[bytes, set[str]] = {}
        self.opened: list[cr.OpenOutcome] = []
        self._ready_reported: set[bytes] = set()

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self._enter_view(0)
        self.host.set_timer(self.vid, self.host.now + self.timing.cadence, ("cadence",))
        self._flush()

    def on_timer(self, key: tuple) -> None:
        if self.halted:
            return
        kind = key[0]
        if kind == "forward":
            self.transport.on_forward_timer(key[1])
            return
        if self.quiet:
            return
        if kind == "cadence":
            if self.pending_batch or self.pending:
                self._broadcast()
            self.host.set_timer(self.vid, self.host.now + self.timing.cadence, ("cadence",))
        elif kind == "view":
            self._on_view_timer(key[1])
        elif kind == "batch":
            tx_id = key[1]
            if tx_id not in self.in_dag and tx_id not in self.pending_batch:
                self.pending_batch.append(tx_id)
        elif kind == "slow":
            self._on_slow_timer(key[1])
        self._flush()

    def receive(self, obj) -> None:
        if self.halted:
            return
        self.transport.receive(obj)
        self._flush()

    # -- client side -----------------------------------------------------------

    def on_client_envelope(self, tx: cr.Transaction, envelope: cr.Envelope | None) -> cr.Ack:
        if self.halted:
            return cr.Ack.DROP
        result = cr.on_receive_envelope(self.ctx, self.vid, tx, envelope)
        if result is cr.Ack.ACK:
            self.txs.setdefault(tx.tx_id, tx)
            self.acked.add(tx.tx_id)
            if envelope is not None:
                self.envelopes[tx.tx_id] = envelope
            self.transport.recheck_parked()
            if tx.tx_id in self.retrievals:
                self._reveal(tx.tx_id)
            self._flush()
        return result

    def on_dispersal_complete(self, tx: cr.Transaction) -> None:
        """The client collected N-F acks; the home validator batches it, others stand by."""
        if self.halted:
            return
        self.txs.setdefault(tx.tx_id, tx)
        if tx.tx_id in self.in_dag:
            return
        home = int.from_bytes(tx.tx_id[:4], "big") % self.n
        if home == self.vid:
            self.pending_batch.append(tx.tx_id)
        else:
            self.host.set_timer(self.vid, self.host.now + self.timing.batch_timeout, ("batch", tx.tx_id))

    def _tx_available(self, tx: cr.Transaction) -> bool:
        if tx.tx_id in self.acked:
            return True
        if tx.scheme is cr.Scheme.AVIDM:
            return False
        ok = self._tx_ok.get(tx.tx_id)
        if ok is None:
            ok = cr.on_receive_envelope(self.ctx, self.vid, tx, None) is cr.Ack.ACK
            self._tx_ok[tx.tx_id] = ok
        return ok

    def _available(self, msg: DagMessage) -> bool:
        for p in msg.payloads:
            if isinstance(p, TxBatch) and not all(self._tx_available(tx) for tx in p.txs):
                return False
        return True

    # -- broadcasting ------------------------------------------------------------

    def _queue(self, payload: Payload) -> None:
        self.pending.append(payload)

    def _take_batch(self) -> list[Payload]:
        txs = [self.txs[t] for t in self.pending_batch if t not in self.in_dag]
        self.pending_batch = []
        return [TxBatch(tuple(txs))] if txs else []

    def _broadcast(self) -> DagMessage:
        payloads = self.pending + self._take_batch()
        self.pending = []
        msg = self.transport.broadcast(payloads)
        for p in payloads:
            if isinstance(p, Proposal):
                self.observer.on_proposal_sent(self, p.view, msg)
        return msg

    def _flush(self) -> None:
        """Consensus payloads go out immediately; transactions wait for the cadence."""
        if self.pending and not self.quiet and not self.halted:
            self._broadcast()

    # -- delivery --------------------------------------------------------------

    def _on_deliver(self, msg: DagMessage) -> None:
        self.observer.on_deliver(self, msg)
        touched: set[int] = set()
        # complaints first: a vote sharing a message with its author's complaint is not valid
        for p in msg.payloads:
            if isinstance(p, Complaint):
                self.complaints.setdefault(p.view, {}).setdefault(msg.sender, msg.seq)
                touched.add(p.view)
        for p in msg.payloads:
            if isinstance(p, TxBatch):
                for tx in p.txs:
                    self.txs.setdefault(tx.tx_id, tx)
                    self.in_dag.add(tx.tx_id)
            elif isinstance(p, Proposal):
                self._on_proposal(msg, p.view)
                touched.add(p.view)
            elif isinstance(p, Vote):
                if self._vote_valid(msg, p.view):
                    self.votes.setdefault(p.view, {}).setdefault(msg.sender, msg.key)
                    touched.add(p.view)
            elif isinstance(p, ShareReveal):
                self._on_reveal(p.share)
        for view in sorted(touched):
            self._try_commit(view)
        self._check_view_change()
        self._advance_open()

    def _on_proposal(self, msg: DagMessage, view: int) -> None:
        if msg.sender != leader(view, self.n) or view in self.proposals:
            return
        self.proposals[view] = msg.key
        valid = self.justified(msg.key, view)
        self.valid_proposal[view] = valid
        if valid:
            self.observer.on_valid_proposal(self, view, msg.key)
            self._maybe_vote(view)

    def justified(self, key: Key, view: int) -> bool:
        """Whether the past of ``key`` justifies entering ``view``."""
        if view == 0:
            return True
        prev = view - 1
        votes = sum(1 for k in self.votes.get(prev, {}).values() if self.dag.in_past(k, key))
        if votes >= self.f + 1:
            return True
        complaints = sum(1 for s, q in self.complaints.get(prev, {}).items() if self.dag.in_past((s, q), key))
        return complaints >= 2 * self.f + 1

    def _vote_valid(self, msg: DagMessage, view: int) -> bool:
        pkey = self.proposals.get(view)
        if pkey is None or not self.valid_proposal.get(view) or not self.dag.in_past(pkey, msg.key):
            return False
        complained_at = self.complaints.get(view, {}).get(msg.sender)
        return complained_at is None or complained_at > msg.seq

    def _maybe_vote(self, view: int) -> None:
        if view < self.view or view in self.voted or view in self.complained or self.quiet:
            return
        self.voted.add(view)
        self._queue(Vote(view))

    # -- committing and ordering -----------------------------------------------

    def _try_commit(self, view: int) -> None:
        if view in self.committed_views or not self.valid_proposal.get(view):
            return
        if len(self.votes.get(view, {})) < self.f + 1:
            return
        self.committed_views[view] = self.host.now
        pkey = self.proposals[view]
        self.observer.on_commit(self, view, pkey)
        self.order_commits(view)
        self._open_for(pkey, view)

    def _is_ordered(self, key: Key) -> bool:
        return key[1] <= self.ordered_clock[key[0]]

    def order_commits(self, view: int) -> list[bytes]:
        """Order the past of proposal(view), earlier proposals in its past first."""
        chain = []
        r, key = view, self.proposals[view]
        while not self._is_ordered(key):
            chain.append((r, key))
            below = [v for v in self.valid_proposal if v < r and self.valid_proposal[v]
                     and self.dag.in_past(self.proposals[v], key)]
            if not below:
                break
            r = max(below)
            key = self.proposals[r]
        appended: list[bytes] = []
        for r, key in reversed(chain):
            fresh = self.dag.linearize(self.dag.past_keys(key, self.ordered_clock))
            clock = self.dag.clock(key)
            self.ordered_clock = [max(a, b) for a, b in zip(self.ordered_clock, clock)]
            self.ordered_views.append(r)
            segment = []
            for mkey in fresh:
                for p in self.dag.get(mkey).payloads:
                    if isinstance(p, TxBatch):
                        for tx in p.txs:
                            if tx.tx_id not in self.commit_msg:
                                self.commit_msg[tx.tx_id] = mkey
                                self.committed.append(tx.tx_id)
                                segment.append(tx.tx_id)
            for tx_id in segment:
                self._start_retrieval(tx_id)
            self.observer.on_order(self, r, segment)
            appended += segment
        return appended

    # -- revealing and retrieval -------------------------------------------------

    def _start_retrieval(self, tx_id: bytes) -> None:
        retrieval = cr.Retrieval(self.ctx, self.txs[tx_id])
        self.retrievals[tx_id] = retrieval
        for rs in self.stray_reveals.pop(tx_id, []):
            retrieval.add(rs)
        self._reveal(tx_id)
        if retrieval.tx.scheme is cr.Scheme.HYBRID and not self.quiet:
            self.host.set_timer(self.vid, self.host.now + self.timing.reveal_timeout, ("slow", tx_id))
        self._note_ready(tx_id)

    def share_for(self, tx_id: bytes, kind: str) -> cr.RevealedShare | None:
        """This validator's share of ``kind`` for a committed tx, if it holds one."""
        tx = self.txs[tx_id]
        if kind == "sss":
            env = self.envelopes.get(tx_id)
            return cr.reveal_sss(tx, self.vid, env) if env is not None else None
        if not tx.scheme.uses_tde:
            return None
        try:
            return cr.reveal_tde(self.ctx, tx, self.vid)
        except InvalidCiphertext:
            return None

    def _reveal(self, tx_id: bytes, slow: bool = False) -> None:
        if self.quiet:
            return
        tx = self.txs[tx_id]
        kinds = []
        if tx.scheme is cr.Scheme.AVIDM:
            kinds = ["sss"]
        elif tx.scheme is cr.Scheme.THRESHOLD:
            kinds = ["tde"]
        else:
            kinds = ["sss"] if tx_id in self.envelopes else ["tde"]
            if slow:
                kinds = ["tde"]
        done = self.revealed.setdefault(tx_id, set())
        for kind in kinds:
            if kind in done:
                continue
            share = self.share_for(tx_id, kind)
            if share is not None:
                done.add(kind)
                self._queue(ShareReveal(share))

    def _on_slow_timer(self, tx_id: bytes) -> None:
        retrieval = self.retrievals.get(tx_id)
        if retrieval is None or retrieval.outcome() is not None:
            return
        valid_sss, _ = retrieval.valid_counts()
        if cr.hybrid_track_select(valid_sss, self.ctx.k, timeout_elapsed=True) is cr.Track.SLOW_TDE:
            self._reveal(tx_id, slow=True)

    def _on_reveal(self, rs: cr.RevealedShare) -> None:
        retrieval = self.retrievals.get(rs.tx_id)
        if retrieval is None:
            self.stray_reveals.setdefault(rs.tx_id, []).append(rs)
            return
        retrieval.add(rs)
        self._note_ready(rs.tx_id)

    def _note_ready(self, tx_id: bytes) -> None:
        if tx_id not in self._ready_reported and self.retrievals[tx_id].ready():
            self._ready_reported.add(tx_id)
            self.observer.on_shares_ready(self, tx_id)

    # -- opening -----------------------------------------------------------------

    def _open_for(self, pkey: Key, view: int) -> None:
        """On commit of proposal(view), open everything in the past of proposal(c)."""
        for c in sorted((v for v in self.valid_proposal if v < view and self.valid_proposal[v]), reverse=True):
            ckey = self.proposals[c]
            if self.eligible_clock[ckey[0]] >= ckey[1]:
                break  # already opened up to here
            votes = sum(1 for k in self.votes.get(c, {}).values() if self.dag.in_past(k, pkey))
            if votes >= self.f + 1:
                clock = self.dag.clock(ckey)
                self.eligible_clock = [max(a, b) for a, b in zip(self.eligible_clock, clock)]
                break

    def _advance_open(self) -> None:
        while len(self.opened) < len(self.committed):
            tx_id = self.committed[len(self.opened)]
            mkey = self.commit_msg[tx_id]
            if mkey[1] > self.eligible_clock[mkey[0]]:
                return
            outcome = self.retrievals[tx_id].outcome()
            if outcome is None:
                return
            self.opened.append(outcome)
            self.observer.on_open(self, outcome)

    # -- views -------------------------------------------------------------------

    def view_a(self, view: int) -> bool:
        votes = len(self.votes.get(view, {})) if self.valid_proposal.get(view) else 0
        return votes >= self.f + 1 or len(self.complaints.get(view, {})) >= 2 * self.f + 1

    def view_b(self) -> bool:
        return all(self.retrievals[t].ready() for t in self.committed)

    def check_view_change(self) -> bool:
        """Whether both view-change gates hold for the current view."""
        return self.view_a(self.view) and self.view_b()

    def _check_view_change(self) -> None:
        if self.halted:
            return
        while self.check_view_change():
            self._enter_view(self.view + 1)

    def _enter_view(self, view: int) -> None:
        self.view = view
        self.view_entered[view] = self.host.now
        self.observer.on_view_enter(self, view, self.view_b())
        if not self.quiet:
            self.host.set_timer(self.vid, self.host.now + self.timing.view_timer, ("view", view))
            if leader(view, self.n) == self.vid:
                self.propose(view)
        if view in self.valid_proposal and self.valid_proposal[view]:
            self._maybe_vote(view)

    def propose(self, view: int) -> None:
        self._queue(Proposal(view))

    def _on_view_timer(self, view: int) -> None:
        if self.view != view or view in self.complained:
            return
        pkey = self.proposals.get(view)
        if pkey is not None and self._is_ordered(pkey):
            return
        self.complain(view)

    def complain(self, view: int) -> None:
        self.complained.add(view)
        self.observer.on_complaint(self, view)
        self._queue(Complaint(view))

    # -- queries -------------------------------------------------------------------

    def outcomes(self) -> list[tuple[str, str]]:
        return [(o.tx_id.hex(), "opened" if o.opened else "rejected") for o in self.opened]
