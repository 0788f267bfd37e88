"""Consensus rules evaluated on hand-built DAGs delivered to one observing validator."""

import random

import pytest

from fino import commit_reveal as cr
from fino.consensus import Timing, Validator, leader
from fino.dag import CertifiedMessage, DagMessage, Echo
from fino.payloads import Complaint, Proposal, ShareReveal, TxBatch, Vote
from fino.signing import KeyRegistry

TIMING = Timing(view_timer=90, cadence=15, reveal_timeout=30, batch_timeout=60, forward_delay=20)


class RecordingHost:
    def __init__(self):
        self.now = 0
        self.sent = []
        self.timers = []

    def send(self, src, dst, kind, obj):
        self.sent.append((src, dst, kind, obj))

    def set_timer(self, vid, at, key):
        self.timers.append((vid, at, key))


class Scene:
    """Messages from validators 0..2 delivered straight into validator 3's DAG."""

    def __init__(self, scheme="avidm", observer_id=3):
        self.ctx = cr.CryptoContext.setup(4, 1, seed=5)
        self.signer = KeyRegistry(5)
        self.host = RecordingHost()
        self.v = Validator(observer_id, self.ctx, TIMING, self.host, self.signer)
        self.v.start()
        self.seq = {}
        self.scheme = scheme
        self.rng = random.Random(0)
        self.bundles = {}

    def post(self, sender, payloads, after=()):
        seq = self.seq.get(sender, -1) + 1
        self.seq[sender] = seq
        refs = set(after)
        if seq:
            refs.add((sender, seq - 1))
        msg = DagMessage.create(sender, seq, sorted(refs), payloads, self.ctx, self.signer)
        cert = tuple(Echo.create(i, msg, self.signer) for i in range(3))
        self.v.receive(CertifiedMessage(msg, cert))
        assert msg.key in self.v.dag
        return msg.key

    def tx(self, i):
        bundle = cr.client_disperse(self.ctx, f"tx{i}".encode(), self.scheme, f"client-{i}", self.rng)
        self.bundles[bundle.tx.tx_id] = bundle
        return bundle

    def reveal(self, bundle, vid, after=()):
        rs = cr.honest_reveals(self.ctx, bundle, "sss")[vid]
        return self.post(vid, [ShareReveal(rs)], after)

    def queued(self, kind):
        return [p for p in self.v.pending if isinstance(p, kind)] + [
            p for _, dst, k, m in self.host.sent if k == "dag" and dst == self.v.vid
            for p in getattr(m, "payloads", ()) if isinstance(p, kind)]


class TestProposalValidity:
    def test_leader_rotation(self):
        assert [leader(r, 4) for r in range(6)] == [0, 1, 2, 3, 0, 1]

    def test_view_zero_exempt(self):
        s = Scene()
        s.post(0, [Proposal(0)])
        assert s.v.valid_proposal[0]

    def test_non_leader_ignored(self):
        s = Scene()
        s.post(1, [Proposal(0)])
        assert 0 not in s.v.proposals

    def test_justified_by_votes(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        v1 = s.post(1, [Vote(0)], [p0])
        v2 = s.post(2, [Vote(0)], [p0])
        s.post(1, [Proposal(1)], [v1, v2])
        assert s.v.valid_proposal[1]

    def test_one_vote_is_not_enough(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        v2 = s.post(2, [Vote(0)], [p0])
        s.post(1, [Proposal(1)], [v2, p0])
        assert not s.v.valid_proposal[1]

    def test_f_complaints_short_of_quorum(self):
        s = Scene()
        c = s.post(2, [Complaint(0)])
        s.post(1, [Proposal(1)], [c])
        assert not s.v.valid_proposal[1]

    def test_justified_by_complaints(self):
        s = Scene()
        cs = [s.post(i, [Complaint(0)]) for i in (0, 2)]
        cs.append(s.post(1, [Complaint(0)], cs))
        s.post(1, [Proposal(1)], cs)
        assert s.v.valid_proposal[1]

    def test_only_first_proposal_counts(self):
        s = Scene()
        first = s.post(0, [Proposal(0)])
        s.post(0, [Proposal(0)])
        assert s.v.proposals[0] == first


class TestVotes:
    def test_vote_needs_proposal_in_past(self):
        s = Scene()
        s.post(0, [Proposal(0)])
        s.post(1, [Vote(0)])
        assert 0 not in s.v.votes

    def test_vote_after_proposal_counts(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        s.post(1, [Vote(0)], [p0])
        assert list(s.v.votes[0]) == [1]

    def test_vote_after_own_complaint_invalid(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        s.post(1, [Complaint(0)], [p0])
        s.post(1, [Vote(0)])
        assert 1 not in s.v.votes.get(0, {})

    def test_vote_and_complaint_in_one_message_invalid(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        s.post(1, [Vote(0), Complaint(0)], [p0])
        assert 1 not in s.v.votes.get(0, {})

    def test_other_validators_complaint_does_not_matter(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        c = s.post(2, [Complaint(0)], [p0])
        s.post(1, [Vote(0)], [c])
        assert 1 in s.v.votes[0]

    def test_observer_votes_once_on_valid_proposal(self):
        s = Scene()
        s.post(0, [Proposal(0)])
        s.post(0, [Proposal(0)])
        assert len(s.queued(Vote)) == 1


class TestCommit:
    def test_two_votes_commit(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        s.post(1, [Vote(0)], [p0])
        assert 0 not in s.v.committed_views
        s.post(2, [Vote(0)], [p0])
        assert 0 in s.v.committed_views and s.v.ordered_views == [0]

    def test_vote_after_complaint_does_not_commit(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        s.post(1, [Complaint(0)], [p0])
        s.post(1, [Vote(0)])
        s.post(2, [Vote(0)], [p0])
        assert 0 not in s.v.committed_views

    def test_indirect_commit_orders_earlier_proposal_first(self):
        s = Scene()
        t0, t1, t2 = s.tx(0), s.tx(1), s.tx(2)
        p0 = s.post(0, [Proposal(0), TxBatch((t0.tx,))])
        v = [s.post(i, [Vote(0)], [p0]) for i in (1, 2)]
        assert s.v.ordered_views == [0]
        p1 = s.post(1, [Proposal(1), TxBatch((t1.tx,))], v)
        # nobody votes for proposal(1); view 1 times out
        cs = [s.post(i, [Complaint(1)], [p1]) for i in (0, 2)]
        cs.append(s.post(1, [Complaint(1)], cs))
        p2 = s.post(2, [Proposal(2), TxBatch((t2.tx,))], cs)
        assert s.v.valid_proposal[2] and 1 not in s.v.committed_views
        s.post(0, [Vote(2)], [p2])
        s.post(1, [Vote(2)], [p2])
        assert 2 in s.v.committed_views
        assert s.v.ordered_views == [0, 1, 2]
        assert s.v.committed == [t0.tx.tx_id, t1.tx.tx_id, t2.tx.tx_id]

    def test_commit_idempotent(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        for i in (1, 2, 0):
            s.post(i, [Vote(0)], [p0])
        assert s.v.ordered_views == [0]

    def test_identical_dags_identical_sequences(self):
        seqs = []
        for _ in range(2):
            s = Scene()
            txs = [s.tx(i) for i in range(4)]
            a = s.post(1, [TxBatch((txs[0].tx, txs[1].tx))])
            b = s.post(2, [TxBatch((txs[2].tx,))])
            p0 = s.post(0, [Proposal(0), TxBatch((txs[3].tx,))], [a, b])
            for i in (1, 2):
                s.post(i, [Vote(0)], [p0])
            seqs.append(s.v.committed)
        assert seqs[0] == seqs[1] and len(seqs[0]) == 4


class TestRevealAndViewGate:
    def committed_view0(self, scheme="avidm"):
        s = Scene(scheme)
        t = s.tx(0)
        s.v.on_client_envelope(t.tx, t.envelopes.get(3))
        p0 = s.post(0, [Proposal(0), TxBatch((t.tx,))])
        votes = [s.post(i, [Vote(0)], [p0]) for i in (1, 2)]
        return s, t, votes

    def test_commit_queues_own_share(self):
        s, t, _ = self.committed_view0()
        reveals = s.queued(ShareReveal)
        assert [r.share.revealer for r in reveals] == [3]

    def test_no_duplicate_reveal(self):
        s, t, _ = self.committed_view0()
        s.v._reveal(t.tx.tx_id)
        assert len(s.queued(ShareReveal)) == 1

    def test_hybrid_without_envelope_reveals_tde(self):
        s = Scene("hybrid")
        t = s.tx(0)
        s.v.on_client_envelope(t.tx, None)
        p0 = s.post(0, [Proposal(0), TxBatch((t.tx,))])
        for i in (1, 2):
            s.post(i, [Vote(0)], [p0])
        reveals = s.queued(ShareReveal)
        assert len(reveals) == 1 and reveals[0].share.kind == "tde"

    def test_view_b_blocks_until_f_plus_one_shares(self):
        s, t, votes = self.committed_view0()
        assert s.v.view_a(0) and not s.v.view_b()
        assert s.v.view == 0
        s.reveal(t, 1, votes)
        assert s.v.view == 0, "F shares must not open the gate"
        s.reveal(t, 2, votes)
        assert s.v.view_b() and s.v.view == 1

    def test_invalid_shares_do_not_open_gate(self):
        s, t, votes = self.committed_view0()
        for vid in (1, 2):
            rs = cr.honest_reveals(s.ctx, t, "sss")[vid]
            env = rs.envelope
            bad = cr.RevealedShare(rs.tx_id, vid, envelope=cr.Envelope(
                type(env.share)(env.share.validator_id, env.share.x, env.share.y + 1), env.proof))
            s.post(vid, [ShareReveal(bad)], votes)
        assert s.v.view == 0

    def test_complaints_and_nothing_committed_enter(self):
        s = Scene()
        for i in (0, 1, 2):
            s.post(i, [Complaint(0)])
        assert s.v.view == 1

    def test_opening_waits_for_next_commit(self):
        s, t, votes = self.committed_view0()
        r = [s.reveal(t, i, votes) for i in (1, 2)]
        assert s.v.opened == []
        p1 = s.post(1, [Proposal(1)], votes + r)
        for i in (0, 2):
            s.post(i, [Vote(1)], [p1])
        assert [o.plaintext for o in s.v.opened] == [b"tx0"]


class TestComplaints:
    def test_timer_complains_once(self):
        s = Scene()
        s.v.on_timer(("view", 0))
        s.v.on_timer(("view", 0))
        assert len(s.queued(Complaint)) == 1 and s.v.complained == {0}

    def test_no_complaint_when_view_ordered(self):
        s = Scene()
        p0 = s.post(0, [Proposal(0)])
        for i in (1, 2):
            s.post(i, [Vote(0)], [p0])
        s.v.on_timer(("view", 0))
        assert s.queued(Complaint) == []

    def test_stale_timer_ignored(self):
        s = Scene()
        for i in (0, 1, 2):
            s.post(i, [Complaint(0)])
        s.v.on_timer(("view", 0))
        assert s.v.complained == set()

    def test_no_vote_after_own_complaint(self):
        s = Scene()
        s.v.on_timer(("view", 0))
        s.post(0, [Proposal(0)])
        assert s.queued(Vote) == []

    def test_view_timer_armed_on_entry(self):
        s = Scene()
        assert (3, TIMING.view_timer, ("view", 0)) in s.host.timers
