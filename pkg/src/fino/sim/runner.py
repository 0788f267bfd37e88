"""
Deterministic discrete-event simulation of a full run.

Everything random is drawn from streams seeded by ``config.seed``, and
events at the same tick run in the order they were scheduled, so a
(config, adversary) pair always produces the same report.
"""

from __future__ import annotations

import heapq
import itertools
import random
from fractions import Fraction

from .. import commit_reveal as cr
from ..consensus import Timing, Validator
from ..dag import CertifiedMessage, DagMessage
from ..signing import KeyRegistry
from .adversary import Adversary, EquivocatingValidator, build_validator
from .config import Config
from .monitors import Monitors
from .network import CLIENT, Network
from .report import RunReport


class Simulation:
    def __init__(self, config: Config, adversary: Adversary | None = None, fault: str | None = None):
        self.config = config.resolved()
        self.adversary = adversary or Adversary()
        self.adversary.validate(self.config)
        c = self.config
        self.byzantine = self.adversary.byzantine(c.n)

        self.now = 0
        self._queue: list = []
        self._counter = itertools.count()
        self.net_rng = random.Random(f"fino-net/{c.seed}")
        self.client_rng = random.Random(f"fino-client/{c.seed}")
        adv_rng = random.Random(f"fino-adversary/{c.seed}")
        partition = self.adversary.partition if self.adversary.kind == "partition_until_gst" else None
        self.network = Network(c, self.net_rng, partition)

        self.ctx = cr.CryptoContext.setup(c.n, c.f, c.field, c.group, seed=c.seed)
        signer = KeyRegistry(c.seed)
        timing = Timing(c.view_timer, c.cadence, c.reveal_timeout, c.batch_timeout, forward_delay=2 * c.delta)
        self.monitors = Monitors(c.n, self.byzantine, fault)
        self.validators: list[Validator] = [
            build_validator(vid, self.adversary, c, adv_rng, ctx=self.ctx, timing=timing, host=self,
                            signer=signer, observer=self.monitors)
            for vid in range(c.n)
        ]

        self.counts = {"dag": 0, "echo": 0}
        self.forwards = 0
        self.client_events = 0
        self.broadcast_tick: dict = {}

        # client-side dispersal state
        self.bundles: list[cr.DispersalBundle] = []
        self.acks: list[set[int]] = []
        self.dispersed: list[bool] = []
        self.failed: list[bool] = []
        self.send_ticks: list[int] = []
        self.draining = False
        self.stop_reason = "horizon"

    # -- Host interface -------------------------------------------------------

    def _push(self, tick: int, kind: str, data) -> None:
        heapq.heappush(self._queue, (tick, next(self._counter), kind, data))

    def send(self, src: int, dst: int, kind: str, obj) -> None:
        if src == dst:
            if kind == "dag" and isinstance(obj, DagMessage):
                self.broadcast_tick.setdefault(obj.key, self.now)
        else:
            self.counts[kind] = self.counts.get(kind, 0) + 1
            if isinstance(obj, CertifiedMessage):
                self.forwards += 1
        self._push(self.network.deliver_time(src, dst, self.now), "net", (dst, obj))

    def set_timer(self, vid: int, at: int, key: tuple) -> None:
        self._push(at, "timer", (vid, key))

    # -- clients ----------------------------------------------------------------

    def _schedule_clients(self) -> None:
        c = self.config
        ticks = sorted(self.client_rng.randint(0, c.submit_window) for _ in range(c.tx_load))
        for i, tick in enumerate(ticks):
            self._push(tick, "client_send", i)

    def _client_send(self, i: int) -> None:
        c = self.config
        dealer = f"client-{i}"
        plaintext = f"tx {i} seed {c.seed}: ".encode() + self.client_rng.randbytes(24)
        mode = None
        recipients = list(range(c.n))
        if self.adversary.is_malicious_tx(i):
            if self.adversary.dealer_mode == "skip_envelopes":
                self.client_rng.shuffle(recipients)
                recipients = sorted(recipients[: c.n - c.f])
            else:
                mode = self.adversary.dealer_mode
        bundle = cr.client_disperse(self.ctx, plaintext, c.scheme, dealer, self.client_rng, malicious=mode)
        self.bundles.append(bundle)
        self.acks.append(set())
        self.dispersed.append(False)
        self.failed.append(False)
        self.send_ticks.append(self.now)
        idx = len(self.bundles) - 1
        for vid in recipients:
            self.client_events += 1
            self._push(self.network.deliver_time(CLIENT, vid, self.now), "envelope",
                       (idx, vid, bundle.envelopes.get(vid)))
        self._push(self.now + c.dispersal_timeout, "dispersal_deadline", idx)

    def _on_envelope(self, idx: int, vid: int, envelope) -> None:
        tx = self.bundles[idx].tx
        if self.validators[vid].on_client_envelope(tx, envelope) is cr.Ack.ACK:
            self.client_events += 1
            self._push(self.network.deliver_time(vid, CLIENT, self.now), "ack", (idx, vid))

    def _on_ack(self, idx: int, vid: int) -> None:
        self.acks[idx].add(vid)
        c = self.config
        if not self.dispersed[idx] and not self.failed[idx] and cr.disperse_complete(self.acks[idx], c.n, c.f):
            self.dispersed[idx] = True
            self.monitors.changed = True
            for dst in range(c.n):
                self.client_events += 1
                self._push(self.network.deliver_time(CLIENT, dst, self.now), "submit", (idx, dst))

    # -- main loop --------------------------------------------------------------

    def _dispatch(self, kind: str, data) -> None:
        if kind == "net":
            dst, obj = data
            self.validators[dst].receive(obj)
        elif kind == "timer":
            vid, key = data
            self.validators[vid].on_timer(key)
        elif kind == "envelope":
            self._on_envelope(*data)
        elif kind == "ack":
            self._on_ack(*data)
        elif kind == "submit":
            idx, dst = data
            self.validators[dst].on_dispersal_complete(self.bundles[idx].tx)
        elif kind == "client_send":
            if not self.draining:
                self._client_send(data)
        elif kind == "dispersal_deadline":
            if not self.dispersed[data]:
                self.failed[data] = True
                self.monitors.changed = True
        elif kind == "start":
            for v in self.validators:
                v.start()

    def _honest(self) -> list[Validator]:
        return [v for v in self.validators if v.honest and v.vid not in self.byzantine]

    def _resolved(self) -> bool:
        c = self.config
        if len(self.bundles) < c.tx_load:
            return False
        if not all(d or f for d, f in zip(self.dispersed, self.failed)):
            return False
        target = sum(self.dispersed)
        if any(len(v.opened) < target for v in self._honest()):
            return False
        return self.monitors.liveness_ok(self.validators, c.gst)

    def _drain(self) -> None:
        self.draining = True
        for v in self.validators:
            v.quiet = True

    def run(self) -> RunReport:
        c = self.config
        self._push(0, "start", None)
        self._schedule_clients()
        while self._queue:
            tick, _, kind, data = heapq.heappop(self._queue)
            if tick > c.horizon and not self.draining:
                self._drain()
            self.now = tick
            self._dispatch(kind, data)
            if not self.draining and self.monitors.changed:
                self.monitors.changed = False
                if self._resolved():
                    self.stop_reason = "resolved"
                    self._drain()
        return self._report()

    # -- metrics and report -------------------------------------------------------

    def _round_ticks(self) -> int:
        honest = self._honest()
        span = 0
        for key, sent in self.broadcast_tick.items():
            if key[0] in self.byzantine:
                continue
            ticks = [v.transport.deliver_ticks.get(key) for v in honest]
            if all(t is not None for t in ticks):
                span = max(span, max(ticks) - sent)
        return span

    def _latencies(self, round_ticks: int) -> tuple[dict, dict]:
        honest = {v.vid for v in self._honest()}
        m = self.monitors
        commit, shares = {}, {}
        if round_ticks <= 0:
            return commit, shares
        for view, by_vid in sorted(m.commit_ticks.items()):
            sent = m.proposal_sent.get(view)
            if sent is None or set(by_vid) != honest:
                continue
            committed_at = max(by_vid.values())
            commit[str(view)] = _ratio(committed_at - sent, round_ticks)
            txs = m.segments.get(view, [])
            ready = [m.ready_ticks.get(t, {}) for t in txs]
            if txs and all(set(r) == honest for r in ready):
                last = max(max(r.values()) for r in ready)
                shares[str(view)] = _ratio(max(0, last - committed_at), round_ticks)
        return commit, shares

    def _report(self) -> RunReport:
        c = self.config
        m = self.monitors
        m.check_justification()
        m.check_liveness(self.validators, c.gst)
        m.check_reliability(self.validators)
        m.check_taxonomy(self.counts)
        round_ticks = self._round_ticks()
        commit, shares = self._latencies(round_ticks)

        validators = []
        for v in self.validators:
            honest = v.honest and v.vid not in self.byzantine
            validators.append({
                "id": v.vid,
                "honest": honest,
                "halted": v.halted,
                "view": v.view,
                "committed": [t.hex() for t in v.committed],
                "opened": [[o.tx_id.hex(), "opened" if o.opened else "rejected"] for o in v.opened],
                "complaints": len(v.complained),
                "delivered": len(v.dag),
                "equivocations_seen": len(v.transport.equivocations),
            })
        honest_opened = next((v for v in self._honest()), None)
        outcomes = honest_opened.opened if honest_opened else []
        transactions = {
            "submitted": len(self.bundles),
            "dispersed": sum(self.dispersed),
            "unresolved_dispersals": [b.tx.tx_id.hex() for b, d in zip(self.bundles, self.dispersed) if not d],
            "opened": sum(1 for o in outcomes if o.opened),
            "rejected": sum(1 for o in outcomes if o.rejected),
            "malicious": [b.tx.tx_id.hex() for i, b in enumerate(self.bundles) if self.adversary.is_malicious_tx(i)],
        }
        attempts = sum(v.attempts for v in self.validators if isinstance(v, EquivocatingValidator))
        metrics = {
            "round_ticks": round_ticks,
            "commit_latency_rounds": commit,
            "share_latency_rounds": shares,
            "messages": dict(sorted(self.counts.items())),
            "forwards": self.forwards,
            "client_events": self.client_events,
            "equivocation_attempts": attempts,
            "complaints": sum(len(v.complained) for v in self._honest()),
        }
        return RunReport(
            config=c.to_dict(),
            adversary=self.adversary.describe(),
            end_tick=self.now,
            stop_reason=self.stop_reason,
            validators=validators,
            transactions=transactions,
            metrics=metrics,
            violations=dict(m.flags),
            violation_details={k: v for k, v in m.details.items() if v},
        )


def _ratio(ticks: int, round_ticks: int) -> float:
    return round(float(Fraction(ticks, round_ticks)), 6)


def run(config: Config, adversary: Adversary | None = None, fault: str | None = None) -> RunReport:
    """Simulate one run to completion and evaluate every monitor."""
    return Simulation(config, adversary, fault).run()
