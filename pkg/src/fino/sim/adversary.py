"""
Byzantine behaviours and the adversary description that selects them.

Faulty validators are subclasses of the honest ``Validator`` that override
one decision point each. A malicious dealer is a client, not a validator,
and does not count against F.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .. import commit_reveal as cr
from ..consensus import Validator, leader
from ..dag import DagMessage, Echo
from ..errors import ConfigInvalid
from ..payloads import Proposal, ShareReveal, TxBatch
from ..sss import Share
from ..tde import DecryptionShare
from .config import Config

KINDS = (
    "none",
    "crash_leader",
    "slow_leader",
    "equivocator",
    "share_withholder",
    "malicious_dealer",
    "partition_until_gst",
)

DEALER_MODES = ("off_polynomial", "bad_root", "split_brain_hybrid", "skip_envelopes")


@dataclass(frozen=True)
class Adversary:
    kind: str = "none"
    views: tuple[int, ...] = ()          # crash_leader / slow_leader
    validators: tuple[int, ...] = ()     # equivocator / share_withholder
    withhold_mode: str = "silent"        # silent | corrupt
    dealer_mode: str = "off_polynomial"
    dealer_every: int = 3                # every m-th transaction is dealt maliciously
    partition: tuple[int, ...] = ()      # one side of the pre-GST partition

    def byzantine(self, n: int) -> frozenset[int]:
        if self.kind in ("crash_leader", "slow_leader"):
            return frozenset(leader(v, n) for v in self.views)
        if self.kind in ("equivocator", "share_withholder"):
            return frozenset(self.validators)
        return frozenset()

    def validate(self, config: Config) -> None:
        if self.kind not in KINDS:
            raise ConfigInvalid(f"unknown adversary {self.kind!r}; choose from {KINDS}")
        bad = self.byzantine(config.n)
        if len(bad) > config.f:
            raise ConfigInvalid(f"{len(bad)} byzantine validators exceed F={config.f}")
        if any(not 0 <= v < config.n for v in self.validators + self.partition):
            raise ConfigInvalid("validator id out of range")
        if self.kind == "equivocator" and len(self.validators) != 1:
            raise ConfigInvalid("equivocator takes exactly one validator")
        if self.withhold_mode not in ("silent", "corrupt"):
            raise ConfigInvalid(f"unknown withhold mode {self.withhold_mode!r}")
        if self.kind == "malicious_dealer":
            if self.dealer_mode not in DEALER_MODES:
                raise ConfigInvalid(f"unknown dealer mode {self.dealer_mode!r}")
            if config.scheme == "threshold":
                raise ConfigInvalid("malicious dealings need a secret-sharing scheme")
            if self.dealer_mode == "split_brain_hybrid" and config.scheme != "hybrid":
                raise ConfigInvalid("split-brain dealing needs the hybrid scheme")
            if self.dealer_every < 1:
                raise ConfigInvalid("dealer_every must be positive")
        if self.kind == "partition_until_gst" and not 0 < len(self.partition) < config.n:
            raise ConfigInvalid("partition must be a proper non-empty subset")

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind in ("crash_leader", "slow_leader"):
            out["views"] = list(self.views)
        if self.kind in ("equivocator", "share_withholder"):
            out["validators"] = list(self.validators)
        if self.kind == "share_withholder":
            out["withhold_mode"] = self.withhold_mode
        if self.kind == "malicious_dealer":
            out["dealer_mode"] = self.dealer_mode
            out["dealer_every"] = self.dealer_every
        if self.kind == "partition_until_gst":
            out["partition"] = list(self.partition)
        return out

    def is_malicious_tx(self, index: int) -> bool:
        return self.kind == "malicious_dealer" and index % self.dealer_every == 0


def random_adversary(kind: str, config: Config, rng: random.Random) -> Adversary:
    """A seeded instance of ``kind`` within the model bounds of ``config``."""
    n, f = config.n, config.f
    if kind == "crash_leader":
        # crash the leaders of up to F early views, all distinct validators
        views = sorted(rng.sample(range(1, n + 1), f)) if f else []
        return Adversary(kind, views=tuple(views))
    if kind == "slow_leader":
        return Adversary(kind, views=(rng.randrange(1, n + 1),))
    if kind == "equivocator":
        return Adversary(kind, validators=(rng.randrange(n),))
    if kind == "share_withholder":
        vids = tuple(sorted(rng.sample(range(n), f)))
        return Adversary(kind, validators=vids, withhold_mode=rng.choice(("silent", "corrupt")))
    if kind == "malicious_dealer":
        modes = ["off_polynomial", "bad_root", "skip_envelopes"]
        if config.scheme == "hybrid":
            modes.append("split_brain_hybrid")
        return Adversary(kind, dealer_mode=rng.choice(modes), dealer_every=rng.randint(2, 4))
    if kind == "partition_until_gst":
        size = rng.randint(1, n - 1)
        return Adversary(kind, partition=tuple(sorted(rng.sample(range(n), size))))
    if kind == "none":
        return Adversary()
    raise ConfigInvalid(f"unknown adversary {kind!r}")


# -- faulty validators ---------------------------------------------------------

class CrashingValidator(Validator):
    """Crashes on entering any view it leads from ``crash_views``."""

    honest = False

    def __init__(self, *args, crash_views=(), **kwargs):
        super().__init__(*args, **kwargs)
        self.crash_views = frozenset(crash_views)

    def _enter_view(self, view: int) -> None:
        if view in self.crash_views:
            self.halted = True
            self.view = view
            return
        super()._enter_view(view)


class SlowLeaderValidator(Validator):
    """Holds its proposal until just before the other validators' timers expire.

    Honest validators complain first and so never vote; the late proposal
    still lands in the next leader's past and gets ordered indirectly.
    """

    honest = False

    def __init__(self, *args, slow_views=(), delay: int = 0, **kwargs):
        super().__init__(*args, **kwargs)
        self.slow_views = frozenset(slow_views)
        self.delay = delay

    def propose(self, view: int) -> None:
        if view in self.slow_views:
            self.host.set_timer(self.vid, self.host.now + self.delay, ("late_proposal", view))
        else:
            super().propose(view)

    def on_timer(self, key: tuple) -> None:
        if key[0] == "late_proposal" and not self.halted and not self.quiet:
            super().propose(key[1])
            self._flush()
            return
        super().on_timer(key)

    def _on_view_timer(self, view: int) -> None:
        if view not in self.slow_views:
            super()._on_view_timer(view)


class EquivocatingValidator(Validator):
    """Sends two versions of every message to two parts of the network and echoes both."""

    honest = False

    def __init__(self, *args, rng: random.Random | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.rng = rng or random.Random(0)
        self.attempts = 0

    def _broadcast(self) -> DagMessage:
        t = self.transport
        payloads = self.pending + self._take_batch()
        self.pending = []
        a = t.make_message(payloads)
        b = t.make_message(payloads + [TxBatch(())])
        t.next_seq += 1
        self.attempts += 1
        others = [v for v in range(self.n) if v != self.vid]
        self.rng.shuffle(others)
        cut = self.rng.randint(1, len(others) - 1) if len(others) > 1 else len(others)
        group_a = set(others[:cut])
        t.host.send(self.vid, self.vid, "dag", a)
        for dst in others:
            t.host.send(self.vid, dst, "dag", a if dst in group_a else b)
        echo_b = Echo.create(self.vid, b, t.signer)
        for dst in range(self.n):
            t.host.send(self.vid, dst, "echo", echo_b)
        for p in payloads:
            if isinstance(p, Proposal):
                self.observer.on_proposal_sent(self, p.view, a)
        return a


class WithholdingValidator(Validator):
    """Never reveals a correct share: stays silent or reveals a corrupted one."""

    honest = False

    def __init__(self, *args, mode: str = "silent", **kwargs):
        super().__init__(*args, **kwargs)
        self.mode = mode

    def _reveal(self, tx_id: bytes, slow: bool = False) -> None:
        if self.mode == "silent" or self.quiet:
            return
        done = self.revealed.setdefault(tx_id, set())
        for kind in ("sss", "tde"):
            if kind in done:
                continue
            share = self.share_for(tx_id, kind) if (kind == "tde" or tx_id in self.envelopes) else None
            if share is None:
                continue
            done.add(kind)
            self._queue(ShareReveal(corrupt(self.ctx, share)))


def corrupt(ctx: cr.CryptoContext, rs: cr.RevealedShare) -> cr.RevealedShare:
    """The same share with its value altered, so it fails verification."""
    if rs.envelope is not None:
        s = rs.envelope.share
        bad = cr.Envelope(Share(s.validator_id, s.x, s.y + 1), rs.envelope.proof)
        return replace(rs, envelope=bad)
    ds = rs.tde_share
    bad = DecryptionShare(ds.validator_id, ctx.group.mul(ds.u_i, ctx.group.g), ds.e_i, ds.f_i)
    return replace(rs, tde_share=bad)


def build_validator(vid: int, adversary: Adversary, config: Config, rng: random.Random, **kwargs) -> Validator:
    """The validator object for ``vid`` under ``adversary``."""
    if vid not in adversary.byzantine(config.n):
        return Validator(vid, **kwargs)
    if adversary.kind == "crash_leader":
        views = [v for v in adversary.views if leader(v, config.n) == vid]
        return CrashingValidator(vid, crash_views=views, **kwargs)
    if adversary.kind == "slow_leader":
        views = [v for v in adversary.views if leader(v, config.n) == vid]
        delay = max(0, config.view_timer - config.delta)
        return SlowLeaderValidator(vid, slow_views=views, delay=delay, **kwargs)
    if adversary.kind == "equivocator":
        return EquivocatingValidator(vid, rng=random.Random(rng.random()), **kwargs)
    if adversary.kind == "share_withholder":
        return WithholdingValidator(vid, mode=adversary.withhold_mode, **kwargs)
    return Validator(vid, **kwargs)
