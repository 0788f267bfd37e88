"""
Invariant monitors, evaluated while a run executes and once at its end.

Only honest validators are monitored. ``fault`` injects a deliberate
violation into what the monitors observe, to show that they fire.
"""

from __future__ import annotations

from typing import Sequence

from ..consensus import Observer, Validator, leader
from ..dag import DagMessage, Key

VIOLATIONS = (
    "prefix",
    "uniqueness",
    "justification",
    "liveness",
    "reliability",
    "non_equivocation",
    "causal_order",
    "message_taxonomy",
    "view_gate",
)

FAULTS = ("prefix", "uniqueness")

_FAKE_TX = b"\xfa" * 32


class Monitors(Observer):
    def __init__(self, n: int, byzantine: frozenset[int], fault: str | None = None, max_details: int = 5):
        if fault is not None and fault not in FAULTS:
            raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
        self.n = n
        self.byzantine = byzantine
        self.fault = fault
        self.max_details = max_details
        self.details: dict[str, list[str]] = {name: [] for name in VIOLATIONS}
        self.flags: dict[str, bool] = {name: False for name in VIOLATIONS}

        self.longest: list[bytes] = []
        self.checked: dict[int, int] = {}
        self.outcomes: dict[bytes, bytes | None] = {}
        self.delivered: dict[Key, bytes] = {}
        self.committed_props: dict[int, Key] = {}
        self.valid_props: dict[int, tuple[Key, tuple[int, ...]]] = {}
        self.proposal_sent: dict[int, int] = {}
        self.commit_ticks: dict[int, dict[int, int]] = {}
        self.segments: dict[int, list[bytes]] = {}
        self.ready_ticks: dict[bytes, dict[int, int]] = {}
        self.open_count: dict[int, int] = {}
        self._injected = False
        self.changed = False

    def flag(self, name: str, detail: str) -> None:
        self.flags[name] = True
        if len(self.details[name]) < self.max_details:
            self.details[name].append(detail)

    @property
    def violated(self) -> bool:
        return any(self.flags.values())

    def _honest(self, v: Validator) -> bool:
        return v.honest and v.vid not in self.byzantine

    # -- continuous checks --------------------------------------------------

    def on_deliver(self, v: Validator, msg: DagMessage) -> None:
        if not self._honest(v):
            return
        missing = [ref for ref in msg.refs if ref not in v.dag]
        if missing or msg.key not in v.dag:
            self.flag("causal_order", f"validator {v.vid} delivered {msg.key} before {missing}")
        prev = self.delivered.setdefault(msg.key, msg.digest)
        if prev != msg.digest:
            self.flag("non_equivocation", f"two digests delivered for {msg.key}")

    def on_order(self, v: Validator, view: int, tx_ids: Sequence[bytes]) -> None:
        if not self._honest(v):
            return
        self.segments.setdefault(view, list(tx_ids))
        seq = v.committed
        if self.fault == "prefix" and not self._injected and seq:
            seq = seq[:-1] + [_FAKE_TX]
            self._injected = True
        start = self.checked.get(v.vid, 0)
        for i in range(start, len(seq)):
            if i < len(self.longest):
                if self.longest[i] != seq[i]:
                    self.flag("prefix", f"validator {v.vid} position {i} diverges")
                    break
            else:
                self.longest.append(seq[i])
        self.checked[v.vid] = len(seq)
        self.changed = True

    def on_open(self, v: Validator, outcome) -> None:
        if not self._honest(v):
            return
        value = outcome.plaintext
        if self.fault == "uniqueness" and not self._injected:
            value = b"tampered" if value is None else None
            self._injected = True
        if outcome.tx_id in self.outcomes:
            if self.outcomes[outcome.tx_id] != value:
                self.flag("uniqueness", f"validator {v.vid} opened {outcome.tx_id.hex()[:16]} differently")
        else:
            self.outcomes[outcome.tx_id] = value
        self.open_count[v.vid] = self.open_count.get(v.vid, 0) + 1
        self.changed = True

    def on_valid_proposal(self, v: Validator, view: int, key: Key) -> None:
        if self._honest(v) and view not in self.valid_props:
            self.valid_props[view] = (key, v.dag.clock(key))

    def on_proposal_sent(self, v: Validator, view: int, msg: DagMessage) -> None:
        self.proposal_sent.setdefault(view, v.host.now)

    def on_commit(self, v: Validator, view: int, key: Key) -> None:
        if not self._honest(v):
            return
        prev = self.committed_props.setdefault(view, key)
        if prev != key:
            self.flag("justification", f"two proposals committed for view {view}")
        self.commit_ticks.setdefault(view, {})[v.vid] = v.host.now

    def on_view_enter(self, v: Validator, view: int, gate_ok: bool) -> None:
        if self._honest(v) and view > 0 and not gate_ok:
            self.flag("view_gate", f"validator {v.vid} entered view {view} with unrevealed committed txs")

    def on_shares_ready(self, v: Validator, tx_id: bytes) -> None:
        if self._honest(v):
            self.ready_ticks.setdefault(tx_id, {})[v.vid] = v.host.now

    # -- end-of-run checks ----------------------------------------------------

    def check_justification(self) -> None:
        for r, key in sorted(self.committed_props.items()):
            for r2, (key2, clock2) in sorted(self.valid_props.items()):
                if r2 > r and key[1] > clock2[key[0]]:
                    self.flag("justification", f"valid proposal({r2}) does not follow committed proposal({r})")

    def liveness_view(self, validators: Sequence[Validator], gst: int) -> int | None:
        """First view entered by an honest validator at or after GST whose leader is honest."""
        first_entry: dict[int, int] = {}
        for v in validators:
            if self._honest(v):
                for view, tick in v.view_entered.items():
                    if view not in first_entry or tick < first_entry[view]:
                        first_entry[view] = tick
        for view in sorted(first_entry):
            if first_entry[view] >= gst and leader(view, self.n) not in self.byzantine:
                return view
        return None

    def liveness_ok(self, validators: Sequence[Validator], gst: int) -> bool:
        r = self.liveness_view(validators, gst)
        if r is None:
            return False
        window = set(range(r, r + 3))
        return all(window & set(v.ordered_views) for v in validators if self._honest(v))

    def check_liveness(self, validators: Sequence[Validator], gst: int) -> None:
        r = self.liveness_view(validators, gst)
        if r is None:
            self.flag("liveness", "no honest-leader view entered after GST")
            return
        for v in validators:
            if self._honest(v) and not set(range(r, r + 3)) & set(v.ordered_views):
                self.flag("liveness", f"validator {v.vid} committed nothing in views {r}..{r + 2}")

    def check_reliability(self, validators: Sequence[Validator]) -> None:
        honest = [v for v in validators if self._honest(v)]
        everywhere = None
        anywhere: set[Key] = set()
        for v in honest:
            keys = set(v.dag.messages)
            anywhere |= keys
            everywhere = keys if everywhere is None else everywhere & keys
        for key in sorted(anywhere - (everywhere or set())):
            self.flag("reliability", f"message {key} not delivered at every honest validator")

    def check_taxonomy(self, counts: dict[str, int]) -> None:
        for kind in sorted(counts):
            if kind not in ("dag", "echo") and counts[kind]:
                self.flag("message_taxonomy", f"{counts[kind]} messages of kind {kind!r}")
