"""Run report with canonical JSON, flat CSV and a human-readable table."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field


@dataclass
class RunReport:
    config: dict
    adversary: dict
    end_tick: int
    stop_reason: str
    validators: list[dict]
    transactions: dict
    metrics: dict
    violations: dict[str, bool]
    violation_details: dict[str, list[str]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "adversary": self.adversary,
            "end_tick": self.end_tick,
            "stop_reason": self.stop_reason,
            "validators": self.validators,
            "transactions": self.transactions,
            "metrics": self.metrics,
            "violations": self.violations,
            "violation_details": self.violation_details,
            "passed": self.passed,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent, separators=(",", ":") if indent is None else None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in _flatten(self.to_dict()):
            writer.writerow([key, value])
        return buf.getvalue()

    def opened_sequences(self) -> dict[int, list]:
        return {v["id"]: v["opened"] for v in self.validators if v["honest"]}

    def to_table(self) -> str:
        c, m, t = self.config, self.metrics, self.transactions
        lines = [
            f"scheme={c['scheme']} n={c['n']} f={c['f']} seed={c['seed']} adversary={self.adversary['kind']}",
            f"stopped at tick {self.end_tick} ({self.stop_reason})",
            f"transactions: submitted={t['submitted']} dispersed={t['dispersed']} "
            f"opened={t['opened']} rejected={t['rejected']} unresolved_dispersals={len(t['unresolved_dispersals'])}",
            f"round (ticks): {m['round_ticks']}",
            f"commit latency (rounds): {_span(m['commit_latency_rounds'])}",
            f"share availability after commit (rounds): {_span(m['share_latency_rounds'])}",
            f"messages: " + " ".join(f"{k}={v}" for k, v in sorted(m["messages"].items()))
            + f" (forwards={m['forwards']}, client events={m['client_events']})",
            "",
            f"{'validator':>9} {'honest':>6} {'view':>5} {'committed':>9} {'opened':>6} {'rejected':>8} {'complaints':>10}",
        ]
        for v in self.validators:
            rejected = sum(1 for _, status in v["opened"] if status == "rejected")
            lines.append(
                f"{v['id']:>9} {str(v['honest']):>6} {v['view']:>5} {len(v['committed']):>9} "
                f"{len(v['opened']) - rejected:>6} {rejected:>8} {v['complaints']:>10}"
            )
        lines.append("")
        for name in sorted(self.violations):
            lines.append(f"{name:<18} {'VIOLATED' if self.violations[name] else 'ok'}")
            for detail in self.violation_details.get(name, []):
                lines.append(f"    {detail}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def _span(values: dict) -> str:
    if not values:
        return "n/a"
    xs = list(values.values())
    lo, hi = min(xs), max(xs)
    return f"{lo}" if lo == hi else f"{lo}..{hi}"


def _flatten(obj, prefix: str = ""):
    if isinstance(obj, dict):
        for key in sorted(obj, key=str):
            yield from _flatten(obj[key], f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
        for i, item in enumerate(obj):
            yield from _flatten(item, f"{prefix}.{i}")
    elif isinstance(obj, list):
        yield prefix, json.dumps(obj, separators=(",", ":"))
    else:
        yield prefix, obj
