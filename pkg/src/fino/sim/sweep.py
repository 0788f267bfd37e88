"""
Seeded batches of adversarial runs with an aggregate verdict.

Each run is built from its seed alone: the scheme cycles with the seed and
the adversary instance is drawn from a stream named after the seed, so any
failing (seed, kind, n) triple can be replayed on its own.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .adversary import Adversary, random_adversary
from .config import SCHEMES, Config
from .report import RunReport
from .runner import run


@dataclass
class RunSummary:
    seed: int
    kind: str
    n: int
    scheme: str
    passed: bool
    identical_outcomes: bool
    violations: tuple[str, ...]
    stop_reason: str
    message_kinds: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.passed and self.identical_outcomes


@dataclass
class SweepResult:
    runs: list[RunSummary] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.runs)

    @property
    def failures(self) -> list[RunSummary]:
        return [r for r in self.runs if not r.ok]

    @property
    def passed(self) -> bool:
        return not self.failures

    def count(self, kind: str | None = None, n: int | None = None) -> int:
        return sum(1 for r in self.runs if (kind is None or r.kind == kind) and (n is None or r.n == n))

    def flagged(self, name: str) -> int:
        return sum(1 for r in self.runs if name in r.violations)

    def by_kind(self) -> dict[str, tuple[int, int]]:
        """kind -> (runs, failures)."""
        out: dict[str, list[int]] = {}
        for r in self.runs:
            row = out.setdefault(r.kind, [0, 0])
            row[0] += 1
            row[1] += 0 if r.ok else 1
        return {k: (v[0], v[1]) for k, v in sorted(out.items())}


def scheme_for(seed: int, kind: str) -> str:
    # a malicious dealer needs a secret-sharing scheme to deal inconsistently
    schemes = ("avidm", "hybrid") if kind == "malicious_dealer" else SCHEMES
    return schemes[seed % len(schemes)]


def sweep_case(seed: int, kind: str, n: int = 4, f: int | None = None, tx_load: int = 6,
               base: Config | None = None) -> tuple[Config, Adversary]:
    """The (config, adversary) pair a sweep runs for ``seed`` and ``kind``."""
    f = (n - 1) // 3 if f is None else f
    rng = random.Random(f"fino-sweep/{seed}/{kind}/{n}")
    base = base or Config()
    gst = rng.randint(50, 400) if kind == "partition_until_gst" else 0
    config = Config(**{**base.to_dict(), "n": n, "f": f, "seed": seed, "scheme": scheme_for(seed, kind),
                       "gst": gst, "tx_load": tx_load})
    return config, random_adversary(kind, config, rng)


def identical_outcomes(report: RunReport) -> bool:
    sequences = list(report.opened_sequences().values())
    return all(s == sequences[0] for s in sequences[1:])


def run_case(seed: int, kind: str, n: int = 4, f: int | None = None, tx_load: int = 6,
             base: Config | None = None, fault: str | None = None) -> tuple[RunReport, RunSummary]:
    config, adversary = sweep_case(seed, kind, n, f, tx_load, base)
    report = run(config, adversary, fault=fault)
    summary = RunSummary(
        seed=seed, kind=kind, n=n, scheme=config.scheme, passed=report.passed,
        identical_outcomes=identical_outcomes(report),
        violations=tuple(k for k, v in sorted(report.violations.items()) if v),
        stop_reason=report.stop_reason,
        message_kinds=tuple(k for k, v in sorted(report.metrics["messages"].items()) if v),
    )
    return report, summary


def sweep(seeds, kinds, n: int = 4, f: int | None = None, tx_load: int = 6, cycle: bool = False,
          base: Config | None = None, fault: str | None = None, progress=None) -> SweepResult:
    """Run every (seed, kind) pair, or with ``cycle`` one kind per seed in rotation."""
    kinds = list(kinds)
    result = SweepResult()
    for i, seed in enumerate(seeds):
        chosen = [kinds[i % len(kinds)]] if cycle else kinds
        for kind in chosen:
            _, summary = run_case(seed, kind, n, f, tx_load, base, fault)
            result.runs.append(summary)
            if progress is not None:
                progress(summary)
    return result
