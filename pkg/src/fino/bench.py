"""
Microbenchmarks of the commit-reveal engines, phase by phase.

Phases, per scheme:

    Disperse     client side: fresh key, payload encryption, dealing
    ShareGen     one validator derives its threshold decryption share
    ShareVerify  check one revealed share (a Merkle proof for SSS shares)
    Reconstruct  recover the plaintext from k pre-verified shares,
                 including post-verification of the dealing

Dealer roots are signed with Ed25519, so Disperse pays for signing and
Reconstruct for one verification. Every phase calls the same functions the
simulator uses. Absolute times
depend on the machine; the ratios between schemes are what is checked.
"""

from __future__ import annotations

import csv
import io
import json
import random
import statistics
import time
from dataclasses import dataclass, field

from . import commit_reveal as cr
from .group import SchnorrGroup
from .signing import Ed25519Signer

SCHEMES = ("Threshold", "AvidM", "HybridOptimistic", "HybridPessimistic")
PHASES = ("Disperse", "ShareGen", "ShareVerify", "Reconstruct")

# scheme row -> (dispersal scheme, revealed share kind)
_ROWS = {
    "Threshold": (cr.Scheme.THRESHOLD, "tde"),
    "AvidM": (cr.Scheme.AVIDM, "sss"),
    "HybridOptimistic": (cr.Scheme.HYBRID, "sss"),
    "HybridPessimistic": (cr.Scheme.HYBRID, "tde"),
}

PAYLOAD = b"\x42" * 64


@dataclass
class PhaseStats:
    median_us: float
    mean_us: float
    iterations: int


@dataclass
class BenchReport:
    k: int
    n: int
    group: str
    field: str
    iterations: int
    results: dict[str, dict[str, PhaseStats | None]] = field(default_factory=dict)

    def get(self, scheme: str, phase: str) -> float:
        """Median in microseconds, 0 for phases a scheme does not have."""
        stats = self.results[scheme][phase]
        return stats.median_us if stats is not None else 0.0

    def retrieve_total(self, scheme: str) -> float:
        """Per-transaction CPU at one validator: own share, k-1 checks, one reconstruction."""
        return self.get(scheme, "ShareGen") + (self.k - 1) * self.get(scheme, "ShareVerify") \
            + self.get(scheme, "Reconstruct")

    @property
    def ratios(self) -> dict[str, float]:
        """Ratios whose two schemes were both measured."""
        have = set(self.results)
        out = {}
        if {"Threshold", "AvidM"} <= have:
            avidm = self.retrieve_total("AvidM")
            out["threshold_over_avidm_retrieve"] = self.retrieve_total("Threshold") / avidm if avidm else float("inf")
            out["threshold_over_avidm_disperse"] = self.get("Threshold", "Disperse") / self.get("AvidM", "Disperse")
        if {"HybridPessimistic", "HybridOptimistic"} <= have:
            out["pessimistic_over_optimistic_reconstruct"] = \
                self.get("HybridPessimistic", "Reconstruct") / self.get("HybridOptimistic", "Reconstruct")
        return out

    @property
    def checks(self) -> dict[str, bool]:
        r = self.ratios
        out = {}
        if "threshold_over_avidm_retrieve" in r:
            out["avidm_retrieve_at_least_10x_cheaper"] = r["threshold_over_avidm_retrieve"] >= 10
            out["avidm_disperse_cheaper"] = r["threshold_over_avidm_disperse"] > 1
        if "pessimistic_over_optimistic_reconstruct" in r:
            out["pessimistic_reconstruct_slower"] = r["pessimistic_over_optimistic_reconstruct"] > 1
        return out

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "group": self.group,
            "field": self.field,
            "iterations": self.iterations,
            "results": {
                s: {p: (None if st is None else {"median_us": st.median_us, "mean_us": st.mean_us})
                    for p, st in phases.items()}
                for s, phases in self.results.items()
            },
            "retrieve_total_us": {s: self.retrieve_total(s) for s in self.results},
            "ratios": self.ratios,
            "checks": self.checks,
            "passed": self.passed,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scheme", "phase", "median_us", "mean_us"])
        for s, phases in self.results.items():
            for p, st in phases.items():
                w.writerow([s, p, "N/A", "N/A"] if st is None else [s, p, f"{st.median_us:.1f}", f"{st.mean_us:.1f}"])
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [
            f"k={self.k} n={self.n} group={self.group} field={self.field} iterations={self.iterations} (median us)",
            f"{'scheme':<18}" + "".join(f"{p:>13}" for p in PHASES) + f"{'retrieve':>13}",
        ]
        for s, phases in self.results.items():
            cells = "".join(f"{'N/A':>13}" if phases[p] is None else f"{phases[p].median_us:>13.1f}" for p in PHASES)
            lines.append(f"{s:<18}{cells}{self.retrieve_total(s):>13.1f}")
        lines.append("")
        for name, value in self.ratios.items():
            lines.append(f"{name:<42} {value:8.2f}")
        for name, ok in self.checks.items():
            lines.append(f"{name:<42} {'ok' if ok else 'FAILED'}")
        return "\n".join(lines)


def _time(fn, iterations: int, warmup: int) -> PhaseStats:
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(iterations):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) * 1e6)
    return PhaseStats(statistics.median(samples), statistics.fmean(samples), iterations)


def bench_context(k: int, n: int, group: str | SchnorrGroup = "modp2048", field: str = "p25519",
                  seed: int = 0) -> cr.CryptoContext:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return cr.CryptoContext.setup(n, k - 1, field, group, seed=seed, signer=Ed25519Signer(seed))


def verified_shares(ctx: cr.CryptoContext, bundle: cr.DispersalBundle, kind: str) -> dict[int, cr.RevealedShare]:
    """The first k honest shares of ``kind``, checked once up front."""
    chosen = cr.honest_reveals(ctx, bundle, kind)[: ctx.k]
    if not all(cr.revealed_valid(ctx, bundle.tx, rs) for rs in chosen):
        raise AssertionError("honest share failed verification")
    return {rs.revealer: rs for rs in chosen}


def reconstruct(ctx: cr.CryptoContext, tx: cr.Transaction, kind: str,
                shares: dict[int, cr.RevealedShare]) -> cr.OpenOutcome:
    """The Reconstruct phase: pre-verified shares in, outcome out."""
    r = cr.Retrieval(ctx, tx)
    (r.sss if kind == "sss" else r.tde).update(shares)
    return r.outcome()


def bench_scheme(ctx: cr.CryptoContext, row: str, iterations: int, warmup: int,
                 rng: random.Random) -> dict[str, PhaseStats | None]:
    scheme, kind = _ROWS[row]
    bundle = cr.client_disperse(ctx, PAYLOAD, scheme, "client-0", rng)
    tx = bundle.tx
    shares = verified_shares(ctx, bundle, kind)
    if reconstruct(ctx, tx, kind, shares).plaintext != PAYLOAD:
        raise AssertionError(f"{row}: reconstruction did not recover the payload")
    probe = next(iter(shares.values()))

    out: dict[str, PhaseStats | None] = {}
    out["Disperse"] = _time(lambda: cr.client_disperse(ctx, PAYLOAD, scheme, "client-0", rng), iterations, warmup)
    out["ShareGen"] = (_time(lambda: cr.reveal_tde(ctx, tx, 0), iterations, warmup)
                       if kind == "tde" else None)
    out["ShareVerify"] = _time(lambda: cr.revealed_valid(ctx, tx, probe), iterations, warmup)
    out["Reconstruct"] = _time(lambda: reconstruct(ctx, tx, kind, shares), iterations, warmup)
    return out


def run_bench(k: int = 6, n: int = 16, iterations: int = 1000, group: str | SchnorrGroup = "modp2048",
              field: str = "p25519", schemes=SCHEMES, warmup: int | None = None, seed: int = 0) -> BenchReport:
    ctx = bench_context(k, n, group, field, seed)
    warmup = max(1, iterations // 10) if warmup is None else warmup
    rng = random.Random(f"fino-bench/{seed}")
    report = BenchReport(k, n, ctx.group.name, field, iterations)
    for row in schemes:
        report.results[row] = bench_scheme(ctx, row, iterations, warmup, rng)
    return report
