"""
The ten acceptance criteria, each reported as one pass/fail line.

The sweep behind criteria 1, 2 and 9 runs once per module and takes several
minutes; the benchmark for criterion 8 takes a few more.
"""

import itertools
import os
import random
import subprocess
import sys
from collections import Counter

import pytest

from fino import commit_reveal as cr
from fino import sss
from fino.bench import run_bench
from fino.commit_reveal import MaliciousMode, Scheme
from fino.consensus import leader
from fino.field import Polynomial, PrimeField
from fino.payloads import ShareReveal
from fino.sim import KINDS, Adversary, Config, Simulation, run
from fino.sim.sweep import sweep, sweep_case

SWEEP_N4 = 1000        # runs per adversary kind at N=4, F=1
SWEEP_N7 = 200         # runs per adversary kind at N=7, F=2
BENCH_ITERS = int(os.environ.get("FINO_BENCH_ITERS", "1000"))


@pytest.fixture(scope="module")
def safety_sweep():
    return {4: sweep(range(SWEEP_N4), KINDS, n=4), 7: sweep(range(SWEEP_N7), KINDS, n=7)}


def test_c01_safety_sweep(safety_sweep, criterion):
    counts = {n: {k: res.count(k) for k in KINDS} for n, res in safety_sweep.items()}
    enough = all(c >= SWEEP_N4 for c in counts[4].values()) and all(c >= SWEEP_N7 for c in counts[7].values())
    fired = {n: res.flagged("prefix") + res.flagged("justification") for n, res in safety_sweep.items()}
    other = {n: [(r.seed, r.kind, r.violations) for r in res.failures][:3] for n, res in safety_sweep.items()}
    ok = enough and fired == {4: 0, 7: 0}
    criterion(1, "safety sweep: prefix and justification monitors silent", ok,
              f"{safety_sweep[4].total} runs at N=4, {safety_sweep[7].total} at N=7, flags {fired}")
    assert ok, (counts, fired, other)


def test_c02_unique_opening(safety_sweep, criterion):
    runs = safety_sweep[4].runs + safety_sweep[7].runs
    bad = [(r.n, r.seed, r.kind) for r in runs if not r.identical_outcomes or "uniqueness" in r.violations]
    criterion(2, "identical open outcomes at every honest validator", not bad,
              f"{len(runs)} runs, {len(bad)} divergent")
    assert not bad, bad[:5]


def test_c03_malicious_dealer_binding(criterion):
    cases = [
        (Scheme.AVIDM, MaliciousMode.OFF_POLYNOMIAL), (Scheme.AVIDM, MaliciousMode.BAD_ROOT),
        (Scheme.HYBRID, MaliciousMode.OFF_POLYNOMIAL), (Scheme.HYBRID, MaliciousMode.BAD_ROOT),
        (Scheme.HYBRID, MaliciousMode.SPLIT_BRAIN_HYBRID),
    ]
    checked, bad = 0, []
    for n, f in [(4, 1), (5, 1), (6, 1), (7, 1), (7, 2)]:
        ctx = cr.CryptoContext.setup(n, f, seed=100 + 10 * n + f)
        for (scheme, mode), seed in itertools.product(cases, range(2)):
            bundle = cr.client_disperse(ctx, b"front-run me", scheme, "dealer", random.Random(f"c3/{n}/{seed}"), mode)
            for kind in (["sss", "tde"] if scheme is Scheme.HYBRID else ["sss"]):
                shares = cr.honest_reveals(ctx, bundle, kind)
                outs = {cr.retrieve(ctx, bundle.tx, subset) for subset in itertools.combinations(shares, f + 1)}
                checked += len(list(itertools.combinations(shares, f + 1)))
                if outs != {cr.OpenOutcome(bundle.tx.tx_id, None)}:
                    bad.append((n, f, scheme.value, mode.value, kind))
    criterion(3, "inconsistent dealings rejected identically from every F+1 subset", not bad,
              f"{checked} subsets over N<=7")
    assert not bad, bad


def test_c04_hiding(criterion):
    """For each secret, the distribution of any F share values over all dealer randomness is the same."""
    p = 7
    gf = PrimeField(p)
    bad, checked = [], 0
    for k in (1, 2, 3):
        n = p - 1
        for holders in itertools.combinations(range(n), k - 1):
            views = []
            for secret in range(p):
                hist = Counter()
                for tail in itertools.product(range(p), repeat=k - 1):
                    shares = sss.shares_from_polynomial(Polynomial((secret,) + tail, gf), n)
                    hist[tuple(shares[i].y.value for i in holders)] += 1
                views.append(hist)
                checked += 1
            if any(h != views[0] for h in views[1:]):
                bad.append((k, holders))
    criterion(4, "F shares over GF(7) fit every secret in equal measure", not bad,
              f"k<=3, {checked} (secret, holder set) histograms")
    assert not bad, bad


def test_c05_commit_latency(criterion):
    bad, views = [], 0
    for scheme, (n, f), seed in itertools.product(("threshold", "avidm", "hybrid"), [(4, 1), (7, 2)], range(5)):
        sim = Simulation(Config(n=n, f=f, scheme=scheme, delta=10, min_delay=10, tx_load=10, seed=seed))
        r = sim.run()
        m = r.metrics
        committed = set.intersection(*(set(v.committed_views) for v in sim.validators))
        if set(m["commit_latency_rounds"]) != {str(x) for x in committed}:
            bad.append((scheme, n, seed, "unmeasured commit"))
        if any(x != 2.0 for x in m["commit_latency_rounds"].values()):
            bad.append((scheme, n, seed, m["commit_latency_rounds"]))
        with_txs = {str(x) for x in committed if sim.monitors.segments.get(x)}
        if set(m["share_latency_rounds"]) != with_txs or any(x > 1.0 for x in m["share_latency_rounds"].values()):
            bad.append((scheme, n, seed, m["share_latency_rounds"]))
        views += len(committed)
    criterion(5, "synchronous commit in exactly 2 rounds, shares within 1 more", not bad,
              f"{views} committed views across 30 runs")
    assert not bad, bad


def test_c06_liveness_after_gst(criterion):
    bad, runs = [], 0
    for n, seeds in ((4, range(150)), (7, range(40))):
        for seed in seeds:
            config, adversary = sweep_case(seed, "partition_until_gst", n=n)
            dd = 3 * config.delta
            config = Config(**{**config.to_dict(), "dd": dd, "view_timer": 3 * dd})
            sim = Simulation(config, adversary)
            report = sim.run()
            runs += 1
            honest = [v for v in sim.validators if v.honest]
            entries = {}
            for v in honest:
                for view, tick in v.view_entered.items():
                    entries[view] = min(tick, entries.get(view, tick))
            first = min((r for r, t in entries.items() if t >= config.gst and leader(r, n) in
                         {v.vid for v in honest}), default=None)
            if first is None or report.violations["liveness"] or any(
                    not set(range(first, first + 3)) & set(v.ordered_views) for v in honest):
                bad.append((n, seed, first))
    criterion(6, "every honest validator commits within 2 views of the first honest leader after GST", not bad,
              f"{runs} partitioned runs, view timer = 3*DD")
    assert not bad, bad[:5]


def _gate_instrument(v, blocked, breaches):
    valid: dict = {}

    def ready_from_dag() -> bool:
        have: dict = {}
        for key, msg in v.dag.messages.items():
            for p in msg.payloads:
                if isinstance(p, ShareReveal):
                    rs = p.share
                    tx = v.txs.get(rs.tx_id)
                    mark = (key, rs.tx_id, rs.revealer)
                    if tx is not None and mark not in valid:
                        valid[mark] = cr.revealed_valid(v.ctx, tx, rs)
                    if valid.get(mark):
                        kind = "sss" if rs.envelope is not None else "tde"
                        have.setdefault((rs.tx_id, kind), set()).add(rs.revealer)
        for tx_id in v.committed:
            scheme = v.txs[tx_id].scheme
            kinds = {"threshold": ["tde"], "avidm": ["sss"], "hybrid": ["sss", "tde"]}[scheme.value]
            if not any(len(have.get((tx_id, kd), ())) >= v.ctx.k for kd in kinds):
                return False
        return True

    original_enter, original_check = v._enter_view, v.check_view_change

    def enter(view):
        if view > 0 and not ready_from_dag():
            breaches.append((v.vid, view))
        original_enter(view)

    def check():
        if v.view_a(v.view) and not v.view_b():
            blocked.append(v.vid)
        return original_check()

    v._enter_view, v.check_view_change = enter, check


def test_c07_view_b_gate(criterion):
    bad, blocked_total, runs = [], 0, 0
    for n, f, seeds in ((4, 1, range(20)), (7, 2, range(6))):
        for seed, mode in itertools.product(seeds, ("silent", "corrupt")):
            rng = random.Random(f"c7/{n}/{seed}")
            adversary = Adversary("share_withholder", validators=tuple(sorted(rng.sample(range(n), f))),
                                  withhold_mode=mode)
            sim = Simulation(Config(n=n, f=f, tx_load=6, seed=seed, scheme=("avidm", "hybrid", "threshold")[seed % 3]),
                             adversary)
            blocked, breaches = [], []
            honest = [v for v in sim.validators if v.vid not in adversary.validators]
            for v in honest:
                _gate_instrument(v, blocked, breaches)
            report = sim.run()
            runs += 1
            blocked_total += len(blocked)
            opened_all = all(len(v.opened) == report.transactions["dispersed"] for v in honest)
            advanced = all(v.view > max(v.ordered_views, default=0) for v in honest)
            if breaches or report.violations["view_gate"] or not (report.passed and opened_all and advanced):
                bad.append((n, seed, mode, breaches[:2]))
    ok = not bad and blocked_total > 0
    criterion(7, "view change waits for F+1 revealed shares, then proceeds", ok,
              f"{runs} withholding runs, gate held the view {blocked_total} times")
    assert ok, bad[:5]


def test_c08_benchmark_ratios(criterion):
    report = run_bench(k=6, n=16, iterations=BENCH_ITERS, group="modp2048")
    r = report.ratios
    ok = report.passed and r["threshold_over_avidm_retrieve"] >= 10
    criterion(8, "AvidM retrieve >=10x cheaper, disperse cheaper, pessimistic slower", ok,
              f"{BENCH_ITERS} iterations: retrieve {r['threshold_over_avidm_retrieve']:.0f}x, "
              f"disperse {r['threshold_over_avidm_disperse']:.0f}x, "
              f"pess/opt {r['pessimistic_over_optimistic_reconstruct']:.2f}")
    print(report.to_table())
    assert ok, report.to_table()


def test_c09_message_taxonomy(safety_sweep, criterion):
    runs = safety_sweep[4].runs + safety_sweep[7].runs
    kinds = set().union(*(r.message_kinds for r in runs))
    flagged = sum(1 for r in runs if "message_taxonomy" in r.violations)
    ok = kinds == {"dag", "echo"} and flagged == 0
    criterion(9, "network carries only DAG messages and echoes", ok, f"kinds seen {sorted(kinds)} in {len(runs)} runs")
    assert ok


def test_c10_determinism(criterion):
    bad, runs = [], 0
    for kind, seed in itertools.product(KINDS, range(4)):
        for n in (4, 7):
            config, adversary = sweep_case(seed, kind, n=n)
            if run(config, adversary).to_json() != run(config, adversary).to_json():
                bad.append((kind, seed, n))
            runs += 1
    code = ("import sys; from fino.cli import main; "
            "sys.exit(main(['run', '--scenario', sys.argv[1], '--json']))")
    scenario = os.path.join(os.path.dirname(__file__), "..", "scenarios", "malicious_dealer.txt")
    outs = {subprocess.run([sys.executable, "-c", code, scenario], capture_output=True, text=True,
                           env={**os.environ, "PYTHONHASHSEED": hs}).stdout for hs in ("1", "2", "random")}
    if len(outs) != 1 or not next(iter(outs)):
        bad.append("cross-process")
    criterion(10, "re-running a seed reproduces the report byte for byte", not bad,
              f"{runs} in-process pairs, 3 processes with different hash seeds")
    assert not bad, bad
