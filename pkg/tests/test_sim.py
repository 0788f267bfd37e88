import json
import os
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from fino.errors import ConfigInvalid
from fino.sim import Adversary, Config, Network, Simulation, network_deliver_time, run
from fino.sim.monitors import VIOLATIONS
from fino.sim.network import CLIENT
from fino.sim.scenario import build, load, parse_lines, with_overrides
from fino.sim.sweep import identical_outcomes, run_case, sweep, sweep_case

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def honest(report):
    return [v for v in report.validators if v["honest"]]


class TestConfig:
    def test_n_equal_3f_rejected(self):
        with pytest.raises(ConfigInvalid):
            Config(n=3, f=1).resolved()

    def test_short_view_timer_rejected(self):
        with pytest.raises(ConfigInvalid):
            Config(delta=10, view_timer=80).resolved()

    def test_derived_defaults(self):
        c = Config(delta=10).resolved()
        assert c.dd == 30 and c.view_timer == 90

    @pytest.mark.parametrize("kw", [{"scheme": "rsa"}, {"min_delay": 0}, {"min_delay": 11}, {"group": "x"}])
    def test_bad_fields(self, kw):
        with pytest.raises(ConfigInvalid):
            Config(**kw).resolved()

    def test_too_many_byzantine(self):
        with pytest.raises(ConfigInvalid):
            Simulation(Config(), Adversary("share_withholder", validators=(0, 1)))

    def test_threshold_malicious_dealer_rejected(self):
        with pytest.raises(ConfigInvalid):
            Simulation(Config(scheme="threshold"), Adversary("malicious_dealer"))


class TestNetwork:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**6), st.integers(0, 3), st.integers(0, 3), st.integers(0, 500))
    def test_post_gst_within_delta(self, seed, src, dst, tick):
        c = Config(gst=100, min_delay=1, delta=10).resolved()
        at = network_deliver_time(src, dst, 100 + tick, c, random.Random(seed), partition=(0, 1))
        assert 100 + tick <= at <= 100 + tick + 10
        if src != dst:
            assert at >= 100 + tick + 1

    def test_partition_defers_to_gst(self):
        c = Config(gst=300, delta=10).resolved()
        net = Network(c, random.Random(0), partition=(0,))
        for tick in (0, 50, 299):
            assert net.deliver_time(0, 2, tick) >= 300
            assert net.deliver_time(2, 1, tick) <= tick + 10

    def test_client_links_never_partitioned(self):
        c = Config(gst=300).resolved()
        net = Network(c, random.Random(0), partition=(0,))
        assert net.deliver_time(CLIENT, 0, 5) <= 15

    def test_delivery_capped_at_horizon(self):
        c = Config(gst=300, horizon=305).resolved()
        net = Network(c, random.Random(0), partition=(0,))
        assert net.deliver_time(0, 1, 10) == 305

    def test_seeded_stream(self):
        c = Config().resolved()
        a = Network(c, random.Random("s"))
        b = Network(c, random.Random("s"))
        assert [a.deliver_time(0, 1, t) for t in range(50)] == [b.deliver_time(0, 1, t) for t in range(50)]
        assert all(1 <= a.deliver_time(0, 1, 0) <= 10 for _ in range(100))


class TestRuns:
    def test_happy_path_twenty_txs(self):
        r = run(Config(n=4, f=1, scheme="avidm", tx_load=20, seed=3))
        assert r.passed and r.stop_reason == "resolved"
        seqs = [v["opened"] for v in honest(r)]
        assert len(seqs) == 4 and all(s == seqs[0] for s in seqs)
        assert len(seqs[0]) == 20 and all(o == "opened" for _, o in seqs[0])
        assert r.metrics["complaints"] == 0

    @pytest.mark.parametrize("scheme", ["threshold", "hybrid"])
    def test_other_schemes(self, scheme):
        r = run(Config(scheme=scheme, tx_load=5, seed=4))
        assert r.passed and r.transactions["opened"] == 5

    def test_crash_leader_view_one(self):
        sim = Simulation(Config(tx_load=6, seed=2), Adversary("crash_leader", views=(1,)))
        r = sim.run()
        assert r.passed and r.metrics["complaints"] > 0
        hon = [v for v in sim.validators if v.vid != 1]
        # view 2 is justified by complaints on view 1, never by votes on it
        assert all(1 not in v.ordered_views and 2 in v.valid_proposal for v in hon)
        assert all(len(v.complaints[1]) >= 3 for v in hon)
        assert identical_outcomes(r)

    def test_slow_leader_ordered_indirectly(self):
        found = False
        for seed in range(10):
            sim = Simulation(Config(tx_load=6, seed=seed), Adversary("slow_leader", views=(1,)))
            r = sim.run()
            assert r.passed and identical_outcomes(r)
            v = sim.validators[0]
            if 1 in v.ordered_views and 1 not in v.committed_views:
                found = True
        assert found, "no seed produced an indirect commit"

    def test_partition_liveness(self):
        r = run(Config(gst=250, tx_load=4, seed=7), Adversary("partition_until_gst", partition=(0, 1)))
        assert r.passed and not r.violations["liveness"]

    def test_equivocator_bounded_by_echoes(self):
        r = run(Config(tx_load=4, seed=5), Adversary("equivocator", validators=(2,)))
        assert r.passed and r.metrics["equivocation_attempts"] > 0

    def test_malicious_dealer_rejected_everywhere(self):
        r = run(Config(scheme="hybrid", tx_load=4, seed=1), Adversary("malicious_dealer", dealer_mode="off_polynomial",
                                                                       dealer_every=2))
        assert r.passed and r.transactions["rejected"] == 2
        assert identical_outcomes(r)

    def test_withholder_keeps_view_gate(self):
        r = run(Config(tx_load=6, seed=8), Adversary("share_withholder", validators=(3,), withhold_mode="corrupt"))
        assert r.passed and not r.violations["view_gate"]

    def test_taxonomy(self):
        r = run(Config(tx_load=3, seed=9))
        assert set(r.metrics["messages"]) == {"dag", "echo"}

    def test_zero_load(self):
        r = run(Config(tx_load=0, seed=1))
        assert r.passed and r.transactions["submitted"] == 0


class TestMonitors:
    def test_all_flags_present(self):
        r = run(Config(tx_load=2, seed=1))
        assert set(r.violations) == set(VIOLATIONS) and not any(r.violations.values())

    @pytest.mark.parametrize("fault", ["prefix", "uniqueness"])
    def test_injected_fault_flagged(self, fault):
        r = run(Config(tx_load=3, seed=1), fault=fault)
        assert r.violations[fault] and not r.passed
        assert r.violation_details[fault]

    def test_unknown_fault(self):
        with pytest.raises(ValueError):
            run(Config(), fault="liveness")


class TestDeterminism:
    def test_same_seed_same_bytes(self):
        cfg, adv = Config(tx_load=5, seed=11, scheme="hybrid"), Adversary("crash_leader", views=(2,))
        assert run(cfg, adv).to_json() == run(cfg, adv).to_json()

    def test_seed_changes_run(self):
        assert run(Config(tx_load=3, seed=1)).to_json() != run(Config(tx_load=3, seed=2)).to_json()

    def test_across_hash_seeds(self):
        code = ("from fino.sim import Config, run; "
                "print(run(Config(tx_load=3, seed=6, scheme='hybrid')).to_json())")
        outs = []
        for hs in ("0", "12345"):
            env = {**os.environ, "PYTHONHASHSEED": hs}
            outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                       text=True, check=True).stdout)
        assert outs[0] == outs[1] and outs[0]


class TestReport:
    def test_json_roundtrip(self):
        r = run(Config(tx_load=2, seed=1))
        d = json.loads(r.to_json())
        assert d["passed"] is True and d["config"]["n"] == 4

    def test_csv_flat(self):
        r = run(Config(tx_load=2, seed=1))
        rows = r.to_csv().splitlines()
        assert rows[0] == "key,value"
        assert "config.n,4" in rows and "violations.prefix,False" in rows

    def test_table_mentions_latency(self):
        text = run(Config(tx_load=2, seed=1)).to_table()
        assert "commit" in text


class TestScenario:
    def test_parse(self):
        text = "n = 7  # validators\nf=2\n\nadversary = crash_leader\nviews = 1, 2\n"
        config, adv = build(parse_lines(text))
        assert config.n == 7 and config.f == 2 and adv.kind == "crash_leader" and adv.views == (1, 2)

    @pytest.mark.parametrize("text", ["n 4", "bogus = 1", "n = four", "views = a"])
    def test_bad_lines(self, text):
        with pytest.raises(ConfigInvalid):
            build(parse_lines(text))

    def test_overrides_skip_none(self):
        c = with_overrides(Config(n=7, f=2), n=None, seed=9)
        assert c.n == 7 and c.seed == 9

    @pytest.mark.parametrize("name", ["happy_path.txt", "malicious_dealer.txt"])
    def test_shipped_scenarios_pass(self, name):
        config, adv = load(os.path.join(SCENARIOS, name))
        assert run(config, adv).passed

    def test_bad_config_scenario(self):
        config, adv = load(os.path.join(SCENARIOS, "bad_config.txt"))
        with pytest.raises(ConfigInvalid):
            run(config, adv)


class TestSweep:
    def test_case_reproducible(self):
        assert sweep_case(5, "partition_until_gst") == sweep_case(5, "partition_until_gst")

    def test_dealer_uses_secret_sharing(self):
        assert {sweep_case(s, "malicious_dealer")[0].scheme for s in range(6)} == {"avidm", "hybrid"}

    def test_small_sweep(self):
        res = sweep(range(3), ["none", "crash_leader"], tx_load=3)
        assert res.total == 6 and res.passed and res.by_kind() == {"crash_leader": (3, 0), "none": (3, 0)}

    def test_cycle(self):
        res = sweep(range(4), ["none", "equivocator"], tx_load=2, cycle=True)
        assert res.count("none") == 2 and res.count("equivocator") == 2

    def test_fault_fails_sweep(self):
        res = sweep(range(2), ["none"], tx_load=2, fault="prefix")
        assert not res.passed and res.flagged("prefix") == 2

    def test_run_case_summary(self):
        report, summary = run_case(3, "share_withholder")
        assert summary.ok and summary.kind == "share_withholder" and report.adversary["kind"] == "share_withholder"
