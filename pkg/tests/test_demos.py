import os
import subprocess
import sys

import pytest

DEMOS = os.path.join(os.path.dirname(__file__), "..", "demos")


@pytest.mark.parametrize("script,args,expect", [
    ("commit_reveal_walkthrough.py", [], "rejected"),
    ("view_change.py", [], "agree on the order: True"),
    ("bench_ratios.py", ["2"], "opening one tx"),
])
def test_demo_runs(script, args, expect):
    proc = subprocess.run([sys.executable, os.path.join(DEMOS, script), *args], capture_output=True, text=True,
                          timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert expect in proc.stdout
