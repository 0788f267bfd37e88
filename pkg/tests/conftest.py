import random

import pytest

from fino import commit_reveal as cr
from fino.dag import DagTransport
from fino.signing import KeyRegistry


class ShuffleHost:
    """Delivers pending sends and timers in an order chosen by a seeded RNG.

    Time advances by one per step, so timers fire whenever they are picked:
    every interleaving the RNG chooses is a legal asynchronous schedule.
    """

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.now = 0
        self.pending: list = []
        self.endpoints: dict = {}
        self.sent: dict[str, int] = {}

    def send(self, src, dst, kind, obj):
        self.sent[kind] = self.sent.get(kind, 0) + 1
        self.pending.append(("net", dst, obj))

    def set_timer(self, vid, at, key):
        self.pending.append(("timer", vid, key))

    def step(self) -> bool:
        if not self.pending:
            return False
        i = self.rng.randrange(len(self.pending))
        self.pending[i], self.pending[-1] = self.pending[-1], self.pending[i]
        kind, target, obj = self.pending.pop()
        self.now += 1
        endpoint = self.endpoints.get(target)
        if endpoint is None:
            return True
        if kind == "net":
            endpoint.receive(obj)
        elif obj[0] == "forward":
            endpoint.on_forward_timer(obj[1])
        return True

    def run(self, limit: int = 100_000) -> None:
        for _ in range(limit):
            if not self.step():
                return
        raise AssertionError("schedule did not quiesce")


@pytest.fixture(scope="session")
def codec():
    return cr.CryptoContext.setup(4, 1, seed=0)


@pytest.fixture
def signer():
    return KeyRegistry(0)


def make_transports(n, f, codec, signer, host, honest=None, **kwargs):
    honest = range(n) if honest is None else honest
    ts = {}
    for vid in honest:
        ts[vid] = DagTransport(vid, n, f, codec, signer, host, **kwargs)
        host.endpoints[vid] = ts[vid]
    return ts


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion(capsys):
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
