"""Deterministic simulation harness: configuration, adversaries, monitors and runs."""

from .adversary import Adversary, KINDS, random_adversary
from .config import Config
from .network import Network, network_deliver_time
from .report import RunReport
from .runner import Simulation, run

__all__ = [
    "Adversary", "Config", "KINDS", "Network", "RunReport", "Simulation", "network_deliver_time",
    "random_adversary", "run",
]
