"""Partially synchronous network: seeded delays, optional partition before GST."""

from __future__ import annotations

import random
from typing import Collection

from .config import Config

CLIENT = -1


class Network:
    """Delay model shared by every link.

    Delays are drawn from one seeded stream in ``[min_delay, delta]``. With
    a partition, messages crossing it before GST are held until GST and then
    take a normal delay. Nothing is delivered after the horizon, so every
    message sent before it arrives by then.
    """

    def __init__(self, config: Config, rng: random.Random, partition: Collection[int] | None = None):
        self.config = config
        self.rng = rng
        self.side = None if partition is None else frozenset(partition)

    def crosses(self, src: int, dst: int) -> bool:
        if self.side is None or src == CLIENT or dst == CLIENT:
            return False
        return (src in self.side) != (dst in self.side)

    def deliver_time(self, src: int, dst: int, send_tick: int) -> int:
        if src == dst:
            return send_tick
        c = self.config
        d = c.min_delay if c.min_delay == c.delta else self.rng.randint(c.min_delay, c.delta)
        start = send_tick
        if send_tick < c.gst and self.crosses(src, dst):
            start = c.gst
        return min(start + d, max(c.horizon, send_tick + d))


def network_deliver_time(src: int, dst: int, send_tick: int, config: Config, rng: random.Random,
                         partition: Collection[int] | None = None) -> int:
    return Network(config, rng, partition).deliver_time(src, dst, send_tick)
