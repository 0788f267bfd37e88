"""Simulation configuration and its model-bound checks."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from ..errors import ConfigInvalid
from ..field import NAMED_FIELDS
from ..group import NAMED_GROUPS

SCHEMES = ("threshold", "avidm", "hybrid")


@dataclass(frozen=True)
class Config:
    """Run parameters, in simulation ticks.

    ``None`` timing fields are derived from ``delta``: DD (the spread of an
    honest broadcast) defaults to 3 delta, the view timer to 3 DD.
    """

    n: int = 4
    f: int = 1
    delta: int = 10
    min_delay: int = 1
    gst: int = 0
    dd: int | None = None
    view_timer: int | None = None
    seed: int = 0
    scheme: str = "avidm"
    tx_load: int = 10
    submit_window: int | None = None
    cadence: int | None = None
    reveal_timeout: int | None = None
    batch_timeout: int | None = None
    dispersal_timeout: int | None = None
    horizon: int | None = None
    field: str = "p25519"
    group: str = "sp256"

    def resolved(self) -> "Config":
        """Copy with every derived field filled in, after validation."""
        self.validate()
        dd = self.dd if self.dd is not None else 3 * self.delta
        out = replace(
            self,
            dd=dd,
            view_timer=self.view_timer if self.view_timer is not None else 3 * dd,
            submit_window=self.submit_window if self.submit_window is not None else 20 * self.delta,
            cadence=self.cadence if self.cadence is not None else max(1, dd // 2),
            reveal_timeout=self.reveal_timeout if self.reveal_timeout is not None else dd,
            batch_timeout=self.batch_timeout if self.batch_timeout is not None else 2 * dd,
            dispersal_timeout=self.dispersal_timeout if self.dispersal_timeout is not None else 4 * dd,
            horizon=self.horizon if self.horizon is not None else self.gst + 600 * self.delta,
        )
        out._validate_derived()
        return out

    @property
    def k(self) -> int:
        return self.f + 1

    def validate(self) -> None:
        if self.f < 0 or self.n < 3 * self.f + 1:
            raise ConfigInvalid(f"need N >= 3F+1, got N={self.n}, F={self.f}")
        if self.n < 1:
            raise ConfigInvalid("need at least one validator")
        if self.delta < 1 or not 1 <= self.min_delay <= self.delta:
            raise ConfigInvalid(f"need 1 <= min_delay <= delta, got {self.min_delay}, {self.delta}")
        if self.gst < 0 or self.tx_load < 0:
            raise ConfigInvalid("gst and tx_load must be non-negative")
        if self.scheme not in SCHEMES:
            raise ConfigInvalid(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.field not in NAMED_FIELDS:
            raise ConfigInvalid(f"unknown field {self.field!r}")
        if self.group not in NAMED_GROUPS:
            raise ConfigInvalid(f"unknown group {self.group!r}")

    def _validate_derived(self) -> None:
        if self.dd < 1:
            raise ConfigInvalid("dd must be positive")
        if self.view_timer < 3 * self.dd:
            raise ConfigInvalid(f"view timer {self.view_timer} below 3*DD = {3 * self.dd}")
        if self.horizon <= self.gst:
            raise ConfigInvalid("horizon must lie beyond GST")
        for name in ("cadence", "reveal_timeout", "batch_timeout", "dispersal_timeout"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))
