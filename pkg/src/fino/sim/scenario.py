"""
Scenario files: plain ``key = value`` lines describing one run.

Keys are ``Config`` field names plus ``adversary`` (the kind) and the
``Adversary`` fields. Lists are comma separated. ``#`` starts a comment.

    n = 4
    scheme = hybrid
    adversary = crash_leader
    views = 1
"""

from __future__ import annotations

from dataclasses import fields

from ..errors import ConfigInvalid
from .adversary import Adversary
from .config import Config

_TUPLE_KEYS = ("views", "validators", "partition")
_ADVERSARY_KEYS = {f.name for f in fields(Adversary)} - {"kind"}


def parse_lines(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigInvalid(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        out[key.strip()] = value.strip()
    return out


def _convert(key: str, value: str, default):
    try:
        if key in _TUPLE_KEYS:
            return tuple(int(x) for x in value.split(",") if x.strip())
        if isinstance(default, int) or default is None:
            return int(value)
    except ValueError:
        raise ConfigInvalid(f"{key}: expected an integer, got {value!r}") from None
    return value


def build(values: dict[str, str]) -> tuple[Config, Adversary]:
    """Config and adversary from parsed key/value pairs."""
    config_defaults = Config().to_dict()
    adversary_defaults = {f.name: f.default for f in fields(Adversary)}
    config_kw, adversary_kw = {}, {}
    for key, value in values.items():
        if key == "adversary":
            adversary_kw["kind"] = value
        elif key in config_defaults:
            config_kw[key] = _convert(key, value, config_defaults[key])
        elif key in _ADVERSARY_KEYS:
            adversary_kw[key] = _convert(key, value, adversary_defaults[key])
        else:
            raise ConfigInvalid(f"unknown scenario key {key!r}")
    return Config(**config_kw), Adversary(**adversary_kw)


def load(path: str) -> tuple[Config, Adversary]:
    with open(path, encoding="utf-8") as fh:
        return build(parse_lines(fh.read()))


def with_overrides(config: Config, **overrides) -> Config:
    """``config`` with every non-None override applied."""
    kw = {k: v for k, v in overrides.items() if v is not None}
    return Config(**{**config.to_dict(), **kw})
