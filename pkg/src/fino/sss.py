"""
Shamir (k, n) secret sharing with fixed evaluation points.

Validator ``i`` always receives the evaluation at ``x = i + 1``, so a dealing
is fully determined by its polynomial. That is what lets a validator
regenerate every share from any k of them and re-check a dealer's
commitment after reconstruction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .errors import BadThreshold, DuplicateAbscissa, NotEnoughShares
from .field import FieldElement, Polynomial, PrimeField, interpolate, interpolate_at, poly_eval, poly_from_secret
from .wire import u32


@dataclass(frozen=True)
class Share:
    validator_id: int
    x: FieldElement
    y: FieldElement

    def encode(self) -> bytes:
        """Fixed-width leaf encoding: u32 id, then x and y at field width."""
        return u32(self.validator_id) + self.x.to_bytes() + self.y.to_bytes()

    @classmethod
    def decode(cls, data: bytes, field: PrimeField) -> "Share":
        w = field.byte_length
        if len(data) != 4 + 2 * w:
            raise ValueError("bad share encoding length")
        vid = int.from_bytes(data[:4], "big")
        return cls(vid, field.decode(data[4:4 + w]), field.decode(data[4 + w:]))


def evaluation_point(field: PrimeField, validator_id: int) -> FieldElement:
    return field(validator_id + 1)


def _check_threshold(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise BadThreshold(f"need 1 <= k <= n, got k={k}, n={n}")


def shares_from_polynomial(poly: Polynomial, n: int) -> list[Share]:
    field = poly.field
    shares = []
    for i in range(n):
        x = evaluation_point(field, i)
        shares.append(Share(i, x, poly_eval(poly, x)))
    return shares


def split(secret: FieldElement, k: int, n: int, rng: random.Random) -> list[Share]:
    _check_threshold(k, n)
    poly = poly_from_secret(secret, k - 1, rng)
    return shares_from_polynomial(poly, n)


def _select(shares: Sequence[Share], k: int) -> list[Share]:
    if len(shares) < k:
        raise NotEnoughShares(f"have {len(shares)} shares, need {k}")
    chosen = sorted(shares, key=lambda s: s.validator_id)[:k]
    xs = [s.x.value for s in chosen]
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa("shares repeat an evaluation point")
    return chosen


def combine(shares: Sequence[Share], k: int) -> FieldElement:
    """Secret from the first k shares ordered by validator id."""
    chosen = _select(shares, k)
    return interpolate_at([(s.x, s.y) for s in chosen], 0)


def reconstruct_polynomial(shares: Sequence[Share], k: int) -> Polynomial:
    chosen = _select(shares, k)
    return interpolate([(s.x, s.y) for s in chosen])


def regenerate_all(shares: Sequence[Share], n: int, k: int | None = None) -> list[Share]:
    """Every validator's share, recomputed from k of them.

    With ``k`` omitted all given shares are used and the polynomial degree is
    ``len(shares) - 1``.
    """
    if k is None:
        k = len(shares)
    if k < 1:
        raise NotEnoughShares("need at least one share")
    poly = reconstruct_polynomial(shares, k)
    return shares_from_polynomial(poly, n)
