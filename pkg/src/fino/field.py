"""
Prime-field arithmetic and polynomials over a prime field.

Elements carry their field so mixed-field arithmetic fails loudly. Plain
ints are coerced into the element's field on the right-hand side.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .errors import DuplicateAbscissa

# Named moduli. The small ones exist for exhaustive brute-force tests.
GF7 = 7
GF13 = 13
M31 = 2**31 - 1
M61 = 2**61 - 1
M127 = 2**127 - 1
P25519 = 2**255 - 19

NAMED_FIELDS = {
    "gf7": GF7,
    "gf13": GF13,
    "m31": M31,
    "m61": M61,
    "m127": M127,
    "p25519": P25519,
}


class PrimeField:
    """GF(p) for a prime p. Calling the field builds an element."""

    __slots__ = ("p", "byte_length")

    def __init__(self, p: int):
        if p < 2:
            raise ValueError(f"modulus must be prime, got {p}")
        self.p = p
        self.byte_length = (p.bit_length() + 7) // 8

    @classmethod
    def named(cls, name: str) -> "PrimeField":
        try:
            return cls(NAMED_FIELDS[name])
        except KeyError:
            raise ValueError(f"unknown field {name!r}; choose from {sorted(NAMED_FIELDS)}") from None

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.p, self)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def random(self, rng: random.Random) -> "FieldElement":
        return FieldElement(rng.randrange(self.p), self)

    def encode(self, element: "FieldElement") -> bytes:
        """Fixed-width big-endian encoding."""
        return element.value.to_bytes(self.byte_length, "big")

    def decode(self, data: bytes) -> "FieldElement":
        value = int.from_bytes(data, "big")
        if len(data) != self.byte_length or value >= self.p:
            raise ValueError("not a canonical field encoding")
        return FieldElement(value, self)


class FieldElement:
    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        self.value = value
        self.field = field

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field.p != self.field.p:
                raise ValueError("elements from different fields")
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement((self.value + o) % self.field.p, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement((self.value - o) % self.field.p, self.field)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement((o - self.value) % self.field.p, self.field)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.value * o % self.field.p, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.field.p, self.field)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.value, -1, self.field.p), self.field)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o == 0:
            raise ZeroDivisionError("division by zero in field")
        return FieldElement(self.value * pow(o, -1, self.field.p) % self.field.p, self.field)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(o, self.field) / self

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(pow(self.value, e, self.field.p), self.field)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value and self.field.p == other.field.p
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.field.p))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"

    def to_bytes(self) -> bytes:
        return self.field.encode(self)


class Polynomial:
    """Polynomial with coefficients lowest degree first.

    Trailing zero coefficients are stripped, so ``degree`` is the true degree
    (the zero polynomial is ``[0]`` with degree 0).
    """

    __slots__ = ("field", "coefficients")

    def __init__(self, coefficients: Iterable, field: PrimeField | None = None):
        coeffs = list(coefficients)
        if field is None:
            if not coeffs or not isinstance(coeffs[0], FieldElement):
                raise ValueError("field required when coefficients are plain ints")
            field = coeffs[0].field
        values = [int(c) % field.p for c in coeffs] or [0]
        while len(values) > 1 and values[-1] == 0:
            values.pop()
        self.field = field
        self.coefficients = tuple(FieldElement(v, field) for v in values)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def secret(self) -> FieldElement:
        return self.coefficients[0]

    def __call__(self, x) -> FieldElement:
        return poly_eval(self, x)

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and other.field == self.field
            and other.coefficients == self.coefficients
        )

    def __hash__(self):
        return hash((self.field.p, tuple(c.value for c in self.coefficients)))

    def __repr__(self):
        return f"Polynomial({[c.value for c in self.coefficients]}, p={self.field.p})"

    def values(self) -> list[int]:
        return [c.value for c in self.coefficients]


def poly_from_secret(secret: FieldElement, degree: int, rng: random.Random) -> Polynomial:
    """Random polynomial of the given degree with ``secret`` at the origin."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    field = secret.field
    coeffs = [secret.value] + [rng.randrange(field.p) for _ in range(degree)]
    return Polynomial(coeffs, field)


def poly_eval(poly: Polynomial, x) -> FieldElement:
    """Horner evaluation."""
    p = poly.field.p
    xv = int(x) % p
    acc = 0
    for c in reversed(poly.coefficients):
        acc = (acc * xv + c.value) % p
    return FieldElement(acc, poly.field)


def _check_distinct(xs: Sequence[int]) -> None:
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa("interpolation points must have distinct x")


def interpolate(points: Sequence[tuple]) -> Polynomial:
    """Lagrange interpolation: the unique polynomial of degree < len(points)."""
    if not points:
        raise ValueError("need at least one point")
    field = _field_of(points)
    p = field.p
    xs = [int(x) % p for x, _ in points]
    ys = [int(y) % p for _, y in points]
    _check_distinct(xs)
    n = len(xs)
    result = [0] * n
    for i in range(n):
        # numerator polynomial prod_{j != i} (X - x_j), built incrementally
        basis = [1]
        denom = 1
        for j in range(n):
            if j == i:
                continue
            nxt = [0] * (len(basis) + 1)
            for d, c in enumerate(basis):
                nxt[d] = (nxt[d] - c * xs[j]) % p
                nxt[d + 1] = (nxt[d + 1] + c) % p
            basis = nxt
            denom = denom * (xs[i] - xs[j]) % p
        scale = ys[i] * pow(denom, -1, p) % p
        for d, c in enumerate(basis):
            result[d] = (result[d] + c * scale) % p
    return Polynomial(result, field)


def lagrange_coefficients_at(xs: Sequence[int], at: int, modulus: int) -> list[int]:
    """Lagrange basis values L_i(at) for the abscissas ``xs`` modulo ``modulus``."""
    xs = [x % modulus for x in xs]
    _check_distinct(xs)
    coeffs = []
    for i, xi in enumerate(xs):
        num = 1
        den = 1
        for j, xj in enumerate(xs):
            if j != i:
                num = num * (at - xj) % modulus
                den = den * (xi - xj) % modulus
        coeffs.append(num * pow(den, -1, modulus) % modulus)
    return coeffs


def interpolate_at(points: Sequence[tuple], at=0) -> FieldElement:
    """Value at ``at`` of the interpolating polynomial, without building it."""
    if not points:
        raise ValueError("need at least one point")
    field = _field_of(points)
    p = field.p
    xs = [int(x) for x, _ in points]
    lam = lagrange_coefficients_at(xs, int(at), p)
    acc = 0
    for l, (_, y) in zip(lam, points):
        acc = (acc + l * int(y)) % p
    return FieldElement(acc, field)


def _field_of(points) -> PrimeField:
    for x, y in points:
        for v in (x, y):
            if isinstance(v, FieldElement):
                return v.field
    raise ValueError("points must contain FieldElements to fix the field")
