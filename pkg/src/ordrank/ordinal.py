"""Ordinals below an omega-power ceiling, in Cantor normal form.

An ordinal is a strictly-decreasing list of ``(exponent, coefficient)``
terms with positive coefficients; the empty list is 0.  Exponents are
naturals and must stay below a module-wide ceiling (default 6), so runaway
arithmetic fails fast instead of silently leaving desk scale.  Values are
immutable and totally ordered by the term list itself.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import total_ordering

from .errors import DepthExceeded, NotLimit

_CEILING = 6


def depth_ceiling() -> int:
    return _CEILING


def set_depth_ceiling(n: int) -> int:
    """Set the exponent ceiling; returns the previous value."""
    global _CEILING
    if n < 1:
        raise ValueError("ceiling must be at least 1")
    old = _CEILING
    _CEILING = n
    return old


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


class Kind(enum.Enum):
    ZERO = "zero"
    SUCCESSOR = "successor"
    LIMIT = "limit"


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        prev = None
        for e, c in self.terms:
            if c < 1:
                raise ValueError("coefficients must be positive: %r" % (self.terms,))
            if e < 0:
                raise ValueError("negative exponent: %r" % (self.terms,))
            if e >= _CEILING:
                raise DepthExceeded(e)
            if prev is not None and e >= prev:
                raise ValueError("exponents must strictly decrease: %r" % (self.terms,))
            prev = e

    # The CNF term tuples compare lexicographically exactly in ordinal order.
    def __lt__(self, other: "Ordinal | int") -> bool:
        return self.terms < _coerce(other).terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = from_int(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __add__(self, other: "Ordinal | int") -> "Ordinal":
        return add(self, _coerce(other))

    def __radd__(self, other: int) -> "Ordinal":
        return add(_coerce(other), self)

    def __mul__(self, other: "Ordinal | int") -> "Ordinal":
        return mul(self, _coerce(other))

    def __rmul__(self, other: int) -> "Ordinal":
        return mul(_coerce(other), self)

    def __sub__(self, other: "Ordinal | int") -> "Ordinal":
        return left_sub(self, _coerce(other))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return "Ordinal(%s)" % format_ordinal(self)

    def digit(self, i: int) -> int:
        """Coefficient of w^i (0 when absent)."""
        for e, c in self.terms:
            if e == i:
                return c
            if e < i:
                break
        return 0

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.terms or self.terms[0][0] == 0

    def min_exp(self) -> int | None:
        """Least exponent present, or None for 0."""
        return self.terms[-1][0] if self.terms else None

    def max_exp(self) -> int | None:
        return self.terms[0][0] if self.terms else None

    def fin(self) -> int:
        """The finite part (coefficient of w^0)."""
        return self.digit(0)

    def limit_part(self) -> "Ordinal":
        """The ordinal with the finite part removed."""
        if self.terms and self.terms[-1][0] == 0:
            return Ordinal(self.terms[:-1])
        return self

    def to_int(self) -> int:
        if not self.is_finite:
            raise ValueError("not a finite ordinal: %s" % self)
        return self.fin()


def _coerce(x: "Ordinal | int") -> Ordinal:
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int):
        return from_int(x)
    raise TypeError(type(x))


def from_int(n: int) -> Ordinal:
    if n < 0:
        raise ValueError("ordinals are non-negative")
    return Ordinal(((0, n),)) if n else Ordinal()


def omega_power(e: int, c: int = 1) -> Ordinal:
    if c == 0:
        return ZERO
    return Ordinal(((e, c),))


def compare(a: Ordinal | int, b: Ordinal | int) -> int:
    """-1, 0 or 1 for LT, EQ, GT."""
    a, b = _coerce(a), _coerce(b)
    if a.terms < b.terms:
        return -1
    return 0 if a.terms == b.terms else 1


def add(a: Ordinal | int, b: Ordinal | int) -> Ordinal:
    a, b = _coerce(a), _coerce(b)
    if not b.terms:
        return a
    e = b.terms[0][0]
    kept = [t for t in a.terms if t[0] > e]
    merged = list(b.terms)
    for ea, ca in a.terms:
        if ea == e:
            merged[0] = (e, ca + b.terms[0][1])
            break
    return Ordinal(tuple(kept) + tuple(merged))


def _times_nat(a: Ordinal, n: int) -> Ordinal:
    if n == 0 or not a.terms:
        return ZERO
    e0, c0 = a.terms[0]
    return Ordinal(((e0, c0 * n),) + a.terms[1:])


def mul(a: Ordinal | int, b: Ordinal | int) -> Ordinal:
    a, b = _coerce(a), _coerce(b)
    if not a.terms or not b.terms:
        return ZERO
    acc = ZERO
    for e, c in b.terms:
        if e > 0:
            acc = add(acc, omega_power(a.terms[0][0] + e, c))
        else:
            acc = add(acc, _times_nat(a, c))
    return acc


def left_sub(a: Ordinal | int, b: Ordinal | int) -> Ordinal:
    """The unique z with b + z == a, for b <= a."""
    a, b = _coerce(a), _coerce(b)
    if compare(a, b) < 0:
        raise ValueError("left_sub needs b <= a (%s < %s)" % (a, b))
    for j, (eb, cb) in enumerate(b.terms):
        if j >= len(a.terms):
            raise ValueError("left_sub needs b <= a")
        ea, ca = a.terms[j]
        if ea > eb:
            return Ordinal(a.terms[j:])
        if ea == eb and ca > cb:
            return Ordinal(((ea, ca - cb),) + a.terms[j + 1:])
        if ea == eb and ca == cb:
            continue
        raise ValueError("left_sub needs b <= a")
    return Ordinal(a.terms[len(b.terms):])


def nat_div(a: Ordinal | int, m: int) -> Ordinal:
    """Largest z with m*z <= a, for finite m >= 1."""
    a = _coerce(a)
    if m < 1:
        raise ValueError("divisor must be >= 1")
    return add(a.limit_part(), from_int(a.fin() // m))


def parity(a: Ordinal | int) -> Parity:
    """Write a = L + n with L limit-or-zero; even iff n is even (limits are even)."""
    return Parity.EVEN if _coerce(a).fin() % 2 == 0 else Parity.ODD


def is_even(a: Ordinal | int) -> bool:
    return parity(a) is Parity.EVEN


def even_floor(a: Ordinal | int) -> Ordinal:
    """The largest even ordinal <= a."""
    a = _coerce(a)
    return a if is_even(a) else add(a.limit_part(), from_int(a.fin() - 1))


def classify(a: Ordinal | int) -> Kind:
    a = _coerce(a)
    if not a.terms:
        return Kind.ZERO
    return Kind.SUCCESSOR if a.terms[-1][0] == 0 else Kind.LIMIT


def successor(a: Ordinal | int) -> Ordinal:
    return add(a, ONE)


def predecessor(a: Ordinal | int) -> Ordinal:
    a = _coerce(a)
    if classify(a) is not Kind.SUCCESSOR:
        raise ValueError("no predecessor: %s" % a)
    return add(a.limit_part(), from_int(a.fin() - 1))


def fundamental_sequence(a: Ordinal | int, n: int, even_only: bool = False) -> Ordinal:
    """The n-th element of the canonical fundamental sequence of a limit ordinal.

    The last CNF term w^e*c expands to w^e*(c-1) + w^(e-1)*n.  With
    ``even_only`` the last-level index is doubled when that level is finite,
    so every element is even while the sequence stays strictly increasing
    and cofinal.
    """
    a = _coerce(a)
    if classify(a) is not Kind.LIMIT:
        raise NotLimit(a)
    if n < 0:
        raise ValueError("index must be a natural")
    e, c = a.terms[-1]
    prefix = Ordinal(a.terms[:-1] + (((e, c - 1),) if c > 1 else ()))
    k = 2 * n if (even_only and e == 1) else n
    step = omega_power(e - 1, k) if k else ZERO
    out = add(prefix, step)
    if even_only:
        out = even_floor(out)
    return out


ZERO = Ordinal()
ONE = from_int(1)
W = omega_power(1)


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if e == 0:
            parts.append(str(c))
        elif e == 1:
            parts.append("w*%d" % c)
        else:
            parts.append("w^%d*%d" % (e, c))
    return " + ".join(parts)


def parse_ordinal(text: str) -> Ordinal:
    """Parse the textual syntax, e.g. ``w^2*3 + w*1 + 4`` (also bare ``w``, ``w^2``)."""
    acc = ZERO
    s = text.strip()
    if not s:
        raise ValueError("empty ordinal literal")
    for chunk in s.split("+"):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError("empty term in %r" % text)
        if chunk[0] in "wW":
            rest = chunk[1:].replace(" ", "")
            e, c = 1, 1
            if rest.startswith("^"):
                rest = rest[1:]
                num = ""
                while rest and rest[0].isdigit():
                    num += rest[0]
                    rest = rest[1:]
                if not num:
                    raise ValueError("missing exponent in %r" % text)
                e = int(num)
            if rest.startswith("*"):
                if not rest[1:].isdigit():
                    raise ValueError("bad coefficient in %r" % text)
                c = int(rest[1:])
                rest = ""
            if rest:
                raise ValueError("trailing junk in %r" % text)
            acc = add(acc, omega_power(e, c))
        else:
            if not chunk.isdigit():
                raise ValueError("bad term %r in %r" % (chunk, text))
            acc = add(acc, from_int(int(chunk)))
    return acc
