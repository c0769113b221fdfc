"""Windowed base-p digit expansions of rational numbers.

A value is a finite digit window anchored at its valuation plus a tail
descriptor: the tail is known to be all zeros, known to repeat a fixed
block, or truncated (unknown).  Exact values (zero or periodic tail)
carry their rational value, so arithmetic on them is exact; truncated
values only support digit-wise work inside the stored window.

The base p may be any integer >= 2; nothing here requires inverses of p,
so composite bases work throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Union

Rational = Union[int, Fraction]

__all__ = ["PAdic", "PrecisionError", "expand", "from_int", "residues"]


class PrecisionError(Exception):
    """An operation needed digits beyond a truncated window."""


def _tail_value(p: int, start: int, block: tuple[int, ...]) -> Fraction:
    # Value of the block repeated from digit position `start` upward:
    # sum_{k>=0} B p^(start + k L) = B p^start / (1 - p^L), the (formally
    # convergent) geometric series evaluated as a rational.
    b = sum(d * p**i for i, d in enumerate(block))
    return Fraction(b * p**start, 1 - p ** len(block))


def _digit_stream(num: int, den: int, p: int) -> tuple[list[int], list[int]]:
    """Digits of num/den (den coprime to p) with cycle detection.

    Returns (preperiod digits, repeating block).  The block is at least
    one digit long; an all-zero block means the expansion terminates.
    """
    binv = pow(den, -1, p)
    seen: dict[int, int] = {}
    digits: list[int] = []
    while num not in seen:
        seen[num] = len(digits)
        d = (num * binv) % p
        digits.append(d)
        num = (num - d * den) // p
    start = seen[num]
    return digits[:start], digits[start:]


@dataclass(frozen=True, eq=False)
class PAdic:
    """One base-p number: a digit window from the valuation upward.

    digits[i] is the coefficient of p**(v + i).  `value` is the exact
    rational when the tail is known, None when truncated.  For periodic
    tails, `period` repeats starting at window offset `preperiod`.
    """

    p: int
    v: int
    digits: tuple[int, ...]
    value: Fraction | None = None
    preperiod: int = 0
    period: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.p < 2:
            raise ValueError(f"base must be >= 2, got {self.p}")
        if any(not 0 <= d < self.p for d in self.digits):
            raise ValueError("digit out of range for the base")
        if self.digits and self.digits[0] == 0:
            raise ValueError("lowest stored digit must be nonzero")
        if not self.digits and (self.value is None or self.value != 0):
            raise ValueError("empty digit window is reserved for exact zero")
        if self.period:
            if self.value is None:
                raise ValueError("periodic tail requires an exact value")
            if not 0 <= self.preperiod <= len(self.digits):
                raise ValueError("periodic block must start inside the window")

    # -- basic queries ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.digits and self.value == 0

    @property
    def exactness(self) -> str:
        if self.value is None:
            return "truncated"
        return "periodic" if self.period else "zero"

    def valuation(self) -> int | float:
        """Index of the lowest nonzero digit; +inf for the zero element."""
        return math.inf if self.is_zero() else self.v

    def norm(self, alpha: float = 1.0) -> float:
        """p**(-alpha * valuation); zero maps to 0 by convention."""
        if self.is_zero():
            return 0.0
        return float(self.p) ** (-alpha * self.v)

    @property
    def window_top(self) -> int:
        """First digit index not covered by the stored window."""
        return self.v + len(self.digits)

    def digit(self, n: int) -> int:
        """Digit at index n, extending through a known tail if needed."""
        if self.is_zero() or n < self.v:
            return 0
        i = n - self.v
        if i < len(self.digits):
            return self.digits[i]
        if self.period:
            return self.period[(i - self.preperiod) % len(self.period)]
        if self.value is not None:
            return 0
        raise PrecisionError(
            f"digit at p^{n} lies beyond the truncated window "
            f"[{self.v}, {self.window_top})"
        )

    # -- structure -------------------------------------------------------

    def split(self) -> tuple[Fraction, "PAdic"]:
        """Fractional part in Q intersect [0, 1) and the integral remainder."""
        if self.is_zero() or self.v >= 0:
            return Fraction(0), self
        frac = Fraction(0)
        for n in range(self.v, 0):
            d = self.digit(n)
            if d:
                frac += Fraction(d, self.p ** (-n))
        if self.value is not None:
            width = max(self.window_top, 1)
            return frac, expand(self.value - frac, self.p, width)
        sub = self.digits[-self.v:]
        lead = next((i for i, d in enumerate(sub) if d), None)
        if lead is None:
            raise PrecisionError("integral part vanishes across the window")
        return frac, PAdic(self.p, lead, tuple(sub[lead:]))

    def residue(self, depth: int) -> int:
        """The integer in [0, p^depth) congruent to this unit-ball element."""
        if self.is_zero():
            return 0
        if self.v < 0:
            raise ValueError("residue is defined on the unit ball only")
        return sum(self.digit(n) * self.p**n for n in range(depth))

    def shift(self, k: int) -> "PAdic":
        """Multiply by p**k (digit shift; the window moves with it)."""
        if self.is_zero() or k == 0:
            return self
        val = None if self.value is None else self.value * Fraction(self.p) ** k
        return replace(self, v=self.v + k, value=val)

    # -- arithmetic --------------------------------------------------------

    def _check_compatible(self, other: "PAdic") -> None:
        if not isinstance(other, PAdic):
            raise TypeError(f"expected PAdic, got {type(other).__name__}")
        if other.p != self.p:
            raise ValueError(f"incompatible bases {self.p} and {other.p}")

    def _known_top(self) -> float:
        return math.inf if self.value is not None else float(self.window_top)

    def __add__(self, other: "PAdic") -> "PAdic":
        self._check_compatible(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.value is not None and other.value is not None:
            lo = min(self.v, other.v)
            hi = max(self.window_top, other.window_top)
            return expand(self.value + other.value, self.p, max(hi - lo, 1))
        lo = min(self.v, other.v)
        hi = min(self._known_top(), other._known_top())
        if hi <= lo:
            raise PrecisionError("operands share no digit window")
        out: list[int] = []
        carry = 0
        for n in range(lo, int(hi)):
            carry, d = divmod(self.digit(n) + other.digit(n) + carry, self.p)
            out.append(d)
        lead = next((i for i, d in enumerate(out) if d), None)
        if lead is None:
            raise PrecisionError(
                "sum vanishes across the shared window; valuation undetermined"
            )
        return PAdic(self.p, lo + lead, tuple(out[lead:]))

    def __neg__(self) -> "PAdic":
        if self.is_zero():
            return self
        if self.value is not None:
            return expand(-self.value, self.p, max(len(self.digits), 1))
        head = self.p - self.digits[0]
        rest = tuple(self.p - 1 - d for d in self.digits[1:])
        return PAdic(self.p, self.v, (head,) + rest)

    def __sub__(self, other: "PAdic") -> "PAdic":
        self._check_compatible(other)
        return self + (-other)

    # -- identity ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PAdic):
            return NotImplemented
        if self.p != other.p:
            return False
        if self.value is not None and other.value is not None:
            return self.value == other.value
        return (
            self.v == other.v
            and self.digits == other.digits
            and self.value == other.value
        )

    def __hash__(self) -> int:
        if self.value is not None:
            return hash((self.p, self.value))
        return hash((self.p, self.v, self.digits))

    def __str__(self) -> str:
        if self.is_zero():
            return f"0 (base {self.p})"
        body = " ".join(str(d) for d in self.digits)
        tail = {"zero": "", "truncated": " ...?", "periodic": ""}[self.exactness]
        if self.period:
            tail = " period " + " ".join(str(d) for d in self.period)
        return f"({body}){tail} * {self.p}^{self.v}"

    def __repr__(self) -> str:
        return (
            f"PAdic(p={self.p}, v={self.v}, digits={self.digits}, "
            f"exactness={self.exactness!r})"
        )


def expand(q: Rational, p: int, window: int) -> PAdic:
    """Digit expansion of a rational in base p with the given window width.

    The valuation is pulled out first: factors of p in the numerator
    raise it, and denominator factors sharing a divisor g with p are
    absorbed by multiplying through with p/g, lowering it.  After that
    the denominator is coprime to p and plain long division yields the
    digits, with the repeating block detected from the remainder cycle.
    """
    q = Fraction(q)
    if window < 1:
        raise ValueError("window must be >= 1")
    if p < 2:
        raise ValueError("base must be >= 2")
    if q == 0:
        return PAdic(p, 0, (), Fraction(0))
    num, den = q.numerator, q.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    g = math.gcd(den, p)
    while g > 1:
        num *= p // g
        den //= g
        v -= 1
        while num % p == 0:
            num //= p
            v += 1
        g = math.gcd(den, p)
    pre, block = _digit_stream(num, den, p)
    terminates = not any(block)
    width = max(window, len(pre))
    win: list[int] = []
    for i in range(width):
        if i < len(pre):
            win.append(pre[i])
        elif terminates:
            win.append(0)
        else:
            win.append(block[(i - len(pre)) % len(block)])
    if terminates:
        return PAdic(p, v, tuple(win), q)
    return PAdic(p, v, tuple(win), q, preperiod=len(pre), period=tuple(block))


def from_int(n: int, p: int, window: int | None = None) -> PAdic:
    """Fast construction from an integer (negative ints repeat p-1)."""
    if n == 0:
        return PAdic(p, 0, (), Fraction(0))
    if n < 0:
        return expand(n, p, window or 1)
    value = Fraction(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    digs: list[int] = []
    while n:
        n, d = divmod(n, p)
        digs.append(d)
    if window is not None and window > len(digs):
        digs.extend([0] * (window - len(digs)))
    return PAdic(p, v, tuple(digs), value)


def residues(p: int, depth: int) -> Iterator[PAdic]:
    """Every residue class mod p^depth exactly once, in ascending order.

    This is the uniform sampling of the unit ball at resolution
    p**(-depth): each ball l + p^k Z_p with k <= depth receives exactly
    p^(depth-k) of the enumerated points.
    """
    for r in range(p**depth):
        yield from_int(r, p, depth)
