"""Exact dyadic and rational arithmetic, torus points and bilateral words.

Everything here is pure integer arithmetic, so identities built on these
types are checked with equality rather than a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

__all__ = [
    "Rational",
    "Dyadic",
    "TorusPoint",
    "BilateralWord",
    "WindowError",
    "encode",
    "decode",
    "parse_rational",
    "dyadic_grid",
]

# Exact field arithmetic on rationals is what fractions.Fraction already is.
Rational = Fraction

DyadicLike = Union["Dyadic", int, Fraction, str]


class WindowError(ValueError):
    """Raised when a binary expansion does not fit the requested window."""


def parse_rational(value: str | int | Fraction) -> Fraction:
    """Parse ``"1/3"``-style strings (or ints / Fractions) into a Fraction."""
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(value)


def _trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


class Dyadic:
    """An exact dyadic rational ``numerator / 2**exponent``.

    Instances are kept canonical (odd numerator, or exponent 0) so that
    structural equality is value equality.
    """

    __slots__ = ("numerator", "exponent")

    numerator: int
    exponent: int

    def __init__(self, numerator: int, exponent: int = 0) -> None:
        if not isinstance(numerator, int) or not isinstance(exponent, int):
            raise TypeError("Dyadic needs integer numerator and exponent")
        if exponent < 0:
            numerator <<= -exponent
            exponent = 0
        elif exponent and numerator:
            shift = min(_trailing_zeros(numerator), exponent)
            numerator >>= shift
            exponent -= shift
        elif numerator == 0:
            exponent = 0
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.numerator, self.exponent))

    # -- construction -------------------------------------------------
    @classmethod
    def coerce(cls, value: DyadicLike) -> Dyadic:
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, bool):
            raise TypeError("booleans are not dyadic numbers")
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, float):
            return cls.from_fraction(Fraction(value))
        return cls.from_fraction(Fraction(value))

    @classmethod
    def from_fraction(cls, value: Fraction) -> Dyadic:
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not a dyadic rational")
        return cls(value.numerator, den.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def __float__(self) -> float:
        return self.numerator / (1 << self.exponent)

    # -- arithmetic ---------------------------------------------------
    def _align(self, other: Dyadic) -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return (
            self.numerator << (e - self.exponent),
            other.numerator << (e - other.exponent),
            e,
        )

    def __add__(self, other: DyadicLike) -> Dyadic:
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __neg__(self) -> Dyadic:
        return Dyadic(-self.numerator, self.exponent)

    def __sub__(self, other: DyadicLike) -> Dyadic:
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other: DyadicLike) -> Dyadic:
        return Dyadic.coerce(other) - self

    def __mul__(self, other: DyadicLike) -> Dyadic:
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return Dyadic(self.numerator * other.numerator, self.exponent + other.exponent)

    __rmul__ = __mul__

    def double(self) -> Dyadic:
        return Dyadic(self.numerator, self.exponent - 1)

    def halve(self) -> Dyadic:
        return Dyadic(self.numerator, self.exponent + 1)

    def floor(self) -> int:
        return self.numerator >> self.exponent

    def mod1(self) -> Dyadic:
        """Representative in [0, 1)."""
        return Dyadic(self.numerator & ((1 << self.exponent) - 1), self.exponent)

    # -- comparison ---------------------------------------------------
    def _cmp(self, other) -> int | None:
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return None
        a, b, _ = self._align(other)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        if isinstance(other, Dyadic):
            return self.numerator == other.numerator and self.exponent == other.exponent
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other) -> bool:
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self) -> int:
        if self.exponent == 0:
            return hash(self.numerator)
        return hash(self.to_fraction())

    def __repr__(self) -> str:
        return f"Dyadic({self.numerator}, {self.exponent})"

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/{1 << self.exponent}"

    # -- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        return {"num": self.numerator, "exp": self.exponent}

    @classmethod
    def from_dict(cls, data: Mapping) -> Dyadic:
        return cls(int(data["num"]), int(data["exp"]))


@dataclass(frozen=True)
class TorusPoint:
    """A point ``[x, y]`` of the unit torus with dyadic coordinates.

    Coordinates are reduced mod 1 on construction, which resolves the
    boundary identifications of the square.
    """

    x: Dyadic
    y: Dyadic

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", Dyadic.coerce(self.x).mod1())
        object.__setattr__(self, "y", Dyadic.coerce(self.y).mod1())

    @property
    def exponent(self) -> int:
        return max(self.x.exponent, self.y.exponent)

    def to_dict(self) -> dict:
        return {"x": self.x.to_dict(), "y": self.y.to_dict()}

    @classmethod
    def from_dict(cls, data: Mapping) -> TorusPoint:
        return cls(Dyadic.from_dict(data["x"]), Dyadic.from_dict(data["y"]))

    def __str__(self) -> str:
        return f"[{self.x}, {self.y}]"


def dyadic_grid(exponent: int) -> Iterable[TorusPoint]:
    """All torus points whose coordinates have exponent <= ``exponent``."""
    side = 1 << exponent
    coords = [Dyadic(k, exponent) for k in range(side)]
    for x in coords:
        for y in coords:
            yield TorusPoint(x, y)


@dataclass(frozen=True)
class BilateralWord:
    """A bilateral symbol sequence known on the window ``[window_lo, window_hi]``.

    Symbols are the integers ``0 .. alphabet_size - 1`` stored as bytes, so
    alphabets are limited to 256 letters.
    """

    window_lo: int
    window_hi: int
    symbols: bytes
    alphabet_size: int = 2

    def __post_init__(self) -> None:
        if not isinstance(self.symbols, bytes):
            object.__setattr__(self, "symbols", bytes(self.symbols))
        if not 1 <= self.alphabet_size <= 256:
            raise ValueError("alphabet_size must be in 1..256")
        if self.window_hi < self.window_lo:
            raise ValueError("empty window")
        if len(self.symbols) != self.window_hi - self.window_lo + 1:
            raise ValueError("symbol count does not match window")
        if self.symbols and max(self.symbols) >= self.alphabet_size:
            raise ValueError("symbol outside alphabet")

    @classmethod
    def zeros(cls, lo: int, hi: int, alphabet_size: int = 2) -> BilateralWord:
        return cls(lo, hi, bytes(hi - lo + 1), alphabet_size)

    @classmethod
    def from_mapping(
        cls, lo: int, hi: int, assigned: Mapping[int, int], alphabet_size: int = 2
    ) -> BilateralWord:
        """Word on ``[lo, hi]`` that is zero except at the ``assigned`` indices."""
        buf = bytearray(hi - lo + 1)
        for j, s in assigned.items():
            if not lo <= j <= hi:
                raise WindowError(f"index {j} outside window [{lo}, {hi}]")
            buf[j - lo] = s
        return cls(lo, hi, bytes(buf), alphabet_size)

    def __getitem__(self, j: int) -> int:
        if not self.window_lo <= j <= self.window_hi:
            raise IndexError(f"index {j} outside window [{self.window_lo}, {self.window_hi}]")
        return self.symbols[j - self.window_lo]

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def indices(self) -> range:
        return range(self.window_lo, self.window_hi + 1)

    def overlap(self, other: BilateralWord) -> tuple[int, int] | None:
        lo = max(self.window_lo, other.window_lo)
        hi = min(self.window_hi, other.window_hi)
        return (lo, hi) if lo <= hi else None

    def restrict(self, lo: int, hi: int) -> BilateralWord:
        if lo < self.window_lo or hi > self.window_hi:
            raise WindowError("restriction window not contained in word window")
        return BilateralWord(
            lo, hi, self.symbols[lo - self.window_lo : hi - self.window_lo + 1], self.alphabet_size
        )

    def mismatches(self, other: BilateralWord) -> int:
        """Number of indices in the common window where the symbols differ."""
        ov = self.overlap(other)
        if ov is None:
            return 0
        lo, hi = ov
        a = self.symbols[lo - self.window_lo : hi - self.window_lo + 1]
        b = other.symbols[lo - other.window_lo : hi - other.window_lo + 1]
        if a == b:
            return 0
        return sum(1 for u, v in zip(a, b) if u != v)

    def agrees_with(self, other: BilateralWord) -> bool:
        ov = self.overlap(other)
        if ov is None:
            return True
        lo, hi = ov
        return (
            self.symbols[lo - self.window_lo : hi - self.window_lo + 1]
            == other.symbols[lo - other.window_lo : hi - other.window_lo + 1]
        )

    def to_dict(self) -> dict:
        return {
            "window_lo": self.window_lo,
            "window_hi": self.window_hi,
            "symbols": list(self.symbols),
            "alphabet_size": self.alphabet_size,
        }

    @classmethod
    def from_dict(cls, data: Mapping, alphabet_size: int = 2) -> BilateralWord:
        return cls(
            int(data["window_lo"]),
            int(data["window_hi"]),
            bytes(data["symbols"]),
            int(data.get("alphabet_size", alphabet_size)),
        )


_TO_SYMBOL = bytes.maketrans(b"01", b"\x00\x01")
_TO_CHAR = bytes.maketrans(b"\x00\x01", b"01")


def encode(p: TorusPoint, L: int) -> BilateralWord:
    """Binary word of a dyadic torus point on the window ``[-L, L]``.

    The digits of ``x`` are ``a_0, a_-1, a_-2, ...`` and those of ``y`` are
    ``a_1, a_2, ...``; expansions are the terminating ones.
    """
    if L < 0:
        raise ValueError("window radius must be nonnegative")
    x, y = p.x, p.y
    if x.exponent > L + 1 or y.exponent > L:
        raise WindowError(f"window too small: point {p} needs more than radius {L}")
    # position j + L of the word holds a_j; x digits fill positions 0..L
    # least-significant first, y digits fill L+1..2L most-significant first
    xs = format(x.numerator << (L + 1 - x.exponent), f"0{L + 1}b")[::-1]
    ys = format(y.numerator << (L - y.exponent), f"0{L}b") if L else ""
    return BilateralWord(-L, L, (xs + ys).encode("ascii").translate(_TO_SYMBOL), 2)


def decode(w: BilateralWord) -> TorusPoint:
    """Inverse of :func:`encode`; indices outside the window count as 0."""
    if w.alphabet_size != 2:
        raise ValueError("decode requires the binary alphabet")
    lo, hi = w.window_lo, w.window_hi
    x = Dyadic(0)
    y = Dyadic(0)
    if lo <= 0:
        top = min(hi, 0)
        digits = w.symbols[: top - lo + 1].translate(_TO_CHAR)[::-1]
        x = Dyadic(int(digits, 2), 1 - lo)
    if hi >= 1:
        first = max(lo, 1)
        digits = w.symbols[first - lo :].translate(_TO_CHAR)
        y = Dyadic(int(digits, 2), hi)
    return TorusPoint(x, y)
