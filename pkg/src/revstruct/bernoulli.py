"""Bernoulli schemes ``B(p_1, ..., p_n)`` on finite windows of bilateral words.

The shift moves every symbol one place right (``a'_j = a_{j-1}``) and the
canonical reversal reflects about 1/2 (``a'_j = a_{1-j}``).  All measures are
exact rationals.  Word identities are asserted on the intersection of the
validity windows, since every identity involved is local in the indices.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from .core import Reversal, StateSpace, VerificationReport
from .exactnum import BilateralWord, parse_rational

__all__ = [
    "BernoulliScheme",
    "Cylinder",
    "shift",
    "inverse_shift",
    "reverse",
    "measure",
    "word_space",
    "bernoulli_reversal",
    "random_word",
    "check_shift_preserves_measure",
    "check_reversal_relation",
    "fixed_set_measure",
    "fixed_set_measure_bruteforce",
    "is_fixed_word",
]


@dataclass(frozen=True)
class BernoulliScheme:
    probs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        probs = tuple(parse_rational(p) for p in self.probs)
        if not probs:
            raise ValueError("a scheme needs at least one symbol")
        if any(p <= 0 for p in probs):
            raise ValueError("probabilities must be positive")
        if sum(probs) != 1:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n: int) -> BernoulliScheme:
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    @classmethod
    def from_json(cls, text: str | Mapping) -> BernoulliScheme:
        """Accepts ``{"probs": ["1/2", "1/2"]}`` (as a string or a mapping)."""
        data = json.loads(text) if isinstance(text, str) else text
        return cls(tuple(parse_rational(p) for p in data["probs"]))

    def to_json(self) -> str:
        return json.dumps({"probs": [str(p) for p in self.probs]})

    @property
    def alphabet_size(self) -> int:
        return len(self.probs)

    @property
    def collision(self) -> Fraction:
        """``sum_k p_k^2``: probability that two independent symbols agree."""
        return sum((p * p for p in self.probs), Fraction(0))


@dataclass(frozen=True)
class Cylinder:
    """Prescribed symbols at finitely many pairwise distinct indices."""

    constraints: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        cons = tuple((int(j), int(s)) for j, s in self.constraints)
        indices = [j for j, _ in cons]
        if len(set(indices)) != len(indices):
            raise ValueError("not a product cylinder: indices repeat")
        object.__setattr__(self, "constraints", tuple(sorted(cons)))

    def contains(self, w: BilateralWord) -> bool:
        return all(w[j] == s for j, s in self.constraints)

    def shifted(self, k: int = 1) -> Cylinder:
        """Image under ``k`` right shifts."""
        return Cylinder(tuple((j + k, s) for j, s in self.constraints))

    def reversed(self) -> Cylinder:
        return Cylinder(tuple((1 - j, s) for j, s in self.constraints))

    @property
    def rank(self) -> int:
        return len(self.constraints)


def shift(w: BilateralWord) -> BilateralWord:
    """Right shift: window ``[lo+1, hi+1]``, ``a'_j = a_{j-1}``."""
    return BilateralWord(w.window_lo + 1, w.window_hi + 1, w.symbols, w.alphabet_size)


def inverse_shift(w: BilateralWord) -> BilateralWord:
    """Left shift: window ``[lo-1, hi-1]``, ``a'_j = a_{j+1}``."""
    return BilateralWord(w.window_lo - 1, w.window_hi - 1, w.symbols, w.alphabet_size)


def reverse(w: BilateralWord) -> BilateralWord:
    """Canonical reversal: window ``[1-hi, 1-lo]``, ``a'_j = a_{1-j}``."""
    return BilateralWord(1 - w.window_hi, 1 - w.window_lo, w.symbols[::-1], w.alphabet_size)


def measure(scheme: BernoulliScheme, c: Cylinder) -> Fraction:
    """Product of the probabilities of the prescribed symbols."""
    out = Fraction(1)
    for _, s in c.constraints:
        if not 0 <= s < scheme.alphabet_size:
            raise ValueError(f"symbol {s} outside the alphabet")
        out *= scheme.probs[s]
    return out


def word_space(alphabet_size: int) -> StateSpace:
    """Words with the exact distance "number of mismatches on the common window"."""
    return StateSpace(
        f"Sigma_{alphabet_size}^Z",
        lambda a, b: a.mismatches(b),
        lambda w: isinstance(w, BilateralWord) and w.alphabet_size == alphabet_size,
        exact=True,
    )


def is_fixed_word(w: BilateralWord, variant: Literal["reflect", "mirror"] = "reflect") -> bool:
    """Whether ``w`` lies in the fixed set of the reversal, as far as its window shows.

    ``reflect`` pairs index ``j`` with ``1 - j`` (the fixed set of the
    canonical reversal); ``mirror`` pairs ``j`` with ``-j``.
    """
    offset = 1 if variant == "reflect" else 0
    for j in w.indices:
        k = offset - j
        if w.window_lo <= k <= w.window_hi and w[j] != w[k]:
            return False
    return True


def bernoulli_reversal(alphabet_size: int) -> Reversal:
    space = word_space(alphabet_size)
    probe = BilateralWord.from_mapping(-1, 2, {0: 1}, alphabet_size) if alphabet_size > 1 else None
    return Reversal(
        space,
        reverse,
        fixed_predicate=is_fixed_word,
        probes=(probe,) if probe else (),
        name=f"K_B{alphabet_size}",
    )


def random_word(
    rng: np.random.Generator, scheme: BernoulliScheme | int, L: int
) -> BilateralWord:
    """Word on ``[-L, L]`` with independent symbols.

    Symbols are drawn from the scheme's probabilities (an int means uniform).
    """
    if isinstance(scheme, int):
        n = scheme
        draws = rng.integers(0, n, size=2 * L + 1)
    else:
        n = scheme.alphabet_size
        draws = rng.choice(n, size=2 * L + 1, p=[float(p) for p in scheme.probs])
    return BilateralWord(-L, L, bytes(draws.astype(np.uint8)), n)


def check_shift_preserves_measure(
    scheme: BernoulliScheme,
    cylinders: Iterable[Cylinder],
    *,
    membership_samples: int = 64,
    seed: int = 0,
    law_id: str = "eq_3_7",
) -> VerificationReport:
    """Exact measure invariance of cylinders under the shift and the reversal.

    Besides comparing measures, the transported constraints are validated
    against the word maps: for seeded random words ``w``, ``w in C`` must be
    equivalent to ``shift(w) in C.shifted()`` and ``reverse(w) in C.reversed()``.
    Each cylinder contributes violation 1 on any failure.
    """
    rng = np.random.default_rng(seed)
    cylinders = list(cylinders)
    reach = max((abs(j) for c in cylinders for j, _ in c.constraints), default=0) + 2
    words = [random_word(rng, scheme.alphabet_size, reach) for _ in range(membership_samples)]

    def violation(c: Cylinder) -> int:
        base = measure(scheme, c)
        if measure(scheme, c.shifted()) != base or measure(scheme, c.reversed()) != base:
            return 1
        for w in words:
            inside = c.contains(w)
            if c.shifted().contains(shift(w)) != inside:
                return 1
            if c.reversed().contains(reverse(w)) != inside:
                return 1
        return 0

    return VerificationReport.build(law_id, map(violation, cylinders), 0.0, seed)


def check_reversal_relation(
    samples: int = 10_000,
    alphabets: Sequence[int] = (2, 3, 6),
    L: int = 32,
    *,
    seed: int = 0,
    law_id: str = "eq_3_10",
) -> VerificationReport:
    """``K(S(K(w))) == S^{-1}(w)`` exactly for seeded random words.

    ``samples`` words are drawn for every alphabet size; each word
    contributes its mismatch count on the common window (plus 1 if the
    windows do not even overlap).
    """
    rng = np.random.default_rng(seed)

    def violations():
        for n in alphabets:
            for _ in range(samples):
                w = random_word(rng, n, L)
                lhs = reverse(shift(reverse(w)))
                rhs = inverse_shift(w)
                if lhs.overlap(rhs) is None:
                    yield 1
                else:
                    yield lhs.mismatches(rhs)

    return VerificationReport.build(law_id, violations(), 0.0, seed)


_VARIANT_OFFSET = {"reflect": 1, "mirror": 0}


def _pairs(L: int, variant: str) -> list[tuple[int, int]]:
    if variant not in _VARIANT_OFFSET:
        raise ValueError(f"unknown fixed-set variant {variant!r}")
    return [(j, _VARIANT_OFFSET[variant] - j) for j in range(1, L + 1)]


def fixed_set_measure(
    scheme: BernoulliScheme, L: int, variant: Literal["reflect", "mirror"] = "reflect"
) -> Fraction:
    """Measure of the words whose first ``L`` index pairs agree.

    The pairs are ``(j, 1-j)`` for ``reflect`` and ``(j, -j)`` for ``mirror``,
    ``j = 1..L``.  Both are disjoint pairings, so the answer is
    ``(sum_k p_k^2)^L`` in either case.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    if variant not in _VARIANT_OFFSET:
        raise ValueError(f"unknown fixed-set variant {variant!r}")
    return scheme.collision**L


def fixed_set_measure_bruteforce(
    scheme: BernoulliScheme, L: int, variant: Literal["reflect", "mirror"] = "reflect"
) -> Fraction:
    """Same quantity by summing cylinder measures over every word on the paired indices."""
    pairs = _pairs(L, variant)
    indices = sorted({j for pair in pairs for j in pair})
    total = Fraction(0)
    for symbols in itertools.product(range(scheme.alphabet_size), repeat=len(indices)):
        a = dict(zip(indices, symbols))
        if all(a[i] == a[k] for i, k in pairs):
            total += measure(scheme, Cylinder(tuple(a.items())))
    return total
