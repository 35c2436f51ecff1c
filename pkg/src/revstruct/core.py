"""Reversal systems, dynamics, morphisms and the sampling verification engine.

A *reversal* is a nontrivial involution ``K`` of a state space; it is a
*time-reversal* for a family of flows or cascades ``S_t`` when
``K(S_t(K(m))) == S_{-t}(m)`` for every state ``m`` and time ``t``.  The
functions in this module check such laws on sampled states and return a
:class:`VerificationReport`.

The real line and Minkowski space examples live here as well:

* real line: ``K(t) = -t``, fixed set ``{0}``, orientation by sign;
  time-reversal for the translations ``x -> x + t a``.
* Minkowski space: ``K(ct, x, y, z) = (-ct, x, y, z)``, fixed set the
  hyperplane ``ct = 0``, orientation by the sign of ``ct``; time-reversal for
  the temporal translations ``X -> X + t A`` with ``A = (a0, 0, 0, 0)``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Callable, Iterable, Sequence, Union

import numpy as np

__all__ = [
    "FIXED_POINT_ATOL",
    "ReversalError",
    "DomainError",
    "IrreversibleDynamicsError",
    "Orientation",
    "StateSpace",
    "Reversal",
    "Cascade",
    "Flow",
    "VerificationReport",
    "draw_samples",
    "verify_involution",
    "verify_orientation",
    "verify_time_reversal",
    "verify_flow_group_law",
    "verify_cascade_inverse",
    "verify_morphism",
    "compose",
    "measure_fixed_fraction",
    "REAL_LINE",
    "MINKOWSKI",
    "real_line_reversal",
    "real_translation",
    "minkowski_reversal",
    "minkowski_translation",
]

# Absolute distance under which a floating-point state counts as fixed.
FIXED_POINT_ATOL = 1e-12


class ReversalError(ValueError):
    """Base class for errors raised by the verification engine."""


class DomainError(ReversalError):
    """A state does not belong to the space an operation expects."""


class IrreversibleDynamicsError(ReversalError):
    """The dynamics cannot be evaluated at negative times."""


class Orientation(str, Enum):
    PLUS = "plus"
    MINUS = "minus"
    FIXED = "fixed"

    def flipped(self) -> Orientation:
        if self is Orientation.PLUS:
            return Orientation.MINUS
        if self is Orientation.MINUS:
            return Orientation.PLUS
        return self


@dataclass(frozen=True)
class StateSpace:
    """A named state space with its own distance and membership test.

    On ``exact`` spaces the distance is expected to be 0 for equal states and
    positive otherwise; no tolerance is ever applied to them.
    """

    name: str
    distance: Callable[[Any, Any], float]
    contains: Callable[[Any], bool] = lambda m: True
    exact: bool = False

    def equal(self, a: Any, b: Any) -> bool:
        d = self.distance(a, b)
        return d == 0 if self.exact else d <= FIXED_POINT_ATOL


def _check_member(space: StateSpace, m: Any) -> None:
    if not space.contains(m):
        raise DomainError(f"domain mismatch: {m!r} is not a state of {space.name}")


@dataclass(frozen=True)
class Reversal:
    """An involution ``apply`` with its fixed-set predicate and optional orientation.

    ``probes`` are representative states evaluated at construction: if all of
    them are fixed the candidate is rejected as the trivial involution.
    """

    space: StateSpace
    apply: Callable[[Any], Any]
    fixed_predicate: Callable[[Any], bool] | None = None
    orientation: Callable[[Any], Orientation] | None = None
    probes: Sequence[Any] = ()
    name: str = "K"

    def __post_init__(self) -> None:
        if self.fixed_predicate is None:
            object.__setattr__(
                self, "fixed_predicate", lambda m: self.space.equal(self.apply(m), m)
            )
        if self.probes and all(self.space.equal(self.apply(m), m) for m in self.probes):
            raise ReversalError(
                f"{self.name} fixes every probe state: the identity is not a reversal"
            )

    def __call__(self, m: Any) -> Any:
        return self.apply(m)

    def is_fixed(self, m: Any) -> bool:
        return bool(self.fixed_predicate(m))


@dataclass(frozen=True)
class Cascade:
    """Discrete-time dynamics ``S^t``, ``t`` an integer."""

    space: StateSpace
    step: Callable[[Any], Any]
    inverse_step: Callable[[Any], Any] | None = None
    name: str = "S"

    def at_time(self, t: int, m: Any) -> Any:
        if t != int(t):
            raise ValueError("cascades are evaluated at integer times only")
        t = int(t)
        if t < 0 and self.inverse_step is None:
            raise IrreversibleDynamicsError("irreversible dynamics supplied")
        f = self.step if t >= 0 else self.inverse_step
        for _ in range(abs(t)):
            m = f(m)
        return m


@dataclass(frozen=True)
class Flow:
    """Continuous-time dynamics given by ``at_time(t, m)``."""

    space: StateSpace
    at_time: Callable[[float, Any], Any]
    class_id: str = "flow"
    forward_only: bool = False


Dynamics = Union[Flow, Cascade]


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one law check; ``passed`` iff ``max_violation <= tolerance``."""

    law_id: str
    samples_tested: int
    max_violation: float
    tolerance: float
    passed: bool
    seed: int

    def __post_init__(self) -> None:
        if self.samples_tested < 0:
            raise ValueError("samples_tested must be nonnegative")
        if not self.max_violation >= 0 or not self.tolerance >= 0:
            raise ValueError("violation and tolerance must be nonnegative numbers")
        if self.passed != (self.max_violation <= self.tolerance):
            raise ValueError("passed must equal max_violation <= tolerance")

    @classmethod
    def build(
        cls, law_id: str, violations: Iterable[float], tolerance: float, seed: int = 0
    ) -> VerificationReport:
        n = 0
        worst = 0.0
        for v in violations:
            n += 1
            v = float(v)
            if math.isnan(v):
                v = math.inf
            if v > worst:
                worst = v
        return cls(law_id, n, worst, float(tolerance), worst <= tolerance, int(seed))

    def merge(self, other: VerificationReport) -> VerificationReport:
        """Combine two runs of the same law; associative and commutative."""
        if (self.law_id, self.tolerance, self.seed) != (other.law_id, other.tolerance, other.seed):
            raise ValueError("can only merge reports of the same law, tolerance and seed")
        worst = max(self.max_violation, other.max_violation)
        return VerificationReport(
            self.law_id,
            self.samples_tested + other.samples_tested,
            worst,
            self.tolerance,
            worst <= self.tolerance,
            self.seed,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(d["max_violation"]):
            d["max_violation"] = "inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> VerificationReport:
        return cls(
            law_id=str(data["law_id"]),
            samples_tested=int(data["samples_tested"]),
            max_violation=float(data["max_violation"]),
            tolerance=float(data["tolerance"]),
            passed=bool(data["passed"]),
            seed=int(data["seed"]),
        )


Sampler = Union[Callable[[np.random.Generator], Any], Iterable[Any]]


def draw_samples(sampler: Sampler, n: int, seed: int = 0) -> list:
    """Draw ``n`` states from a callable ``rng -> state`` or a finite iterable.

    A callable is fed a generator seeded with ``seed``; an iterable is
    truncated to its first ``n`` items.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if callable(sampler):
        rng = np.random.default_rng(seed)
        states = [sampler(rng) for _ in range(n)]
    else:
        states = list(itertools.islice(iter(sampler), n))
    if not states:
        raise ReversalError("no samples")
    return states


def verify_involution(
    K: Reversal, sampler: Sampler, n: int, *, seed: int = 0, tol: float | None = None,
    law_id: str = "r_1",
) -> VerificationReport:
    """Check ``K(K(m)) == m`` on ``n`` sampled states."""
    states = draw_samples(sampler, n, seed)
    for m in states:
        _check_member(K.space, m)
    if tol is None:
        tol = 0.0 if K.space.exact else FIXED_POINT_ATOL
    return VerificationReport.build(
        law_id, (K.space.distance(K(K(m)), m) for m in states), tol, seed
    )


def verify_orientation(
    K: Reversal, sampler: Sampler, n: int, *, seed: int = 0, law_id: str = "eq_1_0"
) -> VerificationReport:
    """Check that ``K`` swaps the two orientation classes and fixes ``N``.

    Each sample contributes a violation of 1 when either the orientation of
    ``K(m)`` is not the flipped orientation of ``m``, or ``orientation(m) ==
    FIXED`` disagrees with the fixed-set predicate.
    """
    if K.orientation is None:
        raise ReversalError(f"{K.name} carries no orientation")
    states = draw_samples(sampler, n, seed)

    def violation(m) -> int:
        o = K.orientation(m)
        bad = K.orientation(K(m)) != o.flipped()
        bad |= (o is Orientation.FIXED) != K.is_fixed(m)
        return int(bad)

    return VerificationReport.build(law_id, map(violation, states), 0.0, seed)


def _evaluate(dyn: Dynamics, t, m):
    if isinstance(dyn, Cascade):
        return dyn.at_time(t, m)
    if t < 0 and dyn.forward_only:
        raise IrreversibleDynamicsError("irreversible dynamics supplied")
    return dyn.at_time(t, m)


def verify_time_reversal(
    K: Reversal,
    dyn: Dynamics,
    sampler: Sampler,
    times: Sequence,
    tol: float,
    *,
    n: int = 100,
    seed: int = 0,
    law_id: str = "eq_1_5",
) -> VerificationReport:
    """Check ``K(S_t(K(m))) == S_{-t}(m)`` for every sample and every ``t``.

    A passing report means the dynamics is time-symmetric with respect to
    ``K`` on the tested set.
    """
    if not len(times):
        raise ValueError("times must be non-empty")
    if dyn.space.name != K.space.name:
        raise DomainError("domain mismatch: reversal and dynamics act on different spaces")
    if isinstance(dyn, Cascade) and dyn.inverse_step is None:
        raise IrreversibleDynamicsError("irreversible dynamics supplied")
    if isinstance(dyn, Flow) and dyn.forward_only:
        raise IrreversibleDynamicsError("irreversible dynamics supplied")
    states = draw_samples(sampler, n, seed)
    for m in states:
        _check_member(K.space, m)
    dist = K.space.distance

    def violations():
        for m in states:
            km = K(m)
            for t in times:
                yield dist(K(_evaluate(dyn, t, km)), _evaluate(dyn, -t, m))

    return VerificationReport.build(law_id, violations(), tol, seed)


def verify_flow_group_law(
    flow: Flow,
    sampler: Sampler,
    time_pairs: Sequence[tuple[float, float]],
    tol: float,
    *,
    n: int = 100,
    seed: int = 0,
    law_id: str = "flow_group_law",
) -> VerificationReport:
    """Check ``S_0 = id`` and ``S_s(S_t(m)) = S_{s+t}(m)`` within ``tol``."""
    states = draw_samples(sampler, n, seed)
    dist = flow.space.distance

    def violations():
        for m in states:
            yield dist(flow.at_time(0.0, m), m)
            for s, t in time_pairs:
                yield dist(flow.at_time(s, flow.at_time(t, m)), flow.at_time(s + t, m))

    return VerificationReport.build(law_id, violations(), tol, seed)


def verify_cascade_inverse(
    dyn: Cascade, sampler: Sampler, n: int, *, seed: int = 0, law_id: str = "cascade_inverse"
) -> VerificationReport:
    """Check that ``step`` and ``inverse_step`` are mutually inverse."""
    if dyn.inverse_step is None:
        raise IrreversibleDynamicsError("irreversible dynamics supplied")
    states = draw_samples(sampler, n, seed)
    dist = dyn.space.distance
    tol = 0.0 if dyn.space.exact else FIXED_POINT_ATOL

    def violations():
        for m in states:
            yield dist(dyn.step(dyn.inverse_step(m)), m)
            yield dist(dyn.inverse_step(dyn.step(m)), m)

    return VerificationReport.build(law_id, violations(), tol, seed)


def verify_morphism(
    f: Callable[[Any], Any],
    sysA: Reversal,
    sysB: Reversal,
    sampler: Sampler,
    tol: float | None = None,
    *,
    n: int = 100,
    seed: int = 0,
    law_id: str = "eq_1_6",
) -> VerificationReport:
    """Check the intertwining law ``f(K_A(m)) == K_B(f(m))``."""
    states = draw_samples(sampler, n, seed)
    if tol is None:
        tol = 0.0 if sysB.space.exact else FIXED_POINT_ATOL

    def violations():
        for m in states:
            _check_member(sysA.space, m)
            fm = f(m)
            if not sysB.space.contains(fm):
                raise DomainError(f"codomain mismatch: image is not a state of {sysB.space.name}")
            yield sysB.space.distance(f(sysA(m)), sysB(fm))

    return VerificationReport.build(law_id, violations(), tol, seed)


def compose(g: Callable[[Any], Any], f: Callable[[Any], Any]) -> Callable[[Any], Any]:
    """``g o f``."""
    return lambda m: g(f(m))


def measure_fixed_fraction(K: Reversal, sampler: Sampler, n: int, *, seed: int = 0) -> float:
    """Fraction of sampled states lying in the fixed set of ``K``."""
    states = draw_samples(sampler, n, seed)
    return sum(1 for m in states if K.is_fixed(m)) / len(states)


# ---------------------------------------------------------------------------
# the real line


def _is_real(m) -> bool:
    return isinstance(m, (int, float, np.floating, np.integer)) and math.isfinite(m)


REAL_LINE = StateSpace("R", lambda a, b: abs(a - b), _is_real)


def _sign_orientation(v: float) -> Orientation:
    if abs(v) <= FIXED_POINT_ATOL:
        return Orientation.FIXED
    return Orientation.PLUS if v > 0 else Orientation.MINUS


def real_line_reversal() -> Reversal:
    return Reversal(
        REAL_LINE,
        lambda t: -t,
        fixed_predicate=lambda t: abs(t) <= FIXED_POINT_ATOL,
        orientation=_sign_orientation,
        probes=(1.0, -2.5),
        name="K_R",
    )


def real_translation(a: float) -> Flow:
    """Translations ``x -> x + t a``."""
    return Flow(REAL_LINE, lambda t, x: x + t * a, class_id=f"translation[a={a}]")


# ---------------------------------------------------------------------------
# Minkowski space-time, coordinates (ct, x, y, z)


def _is_event(m) -> bool:
    arr = np.asarray(m, dtype=float)
    return arr.shape == (4,) and bool(np.all(np.isfinite(arr)))


MINKOWSKI = StateSpace(
    "R^{1,3}",
    lambda a, b: float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)))),
    _is_event,
)


def _time_flip(m) -> np.ndarray:
    out = np.array(m, dtype=float)
    out[0] = -out[0]
    return out


def minkowski_reversal() -> Reversal:
    return Reversal(
        MINKOWSKI,
        _time_flip,
        fixed_predicate=lambda m: abs(m[0]) <= FIXED_POINT_ATOL,
        orientation=lambda m: _sign_orientation(m[0]),
        probes=(np.array([1.0, 0.0, 0.0, 0.0]),),
        name="K_Minkowski",
    )


def minkowski_translation(a0: float) -> Flow:
    if a0 == 0:
        raise ValueError("temporal translations need a0 != 0")
    A = np.array([a0, 0.0, 0.0, 0.0])
    return Flow(MINKOWSKI, lambda t, X: np.asarray(X, float) + t * A, class_id=f"temporal[a0={a0}]")
