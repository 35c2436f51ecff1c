"""Canonical phase space ``T*(R^n)`` and its momentum-flip reversal.

In canonical coordinates ``(q, p)``:

* ``K(q, p) = (q, -p)`` with fixed set the zero section ``p = 0``;
* ``omega(X, Y) = sum_i dq_i dp'_i - dp_i dq'_i``;
* ``J(dq, dp) = (-dp, dq)``, so that ``omega(d/dq_i, J d/dq_i) = 1``;
* ``g(X, Y) = -omega(X, J Y) = -(dq . dq' + dp . dp')``.

With these conventions ``g`` is negative definite.  Only its invariance
under ``K`` is checked, not its sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence

import numpy as np

from .core import (
    FIXED_POINT_ATOL,
    Flow,
    Orientation,
    Reversal,
    StateSpace,
    VerificationReport,
)

__all__ = [
    "PhasePoint",
    "TangentVector",
    "CanonicalStructures",
    "HamiltonianFlow",
    "phase_space",
    "phase_reversal",
    "reversal_K",
    "pushforward_K",
    "omega",
    "apply_J",
    "metric_g",
    "random_phase_point",
    "random_tangent",
    "check_sr",
    "check_cr",
    "check_isometry",
    "check_j_compatibility",
    "check_flow_reversal",
]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, ndmin=1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        q, p = _frozen(self.q), _frozen(self.p)
        if q.ndim != 1 or q.shape != p.shape or q.size < 1:
            raise ValueError("q and p must be vectors of the same length n >= 1")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("phase point entries must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p)

    __hash__ = None

    def distance(self, other: PhasePoint) -> float:
        """Max-norm distance."""
        return float(max(np.max(np.abs(self.q - other.q)), np.max(np.abs(self.p - other.p))))


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: PhasePoint
    dq: np.ndarray
    dp: np.ndarray

    def __post_init__(self) -> None:
        dq, dp = _frozen(self.dq), _frozen(self.dp)
        if dq.shape != (self.base.n,) or dp.shape != (self.base.n,):
            raise ValueError("tangent components must match the base dimension")
        if not (np.all(np.isfinite(dq)) and np.all(np.isfinite(dp))):
            raise ValueError("tangent entries must be finite")
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "dp", dp)

    def _same_base(self, other: TangentVector) -> None:
        if not self.base == other.base:
            raise ValueError("tangent vectors live at different base points")

    def __add__(self, other: TangentVector) -> TangentVector:
        self._same_base(other)
        return TangentVector(self.base, self.dq + other.dq, self.dp + other.dp)

    def __neg__(self) -> TangentVector:
        return TangentVector(self.base, -self.dq, -self.dp)

    def __mul__(self, c: float) -> TangentVector:
        return TangentVector(self.base, c * self.dq, c * self.dp)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, TangentVector):
            return NotImplemented
        return (
            self.base == other.base
            and np.array_equal(self.dq, other.dq)
            and np.array_equal(self.dp, other.dp)
        )

    __hash__ = None

    def distance(self, other: TangentVector) -> float:
        return float(max(np.max(np.abs(self.dq - other.dq)), np.max(np.abs(self.dp - other.dp))))


def phase_space(n: int) -> StateSpace:
    return StateSpace(
        f"T*R^{n}",
        lambda a, b: a.distance(b),
        lambda m: isinstance(m, PhasePoint) and m.n == n,
    )


def reversal_K(m: PhasePoint) -> PhasePoint:
    return PhasePoint(m.q, -m.p)


def phase_reversal(n: int) -> Reversal:
    """The momentum flip as a :class:`Reversal`; oriented by the sign of ``p_1``.

    The fixed set is the zero section.  For ``n = 1`` the complement has the
    two components ``p > 0`` and ``p < 0``; for ``n > 1`` the complement is
    connected and the orientation is only the half-space coloring by ``p_1``.
    """
    def orient(m: PhasePoint) -> Orientation:
        if np.max(np.abs(m.p)) <= FIXED_POINT_ATOL:
            return Orientation.FIXED
        lead = m.p[np.flatnonzero(np.abs(m.p) > FIXED_POINT_ATOL)[0]]
        return Orientation.PLUS if lead > 0 else Orientation.MINUS

    return Reversal(
        phase_space(n),
        reversal_K,
        fixed_predicate=lambda m: float(np.max(np.abs(m.p))) <= FIXED_POINT_ATOL,
        orientation=orient,
        probes=(PhasePoint(np.zeros(n), np.ones(n)),),
        name=f"K_T*R^{n}",
    )


def pushforward_K(X: TangentVector) -> TangentVector:
    """Differential of ``K``: horizontal part kept, vertical part negated."""
    return TangentVector(reversal_K(X.base), X.dq, -X.dp)


def omega(X: TangentVector, Y: TangentVector) -> float:
    X._same_base(Y)
    return float(np.dot(X.dq, Y.dp) - np.dot(X.dp, Y.dq))


def apply_J(X: TangentVector) -> TangentVector:
    return TangentVector(X.base, -X.dp, X.dq)


def metric_g(X: TangentVector, Y: TangentVector) -> float:
    return -omega(X, apply_J(Y))


@dataclass(frozen=True)
class CanonicalStructures:
    """Bundles ``omega``, ``J`` and ``g`` on ``T*(R^n)``."""

    n: int
    omega: Callable[[TangentVector, TangentVector], float] = omega
    J: Callable[[TangentVector], TangentVector] = apply_J
    g: Callable[[TangentVector, TangentVector], float] = metric_g

    def omega_matrix(self) -> np.ndarray:
        """Matrix of ``omega`` in the basis ``(d/dq_1..n, d/dp_1..n)``."""
        n = self.n
        basis = self._basis()
        return np.array([[self.omega(a, b) for b in basis] for a in basis]).reshape(2 * n, 2 * n)

    def _basis(self) -> list[TangentVector]:
        n = self.n
        base = PhasePoint(np.zeros(n), np.zeros(n))
        eye = np.eye(n)
        return [TangentVector(base, eye[i], np.zeros(n)) for i in range(n)] + [
            TangentVector(base, np.zeros(n), eye[i]) for i in range(n)
        ]

    def is_nondegenerate(self) -> bool:
        return abs(np.linalg.det(self.omega_matrix())) > 0.5


def random_phase_point(rng: np.random.Generator, n: int, scale: float = 1.0) -> PhasePoint:
    return PhasePoint(scale * rng.standard_normal(n), scale * rng.standard_normal(n))


def random_tangent(rng: np.random.Generator, base: PhasePoint) -> TangentVector:
    return TangentVector(base, rng.standard_normal(base.n), rng.standard_normal(base.n))


def _random_pairs(n: int, samples: int, seed: int) -> Iterable[tuple[TangentVector, TangentVector]]:
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        m = random_phase_point(rng, n)
        yield random_tangent(rng, m), random_tangent(rng, m)


def check_sr(n: int, samples: int = 1000, tol: float = 1e-12, seed: int = 0,
             law_id: str = "eq_2_10") -> VerificationReport:
    """Anti-invariance of the symplectic form: ``omega(K_*X, K_*Y) = -omega(X, Y)``."""
    return VerificationReport.build(
        law_id,
        (abs(omega(pushforward_K(X), pushforward_K(Y)) + omega(X, Y))
         for X, Y in _random_pairs(n, samples, seed)),
        tol,
        seed,
    )


def check_cr(n: int, samples: int = 1000, tol: float = 1e-12, seed: int = 0,
             law_id: str = "eq_1_1") -> VerificationReport:
    """Anticommutation ``K_* J = -J K_*`` checked componentwise."""

    def violation(X: TangentVector) -> float:
        lhs = pushforward_K(apply_J(X))
        rhs = apply_J(pushforward_K(X))
        return float(max(np.max(np.abs(lhs.dq + rhs.dq)), np.max(np.abs(lhs.dp + rhs.dp))))

    return VerificationReport.build(
        law_id, (violation(X) for X, _ in _random_pairs(n, samples, seed)), tol, seed
    )


def check_isometry(n: int, samples: int = 1000, tol: float = 1e-12, seed: int = 0,
                   law_id: str = "eq_1_3") -> VerificationReport:
    """Invariance of the metric ``g(K_*X, K_*Y) = g(X, Y)``."""
    return VerificationReport.build(
        law_id,
        (abs(metric_g(pushforward_K(X), pushforward_K(Y)) - metric_g(X, Y))
         for X, Y in _random_pairs(n, samples, seed)),
        tol,
        seed,
    )


def check_j_compatibility(n: int, samples: int = 1000, tol: float = 1e-12, seed: int = 0,
                          law_id: str = "eq_2_10_1") -> VerificationReport:
    """``J^2 = -I``, ``omega(JX, JY) = omega(X, Y)`` and symmetry of ``g``."""

    def violations():
        for X, Y in _random_pairs(n, samples, seed):
            JJX = apply_J(apply_J(X))
            yield JJX.distance(-X)
            yield abs(omega(apply_J(X), apply_J(Y)) - omega(X, Y))
            yield abs(metric_g(X, Y) - metric_g(Y, X))

    return VerificationReport.build(law_id, violations(), tol, seed)


FlowKind = Literal["harmonic_oscillator", "free_particle"]


@dataclass(frozen=True)
class HamiltonianFlow:
    """Closed-form Hamiltonian flows on ``T*(R^n)`` plus a leapfrog integrator.

    ``harmonic_oscillator``: ``H = |p|^2 / 2m + m w^2 |q|^2 / 2``.
    ``free_particle``: ``H = |p|^2 / 2m``.
    """

    kind: FlowKind
    mass: float = 1.0
    frequency: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("harmonic_oscillator", "free_particle"):
            raise ValueError(f"unsupported flow kind {self.kind!r}")
        if self.mass <= 0 or self.frequency <= 0:
            raise ValueError("mass and frequency must be positive")

    def force(self, q: np.ndarray) -> np.ndarray:
        if self.kind == "free_particle":
            return np.zeros_like(q)
        return -self.mass * self.frequency**2 * q

    def evolve_arrays(self, t: float, q: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Closed-form ``S_t`` applied elementwise to coordinate arrays."""
        if self.kind == "free_particle":
            return q + t * p / self.mass, p
        w, mass = self.frequency, self.mass
        c, s = math.cos(w * t), math.sin(w * t)
        return q * c + p * (s / (mass * w)), p * c - q * (mass * w * s)

    def exact_at(self, t: float, m: PhasePoint) -> PhasePoint:
        return PhasePoint(*self.evolve_arrays(t, m.q, m.p))

    def leapfrog_arrays(
        self, q: np.ndarray, p: np.ndarray, dt: float, steps: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """Kick-drift-kick velocity Verlet, elementwise; a negative ``dt`` runs backwards."""
        half = 0.5 * dt
        for _ in range(steps):
            p = p + half * self.force(q)
            q = q + dt * p / self.mass
            p = p + half * self.force(q)
        return q, p

    def leapfrog_at(self, m: PhasePoint, dt: float, steps: int) -> PhasePoint:
        return PhasePoint(*self.leapfrog_arrays(m.q, m.p, dt, steps))

    def as_flow(self, n: int) -> Flow:
        return Flow(phase_space(n), self.exact_at, class_id=self.kind)

    def leapfrog_flow(self, n: int, dt: float) -> Flow:
        """The integrator as a flow on multiples of ``dt``."""

        def at_time(t: float, m: PhasePoint) -> PhasePoint:
            steps = round(abs(t) / dt)
            return self.leapfrog_at(m, math.copysign(dt, t), steps)

        return Flow(phase_space(n), at_time, class_id=f"{self.kind}[leapfrog dt={dt}]")


def check_flow_reversal(
    flow: HamiltonianFlow,
    mode: Literal["exact", "leapfrog"] = "exact",
    times: Sequence[float] = (0.1, -0.1, 1.0, -1.0, math.pi, -math.pi),
    samples: int = 100,
    tol: float = 1e-12,
    *,
    n: int = 1,
    dt: float = 1e-3,
    seed: int = 0,
    law_id: str | None = None,
) -> VerificationReport:
    """Max distance between ``K(S_t(K(m)))`` and ``S_{-t}(m)``.

    In ``leapfrog`` mode ``S_t`` is ``round(|t| / dt)`` integrator steps of
    signed size ``dt``.
    """
    if mode == "exact":
        evolve = flow.evolve_arrays
    elif mode == "leapfrog":
        def evolve(t, q, p):
            return flow.leapfrog_arrays(q, p, math.copysign(dt, t), round(abs(t) / dt))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    states = [random_phase_point(rng, n) for _ in range(samples)]
    # one row per sample; every map acts row-wise
    Q = np.array([m.q for m in states])
    P = np.array([m.p for m in states])

    def violations():
        for t in times:
            kq, kp = evolve(t, Q, -P)
            bq, bp = evolve(-t, Q, P)
            dist = np.maximum(np.abs(kq - bq).max(axis=1), np.abs(-kp - bp).max(axis=1))
            yield from dist.tolist()

    law = law_id or f"eq_1_5_{flow.kind}_{mode}"
    return VerificationReport.build(law, violations(), tol, seed)
