"""Baker's transformation, its diagonal-flip reversal and the aging operator.

The baker map doubles ``x`` and halves ``y``::

    S(x, y) = (2x, y/2)             for 0 <= x < 1/2
    S(x, y) = (2x - 1, y/2 + 1/2)   for 1/2 <= x < 1

Branches use half-open cells, which only moves null sets.  On dyadic points
everything is exact.  Grid-wide enumerations run on integer arrays holding
``x * 2**D`` and ``y * 2**D`` for a common ``D`` large enough that no halving
ever drops a bit; that kernel is cross-checked against the
:class:`~revstruct.exactnum.Dyadic` maps.

Observables ``theta_F`` are indexed by finite sets ``F`` of integers::

    theta_0 = +1 on A = [0, 1/2) x [0, 1), -1 on the right half B
    theta_n = theta_0 o S^{-n}
    theta_F = prod_{n in F} theta_n

``theta_n`` for ``n >= 1`` reads the ``n``-th binary digit of ``y`` (horizontal
fringes); for ``n <= 0`` it reads digit ``1 - n`` of ``x`` (vertical fringes).
They are an orthonormal eigenbasis of the aging operator, ``T theta_F =
(max F) theta_F``, and the Koopman operator shifts indices, ``U_t theta_F =
theta_{F+t}``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .bernoulli import BernoulliScheme, Cylinder, measure, reverse, shift
from .core import Cascade, Reversal, StateSpace, VerificationReport
from .exactnum import Dyadic, TorusPoint, WindowError, encode

__all__ = [
    "HALF",
    "TORUS",
    "baker_step",
    "baker_inverse",
    "torus_reversal",
    "baker_cascade",
    "baker_reversal",
    "step_scaled",
    "inverse_scaled",
    "grid_arrays",
    "check_baker_reversal",
    "check_measure_preservation",
    "conjugacy_check",
    "ThetaFunction",
    "theta_eval",
    "theta_digit_eval",
    "theta_grid",
    "AgingOperator",
    "koopman_on_theta",
    "reversal_on_theta",
    "check_aging_eigen",
    "check_aging_shift",
    "imprimitivity_check",
    "check_imprimitivity",
    "check_projectors",
    "check_theta_orthonormality",
    "check_koopman_pointwise",
    "check_reversal_on_theta",
    "check_theta_reversal_conjugation",
    "MAX_FRAME_EXPONENT",
    "partition_frame",
    "theta_frame",
    "check_frame_transpose",
]

HALF = Dyadic(1, 1)


def baker_step(m: TorusPoint) -> TorusPoint:
    x, y = m.x, m.y
    if x < HALF:
        return TorusPoint(x.double(), y.halve())
    return TorusPoint(x.double() - 1, y.halve() + HALF)


def baker_inverse(m: TorusPoint) -> TorusPoint:
    x, y = m.x, m.y
    if y < HALF:
        return TorusPoint(x.halve(), y.double())
    return TorusPoint((x + 1).halve(), y.double() - 1)


def torus_reversal(m: TorusPoint) -> TorusPoint:
    """``K[x, y] = [y, x]``; its fixed set is the projected diagonal."""
    return TorusPoint(m.y, m.x)


TORUS = StateSpace(
    "T^2",
    lambda a, b: 0 if a == b else 1,
    lambda m: isinstance(m, TorusPoint),
    exact=True,
)


def baker_cascade() -> Cascade:
    return Cascade(TORUS, baker_step, baker_inverse, name="baker")


def baker_reversal() -> Reversal:
    return Reversal(
        TORUS,
        torus_reversal,
        fixed_predicate=lambda m: m.x == m.y,
        probes=(TorusPoint(Dyadic(1, 2), Dyadic(3, 2)),),
        name="K_torus",
    )


# ---------------------------------------------------------------------------
# fixed-denominator integer kernel


def step_scaled(X: np.ndarray, Y: np.ndarray, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Baker step on numerators over ``2**D``; raises if a halving would round."""
    if np.any(Y & 1):
        raise OverflowError(f"denominator 2**{D} too small for this orbit")
    b = X >> (D - 1)
    return 2 * X - (b << D), (Y >> 1) + (b << (D - 1))


def inverse_scaled(X: np.ndarray, Y: np.ndarray, D: int) -> tuple[np.ndarray, np.ndarray]:
    if np.any(X & 1):
        raise OverflowError(f"denominator 2**{D} too small for this orbit")
    b = Y >> (D - 1)
    return (X >> 1) + (b << (D - 1)), 2 * Y - (b << D)


def grid_arrays(exponent: int, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Numerators over ``2**D`` of every grid point ``(i, j) / 2**exponent``.

    Arrays are flattened with ``x`` as the slow index.
    """
    if D < exponent:
        raise ValueError("D must be at least the grid exponent")
    side = 1 << exponent
    if D <= 61:
        k = np.arange(side, dtype=np.int64) << (D - exponent)
    else:
        k = np.array([i << (D - exponent) for i in range(side)], dtype=object)
    X = np.repeat(k, side)
    Y = np.tile(k, side)
    return X, Y


def _to_point(X: int, Y: int, D: int) -> TorusPoint:
    return TorusPoint(Dyadic(int(X), D), Dyadic(int(Y), D))


def _cross_validate_kernel(X, Y, D: int, steps: int, rng: np.random.Generator, k: int = 16) -> None:
    """Compare a few kernel orbits with the Dyadic maps; raise on disagreement."""
    idx = rng.choice(len(X), size=min(k, len(X)), replace=False)
    fx, fy = X[idx], Y[idx]
    bx, by = X[idx], Y[idx]
    pts = [_to_point(a, b, D) for a, b in zip(fx, fy)]
    fwd = list(pts)
    bwd = list(pts)
    for _ in range(steps):
        fx, fy = step_scaled(fx, fy, D)
        bx, by = inverse_scaled(bx, by, D)
        fwd = [baker_step(m) for m in fwd]
        bwd = [baker_inverse(m) for m in bwd]
        if [_to_point(a, b, D) for a, b in zip(fx, fy)] != fwd:
            raise AssertionError("integer kernel disagrees with baker_step")
        if [_to_point(a, b, D) for a, b in zip(bx, by)] != bwd:
            raise AssertionError("integer kernel disagrees with baker_inverse")


def check_baker_reversal(
    t_max: int = 20, grid_exponent: int = 8, *, seed: int = 0, law_id: str = "eq_5_3"
) -> VerificationReport:
    """``K(S^t(K(m))) == S^{-t}(m)`` for every grid point and ``0 < |t| <= t_max``, exactly.

    A sample is a pair ``(m, t)``; its violation is 1 on mismatch.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    D = grid_exponent + t_max
    X, Y = grid_arrays(grid_exponent, D)
    _cross_validate_kernel(X, Y, D, t_max, np.random.default_rng(seed))
    # K swaps coordinates, so K(m) is (Y, X)
    fwd_K = (Y, X)      # S^t K m
    bwd_K = (Y, X)      # S^-t K m
    fwd = (X, Y)        # S^t m
    bwd = (X, Y)        # S^-t m
    mismatches = 0
    for _ in range(t_max):
        fwd_K = step_scaled(*fwd_K, D)
        bwd_K = inverse_scaled(*bwd_K, D)
        fwd = step_scaled(*fwd, D)
        bwd = inverse_scaled(*bwd, D)
        # K S^t K m == S^-t m  and  K S^-t K m == S^t m
        mismatches += int(np.count_nonzero((fwd_K[1] != bwd[0]) | (fwd_K[0] != bwd[1])))
        mismatches += int(np.count_nonzero((bwd_K[1] != fwd[0]) | (bwd_K[0] != fwd[1])))
    samples = len(X) * 2 * t_max
    worst = 1.0 if mismatches else 0.0
    return VerificationReport(law_id, samples, worst, 0.0, worst == 0.0, seed)


def check_measure_preservation(
    rect_exponent: int = 8, *, seed: int = 0, law_id: str = "eq_5_1_measure"
) -> VerificationReport:
    """Exact Lebesgue measure of ``S^{-1}(R)`` and ``S(R)`` for dyadic rectangles ``R``.

    For every rectangle of exponents ``(a, b)`` with ``a, b <= rect_exponent``
    the measure of its preimage (image) is the number of points of a fine
    grid that ``S`` (``S^{-1}``) sends into it, times the grid cell area.
    The fine grid resolves every such preimage, so the count is exact.
    Violation per rectangle shape is the largest ``|measure - area|``.
    """
    e = rect_exponent + 1
    D = e + 1
    X, Y = grid_arrays(e, D)
    total = len(X)
    images = [step_scaled(X, Y, D), inverse_scaled(X, Y, D)]

    def violations():
        for a in range(rect_exponent + 1):
            for b in range(rect_exponent + 1):
                area = Fraction(1, 1 << (a + b))
                worst = Fraction(0)
                for IX, IY in images:
                    cell = ((IX >> (D - a)) << b) | (IY >> (D - b))
                    counts = np.bincount(cell.astype(np.int64), minlength=1 << (a + b))
                    worst = max(
                        worst,
                        abs(Fraction(int(counts.min()), total) - area),
                        abs(Fraction(int(counts.max()), total) - area),
                    )
                yield worst

    return VerificationReport.build(law_id, violations(), 0.0, seed)


def _x_part_table(L: int) -> np.ndarray:
    """Encoded words of ``(x, 0)`` for every ``x`` of exponent ``L + 1``."""
    return np.array(
        [np.frombuffer(encode(TorusPoint(Dyadic(i, L + 1), 0), L).symbols, dtype=np.uint8)
         for i in range(1 << (L + 1))]
    )


def _y_part_table(L: int) -> np.ndarray:
    return np.array(
        [np.frombuffer(encode(TorusPoint(0, Dyadic(i, L)), L).symbols, dtype=np.uint8)
         for i in range(1 << L)]
    )


def rank_cylinders(lo: int, hi: int, max_rank: int, alphabet_size: int = 2) -> Iterator[Cylinder]:
    """Every cylinder with at most ``max_rank`` constraints on indices in ``[lo, hi]``."""
    idx = range(lo, hi + 1)
    for r in range(max_rank + 1):
        for js in itertools.combinations(idx, r):
            for ss in itertools.product(range(alphabet_size), repeat=r):
                yield Cylinder(tuple(zip(js, ss)))


def conjugacy_check(
    grid_exponent: int = 10,
    L: int | None = None,
    *,
    max_rank: int = 3,
    seed: int = 0,
    law_id: str = "eq_5_4",
) -> VerificationReport:
    """The binary coding is a morphism of abstract reversal systems.

    On every grid point ``m`` it checks, exactly and on common windows,

    * ``encode(S(m)) == shift(encode(m))``,
    * ``encode(K(m)) == reverse(encode(m))``;

    and on every cylinder of rank ``<= max_rank`` inside ``[-L, L]`` that the
    Lebesgue measure of its coding preimage equals its ``B(1/2, 1/2)``
    measure.  The preimage of a cylinder is a product of an ``x``-set and a
    ``y``-set; each factor's length is counted on the grid of cells on which
    the windowed digits are constant.  Any failure contributes violation 1.
    """
    if L is None:
        L = grid_exponent + 1
    if L < grid_exponent + 1:
        raise WindowError(f"window too small: grid exponent {grid_exponent} needs L >= {grid_exponent + 1}")
    xs = _x_part_table(L)
    ys = _y_part_table(L)
    D = grid_exponent + 1
    X, Y = grid_arrays(grid_exponent, D)

    def words(X, Y):
        # row k holds positions 0..2L of encode(point k)
        return np.concatenate([xs[X << (L + 1 - D)][:, : L + 1], ys[Y << (L - D)][:, L + 1 :]], axis=1)

    W = words(X, Y)
    WS = words(*step_scaled(X, Y, D))
    WK = words(Y, X)
    # shift(w)_j = w_{j-1} and reverse(w)_j = w_{1-j}; compare on [1-L, L]
    bad_shift = np.any(WS[:, 1:] != W[:, :-1], axis=1)
    bad_rev = np.any(WK[:, 1:] != W[:, 1:][:, ::-1], axis=1)
    violations = int(np.count_nonzero(bad_shift)) + int(np.count_nonzero(bad_rev))
    samples = len(X)

    # the same identities through the scalar maps and word operations
    rng = np.random.default_rng(seed)
    for k in rng.choice(len(X), size=min(len(X), 512), replace=False):
        m = _to_point(int(X[k]), int(Y[k]), D)
        w = encode(m, L)
        if not np.array_equal(np.frombuffer(w.symbols, dtype=np.uint8), W[k]):
            violations += 1
        if not encode(baker_step(m), L).agrees_with(shift(w)):
            violations += 1
        if not encode(torus_reversal(m), L).agrees_with(reverse(w)):
            violations += 1

    scheme = BernoulliScheme.uniform(2)
    nx, ny = len(xs), len(ys)
    for cyl in rank_cylinders(-L, L, max_rank):
        mx = np.ones(nx, dtype=bool)
        my = np.ones(ny, dtype=bool)
        for j, s in cyl.constraints:
            if j <= 0:
                mx &= xs[:, j + L] == s
            else:
                my &= ys[:, j + L] == s
        area = Fraction(int(mx.sum()), nx) * Fraction(int(my.sum()), ny)
        if area != measure(scheme, cyl):
            violations += 1
        samples += 1
    worst = 1.0 if violations else 0.0
    return VerificationReport(law_id, samples, worst, 0.0, worst == 0.0, seed)


# ---------------------------------------------------------------------------
# theta observables


def _as_index_set(F: Iterable[int]) -> frozenset[int]:
    F = frozenset(int(n) for n in F)
    if not F:
        raise ValueError("constant function excluded: F must be non-empty")
    return F


@dataclass(frozen=True)
class ThetaFunction:
    F: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "F", _as_index_set(self.F))

    @property
    def age(self) -> int:
        return max(self.F)

    def __call__(self, m: TorusPoint) -> int:
        return theta_eval(self.F, m)

    def resolution(self) -> tuple[int, int]:
        """Exponents ``(ex, ey)`` of dyadic rectangles on which ``theta_F`` is constant."""
        lo, hi = min(self.F), max(self.F)
        return (1 - lo if lo <= 0 else 0, hi if hi >= 1 else 0)


def _theta0(m: TorusPoint) -> int:
    return 1 if m.x < HALF else -1


def theta_eval(F: Iterable[int], m: TorusPoint) -> int:
    """``prod_{n in F} theta_0(S^{-n}(m))`` evaluated with the exact maps."""
    F = sorted(_as_index_set(F))
    lo = F[0]
    # walk the orbit S^{-lo}(m), S^{-lo-1}(m), ... once
    cur = m
    step = baker_inverse if lo >= 0 else baker_step
    for _ in range(abs(lo)):
        cur = step(cur)
    value = 1
    n = lo
    for target in F:
        while n < target:
            cur = baker_inverse(cur)
            n += 1
        value *= _theta0(cur)
    return value


def theta_digit_eval(F: Iterable[int], m: TorusPoint, L: int | None = None) -> int:
    """``(-1)^(sum of a_n over F)`` read off the binary coding of ``m``."""
    F = _as_index_set(F)
    if L is None:
        L = max(max(abs(n) for n in F) + 1, m.exponent)
    w = encode(m, L)
    return -1 if sum(w[n] for n in F) % 2 else 1


def theta_grid(F: Iterable[int], exponent: int) -> np.ndarray:
    """``theta_F`` sampled at the lower-left corners of the ``2**exponent`` grid.

    Returned as an int8 array indexed ``[i, j]`` with ``x = i / 2**exponent``
    and ``y = j / 2**exponent``.
    """
    F = sorted(_as_index_set(F))
    D = exponent + max(abs(F[0]), abs(F[-1])) + 1
    X, Y = grid_arrays(exponent, D)
    half = 1 << (D - 1)
    out = np.ones(len(X), dtype=np.int8)
    fx, fy = X, Y
    bx, by = X, Y
    table: dict[int, np.ndarray] = {0: X < half}
    for n in range(1, max(F[-1], 0) + 1):
        bx, by = inverse_scaled(bx, by, D)
        table[n] = bx < half
    for n in range(1, max(-F[0], 0) + 1):
        fx, fy = step_scaled(fx, fy, D)
        table[-n] = fx < half
    for n in F:
        out *= np.where(table[n], 1, -1).astype(np.int8)
    side = 1 << exponent
    return out.reshape(side, side)


def koopman_on_theta(F: Iterable[int], t: int, window: tuple[int, int] | None = None) -> frozenset[int]:
    """``U_t theta_F = theta_{F+t}``."""
    image = frozenset(n + t for n in _as_index_set(F))
    if window is not None and not all(window[0] <= n <= window[1] for n in image):
        raise WindowError(f"window overflow: {sorted(image)} leaves {window}")
    return image


def reversal_on_theta(F: Iterable[int], window: tuple[int, int] | None = None) -> frozenset[int]:
    """Index set of ``theta_F o K``: ``{1 - n : n in F}``."""
    image = frozenset(1 - n for n in _as_index_set(F))
    if window is not None and not all(window[0] <= n <= window[1] for n in image):
        raise WindowError(f"window overflow: {sorted(image)} leaves {window}")
    return image


Vector = Mapping[frozenset, Fraction]


@dataclass(frozen=True)
class AgingOperator:
    """The aging operator on the span of ``theta_F``, ``F`` in ``[-L, L]``, ``|F| <= cap``.

    Represented spectrally: ``P_s`` projects onto ``span{theta_F : max F = s}``,
    ``E_s = sum_{s' <= s} P_{s'}`` and ``T = sum_s s P_s``.  Vectors are
    mappings from index sets to exact coefficients; the basis is orthonormal.
    """

    L: int = 8
    cap: int = 3
    basis: tuple[frozenset, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        idx = range(-self.L, self.L + 1)
        basis = tuple(
            frozenset(c) for r in range(1, self.cap + 1) for c in itertools.combinations(idx, r)
        )
        object.__setattr__(self, "basis", basis)

    @property
    def window(self) -> tuple[int, int]:
        return (-self.L, self.L)

    def in_window(self, F: Iterable[int]) -> bool:
        F = frozenset(F)
        return bool(F) and len(F) <= self.cap and all(-self.L <= n <= self.L for n in F)

    def _require(self, F) -> frozenset:
        F = frozenset(F)
        if not self.in_window(F):
            raise WindowError(f"{sorted(F)} is outside the basis window")
        return F

    def eigenvalue(self, F: Iterable[int]) -> int:
        return max(self._require(F))

    def spectrum(self) -> list[int]:
        return sorted({max(F) for F in self.basis})

    def projector(self, s: int, v: Vector) -> dict:
        return {F: c for F, c in v.items() if max(self._require(F)) == s}

    def spectral_family(self, s: int, v: Vector) -> dict:
        """``E_s v``: components with ``max F <= s``."""
        return {F: c for F, c in v.items() if max(self._require(F)) <= s}

    def apply(self, v: Vector) -> dict:
        """``T v = sum_s s P_s v``."""
        out: dict = {}
        for s in self.spectrum():
            for F, c in self.projector(s, v).items():
                if s * c:
                    out[F] = out.get(F, 0) + s * c
        return out

    def koopman(self, t: int, v: Vector) -> dict:
        """``U_t v``; raises if an index leaves the window."""
        return {koopman_on_theta(F, t, self.window): c for F, c in v.items()}

    def aging_apply(self, F: Iterable[int]) -> tuple[int, frozenset]:
        F = self._require(F)
        return max(F), F


def _basis_vec(F: frozenset) -> dict:
    return {F: Fraction(1)}


def _scaled(v: Vector, c) -> dict:
    return {F: c * x for F, x in v.items() if c * x}


def _added(a: Vector, b: Vector) -> dict:
    out = dict(a)
    for F, c in b.items():
        out[F] = out.get(F, 0) + c
    return {F: c for F, c in out.items() if c}


def _widened(T: AgingOperator, margin: int) -> AgingOperator:
    return _aging_operator(T.L + margin, T.cap) if margin else T


@functools.lru_cache(maxsize=32)
def _aging_operator(L: int, cap: int) -> AgingOperator:
    return AgingOperator(L, cap)


def check_aging_eigen(T: AgingOperator, *, law_id: str = "eq_5_8") -> VerificationReport:
    """``T theta_F = (max F) theta_F`` for every basis element (0/1 violations)."""
    return VerificationReport.build(
        law_id,
        (int(T.apply(_basis_vec(F)) != _scaled(_basis_vec(F), max(F))) for F in T.basis),
        0.0,
    )


def check_aging_shift(
    T: AgingOperator, ts: Sequence[int] = (1,), *, law_id: str = "eq_2_24"
) -> VerificationReport:
    """``U_{-t} T U_t = T + t`` on every basis element.

    ``U_t v`` generally leaves the window, so the left side is evaluated in
    a window widened by ``max |t|``.
    """
    wide = _widened(T, max(abs(t) for t in ts))

    def violations():
        for t in ts:
            for F in T.basis:
                v = _basis_vec(F)
                lhs = wide.koopman(-t, wide.apply(wide.koopman(t, v)))
                rhs = _added(T.apply(v), _scaled(v, t))
                yield int(lhs != rhs)

    return VerificationReport.build(law_id, violations(), 0.0)


def imprimitivity_check(
    T: AgingOperator, s: int, t: int, *, law_id: str = "eq_2_22"
) -> VerificationReport:
    """``E_{s+t} = U_t E_s U_t^{-1}`` on every basis element.

    The right side is evaluated in a window widened by ``|t|``.
    """
    lo, hi = T.window
    for value in (s, t, s + t):
        if not lo <= value <= hi:
            raise WindowError(f"window overflow: {value} outside {T.window}")
    wide = _widened(T, abs(t))

    def violations():
        for F in T.basis:
            v = _basis_vec(F)
            lhs = T.spectral_family(s + t, v)
            rhs = wide.koopman(t, wide.spectral_family(s, wide.koopman(-t, v)))
            yield int(lhs != rhs)

    return VerificationReport.build(law_id, violations(), 0.0)


def check_imprimitivity(T: AgingOperator, *, law_id: str = "eq_2_22") -> VerificationReport:
    """:func:`imprimitivity_check` merged over every admissible ``(s, t)``."""
    lo, hi = T.window
    report = None
    for s in range(lo, hi + 1):
        for t in range(lo, hi + 1):
            if not lo <= s + t <= hi:
                continue
            r = imprimitivity_check(T, s, t, law_id=law_id)
            report = r if report is None else report.merge(r)
    return report


def check_projectors(T: AgingOperator, *, law_id: str = "eq_2_23") -> VerificationReport:
    """Spectral projectors are idempotent, mutually orthogonal and resolve the identity.

    Also checks that ``E_s`` is the identity on the basis once ``s`` reaches
    the top of the window.
    """
    spectrum = T.spectrum()

    def violations():
        for F in T.basis:
            v = _basis_vec(F)
            total: dict = {}
            for s in spectrum:
                ps = T.projector(s, v)
                yield int(T.projector(s, ps) != ps)
                for r in spectrum:
                    if r != s:
                        yield int(T.projector(r, ps) != {})
                total = _added(total, ps)
            yield int(total != v)
            yield int(T.spectral_family(T.L, v) != v)

    return VerificationReport.build(law_id, violations(), 0.0)


def check_theta_orthonormality(
    lo: int = -4, hi: int = 4, cap: int = 2, *, law_id: str = "theta_orthonormality"
) -> VerificationReport:
    """Exact ``integral theta_F theta_G = [F == G]`` over the unit square.

    All ``theta_F`` with ``F`` in ``[lo, hi]``, ``|F| <= cap``, are constant on
    the cells of one common dyadic partition; the integral is the rational
    cell-weighted sum of the product.  Values of each ``theta_n`` on the cells
    come from :func:`theta_eval` at the cells' lower-left corners.
    """
    ex = 1 - lo if lo <= 0 else 0
    ey = hi if hi >= 1 else 0
    cells = [TorusPoint(Dyadic(i, ex), Dyadic(j, ey)) for i in range(1 << ex) for j in range(1 << ey)]
    singles = {n: np.array([theta_eval({n}, m) for m in cells], dtype=np.int64) for n in range(lo, hi + 1)}
    sets = [
        frozenset(c) for r in range(1, cap + 1) for c in itertools.combinations(range(lo, hi + 1), r)
    ]
    values = {}
    for F in sets:
        v = np.ones(len(cells), dtype=np.int64)
        for n in F:
            v = v * singles[n]
        values[F] = v
    ncells = len(cells)

    def violations():
        for F in sets:
            for G in sets:
                integral = Fraction(int(np.dot(values[F], values[G])), ncells)
                yield abs(integral - (1 if F == G else 0))

    return VerificationReport.build(law_id, violations(), 0.0)


def _small_sets(lo: int, hi: int, cap: int) -> list[frozenset]:
    return [frozenset(c) for r in range(1, cap + 1) for c in itertools.combinations(range(lo, hi + 1), r)]


def _theta_table(points: list[TorusPoint], lo: int, hi: int) -> dict[int, np.ndarray]:
    """``theta_n`` at every point for ``lo <= n <= hi``, one exact orbit walk per point."""
    table = {n: np.empty(len(points), dtype=np.int64) for n in range(lo, hi + 1)}
    for k, m in enumerate(points):
        cur = m
        for n in range(0, lo - 1, -1):
            if n <= hi:
                table[n][k] = _theta0(cur)
            cur = baker_step(cur)
        cur = m
        for n in range(0, hi + 1):
            if n >= lo:
                table[n][k] = _theta0(cur)
            cur = baker_inverse(cur)
    return table


def check_koopman_pointwise(
    lo: int = -4, hi: int = 4, cap: int = 2, exponent: int = 6, *, law_id: str = "eq_5_6"
) -> VerificationReport:
    """``theta_F o S^{-1} == theta_{F+1}`` pointwise on every grid point, exactly.

    Evaluates :func:`theta_eval` with the exact maps, so this ties the index
    shift of :func:`koopman_on_theta` to the dynamics.
    """
    pts = list(_grid(exponent))
    at_pts = _theta_table(pts, lo, hi + 1)
    at_pre = _theta_table([baker_inverse(m) for m in pts], lo, hi)

    def product(table, F):
        v = np.ones(len(pts), dtype=np.int64)
        for n in F:
            v = v * table[n]
        return v

    def violations():
        for F in _small_sets(lo, hi, cap):
            G = koopman_on_theta(F, 1)
            yield int(np.count_nonzero(product(at_pre, F) != product(at_pts, G)))

    return VerificationReport.build(law_id, violations(), 0.0)


def _grid(exponent: int) -> Iterator[TorusPoint]:
    side = 1 << exponent
    for i in range(side):
        for j in range(side):
            yield TorusPoint(Dyadic(i, exponent), Dyadic(j, exponent))


def check_reversal_on_theta(
    lo: int = -4, hi: int = 4, cap: int = 2, exponent: int = 8, *, law_id: str = "theta_reversal"
) -> VerificationReport:
    """``theta_{1-F}(m) == theta_F(K(m))`` on every grid point of ``exponent``, exactly.

    The grid is sampled through the integer kernel (:func:`theta_grid`); on the
    array, ``K`` is the transpose.  A spot check against :func:`theta_eval`
    guards the kernel.
    """
    rng = np.random.default_rng(0)
    side = 1 << exponent

    def violations():
        for F in _small_sets(lo, hi, cap):
            G = reversal_on_theta(F)
            lhs = theta_grid(G, exponent)
            rhs = theta_grid(F, exponent).T
            bad = int(np.count_nonzero(lhs != rhs))
            for i, j in rng.integers(0, side, size=(4, 2)):
                m = TorusPoint(Dyadic(int(i), exponent), Dyadic(int(j), exponent))
                bad += theta_eval(G, m) != lhs[i, j]
                bad += theta_eval(F, torus_reversal(m)) != rhs[i, j]
            yield bad

    return VerificationReport.build(law_id, violations(), 0.0)


def check_theta_reversal_conjugation(
    T: AgingOperator, *, law_id: str = "eq_5_3_theta"
) -> VerificationReport:
    """On index sets: ``R(U_1(R(F))) == U_{-1}(F)`` and the age map ``max R(F) = 1 - min F``."""

    def violations():
        for F in T.basis:
            yield int(reversal_on_theta(koopman_on_theta(reversal_on_theta(F), 1)) != koopman_on_theta(F, -1))
            yield int(max(reversal_on_theta(F)) != 1 - min(F))
            yield int(reversal_on_theta(reversal_on_theta(F)) != F)

    return VerificationReport.build(law_id, violations(), 0.0)


# ---------------------------------------------------------------------------
# raster frames

MAX_FRAME_EXPONENT = 10


def _center_arrays(k: int, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Numerators over ``2**D`` of the pixel centers; row index is ``y``, column is ``x``."""
    side = 1 << k
    shift = D - k - 1
    if D <= 61:
        c = (2 * np.arange(side, dtype=np.int64) + 1) << shift
    else:
        c = np.array([(2 * i + 1) << shift for i in range(side)], dtype=object)
    return np.tile(c, side), np.repeat(c, side)


def _orbit(X, Y, D: int, t: int):
    move = step_scaled if t > 0 else inverse_scaled
    for _ in range(abs(t)):
        X, Y = move(X, Y, D)
    return X, Y


def _check_frame_exponent(k: int) -> None:
    if not 0 <= k <= MAX_FRAME_EXPONENT:
        raise ValueError(f"resolution exponent must be in [0, {MAX_FRAME_EXPONENT}]")


def partition_frame(t: int, k: int, *, conjugated: bool = False) -> np.ndarray:
    """``2**k x 2**k`` image of ``S^t(A)``, ``A = {x < 1/2}``, as 255 (inside) / 0.

    With ``conjugated`` the partition is ``K(A) = {y < 1/2}`` instead.  Pixels
    are sampled at their centers; ``frame[r, c]`` is the pixel at
    ``x = (c + 1/2) / 2**k``, ``y = (r + 1/2) / 2**k``, so ``K`` acts on
    frames as the transpose.
    """
    _check_frame_exponent(k)
    side = 1 << k
    D = k + 1 + abs(t)
    X, Y = _orbit(*_center_arrays(k, D), D, -t)
    coord = Y if conjugated else X
    inside = coord < (1 << (D - 1))
    return np.where(inside, 255, 0).astype(np.uint8).reshape(side, side)


def theta_frame(F: Iterable[int], k: int) -> np.ndarray:
    """``theta_F`` on the pixel centers as 255 (value +1) / 0 (value -1)."""
    _check_frame_exponent(k)
    F = sorted(_as_index_set(F))
    side = 1 << k
    D = k + 1 + max(abs(F[0]), abs(F[-1]))
    X, Y = _center_arrays(k, D)
    sign = np.ones(len(X), dtype=np.int8)
    for n in F:
        bx, _ = _orbit(X, Y, D, -n)
        sign *= np.where(bx < (1 << (D - 1)), 1, -1).astype(np.int8)
    return np.where(sign > 0, 255, 0).astype(np.uint8).reshape(side, side)


def check_frame_transpose(
    t_max: int = 6, k: int = 6, *, law_id: str = "eq_5_3_frames"
) -> VerificationReport:
    """Pixel count where ``frame(S^t K A)^T`` differs from ``frame(S^{-t} A)``."""

    def violations():
        for t in range(-t_max, t_max + 1):
            lhs = partition_frame(t, k, conjugated=True).T
            yield int(np.count_nonzero(lhs != partition_frame(-t, k)))

    return VerificationReport.build(law_id, violations(), 0.0)
