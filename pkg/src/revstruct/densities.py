"""Induced reversals on classical and quantum densities, and the Wigner transform.

Classical densities live on a ``(q, p)`` lattice symmetric under ``p -> -p``;
the induced reversal is the relabeling ``rho(q, p) -> rho(q, -p)``.  Quantum
densities are kernels ``rho(x, x')`` on a symmetric position lattice; the
induced reversal is entrywise complex conjugation.

The Wigner transform uses the convention::

    W[rho](q, p) = (1/pi) * integral rho(q - l, q + l) exp(2 i p l) dl

discretized on ``l`` in multiples of the lattice spacing, with the kernel
taken as zero off the lattice.  The momentum lattice has spacing
``pi / (N dx)``, which makes the ``p``-marginal reproduce the diagonal of
the kernel.  With this discretization conjugating the kernel is exactly
the same sum as flipping ``p``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .core import VerificationReport
from .symplectic import HamiltonianFlow

__all__ = [
    "symmetric_grid",
    "momentum_grid",
    "PhaseSpaceGrid",
    "ClassicalDensityGrid",
    "WaveFunctionGrid",
    "OperatorKernel",
    "DensityMatrix",
    "ConjugationSpace",
    "SupportEscapeError",
    "induced_reversal_classical",
    "even_odd_split",
    "induced_dynamics_classical",
    "wavefunction_reversal",
    "conjugation_translation_check",
    "density_matrix_reversal",
    "real_imag_split",
    "wigner_transform",
    "check_wigner_morphism",
    "gaussian_ground_state",
    "random_density_matrix",
    "random_classical_density",
    "check_gaussian_benchmark",
    "check_even_odd_split",
    "check_real_imag_split",
    "check_density_reversal",
    "check_induced_dynamics",
    "write_phase_grid_csv",
    "read_phase_grid_csv",
    "write_kernel_csv",
    "read_kernel_csv",
]

NORMALIZATION_TOL = 1e-9
HERMITIAN_TOL = 1e-12
PSD_TOL = -1e-10
IMAG_RESIDUE_TOL = 1e-10


class SupportEscapeError(ValueError):
    """Density mass would be transported off the lattice."""


def symmetric_grid(n: int = 64, half_width: float = 6.0) -> np.ndarray:
    """``n`` equally spaced points on ``[-half_width, half_width]``, exactly odd-symmetric."""
    if n < 2:
        raise ValueError("need at least two grid points")
    dx = 2 * half_width / (n - 1)
    return (np.arange(n) - (n - 1) / 2) * dx


def momentum_grid(x: np.ndarray) -> np.ndarray:
    """Momentum lattice conjugate to ``x``: ``N`` points, spacing ``pi / (N dx)``."""
    n = len(x)
    dp = math.pi / (n * _spacing(x))
    return (np.arange(n) - (n - 1) / 2) * dp


def _spacing(axis: np.ndarray) -> float:
    return float(axis[1] - axis[0])


def _is_symmetric(axis: np.ndarray) -> bool:
    return bool(np.array_equal(axis, -axis[::-1]))


def _frozen(a, dtype=None) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    """Real (possibly signed or exact-rational) values on a ``q x p`` lattice.

    ``values[i, j]`` is the value at ``(q[i], p[j])``.
    """

    q: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        q = _frozen(self.q, float)
        p = _frozen(self.p, float)
        values = self.values
        if not (isinstance(values, np.ndarray) and values.dtype == object):
            values = np.asarray(values, dtype=float)
        values = _frozen(values, values.dtype)
        if values.shape != (len(q), len(p)):
            raise ValueError("values must have shape (len(q), len(p))")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "values", values)

    @property
    def cell(self) -> float:
        return _spacing(self.q) * _spacing(self.p)

    @property
    def p_symmetric(self) -> bool:
        return _is_symmetric(self.p)

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def total(self) -> float:
        return float(np.sum(self.as_float()) * self.cell)

    def as_float(self) -> np.ndarray:
        return self.values.astype(float) if self.exact else self.values

    def as_exact(self) -> PhaseSpaceGrid:
        """Same grid with every value converted to an exact :class:`Fraction`."""
        if self.exact:
            return self
        vals = np.empty(self.values.shape, dtype=object)
        vals.ravel()[:] = [Fraction(v) for v in self.values.ravel().tolist()]
        return PhaseSpaceGrid(self.q, self.p, vals)

    def with_values(self, values: np.ndarray) -> PhaseSpaceGrid:
        return PhaseSpaceGrid(self.q, self.p, values)

    def equals(self, other: PhaseSpaceGrid) -> bool:
        return (
            np.array_equal(self.q, other.q)
            and np.array_equal(self.p, other.p)
            and bool(np.all(self.values == other.values))
        )

    def sup_distance(self, other: PhaseSpaceGrid) -> float:
        return float(np.max(np.abs(self.as_float() - other.as_float())))


class ClassicalDensityGrid(PhaseSpaceGrid):
    """A normalized, nonnegative phase-space density on a ``p``-symmetric lattice."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.p_symmetric:
            raise ValueError("asymmetric grid: the p lattice must be symmetric under p -> -p")
        vals = self.as_float()
        if np.any(vals < 0):
            raise ValueError("a classical density is nonnegative")
        if abs(self.total() - 1) > NORMALIZATION_TOL:
            raise ValueError(f"density integrates to {self.total()}, not 1")

    @classmethod
    def from_function(cls, f, q: np.ndarray, p: np.ndarray) -> ClassicalDensityGrid:
        """Sample ``f(Q, P)`` on the lattice and normalize."""
        Q, P = np.meshgrid(q, p, indexing="ij")
        vals = np.asarray(f(Q, P), dtype=float)
        vals = vals / (vals.sum() * _spacing(q) * _spacing(p))
        return cls(q, p, vals)

    def with_values(self, values: np.ndarray) -> PhaseSpaceGrid:
        return PhaseSpaceGrid(self.q, self.p, values)


def induced_reversal_classical(rho: PhaseSpaceGrid) -> PhaseSpaceGrid:
    """``(K rho)(q, p) = rho(q, -p)``: a pure relabeling of the lattice."""
    if not rho.p_symmetric:
        raise ValueError("asymmetric grid: the p lattice must be symmetric under p -> -p")
    return type(rho)(rho.q, rho.p, rho.values[:, ::-1])


def even_odd_split(rho: PhaseSpaceGrid) -> tuple[PhaseSpaceGrid, PhaseSpaceGrid]:
    """``((rho + K rho) / 2, (rho - K rho) / 2)`` in exact rational arithmetic.

    Floating-point halves of sums do not add back to the input in general, so
    the parts carry :class:`Fraction` values; use ``as_float()`` to round.
    """
    exact = rho.as_exact()
    flipped = induced_reversal_classical(PhaseSpaceGrid(exact.q, exact.p, exact.values))
    half = Fraction(1, 2)
    even = (exact.values + flipped.values) * half
    odd = (exact.values - flipped.values) * half
    return PhaseSpaceGrid(rho.q, rho.p, even), PhaseSpaceGrid(rho.q, rho.p, odd)


def induced_dynamics_classical(
    rho: PhaseSpaceGrid, flow: HamiltonianFlow, t: float, *, mass_tol: float = 1e-6
) -> PhaseSpaceGrid:
    """``(U_t rho)(m) = rho(S_{-t}(m))`` by bilinear interpolation.

    Outside the lattice the density is taken to be zero.  If more than
    ``mass_tol`` of the mass sits on nodes that ``S_t`` carries off the
    lattice, :class:`SupportEscapeError` is raised.
    """
    if not isinstance(flow, HamiltonianFlow):
        raise TypeError("induced dynamics needs a closed-form HamiltonianFlow")
    q, p = rho.q, rho.p
    vals = rho.as_float()
    Q, P = np.meshgrid(q, p, indexing="ij")
    fq, fp = flow.evolve_arrays(t, Q, P)
    off = (fq < q[0]) | (fq > q[-1]) | (fp < p[0]) | (fp > p[-1])
    escaped = float(np.sum(np.abs(vals[off])) * rho.cell)
    if escaped > mass_tol:
        raise SupportEscapeError(f"support escape: mass {escaped:.3g} leaves the lattice")
    bq, bp = flow.evolve_arrays(-t, Q, P)
    interp = RegularGridInterpolator((q, p), vals, method="linear", bounds_error=False, fill_value=0.0)
    out = interp(np.stack([bq.ravel(), bp.ravel()], axis=-1)).reshape(vals.shape)
    return PhaseSpaceGrid(q, p, out)


# ---------------------------------------------------------------------------
# wave functions and the conjugation reversal


@dataclass(frozen=True, eq=False)
class WaveFunctionGrid:
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        x = _frozen(self.x, float)
        values = _frozen(self.values, complex)
        if values.shape != x.shape:
            raise ValueError("values must match the x lattice")
        norm = float(np.sum(np.abs(values) ** 2) * _spacing(x))
        if abs(norm - 1) > NORMALIZATION_TOL:
            raise ValueError(f"wave function has norm {norm}, not 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)

    @classmethod
    def normalized(cls, x: np.ndarray, values: np.ndarray) -> WaveFunctionGrid:
        values = np.asarray(values, dtype=complex)
        return cls(x, values / math.sqrt(float(np.sum(np.abs(values) ** 2)) * _spacing(x)))

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * _spacing(self.x))


def wavefunction_reversal(psi: WaveFunctionGrid) -> WaveFunctionGrid:
    """Pointwise complex conjugation; real wave functions are the fixed set."""
    return WaveFunctionGrid(psi.x, np.conj(psi.values))


def gaussian_ground_state(x: np.ndarray) -> WaveFunctionGrid:
    """``pi^(-1/4) exp(-x^2 / 2)`` sampled on ``x`` (not renormalized)."""
    return WaveFunctionGrid(x, np.pi ** -0.25 * np.exp(-(x**2) / 2))


@dataclass(frozen=True)
class ConjugationSpace:
    """``R^{2n}`` with basis ``X_1..X_n, JX_1..JX_n`` and exact rational coordinates.

    The first ``n`` coordinates are the real block, the last ``n`` the
    imaginary block.  The conjugation fixes the real block and negates the
    imaginary one.
    """

    n: int

    def vector(self, coords: Sequence) -> tuple[Fraction, ...]:
        if len(coords) != 2 * self.n:
            raise ValueError(f"expected {2 * self.n} coordinates")
        return tuple(Fraction(c) for c in coords)

    def K(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        n = self.n
        return tuple(v[:n]) + tuple(-c for c in v[n:])

    def J(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        n = self.n
        return tuple(-c for c in v[n:]) + tuple(v[:n])

    def translate(self, A: Sequence[Fraction], t: Fraction, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(a * t + c for a, c in zip(A, v))

    def is_fixed(self, v: Sequence[Fraction]) -> bool:
        return all(c == 0 for c in v[self.n:])


def conjugation_translation_check(
    space: ConjugationSpace,
    A: Sequence,
    samples: int = 1000,
    t_list: Sequence | None = None,
    *,
    seed: int = 0,
    law_id: str = "eq_2_17",
) -> VerificationReport:
    """``K(S_t^A(K(X))) == S_{-t}^A(X)`` in exact rational arithmetic.

    ``A`` must lie in the imaginary block.  Random ``X`` have small rational
    coordinates; when ``t_list`` is omitted each sample also draws its own
    rational ``t``.
    """
    A = space.vector(A)
    if any(c != 0 for c in A[: space.n]):
        raise ValueError("not a non-real translation: A has a real-block component")
    rng = np.random.default_rng(seed)

    def rational() -> Fraction:
        return Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 100)))

    def violations():
        for _ in range(samples):
            X = tuple(rational() for _ in range(2 * space.n))
            ts = t_list if t_list is not None else (rational(),)
            for t in ts:
                t = Fraction(t)
                lhs = space.K(space.translate(A, t, space.K(X)))
                rhs = space.translate(A, -t, X)
                yield int(lhs != rhs)

    return VerificationReport.build(law_id, violations(), 0.0, seed)


# ---------------------------------------------------------------------------
# quantum densities


@dataclass(frozen=True, eq=False)
class OperatorKernel:
    """A complex kernel ``k(x, x')`` on a position lattice; no density constraints."""

    x: np.ndarray
    kernel: np.ndarray

    def __post_init__(self) -> None:
        x = _frozen(self.x, float)
        kernel = _frozen(self.kernel, complex)
        if kernel.shape != (len(x), len(x)):
            raise ValueError("kernel must be square on the x lattice")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "kernel", kernel)

    @property
    def dx(self) -> float:
        return _spacing(self.x)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.kernel - self.kernel.conj().T)))

    def trace(self) -> complex:
        return complex(np.trace(self.kernel) * self.dx)

    def spectrum(self) -> np.ndarray:
        """Eigenvalues of the operator ``(k f)(x) = sum_x' k(x, x') f(x') dx``."""
        return np.linalg.eigvalsh(self.kernel * self.dx)

    def equals(self, other: OperatorKernel) -> bool:
        return np.array_equal(self.x, other.x) and np.array_equal(self.kernel, other.kernel)

    def __add__(self, other: OperatorKernel) -> OperatorKernel:
        if not np.array_equal(self.x, other.x):
            raise ValueError("kernels on different lattices")
        return OperatorKernel(self.x, self.kernel + other.kernel)


class DensityMatrix(OperatorKernel):
    """A Hermitian, unit-trace, positive semidefinite kernel."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.hermiticity_defect() > HERMITIAN_TOL:
            raise ValueError("density kernel is not Hermitian")
        tr = self.trace()
        if abs(tr - 1) > NORMALIZATION_TOL:
            raise ValueError(f"density kernel has trace {tr}, not 1")
        if self.spectrum()[0] < PSD_TOL:
            raise ValueError("density kernel is not positive semidefinite")

    @classmethod
    def from_ensemble(
        cls, x: np.ndarray, weights: Sequence[float], states: Sequence[WaveFunctionGrid]
    ) -> DensityMatrix:
        """``sum_j w_j conj(psi_j(x)) psi_j(x')``."""
        w = np.asarray(weights, dtype=float)
        if len(w) != len(states):
            raise ValueError("one weight per state")
        if np.any(w < 0) or abs(w.sum() - 1) > NORMALIZATION_TOL:
            raise ValueError("ensemble weights must be nonnegative and sum to 1")
        kernel = np.zeros((len(x), len(x)), dtype=complex)
        for wj, psi in zip(w, states):
            if not np.array_equal(psi.x, x):
                raise ValueError("state on a different lattice")
            kernel += wj * np.outer(np.conj(psi.values), psi.values)
        kernel = 0.5 * (kernel + kernel.conj().T)
        return cls(x, kernel)

    @classmethod
    def pure(cls, psi: WaveFunctionGrid) -> DensityMatrix:
        return cls.from_ensemble(psi.x, [1.0], [psi])


def density_matrix_reversal(rho_hat: OperatorKernel) -> OperatorKernel:
    """Entrywise conjugation of a Hermitian kernel (equivalently its transpose)."""
    if rho_hat.hermiticity_defect() > HERMITIAN_TOL:
        raise ValueError("density kernel is not Hermitian")
    return type(rho_hat)(rho_hat.x, np.conj(rho_hat.kernel))


def real_imag_split(rho_hat: OperatorKernel) -> tuple[OperatorKernel, OperatorKernel]:
    """``((k + conj k) / 2, (k - conj k) / 2)``.

    Conjugation acts entrywise, so each part keeps one of the real or
    imaginary components of every entry unchanged; the split is exact in
    floating point.
    """
    k = rho_hat.kernel
    c = np.conj(k)
    return OperatorKernel(rho_hat.x, (k + c) / 2), OperatorKernel(rho_hat.x, (k - c) / 2)


def wigner_transform(rho_hat: OperatorKernel, p: np.ndarray | None = None) -> PhaseSpaceGrid:
    """Discrete Wigner transform on the position lattice (``q = x``).

    Raises ``ValueError("hermiticity violated")`` if the transform has an
    imaginary residue above 1e-10.
    """
    x = rho_hat.x
    if not _is_symmetric(x):
        raise ValueError("asymmetric grid: the x lattice must be symmetric")
    if p is None:
        p = momentum_grid(x)
    n = len(x)
    dx = _spacing(x)
    offsets = np.arange(-(n - 1), n)
    rows = np.arange(n)[:, None] - offsets[None, :]
    cols = np.arange(n)[:, None] + offsets[None, :]
    valid = (rows >= 0) & (rows < n) & (cols >= 0) & (cols < n)
    A = np.where(valid, rho_hat.kernel[np.clip(rows, 0, n - 1), np.clip(cols, 0, n - 1)], 0)
    phases = np.exp(2j * np.outer(offsets * dx, p))
    W = (dx / math.pi) * (A @ phases)
    residue = float(np.max(np.abs(W.imag)))
    if residue > IMAG_RESIDUE_TOL:
        raise ValueError(f"hermiticity violated: imaginary residue {residue:.3g}")
    return PhaseSpaceGrid(x, p, W.real)


def check_wigner_morphism(
    rho_hat: OperatorKernel, tol: float = 1e-12, *, seed: int = 0, law_id: str = "eq_2_21c"
) -> VerificationReport:
    """Sup over the lattice of ``|W[K rho](q, p) - W[rho](q, -p)|``."""
    lhs = wigner_transform(density_matrix_reversal(rho_hat))
    rhs = induced_reversal_classical(wigner_transform(rho_hat))
    return VerificationReport.build(law_id, [lhs.sup_distance(rhs)], tol, seed)


def random_density_matrix(
    rng: np.random.Generator, x: np.ndarray, rank: int = 4
) -> DensityMatrix:
    """Seeded mixture of ``rank`` random complex states under a Gaussian envelope."""
    envelope = np.exp(-(x**2) / 8)
    states = []
    for _ in range(rank):
        raw = (rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x))) * envelope
        states.append(WaveFunctionGrid.normalized(x, raw))
    weights = rng.dirichlet(np.ones(rank))
    return DensityMatrix.from_ensemble(x, weights, states)


def random_classical_density(
    rng: np.random.Generator, q: np.ndarray, p: np.ndarray, components: int = 3
) -> ClassicalDensityGrid:
    """Seeded normalized mixture of Gaussian bumps, generally neither even nor odd in ``p``."""
    centers = rng.uniform(-2, 2, size=(components, 2))
    widths = rng.uniform(0.4, 1.2, size=components)

    def f(Q, P):
        return sum(
            np.exp(-((Q - cq) ** 2 + (P - cp) ** 2) / (2 * w * w))
            for (cq, cp), w in zip(centers, widths)
        )

    return ClassicalDensityGrid.from_function(f, q, p)


def check_gaussian_benchmark(
    n: int = 64, half_width: float = 6.0, tol: float = 1e-6, *, law_id: str = "wigner_gaussian"
) -> VerificationReport:
    """Discrete Wigner function of the oscillator ground state vs ``exp(-q^2 - p^2) / pi``."""
    x = symmetric_grid(n, half_width)
    W = wigner_transform(DensityMatrix.pure(gaussian_ground_state(x)))
    Q, P = np.meshgrid(W.q, W.p, indexing="ij")
    exact = np.exp(-(Q**2) - P**2) / math.pi
    return VerificationReport.build(law_id, [float(np.max(np.abs(W.values - exact)))], tol)


def check_even_odd_split(
    count: int = 50, n: int = 32, *, seed: int = 0, law_id: str = "eq_2_12_2_13"
) -> VerificationReport:
    """Exact projector algebra of the even/odd split on seeded classical densities.

    Per density (violation 0 or 1): the parts add up to the input, the
    reversal fixes the even part and negates the odd part, and splitting
    either part again is idempotent.
    """
    rng = np.random.default_rng(seed)
    q = symmetric_grid(n, 5.0)
    p = symmetric_grid(n, 5.0)

    def violation(rho: ClassicalDensityGrid) -> int:
        even, odd = even_odd_split(rho)
        zero = even.with_values(even.values * 0)
        ok = bool(np.all(even.values + odd.values == rho.as_exact().values))
        ok &= induced_reversal_classical(even).equals(even)
        ok &= induced_reversal_classical(odd).equals(odd.with_values(-odd.values))
        e2, o2 = even_odd_split(even)
        ok &= e2.equals(even) and o2.equals(zero)
        e3, o3 = even_odd_split(odd)
        ok &= e3.equals(zero) and o3.equals(odd)
        return int(not ok)

    return VerificationReport.build(
        law_id, (violation(random_classical_density(rng, q, p)) for _ in range(count)), 0.0, seed
    )


def check_real_imag_split(
    count: int = 50, n: int = 64, *, seed: int = 0, law_id: str = "eq_2_19_2_20"
) -> VerificationReport:
    """Exact projector algebra of the real/imaginary split on seeded density matrices."""
    rng = np.random.default_rng(seed)
    x = symmetric_grid(n)

    def violation(rho: DensityMatrix) -> int:
        re, im = real_imag_split(rho)
        zero = OperatorKernel(rho.x, np.zeros_like(rho.kernel))
        ok = (re + im).equals(OperatorKernel(rho.x, rho.kernel))
        ok &= density_matrix_reversal(re).equals(re)
        ok &= density_matrix_reversal(im).equals(OperatorKernel(im.x, -im.kernel))
        r2, i2 = real_imag_split(re)
        ok &= r2.equals(re) and i2.equals(zero)
        r3, i3 = real_imag_split(im)
        ok &= r3.equals(zero) and i3.equals(im)
        return int(not ok)

    return VerificationReport.build(
        law_id, (violation(random_density_matrix(rng, x)) for _ in range(count)), 0.0, seed
    )


def check_density_reversal(
    count: int = 20, n: int = 64, tol: float = 1e-12, *, seed: int = 0, law_id: str = "eq_2_18"
) -> VerificationReport:
    """Conjugation is an involution (exactly) and preserves trace and spectrum (within ``tol``)."""
    rng = np.random.default_rng(seed)
    x = symmetric_grid(n)

    def violations():
        for _ in range(count):
            rho = random_density_matrix(rng, x)
            k = density_matrix_reversal(rho)
            yield 0.0 if density_matrix_reversal(k).equals(rho) else math.inf
            yield abs(k.trace() - rho.trace())
            yield float(np.max(np.abs(k.spectrum() - rho.spectrum())))

    return VerificationReport.build(law_id, violations(), tol, seed)


def check_induced_dynamics(
    n: int = 64, tol: float = 1e-6, *, seed: int = 0, law_id: str = "eq_2_14"
) -> VerificationReport:
    """Induced dynamics on a Gaussian density.

    Checks ``K U_t K = U_{-t}`` for the free particle, return after one
    period of the unit oscillator, ``U_0 = id`` and mass conservation in
    those cases; all within ``tol`` in sup norm (mass in absolute value).
    """
    q = symmetric_grid(n, 8.0)
    p = symmetric_grid(n, 8.0)
    rho = ClassicalDensityGrid.from_function(lambda Q, P: np.exp(-(Q**2) - P**2), q, p)
    free = HamiltonianFlow("free_particle")
    osc = HamiltonianFlow("harmonic_oscillator")

    def violations():
        yield induced_dynamics_classical(rho, free, 0.0).sup_distance(rho)
        for t in (0.5, 1.0, -1.0):
            lhs = induced_reversal_classical(
                induced_dynamics_classical(induced_reversal_classical(rho), free, t)
            )
            rhs = induced_dynamics_classical(rho, free, -t)
            yield lhs.sup_distance(rhs)
            yield abs(rhs.total() - rho.total())
        back = induced_dynamics_classical(rho, osc, 2 * math.pi)
        yield back.sup_distance(rho)
        yield abs(back.total() - rho.total())

    return VerificationReport.build(law_id, violations(), tol, seed)


# ---------------------------------------------------------------------------
# CSV interchange


def _header(meta: dict) -> str:
    return "# " + ",".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in meta.items())


def _parse_header(line: str) -> dict:
    if not line.startswith("# "):
        raise ValueError("missing metadata header")
    out = {}
    for item in line[2:].strip().split(","):
        k, v = item.split("=", 1)
        out[k] = v
    return out


def write_phase_grid_csv(path: str | Path, grid: PhaseSpaceGrid) -> None:
    """Row-major (``q`` outer, ``p`` inner) ``q,p,value`` rows after a metadata line."""
    meta = {
        "kind": "phase_grid",
        "nq": len(grid.q),
        "np": len(grid.p),
        "q_min": float(grid.q[0]),
        "q_max": float(grid.q[-1]),
        "p_min": float(grid.p[0]),
        "p_max": float(grid.p[-1]),
    }
    vals = grid.as_float()
    with open(path, "w", newline="") as fh:
        fh.write(_header(meta) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["q", "p", "value"])
        for i, qi in enumerate(grid.q):
            for j, pj in enumerate(grid.p):
                writer.writerow([repr(float(qi)), repr(float(pj)), repr(float(vals[i, j]))])


def read_phase_grid_csv(path: str | Path) -> PhaseSpaceGrid:
    with open(path, newline="") as fh:
        meta = _parse_header(fh.readline())
        rows = list(csv.DictReader(fh))
    nq, np_ = int(meta["nq"]), int(meta["np"])
    if len(rows) != nq * np_:
        raise ValueError("row count does not match header")
    q = np.array([float(r["q"]) for r in rows[::np_]])
    p = np.array([float(r["p"]) for r in rows[:np_]])
    vals = np.array([float(r["value"]) for r in rows]).reshape(nq, np_)
    return PhaseSpaceGrid(q, p, vals)


def write_kernel_csv(path: str | Path, rho_hat: OperatorKernel) -> None:
    """Row-major ``x,x_prime,re,im`` rows after a metadata line."""
    meta = {"kind": "kernel", "n": len(rho_hat.x), "x_min": float(rho_hat.x[0]), "x_max": float(rho_hat.x[-1])}
    with open(path, "w", newline="") as fh:
        fh.write(_header(meta) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["x", "x_prime", "re", "im"])
        for i, xi in enumerate(rho_hat.x):
            for j, xj in enumerate(rho_hat.x):
                v = rho_hat.kernel[i, j]
                writer.writerow([repr(float(xi)), repr(float(xj)), repr(float(v.real)), repr(float(v.imag))])


def read_kernel_csv(path: str | Path) -> OperatorKernel:
    with open(path, newline="") as fh:
        meta = _parse_header(fh.readline())
        rows = list(csv.DictReader(fh))
    n = int(meta["n"])
    if len(rows) != n * n:
        raise ValueError("row count does not match header")
    x = np.array([float(r["x_prime"]) for r in rows[:n]])
    k = np.array([complex(float(r["re"]), float(r["im"])) for r in rows]).reshape(n, n)
    return OperatorKernel(x, k)
