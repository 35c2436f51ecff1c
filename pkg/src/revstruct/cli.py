"""Command-line harness: run verification suites, emit JSON reports, export frames.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import baker, bernoulli, core, densities, symplectic
from .core import VerificationReport
from .exactnum import Dyadic, TorusPoint, encode

SUITES = ("involution", "symplectic", "bernoulli", "baker", "densities", "aging")
FRAME_KINDS = ("partition_evolution", "theta")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# law registry

LawFn = Callable[[int, "int | None"], VerificationReport]


@dataclass(frozen=True)
class Law:
    law_id: str
    suites: tuple[str, ...]
    run: LawFn


LAWS: dict[str, Law] = {}


def law(law_id: str, *suites: str):
    def register(fn: LawFn) -> LawFn:
        if law_id in LAWS:
            raise RuntimeError(f"duplicate law {law_id}")
        LAWS[law_id] = Law(law_id, suites, fn)
        return fn

    return register


def _merged(reports: Iterable[VerificationReport]) -> VerificationReport:
    reports = list(reports)
    out = reports[0]
    for r in reports[1:]:
        out = out.merge(r)
    return out


def _n(samples: int | None, default: int) -> int:
    return default if samples is None else samples


def _random_dyadic_point(rng: np.random.Generator, exponent: int = 12) -> TorusPoint:
    i, j = rng.integers(0, 1 << exponent, size=2)
    return TorusPoint(Dyadic(int(i), exponent), Dyadic(int(j), exponent))


# involution ---------------------------------------------------------------


@law("r_1_real_line", "involution")
def _(seed, samples):
    return core.verify_involution(
        core.real_line_reversal(), lambda r: float(r.normal(scale=10)), _n(samples, 1000),
        seed=seed, law_id="r_1_real_line",
    )


@law("r_1_minkowski", "involution")
def _(seed, samples):
    return core.verify_involution(
        core.minkowski_reversal(), lambda r: r.normal(size=4), _n(samples, 1000),
        seed=seed, law_id="r_1_minkowski",
    )


@law("r_1_phase_space", "involution")
def _(seed, samples):
    return _merged(
        core.verify_involution(
            symplectic.phase_reversal(n), lambda r, n=n: symplectic.random_phase_point(r, n),
            _n(samples, 1000), seed=seed, law_id="r_1_phase_space",
        )
        for n in (1, 2, 5)
    )


@law("r_1_bernoulli", "involution")
def _(seed, samples):
    return _merged(
        core.verify_involution(
            bernoulli.bernoulli_reversal(a), lambda r, a=a: bernoulli.random_word(r, a, 32),
            _n(samples, 1000), seed=seed, law_id="r_1_bernoulli",
        )
        for a in (2, 3, 6)
    )


@law("r_1_torus", "involution")
def _(seed, samples):
    return core.verify_involution(
        baker.baker_reversal(), _random_dyadic_point, _n(samples, 1000), seed=seed, law_id="r_1_torus"
    )


@law("eq_1_0", "involution")
def _(seed, samples):
    n = _n(samples, 1000)
    return _merged([
        core.verify_orientation(core.real_line_reversal(), lambda r: float(r.normal()), n, seed=seed),
        core.verify_orientation(core.minkowski_reversal(), lambda r: r.normal(size=4), n, seed=seed),
        core.verify_orientation(
            symplectic.phase_reversal(3), lambda r: symplectic.random_phase_point(r, 3), n, seed=seed
        ),
    ])


@law("eq_1_5_translations", "involution")
def _(seed, samples):
    n = _n(samples, 100)
    times = (0.1, -0.1, 1.0, -1.0, math.pi, -math.pi)
    return _merged([
        core.verify_time_reversal(
            core.real_line_reversal(), core.real_translation(1.5), lambda r: float(r.normal()),
            times, 1e-12, n=n, seed=seed, law_id="eq_1_5_translations",
        ),
        core.verify_time_reversal(
            core.minkowski_reversal(), core.minkowski_translation(2.0), lambda r: r.normal(size=4),
            times, 1e-12, n=n, seed=seed, law_id="eq_1_5_translations",
        ),
    ])


@law("eq_1_5_baker_cascade", "involution")
def _(seed, samples):
    return core.verify_time_reversal(
        baker.baker_reversal(), baker.baker_cascade(), _random_dyadic_point,
        tuple(t for k in range(1, 6) for t in (k, -k)), 0.0,
        n=_n(samples, 200), seed=seed, law_id="eq_1_5_baker_cascade",
    )


@law("cascade_inverse", "involution")
def _(seed, samples):
    return core.verify_cascade_inverse(
        baker.baker_cascade(), _random_dyadic_point, _n(samples, 1000), seed=seed
    )


@law("eq_1_6", "involution")
def _(seed, samples):
    return core.verify_morphism(
        lambda m: encode(m, 16), baker.baker_reversal(), bernoulli.bernoulli_reversal(2),
        _random_dyadic_point, n=_n(samples, 1000), seed=seed,
    )


# symplectic ----------------------------------------------------------------

_DIMS = (1, 2, 5)


def _symplectic_law(law_id: str, check):
    @law(law_id, "symplectic")
    def _(seed, samples):
        return _merged(check(n, samples=_n(samples, 1000), seed=seed) for n in _DIMS)


_symplectic_law("eq_2_10", symplectic.check_sr)
_symplectic_law("eq_1_1", symplectic.check_cr)
_symplectic_law("eq_1_3", symplectic.check_isometry)
_symplectic_law("eq_2_10_1", symplectic.check_j_compatibility)


def _flow_law(kind: str, mode: str, tol: float):
    law_id = f"eq_1_5_{kind}_{mode}"

    @law(law_id, "symplectic")
    def _(seed, samples):
        return symplectic.check_flow_reversal(
            symplectic.HamiltonianFlow(kind), mode, samples=_n(samples, 100), tol=tol, seed=seed
        )


for _kind in ("harmonic_oscillator", "free_particle"):
    _flow_law(_kind, "exact", 1e-12)
    _flow_law(_kind, "leapfrog", 1e-9)


@law("flow_group_law", "symplectic")
def _(seed, samples):
    pairs = ((0.1, 0.2), (1.0, -0.3), (math.pi, 1.0), (-2.5, 0.7))
    return _merged(
        core.verify_flow_group_law(
            symplectic.HamiltonianFlow(kind).as_flow(2),
            lambda r: symplectic.random_phase_point(r, 2), pairs, 1e-12,
            n=_n(samples, 100), seed=seed,
        )
        for kind in ("harmonic_oscillator", "free_particle")
    )


# bernoulli -----------------------------------------------------------------

_SCHEMES = (
    bernoulli.BernoulliScheme.uniform(2),
    bernoulli.BernoulliScheme((Fraction(1, 3), Fraction(2, 3))),
    bernoulli.BernoulliScheme.uniform(6),
)


@law("eq_3_7", "bernoulli")
def _(seed, samples):
    reports = []
    for scheme in _SCHEMES:
        cyls = baker.rank_cylinders(-3, 3, 2, scheme.alphabet_size)
        reports.append(bernoulli.check_shift_preserves_measure(
            scheme, cyls, membership_samples=_n(samples, 16), seed=seed
        ))
    return _merged(reports)


@law("eq_3_10", "bernoulli")
def _(seed, samples):
    return bernoulli.check_reversal_relation(_n(samples, 10_000), seed=seed)


@law("eq_3_9", "bernoulli")
def _(seed, samples):
    """Closed form vs enumeration for ``L <= 4``; strict decrease up to ``L = 64``."""

    def violations():
        for scheme in _SCHEMES[:2]:
            for variant in ("reflect", "mirror"):
                for L in range(1, 5):
                    closed = bernoulli.fixed_set_measure(scheme, L, variant)
                    yield abs(closed - bernoulli.fixed_set_measure_bruteforce(scheme, L, variant))
        half = _SCHEMES[0]
        values = [bernoulli.fixed_set_measure(half, L) for L in range(1, 65)]
        yield sum(1 for a, b in zip(values, values[1:]) if not b < a)
        yield sum(1 for L, v in enumerate(values, 1) if v != Fraction(1, 2**L))

    return VerificationReport.build("eq_3_9", violations(), 0.0, seed)


# baker ---------------------------------------------------------------------


@law("eq_5_3", "baker")
def _(seed, samples):
    return baker.check_baker_reversal(20, 8, seed=seed)


@law("eq_5_1_measure", "baker")
def _(seed, samples):
    return baker.check_measure_preservation(8, seed=seed)


@law("eq_5_4", "baker")
def _(seed, samples):
    return baker.conjugacy_check(10, seed=seed)


@law("eq_5_6", "baker")
def _(seed, samples):
    return baker.check_koopman_pointwise()


@law("theta_reversal", "baker")
def _(seed, samples):
    return baker.check_reversal_on_theta()


@law("eq_5_3_frames", "baker")
def _(seed, samples):
    return baker.check_frame_transpose()


# aging ---------------------------------------------------------------------

_T: baker.AgingOperator | None = None


def _aging_operator() -> baker.AgingOperator:
    global _T
    if _T is None:
        _T = baker.AgingOperator()
    return _T


@law("eq_5_8", "aging", "baker")
def _(seed, samples):
    return baker.check_aging_eigen(_aging_operator())


@law("eq_2_24", "aging")
def _(seed, samples):
    return baker.check_aging_shift(_aging_operator())


@law("eq_2_22", "aging")
def _(seed, samples):
    return baker.check_imprimitivity(_aging_operator())


@law("eq_2_23", "aging")
def _(seed, samples):
    return baker.check_projectors(_aging_operator())


@law("eq_5_3_theta", "aging", "baker")
def _(seed, samples):
    return baker.check_theta_reversal_conjugation(_aging_operator())


@law("theta_orthonormality", "aging")
def _(seed, samples):
    return baker.check_theta_orthonormality()


# densities -----------------------------------------------------------------


@law("eq_2_11", "densities")
def _(seed, samples):
    rng = np.random.default_rng(seed)
    q = densities.symmetric_grid(32, 5.0)

    def violations():
        for _ in range(_n(samples, 50)):
            rho = densities.random_classical_density(rng, q, q)
            K = densities.induced_reversal_classical
            yield 0 if K(K(rho)).equals(rho) else 1

    return VerificationReport.build("eq_2_11", violations(), 0.0, seed)


@law("eq_2_12_2_13", "densities")
def _(seed, samples):
    return densities.check_even_odd_split(_n(samples, 50), seed=seed)


@law("eq_2_14", "densities")
def _(seed, samples):
    return densities.check_induced_dynamics(seed=seed)


@law("eq_2_15", "densities")
def _(seed, samples):
    """Wave-function conjugation: exact involution and exact norm preservation."""
    rng = np.random.default_rng(seed)
    x = densities.symmetric_grid()

    def violations():
        for _ in range(_n(samples, 50)):
            raw = rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x))
            psi = densities.WaveFunctionGrid.normalized(x, raw * np.exp(-(x**2) / 8))
            k = densities.wavefunction_reversal(psi)
            yield 0 if np.array_equal(densities.wavefunction_reversal(k).values, psi.values) else 1
            yield abs(k.norm() - psi.norm())

    return VerificationReport.build("eq_2_15", violations(), 0.0, seed)


@law("eq_2_17", "densities")
def _(seed, samples):
    space = densities.ConjugationSpace(3)
    A = (0, 0, 0, 1, Fraction(-2, 3), 5)
    return densities.conjugation_translation_check(space, A, _n(samples, 1000), seed=seed)


@law("eq_2_18", "densities")
def _(seed, samples):
    return densities.check_density_reversal(_n(samples, 20), seed=seed)


@law("eq_2_19_2_20", "densities")
def _(seed, samples):
    return densities.check_real_imag_split(_n(samples, 50), seed=seed)


@law("eq_2_21c", "densities")
def _(seed, samples):
    rng = np.random.default_rng(seed)
    x = densities.symmetric_grid()
    return _merged(
        densities.check_wigner_morphism(densities.random_density_matrix(rng, x), seed=seed)
        for _ in range(_n(samples, 20))
    )


@law("wigner_gaussian", "densities")
def _(seed, samples):
    return densities.check_gaussian_benchmark()


# ---------------------------------------------------------------------------
# configuration and reports


@dataclass
class SuiteConfig:
    suite: str = "all"
    samples: int | None = None
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self) -> None:
        if self.suite not in SUITES + ("all",):
            raise UsageError(f"unknown suite {self.suite!r}")
        if self.samples is not None and self.samples < 1:
            raise UsageError("samples must be at least 1")
        for key, tol in self.tolerances.items():
            if key not in LAWS and key not in SUITES:
                raise UsageError(f"unknown law or suite in tolerance: {key!r}")
            if not tol >= 0:
                raise UsageError(f"tolerance for {key!r} must be nonnegative")

    def laws(self) -> list[Law]:
        return sorted(
            (l for l in LAWS.values() if self.suite == "all" or self.suite in l.suites),
            key=lambda l: l.law_id,
        )

    def tolerance_for(self, l: Law) -> float | None:
        if l.law_id in self.tolerances:
            return self.tolerances[l.law_id]
        for s in l.suites:
            if s in self.tolerances:
                return self.tolerances[s]
        return None


@dataclass
class RunReport:
    suite: str
    seed: int
    reports: list[VerificationReport]
    duration_ms: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "reports": [r.to_dict() for r in self.reports],
            "duration_ms": self.duration_ms,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def body(self) -> dict:
        """Everything except the wall-clock duration."""
        d = self.to_dict()
        del d["duration_ms"]
        return d


def _rejudge(report: VerificationReport, tol: float) -> VerificationReport:
    return VerificationReport(
        report.law_id, report.samples_tested, report.max_violation, tol,
        report.max_violation <= tol, report.seed,
    )


def run_suite(cfg: SuiteConfig) -> RunReport:
    """Run every law registered for ``cfg.suite``; reports are sorted by law id."""
    start = time.perf_counter()
    reports = []
    for l in cfg.laws():
        r = l.run(cfg.seed, cfg.samples)
        tol = cfg.tolerance_for(l)
        reports.append(r if tol is None else _rejudge(r, tol))
    ms = int(round((time.perf_counter() - start) * 1000))
    return RunReport(cfg.suite, cfg.seed, reports, ms)


# ---------------------------------------------------------------------------
# frames


def _write_pgm(path: Path, img: np.ndarray) -> None:
    rows = "\n".join(" ".join(str(int(v)) for v in row) for row in img)
    path.write_text(f"P2\n{img.shape[1]} {img.shape[0]}\n255\n{rows}\n")


def _write_frame_csv(path: Path, img: np.ndarray) -> None:
    side = img.shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for r in range(side):
            for c in range(side):
                w.writerow([c, r, int(img[r, c])])


def export_frames(kind: str, arg: int | Sequence[int], k: int, out_dir: str | Path) -> list[Path]:
    """Write one frame as PGM (P2) and CSV; returns the written paths.

    ``arg`` is the time ``t`` for ``partition_evolution`` and the index set
    ``F`` for ``theta``.  CSV columns are pixel indices ``x`` (column),
    ``y`` (row) and the gray value.
    """
    if kind == "partition_evolution":
        img = baker.partition_frame(int(arg), k)
        stem = f"partition_evolution_t{int(arg)}_k{k}"
    elif kind == "theta":
        F = sorted(int(n) for n in arg)
        img = baker.theta_frame(F, k)
        stem = f"theta_F{'_'.join(str(n) for n in F)}_k{k}"
    else:
        raise UsageError(f"unknown frame kind {kind!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{stem}.pgm", out / f"{stem}.csv"]
    _write_pgm(paths[0], img)
    _write_frame_csv(paths[1], img)
    return paths


DEFAULT_FRAMES = [("partition_evolution", t) for t in range(-3, 4)] + [("theta", (-2,)), ("theta", (1,))]


def _parse_frame(text: str) -> tuple[str, int | tuple[int, ...]]:
    kind, _, arg = text.partition(":")
    if kind not in FRAME_KINDS or not arg:
        raise argparse.ArgumentTypeError(f"expected KIND:ARG with KIND in {FRAME_KINDS}, got {text!r}")
    try:
        if kind == "partition_evolution":
            return kind, int(arg)
        return kind, tuple(int(n) for n in arg.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad frame argument {arg!r}") from None


def _parse_tol(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected LAW=VALUE, got {text!r}")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {val!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revstruct", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with any of the options below; flags override it")
    p.add_argument("--suite", choices=SUITES + ("all",), help="suite to run (default: all)")
    p.add_argument("--samples", type=int, help="sample count for the sampled checks")
    p.add_argument("--seed", type=int, help="RNG seed (default: $REVSTRUCT_SEED or 0)")
    p.add_argument("--tol", type=_parse_tol, action="append", metavar="LAW=VALUE",
                   help="override a tolerance; a suite name applies to all its laws")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--frames-dir", help="export frames into this directory")
    p.add_argument("--resolution", type=int, help="frame resolution exponent k (2^k pixels, k <= 10)")
    p.add_argument("--frame", type=_parse_frame, action="append", metavar="KIND:ARG",
                   help="frame to export, e.g. partition_evolution:3 or theta:-2,1")
    p.add_argument("--list-laws", action="store_true", help="print the registered laws and exit")
    return p


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise OSError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"config is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def _resolve(args: argparse.Namespace) -> tuple[SuiteConfig | None, dict]:
    file = _load_config(args.config) if args.config else {}
    known = {"suite", "samples", "seed", "tolerances", "out", "frames_dir", "resolution", "frames"}
    if set(file) - known:
        raise UsageError(f"unknown config keys: {sorted(set(file) - known)}")

    def pick(name):
        v = getattr(args, name)
        return file.get(name) if v is None else v

    seed = pick("seed")
    if seed is None:
        env = os.environ.get("REVSTRUCT_SEED")
        try:
            seed = int(env) if env is not None else 0
        except ValueError:
            raise UsageError(f"REVSTRUCT_SEED is not an integer: {env!r}") from None
    tolerances = {str(k): float(v) for k, v in file.get("tolerances", {}).items()}
    tolerances.update(dict(args.tol or []))

    frames_dir = pick("frames_dir")
    frames = args.frame
    if frames is None and "frames" in file:
        frames = [_parse_frame(f) for f in file["frames"]]
    resolution = pick("resolution")
    resolution = 6 if resolution is None else int(resolution)
    if frames and not frames_dir:
        raise UsageError("--frame needs --frames-dir")
    if frames_dir and not 0 <= resolution <= baker.MAX_FRAME_EXPONENT:
        raise UsageError(f"--resolution must be in [0, {baker.MAX_FRAME_EXPONENT}]")
    frame_opts = {"dir": frames_dir, "frames": frames or DEFAULT_FRAMES, "k": resolution}

    suite = pick("suite")
    if suite is None and frames_dir:
        cfg = None
    else:
        samples = pick("samples")
        cfg = SuiteConfig(
            suite=suite or "all",
            samples=None if samples is None else int(samples),
            seed=int(seed),
            tolerances=tolerances,
            out=pick("out"),
        )
    return cfg, frame_opts


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_laws:
        for l in sorted(LAWS.values(), key=lambda l: l.law_id):
            print(f"{l.law_id:28s} {','.join(l.suites)}")
        return EXIT_PASS
    try:
        cfg, frames = _resolve(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"revstruct: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"revstruct: {e}", file=sys.stderr)
        return EXIT_IO

    status = EXIT_PASS
    try:
        if frames["dir"]:
            for kind, arg in frames["frames"]:
                for path in export_frames(kind, arg, frames["k"], frames["dir"]):
                    print(path, file=sys.stderr)
        if cfg is not None:
            report = run_suite(cfg)
            text = report.to_json()
            if cfg.out:
                Path(cfg.out).write_text(text)
                for r in report.reports:
                    print(f"{'PASS' if r.passed else 'FAIL'} {r.law_id} "
                          f"max_violation={r.max_violation:.3g} tol={r.tolerance:g}")
            else:
                sys.stdout.write(text)
            if not report.passed:
                status = EXIT_FAIL
    except OSError as e:
        print(f"revstruct: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return status
