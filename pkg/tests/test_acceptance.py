"""Acceptance criteria 1-10, each at its stated tolerance and runtime bound.

Runs under pytest (a summary line per criterion is printed at the end of
the session) or directly: ``python tests/test_acceptance.py``.
"""

import json
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from revstruct import baker, bernoulli, densities, symplectic
from revstruct.bernoulli import BernoulliScheme

RESULTS: dict[int, tuple[bool, str]] = {}


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def criterion_1():
    r, secs = timed(lambda: baker.check_baker_reversal(t_max=20, grid_exponent=8))
    ok = r.passed and r.max_violation == 0 and r.samples_tested == 65536 * 40 and secs < 10
    return ok, f"baker K S^t K = S^-t: {r.samples_tested} (m, t) pairs, mismatches={r.max_violation:g}, {secs:.2f}s"


def criterion_2():
    r = bernoulli.check_reversal_relation(samples=10_000, alphabets=(2, 3, 6), L=32)
    ok = r.passed and r.max_violation == 0 and r.samples_tested == 30_000
    return ok, f"bernoulli K S K = S^-1: {r.samples_tested} words, max mismatches={r.max_violation:g}"


def criterion_3():
    r = baker.conjugacy_check(grid_exponent=10, max_rank=3)
    ok = r.passed and r.max_violation == 0 and r.samples_tested > 2**20
    return ok, f"coding morphism + cylinder measures: {r.samples_tested} samples, failures={r.max_violation:g}"


def criterion_4():
    half = BernoulliScheme.uniform(2)
    exact = all(
        bernoulli.fixed_set_measure(half, L) == bernoulli.fixed_set_measure_bruteforce(half, L)
        == Fraction(1, 2**L)
        for L in range(1, 5)
    )
    values = [bernoulli.fixed_set_measure(half, L) for L in range(1, 65)]
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    return exact and decreasing, f"fixed-set measure: enumeration match L<=4 {exact}, decreasing to L=64 {decreasing}"


def criterion_5():
    worst = 0.0
    ok = True
    for check in (symplectic.check_sr, symplectic.check_cr, symplectic.check_isometry):
        for n in (1, 2, 5):
            r = check(n, samples=1000, tol=1e-12)
            ok &= r.passed and r.samples_tested == 1000
            worst = max(worst, r.max_violation)
    return ok, f"K*omega = -omega, K_*J = -J K_*, K*g = g at n=1,2,5: max violation {worst:.3g} (tol 1e-12)"


def criterion_6():
    times = (0.1, -0.1, 1.0, -1.0, math.pi, -math.pi)
    exact_worst = leap_worst = 0.0
    ok = True
    for kind in ("harmonic_oscillator", "free_particle"):
        f = symplectic.HamiltonianFlow(kind)
        r = symplectic.check_flow_reversal(f, "exact", times=times, tol=1e-12)
        ok &= r.passed
        exact_worst = max(exact_worst, r.max_violation)
        # dt = 1e-3 with 10^3 steps is t = +-1
        r = symplectic.check_flow_reversal(f, "leapfrog", times=(1.0, -1.0), tol=1e-9, dt=1e-3)
        ok &= r.passed
        leap_worst = max(leap_worst, r.max_violation)
    return ok, f"flow reversal: closed form {exact_worst:.3g} (tol 1e-12), leapfrog {leap_worst:.3g} (tol 1e-9)"


def criterion_7():
    def run():
        x = densities.symmetric_grid(64, 6.0)
        rng = np.random.default_rng(0)
        worst = max(
            densities.check_wigner_morphism(densities.random_density_matrix(rng, x)).max_violation
            for _ in range(20)
        )
        return worst, densities.check_gaussian_benchmark(64, 6.0).max_violation

    (worst, gauss), secs = timed(run)
    ok = worst <= 1e-12 and gauss <= 1e-6 and secs < 5
    return ok, f"wigner morphism {worst:.3g} (tol 1e-12), gaussian {gauss:.3g} (tol 1e-6), {secs:.2f}s"


def criterion_8():
    T = baker.AgingOperator(L=8, cap=3)
    reports = [
        baker.check_aging_eigen(T),
        baker.check_aging_shift(T, ts=(1,)),
        baker.check_imprimitivity(T),
        baker.check_theta_orthonormality(-4, 4, 2),
    ]
    ok = all(r.passed and r.max_violation == 0 for r in reports)
    ok &= reports[0].samples_tested == reports[1].samples_tested == len(T.basis)
    counts = ", ".join(f"{r.law_id}={r.samples_tested}" for r in reports)
    return ok, f"aging operator on all {len(T.basis)} theta_F, F in [-8, 8], |F| <= 3: {counts}"


def criterion_9():
    a = densities.check_even_odd_split(count=50)
    b = densities.check_real_imag_split(count=50)
    ok = a.passed and b.passed and a.samples_tested == b.samples_tested == 50
    return ok, f"projector algebra exact: even/odd {a.samples_tested} densities, real/imag {b.samples_tested} kernels"


def criterion_10(tmp_dir):
    bodies = []
    codes = []
    secs = []
    for name in ("run1.json", "run2.json"):
        out = tmp_dir / name
        (code, secs_i) = timed(lambda: subprocess.run(
            [sys.executable, "-m", "revstruct", "--suite", "all", "--seed", "2024", "--out", str(out)],
            capture_output=True,
        ).returncode)
        codes.append(code)
        secs.append(secs_i)
        d = json.loads(out.read_text())
        d.pop("duration_ms")
        bodies.append(json.dumps(d, indent=2).encode())
    ok = codes == [0, 0] and max(secs) < 60 and bodies[0] == bodies[1]
    return ok, f"suite all: exit codes {codes}, {max(secs):.1f}s, identical bodies {bodies[0] == bodies[1]}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


@pytest.mark.parametrize("number", range(1, 11))
def test_acceptance(number, tmp_path):
    fn = CRITERIA[number]
    ok, detail = fn(tmp_path) if number == 10 else fn()
    RESULTS[number] = (ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    failed = 0
    with tempfile.TemporaryDirectory() as d:
        for number, fn in CRITERIA.items():
            ok, detail = fn(Path(d)) if number == 10 else fn()
            failed += not ok
            print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    sys.exit(1 if failed else 0)
