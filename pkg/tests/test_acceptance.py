"""Acceptance criteria, each at its stated tolerance with 10^5 samples.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from gpsparsify.bench import (a_n, first_m, gen_coordinate_example, gen_random_unit_cloud,
                              gen_regular_polygon, gen_shifted_polytope, gen_slab,
                              gen_symmetric_cloud, gen_two_scale_clusters, inscribed_polygon,
                              polygon_measure)
from gpsparsify.core import Polytope, VectorSet, is_symmetric, symmetrize
from gpsparsify.mc import McConfig, estimate_gaussian_distance, estimate_l1_gap
from gpsparsify.norm import eval_norm, orthogonal_complement, sparsify_norm
from gpsparsify.polytope import sparsify_polytope
from gpsparsify.sparsify import SparseSup, center, sparsify
from gpsparsify.verify import (check_anticoncentration, check_cck, check_gamma2_sandwich,
                               check_multiplicative, check_polytope, check_sparsifier,
                               check_tail)

from conftest import ACCEPTANCE_LINES

SAMPLES = 100_000
SEED = 20240501
CFG = McConfig(n_samples=SAMPLES, seed=SEED)


def record(number, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])


def benchmark_sets():
    return {
        "coordinate64": gen_coordinate_example(64),
        "coordinate256": gen_coordinate_example(256),
        "coordinate1024": gen_coordinate_example(1024),
        "cloud64x512": gen_random_unit_cloud(64, 512, seed=3),
        "twoscale": gen_two_scale_clusters(),
    }


# criterion 1 -------------------------------------------------------------------------

def run_sparsifier_case(name, T, eps, cfg=CFG):
    sub = cfg.derive(f"{name}/{eps:g}")
    start = time.perf_counter()
    S = sparsify(T, eps, sub.derive("build"))
    rep = check_sparsifier(T, S, eps, sub.derive("check"))
    return S, rep, time.perf_counter() - start


SPARSIFIERS = {}


@pytest.mark.parametrize("eps", [0.4, 0.2, 0.1])
@pytest.mark.parametrize("name", list(benchmark_sets()))
def test_criterion_01_sparsifier_accuracy(name, eps):
    T = benchmark_sets()[name]
    S, rep, secs = run_sparsifier_case(name, T, eps)
    SPARSIFIERS[(name, eps)] = S
    ok = rep.passed and secs < 60.0
    record(1, ok, f"{name} eps={eps}: |S|={len(S)}/{len(T)} gap={rep.measured:.5f} "
                  f"+/- {rep.std_err:.1e} <= {eps} ({secs:.1f}s)")
    assert rep.passed
    assert secs < 60.0


# criterion 2 -------------------------------------------------------------------------

def test_criterion_02_shift_range():
    sups = dict(SPARSIFIERS)
    for name, T in benchmark_sets().items():
        for eps in (0.4, 0.2, 0.1):
            if (name, eps) not in sups:
                sups[(name, eps)] = run_sparsifier_case(name, T, eps)[0]
    bad = [(k, float(S.shifts.min()), float(S.shifts.max()), S.width_used)
           for k, S in sups.items()
           if np.any(S.shifts < 0) or np.any(S.shifts > S.width_used * (1 + 1e-6))]
    top = max(float(S.shifts.max() / S.width_used) for S in sups.values())
    record(2, not bad, f"{len(sups)} sparsifiers, max shift/width = {top:.4f}")
    assert not bad


# criterion 3 -------------------------------------------------------------------------

def centering_gaps(cfg=CFG):
    S = SparseSup(VectorSet([[1.0]]), [1.0], 1.0, [0])
    out = {}
    for A in (16, 256, 4096):
        # eps small enough that exp(w / eps) exceeds every cap, so A = A_cap
        with pytest.warns(RuntimeWarning, match="capped"):
            C = center(S, 0.01, A)
        assert C.dim - 1 == A
        out[A] = estimate_l1_gap(S, C, C.dim, cfg.derive(f"center{A}"))
    return out


def test_criterion_03_centering_convergence():
    gaps = centering_gaps()
    seq = [gaps[A] for A in (16, 256, 4096)]
    ok = all(b.mean <= a.mean + 3 * math.hypot(a.std_err, b.std_err) for a, b in zip(seq, seq[1:]))
    record(3, ok, "gap along A=16,256,4096: " + ", ".join(f"{e.mean:.4f}" for e in seq))
    assert ok


# criterion 4 -------------------------------------------------------------------------

def norm_case(cfg=CFG):
    T = gen_symmetric_cloud(64, 256, seed=4)
    psi = sparsify_norm(T, 0.25, cfg.derive("norm-build"))
    rep = check_multiplicative(T, psi, 0.25, cfg.derive("norm-check"))
    return T, psi, rep


def test_criterion_04_norm_junta():
    T, psi, rep = norm_case()
    assert len(T) == 512 and T.dim == 64
    Z = orthogonal_complement(psi)
    r = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        x = r.standard_normal(psi.total_dim)
        z = Z @ r.standard_normal(Z.shape[1])
        worst = max(worst, abs(eval_norm(psi, x + z) - eval_norm(psi, x)))
    ok = rep.passed and worst <= 1e-9
    record(4, ok, f"failure prob {rep.measured:.5f} +/- {rep.std_err:.1e} <= 0.25, "
                  f"{len(psi.directions)} directions, junta drift {worst:.1e} <= 1e-9")
    assert rep.passed
    assert worst <= 1e-9


# criterion 5 -------------------------------------------------------------------------

BODIES = {"slab": gen_slab, "octagon": lambda: gen_regular_polygon(8),
          "shifted64": lambda: gen_shifted_polytope(64)}


def polytope_case(name, cfg=CFG):
    K = BODIES[name]()
    L = sparsify_polytope(K, 0.3, cfg.derive(f"{name}-build"))
    return K, L, check_polytope(K, L, 0.3, cfg.derive(f"{name}-check"))


@pytest.mark.parametrize("name", list(BODIES))
def test_criterion_05_polytope(name):
    K, L, rep = polytope_case(name)
    record(5, rep.passed, f"{name}: {len(K)} -> {len(L)} halfspaces ({L.kind}), "
                          f"dist {rep.measured:.5f} +/- {rep.std_err:.1e} <= 0.3")
    assert rep.passed


# criterion 6 -------------------------------------------------------------------------

def validator_reports(cfg=CFG):
    sets = dict(benchmark_sets(), symcloud64x256=gen_symmetric_cloud(64, 256, seed=4))
    reports = []
    for name, T in sets.items():
        sub = cfg.derive(f"validators/{name}")
        reports.append((name, check_tail(T, 3 * float(T.norms.max()), sub.derive("tail"))))
        reports.append((name, check_gamma2_sandwich(T, 30.0, sub.derive("gamma2"))))
        sym = T if is_symmetric(T) else symmetrize(T)
        reports.append((name, check_anticoncentration(sym, 0.05, sub.derive("anti"))))
        unit = T.scaled(1.0 / float(T.norms.max()))
        if np.all(np.abs(unit.norms - 1.0) <= 1e-6):
            for theta in (0.0, 1.0):
                reports.append((name, check_cck(unit, theta, 0.05, sub.derive(f"cck{theta:g}"))))
    return reports


def test_criterion_06_validators():
    reports = validator_reports()
    failed = [f"{n}:{r.name}" for n, r in reports if not r.passed]
    record(6, not failed, f"{len(reports) - len(failed)}/{len(reports)} validator checks pass"
                          + (f"; failed {failed}" if failed else ""))
    assert not failed


# criterion 7 -------------------------------------------------------------------------

def example_51_gap(cfg=CFG):
    n = 4096
    m = first_m(n, 0.5)
    T = gen_coordinate_example(n)
    kept = SparseSup(T.subset(np.arange(m)), np.zeros(m), 1.0, np.arange(m))
    return m, estimate_l1_gap(T, kept, n, cfg.derive("example51"))


def test_criterion_07_example_51_gap():
    start = time.perf_counter()
    m, gap = example_51_gap()
    secs = time.perf_counter() - start
    oracle = 1 - a_n(m) / a_n(4096)
    ok = gap.mean >= 0.15 and secs < 120
    record(7, ok, f"n=4096 m={m}: gap {gap.mean:.5f} +/- {gap.std_err:.1e} >= 0.15 "
                  f"(oracle {oracle:.5f}, {secs:.1f}s)")
    assert m == 64
    assert gap.mean >= 0.15
    assert secs < 120


# criterion 8 -------------------------------------------------------------------------

def example_52_gap(cfg=CFG):
    n = 4096
    m = first_m(n, 0.5)
    K = gen_shifted_polytope(n)
    kept = Polytope(K.dim, K.normals[:m], K.offsets[:m])
    return m, estimate_gaussian_distance(K, kept, cfg.derive("example52"))


def test_criterion_08_example_52_gap():
    m, gap = example_52_gap()
    ok = gap.mean >= 0.10
    record(8, ok, f"n=4096 m={m}: dist {gap.mean:.5f} +/- {gap.std_err:.1e} >= 0.10")
    assert gap.mean >= 0.10


# criterion 9 -------------------------------------------------------------------------

DISK_SIDES = (8, 12, 16, 24, 32)


def disk_sweep(cfg=CFG):
    # circumscribed 1024-gon as the disk; it contains every inscribed polygon, so
    # the distance is a difference of two quadrature measures
    fine = gen_regular_polygon(1024, 1.0)
    fine_measure = polygon_measure(1024, 1.0)
    out = []
    for m in DISK_SIDES:
        est = estimate_gaussian_distance(fine, inscribed_polygon(m), cfg.derive(f"disk{m}"))
        oracle = fine_measure - polygon_measure(m, math.cos(math.pi / m))
        out.append((m, est, oracle))
    return out


def test_criterion_09_disk_growth():
    rows = disk_sweep()
    decreasing = all(b[1].mean < a[1].mean for a, b in zip(rows, rows[1:]))
    matching = all(abs(est.mean - oracle) <= 3 * est.std_err for _, est, oracle in rows)
    record(9, decreasing and matching,
           "; ".join(f"m={m}: {est.mean:.5f} vs {oracle:.5f}" for m, est, oracle in rows))
    assert decreasing
    assert matching


# criterion 10 ------------------------------------------------------------------------

def fingerprint(value):
    if hasattr(value, "mean"):
        return (value.mean, value.std_err, value.n_samples, value.seed)
    if hasattr(value, "measured"):
        return (value.measured, value.std_err, value.n_samples, value.seed)
    raise TypeError(type(value))


def test_criterion_10_determinism():
    checks = {
        "sparsifier": lambda: run_sparsifier_case("twoscale", gen_two_scale_clusters(), 0.1)[:2],
        "centering": lambda: tuple(centering_gaps().values()),
        "norm": lambda: norm_case()[2:],
        "polytope": lambda: polytope_case("octagon")[2:],
        "example51": lambda: example_51_gap()[1:],
        "example52": lambda: example_52_gap()[1:],
        "disk": lambda: tuple(e for _, e, _ in disk_sweep()),
    }
    differing = []
    for name, fn in checks.items():
        first, second = fn(), fn()
        a = [x.shifts.tobytes() + x.source_indices.tobytes() if isinstance(x, SparseSup)
             else fingerprint(x) for x in first]
        b = [x.shifts.tobytes() + x.source_indices.tobytes() if isinstance(x, SparseSup)
             else fingerprint(x) for x in second]
        if a != b:
            differing.append(name)
    record(10, not differing, f"{len(checks)} criteria rerun with seed {SEED}: "
                              + ("bit-identical" if not differing else f"differ: {differing}"))
    assert not differing
