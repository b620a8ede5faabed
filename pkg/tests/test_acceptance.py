"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import REFERENCE_TRACE, non_spectral_shift, random_general, random_tridiagonal
from tricfrac.fixed_point import (
    CONVERGENT,
    DIVERGENT,
    convergence_verdict,
    jacobian,
    jacobian_fd,
    quartic_coeffs,
    solve_quartic,
)
from tricfrac.matrix_cf import mcf_iterate_homogeneous, secular_det, singular_values_scan
from tricfrac.operators import (
    augment_double,
    build_block_tridiagonal,
    homogeneous_tridiagonal,
    interleave_similarity,
)
from tricfrac.oracle import eig_complex, svd_values
from tricfrac.scalar_cf import factorize, resolvent_full, scalar_fixed_points, scalar_iterate


@pytest.fixture
def report(capsys):
    @contextmanager
    def _report(label):
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"\nFAIL  {label}")
            raise
        with capsys.disabled():
            print(f"\nPASS  {label}")

    return _report


def best_time(fn, repeats=20):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def test_c1_sample_reproduction(report):
    with report("1 reference trace to 1e-9, runtime < 1 ms"):
        trace = mcf_iterate_homogeneous(1, 4, 0.5, 1, 10, 1e-12)
        got = np.array([r[1:] for r in trace.rows])
        assert got.shape == (11, 3)
        np.testing.assert_allclose(got, REFERENCE_TRACE, atol=1e-9, rtol=0)
        elapsed = best_time(lambda: mcf_iterate_homogeneous(1, 4, 0.5, 1, 10, 1e-12))
        assert elapsed < 1e-3, elapsed


def test_c2_convergent_fixed_point(report):
    with report("2 convergent case: four real roots, unique stable point"):
        roots = solve_quartic(quartic_coeffs(1, 4, 0.5))
        assert np.all(roots.imag == 0)
        np.testing.assert_allclose(
            roots.real, [-2.477093292, -1.084039480, 0.08403948007, 1.477093292], atol=1e-8
        )
        rep = convergence_verdict(1, 4, 0.5)
        assert rep.verdict == CONVERGENT
        assert sum(c.stable for c in rep.completed) == 1
        assert abs(rep.stable.u - -1.084039480) < 1e-8
        assert np.max(np.abs(np.subtract(rep.iteration.limit, rep.stable.triple))) < 1e-8


def test_c3_divergent_example(report):
    with report("3 divergent case: complex roots, no convergence in 1e4 steps"):
        roots = solve_quartic(quartic_coeffs(1, 2, 0.5))
        expected = [-1.092600316 - 0.4755787365j, -1.092600316 + 0.4755787365j,
                    0.09260031606 - 0.4755787365j, 0.09260031606 + 0.4755787365j]
        np.testing.assert_allclose(roots, expected, atol=1e-8)
        trace = mcf_iterate_homogeneous(1, 2, 0.5, 1, 10_000, 1e-12)
        assert not trace.converged
        assert convergence_verdict(1, 2, 0.5).verdict == DIVERGENT


def test_c4_oracle_equivalence(report):
    with report("4 scan vs dense oracle, 50 random instances, < 30 s"):
        rng = np.random.default_rng(4)
        t0 = time.perf_counter()
        for _ in range(50):
            n = int(rng.integers(2, 51))
            h = random_tridiagonal(rng, n, bound=10)
            vals = singular_values_scan(build_block_tridiagonal(h))
            ref = svd_values(h)
            # the inertia count separates even tight clusters, so counts must always agree
            assert vals.size == ref.size
            assert np.all(np.abs(vals - ref) <= 1e-8 * max(1.0, ref[-1]))
        elapsed = time.perf_counter() - t0
        assert elapsed < 30, elapsed


def test_c5_interleave_similarity(report):
    with report("5 interleaving permutation is an exact similarity"):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 21))
            h = random_tridiagonal(rng, n)
            p = interleave_similarity(n)
            doubled = augment_double(h).entries
            assert np.array_equal(doubled[np.ix_(p, p)], build_block_tridiagonal(h).to_dense())


def test_c6_factorization_identities(report):
    with report("6 U F L = H - z to 1e-11 and resolvent residual to 1e-9"):
        rng = np.random.default_rng(6)
        for i in range(20):
            n = int(rng.integers(1, 101))
            h = random_general(rng, n) if i % 2 else random_tridiagonal(rng, n, bound=3)
            dense = h.to_dense()
            eigs = eig_complex(h)
            hmax = np.max(np.abs(dense))
            for _ in range(3):
                z = non_spectral_shift(rng, eigs, box=float(np.max(np.abs(eigs))) + 1)
                m = dense - z * np.eye(n)
                assert np.max(np.abs(factorize(h, z).reconstruct() - m)) <= 1e-11 * hmax
                assert np.max(np.abs(resolvent_full(h, z) @ m - np.eye(n))) <= 1e-9


def test_c7_scalar_theory(report):
    with report("7 scalar fixed points: beta=2 converges to 2-sqrt2, beta=1 does not"):
        rep = scalar_fixed_points(2)
        assert abs(rep.stable_root - (2 - math.sqrt(2))) <= 1e-12
        k = rep.roots.index(min(rep.roots, key=lambda r: abs(r - rep.stable_root)))
        assert abs(rep.derivatives[k] - (3 - 2 * math.sqrt(2))) <= 1e-12
        other = rep.roots[1 - k]
        assert abs(other - (2 + math.sqrt(2))) <= 1e-12
        assert abs(rep.derivatives[1 - k] - (3 + 2 * math.sqrt(2))) <= 1e-12
        tr = scalar_iterate(2, 0.0, 10_000, 1e-12)
        assert tr.converged and abs(tr.limit - (2 - math.sqrt(2))) <= 1e-12
        assert scalar_fixed_points(1).stable_root is None
        assert not scalar_iterate(1, 0.0, 10_000, 1e-12).converged


def test_c8_constraint_invariant(report):
    with report("8 gamma*u + sigma*y stays zero along 100 random traces"):
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(100):
            s, b, g = rng.uniform(0.2, 3), rng.uniform(-5, 5), rng.uniform(-2, 2)
            for _, u, _, y in mcf_iterate_homogeneous(1, b, g, s, 200, 1e-300).rows:
                worst = max(worst, abs(g * u + s * y) / max(1.0, abs(s * y)))
        assert worst <= 1e-11, worst


def test_c9_jacobian(report):
    with report("9 analytic vs central-difference Jacobian at 100 states to 1e-5"):
        rng = np.random.default_rng(9)
        done = 0
        while done < 100:
            s, b, g = rng.uniform(0.2, 3), rng.uniform(-5, 5), rng.uniform(-2, 2)
            pt = tuple(rng.uniform(-4, 4, 3))
            if abs(pt[0] ** 2 - pt[1] ** 2 - pt[2] ** 2) < 0.1:
                continue
            diff = np.abs(jacobian(s, b, g, pt) - jacobian_fd(s, b, g, pt))
            assert np.max(diff) <= 1e-5
            done += 1


def test_c10_truncation_stability(report):
    with report("N-stability: n=100 and n=200 agree to 1e-8 outside the band"):
        small = build_block_tridiagonal(homogeneous_tridiagonal(100, 1, 4, 0.5))
        large = build_block_tridiagonal(homogeneous_tridiagonal(200, 1, 4, 0.5))
        lo, hi = abs(2 + 0.5j), abs(6 + 0.5j)
        for v in (singular_values_scan(small), singular_values_scan(large)):
            assert lo <= v[0] and v[-1] <= hi
        for s in np.concatenate([np.linspace(0.05, lo - 0.1, 12), np.linspace(hi + 0.1, 9, 12)]):
            a, b = secular_det(small, s), secular_det(large, s)
            assert abs(a - b) <= 1e-8 * max(1.0, abs(b))
            fp = convergence_verdict(s, 4, 0.5, check=False).stable
            assert abs(b - (fp.u ** 2 - fp.x ** 2 - fp.y ** 2)) <= 1e-8 * max(1.0, abs(b))
