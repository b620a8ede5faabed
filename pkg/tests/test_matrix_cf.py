import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_tridiagonal
from tricfrac.errors import PoleError
from tricfrac.matrix_cf import (
    default_sigma_max,
    mcf_factorize,
    mcf_iterate_homogeneous,
    mcf_step,
    mcf_step4,
    mcf_tail,
    secular_det,
    singular_value_count,
    singular_values_scan,
)
from tricfrac.operators import build_block_tridiagonal, build_tridiagonal, homogeneous_tridiagonal
from tricfrac.oracle import dense_inverse, eig_hermitian, svd_values
from tricfrac.status import Status


def block(h):
    return build_block_tridiagonal(h)


def test_tail_single_block():
    tail = mcf_tail(block(build_tridiagonal([], [4], [0.5])), 1.0)
    s = tail.first
    assert (s.u, s.x, s.y) == (-1.0, 4.0, 0.5)


def test_tail_two_blocks_exact():
    tail = mcf_tail(block(homogeneous_tridiagonal(2, 1, 4, 0.5)), 1.0)
    s = tail.first
    # D = -61/4 at the last block, so the first block is (-65/61, 228/61, 65/122)
    assert s.u == pytest.approx(-65 / 61, abs=1e-15)
    assert s.x == pytest.approx(228 / 61, abs=1e-15)
    assert s.y == pytest.approx(65 / 122, abs=1e-15)


def test_tail_matches_block_schur_complement(sample_model):
    hb = block(sample_model)
    sigma = 1.0
    m = hb.to_dense() - sigma * np.eye(2 * hb.n)
    f1 = dense_inverse(m)[:2, :2]
    ref = dense_inverse(f1)
    np.testing.assert_allclose(mcf_tail(hb, sigma).first.inverse_matrix(), ref, atol=1e-10)


def test_tail_recurrence_with_full_matrices(rng):
    h = random_tridiagonal(rng, 12, bound=3)
    hb = block(h)
    sigma = 0.37
    tail = mcf_tail(hb, sigma)
    assert tail.ok
    f_next = np.zeros((2, 2))
    for k in range(hb.n - 1, -1, -1):
        b = hb.coupling_block(k) if k < hb.n - 1 else np.zeros((2, 2))
        expected = hb.diagonal_block(k) - sigma * np.eye(2) - b @ f_next @ b
        got = tail.states[k].inverse_matrix()
        np.testing.assert_allclose(got, expected, atol=1e-11 * max(1, np.max(np.abs(expected))))
        f_next = np.linalg.inv(got)


def test_states_are_hermitian_with_equal_diagonal(rng):
    tail = mcf_tail(block(random_tridiagonal(rng, 8)), 2.5)
    for s in tail.states:
        m = s.inverse_matrix()
        assert np.array_equal(m, m.conj().T)
        assert m[0, 0] == m[1, 1]
        assert np.linalg.det(m).imag == pytest.approx(0, abs=1e-12 * abs(s.det) + 1e-300)
        assert np.linalg.det(m).real == pytest.approx(s.det, rel=1e-12)


def test_tail_breakdown_in_band():
    # trailing block [[0, 2], [2, 0]] has eigenvalue 2
    hb = block(build_tridiagonal([1], [0, 2], [0, 0]))
    tail = mcf_tail(hb, 2.0)
    assert tail.breakdown_index == 2
    assert tail.states[0] is None


def test_iterate_sample_row10():
    tr = mcf_iterate_homogeneous(1, 4, 0.5, 1, 10, 1e-12)
    assert len(tr.rows) == 11
    _, u, x, y = tr.rows[10]
    assert abs(u - -1.084039480) < 1e-9
    assert abs(x - 3.712213017) < 1e-9
    assert abs(y - 0.5420197399) < 1e-9
    assert tr.status is Status.MAX_ITERATIONS


def test_iterate_sample_converges_eventually():
    tr = mcf_iterate_homogeneous(1, 4, 0.5, 1, 100, 1e-12)
    assert tr.converged
    assert max(abs(a - b) for a, b in zip(tr.rows[-1][1:], tr.rows[-2][1:])) < 1e-12


def test_iterate_beta_two_does_not_converge():
    tr = mcf_iterate_homogeneous(1, 2, 0.5, 1, 10_000, 1e-12)
    assert not tr.converged
    u = tr.as_array()[:, 1]
    assert np.std(u[-1000:]) > 0.1


def test_iterate_gamma_zero_keeps_y_zero():
    tr = mcf_iterate_homogeneous(1, 4, 0.0, 1, 50, 1e-300)
    assert all(r[3] == 0.0 for r in tr.rows)


def test_iterate_singular_determinant():
    # (u, x) = (-1, 2) -> (-4/3, 4/3): D = 0 at the second step
    tr = mcf_iterate_homogeneous(1, 2, 0.0, 1, 100, 1e-12)
    assert tr.status is Status.DIVERGED and tr.reason == "singular"


params = st.tuples(
    st.floats(0.2, 3), st.floats(-5, 5), st.floats(-2, 2), st.floats(0.3, 2)
)


@settings(max_examples=50, deadline=None)
@given(params)
def test_reduced_map_equals_quadruplet(p):
    sigma, beta, gamma, alpha = p
    u = v = -sigma
    x, y = beta, gamma
    ru, rx, ry = u, x, y
    for _ in range(100):
        try:
            u, v, x, y = mcf_step4(u, v, x, y, sigma, alpha, beta, gamma)
            ru, rx, ry = mcf_step(ru, rx, ry, sigma, alpha, beta, gamma)
        except ZeroDivisionError:
            break
        if not np.all(np.isfinite([u, x, y, ru, rx, ry])):
            break
        assert u == v
        scale = max(1.0, abs(u), abs(x), abs(y))
        assert max(abs(u - ru), abs(x - rx), abs(y - ry)) <= 1e-13 * scale


def test_constraint_random_triples():
    rng = np.random.default_rng(8)
    for sigma, beta, gamma in zip(rng.uniform(0.2, 3, 100), rng.uniform(-5, 5, 100), rng.uniform(-2, 2, 100)):
        tr = mcf_iterate_homogeneous(1, beta, gamma, sigma, 200, 1e-300)
        for _, u, _, y in tr.rows:
            assert abs(gamma * u + sigma * y) <= 1e-11 * max(1.0, abs(sigma * y))


@settings(max_examples=80, deadline=None)
@given(st.floats(0.2, 3), st.floats(-5, 5), st.floats(-2, 2))
def test_constraint_defect_propagation(sigma, beta, gamma):
    # the defect e = gamma*u + sigma*y obeys e' = -e/D exactly, up to one rounding per term
    tr = mcf_iterate_homogeneous(1, beta, gamma, sigma, 200, 1e-300)
    rows = tr.rows
    for (_, u0, x0, y0), (_, u1, _, y1) in zip(rows, rows[1:]):
        d = u0 * u0 - x0 * x0 - y0 * y0
        e0 = gamma * u0 + sigma * y0
        e1 = gamma * u1 + sigma * y1
        g = abs(gamma)
        scale = g * (sigma + abs(u0 / d) + abs(u1)) + sigma * (g + abs(y0 / d) + abs(y1))
        assert abs(e1 + e0 / d) <= 1e-14 * scale


def test_constraint_amplified_near_pole():
    # cancellation in u' = -sigma - u/D followed by a near-zero D magnifies the defect
    tr = mcf_iterate_homogeneous(1, 0.0, 0.0625, 2.00001, 101, 1e-300)
    _, u, _, y = tr.rows[100]
    rel = abs(0.0625 * u + 2.00001 * y) / abs(2.00001 * y)
    assert 1e-12 < rel < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 3), st.floats(0.2, 3), st.floats(-5, 5), st.floats(-2, 2))
def test_scale_consistency(alpha, sigma, beta, gamma):
    a = mcf_iterate_homogeneous(alpha, beta, gamma, sigma, 30, 1e-12)
    b = mcf_iterate_homogeneous(1.0, beta / alpha, gamma / alpha, sigma / alpha, 30, 1e-12)
    assert a.status == b.status
    for ra, rb in zip(a.rows[:10], b.rows[:10]):
        scale = max(1.0, *map(abs, ra[1:]))
        assert np.allclose(np.array(ra[1:]) / alpha, rb[1:], atol=1e-9 * scale / alpha)


def test_secular_single_block():
    hb = block(build_tridiagonal([], [4], [0.5]))
    for s in (0.0, 1.0, 3.5, 7.0):
        assert secular_det(hb, s) == pytest.approx(s * s - 16.25, abs=1e-13)
    assert secular_det(hb, 0.0) < 0
    assert abs(secular_det(hb, np.sqrt(16.25))) < 1e-13


def test_secular_jitter_recovers():
    hb = block(build_tridiagonal([1], [0, 2], [0, 0]))
    value, used, jittered = secular_det(hb, 2.0, full_output=True)
    assert jittered and used > 2.0 and used - 2.0 < 1e-11
    # simple pole at 2: residue estimates agree
    near = secular_det(hb, 2.0 + 1e-6)
    assert value * (used - 2.0) == pytest.approx(near * 1e-6, rel=1e-3)


def test_secular_persistent_breakdown():
    hb = block(build_tridiagonal([1], [0, 0], [0, 0]))
    with pytest.raises(PoleError):
        secular_det(hb, 0.0)


def test_secular_sign_changes_are_zeros_or_poles(rng):
    h = random_tridiagonal(rng, 10, bound=2)
    hb = block(h)
    sv = svd_values(h)
    trailing = eig_hermitian(hb.to_dense()[2:, 2:])
    grid = np.linspace(0, default_sigma_max(hb), 4001)
    det = np.array([secular_det(hb, s) for s in grid])
    changes = np.sign(det[:-1]) != np.sign(det[1:])
    # each cell flips sign iff it holds an odd number of simple zeros and poles
    events = np.concatenate([sv, trailing[trailing >= 0]])
    counts = np.histogram(events, bins=grid)[0]
    np.testing.assert_array_equal(changes, counts % 2 == 1)
    assert np.sum(counts) == 10 + np.sum(trailing >= 0)


def test_count_matches_oracle(rng):
    h = random_tridiagonal(rng, 25)
    sv = svd_values(h)
    probes = np.linspace(0.01, sv[-1] * 1.1, 97)
    counts = singular_value_count(block(h), probes)
    np.testing.assert_array_equal(counts, [np.sum(sv < p) for p in probes])


def test_scan_single():
    vals = singular_values_scan(block(build_tridiagonal([], [4], [0.5])), sigma_max=10)
    np.testing.assert_allclose(vals, [4.031128874149275], atol=1e-12)


def test_scan_exchange_matrix_degenerate_pair():
    hb = block(build_tridiagonal([1], [0, 0], [0, 0]))
    np.testing.assert_allclose(singular_values_scan(hb), [1, 1], atol=1e-12)
    with pytest.warns(RuntimeWarning, match="dense oracle"):
        res = singular_values_scan(hb, method="sign", check=True, full_output=True)
    assert res.values.size < 2
    assert res.warnings
    assert 0.0 in res.jittered


def test_scan_sample_against_oracle():
    h = homogeneous_tridiagonal(30, 1, 4, 0.5)
    vals = singular_values_scan(block(h))
    ref = svd_values(h)
    assert vals.size == 30
    np.testing.assert_allclose(vals, ref, atol=1e-8)
    # the constant model is normal: sigma_j = |4 + 0.5i + 2 cos(j pi / 31)|
    exact = np.sort(np.abs(4 + 0.5j + 2 * np.cos(np.arange(1, 31) * np.pi / 31)))
    np.testing.assert_allclose(vals, exact, atol=1e-10)


def test_scan_sign_method_on_well_separated_model():
    h = homogeneous_tridiagonal(12, 1, 4, 0.5)
    vals = singular_values_scan(block(h), method="sign")
    np.testing.assert_allclose(vals, svd_values(h), atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_scan_oracle_equivalence(n, seed):
    h = random_tridiagonal(np.random.default_rng(seed), n)
    vals = singular_values_scan(block(h))
    ref = svd_values(h)
    assert vals.size == ref.size
    assert np.all(np.abs(vals - ref) <= 1e-8 * np.maximum(1.0, ref))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_scan_hermitian_limit(n, seed):
    rng = np.random.default_rng(seed)
    h = build_tridiagonal(rng.uniform(-5, 5, n - 1), rng.uniform(-5, 5, n), np.zeros(n))
    vals = singular_values_scan(block(h))
    ref = np.sort(np.abs(np.linalg.eigvalsh(h.to_dense().real)))
    np.testing.assert_allclose(vals, ref, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_sigma_max_bounds_spectrum(n, seed):
    h = random_tridiagonal(np.random.default_rng(seed), n)
    assert default_sigma_max(block(h)) >= svd_values(h)[-1]


def test_factorize_single():
    hb = block(build_tridiagonal([], [4], [0.5]))
    fac = mcf_factorize(hb, 1.0)
    np.testing.assert_array_equal(fac.upper_dense(), np.eye(2))
    np.testing.assert_array_equal(fac.lower_dense(), np.eye(2))
    np.testing.assert_array_equal(fac.middle_dense(), hb.diagonal_block(0) - np.eye(2))


def test_factorize_reconstruction(rng):
    for n in (3, 20, 200):
        hb = block(random_tridiagonal(rng, n, bound=3))
        sigma = 0.123
        fac = mcf_factorize(hb, sigma)
        m = hb.to_dense() - sigma * np.eye(2 * n)
        assert np.max(np.abs(fac.reconstruct() - m)) <= 1e-10 * max(1, np.max(np.abs(m)))


def test_factorize_at_singular_value(rng):
    h = random_tridiagonal(rng, 6, bound=3)
    hb = block(h)
    s = svd_values(h)[2]
    assert abs(secular_det(hb, s)) < 1e-8 * max(1.0, abs(secular_det(hb, s + 0.1)))
    fac = mcf_factorize(hb, s)
    m = hb.to_dense() - s * np.eye(12)
    assert np.max(np.abs(fac.reconstruct() - m)) <= 1e-10 * np.max(np.abs(m))
    assert np.linalg.cond(fac.middle[0]) > 1e6


def test_factorize_breakdown_raises():
    with pytest.raises(PoleError):
        mcf_factorize(block(build_tridiagonal([1], [0, 2], [0, 0])), 2.0)
