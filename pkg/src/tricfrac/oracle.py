"""Dense reference routines used to validate the continued-fraction paths.

Nothing in this module performs continued-fraction arithmetic or imports the
modules it is used to check; the only shared pieces are the coefficient
containers and the doubled-matrix assembly.
"""
from __future__ import annotations

import numpy as np

from ._config import dense_limit
from .errors import DimensionError, InconsistencyError, NumericalError, SingularityError, ValidationError
from .operators import ComplexTridiagonal, DenseHermitian, GeneralTridiagonal, augment_double

__all__ = ["eig_hermitian", "svd_values", "dense_inverse", "eig_complex", "hessenberg"]

_EPS = np.finfo(float).eps


def _check_size(dim):
    limit = dense_limit()
    if dim > limit:
        raise DimensionError(f"dimension {dim} exceeds the dense limit {limit}")


def _round_robin(m):
    """Rounds of disjoint index pairs covering every pair of 0..m-1 once (m even)."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        rounds.append([(players[i], players[m - 1 - i]) for i in range(m // 2)])
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def eig_hermitian(m, return_vectors=False, max_sweeps=60):
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Rotations on disjoint index pairs are applied together (round-robin
    ordering), so each round is a handful of array operations.

    Parameters
    ----------
    m : DenseHermitian or (k, k) array_like
    return_vectors : bool
        Also return the unitary matrix of eigenvectors (columns).

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    v : ndarray, optional
        Matching eigenvectors.
    """
    if not isinstance(m, DenseHermitian):
        m = DenseHermitian(np.asarray(m))
    a = np.array(m.entries, dtype=complex)
    dim = a.shape[0]
    _check_size(dim)
    v = np.eye(dim, dtype=complex)
    if dim > 1:
        size = dim + (dim % 2)
        rounds = []
        for pairs in _round_robin(size):
            pq = np.array([pr for pr in pairs if max(pr) < dim], dtype=int).reshape(-1, 2)
            rounds.append((pq[:, 0], pq[:, 1]))
        norm = np.linalg.norm(a)
        for _ in range(max_sweeps):
            off = np.linalg.norm(a - np.diag(np.diag(a)))
            if off <= 1e-15 * norm or norm == 0:
                break
            for p, q in rounds:
                _rotate(a, v, p, q)
        else:
            raise NumericalError("Jacobi iteration did not converge")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    if return_vectors:
        return w[order], v[:, order]
    return w[order]


def _rotate(a, v, p, q):
    b = a[p, q]
    mag = np.abs(b)
    active = mag > 1e-300
    if not active.any():
        return
    p, q, b, mag = p[active], q[active], b[active], mag[active]
    phase = np.conj(b) / mag  # e^{-i phi}
    theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    ap, aq = a[:, p].copy(), a[:, q].copy()
    a[:, p] = c * ap - s * phase * aq
    a[:, q] = s * ap + c * phase * aq
    rp, rq = a[p, :].copy(), a[q, :].copy()
    cp = np.conj(phase)[:, None]
    a[p, :] = c[:, None] * rp - s[:, None] * cp * rq
    a[q, :] = s[:, None] * rp + c[:, None] * cp * rq
    a[p, q] = 0.0
    a[q, p] = 0.0
    idx = np.concatenate([p, q])
    a[idx, idx] = a[idx, idx].real

    vp, vq = v[:, p].copy(), v[:, q].copy()
    v[:, p] = c * vp - s * phase * vq
    v[:, q] = s * vp + c * phase * vq


def svd_values(h):
    """Singular values of ``h`` as the non-negative half of the doubled spectrum.

    The doubled matrix has spectrum {+-sigma_j}; the pairing is verified
    before the upper half is returned (ascending).
    """
    if not isinstance(h, ComplexTridiagonal):
        raise ValidationError("svd_values expects a ComplexTridiagonal")
    _check_size(2 * h.n)
    w = eig_hermitian(augment_double(h))
    n = h.n
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.max(np.abs(w[n:] + w[:n][::-1])) > 1e-10 * scale:
        raise InconsistencyError("doubled spectrum is not symmetric about zero")
    return np.maximum(w[n:], 0.0)


def dense_inverse(m, pivot_tol=1e-13):
    """Inverse by Gauss-Jordan elimination with partial pivoting.

    Raises SingularityError when a pivot falls below ``pivot_tol`` times the
    largest entry.
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains non-finite entries")
    dim = a.shape[0]
    _check_size(dim)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0:
        raise SingularityError("zero matrix")
    inv = np.eye(dim, dtype=complex)
    for col in range(dim):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) < pivot_tol * scale:
            raise SingularityError(f"pivot {col} below threshold")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            inv[[col, piv]] = inv[[piv, col]]
        d = a[col, col]
        a[col] /= d
        inv[col] /= d
        factors = a[:, col].copy()
        factors[col] = 0.0
        a -= np.outer(factors, a[col])
        inv -= np.outer(factors, inv[col])
    return inv


def hessenberg(m):
    """Upper Hessenberg matrix unitarily similar to ``m`` (Householder)."""
    a = np.array(m, dtype=complex)
    dim = a.shape[0]
    for k in range(dim - 2):
        x = a[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        w = x.copy()
        w[0] += phase * alpha
        w /= np.linalg.norm(w)
        a[k + 1 :, :] -= 2.0 * np.outer(w, w.conj() @ a[k + 1 :, :])
        a[:, k + 1 :] -= 2.0 * np.outer(a[:, k + 1 :] @ w, w.conj())
        a[k + 2 :, k] = 0.0
    return a


def _wilkinson(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1, mu2 = 0.5 * (a + d) + disc, 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def eig_complex(h, max_iter_per_value=60):
    """Eigenvalues of a general complex matrix: Hessenberg reduction followed
    by single-shift QR with Wilkinson shifts and deflation.

    Accepts a tridiagonal container or a dense square array.  Eigenvalues are
    returned sorted by (real, imag).
    """
    if isinstance(h, (ComplexTridiagonal, GeneralTridiagonal)):
        a = h.to_dense()
    else:
        a = np.array(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    dim = a.shape[0]
    _check_size(dim)
    a = hessenberg(a)
    eigs = []
    hi = dim - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(a[0, 0])
            break
        lo = hi
        while lo > 0:
            if abs(a[lo, lo - 1]) <= _EPS * (abs(a[lo, lo]) + abs(a[lo - 1, lo - 1])):
                a[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(a[hi, hi])
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_iter_per_value:
            raise NumericalError("shifted QR did not converge")
        if its % 11 == 0:
            mu = a[hi, hi] + abs(a[hi, hi - 1])
        else:
            mu = _wilkinson(a[hi - 1, hi - 1], a[hi - 1, hi], a[hi, hi - 1], a[hi, hi])
        w = a[lo : hi + 1, lo : hi + 1] - mu * np.eye(hi - lo + 1)
        rots = []
        for k in range(hi - lo):
            x, y = w[k, k], w[k + 1, k]
            r = np.hypot(abs(x), abs(y))
            if r == 0.0:
                c, s = 1.0, 0j
            else:
                c, s = x / r, y / r
            # G = [[conj(c), conj(s)], [-s, c]] zeros the subdiagonal entry
            rk, rk1 = w[k].copy(), w[k + 1].copy()
            w[k] = np.conj(c) * rk + np.conj(s) * rk1
            w[k + 1] = -s * rk + c * rk1
            rots.append((c, s))
        for k, (c, s) in enumerate(rots):
            ck, ck1 = w[:, k].copy(), w[:, k + 1].copy()
            w[:, k] = c * ck + s * ck1
            w[:, k + 1] = -np.conj(s) * ck + np.conj(c) * ck1
        a[lo : hi + 1, lo : hi + 1] = w + mu * np.eye(hi - lo + 1)
    eigs = np.array(eigs, dtype=complex)
    return eigs[np.lexsort((eigs.imag, eigs.real))]
