"""Operator objects: complex tridiagonal truncations and their Hermitian partners.

Everything here is stored as coefficient arrays.  Dense matrices are only
produced on request (``to_dense``) for cross-checks against the oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError

__all__ = [
    "ComplexTridiagonal",
    "GeneralTridiagonal",
    "BlockTridiagonal2",
    "DenseHermitian",
    "build_tridiagonal",
    "homogeneous_tridiagonal",
    "discretize_schroedinger",
    "augment_double",
    "build_block_tridiagonal",
    "interleave_similarity",
    "permutation_matrix",
]

HERMITIAN_RTOL = 1e-13


def _frozen(values, dtype, name):
    arr = np.array(values, dtype=dtype).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _real_array(values, name):
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise ValidationError(f"{name} must be real")
        arr = arr.real
    try:
        return _frozen(arr, float, name)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{name} must be an array of numbers") from exc


@dataclass(frozen=True)
class ComplexTridiagonal:
    """Complex symmetric tridiagonal matrix with real couplings.

    Diagonal entries are ``beta[k] + 1j * gamma[k]`` and both off-diagonals
    carry ``alpha[k]``.

    ``scaling`` and ``energy_scale`` record how the stored matrix relates to
    the physical operator it was built from: physical eigenvalues are
    ``energy_scale * lambda`` for eigenvalues ``lambda`` of the stored matrix.
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    scaling: str = "raw"
    energy_scale: float = 1.0

    def __post_init__(self):
        alpha = _real_array(self.alpha, "alpha")
        beta = _real_array(self.beta, "beta")
        gamma = _real_array(self.gamma, "gamma")
        if beta.size < 1:
            raise DimensionError("beta must contain at least one entry")
        if gamma.size != beta.size:
            raise DimensionError(
                f"gamma has {gamma.size} entries, expected {beta.size} (len(beta))"
            )
        if alpha.size != beta.size - 1:
            raise DimensionError(
                f"alpha has {alpha.size} entries, expected {beta.size - 1} (len(beta) - 1)"
            )
        if not np.isfinite(self.energy_scale) or self.energy_scale == 0:
            raise ValidationError("energy_scale must be finite and non-zero")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self):
        return self.beta.size

    @property
    def diagonal(self):
        return self.beta + 1j * self.gamma

    def to_general(self):
        return GeneralTridiagonal(a=self.diagonal, b=self.alpha, c=self.alpha)

    def to_dense(self):
        h = np.diag(self.diagonal)
        if self.n > 1:
            idx = np.arange(self.n - 1)
            h[idx, idx + 1] = self.alpha
            h[idx + 1, idx] = self.alpha
        return h

    def __eq__(self, other):
        if not isinstance(other, ComplexTridiagonal):
            return NotImplemented
        return (
            np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.gamma, other.gamma)
            and self.scaling == other.scaling
            and self.energy_scale == other.energy_scale
        )

    __hash__ = None


@dataclass(frozen=True)
class GeneralTridiagonal:
    """Tridiagonal matrix with arbitrary complex diagonal ``a``,
    superdiagonal ``b`` and subdiagonal ``c``.

    ``b[k]`` sits at (k, k+1) and ``c[k]`` at (k+1, k) (0-based), so ``c[k]``
    is the coefficient usually written c_{k+2} in 1-based notation.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        try:
            a = _frozen(self.a, complex, "a")
            b = _frozen(self.b, complex, "b")
            c = _frozen(self.c, complex, "c")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError("tridiagonal entries must be numbers") from exc
        if a.size < 1:
            raise DimensionError("a must contain at least one entry")
        if b.size != a.size - 1 or c.size != a.size - 1:
            raise DimensionError(
                f"b and c must have {a.size - 1} entries, got {b.size} and {c.size}"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n(self):
        return self.a.size

    def to_dense(self):
        h = np.diag(self.a)
        if self.n > 1:
            idx = np.arange(self.n - 1)
            h[idx, idx + 1] = self.b
            h[idx + 1, idx] = self.c
        return h

    __hash__ = None


@dataclass(frozen=True)
class BlockTridiagonal2:
    """Hermitian block-tridiagonal partner with 2x2 blocks.

    Diagonal blocks are ``[[0, d], [conj(d), 0]]`` with ``d = diag_offdiag[k]``
    and the couplings are ``[[0, a], [a, 0]]`` with ``a = coupling[k]`` on both
    sides of the diagonal.
    """

    diag_offdiag: np.ndarray
    coupling: np.ndarray

    def __post_init__(self):
        d = _frozen(self.diag_offdiag, complex, "diag_offdiag")
        a = _real_array(self.coupling, "coupling")
        if d.size < 1:
            raise DimensionError("diag_offdiag must contain at least one entry")
        if a.size != d.size - 1:
            raise DimensionError(f"coupling must have {d.size - 1} entries, got {a.size}")
        object.__setattr__(self, "diag_offdiag", d)
        object.__setattr__(self, "coupling", a)

    @property
    def n(self):
        return self.diag_offdiag.size

    @property
    def beta(self):
        return self.diag_offdiag.real

    @property
    def gamma(self):
        return self.diag_offdiag.imag

    def diagonal_block(self, k):
        d = self.diag_offdiag[k]
        return np.array([[0, d], [np.conj(d), 0]], dtype=complex)

    def coupling_block(self, k):
        a = self.coupling[k]
        return np.array([[0, a], [a, 0]], dtype=complex)

    def to_dense(self):
        n = self.n
        m = np.zeros((2 * n, 2 * n), dtype=complex)
        for k in range(n):
            m[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = self.diagonal_block(k)
        for k in range(n - 1):
            blk = self.coupling_block(k)
            m[2 * k : 2 * k + 2, 2 * k + 2 : 2 * k + 4] = blk
            m[2 * k + 2 : 2 * k + 4, 2 * k : 2 * k + 2] = blk
        return m

    __hash__ = None


@dataclass(frozen=True)
class DenseHermitian:
    """Dense Hermitian matrix, validated on construction."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionError(f"entries must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("entries contains non-finite values")
        scale = max(np.max(np.abs(m)), 1e-300)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_RTOL * scale:
            raise ValidationError("matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self):
        return self.entries.shape[0]

    __hash__ = None


def build_tridiagonal(alpha, beta, gamma):
    """Assemble a :class:`ComplexTridiagonal` from its three coefficient arrays."""
    return ComplexTridiagonal(alpha=alpha, beta=beta, gamma=gamma)


def homogeneous_tridiagonal(n, alpha, beta, gamma):
    """Constant-coefficient truncation of size ``n``."""
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    return ComplexTridiagonal(
        alpha=np.full(n - 1, float(alpha)),
        beta=np.full(n, float(beta)),
        gamma=np.full(n, float(gamma)),
    )


def discretize_schroedinger(v_re, v_im, h, normalized=False):
    """Three-point finite-difference matrix of ``-d^2/dr^2 + V(r)``.

    The samples are ``V(r_k)`` at the interior points ``r_k = k*h``,
    ``k = 1..n``, with Dirichlet conditions at ``r_0`` and ``r_{n+1}``.

    Parameters
    ----------
    v_re, v_im : array_like, shape (n,)
        Real and imaginary parts of the potential samples.
    h : float
        Grid spacing, strictly positive.
    normalized : bool
        If true, divide the whole matrix by ``-1/h**2`` so the couplings
        become 1.  The returned object records ``energy_scale = -1/h**2`` so
        physical eigenvalues can be recovered.

    Returns
    -------
    ComplexTridiagonal
    """
    v_re = _real_array(v_re, "v_re")
    v_im = _real_array(v_im, "v_im")
    if v_re.size == 0:
        raise ValidationError("at least one grid point is required")
    if v_im.size != v_re.size:
        raise DimensionError(f"v_im has {v_im.size} samples, v_re has {v_re.size}")
    h = float(h)
    if not np.isfinite(h) or h <= 0:
        raise ValidationError(f"grid spacing h must be positive, got {h}")
    n = v_re.size
    inv_h2 = 1.0 / (h * h)
    if normalized:
        return ComplexTridiagonal(
            alpha=np.ones(n - 1),
            beta=-2.0 - h * h * v_re,
            gamma=-h * h * v_im,
            scaling="normalized",
            energy_scale=-inv_h2,
        )
    return ComplexTridiagonal(
        alpha=np.full(n - 1, -inv_h2),
        beta=2.0 * inv_h2 + v_re,
        gamma=v_im.copy(),
    )


def augment_double(h):
    """Doubled Hermitian matrix ``[[0, H], [H^dagger, 0]]`` of size 2n."""
    dense = h.to_dense()
    n = h.n
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:n, n:] = dense
    m[n:, :n] = dense.conj().T
    return DenseHermitian(m)


def build_block_tridiagonal(h):
    """Block-tridiagonal Hermitian partner whose spectrum is {+-sigma_n}."""
    return BlockTridiagonal2(diag_offdiag=h.diagonal, coupling=h.alpha)


def interleave_similarity(n):
    """Permutation taking (e_1..e_n, f_1..f_n) to (e_1, f_1, e_2, f_2, ...).

    Returns an index array ``perm`` such that ``m[np.ix_(perm, perm)]``
    reorders a doubled matrix ``m`` into interleaved order.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n, 2 * n)
    return perm


def permutation_matrix(perm):
    """Matrix ``P`` with ``(P @ M @ P.T) == M[perm][:, perm]``."""
    perm = np.asarray(perm)
    p = np.zeros((perm.size, perm.size))
    p[np.arange(perm.size), perm] = 1.0
    return p
