"""2x2 matrix continued fractions for the Hermitian block-tridiagonal partner.

Each inverse tail matrix is stored as a real triple (u, x, y),

    F_k^{-1} = [[u, x + iy], [x - iy, u]],

and the block recurrence ``F_k^{-1} = A_k - sigma - B_k F_{k+1} B_k`` becomes,
with ``D = u**2 - x**2 - y**2`` taken at k+1,

    u_k = -sigma - a_k**2 u / D,
    x_k = beta_k + a_k**2 x / D,
    y_k = gamma_k - a_k**2 y / D.

The determinant ``D_1(sigma)`` of the first inverse tail is the secular
function whose real zeros are the singular values of H.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._config import EPS_SING
from .errors import PoleError, ValidationError
from .operators import BlockTridiagonal2, ComplexTridiagonal, build_block_tridiagonal
from .status import Status

__all__ = [
    "MCFState",
    "MCFTail",
    "IterationTrace",
    "BlockFactorization",
    "ScanResult",
    "mcf_step",
    "mcf_step4",
    "mcf_tail",
    "mcf_iterate_homogeneous",
    "secular_det",
    "singular_value_count",
    "default_sigma_max",
    "singular_values_scan",
    "mcf_factorize",
]

DIVERGENCE_CAP = 1e12
JITTER = 1e-12
MAX_JITTERS = 3
DEFAULT_GRID = 2048
DEFAULT_REFINE_TOL = 1e-12


def _as_block(hb):
    if isinstance(hb, ComplexTridiagonal):
        return build_block_tridiagonal(hb)
    if isinstance(hb, BlockTridiagonal2):
        return hb
    raise ValidationError(f"expected a BlockTridiagonal2, got {type(hb).__name__}")


def _finite(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite")
    return value


class MCFState(NamedTuple):
    """One inverse tail matrix in (u, x, y) form plus the parameters it used."""

    u: float
    x: float
    y: float
    sigma: float
    alpha: float
    beta: float
    gamma: float

    @property
    def det(self):
        return self.u * self.u - self.x * self.x - self.y * self.y

    def inverse_matrix(self):
        off = complex(self.x, self.y)
        return np.array([[self.u, off], [off.conjugate(), self.u]], dtype=complex)


def mcf_step(u, x, y, sigma, alpha, beta, gamma):
    """Apply the reduced (u, x, y) map once.  Raises ZeroDivisionError if D == 0."""
    d = u * u - x * x - y * y
    s = alpha * alpha / d
    return -sigma - s * u, beta + s * x, gamma - s * y


def mcf_step4(u, v, x, y, sigma, alpha, beta, gamma):
    """Full four-component map, with v tracked separately from u."""
    d = u * v - x * x - y * y
    s = alpha * alpha / d
    return -sigma - s * u, -sigma - s * v, beta + s * x, gamma - s * y


@dataclass(frozen=True)
class MCFTail:
    """Inverse tail matrices F_1^{-1}..F_n^{-1} at one shift.

    ``states[k]`` is F_{k+1}^{-1} (0-based storage).  If the recurrence broke
    down, ``breakdown_index`` is the 1-based position whose inverse tail was
    singular and only states above it are filled.
    """

    sigma: float
    states: list
    breakdown_index: Optional[int] = None

    @property
    def ok(self):
        return self.breakdown_index is None

    @property
    def first(self):
        return self.states[0]

    def arrays(self):
        """Return (u, x, y) as arrays, NaN where not computed."""
        out = np.full((3, len(self.states)), np.nan)
        for k, s in enumerate(self.states):
            if s is not None:
                out[:, k] = s.u, s.x, s.y
        return out


def mcf_tail(hb, sigma):
    """Backward matrix continued fraction at real shift ``sigma``, F_{n+1} = 0."""
    hb = _as_block(hb)
    sigma = _finite(sigma, "sigma")
    n = hb.n
    beta, gamma, coup = hb.beta, hb.gamma, hb.coupling
    states = [None] * n
    u, x, y = -sigma, float(beta[-1]), float(gamma[-1])
    states[-1] = MCFState(u, x, y, sigma, 0.0, float(beta[-1]), float(gamma[-1]))
    for k in range(n - 2, -1, -1):
        d = u * u - x * x - y * y
        if abs(d) < EPS_SING * max(1.0, u * u + x * x + y * y):
            return MCFTail(sigma=sigma, states=states, breakdown_index=k + 2)
        a = float(coup[k])
        s = a * a / d
        u, x, y = -sigma - s * u, beta[k] + s * x, gamma[k] - s * y
        states[k] = MCFState(u, float(x), float(y), sigma, a, float(beta[k]), float(gamma[k]))
    return MCFTail(sigma=sigma, states=states)


def _tail_vectorized(hb, sigmas):
    """(u, x, y) of F_1^{-1}, breakdown mask and negative-inertia count per shift."""
    sigmas = np.asarray(sigmas, dtype=float)
    beta, gamma, coup = hb.beta, hb.gamma, hb.coupling
    n = hb.n
    u = -sigmas.copy()
    x = np.full_like(sigmas, beta[-1])
    y = np.full_like(sigmas, gamma[-1])
    broken = np.zeros(sigmas.shape, dtype=bool)
    neg = np.zeros(sigmas.shape, dtype=int)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(n - 2, -1, -1):
            r = np.hypot(x, y)
            neg += (u + r < 0).astype(int) + (u - r < 0).astype(int)
            d = u * u - x * x - y * y
            broken |= np.abs(d) < EPS_SING * np.maximum(1.0, u * u + x * x + y * y)
            s = coup[k] * coup[k] / d
            u, x, y = -sigmas - s * u, beta[k] + s * x, gamma[k] - s * y
        r = np.hypot(x, y)
        neg += (u + r < 0).astype(int) + (u - r < 0).astype(int)
    return u, x, y, broken, neg


def _jittered_shift(sigma):
    return sigma * (1.0 + JITTER) + JITTER


def _secular_vectorized(hb, sigmas):
    sig = np.array(sigmas, dtype=float)
    jittered = np.zeros(sig.shape, dtype=bool)
    u, x, y, broken, neg = _tail_vectorized(hb, sig)
    for _ in range(MAX_JITTERS):
        if not broken.any():
            break
        jittered |= broken
        sig[broken] = _jittered_shift(sig[broken])
        u2, x2, y2, b2, n2 = _tail_vectorized(hb, sig[broken])
        u[broken], x[broken], y[broken], neg[broken] = u2, x2, y2, n2
        broken[broken] = b2
    det = u * u - x * x - y * y
    return det, sig, jittered, broken, neg


def secular_det(hb, sigma, full_output=False):
    """Secular function ``det F_1^{-1}(sigma) = u_1**2 - x_1**2 - y_1**2``.

    If the recurrence breaks down below the first block, the shift is
    nudged to ``sigma*(1 + 1e-12) + 1e-12`` (at most three times).

    Returns the determinant, or ``(det, sigma_used, jittered)`` when
    ``full_output`` is true.
    """
    hb = _as_block(hb)
    s = _finite(sigma, "sigma")
    jittered = False
    for attempt in range(MAX_JITTERS + 1):
        tail = mcf_tail(hb, s)
        if tail.ok:
            value = tail.first.det
            return (value, s, jittered) if full_output else value
        if attempt == MAX_JITTERS:
            break
        s = _jittered_shift(s)
        jittered = True
    raise PoleError(
        f"matrix continued fraction keeps breaking down near sigma={sigma}",
        index=tail.breakdown_index,
    )


def singular_value_count(hb, sigma):
    """Number of singular values strictly below ``sigma`` (sigma > 0).

    The block factorization ``H - sigma = U diag(F_k^{-1}) U^dagger`` is a
    congruence, so the negative eigenvalues of the 2x2 pivots ``u +- |x+iy|``
    count the eigenvalues of the partner below ``sigma``; the n eigenvalues
    ``-sigma_j`` are subtracted.
    """
    hb = _as_block(hb)
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    _, _, _, _, neg = _secular_vectorized(hb, sig)
    counts = np.clip(neg - hb.n, 0, hb.n)
    return counts if np.ndim(sigma) else int(counts[0])


def default_sigma_max(hb):
    """Gershgorin-type bound ``1.25 * (max|beta + i gamma| + 2 max|alpha|)``."""
    hb = _as_block(hb)
    amax = float(np.max(np.abs(hb.coupling))) if hb.coupling.size else 0.0
    return 1.25 * (float(np.max(np.abs(hb.diag_offdiag))) + 2.0 * amax)


@dataclass(frozen=True)
class ScanResult:
    """Output of :func:`singular_values_scan`.

    ``grid`` and ``det`` are the secular function samples; ``jittered`` lists
    grid shifts that had to be nudged off a trailing-block pole.
    """

    values: np.ndarray
    grid: np.ndarray = field(repr=False)
    det: np.ndarray = field(repr=False)
    jittered: np.ndarray
    method: str
    warnings: tuple = ()


def _bisect_count(hb, lo, hi, clo, chi, refine_tol):
    n = hb.n
    roots = []
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    clo, chi = np.asarray(clo, int), np.asarray(chi, int)
    while lo.size:
        done = (hi - lo) <= refine_tol
        for a, b, ca, cb in zip(lo[done], hi[done], clo[done], chi[done]):
            roots.extend([0.5 * (a + b)] * int(cb - ca))
        lo, hi, clo, chi = lo[~done], hi[~done], clo[~done], chi[~done]
        if not lo.size:
            break
        mid = 0.5 * (lo + hi)
        _, _, _, _, neg = _secular_vectorized(hb, mid)
        cm = np.clip(neg - n, clo, chi)
        left = cm > clo
        right = chi > cm
        lo = np.concatenate([lo[left], mid[right]])
        hi = np.concatenate([mid[left], hi[right]])
        clo, chi = np.concatenate([clo[left], cm[right]]), np.concatenate([cm[left], chi[right]])
    return roots


def _bisect_sign(hb, lo, hi, dlo, refine_tol):
    lo, hi = lo.copy(), hi.copy()
    slo = np.sign(dlo)
    while lo.size and np.max(hi - lo) > refine_tol:
        mid = 0.5 * (lo + hi)
        dm, _, _, _, _ = _secular_vectorized(hb, mid)
        same = np.sign(dm) == slo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def singular_values_scan(
    hb,
    sigma_max=None,
    grid_points=DEFAULT_GRID,
    refine_tol=DEFAULT_REFINE_TOL,
    method="count",
    check=False,
    full_output=False,
):
    """Singular values in ``[0, sigma_max]`` from the matrix continued fraction.

    The secular function is sampled on a uniform grid of ``grid_points``
    shifts.  Brackets are then refined by bisection to ``refine_tol``.

    ``method="count"`` (default) brackets with the inertia count of the
    block pivots, which separates clustered roots and never confuses a pole
    of ``det F_1^{-1}`` with a zero.  ``method="sign"`` uses sign changes of
    ``det F_1^{-1}`` alone, discards brackets that refine onto a pole, and
    merges roots closer than ``10*refine_tol``; near-degenerate pairs are
    invisible to it.

    With ``check=True`` the count is compared with the dense oracle and any
    mismatch is reported through ``warnings``.
    """
    hb = _as_block(hb)
    if sigma_max is None:
        # the zero matrix has bound 0; any positive window brackets its roots
        sigma_max = default_sigma_max(hb) or 1.0
    sigma_max = _finite(sigma_max, "sigma_max")
    if sigma_max <= 0:
        raise ValidationError("sigma_max must be positive")
    if int(grid_points) != grid_points or grid_points < 2:
        raise ValidationError("grid_points must be an integer >= 2")
    if not refine_tol > 0:
        raise ValidationError("refine_tol must be positive")
    if method not in ("count", "sign"):
        raise ValidationError(f"unknown method {method!r}")

    grid = np.linspace(0.0, sigma_max, int(grid_points))
    det, used, jittered, broken, neg = _secular_vectorized(hb, grid)
    # samples still on a trailing-block pole carry no sign information
    det = np.where(broken, np.nan, det)

    if method == "count":
        counts = np.clip(neg - hb.n, 0, hb.n)
        counts[0] = 0
        counts = np.maximum.accumulate(counts)
        cells = np.nonzero(np.diff(counts))[0]
        roots = _bisect_count(
            hb, grid[cells], grid[cells + 1], counts[cells], counts[cells + 1], refine_tol
        )
        values = np.sort(np.asarray(roots, dtype=float))
    else:
        sgn = np.nan_to_num(np.sign(det))
        cells = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
        roots = _bisect_sign(hb, grid[cells], grid[cells + 1], det[cells], refine_tol)
        if roots.size:
            at_root, _, _, _, _ = _secular_vectorized(hb, roots)
            ends = np.minimum(np.abs(det[cells]), np.abs(det[cells + 1]))
            roots = roots[np.abs(at_root) <= ends]
        roots = np.sort(roots)
        if roots.size:
            keep = np.concatenate([[True], np.diff(roots) >= 10 * refine_tol])
            roots = roots[keep]
        values = roots

    notes = []
    if check:
        from .oracle import svd_values  # dense check only

        ref = svd_values(_to_tridiagonal(hb))
        expected = int(np.sum(ref <= sigma_max))
        if expected != values.size:
            msg = (
                f"found {values.size} singular values in [0, {sigma_max}] "
                f"but the dense oracle has {expected}"
            )
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)

    if not full_output:
        return values
    return ScanResult(
        values=values,
        grid=grid,
        det=det,
        jittered=grid[jittered],
        method=method,
        warnings=tuple(notes),
    )


def _to_tridiagonal(hb):
    return ComplexTridiagonal(alpha=hb.coupling, beta=hb.beta, gamma=hb.gamma)


@dataclass(frozen=True)
class BlockFactorization:
    """Block factors of ``H - sigma = U F L`` with 2x2 blocks.

    ``upper[k]`` is B_k F_{k+1}, ``middle[k]`` is F_k^{-1}, ``lower[k]`` is
    F_{k+1} C_{k+1}.
    """

    upper: np.ndarray
    middle: np.ndarray
    lower: np.ndarray

    @property
    def n(self):
        return self.middle.shape[0]

    def _assemble(self, which):
        n = self.n
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        for k in range(n):
            out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = np.eye(2) if which != "F" else self.middle[k]
        if which == "U":
            for k in range(n - 1):
                out[2 * k : 2 * k + 2, 2 * k + 2 : 2 * k + 4] = self.upper[k]
        elif which == "L":
            for k in range(n - 1):
                out[2 * k + 2 : 2 * k + 4, 2 * k : 2 * k + 2] = self.lower[k]
        return out

    def upper_dense(self):
        return self._assemble("U")

    def middle_dense(self):
        return self._assemble("F")

    def lower_dense(self):
        return self._assemble("L")

    def reconstruct(self):
        return self.upper_dense() @ self.middle_dense() @ self.lower_dense()


def mcf_factorize(hb, sigma):
    """Block bidiagonal factors of ``H - sigma`` built from the MCF tail."""
    hb = _as_block(hb)
    tail = mcf_tail(hb, sigma)
    if not tail.ok:
        raise PoleError(
            f"matrix continued fraction breaks down at k={tail.breakdown_index}",
            index=tail.breakdown_index,
        )
    n = hb.n
    middle = np.array([s.inverse_matrix() for s in tail.states])
    f = np.linalg.inv(middle[1:]) if n > 1 else np.zeros((0, 2, 2), dtype=complex)
    upper = np.array([hb.coupling_block(k) @ f[k] for k in range(n - 1)]).reshape(-1, 2, 2)
    lower = np.array([f[k] @ hb.coupling_block(k) for k in range(n - 1)]).reshape(-1, 2, 2)
    return BlockFactorization(upper=upper, middle=middle, lower=lower)


@dataclass(frozen=True)
class IterationTrace:
    """Rows ``(step, u, x, y)`` of a homogeneous MCF iteration and its outcome."""

    rows: list
    status: Status
    steps: int
    limit: Optional[tuple] = None
    reason: Optional[str] = None

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    def as_array(self):
        return np.array(self.rows, dtype=float)


def mcf_iterate_homogeneous(alpha, beta, gamma, sigma, max_iter, tol):
    """Iterate the constant-coefficient (u, x, y) map from ``(-sigma, beta, gamma)``.

    Convergence is declared when the largest component change drops below
    ``tol``.  A vanishing determinant (below 1e-14) or an iterate exceeding
    1e12 in magnitude ends the run as diverged.
    """
    alpha, beta = _finite(alpha, "alpha"), _finite(beta, "beta")
    gamma, sigma = _finite(gamma, "gamma"), _finite(sigma, "sigma")
    if int(max_iter) != max_iter or max_iter < 1:
        raise ValidationError("max_iter must be a positive integer")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    a2 = alpha * alpha
    u, x, y = -sigma, beta, gamma
    rows = [(0, u, x, y)]
    for step in range(1, int(max_iter) + 1):
        d = u * u - x * x - y * y
        if abs(d) < EPS_SING:
            return IterationTrace(rows, Status.DIVERGED, step, reason="singular")
        s = a2 / d
        un, xn, yn = -sigma - s * u, beta + s * x, gamma - s * y
        rows.append((step, un, xn, yn))
        if max(abs(un), abs(xn), abs(yn)) > DIVERGENCE_CAP or not math.isfinite(un + xn + yn):
            return IterationTrace(rows, Status.DIVERGED, step, reason="magnitude cap exceeded")
        if max(abs(un - u), abs(xn - x), abs(yn - y)) < tol:
            return IterationTrace(rows, Status.CONVERGED, step, limit=(un, xn, yn))
        u, x, y = un, xn, yn
    return IterationTrace(rows, Status.MAX_ITERATIONS, int(max_iter))
