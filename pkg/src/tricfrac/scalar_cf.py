"""Scalar continued fractions for tridiagonal matrices.

The backward recurrence

    f_k = 1 / (a_k - z - b_k f_{k+1} c_{k+1}),    f_{n+1} = 0,

factorizes ``H - z = U F L`` with unit bidiagonal ``U``, ``L`` and diagonal
``F = diag(1/f_k)``.  The same coefficients give the resolvent in closed
product form and its (1,1) entry ``f_1(z)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._config import EPS_SING, dense_limit
from .errors import DimensionError, PoleError, ValidationError
from .operators import ComplexTridiagonal, GeneralTridiagonal
from .status import Status

__all__ = [
    "CFTail",
    "Factorization",
    "ScalarFixedPointReport",
    "ScalarTrace",
    "cf_tail",
    "factorize",
    "greens_f1",
    "resolvent_full",
    "scalar_fixed_points",
    "scalar_iterate",
]

DEFAULT_ALPHA = 1.0 / math.sqrt(2.0)
DIVERGENCE_CAP = 1e12
MARGINAL_BAND = 1e-10


def _as_general(h):
    if isinstance(h, ComplexTridiagonal):
        return h.to_general()
    if isinstance(h, GeneralTridiagonal):
        return h
    raise ValidationError(f"expected a tridiagonal operator, got {type(h).__name__}")


@dataclass(frozen=True)
class CFTail:
    """Continued-fraction coefficients ``f[0..n-1]`` (f_1..f_n).

    When ``breakdown_index`` (1-based) is set, the recurrence stopped there;
    entries at and below that position are NaN.
    """

    z: complex
    f: np.ndarray = field(repr=False)
    denominators: np.ndarray = field(repr=False)
    breakdown_index: Optional[int] = None

    @property
    def ok(self):
        return self.breakdown_index is None


@dataclass(frozen=True)
class Factorization:
    """The three factors of ``H - z = U F L``.

    ``u_super[k]`` is b_k f_{k+1}, ``f_diag[k]`` is 1/f_k and ``l_sub[k]`` is
    f_{k+1} c_{k+1} (1-based names, 0-based storage).
    """

    u_super: np.ndarray
    f_diag: np.ndarray
    l_sub: np.ndarray

    @property
    def n(self):
        return self.f_diag.size

    def upper(self):
        u = np.eye(self.n, dtype=complex)
        idx = np.arange(self.n - 1)
        u[idx, idx + 1] = self.u_super
        return u

    def middle(self):
        return np.diag(self.f_diag)

    def lower(self):
        lo = np.eye(self.n, dtype=complex)
        idx = np.arange(self.n - 1)
        lo[idx + 1, idx] = self.l_sub
        return lo

    def reconstruct(self):
        return self.upper() @ self.middle() @ self.lower()


def cf_tail(h, z):
    """Run the backward recurrence at shift ``z``.

    A denominator with magnitude below ``1e-14 * max(1, |a_k|, |z|)`` stops
    the recurrence and sets ``breakdown_index``; this is reported in-band.
    """
    h = _as_general(h)
    z = complex(z)
    if not cmath.isfinite(z):
        raise ValidationError("shift z must be finite")
    n = h.n
    a, b, c = h.a, h.b, h.c
    f = np.full(n, np.nan + 0j)
    den = np.full(n, np.nan + 0j)
    f_next = 0j
    for k in range(n - 1, -1, -1):
        d = a[k] - z
        if k < n - 1:
            d -= b[k] * f_next * c[k]
        den[k] = d
        if abs(d) < EPS_SING * max(1.0, abs(a[k]), abs(z)):
            return CFTail(z=z, f=f, denominators=den, breakdown_index=k + 1)
        f_next = 1.0 / d
        f[k] = f_next
    return CFTail(z=z, f=f, denominators=den)


def _checked_tail(h, z):
    tail = cf_tail(h, z)
    if not tail.ok:
        raise PoleError(
            f"continued fraction breaks down at k={tail.breakdown_index} for z={tail.z}",
            index=tail.breakdown_index,
        )
    return tail


def factorize(h, z):
    """Factor ``H - z`` into unit-upper, diagonal and unit-lower bidiagonal parts."""
    h = _as_general(h)
    tail = _checked_tail(h, z)
    f = tail.f
    return Factorization(
        u_super=h.b * f[1:],
        f_diag=tail.denominators.copy(),
        l_sub=f[1:] * h.c,
    )


def greens_f1(h, z):
    """Return ``[(H - z)^-1]_{11}``."""
    return complex(_checked_tail(h, z).f[0])


def resolvent_full(h, z, max_dim=None):
    """Dense resolvent ``(H - z)^-1`` from the explicit inverse factors.

    ``U^-1`` has entries u_{i+1}...u_j above the diagonal with
    u_{k+1} = -b_k f_{k+1}; ``L^-1`` has v_i...v_{j+1} below it with
    v_j = -c_j f_j.  The product ``L^-1 F^-1 U^-1`` is the resolvent.
    """
    h = _as_general(h)
    limit = dense_limit() if max_dim is None else int(max_dim)
    if h.n > limit:
        raise DimensionError(f"n={h.n} exceeds the dense limit {limit}")
    tail = _checked_tail(h, z)
    f = tail.f
    n = h.n
    # 0-based: up[m] multiplies across column m -> m+1, lo[m] across row m+1 -> m
    up = -h.b * f[1:]
    lo = -h.c * f[1:]
    u_inv = np.eye(n, dtype=complex)
    l_inv = np.eye(n, dtype=complex)
    for i in range(n - 1):
        u_inv[i, i + 1 :] = np.cumprod(up[i:])
        l_inv[i + 1 :, i] = np.cumprod(lo[i:])
    return l_inv @ (f[:, None] * u_inv)


@dataclass(frozen=True)
class ScalarFixedPointReport:
    """Fixed points of the homogeneous scalar map and their stability.

    ``roots`` are (f_plus, f_minus); ``derivatives`` the map's slope at each.
    """

    beta: float
    alpha: float
    energy: float
    roots: tuple
    derivatives: tuple
    stable_root: Optional[float]
    message: str

    @property
    def converges(self):
        return self.stable_root is not None


def scalar_fixed_points(beta, alpha=None, energy=0.0):
    """Fixed points of ``f -> 1/(beta - energy - alpha**2 f)``.

    With the default ``alpha = 1/sqrt(2)`` and zero energy the map is
    ``f -> 2/(2 beta - f)``, whose fixed points are ``beta +- sqrt(beta**2 - 2)``
    and whose slope there is ``f**2 / 2``.  The root with slope magnitude
    below one is the stable one; when the roots are complex there is none.
    """
    beta = float(beta)
    if not math.isfinite(beta):
        raise ValidationError("beta must be finite")
    a2 = DEFAULT_ALPHA**2 if alpha is None else float(alpha) ** 2
    if a2 <= 0 or not math.isfinite(a2):
        raise ValidationError("alpha must be finite and non-zero")
    b = beta - float(energy)
    disc = b * b - 4.0 * a2
    if abs(disc) <= 1e-12 * max(b * b, 4.0 * a2):
        disc = 0.0
    sq = cmath.sqrt(disc)
    if abs(b + sq) >= abs(b - sq):
        plus = (b + sq) / (2.0 * a2)
        minus = 2.0 / (b + sq)
    else:
        minus = (b - sq) / (2.0 * a2)
        plus = 2.0 / (b - sq)
    if disc >= 0:
        plus, minus = complex(plus.real, 0.0), complex(minus.real, 0.0)
    roots = (plus, minus)
    derivs = tuple(a2 * r * r for r in roots)

    stable = None
    if disc < 0:
        message = "no real fixed point; the continued fraction cannot converge"
    elif disc == 0:
        message = "double fixed point with unit slope; marginal"
    else:
        inside = [r.real for r, d in zip(roots, derivs) if abs(d) < 1.0 - MARGINAL_BAND]
        if len(inside) == 1:
            stable = inside[0]
            message = "stable fixed point found"
        else:
            message = "no fixed point with slope below one"
    return ScalarFixedPointReport(
        beta=beta,
        alpha=math.sqrt(a2),
        energy=float(energy),
        roots=roots,
        derivatives=derivs,
        stable_root=stable,
        message=message,
    )


@dataclass(frozen=True)
class ScalarTrace:
    values: list
    status: Status
    steps: int
    limit: Optional[float] = None
    reason: Optional[str] = None

    @property
    def converged(self):
        return self.status is Status.CONVERGED


def scalar_iterate(beta, f0, max_iter, tol, alpha=None, energy=0.0):
    """Iterate the homogeneous scalar map from ``f0``.

    Without ``alpha`` the map is ``f -> 2/(2 beta - f)``; otherwise the general
    ``f -> 1/(beta - energy - alpha**2 f)`` is used.
    """
    if int(max_iter) != max_iter or max_iter < 1:
        raise ValidationError("max_iter must be a positive integer")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    beta = float(beta)
    f = float(f0)
    values = [f]
    for step in range(1, int(max_iter) + 1):
        if alpha is None:
            num, den = 2.0, 2.0 * beta - f
        else:
            num, den = 1.0, beta - energy - float(alpha) ** 2 * f
        if abs(den) < EPS_SING:
            return ScalarTrace(values, Status.DIVERGED, step, reason="singular denominator")
        f_new = num / den
        values.append(f_new)
        if not math.isfinite(f_new) or abs(f_new) > DIVERGENCE_CAP:
            return ScalarTrace(values, Status.DIVERGED, step, reason="magnitude cap exceeded")
        if abs(f_new - f) < tol:
            return ScalarTrace(values, Status.CONVERGED, step, limit=f_new)
        f = f_new
    return ScalarTrace(values, Status.MAX_ITERATIONS, int(max_iter))
