"""Closed-form fixed points of the homogeneous (u, x, y) map and their stability.

At unit coupling the map is

    u' = -sigma - u/D,   x' = beta + x/D,   y' = gamma - y/D,   D = u^2 - x^2 - y^2.

Its fixed points have ``u`` among the real roots of a quartic P(u), ``y``
fixed by ``gamma*u = -sigma*y`` and ``x`` by a relation linear in ``x``.  A
fixed point attracts when the spectral radius of the map's Jacobian there is
below one.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InconsistencyError, SingularityError, ValidationError
from .matrix_cf import IterationTrace, mcf_iterate_homogeneous
from .status import Status

__all__ = [
    "QuarticPoly",
    "CompletedPoint",
    "FixedPointReport",
    "quartic_coeffs",
    "solve_quartic",
    "complete_fixed_point",
    "fixed_point_map",
    "jacobian",
    "jacobian_fd",
    "jacobian_radius",
    "convergence_verdict",
    "CONVERGENT",
    "DIVERGENT",
    "MARGINAL",
]

CONVERGENT = "Convergent"
DIVERGENT = "Divergent"
MARGINAL = "Marginal"

MARGINAL_BAND = 1e-10
CLOSURE_TOL = 1e-9
REAL_TOL = 1e-7


@dataclass(frozen=True)
class QuarticPoly:
    """Coefficients ``(c4, c3, c2, c1, c0)``, highest degree first."""

    coeffs: tuple

    def __call__(self, u):
        c4, c3, c2, c1, c0 = self.coeffs
        return (((c4 * u + c3) * u + c2) * u + c1) * u + c0

    def derivative(self, u):
        c4, c3, c2, c1, _ = self.coeffs
        return ((4 * c4 * u + 3 * c3) * u + 2 * c2) * u + c1


def quartic_coeffs(sigma, beta, gamma):
    """Quartic whose real roots are the fixed-point values of ``u`` (unit coupling).

    Only defined for ``sigma > 0``; use :func:`convergence_verdict`, which
    routes ``sigma == 0`` to the reduced complex map.
    """
    s, b, g = float(sigma), float(beta), float(gamma)
    if not (math.isfinite(s) and math.isfinite(b) and math.isfinite(g)):
        raise ValidationError("sigma, beta and gamma must be finite")
    if s <= 0:
        raise ValidationError(
            "quartic_coeffs requires sigma > 0; sigma == 0 is handled by convergence_verdict"
        )
    s2, g2, b2 = s * s, g * g, b * b
    return QuarticPoly(
        (
            -4 * s2 + 4 * g2,
            -8 * s2 * s + 8 * s * g2,
            s2 * b2 - 5 * s2 * s2 + 5 * g2 * s2 - 4 * s2,
            s2 * s * b2 - 4 * s2 * s - s2 * s2 * s + g2 * s2 * s,
            -s2 * s2,
        )
    )


def solve_quartic(p, polish_steps=2):
    """All roots of ``p`` (with multiplicity) from the companion matrix.

    Leading coefficients below ``1e-13 * max|c|`` are trimmed, so a
    degenerate quartic returns fewer roots.  Each eigenvalue is refined by
    Newton steps on ``p`` when a step lowers the residual.
    """
    coeffs = np.asarray(p.coeffs if isinstance(p, QuarticPoly) else p, dtype=float)
    big = np.max(np.abs(coeffs))
    if big == 0:
        raise ValidationError("the zero polynomial has no well-defined roots")
    lead = int(np.argmax(np.abs(coeffs) > 1e-13 * big))
    c = coeffs[lead:]
    deg = c.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    companion = np.zeros((deg, deg))
    companion[0, :] = -c[1:] / c[0]
    companion[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    roots = np.linalg.eigvals(companion).astype(complex)

    dc = c[:-1] * np.arange(deg, 0, -1)
    for i, r in enumerate(roots):
        for _ in range(polish_steps):
            val = np.polyval(c, r)
            der = np.polyval(dc, r)
            if der == 0:
                break
            cand = r - val / der
            if abs(np.polyval(c, cand)) < abs(val):
                r = cand
            else:
                break
        roots[i] = r
    return roots[np.lexsort((roots.imag, roots.real))]


def fixed_point_map(sigma, beta, gamma, point, alpha=1.0):
    """One application of the (u, x, y) map."""
    u, x, y = point
    d = u * u - x * x - y * y
    if d == 0:
        raise SingularityError("determinant u^2 - x^2 - y^2 vanishes")
    s = alpha * alpha / d
    return (-sigma - s * u, beta + s * x, gamma - s * y)


def _closes(sigma, beta, gamma, point):
    try:
        image = fixed_point_map(sigma, beta, gamma, point)
    except SingularityError:
        return False
    scale = max(1.0, max(abs(v) for v in point))
    return max(abs(a - b) for a, b in zip(image, point)) <= CLOSURE_TOL * scale


def _x_from_linear_relation(s, b, g, u):
    s2, g2 = s * s, g * g
    num = (
        4 * u**3 * s2
        - 4 * u**3 * g2
        + 6 * s**3 * u**2
        - 6 * u**2 * g2 * s
        + 4 * u * s2
        - s2 * u * b * b
        + 2 * u * s2 * s2
        - 2 * u * s2 * g2
        + 2 * s**3
    )
    return num / (b * s**3)


def _completions(sigma, beta, gamma, u):
    y = -gamma * u / sigma
    if beta != 0:
        return [(u, _x_from_linear_relation(sigma, beta, gamma, u), y)]
    # beta = 0: x (1 - 1/D) = 0, so x = 0 or D = 1
    candidates = [(u, 0.0, y)]
    x2 = u * u - y * y - 1.0
    if x2 > 0:
        candidates += [(u, math.sqrt(x2), y), (u, -math.sqrt(x2), y)]
    elif x2 == 0:
        candidates.append((u, 0.0, y))
    return [c for c in candidates if _closes(sigma, beta, gamma, c)]


def complete_fixed_point(sigma, beta, gamma, u):
    """Complete a real quartic root ``u`` to the fixed point ``(u, x, y)``.

    ``y = -gamma*u/sigma``; ``x`` solves the linear fixed-point relation,
    whose x-coefficient is ``beta*sigma**3``.  For ``beta == 0`` the branches
    ``x = 0`` and ``D = 1`` are tried instead.
    """
    sigma, beta, gamma, u = float(sigma), float(beta), float(gamma), float(u)
    if sigma <= 0:
        raise ValidationError("complete_fixed_point requires sigma > 0")
    found = _completions(sigma, beta, gamma, u)
    if not found:
        raise SingularityError(f"u={u} does not complete to a fixed point")
    return found[0]


def jacobian(sigma, beta, gamma, point, alpha=1.0):
    """Analytic 3x3 Jacobian of the (u, x, y) map at ``point``."""
    u, x, y = (float(v) for v in point)
    d = u * u - x * x - y * y
    if d == 0:
        raise SingularityError("determinant u^2 - x^2 - y^2 vanishes")
    a2 = alpha * alpha
    grad = np.array([2 * u, -2 * x, -2 * y])
    w = np.array([u, x, y])
    # d(w_i / D)/d q_j = delta_ij / D - w_i grad_j / D^2
    inner = np.eye(3) / d - np.outer(w, grad) / (d * d)
    return a2 * np.array([-1.0, 1.0, -1.0])[:, None] * inner


def jacobian_fd(sigma, beta, gamma, point, step=1e-6, alpha=1.0):
    """Central finite-difference Jacobian, for cross-checking :func:`jacobian`."""
    p = np.asarray(point, dtype=float)
    out = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        fp = np.array(fixed_point_map(sigma, beta, gamma, p + e, alpha))
        fm = np.array(fixed_point_map(sigma, beta, gamma, p - e, alpha))
        out[:, j] = (fp - fm) / (2 * step)
    return out


def jacobian_radius(sigma, beta, gamma, point, alpha=1.0):
    """Spectral radius of the Jacobian at ``point``."""
    return float(np.max(np.abs(np.linalg.eigvals(jacobian(sigma, beta, gamma, point, alpha)))))


@dataclass(frozen=True)
class CompletedPoint:
    u: float
    x: float
    y: float
    radius: float
    stable: bool

    @property
    def triple(self):
        return (self.u, self.x, self.y)


@dataclass(frozen=True)
class FixedPointReport:
    """Fixed points, their stability, and the verdict for one parameter set."""

    sigma: float
    beta: float
    gamma: float
    roots: np.ndarray
    completed: tuple
    stable: Optional[CompletedPoint]
    verdict: str
    route: str
    iteration: Optional[IterationTrace] = field(default=None, repr=False)

    @property
    def parameters(self):
        return (self.sigma, self.beta, self.gamma)

    def to_dict(self):
        return {
            "parameters": {"sigma": self.sigma, "beta": self.beta, "gamma": self.gamma},
            "route": self.route,
            "roots": [{"re": float(r.real), "im": float(r.imag)} for r in self.roots],
            "completed": [
                {"u": c.u, "x": c.x, "y": c.y, "radius": c.radius, "stable": c.stable}
                for c in self.completed
            ],
            "verdict": self.verdict,
        }


def _quadratic_roots(b, c):
    """Roots of ``t^2 + b t + c`` without cancellation.

    A discriminant within rounding of zero is taken as zero, so a double
    root stays double (and marginal) instead of splitting by sqrt(eps).
    """
    disc = b * b - 4 * c
    if abs(disc) <= 1e-12 * max(abs(b * b), abs(4 * c)):
        disc = 0.0
    sq = cmath.sqrt(disc)
    q = -0.5 * (b + sq) if abs(b + sq) >= abs(b - sq) else -0.5 * (b - sq)
    if q == 0:
        return (0j, 0j)
    return (q, c / q)


def _candidates(sigma, beta, gamma):
    """Fixed-point candidates as (roots, list of real triples, route)."""
    if sigma == 0:
        # u stays 0; w = x + iy follows w' = (beta + i gamma) - 1/w
        a = complex(beta, gamma)
        ws = _quadratic_roots(-a, 1.0)
        roots = np.array([0j, 0j])
        triples = [(0.0, w.real, w.imag) for w in ws]
        return roots, triples, "sigma=0"
    if gamma == 0:
        # p = u + x and m = u - x decouple: p' = (beta - sigma) - 1/p, m' = -(beta + sigma) - 1/m
        ps = _quadratic_roots(-(beta - sigma), 1.0)
        ms = _quadratic_roots(beta + sigma, 1.0)
        roots = np.array([0.5 * (p + m) for p in ps for m in ms])
        triples = [
            (0.5 * (p.real + m.real), 0.5 * (p.real - m.real), 0.0)
            for p in ps
            for m in ms
            if p.imag == 0 and m.imag == 0
        ]
        roots = roots[np.lexsort((roots.imag, roots.real))]
        return roots, triples, "gamma=0"
    roots = solve_quartic(quartic_coeffs(sigma, beta, gamma))
    triples = []
    for r in roots:
        if abs(r.imag) <= REAL_TOL * max(1.0, abs(r)):
            triples.extend(_completions(sigma, beta, gamma, float(r.real)))
    return roots, triples, "quartic"


def _distance(a, b):
    return max(abs(p - q) for p, q in zip(a, b))


def convergence_verdict(
    sigma, beta, gamma, alpha=1.0, max_iter=10_000, tol=1e-12, check=True
):
    """Classify convergence of the homogeneous MCF map and cross-check it.

    The fixed points are found in closed form, their Jacobian radii
    computed, and the verdict is ``Convergent`` when exactly one of them
    attracts, ``Marginal`` when a radius is within 1e-10 of one, and
    ``Divergent`` otherwise.

    With ``check`` the map is iterated from ``(-sigma, beta, gamma)``: a
    convergent verdict must be matched by an iteration limit within 1e-8 of
    the stable point, a divergent one by a non-converging run.  A mismatch
    raises :class:`InconsistencyError`.

    Parameters other than unit coupling are handled by rescaling
    ``sigma, beta, gamma`` by ``1/alpha``; reported points are scaled back.
    """
    alpha = float(alpha)
    if alpha == 0 or not math.isfinite(alpha):
        raise ValidationError("alpha must be finite and non-zero")
    sigma, beta, gamma = float(sigma), float(beta), float(gamma)
    if not (math.isfinite(sigma) and math.isfinite(beta) and math.isfinite(gamma)):
        raise ValidationError("sigma, beta and gamma must be finite")
    if sigma < 0:
        raise ValidationError("sigma must be non-negative")
    scale = abs(alpha)
    s, b, g = sigma / scale, beta / scale, gamma / scale

    roots, triples, route = _candidates(s, b, g)
    completed = []
    for t in triples:
        try:
            radius = jacobian_radius(s, b, g, t)
        except SingularityError:
            continue
        completed.append((t, radius))

    stable_idx = [i for i, (_, r) in enumerate(completed) if r < 1.0 - MARGINAL_BAND]
    marginal = any(abs(r - 1.0) <= MARGINAL_BAND for _, r in completed)

    trace = None
    if check or len(stable_idx) > 1:
        trace = mcf_iterate_homogeneous(1.0, b, g, s, max_iter, tol)

    if len(stable_idx) == 1:
        verdict = CONVERGENT
    elif len(stable_idx) > 1:
        # several attractors: the one reached from the standard start decides
        reached = [
            i for i in stable_idx
            if trace.converged and _distance(trace.limit, completed[i][0]) <= 1e-8
        ]
        stable_idx = reached[:1]
        verdict = CONVERGENT if stable_idx else MARGINAL
    elif marginal:
        verdict = MARGINAL
    else:
        verdict = DIVERGENT

    points = tuple(
        CompletedPoint(
            u=t[0] * scale, x=t[1] * scale, y=t[2] * scale,
            radius=r, stable=(i in stable_idx),
        )
        for i, (t, r) in enumerate(completed)
    )
    stable = points[stable_idx[0]] if stable_idx else None
    report = FixedPointReport(
        sigma=sigma, beta=beta, gamma=gamma,
        roots=np.asarray(roots) * scale,
        completed=points, stable=stable, verdict=verdict, route=route,
        iteration=trace,
    )

    if check:
        if verdict == CONVERGENT:
            ok = trace.converged and _distance(trace.limit, completed[stable_idx[0]][0]) <= 1e-8
            if not ok:
                raise InconsistencyError(
                    f"theory predicts convergence to {stable.triple} but iteration ended "
                    f"{trace.status} after {trace.steps} steps",
                    report=report, trace=trace,
                )
        elif verdict == DIVERGENT and trace.status is Status.CONVERGED:
            raise InconsistencyError(
                f"theory predicts divergence but iteration converged to {trace.limit}",
                report=report, trace=trace,
            )
    return report
