"""Metric projections onto the feasible sets used by the solvers.

Closed-form projectors for boxes, balls and halfspaces, plus a slow
multi-start oracle (scipy SLSQP) used only to validate the closed forms
on small Euclidean instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize

from .space import (
    SpaceDescriptor,
    SpaceElement,
    SpaceKind,
    SpaceMismatchError,
    inner,
    norm,
)


@dataclass(frozen=True)
class Box:
    """{x : lower <= x_i <= upper} coordinatewise. Bounds may be scalars."""

    lower: Union[float, np.ndarray]
    upper: Union[float, np.ndarray]

    def __post_init__(self):
        if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
            raise ValueError("box requires lower <= upper coordinatewise")


@dataclass(frozen=True)
class Ball:
    center: SpaceElement
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class HalfSpace:
    """{x : <normal, x - anchor> <= 0}.

    A zero normal is the degenerate case and denotes the whole space.
    """

    normal: SpaceElement
    anchor: SpaceElement

    def __post_init__(self):
        if self.normal.space != self.anchor.space:
            raise SpaceMismatchError("halfspace normal and anchor live in different spaces")


FeasibleSet = Union[Box, Ball, HalfSpace]


def _set_space(s: FeasibleSet) -> SpaceDescriptor | None:
    if isinstance(s, Ball):
        return s.center.space
    if isinstance(s, HalfSpace):
        return s.normal.space
    return None  # a box carries no space of its own


def project(s: FeasibleSet, x: SpaceElement) -> SpaceElement:
    """Nearest point of the set in the space's norm."""
    sp = _set_space(s)
    if sp is not None and sp != x.space:
        raise SpaceMismatchError("point and set live in different spaces")
    if isinstance(s, Box):
        return SpaceElement(np.clip(x.coords, s.lower, s.upper), x.space)
    if isinstance(s, Ball):
        d = x - s.center
        dist = norm(d)
        if dist <= s.radius:
            return x
        return s.center + (s.radius / dist) * d
    # halfspace: one-step orthogonal correction
    nn = inner(s.normal, s.normal)
    if nn == 0.0:
        return x
    viol = inner(s.normal, x - s.anchor)
    if viol <= 0.0:
        return x
    return x - (viol / nn) * s.normal


def halfspace_residual(s: HalfSpace, x: SpaceElement) -> float:
    """<normal, x - anchor>; nonpositive iff x belongs to the halfspace."""
    return inner(s.normal, x - s.anchor)


def contains(s: FeasibleSet, x: SpaceElement, tol: float = 1e-10) -> bool:
    if isinstance(s, Box):
        return bool(
            np.all(x.coords >= np.asarray(s.lower) - tol)
            and np.all(x.coords <= np.asarray(s.upper) + tol)
        )
    if isinstance(s, Ball):
        return norm(x - s.center) <= s.radius + tol
    return halfspace_residual(s, x) <= tol


def sample_point(s: FeasibleSet, space: SpaceDescriptor,
                 rng: np.random.Generator) -> SpaceElement:
    """A random member of the set (used by the membership-style tests)."""
    if isinstance(s, Box):
        lo = np.broadcast_to(np.asarray(s.lower, dtype=float), (space.dim,))
        hi = np.broadcast_to(np.asarray(s.upper, dtype=float), (space.dim,))
        return SpaceElement(rng.uniform(lo, hi), space)
    if isinstance(s, Ball):
        d = SpaceElement(rng.standard_normal(space.dim), space)
        nd = norm(d)
        if nd == 0.0:
            return s.center
        r = s.radius * rng.uniform() ** (1.0 / space.dim)
        return s.center + (r / nd) * d
    # halfspace: project a random point, then pull strictly inside
    x = SpaceElement(rng.uniform(-2.0, 2.0, space.dim), space)
    p = project(s, x)
    nn = inner(s.normal, s.normal)
    if nn == 0.0:
        return p
    return p - (rng.uniform(0.0, 1.0) / np.sqrt(nn)) * s.normal


def _kkt_polish(s: FeasibleSet, x0: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Newton refinement of the nearest-point optimality system for the
    smooth-constraint variants; boxes are handled exactly by the solver's
    native bounds and need no polish."""
    if isinstance(s, Ball):
        c, r = s.center.coords, s.radius

        def g(v):
            return float(np.sum((v - c) ** 2) - r ** 2)

        def dg(v):
            return 2.0 * (v - c)

        hess = 2.0 * np.eye(len(x0))
    elif isinstance(s, HalfSpace):
        a, b = s.normal.coords, s.anchor.coords

        def g(v):
            return float(a @ (v - b))

        def dg(v):
            return a

        hess = np.zeros((len(x0), len(x0)))
    else:
        return y

    if g(y) < -1e-9:  # constraint inactive: the projection is x itself
        return x0 if g(x0) <= 0.0 else y
    n = len(x0)
    grad = dg(y)
    gg = float(grad @ grad)
    if gg == 0.0:
        return y
    mu = max(-(float((y - x0) @ grad)) / gg, 0.0) or 1e-12
    for _ in range(10):
        grad = dg(y)
        F = np.concatenate([y - x0 + mu * grad, [g(y)]])
        if np.linalg.norm(F) < 1e-14:
            break
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = np.eye(n) + mu * hess
        J[:n, n] = grad
        J[n, :n] = grad
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        y = y + step[:n]
        mu = mu + step[n]
    return y


def project_oracle(s: FeasibleSet, x: SpaceElement, n_restarts: int = 3,
                   seed: int = 0) -> SpaceElement:
    """Brute-force nearest point: multi-start SLSQP over explicit
    membership constraints, followed by a Newton polish of the optimality
    system. Independent of `project`. Euclidean small-dimension use only.
    """
    if x.space.kind is not SpaceKind.EUCLIDEAN:
        raise ValueError("oracle projector supports Euclidean spaces only")
    n = x.space.dim
    x0 = x.coords

    constraints = []
    bounds = None
    if isinstance(s, Box):
        lo = np.broadcast_to(np.asarray(s.lower, dtype=float), (n,))
        hi = np.broadcast_to(np.asarray(s.upper, dtype=float), (n,))
        bounds = list(zip(lo, hi))
    elif isinstance(s, Ball):
        c, r = s.center.coords, s.radius
        constraints.append({
            "type": "ineq",
            "fun": lambda y: r ** 2 - np.sum((y - c) ** 2),
            "jac": lambda y: -2.0 * (y - c),
        })
    else:
        a, b = s.normal.coords, s.anchor.coords
        constraints.append({
            "type": "ineq",
            "fun": lambda y: -(a @ (y - b)),
            "jac": lambda y: -a,
        })

    def objective(y):
        return 0.5 * np.sum((y - x0) ** 2)

    def gradient(y):
        return y - x0

    rng = np.random.default_rng(seed)
    best, best_val = None, np.inf
    starts = [x0] + [x0 + rng.standard_normal(n) for _ in range(max(n_restarts - 1, 0))]
    for y0 in starts:
        res = minimize(objective, y0, jac=gradient, method="SLSQP",
                       bounds=bounds, constraints=constraints,
                       options={"maxiter": 1000, "ftol": 1e-18})
        y = _kkt_polish(s, x0, np.asarray(res.x, dtype=float))
        cand = SpaceElement(y, x.space)
        val = objective(y)
        if contains(s, cand, tol=1e-8) and val < best_val:
            best, best_val = cand, val
    if best is None:
        # all starts failed feasibility; fall back to the last polished point
        best = SpaceElement(y, x.space)
    return best
