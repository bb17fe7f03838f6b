"""Seeded generators for the two benchmark problem families.

Example family 1: a random linear monotone operator over a box in R^n.
Example family 2: the positive-part operator over the unit ball of
L2([0,1]), discretized on a uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import operators as ops
from .projections import Ball, Box, FeasibleSet, project
from .space import (
    SpaceDescriptor,
    SpaceElement,
    SpaceKind,
    element,
    euclidean,
    grid_l2,
    norm,
    zeros,
)

RNG_ALGORITHM = "numpy-PCG64"


@dataclass(frozen=True)
class ProblemInstance:
    space: SpaceDescriptor
    A: object
    C: FeasibleSet
    T: object
    T_info: ops.MappingInfo
    F: Optional[object] = None
    f_visc: Optional[object] = None
    x_star: Optional[SpaceElement] = None
    L: Optional[float] = None
    problem_id: str = ""


@dataclass(frozen=True)
class RandomSpec:
    """Seeded draw for the random linear problem. B, E entries are uniform
    on [0,2] (E diagonal); the skew part is (M - M^T)/2 with M uniform
    on [-2,2]."""

    n: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")


def make_example1(spec: RandomSpec, f: Optional[SpaceElement] = None) -> ProblemInstance:
    """Box-constrained VI with A(x) = Gx + f, G = BB^T + S + E."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    B = rng.uniform(0.0, 2.0, (n, n))
    E = np.diag(rng.uniform(0.0, 2.0, n))
    M = rng.uniform(-2.0, 2.0, (n, n))
    S = 0.5 * (M - M.T)
    G = B @ B.T + S + E

    space = euclidean(n)
    A = ops.AffineMatrix(G, f)
    # a nonzero offset moves the solution off the origin; no closed form then
    x_star = zeros(space) if f is None else None
    return ProblemInstance(
        space=space,
        A=A,
        C=Box(-2.0, 5.0),
        T=ops.Scale(0.5),
        T_info=ops.MappingInfo(lipschitz_bound=0.5, demicontractive_lambda=0.0,
                               monotone=True),
        F=ops.Scale(0.5),
        f_visc=ops.Scale(0.5),
        x_star=x_star,
        L=ops.estimate_lipschitz(A),
        problem_id=f"ex1:n={n},seed={spec.seed}",
    )


def make_example2(n_grid: int = 101) -> ProblemInstance:
    """Positive-part operator over the unit ball of discretized L2([0,1]),
    with the rank-one integral map as the fixed-point constraint."""
    space = grid_l2(n_grid)
    return ProblemInstance(
        space=space,
        A=ops.PositivePart(),
        C=Ball(center=zeros(space), radius=1.0),
        T=ops.RankOneIntegral(),
        T_info=ops.MappingInfo(demicontractive_lambda=0.0),
        F=ops.Scale(0.5),
        f_visc=ops.Scale(0.5),
        x_star=zeros(space),
        L=1.0,
        problem_id=f"ex2:grid={n_grid}",
    )


INITIAL_KINDS = ("random_uniform", "t_squared", "t_plus_half_cos_t")


def initial_points(problem: ProblemInstance, kind: str,
                   seed: int = 0) -> Tuple[SpaceElement, SpaceElement]:
    """Paired starting points x^0 = x^1 per the named recipe."""
    space = problem.space
    if kind == "random_uniform":
        rng = np.random.default_rng(seed)
        x = SpaceElement(rng.uniform(0.0, 1.0, space.dim), space)
    elif kind == "t_squared":
        if space.kind is not SpaceKind.GRID_L2:
            raise ValueError("t_squared initial points need a GRID_L2 space")
        x = element(space, space.grid ** 2)
    elif kind == "t_plus_half_cos_t":
        if space.kind is not SpaceKind.GRID_L2:
            raise ValueError("t_plus_half_cos_t initial points need a GRID_L2 space")
        t = space.grid
        x = element(space, t + 0.5 * np.cos(t))
    else:
        raise ValueError(f"unknown initial-point kind {kind!r}")
    return x, x


def solution_residual(problem: ProblemInstance, gamma: float = 0.1) -> float:
    """||x* - P_C(x* - gamma A x*)||; near zero iff x* solves the VI."""
    if problem.x_star is None:
        raise ValueError("problem has no known solution")
    xs = problem.x_star
    return norm(xs - project(problem.C, xs + (-gamma) * problem.A(xs)))


def certify(problem: ProblemInstance, samples: int = 200, seed: int = 0) -> list:
    """Machine checks gating a problem before any solver run.

    Returns a list of human-readable failure strings; empty means certified.
    """
    failures = []
    if problem.x_star is not None:
        r = solution_residual(problem)
        if r > 1e-8:
            failures.append(f"VI solution residual {r:.3e} exceeds 1e-8")
        fp = norm(problem.T(problem.x_star) - problem.x_star)
        if fp > 1e-10:
            failures.append(f"fixed-point residual {fp:.3e} exceeds 1e-10")
    if not ops.check_monotone(problem.A, problem.space, samples=samples, seed=seed):
        failures.append("operator failed the sampled monotonicity check")
    lam = problem.T_info.demicontractive_lambda
    if lam is not None and problem.x_star is not None:
        if not ops.check_demicontractive(problem.T, lam, problem.x_star,
                                         samples=samples, seed=seed):
            failures.append(
                f"mapping failed the sampled demicontractivity check (lambda={lam})"
            )
    return failures
