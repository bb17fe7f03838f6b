"""Step-size policies: fixed, adaptive ratio rule, Armijo backtracking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

from .projections import FeasibleSet, project
from .space import SpaceElement, norm


class ArmijoSearchError(RuntimeError):
    """Backtracking exhausted; carries the last trial step."""

    def __init__(self, message: str, last_gamma: float):
        super().__init__(message)
        self.last_gamma = last_gamma


@dataclass(frozen=True)
class Fixed:
    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("fixed step must be positive")


@dataclass(frozen=True)
class Adaptive:
    gamma1: float
    phi: float

    def __post_init__(self):
        if self.gamma1 <= 0:
            raise ValueError("initial step must be positive")
        if not 0.0 < self.phi < 1.0:
            raise ValueError("phi must lie in (0,1)")


@dataclass(frozen=True)
class Armijo:
    rho: float
    l: float
    phi: float

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if not 0.0 < self.l < 1.0:
            raise ValueError("backtracking factor l must lie in (0,1)")
        if not 0.0 < self.phi < 1.0:
            raise ValueError("phi must lie in (0,1)")


StepPolicy = Union[Fixed, Adaptive, Armijo]


def adaptive_update(gamma_k: float, phi: float, s: SpaceElement, y: SpaceElement,
                    As: SpaceElement, Ay: SpaceElement) -> float:
    """Next step: min(phi * ||s-y|| / ||As-Ay||, gamma_k), or gamma_k when
    the operator displacement vanishes. Never increases."""
    denom = norm(As - Ay)
    # floating-point reading of the "As != Ay" branch
    if denom <= 1e-14 * max(1.0, norm(As), norm(Ay)):
        return gamma_k
    return min(phi * norm(s - y) / denom, gamma_k)


def validate_fixed(gamma: float, L: float) -> bool:
    """True iff gamma lies in the open interval (0, 1/L)."""
    if L <= 0:
        raise ValueError("Lipschitz constant must be positive")
    return 0.0 < gamma < 1.0 / L


def armijo_search(policy: Armijo, x: SpaceElement, A, C: FeasibleSet,
                  max_backtracks: int = 60) -> Tuple[float, SpaceElement]:
    """Largest gamma in {rho, rho*l, rho*l^2, ...} with
    gamma * ||A(x) - A(y)|| <= phi * ||x - y||, y = P_C(x - gamma A(x))."""
    if max_backtracks < 1:
        raise ValueError("max_backtracks must be >= 1")
    Ax = A(x)
    gamma = policy.rho
    for _ in range(max_backtracks):
        y = project(C, x + (-gamma) * Ax)
        if gamma * norm(Ax - A(y)) <= policy.phi * norm(x - y):
            return gamma, y
        gamma *= policy.l
    raise ArmijoSearchError(
        f"no acceptable step within {max_backtracks} backtracks", last_gamma=gamma
    )
