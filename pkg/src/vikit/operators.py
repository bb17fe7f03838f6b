"""Evaluable operators and empirical class-membership checks.

Concrete maps: affine Gx + f, coordinatewise positive part, scalar
scaling, the rank-one integral map t -> t * integral(x), and sequential
composition. Monotonicity and demicontractivity are certified by seeded
sampling; demiclosedness is a declared property and is not checked here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .space import (
    SpaceDescriptor,
    SpaceElement,
    SpaceKind,
    inner,
    norm,
    random_element,
)


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge; carries the best estimate."""

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


@dataclass(frozen=True)
class AffineMatrix:
    """x -> G x + f."""

    G: np.ndarray
    f_vec: Optional[SpaceElement] = None

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError(f"G must be square, got shape {G.shape}")
        object.__setattr__(self, "G", G)

    def __call__(self, x: SpaceElement) -> SpaceElement:
        if self.G.shape[0] != x.space.dim:
            raise ValueError("matrix dimension does not match the space")
        y = self.G @ x.coords
        if self.f_vec is not None:
            y = y + self.f_vec.coords
        return SpaceElement(y, x.space)


@dataclass(frozen=True)
class PositivePart:
    """x -> max(x, 0) coordinatewise."""

    def __call__(self, x: SpaceElement) -> SpaceElement:
        return SpaceElement(np.maximum(x.coords, 0.0), x.space)


@dataclass(frozen=True)
class Scale:
    """x -> c x."""

    c: float

    def __post_init__(self):
        if not np.isfinite(self.c):
            raise ValueError("scale factor must be finite")

    def __call__(self, x: SpaceElement) -> SpaceElement:
        return SpaceElement(self.c * x.coords, x.space)


@dataclass(frozen=True)
class RankOneIntegral:
    """x -> (t -> t * integral of x over [0,1]) on a GRID_L2 space."""

    def __call__(self, x: SpaceElement) -> SpaceElement:
        if x.space.kind is not SpaceKind.GRID_L2:
            raise ValueError("RankOneIntegral is defined on GRID_L2 spaces")
        integral = float(np.sum(x.space.quad_weights * x.coords))
        return SpaceElement(integral * x.space.grid, x.space)


@dataclass(frozen=True)
class Composite:
    """Sequential composition, applied left to right."""

    parts: Sequence

    def __call__(self, x: SpaceElement) -> SpaceElement:
        for op in self.parts:
            x = op(x)
        return x


@dataclass(frozen=True)
class MappingInfo:
    """Declared analytic properties of a map, spot-checked empirically."""

    lipschitz_bound: Optional[float] = None
    demicontractive_lambda: Optional[float] = None
    monotone: bool = False

    def __post_init__(self):
        lam = self.demicontractive_lambda
        if lam is not None and not 0.0 <= lam < 1.0:
            raise ValueError("demicontractive constant must lie in [0,1)")


def apply(op, x: SpaceElement) -> SpaceElement:
    return op(x)


def spectral_norm(G: np.ndarray, rtol: float = 1e-10,
                  max_iter: int = 10_000) -> float:
    """||G|| via power iteration on G^T G."""
    G = np.asarray(G, dtype=float)
    GtG = G.T @ G
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(G.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = GtG @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new_est = nw  # Rayleigh-quotient-style estimate of the top eigenvalue
        v = w / nw
        if abs(new_est - est) <= rtol * max(new_est, 1e-300):
            return float(np.sqrt(new_est))
        est = new_est
    raise PowerIterationError(
        f"power iteration did not reach rtol={rtol} in {max_iter} iterations",
        best_estimate=float(np.sqrt(est)),
    )


def estimate_lipschitz(op, space: Optional[SpaceDescriptor] = None,
                       samples: int = 1000, seed: int = 0) -> float:
    """Lipschitz constant: exact spectral norm for affine maps, else the
    max sampled ratio ||op(x)-op(y)|| / ||x-y|| over random pairs."""
    if isinstance(op, AffineMatrix):
        return spectral_norm(op.G)
    if space is None:
        raise ValueError("sampling fallback needs a space descriptor")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        x = random_element(space, rng, -5.0, 5.0)
        y = random_element(space, rng, -5.0, 5.0)
        dxy = norm(x - y)
        if dxy == 0.0:
            continue
        best = max(best, norm(op(x) - op(y)) / dxy)
    return best


def check_monotone(op, space: SpaceDescriptor, samples: int = 1000,
                   seed: int = 0, tol: float = 1e-10) -> bool:
    """True iff <op(x)-op(y), x-y> >= -tol on all sampled pairs."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = random_element(space, rng, -5.0, 5.0)
        y = random_element(space, rng, -5.0, 5.0)
        if inner(op(x) - op(y), x - y) < -tol:
            return False
    return True


def check_demicontractive(op, lam: float, fixed_point: SpaceElement,
                          samples: int = 1000, seed: int = 0,
                          tol: float = 1e-10) -> bool:
    """Sampled check of ||Tx - z||^2 <= ||x - z||^2 + lam ||x - Tx||^2."""
    if norm(op(fixed_point) - fixed_point) > 1e-10:
        raise ValueError("provided point is not a fixed point of the operator")
    rng = np.random.default_rng(seed)
    z = fixed_point
    for _ in range(samples):
        x = random_element(fixed_point.space, rng, -5.0, 5.0)
        tx = op(x)
        lhs = norm(tx - z) ** 2
        rhs = norm(x - z) ** 2 + lam * norm(x - tx) ** 2
        if lhs > rhs + tol:
            return False
    return True


def mann_combination(op, lam: float, x: SpaceElement) -> SpaceElement:
    """lam * op(x) + (1 - lam) * x, the relaxed (averaged) map."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"relaxation parameter must be in (0,1), got {lam}")
    return lam * op(x) + (1.0 - lam) * x
