"""Inner-product space shared by the solvers.

Two concrete spaces are supported: R^n with the usual dot product, and
functions on [0,1] sampled on a uniform grid with the L2 inner product
approximated by composite trapezoid quadrature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class SpaceKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    GRID_L2 = "grid_l2"


class SpaceMismatchError(ValueError):
    """Raised when two elements from different spaces are combined."""


class NonFiniteElementError(ValueError):
    """Raised when an element would contain NaN or Inf entries."""


@dataclass(frozen=True)
class SpaceDescriptor:
    """Identifies a space and its dimension.

    For GRID_L2 the dimension is the number of grid nodes t_i = i/(dim-1)
    on [0,1]; at least two nodes are required.
    """

    kind: SpaceKind
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if self.kind is SpaceKind.GRID_L2 and self.dim < 2:
            raise ValueError("GRID_L2 requires at least 2 grid nodes")

    @property
    def grid(self) -> np.ndarray:
        if self.kind is not SpaceKind.GRID_L2:
            raise ValueError("grid nodes only exist for GRID_L2 spaces")
        return np.linspace(0.0, 1.0, self.dim)

    @property
    def quad_weights(self) -> np.ndarray:
        """Inner-product weights: all ones for Euclidean, trapezoid for L2."""
        if self.kind is SpaceKind.EUCLIDEAN:
            return np.ones(self.dim)
        h = 1.0 / (self.dim - 1)
        w = np.full(self.dim, h)
        w[0] = w[-1] = 0.5 * h
        return w


def euclidean(n: int) -> SpaceDescriptor:
    return SpaceDescriptor(SpaceKind.EUCLIDEAN, n)


def grid_l2(n_grid: int = 101) -> SpaceDescriptor:
    return SpaceDescriptor(SpaceKind.GRID_L2, n_grid)


@dataclass(frozen=True)
class SpaceElement:
    """A point of a space: a coordinate vector plus its descriptor.

    Immutable; the underlying array is never mutated after construction.
    """

    coords: np.ndarray = field(repr=False)
    space: SpaceDescriptor

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float)
        if arr.shape != (self.space.dim,):
            raise SpaceMismatchError(
                f"coords shape {arr.shape} does not match dimension {self.space.dim}"
            )
        if not np.all(np.isfinite(arr)):
            raise NonFiniteElementError("element contains non-finite entries")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def __add__(self, other: "SpaceElement") -> "SpaceElement":
        _require_same_space(self, other)
        return SpaceElement(self.coords + other.coords, self.space)

    def __sub__(self, other: "SpaceElement") -> "SpaceElement":
        _require_same_space(self, other)
        return SpaceElement(self.coords - other.coords, self.space)

    def __rmul__(self, alpha: float) -> "SpaceElement":
        return SpaceElement(float(alpha) * self.coords, self.space)

    def __neg__(self) -> "SpaceElement":
        return SpaceElement(-self.coords, self.space)


def element(space: SpaceDescriptor, coords) -> SpaceElement:
    return SpaceElement(np.asarray(coords, dtype=float), space)


def zeros(space: SpaceDescriptor) -> SpaceElement:
    return SpaceElement(np.zeros(space.dim), space)


def _require_same_space(a: SpaceElement, b: SpaceElement):
    if a.space != b.space:
        raise SpaceMismatchError(f"space mismatch: {a.space} vs {b.space}")


def inner(a: SpaceElement, b: SpaceElement) -> float:
    """Inner product; trapezoid quadrature of a*b in the GRID_L2 case."""
    _require_same_space(a, b)
    if a.space.kind is SpaceKind.EUCLIDEAN:
        return float(a.coords @ b.coords)
    return float(np.sum(a.space.quad_weights * a.coords * b.coords))


def norm(a: SpaceElement) -> float:
    return float(np.sqrt(max(inner(a, a), 0.0)))


def axpy(alpha: float, a: SpaceElement, b: SpaceElement) -> SpaceElement:
    """alpha*a + b."""
    _require_same_space(a, b)
    return SpaceElement(float(alpha) * a.coords + b.coords, a.space)


def random_element(space: SpaceDescriptor, rng: np.random.Generator,
                   low: float = -1.0, high: float = 1.0) -> SpaceElement:
    return SpaceElement(rng.uniform(low, high, space.dim), space)
