import numpy as np
import pytest

from vikit.projections import (
    Ball,
    Box,
    HalfSpace,
    contains,
    halfspace_residual,
    project,
    project_oracle,
    sample_point,
)
from vikit.space import SpaceMismatchError, element, euclidean, grid_l2, inner, norm, zeros


def _random_set(variant, n, rng):
    sp = euclidean(n)
    if variant == "box":
        lo = rng.uniform(-3, 0, n)
        return Box(lo, lo + rng.uniform(0.5, 3, n)), sp
    if variant == "ball":
        return Ball(element(sp, rng.uniform(-1, 1, n)), float(rng.uniform(0.5, 2))), sp
    normal = element(sp, rng.uniform(-1, 1, n))
    anchor = element(sp, rng.uniform(-1, 1, n))
    return HalfSpace(normal, anchor), sp


def test_box_clamp():
    sp = euclidean(3)
    x = element(sp, [0.0, 7.0, -3.0])
    p = project(Box(-2.0, 5.0), x)
    assert np.array_equal(p.coords, [0.0, 5.0, -2.0])


def test_unit_ball_radial():
    sp = euclidean(2)
    x = element(sp, [0.0, 2.0])
    p = project(Ball(zeros(sp), 1.0), x)
    assert np.allclose(p.coords, [0.0, 1.0])


def test_ball_uses_the_l2_grid_norm():
    sp = grid_l2(101)
    x = element(sp, 2.0 * np.ones(101))  # constant 2 has L2 norm 2, sup norm 2
    p = project(Ball(zeros(sp), 1.0), x)
    assert norm(p) == pytest.approx(1.0, abs=1e-12)


def test_halfspace_orthogonal_drop():
    sp = euclidean(2)
    hs = HalfSpace(element(sp, [1, 0]), zeros(sp))
    p = project(hs, element(sp, [2, 3]))
    assert np.allclose(p.coords, [0.0, 3.0])


def test_degenerate_halfspace_is_identity():
    sp = euclidean(2)
    hs = HalfSpace(zeros(sp), zeros(sp))
    x = element(sp, [4, -9])
    assert np.array_equal(project(hs, x).coords, x.coords)


def test_halfspace_residual_values():
    sp = euclidean(2)
    hs = HalfSpace(element(sp, [1, 0]), zeros(sp))
    assert halfspace_residual(hs, zeros(sp)) == 0.0
    assert halfspace_residual(hs, element(sp, [-1, 7])) == -1.0
    assert halfspace_residual(hs, element(sp, [2, 0])) == 2.0


def test_space_mismatch():
    hs = HalfSpace(element(euclidean(2), [1, 0]), zeros(euclidean(2)))
    with pytest.raises(SpaceMismatchError):
        project(hs, element(euclidean(3), [1, 2, 3]))


def test_bad_sets_rejected():
    with pytest.raises(ValueError):
        Box(1.0, 0.0)
    with pytest.raises(ValueError):
        Ball(zeros(euclidean(2)), 0.0)


@pytest.mark.parametrize("variant", ["box", "ball", "half"])
def test_variational_characterization_and_firm_nonexpansiveness(variant):
    rng = np.random.default_rng(21)
    for _ in range(50):
        s, sp = _random_set(variant, int(rng.integers(2, 7)), rng)
        x = element(sp, rng.uniform(-4, 4, sp.dim))
        x2 = element(sp, rng.uniform(-4, 4, sp.dim))
        px, px2 = project(s, x), project(s, x2)
        y = sample_point(s, sp, rng)
        assert contains(s, y, tol=1e-9)
        # <x - Px, y - Px> <= 0 for all members y
        assert inner(x - px, y - px) <= 1e-10
        # ||Px - Px'||^2 <= <Px - Px', x - x'>
        assert norm(px - px2) ** 2 <= inner(px - px2, x - x2) + 1e-10


@pytest.mark.parametrize("variant", ["box", "ball", "half"])
def test_idempotence(variant):
    rng = np.random.default_rng(33)
    for _ in range(50):
        s, sp = _random_set(variant, int(rng.integers(2, 7)), rng)
        x = element(sp, rng.uniform(-4, 4, sp.dim))
        p = project(s, x)
        assert norm(project(s, p) - p) <= 1e-12


def test_oracle_fixed_point_of_members():
    rng = np.random.default_rng(4)
    for variant in ("box", "ball", "half"):
        s, sp = _random_set(variant, 4, rng)
        y = sample_point(s, sp, rng)
        assert norm(project_oracle(s, y) - y) <= 1e-8


@pytest.mark.parametrize("variant", ["box", "ball", "half"])
def test_oracle_agrees_with_closed_form(variant):
    rng = np.random.default_rng(77)
    for i in range(100):
        s, sp = _random_set(variant, int(rng.integers(2, 7)), rng)
        x = element(sp, rng.uniform(-4, 4, sp.dim))
        gap = norm(project(s, x) - project_oracle(s, x, n_restarts=3, seed=i))
        assert gap <= 1e-8
