import numpy as np
import pytest

from linswim.geometry import BodyBoundary, circle_body, ellipse_body, rectangle_obstacle, rigid_mode_data
from linswim.panels import (
    IllConditionedError,
    IncompatibleFluxError,
    PanelOperator,
    solve_neumann,
    source_influence,
)


def _translation_x(b):
    return rigid_mode_data(b)[:, 1]


def test_zero_data_gives_zero_strengths():
    b = circle_body(1.0, 64)
    sol = solve_neumann(b, np.zeros(b.n_panels))
    assert np.all(sol.strengths == 0)


def test_circle_translation_matches_dipole():
    # phi = -a^2 x / |x|^2 for a unit-speed translation along x
    b = circle_body(1.0, 128)
    sol = solve_neumann(b, _translation_x(b))
    theta = np.arctan2(b.midpoints[:, 1], b.midpoints[:, 0])
    vt = np.einsum("nk,nk->n", sol.velocity(b.midpoints), b.tangents)
    assert np.abs(vt - np.sin(theta)).max() < 1e-2
    far = np.array([[3.0, 1.0], [-2.0, 4.0]])
    r2 = np.sum(far**2, axis=1)
    grad = np.stack([-(far[:, 1] ** 2 - far[:, 0] ** 2) / r2**2, 2 * far[:, 0] * far[:, 1] / r2**2], axis=1)
    np.testing.assert_allclose(sol.velocity(far), grad, atol=2e-3)


def test_collocation_residual_is_at_solver_tolerance():
    b = ellipse_body(1.0, 0.3, 128)
    sol = solve_neumann(b, rigid_mode_data(b))
    assert sol.residual() < 1e-8


def test_boundary_condition_residual_refines():
    # fluid velocity on the exact circle against the dipole, 64 -> 256 panels
    errs = []
    for n in (64, 256):
        b = circle_body(1.0, n)
        sol = solve_neumann(b, _translation_x(b))
        theta = np.arctan2(b.midpoints[:, 1], b.midpoints[:, 0])
        p = np.stack([np.cos(theta), np.sin(theta)], axis=1) * (1 + 1e-9)
        x, y = p.T
        r2 = x * x + y * y
        exact = np.stack([(x * x - y * y) / r2**2, 2 * x * y / r2**2], axis=1)
        errs.append(np.abs(sol.velocity(p) - exact).max())
    assert errs[0] / errs[1] >= 4.0


def test_boundary_potential_error_decreases():
    errs = []
    for n in (32, 64, 128, 256):
        b = circle_body(1.0, n)
        sol = solve_neumann(b, _translation_x(b))
        r2 = np.sum(b.midpoints**2, axis=1)
        errs.append(np.abs(sol.potential_at_panels + b.midpoints[:, 0] / r2).max())
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_incompatible_flux_rejected():
    b = circle_body(1.0, 32)
    with pytest.raises(IncompatibleFluxError):
        solve_neumann(b, np.ones(b.n_panels))


def test_touching_loops_are_ill_conditioned():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    b = BodyBoundary((sq, sq.copy()), np.zeros((2, 0, 3)), (True, True), (None, None))
    with pytest.raises(IllConditionedError):
        PanelOperator(b)


def test_self_influence_limit_from_fluid_side():
    b = circle_body(1.0, 16)
    _, vel = source_influence(b.midpoints, b)
    normal_self = np.einsum("nk,nk->n", vel[np.arange(16), np.arange(16)], -b.normals)
    np.testing.assert_allclose(normal_self, 0.5)


def test_obstacle_panels_carry_zero_data():
    b = circle_body(0.5, 64)
    o = rectangle_obstacle((3.0, 0.0), 0.5, 3.0, 60, n_modes=0)
    sol = solve_neumann(b, _translation_x(b), obstacle=o)
    assert sol.strengths.shape == (64 + o.n_panels,)
    np.testing.assert_allclose(sol.normal_derivative[64:], 0.0, atol=1e-12)
