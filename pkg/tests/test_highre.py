import numpy as np
import pytest

from linswim.engine import ShapeRangeError, check_field_contract, connection_field, integrate
from linswim.geometry import ScallopGeometry, build_scallop, circle_body, ellipse_body, rectangle_obstacle, scallop_mass_matrix
from linswim.highre import (
    CollisionStop,
    HighReModel,
    RichState,
    added_mass,
    added_mass_asymmetry,
    coupling_asymmetry,
    coupling_highre,
    full_mass,
    highre_connection,
    highre_free_field,
    integrate_second_order,
    kirchhoff_basis,
    obstacle_dynamics_step,
    shape_energy,
)
from linswim.se2 import BodyTwist, Pose

from conftest import cosine_stroke

G64 = ScallopGeometry(panel_count=64)
G128 = ScallopGeometry(panel_count=128)


@pytest.fixture(scope="module")
def scallop_basis():
    return kirchhoff_basis(build_scallop(G128))


def test_circle_added_mass():
    M = added_mass(kirchhoff_basis(circle_body(1.0, 256)), rho_f=1.0)
    assert M[1, 1] == pytest.approx(np.pi, rel=1e-2)
    assert M[2, 2] == pytest.approx(np.pi, rel=1e-2)
    assert abs(M[0, 0]) < 1e-10 and abs(M[1, 2]) < 1e-10


def test_ellipse_added_mass_along_major_axis():
    M = added_mass(kirchhoff_basis(ellipse_body(1.0, 0.4, 256)), rho_f=1.0)
    assert M[1, 1] == pytest.approx(np.pi * 0.4**2, rel=2e-2)
    assert M[2, 2] == pytest.approx(np.pi * 1.0**2, rel=2e-2)


def test_added_mass_refines_monotonically():
    errs = [abs(added_mass(kirchhoff_basis(circle_body(1.0, n)))[1, 1] - np.pi) for n in (32, 64, 128, 256)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_pairing_asymmetry_small_for_single_bodies():
    assert added_mass_asymmetry(kirchhoff_basis(ellipse_body(1.0, 0.5, 256))) < 1e-6


def test_scallop_pairing_asymmetry_decreases():
    a = [added_mass_asymmetry(kirchhoff_basis(build_scallop(ScallopGeometry(panel_count=n)))) for n in (32, 64, 128)]
    assert a[0] > a[1] > a[2]
    assert a[2] < 1e-3


def test_fluid_density_scaling(scallop_basis):
    np.testing.assert_allclose(added_mass(scallop_basis, 2.0), 2.0 * added_mass(scallop_basis, 1.0))
    np.testing.assert_allclose(coupling_highre(scallop_basis, 2.0), 2.0 * coupling_highre(scallop_basis, 1.0))


def test_coupling_symmetry(scallop_basis):
    N = coupling_highre(scallop_basis)
    assert abs(N[0, 0]) < 1e-12 and abs(N[2, 0]) < 1e-12
    assert N[1, 0] == pytest.approx(-1.8947, abs=1e-3)
    assert coupling_asymmetry(scallop_basis) < 1e-3


def test_coupling_axis_component_refinement():
    n128 = full_mass(np.pi / 2, G128).N[1, 0]
    n256 = full_mass(np.pi / 2, ScallopGeometry(panel_count=256)).N[1, 0]
    assert abs(n256 - n128) / abs(n256) < 1e-2


def test_full_mass_structure():
    g = G64
    rigid = scallop_mass_matrix(g, 1.0)
    np.testing.assert_allclose(full_mass(np.pi / 2, g, rho_0=1.0, rho_f=0.0).Mr, rigid)
    massless = full_mass(np.pi / 2, g, rho_0=0.0, rho_f=1.0).Mr
    assert np.linalg.eigvalsh(massless)[0] > 0
    Mr = full_mass(np.pi / 2, g).Mr
    np.testing.assert_allclose(Mr, Mr.T, atol=1e-12)
    assert np.linalg.eigvalsh(Mr)[0] > 0


def test_shape_energy_positive(scallop_basis):
    assert shape_energy(scallop_basis)[0, 0] > 0


def test_free_field_is_linear_and_zero_at_rest():
    np.testing.assert_allclose(highre_free_field(np.zeros(3), [np.pi / 2], [0.0], G64), 0.0)
    f = connection_field(highre_connection(G64), ((np.pi / 6, 5 * np.pi / 6),))
    assert check_field_contract(f, probes=10).linearity_residual < 1e-10


def test_connection_rejects_out_of_range():
    with pytest.raises(ShapeRangeError):
        highre_connection(G64)(np.array([0.2]))


def test_tabulated_matches_direct(highre_tab):
    direct = highre_connection(G64)
    for a in (np.pi / 6, 1.0, np.pi / 2, 2.2):
        np.testing.assert_allclose(highre_tab(np.zeros(3), [a], [1.0]), direct(np.array([a]))[:, 0], atol=1e-8)


def test_reciprocal_stroke_closes_direct():
    f = connection_field(highre_connection(G64), ((np.pi / 6, 5 * np.pi / 6),))
    tr = integrate(f, cosine_stroke(), Pose(0.4, (1.0, 2.0)), 2 * np.pi / 60)
    assert np.abs(tr.displacement()).max() < 1e-4


def test_first_order_reduction_keeps_zero_impulse():
    g = ScallopGeometry(panel_count=32)
    model = HighReModel(g)
    f = connection_field(highre_connection(g), ((np.pi / 6, 5 * np.pi / 6),))
    path = cosine_stroke(horizon=0.3)
    tr = integrate(f, path, Pose(0.2, (0.0, 0.0)), 1e-3)
    P = [model.impulse(s[0], q, qd, path.rate(t)) for t, s, q, qd in zip(tr.t, tr.s, tr.q, tr.qdot)]
    assert np.abs(P).max() < 1e-6


def test_second_order_free_run_keeps_impulse_small():
    model = HighReModel(ScallopGeometry(panel_count=32))
    path = cosine_stroke(horizon=np.pi)
    tr = integrate_second_order(model, path, Pose(0.2, (0.0, 0.0)), np.pi / 40)
    P = [model.impulse(s[0], q, qd, path.rate(t)) for t, s, q, qd in zip(tr.t, tr.s, tr.q, tr.qdot)]
    assert np.abs(P).max() < 1e-5


def test_free_space_derivatives_in_position_vanish():
    dA, dB, dC, _, _ = HighReModel(ScallopGeometry(panel_count=32)).derivatives(1.5, np.array([0.3, 1.0, 2.0]))
    assert np.all(dA[1] == 0) and np.all(dB[2] == 0)
    assert np.abs(dA[0]).max() > 0


def test_obstacle_step_raises_collision_stop():
    obst = rectangle_obstacle((-1.2, 0.0), 0.4, 4.0, 40)
    model = HighReModel(ScallopGeometry(panel_count=32), obst)
    state = RichState(Pose(np.pi / 2, (0.0, 0.0)), BodyTwist())
    with pytest.raises(CollisionStop):
        obstacle_dynamics_step(state, [np.pi / 2], [0.0], [0.0], model)


def test_obstacle_breaks_left_right_symmetry():
    obst = rectangle_obstacle((-3.0, 0.0), 0.4, 4.0, 40)
    model = HighReModel(ScallopGeometry(panel_count=32), obst)
    M, N, _ = model.body_matrices(np.pi / 2, np.array([np.pi / 2, 0.0, 0.0]))
    free = full_mass(np.pi / 2, ScallopGeometry(panel_count=32))
    assert np.abs(M - free.Mr).max() > 1e-4
    np.testing.assert_allclose(M, M.T, atol=1e-12)
    assert np.linalg.eigvalsh(M)[0] > 0
