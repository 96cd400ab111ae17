import numpy as np
import pytest

from linswim.engine import (
    FieldEvaluationError,
    ShapePath,
    SwimmerField,
    TabulatedConnection,
    Trajectory,
    check_field_contract,
    flapping_bound,
    integrate,
    reparameterize,
)
from linswim.se2 import Pose
from linswim.synthetic import constant_field, holonomy_field, quadratic_field, zero_field

from conftest import cosine_stroke

Q0 = Pose(0.3, (1.0, -1.0))


def test_zero_rate_keeps_initial_pose(lowre_tab):
    still = ShapePath(lambda t: (1.2, 0.0), 3.0)
    tr = integrate(lowre_tab, still, Q0, 0.1)
    assert np.all(tr.q == Q0.as_array())


def test_constant_field_is_exact():
    c = np.array([0.5, -1.0, 2.0])
    path = ShapePath(lambda t: (0.5 + t, 1.0), 1.0)
    tr = integrate(constant_field(c), path, Q0, 0.01)
    np.testing.assert_allclose(tr.q, Q0.as_array() + np.outer(tr.t, c), atol=1e-12)


def test_trajectory_invariants(lowre_tab):
    tr = integrate(lowre_tab, cosine_stroke(horizon=1.0), Q0, 0.05)
    assert tr.t[0] == 0.0 and tr.t[-1] == 1.0
    assert np.all(np.diff(tr.t) > 0)
    assert tr.initial_pose == Q0
    assert tr.step == pytest.approx(0.05)


def test_step_adjusts_to_horizon():
    tr = integrate(zero_field(), ShapePath(lambda t: (t, 1.0), 1.0), Q0, 0.3)
    assert len(tr.t) == 4 and tr.t[-1] == 1.0


def test_rejects_bad_step():
    with pytest.raises(ValueError):
        integrate(zero_field(), ShapePath(lambda t: (t, 1.0), 1.0), Q0, 0.0)


def test_trajectory_times_must_increase():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)), np.zeros((2, 3)), np.zeros((2, 3)), 0.1)


def test_non_finite_field_reports_context():
    bad = SwimmerField(lambda q, s, sd: np.array([np.nan, 0, 0]))
    with pytest.raises(FieldEvaluationError, match=r"t=.*s=.*q="):
        integrate(bad, ShapePath(lambda t: (t, 1.0), 1.0), Q0, 0.1)


def test_highre_free_stroke_returns(highre_tab):
    tr = integrate(highre_tab, cosine_stroke(), Q0, 2 * np.pi / 200)
    assert np.abs(tr.displacement()).max() < 1e-4
    assert np.abs(tr.q[:, 1:] - tr.q[0, 1:]).max() > 1e-2


def test_reparameterize_identity():
    p = cosine_stroke()
    r = reparameterize(p, lambda t: t, lambda t: 1.0)
    for t in np.linspace(0, 2 * np.pi, 11):
        np.testing.assert_array_equal(r(t)[0], p(t)[0])
        np.testing.assert_array_equal(r(t)[1], p(t)[1])


def test_double_speed_matches_pointwise(lowre_tab):
    base = cosine_stroke()
    fast = reparameterize(base, lambda t: 2 * t, lambda t: 2.0, horizon=np.pi)
    h = 1e-3
    q = integrate(lowre_tab, base, Q0, h)
    qb = integrate(lowre_tab, fast, Q0, h / 2)
    np.testing.assert_allclose(qb.q, q.q, atol=1e-10)
    qc = integrate(lowre_tab, fast, Q0, h)
    assert np.abs(qc.q - q.at(2 * qc.t)).max() < 1e-6


def test_non_monotone_flapping_stays_in_ball(lowre_tab):
    T = 4.0
    base = cosine_stroke(horizon=T)
    flap = reparameterize(base, lambda t: T * np.sin(t) ** 2, lambda t: T * np.sin(2 * t), horizon=20.0)
    tr = integrate(lowre_tab, flap, Q0, 0.01)
    radius = flapping_bound(lowre_tab, base, T)
    assert np.linalg.norm(tr.q - Q0.as_array(), axis=1).max() <= radius


def test_field_contract_examples(lowre_tab):
    assert check_field_contract(lowre_tab).linearity_residual < 1e-10
    rep = check_field_contract(quadratic_field([1.0, 0.5, 0.0]))
    assert not rep.passed
    z = check_field_contract(zero_field())
    assert z.passed and z.bound_ratio == 0.0


def test_field_contract_is_deterministic(lowre_tab):
    assert check_field_contract(lowre_tab, seed=3) == check_field_contract(lowre_tab, seed=3)


def test_bound_ratio_respects_claimed_constant(lowre_tab, highre_tab):
    for f in (lowre_tab, highre_tab, holonomy_field()):
        assert check_field_contract(f).bound_ratio <= f.bound_K


def test_shape_path_rate_consistent():
    p = cosine_stroke()
    assert p.derivative_mismatch(h=1e-6) < 1e-5
    assert p.derivative_mismatch(h=1e-4) > p.derivative_mismatch(h=1e-6)


def test_shape_path_acceleration_fallback():
    p = ShapePath(lambda t: (np.sin(t), np.cos(t)), 3.0)
    assert p.acceleration(1.0)[0] == pytest.approx(-np.sin(1.0), abs=1e-8)


def test_rk4_order(lowre_tab):
    path = ShapePath(lambda t: (np.pi / 2 + np.pi / 3 * np.sin(t), np.pi / 3 * np.cos(t)), 3.0)
    h = 0.1
    q = [integrate(lowre_tab, path, Q0, h / 2**k).final_pose.as_array() for k in range(3)]
    ratio = np.linalg.norm(q[0] - q[2]) / np.linalg.norm(q[1] - q[2])
    assert ratio >= 12


def test_dense_output_interpolates(lowre_tab):
    tr = integrate(lowre_tab, cosine_stroke(), Q0, 0.01)
    fine = integrate(lowre_tab, cosine_stroke(), Q0, 0.005)
    np.testing.assert_allclose(tr.at(fine.t[1::2]), fine.q[1::2], atol=1e-8)
    with pytest.raises(ValueError):
        tr.at(10.0)


def test_csv_export(tmp_path, lowre_tab):
    tr = integrate(lowre_tab, cosine_stroke(horizon=0.5), Q0, 0.1)
    tr.to_csv(tmp_path / "a.csv")
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "t,alpha,theta,x,y"
    assert len(lines) == len(tr.t) + 1
    back = np.loadtxt(tmp_path / "a.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(back[:, 2:], tr.q)


def test_tabulated_connection_range():
    tab = TabulatedConnection(lambda s: np.array([[np.sin(s[0])]]), 0.0, 1.0, degree=16)
    assert tab(0.5)[0, 0] == pytest.approx(np.sin(0.5), abs=1e-12)
    with pytest.raises(ValueError):
        tab(1.5)
