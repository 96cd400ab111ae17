import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from linswim.cover import (
    FINITE,
    GROWING,
    UndersampledPathError,
    image_integral,
    lift,
    lift_length,
    project,
    read_path_csv,
    verdict,
)

TWO_PI = 2 * np.pi


def test_constant_path_constant_lift():
    t = np.linspace(0, 5, 51)
    lp = lift(t, np.full(51, 0.7))
    assert np.all(lp.lifted == 0.7)
    assert lift_length(lp) == 0.0


def test_winding_recovered():
    t = np.linspace(0, 4 * np.pi, 4001)
    lp = lift(t, np.mod(t, TWO_PI), 0.0, circle=True)
    np.testing.assert_allclose(lp.lifted, t, atol=1e-12)
    assert lift_length(lp) == pytest.approx(4 * np.pi)


def test_base_point_shift():
    t = np.linspace(0, 4 * np.pi, 4001)
    s = np.mod(t, TWO_PI)
    a = lift(t, s, 0.0, circle=True)
    b = lift(t, s, TWO_PI, circle=True)
    np.testing.assert_allclose(b.lifted, a.lifted + TWO_PI, atol=1e-12)
    va, vb = verdict(a), verdict(b)
    assert va.verdict == vb.verdict
    assert va.lift_length == pytest.approx(vb.lift_length)


def test_base_point_must_lie_in_fiber():
    with pytest.raises(ValueError):
        lift([0, 1], [0.1, 0.2], base_point=1.0, circle=True)
    with pytest.raises(ValueError):
        lift([0, 1], [0.1, 0.2], base_point=0.1 + TWO_PI)


def test_undersampled_circle_path():
    t = np.arange(0, 10.0, 1.0)
    with pytest.raises(UndersampledPathError):
        lift(t, np.mod(3.0 * t, TWO_PI), circle=True)


def test_multi_dof_rejected():
    with pytest.raises(ValueError):
        lift([0, 1], np.zeros((2, 2)))


def test_damped_length_against_quadrature():
    t = np.linspace(0, 20, 200001)
    lp = lift(t, np.exp(-t) * np.sin(t))
    exact, _ = quad(lambda x: abs(np.exp(-x) * (np.cos(x) - np.sin(x))), 0, 20, limit=200, points=[np.pi / 4 + k * np.pi for k in range(7)])
    assert lift_length(lp) == pytest.approx(exact, abs=1e-4)


def test_length_monotone_in_horizon():
    t = np.linspace(0, 20, 2001)
    s = np.exp(-0.1 * t) * np.sin(3 * t)
    lengths = [lift_length(lift(t[:k], s[:k])) for k in range(10, 2001, 199)]
    assert all(a <= b for a, b in zip(lengths, lengths[1:]))


def test_verdicts():
    t = np.linspace(0, 30, 30001)
    assert verdict(lift(t, np.exp(-t) * np.sin(t)), K=1.0).verdict == FINITE
    assert verdict(lift(t, np.mod(t, TWO_PI), circle=True)).verdict == GROWING
    stroke = verdict(lift(t, np.pi / 3 * np.cos(t)))
    assert stroke.verdict == FINITE
    np.testing.assert_allclose(stroke.image, (-np.pi / 3, np.pi / 3), atol=1e-6)


def test_growing_lift_has_no_witness():
    t = np.linspace(0, 30, 3001)
    v = verdict(lift(t, np.mod(t, TWO_PI), circle=True), K=2.0)
    assert v.witness is None
    assert "no conclusion" in v.report()


def test_witness_closed_form():
    t = np.linspace(0, 1, 101)
    v = verdict(lift(t, -1.0 + 3.0 * t**2 * (3 - 2 * t)), K=2.0, tail_fraction=0.5, tol=np.inf)
    assert v.witness == pytest.approx(2.0 * (0.5 + 2.0))


def test_circle_image_integral_matches_quadrature():
    t = np.linspace(0, 1, 1001)
    lp = lift(t, project(-2.0 + 9.0 * t, True), -2.0, circle=True)
    exact, _ = quad(lambda x: abs(float(project(x, True))), -2.0, 7.0, points=[np.pi, 2 * np.pi], limit=200)
    assert image_integral(lp) == pytest.approx(exact, rel=1e-10)


def test_report_fields():
    t = np.linspace(0, 10, 1001)
    rep = verdict(lift(t, np.cos(t)), K=1.5).report()
    keys = [line.split(":")[0] for line in rep.strip().splitlines()]
    assert keys == ["verdict", "lift_length", "image", "tail_growth_rate", "bound_K", "witness_radius",
                    "horizon", "base_point", "circle"]


def test_read_path_csv(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("t,s\n0,0.5\n1,0.7\n")
    t, s = read_path_csv(p)
    np.testing.assert_array_equal(t, [0, 1])
    np.testing.assert_array_equal(s, [0.5, 0.7])
    p.write_text("t,s\n0,abc\n")
    with pytest.raises(ValueError):
        read_path_csv(p)


@settings(max_examples=100, deadline=None)
@given(st.integers(-5, 5), st.floats(0.05, 2.0), st.floats(-3.0, 3.0))
def test_round_trip_and_shift_invariance(k, w, s0):
    t = np.linspace(0, 10, 501)
    s = project(s0 + w * t + 0.5 * np.sin(t), True)
    a = lift(t, s, circle=True)
    b = lift(t, s, float(s[0]) + TWO_PI * k, circle=True)
    np.testing.assert_allclose(project(a.lifted, True), s, atol=1e-9)
    np.testing.assert_allclose(b.lifted - a.lifted, TWO_PI * k, atol=1e-9)
    assert verdict(a).verdict == verdict(b).verdict


def test_report_prints_plain_floats():
    t = np.linspace(0, 10, 1001)
    rep = verdict(lift(t, np.cos(t)), K=np.float64(1.5)).report()
    assert "bound_K: 1.5\n" in rep
