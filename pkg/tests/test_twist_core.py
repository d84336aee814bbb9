import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab.twist_core import (
    EquatorAngle,
    SphereCotangentPoint,
    circle_action,
    constraint_tangent_basis,
    dehn_twist,
    involution,
    make_profile,
    rotation_map,
    symplectic_form,
    twist_jacobian,
)

RNG = np.random.default_rng(20240817)


def random_point(n=2, vmax=0.5, rng=RNG):
    x = rng.normal(size=n + 1)
    v = rng.normal(size=n + 1) * vmax
    return SphereCotangentPoint(n, x, v)


def circle_point(n=2, t=0.7, s=0.05):
    x = np.zeros(n + 1)
    v = np.zeros(n + 1)
    x[0], x[-1] = np.sin(t), -np.cos(t)
    v[0], v[-1] = s * np.cos(t), s * np.sin(t)
    return SphereCotangentPoint(n, x, v)


class TestProfile:
    def test_center_value(self):
        assert make_profile(0.1).eval(0.0) == pytest.approx(np.pi, abs=1e-14)

    def test_vanishes_outside_support(self):
        r = make_profile(0.1)
        assert r.eval(0.1) == 0.0
        assert r.eval(0.2) == 0.0
        assert r.eval(-0.1) == pytest.approx(2 * np.pi)

    def test_antisymmetry(self):
        r = make_profile(0.1)
        for t in np.linspace(-0.3, 0.3, 61):
            assert r.eval(-t) + r.eval(t) == pytest.approx(2 * np.pi, abs=1e-12)

    def test_derivative_matches_finite_difference(self):
        r = make_profile(0.1)
        h = 1e-6
        for t in np.linspace(-0.095, 0.095, 39):
            fd = (r.eval(t + h) - r.eval(t - h)) / (2 * h)
            assert r.deriv(t) == pytest.approx(fd, abs=1e-5)

    def test_derivative_sign_and_flatness(self):
        r = make_profile(0.1)
        assert r.deriv(0.0) == 0.0
        for t in np.linspace(0.005, 0.095, 19):
            assert r.deriv(t) < 0.0
            assert r.deriv(-t) == pytest.approx(r.deriv(t), abs=1e-12)

    def test_rejects_bad_epsilon(self):
        for eps in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                make_profile(eps)

    def test_inverse_on_support(self):
        r = make_profile(0.1)
        t = r.inverse_on_support(2 * np.pi / 3)
        assert r.eval(t) == pytest.approx(2 * np.pi / 3, abs=1e-10)


class TestCircleAction:
    def test_identity_angles(self):
        p = random_point()
        for a in (0.0, 2 * np.pi):
            q = circle_action(p, a)
            assert q.close_to(p, tol=1e-9)

    def test_preserves_vnorm(self):
        p = random_point()
        for a in (0.3, 1.7, -2.5, 5.0):
            assert circle_action(p, a).vnorm == pytest.approx(p.vnorm, abs=1e-12)

    def test_rejects_zero_section(self):
        p = SphereCotangentPoint(2, np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            circle_action(p, 1.0)


class TestDehnTwist:
    def test_zero_section_antipodal(self):
        p = SphereCotangentPoint(2, np.array([0.3, -0.4, 0.5]))
        q = dehn_twist(p, make_profile(0.1), power=1)
        assert np.allclose(q.x, -p.x) and q.vnorm == 0.0
        q2 = dehn_twist(p, make_profile(0.1), power=2)
        assert np.allclose(q2.x, p.x)

    def test_identity_outside_support(self):
        prof = make_profile(0.1)
        p = random_point(vmax=0.0)
        p = SphereCotangentPoint(2, p.x, np.cross(p.x, [1.0, 0.0, 0.0]) * 0.5)
        for power in (-3, 1, 4):
            assert dehn_twist(p, prof, power).close_to(p, tol=1e-12)

    def test_inverse_pair(self):
        prof = make_profile(0.1)
        p = random_point(vmax=0.05)
        q = dehn_twist(dehn_twist(p, prof, 1), prof, -1)
        assert q.close_to(p, tol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 10**6),
        k=st.integers(-5, 5),
        l=st.integers(-5, 5),
    )
    def test_group_law_and_constraints(self, seed, k, l):
        rng = np.random.default_rng(seed)
        prof = make_profile(0.1)
        p = random_point(vmax=0.08, rng=rng)
        a = dehn_twist(dehn_twist(p, prof, k), prof, l)
        b = dehn_twist(p, prof, k + l)
        assert a.close_to(b, tol=1e-9)
        rx, rv = a.constraint_residuals()
        assert rx < 1e-9 and rv < 1e-9
        assert a.vnorm == pytest.approx(p.vnorm, abs=1e-12)


class TestRotationMap:
    def test_fixes_poles(self):
        n = 3
        for sign in (1.0, -1.0):
            x = np.zeros(n + 1)
            x[-1] = sign
            p = SphereCotangentPoint(n, x)
            th = EquatorAngle(np.array([0.6, 0.0, 0.8]))
            assert rotation_map(p, th).close_to(p, tol=1e-12)

    def test_reference_angle_is_identity(self):
        p = circle_point(n=3, t=1.1, s=0.03)
        th = EquatorAngle(np.array([1.0, 0.0, 0.0]))
        assert rotation_map(p, th).close_to(p, tol=1e-12)

    def test_commutes_with_twist_on_circle(self):
        prof = make_profile(0.1)
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = circle_point(n=3, t=rng.uniform(0, 2 * np.pi), s=rng.uniform(-0.09, 0.09))
            th = EquatorAngle(rng.normal(size=3))
            a = dehn_twist(rotation_map(p, th), prof, 1)
            b = rotation_map(dehn_twist(p, prof, 1), th)
            assert a.close_to(b, tol=1e-9)

    def test_commutes_with_circle_action(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = circle_point(n=3, t=rng.uniform(0, 2 * np.pi), s=rng.uniform(0.01, 0.09))
            th = EquatorAngle(rng.normal(size=3))
            a = circle_action(rotation_map(p, th), 0.9)
            b = rotation_map(circle_action(p, 0.9), th)
            assert a.close_to(b, tol=1e-9)

    def test_rejects_off_circle_points(self):
        p = random_point(n=3, vmax=0.1)
        with pytest.raises(ValueError):
            rotation_map(p, EquatorAngle(np.array([1.0, 0.0, 0.0])))


class TestInvolution:
    def test_involutive(self):
        p = random_point(n=4, vmax=0.3)
        assert involution(involution(p)).close_to(p, tol=1e-12)

    def test_fixes_great_circle(self):
        p = circle_point(n=4, t=0.4, s=0.06)
        assert involution(p).close_to(p, tol=1e-12)

    def test_commutes_with_twist(self):
        prof = make_profile(0.1)
        p = random_point(n=3, vmax=0.08)
        a = involution(dehn_twist(p, prof, 2))
        b = dehn_twist(involution(p), prof, 2)
        assert a.close_to(b, tol=1e-9)


class TestJacobian:
    def test_identity_outside_support(self):
        prof = make_profile(0.1)
        x = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 0.5, 0.0])
        p = SphereCotangentPoint(2, x, v)
        jac = twist_jacobian(p, prof, 1)
        basis = constraint_tangent_basis(p)
        restricted = basis.T @ jac @ basis
        assert np.allclose(restricted, np.eye(4), atol=1e-6)

    def test_unit_determinant_on_tangent_space(self):
        prof = make_profile(0.1)
        p = random_point(vmax=0.05)
        jac = twist_jacobian(p, prof, 1)
        b0 = constraint_tangent_basis(p)
        b1 = constraint_tangent_basis(dehn_twist(p, prof, 1))
        restricted = b1.T @ jac @ b0
        assert abs(abs(np.linalg.det(restricted)) - 1.0) < 1e-5

    def test_matches_directional_difference(self):
        prof = make_profile(0.1)
        p = random_point(vmax=0.05)
        jac = twist_jacobian(p, prof, 1)
        # tangent of the circle orbit through p
        h = 1e-5
        plus = circle_action(p, h)
        minus = circle_action(p, -h)
        u = (np.concatenate([plus.x, plus.v]) - np.concatenate([minus.x, minus.v])) / (2 * h)
        qp = dehn_twist(circle_action(p, h), prof, 1)
        qm = dehn_twist(circle_action(p, -h), prof, 1)
        fd = (np.concatenate([qp.x, qp.v]) - np.concatenate([qm.x, qm.v])) / (2 * h)
        assert np.allclose(jac @ u, fd, atol=1e-5)

    def test_symplectic(self):
        prof = make_profile(0.1)
        rng = np.random.default_rng(3)
        for _ in range(10):
            p = random_point(vmax=0.05, rng=rng)
            jac = twist_jacobian(p, prof, 1)
            basis = constraint_tangent_basis(p)
            u = basis @ rng.normal(size=4)
            w = basis @ rng.normal(size=4)
            assert symplectic_form(jac @ u, jac @ w) == pytest.approx(
                symplectic_form(u, w), abs=1e-5
            )

    def test_rejects_zero_section(self):
        p = SphereCotangentPoint(2, np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            twist_jacobian(p, make_profile(0.1), 1)
