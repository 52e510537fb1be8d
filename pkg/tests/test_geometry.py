import numpy as np
import pytest

from grtrecon import (Tangency, check_curvature_gap, circular_grt,
                      classical_radon, curvature_of_curve, delta_phi,
                      disk_phantom, find_tangencies)
from grtrecon.geometry import (ModelViolationWarning, angle_distance,
                               boundary_curvature, delta_phi_fd)

from conftest import R_SCAN


def sec9_t_oracle():
    """Roots of t^2 + 2 t (x_c . b0) + |x_c|^2 - R^2 = 0 for the reference
    configuration (x_c = (1,1), b0 = -0.17*pi, R = 10)."""
    b = np.cos(0.17 * np.pi) - np.sin(0.17 * np.pi)  # x_c . b0
    s = np.sqrt(b * b - (2.0 - 100.0))
    return -b + s, -b - s


class TestDeltaPhi:
    def test_circular_at_origin(self, circ_model):
        # |x - R*a| = 10, Theta = (-1, 0); the determinant has magnitude
        # R |a . Theta| / rho = 1 here
        d = delta_phi(circ_model, (0.0, 0.0), 0.0)
        assert abs(d) == pytest.approx(1.0, abs=1e-12)
        assert d == pytest.approx(delta_phi_fd(circ_model, (0.0, 0.0), 0.0),
                                  rel=1e-6)

    def test_classical_radon_is_one(self, radon_model):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.uniform(-3, 3, 2)
            a = rng.uniform(0, 2 * np.pi)
            assert delta_phi(radon_model, x, a) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("maker", [circular_grt, classical_radon])
    def test_matches_finite_differences(self, maker):
        model = maker()
        rng = np.random.default_rng(7)
        for _ in range(50):
            x = rng.uniform(-3, 3, 2)
            a = rng.uniform(0, 2 * np.pi)
            d = delta_phi(model, x, a)
            assert abs(d - delta_phi_fd(model, x, a)) < 1e-6 * abs(d)


class TestCurvature:
    def test_circular_curve(self, circ_model):
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = rng.uniform(-3, 3, 2)
            a = rng.uniform(0, 2 * np.pi)
            rho = circ_model.phi(x, a)
            k = curvature_of_curve(circ_model, x, a)
            assert abs(k) == pytest.approx(1.0 / rho, rel=1e-8)

    def test_radon_lines_are_flat(self, radon_model):
        k = curvature_of_curve(radon_model, (0.3, -1.2), 1.1)
        assert k == pytest.approx(0.0, abs=1e-10)

    def test_disk_boundary(self, sec9_phantom, sec9_x0):
        k = boundary_curvature(sec9_phantom, sec9_x0)
        assert abs(k) == pytest.approx(0.5, rel=1e-8)


class TestTangencies:
    def test_sec9_radii(self, sec9_fan):
        t1, t2 = sec9_t_oracle()
        assert t1 == pytest.approx(9.5541, abs=1e-4)
        assert t2 == pytest.approx(-10.2575, abs=1e-4)
        radii = sorted(t.p_l for t in sec9_fan)
        assert radii[0] == pytest.approx(t1 - 2.0, abs=1e-6)
        assert radii[1] == pytest.approx(-t2 + 2.0, abs=1e-6)

    def test_sec9_scanline_identity(self, circ_model, sec9_fan, sec9_x0):
        # |R a_l . Theta_l| = (t1 - t2) / 2 for both tangencies
        t1, t2 = sec9_t_oracle()
        for t in sec9_fan:
            avec = R_SCAN * np.array([np.cos(t.alpha_l), np.sin(t.alpha_l)])
            assert abs(avec @ t.theta_l) == pytest.approx((t1 - t2) / 2,
                                                          abs=1e-9)

    def test_tangency_invariants(self, circ_model, sec9_phantom, sec9_fan,
                                 sec9_x0):
        gh = np.asarray(sec9_phantom.grad_h(sec9_x0))
        e = np.array([-gh[1], gh[0]])
        for t in sec9_fan:
            assert abs(circ_model.phi(sec9_x0, t.alpha_l) - t.p_l) < 1e-10
            assert abs(t.theta_l @ e) < 1e-8
            assert t.nu_l > 0
            assert t.theta_l @ gh > 0

    def test_nu_equals_inverse_delta_phi(self, sec9_fan):
        # circular GRT: W = 1 and |grad Phi| = 1
        for t in sec9_fan:
            assert t.nu_l == pytest.approx(1.0 / abs(t.delta_phi), abs=1e-10)

    def test_classical_radon_pair(self, radon_model):
        ph = disk_phantom((0.5, -0.2), 1.5)
        x0 = np.array([0.5 + 1.5 * np.cos(0.8), -0.2 + 1.5 * np.sin(0.8)])
        fan = find_tangencies(radon_model, ph, x0)
        assert len(fan) == 2
        assert angle_distance(fan[0].alpha_l, fan[1].alpha_l) == \
            pytest.approx(np.pi, abs=1e-9)
        # equal tangential-speed magnitudes with opposite signs
        assert fan[0].dalpha == pytest.approx(-fan[1].dalpha, abs=1e-9)
        assert abs(fan[0].dalpha) > 0

    def test_generic_scan_matches_closed_form(self, circ_model, sec9_phantom,
                                              sec9_x0, sec9_fan):
        # strip the disk tag so the generic alpha-scan path runs
        from grtrecon.phantom import Phantom
        generic = Phantom(h=sec9_phantom.h, grad_h=sec9_phantom.grad_h,
                          inside_value=1.0, outside_value=0.0)
        fan = find_tangencies(circ_model, generic, sec9_x0)
        assert len(fan) == len(sec9_fan)
        got = sorted((t.alpha_l, t.p_l, t.nu_l) for t in fan)
        want = sorted((t.alpha_l, t.p_l, t.nu_l) for t in sec9_fan)
        for (a1, p1, n1), (a2, p2, n2) in zip(got, want):
            assert angle_distance(a1, a2) < 1e-9
            assert p1 == pytest.approx(p2, abs=1e-8)
            assert n1 == pytest.approx(n2, abs=1e-8)

    def test_invisible_point_returns_empty(self, radon_model):
        # a model with p-domain excluding the needed offsets
        from dataclasses import replace
        limited = replace(radon_model, p_domain=(100.0, 200.0))
        ph = disk_phantom((0.0, 0.0), 1.0)
        fan = find_tangencies(limited, ph, np.array([1.0, 0.0]))
        assert fan == []


class TestCurvatureGap:
    def test_sec9_gaps(self, circ_model, sec9_phantom, sec9_fan, sec9_x0):
        for t in sorted(sec9_fan, key=lambda t: t.p_l):
            gap = check_curvature_gap(circ_model, sec9_phantom, t, sec9_x0)
            assert gap == pytest.approx(0.5 - 1.0 / t.p_l, rel=1e-6)
            assert gap > 0

    def test_radon_disk(self, radon_model):
        ph = disk_phantom((0.0, 0.0), 2.0)
        x0 = np.array([2.0, 0.0])
        fan = find_tangencies(radon_model, ph, x0)
        gap = check_curvature_gap(radon_model, ph, fan[0], x0)
        assert gap == pytest.approx(0.5, rel=1e-8)

    def test_coinciding_curves_flagged(self, circ_model):
        # phantom boundary identical to an integration circle
        ph = disk_phantom((10.0, 0.0), 3.0)
        x0 = np.array([7.0, 0.0])
        fan = find_tangencies(circ_model, ph, x0)
        coincident = min(fan, key=lambda t: abs(t.p_l - 3.0))
        assert coincident.p_l == pytest.approx(3.0, abs=1e-9)
        with pytest.warns(ModelViolationWarning):
            gap = check_curvature_gap(circ_model, ph, coincident, x0)
        assert gap == pytest.approx(0.0, abs=1e-8)
