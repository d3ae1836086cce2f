import math

import numpy as np
import pytest

from lpkin.errors import UsageError
from lpkin.quadrature import circle_rule, integrate_sphere, sphere_measure, sphere_rule


class TestCircleRule:
    def test_m4_nodes_and_weights(self):
        q = circle_rule(4)
        angles = np.arctan2(q.nodes[:, 1], q.nodes[:, 0]) % (2 * math.pi)
        assert np.allclose(sorted(angles), [0, math.pi / 2, math.pi, 3 * math.pi / 2])
        assert np.allclose(q.weights, math.pi / 2)

    def test_total_weight(self):
        for m in (2, 3, 8, 33):
            assert integrate_sphere(circle_rule(m), lambda z: 1.0) == pytest.approx(
                2 * math.pi, abs=1e-12
            )

    def test_cos_squared_exact(self):
        for m in (3, 4, 16):
            q = circle_rule(m)
            val = integrate_sphere(q, lambda z: z[0] ** 2)
            assert val == pytest.approx(math.pi, abs=1e-12)

    def test_trig_exactness_degree(self):
        # degree m-1 integrates exactly, degree m aliases
        m = 8
        q = circle_rule(m)
        phi = np.arctan2(q.nodes[:, 1], q.nodes[:, 0])
        assert abs(np.dot(q.weights, np.cos((m - 1) * phi))) < 1e-12
        assert abs(np.dot(q.weights, np.cos(m * phi))) > 1.0

    def test_too_small(self):
        with pytest.raises(UsageError):
            circle_rule(1)


class TestSphereRule:
    def test_total_weight(self):
        assert integrate_sphere(sphere_rule(8, 16), lambda z: 1.0) == pytest.approx(
            4 * math.pi, abs=1e-12
        )

    @pytest.mark.parametrize("seed", range(4))
    def test_second_moment_any_axis(self, seed):
        rng = np.random.default_rng(seed)
        e = rng.standard_normal(3)
        e /= np.linalg.norm(e)
        q = sphere_rule(2, 4)
        val = integrate_sphere(q, lambda z: float(z @ e) ** 2)
        assert val == pytest.approx(4 * math.pi / 3, abs=1e-12)

    def test_first_moment_vanishes_antipodal(self):
        q = sphere_rule(5, 8)
        for d in range(3):
            assert abs(integrate_sphere(q, lambda z: z[d])) < 1e-13

    def test_antipodal_closure_even_n_phi(self):
        assert sphere_rule(4, 8).antipodal
        assert not sphere_rule(4, 5).antipodal

    def test_harmonic_exactness(self):
        # P_l(z3) integrates to zero up to the rule's degree
        q = sphere_rule(8, 16)
        for l in range(1, 16):
            vals = np.polynomial.legendre.Legendre.basis(l)(q.nodes[:, 2])
            assert abs(np.dot(q.weights, vals)) < 1e-12, l

    def test_positive_weights(self):
        assert np.all(sphere_rule(6, 12).weights > 0.0)
        assert np.all(circle_rule(7).weights > 0.0)

    def test_bounds(self):
        with pytest.raises(UsageError):
            sphere_rule(1, 8)
        with pytest.raises(UsageError):
            sphere_rule(4, 3)

    def test_unit_nodes(self):
        q = sphere_rule(6, 10)
        assert np.allclose(np.linalg.norm(q.nodes, axis=1), 1.0, atol=1e-14)


class TestIntegrate:
    def test_array_input(self):
        q = circle_rule(10)
        assert integrate_sphere(q, np.ones(q.count)) == pytest.approx(2 * math.pi)
        with pytest.raises(UsageError):
            integrate_sphere(q, np.ones(q.count + 1))

    def test_average_is_projection(self):
        # averaging a node array twice equals averaging once
        q = sphere_rule(4, 8)
        rng = np.random.default_rng(0)
        g = rng.random(q.count)
        avg = integrate_sphere(q, g) / sphere_measure(3)
        avg2 = integrate_sphere(q, np.full(q.count, avg)) / sphere_measure(3)
        assert avg2 == pytest.approx(avg, rel=1e-14)

    def test_sphere_measure(self):
        assert sphere_measure(2) == 2 * math.pi
        assert sphere_measure(3) == 4 * math.pi
        with pytest.raises(UsageError):
            sphere_measure(4)
