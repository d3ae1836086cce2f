import math

import numpy as np
import pytest

from lpkin.errors import TruncationError, UsageError
from lpkin.grid import VelocityGrid
from lpkin.kernels import (
    KernelSpec,
    build_kernel_table,
    default_rho_levels,
    dump_kernel_table,
    heat_kernel_circle,
    heat_kernel_sphere,
    vhs_relax_weight,
)
from lpkin.quadrature import circle_rule, sphere_rule


class TestCircleKernel:
    def test_large_time_uniform(self):
        for a in (0.0, 1.2, math.pi):
            assert heat_kernel_circle(1.0, 0.0, 50.0, a, 64) == pytest.approx(
                1 / (2 * math.pi), abs=1e-15
            )

    def test_unit_mass_analytic(self):
        # every k >= 1 mode integrates to zero over the circle
        m = 256
        angles = 2 * math.pi * np.arange(m) / m
        vals = [heat_kernel_circle(0.7, 1.0, 0.05, a, 64) for a in angles]
        assert np.sum(vals) * 2 * math.pi / m == pytest.approx(1.0, abs=1e-12)

    def test_truncation_against_high_cutoff(self):
        ref = heat_kernel_circle(1.0, 0.0, 0.1, 0.0, 5000)
        assert heat_kernel_circle(1.0, 0.0, 0.1, 0.0, 50) == pytest.approx(ref, abs=1e-12)

    def test_low_and_high_cutoff_agree_at_large_time(self):
        for a in (0.3, 2.0):
            k1 = heat_kernel_circle(1.0, 0.5, 5.0, a, 1)
            k64 = heat_kernel_circle(1.0, 0.5, 5.0, a, 64)
            assert k1 == pytest.approx(k64, abs=1e-12)

    def test_time_validation(self):
        with pytest.raises(UsageError):
            heat_kernel_circle(1.0, 0.0, 0.0, 0.0, 8)


class TestSphereKernel:
    def test_large_time_uniform(self):
        for mu in (-1.0, 0.0, 0.5):
            assert heat_kernel_sphere(1.0, 0.0, 20.0, mu, 14) == pytest.approx(
                1 / (4 * math.pi), abs=1e-14
            )

    def test_unit_mass_under_default_rule(self):
        rule = sphere_rule(8, 16)
        for tau in (0.0125, 0.05, 1.0):
            vals = [heat_kernel_sphere(1.0, 0.0, tau, mu, 14) for mu in rule.polar_cos]
            mass = float(np.dot(rule.weights, vals))
            assert mass == pytest.approx(1.0, abs=1e-12)

    def test_semigroup_property(self):
        # composition of windows equals the summed window, mode by mode
        rule = sphere_rule(16, 32)
        t1, t2 = 0.03, 0.05
        pole = np.array([0.0, 0.0, 1.0])
        for mu in (-0.8, 0.1, 0.9):
            sigma = np.array([math.sqrt(1 - mu * mu), 0.0, mu])
            k1 = np.array([heat_kernel_sphere(1.0, 0.0, t1, float(sigma @ z), 14)
                           for z in rule.nodes])
            k2 = np.array([heat_kernel_sphere(1.0, 0.0, t2, float(z @ pole), 14)
                           for z in rule.nodes])
            conv = float(np.dot(rule.weights, k1 * k2))
            assert conv == pytest.approx(
                heat_kernel_sphere(1.0, 0.0, t1 + t2, mu, 14), abs=1e-8
            )

    def test_positivity_at_resolved_times(self):
        # the truncated series dips slightly negative at small diffusion
        # times: about -5e-6 at 4 rho^gamma t = 0.05, below -1e-9 only
        # once 4 rho^gamma t >= 0.1 (measured for l_max = 14)
        mus = np.linspace(-1.0, 1.0, 2001)
        dip_005 = min(heat_kernel_sphere(1.0, 0.0, 0.05 / 4, mu, 14) for mu in mus)
        assert -1e-5 <= dip_005 < 0.0
        for x in (0.1, 0.2, 0.5):
            vals = [heat_kernel_sphere(1.0, 0.0, x / 4.0, mu, 14) for mu in mus]
            assert min(vals) >= -1e-9, x

    def test_monotone_flattening(self):
        mus = np.linspace(-1.0, 1.0, 201)
        spreads = []
        for t in (0.0125, 0.025, 0.05, 0.1, 0.4):
            vals = np.array([heat_kernel_sphere(1.0, 0.0, t, mu, 14) for mu in mus])
            spreads.append(vals.max() - vals.min())
        assert all(a >= b - 1e-15 for a, b in zip(spreads, spreads[1:]))

    def test_mu_validation_and_clamp(self):
        with pytest.raises(UsageError):
            heat_kernel_sphere(1.0, 0.0, 0.1, 1.5, 14)
        a = heat_kernel_sphere(1.0, 0.0, 0.1, 1.0 + 5e-13, 14)
        b = heat_kernel_sphere(1.0, 0.0, 0.1, 1.0, 14)
        assert a == b

    def test_strict_mode_also_unit_mass(self):
        rule = sphere_rule(8, 16)
        vals = [heat_kernel_sphere(1.0, 0.0, 0.05, mu, 14, multiplicity=False)
                for mu in rule.polar_cos]
        assert float(np.dot(rule.weights, vals)) == pytest.approx(1.0, abs=1e-12)

    def test_strict_mode_differs(self):
        a = heat_kernel_sphere(1.0, 0.0, 0.05, 0.7, 14, multiplicity=True)
        b = heat_kernel_sphere(1.0, 0.0, 0.05, 0.7, 14, multiplicity=False)
        assert abs(a - b) > 1e-3


class TestVhsRelaxWeight:
    def test_maxwell_case_uniform_in_rho(self):
        smeas = 4 * math.pi
        w0 = vhs_relax_weight(0.0, 0.0, 0.3, 1.0, smeas)
        for rho in (0.1, 1.0, 7.0):
            assert vhs_relax_weight(rho, 0.0, 0.3, 1.0, smeas) == pytest.approx(
                -math.expm1(-0.3) / smeas, abs=1e-16
            )
        assert w0 == pytest.approx(-math.expm1(-0.3) / smeas)

    def test_small_time_forward_euler_limit(self):
        smeas = 2 * math.pi
        rho, gamma, eps = 1.3, 1.0, 0.5
        t = 1e-7
        w = vhs_relax_weight(rho, gamma, t, eps, smeas)
        assert w == pytest.approx(rho**gamma * t / (eps * smeas), rel=1e-6)

    def test_large_time_full_relaxation(self):
        assert vhs_relax_weight(2.0, 1.0, 1e9, 1.0, 4 * math.pi) == pytest.approx(
            1 / (4 * math.pi)
        )

    def test_rho_zero_branches(self):
        smeas = 4 * math.pi
        assert vhs_relax_weight(0.0, 1.0, 0.5, 1.0, smeas) == 0.0
        assert vhs_relax_weight(0.0, -1.0, 0.5, 1.0, smeas) == 1 / smeas
        assert vhs_relax_weight(0.0, 0.0, 0.5, 2.0, smeas) == pytest.approx(
            -math.expm1(-0.25) / smeas
        )

    def test_negative_gamma_total(self):
        # rho^gamma overflows near zero; the weight saturates instead
        w = vhs_relax_weight(1e-300, -3.0, 0.1, 1.0, 2 * math.pi)
        assert w == pytest.approx(1 / (2 * math.pi))


class TestKernelTable:
    def test_vhs_rows_constant_in_angle(self):
        spec = KernelSpec(kind="vhs_relax", dim=3, gamma=1.0, eps=0.5, dt=0.2)
        table = build_kernel_table(spec, np.array([0.5, 1.0, 2.0]))
        assert np.all(table.values == table.values[:, :1])

    def test_landau_rows_unit_mass(self):
        grid = VelocityGrid(dim=3, extent=3.0, n=8)
        rule = sphere_rule(8, 16)
        spec = KernelSpec(kind="landau_sphere", dim=3, gamma=0.0, eps=1.0, dt=0.1,
                          series_cutoff=14)
        table = build_kernel_table(spec, default_rho_levels(grid), rule=rule)
        glw = np.polynomial.legendre.leggauss(8)[1]
        masses = 2 * math.pi * table.values @ glw
        assert np.max(np.abs(masses - 1.0)) < 1e-12

    def test_circle_kernel_cutoffs_agree_at_large_time(self):
        levels = np.array([1.0])
        base = dict(kind="landau_circle", dim=2, gamma=0.0, eps=1.0, dt=5.0)
        t1 = build_kernel_table(KernelSpec(series_cutoff=1, **base), levels)
        t64 = build_kernel_table(KernelSpec(series_cutoff=64, **base), levels)
        assert np.max(np.abs(t1.values - t64.values)) < 1e-12

    def test_truncation_error_raised(self):
        # far too small a diffusion time for the cutoff: mass off by > 1e-3
        spec = KernelSpec(kind="landau_circle", dim=2, gamma=0.0, eps=1.0, dt=1e-6,
                          series_cutoff=64)
        with pytest.raises(TruncationError):
            build_kernel_table(spec, np.array([1.0]), rule=circle_rule(32))

    def test_level_validation(self):
        spec = KernelSpec(kind="vhs_relax", dim=2, gamma=0.0, eps=1.0, dt=0.1)
        with pytest.raises(UsageError):
            build_kernel_table(spec, np.array([2.0, 1.0]))
        with pytest.raises(UsageError):
            build_kernel_table(spec, np.array([-1.0, 1.0]))

    def test_spec_validation(self):
        with pytest.raises(UsageError):
            KernelSpec(kind="landau_sphere", dim=2, gamma=0.0, eps=1.0, dt=0.1)
        with pytest.raises(UsageError):
            KernelSpec(kind="landau_circle", dim=2, gamma=0.0, eps=1.0, dt=-0.1)
        with pytest.raises(UsageError):
            KernelSpec(kind="huh", dim=3, gamma=0.0, eps=1.0, dt=0.1)

    def test_dump_format(self, tmp_path):
        spec = KernelSpec(kind="vhs_relax", dim=3, gamma=1.0, eps=0.001, dt=0.1)
        table = build_kernel_table(spec, np.array([0.5, 1.0]))
        path = tmp_path / "k.txt"
        dump_kernel_table(table, path)
        lines = path.read_text().splitlines()
        head = lines[0].split()
        assert head[0] == "vhs_relax"
        assert float(head[1]) == 1.0
        assert int(head[4]) == 2
        assert len(lines) == 3 + 2
