import math

import numpy as np
import pytest

from lpkin import _engine
from lpkin.collision import (
    half_directions,
    landau_direction_weights,
    lp_gain_apply,
    pair_convolve,
    pair_coordinates,
    post_collision,
    q_vhs,
    vhs_direction_weights,
)
from lpkin.errors import TableRangeError, UsageError
from lpkin.grid import CollisionModel, Distribution, VelocityGrid, l1_distance, maxwellian, moments
from lpkin.kernels import KernelSpec, build_kernel_table, default_rho_levels
from lpkin.quadrature import circle_rule, sphere_measure, sphere_rule

from conftest import gaussian_on


def naive_pair_update(f, hs, kernel_by_pair, mode="step"):
    """Straightforward per-pair scatter loop used to cross-check the engine.

    ``kernel_by_pair(rho)`` returns the symmetrized direction weights (one
    value per half-set direction) for a pair at separation rho.  Deposit
    coordinates follow the engine's documented evaluation order (index
    units, radius-scaled frame), because the boundary skip rule is a
    discontinuous function of those coordinates; everything else is
    computed independently.
    """
    grid = f.grid
    n, dim = grid.n, grid.dim
    vals = f.values
    hd = grid.cell_volume
    coords = np.stack(np.unravel_index(np.arange(grid.size), (n,) * dim), axis=-1).astype(float)
    out = np.zeros(grid.size)
    nh = hs.c1.size
    top = float(n - 1)

    def spread(t):
        per = []
        for a in range(dim):
            if t[a] < 0.0 or t[a] >= top:
                return None
            b = int(t[a])
            per.append((b, 1.0 - (t[a] - b), t[a] - b))
        idx = [0]
        wts = [1.0]
        for b, w0, w1 in per:
            idx = [i * n + b for i in idx] + [i * n + b + 1 for i in idx]
            wts = [w * w0 for w in wts] + [w * w1 for w in wts]
        return idx, wts

    for p in range(grid.size):
        if vals[p] == 0.0:
            continue
        for q in range(p + 1, grid.size):
            c = vals[p] * vals[q]
            if c == 0.0:
                continue
            d = coords[p] - coords[q]
            k2 = float(d @ d)
            inv = 1.0 / math.sqrt(k2)
            u = d * inv
            r = 0.5 * math.sqrt(k2)
            mid = 0.5 * (coords[p] + coords[q])
            rho = grid.h * math.sqrt(k2)
            ksym = kernel_by_pair(rho)
            kept = 0.0
            if dim == 3:
                ux, uy, uz = u
                if -0.6 < ux < 0.6:
                    e1 = np.array([0.0, -uz, uy])
                else:
                    e1 = np.array([-uz, 0.0, ux])
                einv = 1.0 / math.sqrt(e1 @ e1)
                e1 = e1 * einv
                e2 = np.cross(u, e1)
                ru, r1, r2 = r * u, r * e1, r * e2
            else:
                ru = r * u
            for j in range(nh):
                if dim == 3:
                    s = hs.c1[j] * ru + hs.c2[j] * r1 + hs.c3[j] * r2
                else:
                    s = np.array([hs.c1[j] * ru[0] - hs.c2[j] * ru[1],
                                  hs.c1[j] * ru[1] + hs.c2[j] * ru[0]])
                sp = spread(mid + s)
                sm = spread(mid - s)
                if sp is None or sm is None:
                    continue
                amt = hd * c * hs.weights[j] * ksym[j]
                kept += 2.0 * amt
                for idx, w in zip(*sp):
                    out[idx] += amt * w
                for idx, w in zip(*sm):
                    out[idx] += amt * w
            if mode == "step":
                out[p] -= 0.5 * kept
                out[q] -= 0.5 * kept
    return out


class TestPostCollision:
    def test_equal_velocities(self):
        v = np.array([0.3, -0.7, 1.0])
        vp, wp = post_collision(v, v, np.array([0.0, 0.0, 1.0]))
        assert np.allclose(vp, v) and np.allclose(wp, v)

    def test_aligned_direction_is_identity(self):
        rng = np.random.default_rng(0)
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        zeta = (v - w) / np.linalg.norm(v - w)
        vp, wp = post_collision(v, w, zeta)
        assert np.allclose(vp, v, atol=1e-14)
        assert np.allclose(wp, w, atol=1e-14)

    @pytest.mark.parametrize("seed", range(8))
    def test_momentum_and_energy_invariants(self, seed):
        rng = np.random.default_rng(seed)
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        zeta = rng.standard_normal(3)
        zeta /= np.linalg.norm(zeta)
        vp, wp = post_collision(v, w, zeta)
        assert np.allclose(vp + wp, v + w, atol=1e-12)
        assert vp @ vp + wp @ wp == pytest.approx(v @ v + w @ w, abs=1e-12)

    def test_pair_coordinates(self):
        v, w = np.array([1.0, 2.0]), np.array([0.0, -1.0])
        pc = pair_coordinates(v, w)
        assert np.allclose((pc.z + pc.u) / 2, v)
        assert np.allclose((pc.z - pc.u) / 2, w)
        assert pc.rho == pytest.approx(np.linalg.norm(v - w))
        assert pc.sigma_defined and np.linalg.norm(pc.sigma) == pytest.approx(1.0)
        assert not pair_coordinates(v, v).sigma_defined


class TestEngineAgainstNaive:
    @pytest.mark.parametrize("dim,gamma", [(2, 0.0), (2, 1.0), (3, 0.0), (3, 1.0)])
    def test_vhs_step_kernel(self, dim, gamma):
        grid = VelocityGrid(dim=dim, extent=2.0, n=5)
        rng = np.random.default_rng(dim * 10 + int(gamma))
        f = Distribution(grid, rng.random(grid.size))
        rule = circle_rule(8) if dim == 2 else sphere_rule(3, 6)
        hs = half_directions(rule)
        smeas = sphere_measure(dim)
        frac = lambda rho: -math.expm1(-0.4 * rho**gamma)
        ww = vhs_direction_weights(grid, hs, frac)
        got = pair_convolve(f, hs, ww, prod_cutoff=0.0)
        want = naive_pair_update(
            f, hs, lambda rho: np.full(hs.c1.size, 2.0 * frac(rho) / smeas)
        )
        assert np.max(np.abs(got - want)) < 1e-13 * max(1.0, np.max(np.abs(want)))

    def test_landau_table_kernel(self):
        grid = VelocityGrid(dim=3, extent=2.0, n=5)
        rng = np.random.default_rng(11)
        f = Distribution(grid, rng.random(grid.size))
        rule = sphere_rule(4, 8)
        hs = half_directions(rule)
        spec = KernelSpec(kind="landau_sphere", dim=3, gamma=0.0, eps=1.0, dt=0.05,
                          series_cutoff=7)
        table = build_kernel_table(spec, default_rho_levels(grid), rule=rule)
        ww = landau_direction_weights(grid, hs, table)
        got = pair_convolve(f, hs, ww, prod_cutoff=0.0)

        levels = table.rho_levels
        mus = table.angle_nodes

        def ksym(rho):
            lvl = int(np.argmin(np.abs(np.log(levels) - np.log(rho))))
            row = table.values[lvl]
            ith = np.array([int(np.argmin(np.abs(mus - c))) for c in hs.c1])
            return row[ith] + row[len(mus) - 1 - ith]

        want = naive_pair_update(f, hs, ksym)
        assert np.max(np.abs(got - want)) < 1e-13 * max(1.0, np.max(np.abs(want)))

    def test_gain_mode(self):
        grid = VelocityGrid(dim=2, extent=2.0, n=6)
        rng = np.random.default_rng(3)
        f = Distribution(grid, rng.random(grid.size))
        rule = circle_rule(8)
        hs = half_directions(rule)
        ww = vhs_direction_weights(grid, hs, lambda rho: 0.7)
        got = pair_convolve(f, hs, ww, mode=_engine.MODE_GAIN, prod_cutoff=0.0)
        want = naive_pair_update(
            f, hs, lambda rho: np.full(hs.c1.size, 2.0 * 0.7 / sphere_measure(2)),
            mode="gain",
        )
        assert np.max(np.abs(got - want)) < 1e-13


class TestQVhs:
    def test_zero_input(self, grid3):
        model = CollisionModel(kind="boltzmann_vhs", gamma=0.0)
        q = q_vhs(Distribution(grid3, np.zeros(grid3.size)), model, sphere_rule(3, 6))
        assert np.all(q.values == 0.0)

    def test_kind_checked(self, grid3):
        model = CollisionModel(kind="landau", gamma=0.0)
        with pytest.raises(UsageError):
            q_vhs(Distribution(grid3, np.zeros(grid3.size)), model, sphere_rule(3, 6))

    @pytest.mark.parametrize("gamma", [0.0, 1.0])
    def test_mass_conserved_exactly(self, gamma):
        grid = VelocityGrid(dim=3, extent=3.0, n=8)
        rng = np.random.default_rng(int(gamma))
        f = Distribution(grid, rng.random(grid.size))
        model = CollisionModel(kind="boltzmann_vhs", gamma=gamma, epsilon=0.7)
        m = moments(q_vhs(f, model, sphere_rule(4, 8)))
        scale = moments(f).mass
        assert abs(m.mass) < 1e-12 * scale

    def test_momentum_conserved_exactly(self):
        grid = VelocityGrid(dim=3, extent=3.0, n=8)
        f = gaussian_on(grid, center=(0.8, -0.4, 0.2))
        model = CollisionModel(kind="boltzmann_vhs", gamma=1.0)
        m = moments(q_vhs(f, model, sphere_rule(4, 8)))
        # content scale of the operator output
        scale = grid.cell_volume * float(np.sum(np.abs(q_vhs(f, model, sphere_rule(4, 8)).values)))
        for d in range(3):
            assert abs(m.momentum[d]) < 1e-12 * max(scale, 1.0)

    def test_maxwellian_near_annihilation_under_refinement(self):
        # q(M) -> 0 as the grid resolves the equilibrium
        model = CollisionModel(kind="boltzmann_vhs", gamma=0.0)
        errs = []
        for n in (8, 16):
            grid = VelocityGrid(dim=3, extent=4.0, n=n)
            f = gaussian_on(grid, width=0.9)
            q = q_vhs(f, model, sphere_rule(4, 8))
            errs.append(grid.cell_volume * np.sum(np.abs(q.values)))
        assert errs[1] < errs[0] / 1.5

    def test_quadratic_scaling(self):
        grid = VelocityGrid(dim=2, extent=2.0, n=6)
        rng = np.random.default_rng(5)
        f = Distribution(grid, rng.random(grid.size))
        model = CollisionModel(kind="boltzmann_vhs", gamma=1.0)
        rule = circle_rule(8)
        q1 = q_vhs(f, model, rule, prod_cutoff=0.0)
        q2 = q_vhs(Distribution(grid, 2.0 * f.values), model, rule, prod_cutoff=0.0)
        assert np.allclose(q2.values, 4.0 * q1.values, rtol=1e-12, atol=1e-14)

    def test_polarization_symmetry(self):
        # q(f+g) - q(f) - q(g) is the symmetric bilinear cross term
        grid = VelocityGrid(dim=2, extent=2.0, n=5)
        rng = np.random.default_rng(6)
        f = Distribution(grid, rng.random(grid.size))
        g = Distribution(grid, rng.random(grid.size))
        model = CollisionModel(kind="boltzmann_vhs", gamma=0.0)
        rule = circle_rule(8)

        def q(d):
            return q_vhs(d, model, rule, prod_cutoff=0.0).values

        cross_a = q(Distribution(grid, f.values + g.values)) - q(f) - q(g)
        cross_b = q(Distribution(grid, g.values + f.values)) - q(g) - q(f)
        assert np.allclose(cross_a, cross_b, atol=1e-13)

    def test_truncation_cutoff_preserves_conservation(self):
        grid = VelocityGrid(dim=3, extent=3.0, n=8)
        f = gaussian_on(grid, center=(1.0, 0.0, 0.0))
        model = CollisionModel(kind="boltzmann_vhs", gamma=0.0)
        q = q_vhs(f, model, sphere_rule(3, 6), prod_cutoff=1e-8)
        m = moments(q)
        assert abs(m.mass) < 1e-13
        assert abs(m.momentum[0]) < 1e-13


class TestDeterminism:
    def test_thread_count_invariance(self):
        import numba

        grid = VelocityGrid(dim=3, extent=3.0, n=8)
        rng = np.random.default_rng(9)
        f = Distribution(grid, rng.random(grid.size))
        model = CollisionModel(kind="boltzmann_vhs", gamma=1.0)
        rule = sphere_rule(3, 6)
        numba.set_num_threads(1)
        a = q_vhs(f, model, rule).values
        numba.set_num_threads(2)
        b = q_vhs(f, model, rule).values
        assert np.array_equal(a, b)


class TestLpGainApply:
    def _compact_bump(self, grid):
        # exactly zero outside a central ball: collisions never leave the box
        nodes = grid.nodes()
        r2 = np.sum(nodes**2, axis=1)
        rmax = (0.55 * grid.extent) ** 2
        vals = np.where(r2 < rmax, np.exp(-2.0 * r2), 0.0)
        return Distribution(grid, vals)

    def test_mass_squares(self):
        grid = VelocityGrid(dim=3, extent=4.0, n=10)
        f = self._compact_bump(grid)
        model = CollisionModel(kind="landau", gamma=0.0)
        rule = sphere_rule(8, 16)
        spec = KernelSpec(kind="landau_sphere", dim=3, gamma=0.0, eps=1.0, dt=0.2,
                          series_cutoff=14)
        table = build_kernel_table(spec, default_rho_levels(grid), rule=rule)
        gain = lp_gain_apply(f, table, rule, model, prod_cutoff=0.0)
        m_in = moments(f).mass
        m_out = moments(gain).mass
        assert m_out == pytest.approx(m_in**2, abs=1e-8 * m_in**2)

    def test_uniform_rows_give_spherical_average_gain(self):
        # at huge diffusion time the kernel is flat: the gain is the fully
        # isotropized pair product
        grid = VelocityGrid(dim=3, extent=4.0, n=8)
        f = self._compact_bump(grid)
        model = CollisionModel(kind="landau", gamma=0.0)
        rule = sphere_rule(4, 8)
        spec = KernelSpec(kind="landau_sphere", dim=3, gamma=0.0, eps=1.0, dt=200.0,
                          series_cutoff=14)
        table = build_kernel_table(spec, default_rho_levels(grid), rule=rule)
        assert np.max(np.abs(table.values - 1 / (4 * math.pi))) < 1e-12
        gain = lp_gain_apply(f, table, rule, model, prod_cutoff=0.0)

        hs = half_directions(rule)
        flat = np.full(hs.c1.size, 2.0 / (4 * math.pi))
        want = naive_pair_update(f, hs, lambda rho: flat, mode="gain")
        want = want + grid.cell_volume * f.values**2
        assert np.max(np.abs(gain.values - want)) < 1e-12

    def test_vhs_table_kind(self):
        grid = VelocityGrid(dim=3, extent=3.0, n=8)
        f = self._compact_bump(grid)
        model = CollisionModel(kind="boltzmann_vhs", gamma=0.0)
        rule = sphere_rule(3, 6)
        spec = KernelSpec(kind="vhs_relax", dim=3, gamma=0.0, eps=1.0, dt=0.5)
        table = build_kernel_table(spec, default_rho_levels(grid), rule=rule)
        gain = lp_gain_apply(f, table, rule, model, prod_cutoff=0.0)
        # mass of gain+identity complement reproduces the relaxation split
        w = -math.expm1(-0.5)
        m_in = moments(f).mass
        assert moments(gain).mass == pytest.approx(w * m_in**2, rel=1e-8)

    def test_table_range_error(self):
        grid = VelocityGrid(dim=3, extent=4.0, n=8)
        f = self._compact_bump(grid)
        model = CollisionModel(kind="landau", gamma=0.0)
        rule = sphere_rule(4, 8)
        spec = KernelSpec(kind="landau_sphere", dim=3, gamma=0.0, eps=1.0, dt=0.2,
                          series_cutoff=14)
        short_levels = np.geomspace(grid.h / 2, 0.4 * grid.extent, 16)
        table = build_kernel_table(spec, short_levels, rule=rule)
        with pytest.raises(TableRangeError):
            lp_gain_apply(f, table, rule, model)

    def test_model_kind_mismatch(self):
        grid = VelocityGrid(dim=3, extent=3.0, n=8)
        f = self._compact_bump(grid)
        rule = sphere_rule(3, 6)
        spec = KernelSpec(kind="landau_sphere", dim=3, gamma=0.0, eps=1.0, dt=0.2)
        table = build_kernel_table(spec, default_rho_levels(grid), rule=rule)
        with pytest.raises(UsageError):
            lp_gain_apply(f, table, rule, CollisionModel(kind="boltzmann_vhs", gamma=0.0))


class TestHalfDirections:
    def test_requires_antipodal(self):
        with pytest.raises(UsageError):
            half_directions(circle_rule(5))
        with pytest.raises(UsageError):
            half_directions(sphere_rule(4, 5))

    def test_half_count(self):
        rule = sphere_rule(4, 8)
        hs = half_directions(rule)
        assert hs.c1.size == rule.count // 2
