import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boussinesq2d.dynamics import (
    SimState,
    Stepper,
    advect_scalar,
    advect_velocity,
    buoyancy_term,
    rhs,
    step,
    taylor_time_derivatives,
)
from boussinesq2d.errors import BlowUpError, DimensionError, UnsupportedOrderError
from boussinesq2d.sobolev import sobolev_norm
from boussinesq2d.spectral import SpectralScalar, SpectralVector, grid, taylor_green
from boussinesq2d.studies import random_state, taylor_check
from boussinesq2d.synthesis import synthesize_field

import oracles


def scalar(g, fn):
    return SpectralScalar.from_function(g, fn)


def vec_close(v, ref, atol=1e-13):
    return np.allclose(np.stack(v.arrays), np.stack(ref), atol=atol)


class TestBuoyancy:
    def test_stratified_vanishes(self):
        g = grid(32)
        b = buoyancy_term(scalar(g, lambda x1, x2: np.sin(x2)))
        assert np.max(np.abs(np.stack(b.arrays))) < 1e-15

    def test_horizontal_variation_kept(self):
        g = grid(32)
        rho = scalar(g, lambda x1, x2: np.sin(x1))
        b = buoyancy_term(rho)
        assert vec_close(b, [np.zeros((32, 32)), rho.coeffs])

    def test_constant_vanishes(self):
        b = buoyancy_term(SpectralScalar.constant(grid(16), 4.0))
        assert np.max(np.abs(np.stack(b.arrays))) == 0


class TestAdvection:
    def test_uniform_flow(self):
        g = grid(32)
        u = SpectralVector(SpectralScalar.constant(g, 1.0), SpectralScalar.zeros(g))
        a = advect_scalar(u, scalar(g, lambda x1, x2: np.sin(x1)))
        assert np.allclose(a.coeffs, scalar(g, lambda x1, x2: np.cos(x1)).coeffs, atol=1e-13)

    def test_constant_density(self):
        g = grid(32)
        a = advect_scalar(taylor_green(g), SpectralScalar.constant(g, 2.0))
        assert np.max(np.abs(a.coeffs)) == 0

    def test_grid_mismatch(self):
        with pytest.raises(DimensionError):
            advect_scalar(taylor_green(grid(16)), SpectralScalar.zeros(grid(32)))

    def test_scalar_oracle_taylor_green(self):
        g = grid(64)
        u = taylor_green(g)
        rho = scalar(g, lambda x1, x2: np.sin(x1))
        ref = oracles.advect(*u.arrays, rho.coeffs)
        got = advect_scalar(u, rho).coeffs
        assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))

    def test_taylor_green_self_advection_is_gradient(self):
        a = advect_velocity(taylor_green(grid(32)))
        assert np.max(np.abs(np.stack(a.arrays))) < 1e-14

    def test_shear_flow(self):
        g = grid(32)
        u = SpectralVector(scalar(g, lambda x1, x2: np.sin(x2)), SpectralScalar.zeros(g))
        assert np.max(np.abs(np.stack(advect_velocity(u).arrays))) < 1e-15

    def test_velocity_oracle_random(self):
        g = grid(64)
        u = synthesize_field(g, 2.0, 9, "divfree-vector")
        ux, uy = u.arrays
        ox, oy = oracles.leray(oracles.advect(ux, uy, ux), oracles.advect(ux, uy, uy))
        got = advect_velocity(u)
        scale = max(np.max(np.abs(ox)), np.max(np.abs(oy)))
        assert np.max(np.abs(got.x.coeffs - ox)) <= 1e-10 * scale
        assert np.max(np.abs(got.y.coeffs - oy)) <= 1e-10 * scale


class TestRhs:
    def test_stratified_steady(self):
        g = grid(32)
        st_ = SimState(0.0, SpectralVector.zeros(g), scalar(g, lambda x1, x2: np.sin(x2) + 0.2 * np.cos(2 * x2)))
        du, dr = rhs(st_)
        assert np.max(np.abs(np.stack(du.arrays))) < 1e-15
        assert np.max(np.abs(dr.coeffs)) == 0

    def test_taylor_green(self):
        g = grid(32)
        u = taylor_green(g)
        du, dr = rhs(SimState(0.0, u, SpectralScalar.zeros(g), nu=0.3))
        assert vec_close(du, [-0.6 * c for c in u.arrays])
        assert np.max(np.abs(dr.coeffs)) == 0

    def test_horizontal_density(self):
        g = grid(32)
        rho = scalar(g, lambda x1, x2: np.sin(x1))
        du, dr = rhs(SimState(0.0, SpectralVector.zeros(g), rho))
        assert vec_close(du, [np.zeros((32, 32)), rho.coeffs])
        assert np.max(np.abs(dr.coeffs)) == 0

    def test_stepper_tendency_agrees_with_rhs(self):
        st_ = random_state(32, 3, 2.0, 2.0, 1.0, 1.0)
        s = Stepper(st_.grid, st_.nu, 1e-3)
        nl, _ = s.nonlinear(s.to_half(st_))
        du, dr = rhs(st_)
        g = st_.grid
        visc = g.ksq[:, :17]
        ref = np.stack([du.x.coeffs, du.y.coeffs, dr.coeffs])[..., :17]
        ref[:2] += st_.nu * visc * np.stack(st_.u.arrays)[..., :17]
        assert np.max(np.abs(nl - ref)) <= 1e-13 * np.max(np.abs(ref))


class TestStep:
    def test_zero_state(self):
        g = grid(16)
        z = SimState(0.0, SpectralVector.zeros(g), SpectralScalar.zeros(g))
        out = step(z, 0.1)
        assert out.t == 0.1
        assert np.all(out.as_array() == 0)

    def test_taylor_green_decay_short(self):
        g = grid(32)
        u = taylor_green(g)
        st_ = SimState(0.0, u, SpectralScalar.zeros(g))
        for _ in range(10):
            st_ = step(st_, 0.01)
        ratio = sobolev_norm(st_.u, 0) / sobolev_norm(u, 0)
        assert ratio == pytest.approx(math.exp(-0.2), rel=1e-12)

    def test_fourth_order(self):
        st0 = random_state(32, 5, 6.0, 6.0, 4.0, 4.0)
        T = 0.4

        def run(dt):
            s = Stepper(st0.grid, st0.nu, dt, warn_cfl=False)
            y = s.to_half(st0)
            for i in range(int(round(T / dt))):
                y = s.advance_half(y, i * dt)
            return y

        dt = 0.04
        ref = run(dt / 16)
        e1 = np.linalg.norm(run(dt) - ref)
        e2 = np.linalg.norm(run(dt / 2) - ref)
        assert 14 < e1 / e2 < 18

    def test_invariants(self):
        st_ = random_state(32, 8, 2.0, 2.0, 2.0, 2.0)
        st_.rho.coeffs[0, 0] = 0.75
        out = st_
        for _ in range(20):
            out = step(out, 5e-3)
        assert out.u.divergence_defect() < 1e-12
        assert np.abs(out.u.x.coeffs[0, 0]) == 0 and np.abs(out.u.y.coeffs[0, 0]) == 0
        assert out.rho.coeffs[0, 0] == 0.75

    def test_blow_up(self):
        g = grid(16)
        c = np.zeros((16, 16), dtype=complex)
        c[1, 0] = np.nan
        bad = SimState(0.5, SpectralVector.zeros(g), SpectralScalar(g, c))
        with pytest.raises(BlowUpError) as exc:
            step(bad, 0.1)
        assert exc.value.t == pytest.approx(0.6)

    def test_rejects_nonpositive_dt(self):
        g = grid(16)
        with pytest.raises(ValueError):
            step(SimState(0.0, SpectralVector.zeros(g), SpectralScalar.zeros(g)), 0.0)

    def test_cfl_warning(self):
        g = grid(32)
        st_ = SimState(0.0, taylor_green(g, 10.0), SpectralScalar.zeros(g))
        with pytest.warns(RuntimeWarning, match="CFL"):
            Stepper(g, 1.0, 0.1).advance(st_)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            Stepper(g, 1.0, 1e-3).advance(st_)

    def test_mode_cutoff_respected(self):
        st_ = random_state(32, 2, 2.0, 2.0, 2.0, 2.0)
        out = step(st_, 1e-2, mode_cutoff=4)
        assert np.all(out.as_array()[:, st_.grid.kmax_inf > 4] == 0)

    @given(st.integers(0, 2**31))
    def test_energy_nonincreasing_without_buoyancy(self, seed):
        g = grid(16)
        u = synthesize_field(g, 2.0, seed, "divfree-vector")
        st_ = SimState(0.0, u, SpectralScalar.zeros(g))
        out = step(st_, 1e-2)
        assert sobolev_norm(out.u, 0) <= sobolev_norm(u, 0) * (1 + 1e-13)


class TestTaylor:
    def test_resting_horizontal_density(self):
        g = grid(32)
        rho = scalar(g, lambda x1, x2: np.sin(x1))
        td = taylor_time_derivatives(SimState(0.0, SpectralVector.zeros(g), rho), 2)
        assert vec_close(td.u[1], [np.zeros((32, 32)), rho.coeffs])
        assert np.max(np.abs(td.rho[1].coeffs)) == 0
        assert np.max(np.abs(td.rho[2].coeffs)) < 1e-15

    def test_zero_state(self):
        g = grid(16)
        td = taylor_time_derivatives(SimState(0.0, SpectralVector.zeros(g), SpectralScalar.zeros(g)), 4)
        for j in range(5):
            assert np.all(np.stack(td.u[j].arrays) == 0) and np.all(td.rho[j].coeffs == 0)

    def test_order_limits(self):
        g = grid(16)
        z = SimState(0.0, SpectralVector.zeros(g), SpectralScalar.zeros(g))
        with pytest.raises(UnsupportedOrderError):
            taylor_time_derivatives(z, 5)
        with pytest.raises(UnsupportedOrderError):
            taylor_time_derivatives(z, -1)

    def test_first_derivative_is_rhs(self):
        st_ = random_state(32, 4, 2.0, 2.0, 1.0, 1.0)
        td = taylor_time_derivatives(st_, 1)
        du, dr = rhs(st_)
        assert np.max(np.abs(np.stack(td.u[1].arrays) - np.stack(du.arrays))) < 1e-13
        assert np.max(np.abs(td.rho[1].coeffs - dr.coeffs)) < 1e-13

    def test_report_divergence_free(self):
        td = taylor_time_derivatives(random_state(32, 4, 3.0, 3.0, 1.0, 1.0), 4)
        rows = td.report()
        assert len(rows) == 5
        assert all(r["u_divergence_defect"] < 1e-12 for r in rows)

    def test_matches_finite_differences(self):
        st_ = random_state(32, 6, 6.0, 6.0, 1.0, 1.0)
        for cmp in taylor_check(st_, 2):
            assert cmp.u_rel_error < 1e-4 and cmp.rho_rel_error < 1e-4
