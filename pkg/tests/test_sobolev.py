import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boussinesq2d.errors import InvalidNormSpecError, OrderingError, UnsupportedExponentError
from boussinesq2d.sobolev import (
    NormSpec,
    commutator_residual,
    grad_linf,
    mixed_exponents_admissible,
    mixed_time_norm,
    norm,
    q_project,
    sobolev_norm,
)
from boussinesq2d.spectral import SpectralScalar, SpectralVector, grid, leray_project, taylor_green, to_physical
from boussinesq2d.synthesis import synthesize_field

import oracles


def sin1(g):
    return SpectralScalar.from_function(g, lambda x1, x2: np.sin(x1))


class TestNorms:
    def test_constant_l2(self):
        assert norm(SpectralScalar.constant(grid(16), 1.0), NormSpec.lebesgue(2)) == pytest.approx(2 * np.pi, rel=1e-14)

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 2.5])
    def test_sin_sobolev(self, s):
        assert sobolev_norm(sin1(grid(32)), s) == pytest.approx(2 ** ((s + 1) / 2) * np.pi, rel=1e-13)

    def test_sin_linf(self):
        assert norm(sin1(grid(32)), NormSpec.lebesgue(math.inf)) == pytest.approx(1.0, rel=1e-14)

    def test_invalid_spec(self):
        with pytest.raises(InvalidNormSpecError):
            NormSpec.lebesgue(0.5)
        with pytest.raises(InvalidNormSpecError):
            NormSpec("besov")

    def test_l2_matches_h0_on_dealiased(self):
        f = synthesize_field(grid(64), 1.0, 11, "scalar")
        assert norm(f, NormSpec.lebesgue(2)) == pytest.approx(sobolev_norm(f, 0.0), rel=1e-10)

    def test_vector_euclidean(self):
        g = grid(32)
        u = taylor_green(g)
        assert sobolev_norm(u, 0.0) == pytest.approx(math.sqrt(2) * np.pi, rel=1e-13)
        assert norm(u, NormSpec.lebesgue(2)) == pytest.approx(math.sqrt(2) * np.pi, rel=1e-13)

    def test_w1inf_and_grad_linf(self):
        g = grid(32)
        u = taylor_green(g)
        x1, x2 = g.mesh
        # |grad u|_F^2 = 2 cos^2 x1 cos^2 x2 + 2 sin^2 x1 sin^2 x2, max sqrt 2
        assert grad_linf(u) == pytest.approx(math.sqrt(2), rel=1e-13)
        umax = np.max(np.hypot(np.sin(x1) * np.cos(x2), np.cos(x1) * np.sin(x2)))
        assert norm(u, NormSpec.w1inf()) == pytest.approx(umax + math.sqrt(2), rel=1e-13)

    def test_w2p_against_quadrature(self):
        g = grid(32)
        f = sin1(g)
        # |f|, |Df| = |cos|, |D^2 f| = |sin|
        x1, _ = g.mesh
        p = 3.0
        ref = (g.cell_area * np.sum(2 * np.abs(np.sin(x1)) ** p + np.abs(np.cos(x1)) ** p)) ** (1 / p)
        assert norm(f, NormSpec.w2p(p)) == pytest.approx(ref, rel=1e-12)

    @given(st.integers(0, 2**31), st.floats(0, 3), st.floats(0, 3))
    def test_monotone_in_s(self, seed, s1, s2):
        f = synthesize_field(grid(16), 1.0, seed, "scalar")
        lo, hi = sorted((s1, s2))
        assert sobolev_norm(f, lo) <= sobolev_norm(f, hi) * (1 + 1e-14)


class TestQ:
    def test_stratified_is_gradient(self):
        g = grid(32)
        f = SpectralVector.from_function(g, lambda x1, x2: 0 * x1, lambda x1, x2: np.sin(x2) + 0.3 * np.cos(3 * x2))
        q = q_project(f)
        assert np.allclose(np.stack(q.arrays), np.stack(f.arrays), atol=1e-14)

    def test_divergence_free_annihilated(self):
        q = q_project(taylor_green(grid(32)))
        assert np.max(np.abs(np.stack(q.arrays))) < 1e-15

    @given(st.integers(0, 2**31))
    def test_idempotent_and_complementary(self, seed):
        g = grid(16)
        rng = np.random.default_rng(seed)
        a = SpectralScalar.from_physical(g, rng.standard_normal((16, 16)))
        b = SpectralScalar.from_physical(g, rng.standard_normal((16, 16)))
        a.coeffs[0, 0] = b.coeffs[0, 0] = 0
        f = SpectralVector(a, b)
        q = q_project(f)
        qq = q_project(q)
        assert np.allclose(np.stack(qq.arrays), np.stack(q.arrays), atol=1e-14)
        p = leray_project(f)
        total = sobolev_norm(p, 0) ** 2 + sobolev_norm(q, 0) ** 2
        assert total == pytest.approx(sobolev_norm(f, 0) ** 2, rel=1e-10)

    def test_divergence_preserved(self, rng):
        g = grid(16)
        f = SpectralVector.from_arrays(g, synthesize_field(g, 1, 1).coeffs, synthesize_field(g, 1, 2).coeffs)
        q = q_project(f)
        assert np.allclose(q.divergence().coeffs, f.divergence().coeffs, atol=1e-14)


def oracle_commutator(u, rho, s):
    ux, uy = u.arrays
    lhs = oracles.lam(oracles.advect(ux, uy, rho.coeffs), s)
    rhs = oracles.advect(ux, uy, oracles.lam(rho.coeffs, s))
    return oracles.l2(lhs - rhs)


class TestCommutator:
    def test_constant_velocity_commutes(self):
        g = grid(32)
        u = SpectralVector(SpectralScalar.constant(g, 0.7), SpectralScalar.constant(g, -1.3))
        rho = synthesize_field(g, 1.0, 5)
        for s in (0.25, 0.5, 1.5):
            assert commutator_residual(u, rho, s).residual_norm < 1e-12

    def test_small_s_limit(self):
        g = grid(32)
        rep = commutator_residual(taylor_green(g), sin1(g), 1e-8)
        assert rep.residual_norm < 1e-6

    def test_taylor_green_against_oracle(self):
        g = grid(64)
        u = taylor_green(g)
        rho = synthesize_field(g, 1.0, 123)
        rep = commutator_residual(u, rho, 0.5)
        assert rep.residual_norm == pytest.approx(oracle_commutator(u, rho, 0.5), rel=1e-10)
        assert 0 < rep.ratio < math.inf

    @pytest.mark.parametrize("s", [0.0, 1.0, 2.0, -0.5])
    def test_unsupported(self, s):
        g = grid(16)
        with pytest.raises(UnsupportedExponentError):
            commutator_residual(taylor_green(g), sin1(g), s)

    def test_bound_branches(self):
        g = grid(32)
        u = synthesize_field(g, 3.0, 1, "divfree-vector")
        rho = synthesize_field(g, 2.0, 2)
        lo = commutator_residual(u, rho, 0.5)
        hi = commutator_residual(u, rho, 1.5)
        # the s < 1 bound uses ||grad u||_inf ||Lambda^s rho|| + ||u||_{H^2} ||rho||_{H^s}
        from boussinesq2d.spectral import fractional_laplacian

        expected = grad_linf(u) * sobolev_norm(fractional_laplacian(rho, 0.5), 0) + sobolev_norm(u, 2) * sobolev_norm(rho, 0.5)
        assert lo.bound_value == pytest.approx(expected, rel=1e-14)
        assert hi.bound_value == pytest.approx(sobolev_norm(u, 2.5) * sobolev_norm(rho, 1.5), rel=1e-14)


class TestMixedTimeNorm:
    def test_constant(self):
        t = np.linspace(0, 3, 7)
        assert mixed_time_norm(list(zip(t, np.ones(7))), 1) == pytest.approx(3.0)

    def test_exponential(self):
        t = np.linspace(0, 1, 1000)
        assert abs(mixed_time_norm(np.c_[t, np.exp(-t)], 1) - (1 - math.exp(-1))) < 1e-6

    def test_two_samples(self):
        assert mixed_time_norm([(0, 1.0), (2, 3.0)], 1) == pytest.approx(4.0)
        assert mixed_time_norm([(0, 1.0), (2, 3.0)], 2) == pytest.approx(math.sqrt(10.0))

    def test_errors(self):
        with pytest.raises(OrderingError):
            mixed_time_norm([(1, 1.0), (0, 1.0)], 1)
        with pytest.raises(ValueError):
            mixed_time_norm([(0, 1.0)], 0.5)

    @given(st.lists(st.floats(0, 10), min_size=2, max_size=20))
    def test_monotone_in_horizon(self, vals):
        t = np.arange(len(vals), dtype=float)
        arr = np.c_[t, vals]
        assert mixed_time_norm(arr[:-1], 2) <= mixed_time_norm(arr, 2) + 1e-12


def test_admissibility():
    assert mixed_exponents_admissible(0.1, 1.0, 2.0)
    assert not mixed_exponents_admissible(1.0, 0.1, 1.0)
