"""Spectral core: transforms, multipliers, differential operators, norms,
and reproducible random fields."""

import numpy as np
import pytest

from nsplab.errors import DomainError, GridMismatchError
from nsplab.littlewood_paley import dyadic_block
from nsplab.spectral import (Annulus, Ball, Grid, SpectralField,
                             apply_multiplier, curl, div, grad,
                             inv_neg_laplacian, lambda_op, leray_complement,
                             leray_project, lp_norm, random_field,
                             transform_roundtrip)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def grid():
    return Grid(2, 64, TWO_PI)


@pytest.fixture(scope="module")
def grid3():
    return Grid(3, 16, TWO_PI)


def tone(grid, k, axis=0):
    """cos(k x_axis) as a spectral field."""
    x = grid.coords()
    phys = np.cos(k * x[axis]) + np.zeros(grid.shape)
    return SpectralField.from_physical(grid, phys, mean_zero=True)


class TestGrid:
    def test_validation(self):
        with pytest.raises(DomainError):
            Grid(4, 64, TWO_PI)
        with pytest.raises(DomainError):
            Grid(2, 48, TWO_PI)  # not a power of two
        with pytest.raises(DomainError):
            Grid(2, 4, TWO_PI)   # too small
        with pytest.raises(DomainError):
            Grid(2, 64, -1.0)

    def test_fundamental_frequency(self):
        g = Grid(2, 64, 4.0)
        r = g.radius()
        assert np.isclose(np.min(r[r > 0]), 2 * np.pi / 4.0, rtol=1e-14)

    def test_lattice_symmetry(self, grid):
        """Every +xi has its -xi partner (Nyquist maps to itself)."""
        idx = grid.index_1d()
        assert set(idx) == {int(i) for i in idx}
        for k in idx:
            if k != -grid.n // 2:
                assert -k in idx

    def test_dealias_mask_kills_nyquist(self, grid):
        mask = grid.dealias_mask()
        assert not mask[grid.n // 2, 0]
        assert mask[0, 0]


class TestTransformRoundtrip:
    def test_single_mode_exact(self, grid):
        f = tone(grid, 1)
        rt = transform_roundtrip(f)
        assert np.max(np.abs(rt.coeffs - f.coeffs)) < 1e-12

    def test_zero(self, grid):
        z = SpectralField.zeros(grid)
        assert np.max(np.abs(transform_roundtrip(z).coeffs)) == 0.0

    def test_random_band_limited(self, grid):
        f = random_field(grid, Ball(3), seed=5)
        rt = transform_roundtrip(f)
        rel = np.linalg.norm(rt.coeffs - f.coeffs) / np.linalg.norm(f.coeffs)
        assert rel < 1e-12

    def test_grid_mismatch(self, grid):
        other = Grid(2, 32, TWO_PI)
        f = SpectralField.zeros(other)
        with pytest.raises(GridMismatchError):
            SpectralField(grid, f.coeffs)


class TestApplyMultiplier:
    def test_identity(self, grid):
        f = random_field(grid, Ball(3), seed=1)
        out = apply_multiplier(f, lambda r: np.ones_like(r))
        assert np.max(np.abs(out.coeffs - f.coeffs)) == 0.0

    def test_lambda_on_pure_tone(self, grid):
        k = 3.0
        f = tone(grid, 3)
        out = apply_multiplier(f, lambda r: r)
        assert np.max(np.abs(out.coeffs - k * f.coeffs)) < 1e-12

    def test_inverse_lambda_on_tone(self, grid):
        f = tone(grid, 4)
        out = apply_multiplier(f, lambda r: 1.0 / r)
        assert np.max(np.abs(out.coeffs - f.coeffs / 4.0)) < 1e-12

    def test_singular_symbol_needs_mean_zero(self, grid):
        phys = 1.0 + np.cos(grid.coords()[0]) + np.zeros(grid.shape)
        f = SpectralField.from_physical(grid, phys)
        with pytest.raises(DomainError):
            apply_multiplier(f, lambda r: 1.0 / r)


class TestDifferentialOps:
    def test_leray_annihilates_gradients(self, grid):
        phi = random_field(grid, Ball(3), seed=2)
        gphi = grad(phi)
        p = leray_project(gphi)
        assert max(np.max(np.abs(c.coeffs)) for c in p) < 1e-12

    def test_div_of_gradient_is_laplacian(self, grid):
        """u = grad(sin x1) is curl-free; div u = -sin x1 on the 2pi torus."""
        x = grid.coords()
        phi = SpectralField.from_physical(grid, np.sin(x[0]) + 0 * x[1], mean_zero=True)
        d = div(grad(phi))
        expect = SpectralField.from_physical(grid, -np.sin(x[0]) + 0 * x[1], mean_zero=True)
        assert np.max(np.abs(d.coeffs - expect.coeffs)) < 1e-12

    def test_lambda_composition(self, grid):
        f = random_field(grid, Annulus(2), seed=3)
        out = lambda_op(lambda_op(f, -1.0), 1.0)
        assert np.max(np.abs(out.coeffs - f.coeffs)) < 1e-12

    @pytest.mark.parametrize("s", [1.0, 0.5, 2.0])
    def test_lambda_inverse_pairs(self, grid, s):
        f = random_field(grid, Annulus(2), seed=4)
        out = lambda_op(lambda_op(f, s), -s)
        assert np.max(np.abs(out.coeffs - f.coeffs)) < 1e-12

    def test_negative_order_requires_mean_zero(self, grid):
        phys = 1.0 + np.cos(grid.coords()[0]) + np.zeros(grid.shape)
        f = SpectralField.from_physical(grid, phys)
        with pytest.raises(DomainError):
            lambda_op(f, -1.0)
        with pytest.raises(DomainError):
            inv_neg_laplacian(f)

    def test_leray_decomposition(self, grid):
        u = [random_field(grid, Ball(3), seed=s) for s in (6, 7)]
        p = leray_project(u)
        q = leray_complement(u)
        for i in range(2):
            assert np.max(np.abs(p[i].coeffs + q[i].coeffs - u[i].coeffs)) < 1e-12
        # P applied to a potential field is zero
        pq = leray_project(q)
        qc = leray_complement(pq)
        assert max(np.max(np.abs(c.coeffs)) for c in qc) < 1e-12
        assert np.max(np.abs(div(p).coeffs)) < 1e-10

    def test_curl_of_gradient_vanishes(self, grid3):
        phi = random_field(grid3, Ball(2), seed=8)
        c = curl(grad(phi))
        assert max(np.max(np.abs(f.coeffs)) for f in c) < 1e-12


class TestLpNorm:
    def test_constant_field_volume(self):
        g = Grid(2, 16, 3.0)
        f = SpectralField.from_physical(g, np.ones(g.shape))
        for p in (1.0, 2.0, 4.0):
            assert np.isclose(lp_norm(f, p), 9.0 ** (1.0 / p), rtol=1e-12)

    def test_parseval(self, grid):
        f = random_field(grid, Ball(3), seed=9)
        assert abs(lp_norm(f, 2) - f.l2()) < 1e-10 * f.l2()

    def test_sup_norm_of_tone(self, grid):
        f = tone(grid, 1)
        assert abs(lp_norm(f, np.inf) - 1.0) < 1e-10

    def test_invalid_exponent(self, grid):
        with pytest.raises(DomainError):
            lp_norm(tone(grid, 1), 0.5)


class TestRandomField:
    def test_determinism(self, grid):
        f1 = random_field(grid, Annulus(2), seed=11)
        f2 = random_field(grid, Annulus(2), seed=11)
        assert np.array_equal(f1.coeffs, f2.coeffs)

    def test_seeds_differ(self, grid):
        f1 = random_field(grid, Ball(3), seed=1)
        f2 = random_field(grid, Ball(3), seed=2)
        assert (f1 - f2).l2() > 0.0

    def test_annulus_support_disjoint_blocks(self, grid):
        f = random_field(grid, Annulus(2), seed=12)
        for jp in (0, 4, 5):
            b = dyadic_block(f, jp)
            assert np.max(np.abs(b.coeffs)) < 1e-12

    def test_real_and_mean_zero(self, grid):
        f = random_field(grid, Ball(3), seed=13)
        assert f.dc == 0
        assert f.physical_imag_residual() < 1e-12
        assert f.conjugate_symmetry_error() == 0.0

    def test_empty_support(self, grid):
        with pytest.raises(DomainError):
            random_field(grid, Annulus(-20), seed=1)

    def test_grid_independent_coefficients(self):
        """Same (support, seed) gives the same function on any resolving grid."""
        f64 = random_field(Grid(2, 64, TWO_PI), Ball(3), seed=21)
        f128 = random_field(Grid(2, 128, TWO_PI), Ball(3), seed=21)
        assert np.isclose(f64.l2(), f128.l2(), rtol=1e-13)
