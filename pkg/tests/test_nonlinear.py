"""Advection terms: dealiased transform path vs direct convolution oracle."""

import numpy as np
import pytest

from bousspec import (
    PhysicalParams,
    SpectralScalarField,
    SpectralVectorField,
    divergence_max,
    enforce_constraints,
    hermitian_defect,
    l2_inner,
    leray_project,
    make_grid,
)
from bousspec.nonlinear import (
    AliasingMode,
    CONVOLUTION_MODE_LIMIT,
    buoyancy,
    convect_convolution,
    convect_pseudospectral,
    convect_state,
)


def band_limited_fields(grid, seed, bandwidth):
    """Random divergence-free u and scalar theta supported on |j_i| <= bandwidth."""
    rng = np.random.default_rng(seed)
    keep = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        keep &= np.abs(grid.k[axis]) <= bandwidth
    keep &= grid.k2 > 0

    def draw():
        c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        return c * keep

    u = SpectralVectorField(grid, np.stack([draw() for _ in range(grid.dim)]))
    u = leray_project(enforce_constraints(u))
    theta = enforce_constraints(SpectralScalarField(grid, draw()))
    return u, theta


def shear_flow(grid):
    """u = (cos x2, 0): advects nothing along itself."""
    u = SpectralVectorField(grid)
    u.coeffs[0][0, 1] = 0.5
    u.coeffs[0][0, -1] = 0.5
    return u


class TestPseudospectral:
    def test_shear_self_advection_vanishes(self):
        g = make_grid(2, 16)
        u = shear_flow(g)
        res = convect_pseudospectral(u, u, g)
        assert res.aliasing_mode is AliasingMode.DEALIASED_2_3
        assert np.max(np.abs(res.field.coeffs)) <= 1e-15

    def test_shear_advecting_scalar(self):
        # u = (cos x2, 0), theta = sin x1 -> u . grad theta = cos x1 cos x2,
        # four modes at (+-1, +-1) with coefficient 1/4 each
        g = make_grid(2, 16)
        u = shear_flow(g)
        theta = SpectralScalarField(g)
        theta.coeffs[1, 0] = -0.5j
        theta.coeffs[-1, 0] = 0.5j
        res = convect_pseudospectral(u, theta, g).field
        expect = np.zeros(g.shape, complex)
        for j1 in (1, -1):
            for j2 in (1, -1):
                expect[j1 % 16, j2 % 16] = 0.25
        np.testing.assert_allclose(res.coeffs, expect, atol=1e-14)

    def test_output_masked_and_constrained(self):
        g = make_grid(2, 8)
        u, theta = band_limited_fields(g, 0, bandwidth=2)
        out = convect_pseudospectral(u, theta, g).field
        assert np.max(np.abs(out.coeffs[~g.dealias_mask])) == 0.0
        assert out.coeffs[g.zero_index] == 0.0
        assert hermitian_defect(out) == 0.0

    def test_grid_mismatch_rejected(self):
        g1 = make_grid(2, 8)
        g2 = make_grid(2, 16)
        u, _ = band_limited_fields(g1, 1, 2)
        _, theta = band_limited_fields(g2, 1, 2)
        with pytest.raises(ValueError, match="different grids"):
            convect_pseudospectral(u, theta)
        with pytest.raises(ValueError, match="supplied grid"):
            convect_pseudospectral(u, u, g2)

    @pytest.mark.parametrize("dim,modes", [(2, 16), (3, 8)])
    def test_combined_state_convection_matches_separate_calls(self, dim, modes):
        g = make_grid(dim, modes)
        u, theta = band_limited_fields(g, 11, bandwidth=modes // 3)
        conv_u, conv_th = convect_state(u, theta, g)
        ref_u = convect_pseudospectral(u, u, g).field
        ref_th = convect_pseudospectral(u, theta, g).field
        assert conv_u.aliasing_mode is AliasingMode.DEALIASED_2_3
        scale = max(np.max(np.abs(ref_u.coeffs)), np.max(np.abs(ref_th.coeffs)))
        assert np.max(np.abs(conv_u.field.coeffs - ref_u.coeffs)) <= 1e-14 * scale
        assert np.max(np.abs(conv_th.field.coeffs - ref_th.coeffs)) <= 1e-14 * scale


class TestConvolutionOracle:
    def test_zero_input(self):
        g = make_grid(2, 8)
        u = SpectralVectorField(g)
        res = convect_convolution(u, u, g)
        assert res.aliasing_mode is AliasingMode.NONE
        assert np.max(np.abs(res.field.coeffs)) == 0.0

    def test_two_mode_hand_computation(self):
        # u with modes +-(0, 1), u_hat = (a, 0); v scalar with modes
        # +-(1, 0), v_hat = b.  u.grad v has coefficient
        # i (q . u_hat(p)) v_hat(q) summed over the four (p, q) pairs:
        # at k = p + q = (1, 1):  i * (q1 * a) * b = i a b (q = (1,0))
        g = make_grid(2, 8)
        a, b = 0.7, 0.3 + 0.1j
        u = SpectralVectorField(g)
        u.coeffs[0][0, 1] = a
        u.coeffs[0][0, -1] = a
        v = SpectralScalarField(g)
        v.coeffs[1, 0] = b
        v.coeffs[-1, 0] = np.conj(b)
        out = convect_convolution(u, v, g).field.coeffs
        expect = np.zeros(g.shape, complex)
        for p2 in (1, -1):
            for q1 in (1, -1):
                vq = b if q1 == 1 else np.conj(b)
                expect[q1 % 8, p2 % 8] += 1j * q1 * a * vq
        np.testing.assert_allclose(out, expect, atol=1e-15)
        assert np.count_nonzero(out) == 4

    def test_pairs_leaving_grid_are_dropped(self):
        # both inputs at the highest resolved label M/2 - 1 = 3: the sum
        # (6) is not resolved on an 8-grid, so the output is empty
        g = make_grid(2, 8)
        u = SpectralVectorField(g)
        u.coeffs[1][3, 0] = 1.0
        u.coeffs[1][-3, 0] = 1.0
        v = SpectralScalarField(g)
        v.coeffs[3, 0] = 1.0
        v.coeffs[-3, 0] = 1.0
        out = convect_convolution(u, v, g).field.coeffs
        # only p + q = 0 and the mixed +-(3 -+ 3) = 0 pairs remain, and
        # those have q . u_hat(p) proportional to q2 * 0 = ... q = (+-3, 0)
        # with u_hat(p) = (0, 1): q . u_hat(p) = 0, so everything cancels
        assert np.max(np.abs(out)) == 0.0

    def test_mode_limit_guard(self):
        g = make_grid(2, 128)  # 16384 modes
        u = SpectralVectorField(g)
        with pytest.raises(ValueError, match=str(CONVOLUTION_MODE_LIMIT)):
            convect_convolution(u, u, g)

    @pytest.mark.parametrize("dim,modes", [(2, 16), (3, 8)])
    def test_agrees_with_pseudospectral_on_band_limited_data(self, dim, modes):
        g = make_grid(dim, modes)
        u, theta = band_limited_fields(g, 17, bandwidth=modes // 4)
        for v in (u, theta):
            fast = convect_pseudospectral(u, v, g).field.coeffs
            slow = convect_convolution(u, v, g).field.coeffs
            scale = np.max(np.abs(slow))
            dev = np.max(np.abs((fast - slow) * g.dealias_mask))
            assert dev <= 1e-13 * scale

    def test_reality_and_zero_mode(self):
        g = make_grid(2, 8)
        u, theta = band_limited_fields(g, 23, bandwidth=2)
        out = convect_convolution(u, theta, g).field
        assert hermitian_defect(out) == 0.0
        assert out.coeffs[g.zero_index] == 0.0


class TestEnergyFlux:
    @pytest.mark.parametrize("dim,modes", [(2, 16), (3, 8)])
    def test_advection_moves_no_energy(self, dim, modes):
        # Re <u.grad v, v> = 0 for divergence-free u, discretely too
        g = make_grid(dim, modes)
        u, theta = band_limited_fields(g, 31, bandwidth=modes // 4)
        for v in (u, theta):
            conv = convect_pseudospectral(u, v, g).field
            flux = l2_inner(conv, v).real
            scale = max(abs(l2_inner(v, v).real), 1.0)
            assert abs(flux) <= 1e-12 * scale


class TestBuoyancy:
    def test_vertical_single_mode_killed(self):
        # theta = cos x2 forces along (0, 1) at j = (0, +-1): a pure
        # gradient, projected away entirely
        g = make_grid(2, 8)
        theta = SpectralScalarField(g)
        theta.coeffs[0, 1] = 0.5
        theta.coeffs[0, -1] = 0.5
        out = buoyancy(theta, PhysicalParams(nu=1.0, kappa=1.0))
        assert np.max(np.abs(out.coeffs)) == 0.0

    def test_horizontal_single_mode_untouched(self):
        # theta = cos x1 forces along (0, 1) at j = (+-1, 0): already
        # divergence-free
        g = make_grid(2, 8)
        theta = SpectralScalarField(g)
        theta.coeffs[1, 0] = 0.5
        theta.coeffs[-1, 0] = 0.5
        out = buoyancy(theta, PhysicalParams(nu=1.0, kappa=1.0))
        assert out.coeffs[1][1, 0] == 0.5
        assert out.coeffs[0][1, 0] == 0.0

    @pytest.mark.parametrize("dim", [2, 3])
    def test_divergence_free(self, dim):
        g = make_grid(dim, 8)
        _, theta = band_limited_fields(g, 5, bandwidth=2)
        out = buoyancy(theta, PhysicalParams(nu=0.5, kappa=0.5))
        assert divergence_max(out) <= 1e-13 * max(np.max(np.abs(out.coeffs)), 1.0)

    def test_zero_theta(self):
        g = make_grid(2, 8)
        out = buoyancy(SpectralScalarField(g), PhysicalParams(nu=1.0, kappa=1.0))
        assert np.max(np.abs(out.coeffs)) == 0.0
