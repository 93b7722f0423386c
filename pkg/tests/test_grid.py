import numpy as np
import pytest

from mhdwave.errors import ConfigurationError, DomainError
from mhdwave.grid import (
    GridSpec,
    RealField,
    SpectralVectorField,
    dealias,
    divergence,
    expand_half_spectrum,
    fractional_laplacian_apply,
    hermitian_error,
    leray_project,
    spectral_inner,
    spectral_l2,
    transform_forward,
    transform_inverse,
)

from conftest import random_divfree, random_spectral, single_mode_field


class TestGridSpec:
    def test_rejects_small_or_odd_n(self):
        with pytest.raises(ConfigurationError):
            GridSpec(6, 1.0)
        with pytest.raises(ConfigurationError):
            GridSpec(17, 1.0)
        with pytest.raises(ConfigurationError):
            GridSpec(16, -1.0)

    def test_wavenumber_lattice(self):
        g = GridSpec(8, 4 * np.pi)
        assert g.k1d[0] == 0.0
        assert g.k1d[1] == pytest.approx(0.5)
        assert g.k1d[-1] == pytest.approx(-0.5)

    def test_dealias_mask_boundary_zeroed(self):
        # cutoff at n/3 with strict inequality retained
        g = GridSpec(24, 2 * np.pi)
        assert g.dealias_mask[7, 0]       # |k| = 7 < 8
        assert not g.dealias_mask[8, 0]   # |k| = 8 = n/3: zeroed

    def test_wavevector(self):
        from mhdwave.grid import WaveVector

        k = WaveVector(3.0, -4.0)
        assert k.k2 == 25.0


class TestTransforms:
    def test_single_harmonic(self, grid32):
        X, _ = grid32.meshgrid()
        f = transform_forward(RealField(np.cos(X)[None], grid32))
        assert f.coeffs[0, 1, 0] == pytest.approx(0.5, abs=1e-14)
        assert f.coeffs[0, -1, 0] == pytest.approx(0.5, abs=1e-14)
        rest = np.sum(np.abs(f.coeffs)) - np.abs(f.coeffs[0, 1, 0]) - np.abs(f.coeffs[0, -1, 0])
        assert rest < 1e-13

    def test_zero_field(self, grid16):
        f = transform_forward(RealField(np.zeros((2, 16, 16)), grid16))
        assert np.all(f.coeffs == 0)

    def test_round_trip(self, grid32):
        rng = np.random.default_rng(0)
        vals = rng.standard_normal((2, 32, 32))
        f = RealField(vals, grid32)
        back = transform_inverse(transform_forward(f))
        assert np.max(np.abs(back.values - vals)) <= 1e-12 * np.max(np.abs(vals))

    def test_parseval(self, grid32):
        f = random_spectral(grid32, 3)
        phys = transform_inverse(f)
        l2_phys = np.sqrt(np.sum(phys.magnitude() ** 2) * grid32.cell_area)
        assert spectral_l2(f) == pytest.approx(l2_phys, rel=1e-12)

    def test_dimension_mismatch(self, grid16, grid32):
        f = RealField(np.zeros((2, 16, 16)), grid16)
        with pytest.raises(ConfigurationError):
            transform_forward(f, grid32)

    def test_hermitian_symmetry_of_real_transforms(self, grid16):
        f = random_spectral(grid16, 4)
        assert hermitian_error(f) < 1e-14


class TestFractionalLaplacian:
    def test_single_mode_scaling(self, grid16):
        f = single_mode_field(grid16, (2, 0))
        out = fractional_laplacian_apply(f, 1.0)
        assert np.allclose(out.coeffs, 2.0 * f.coeffs)

    def test_s_zero_identity(self, grid16):
        f = random_spectral(grid16, 5)
        out = fractional_laplacian_apply(f, 0.0)
        assert np.array_equal(out.coeffs, f.coeffs)

    def test_round_trip_mean_zero(self, grid16):
        f = random_divfree(grid16, 6)
        out = fractional_laplacian_apply(fractional_laplacian_apply(f, 1.0), -1.0)
        ref = dealias(f)  # multiplier path zeroes Nyquist; f is already dealiased
        scale = np.max(np.abs(ref.coeffs))
        assert np.max(np.abs(out.coeffs - ref.coeffs)) <= 1e-12 * scale

    def test_negative_s_on_nonzero_mean_rejected(self, grid16):
        c = np.zeros((1, 16, 16), dtype=complex)
        c[0, 0, 0] = 1.0
        with pytest.raises(DomainError):
            fractional_laplacian_apply(SpectralVectorField(c, grid16), -0.5)

    def test_exponent_additivity(self, grid16):
        f = random_divfree(grid16, 7)
        a = fractional_laplacian_apply(fractional_laplacian_apply(f, 0.7), 0.8)
        b = fractional_laplacian_apply(f, 1.5)
        assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-12 * np.max(np.abs(b.coeffs))


class TestLeray:
    def test_annihilates_gradients(self, grid16):
        # f = grad(phi) for a random mean-zero phi
        phi = random_spectral(grid16, 8, ncomp=1)
        phi.coeffs[:, 0, 0] = 0.0
        c = np.empty((2, 16, 16), dtype=complex)
        c[0] = 1j * grid16.kx * phi.coeffs[0] * grid16.nyquist_free
        c[1] = 1j * grid16.ky * phi.coeffs[0] * grid16.nyquist_free
        out = leray_project(SpectralVectorField(c, grid16))
        assert np.max(np.abs(out.coeffs)) <= 1e-12 * np.max(np.abs(c))

    def test_identity_on_divergence_free(self, grid16):
        f = random_divfree(grid16, 9)
        out = leray_project(f)
        assert np.max(np.abs(out.coeffs - f.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs))

    def test_output_divergence_free_and_idempotent(self, grid16):
        f = random_spectral(grid16, 10)
        p = leray_project(f)
        assert np.max(np.abs(divergence(p))) <= 1e-12 * spectral_l2(p)
        pp = leray_project(p)
        assert np.max(np.abs(pp.coeffs - p.coeffs)) <= 1e-13 * np.max(np.abs(p.coeffs))

    def test_orthogonality(self, grid16):
        f = random_spectral(grid16, 11)
        p = leray_project(f)
        rest = SpectralVectorField(f.coeffs - p.coeffs, grid16)
        inner = spectral_inner(p, rest)
        assert abs(inner) <= 1e-12 * spectral_l2(f) ** 2


class TestDealias:
    def test_band_limited_unchanged(self, grid16):
        f = single_mode_field(grid16, (3, 2))
        out = dealias(f)
        assert np.array_equal(out.coeffs, f.coeffs)

    def test_boundary_mode_zeroed(self):
        g = GridSpec(24, 2 * np.pi)
        f = single_mode_field(g, (8, 0))  # exactly at n/3
        out = dealias(f)
        assert np.all(out.coeffs == 0)

    def test_product_matches_direct_convolution(self, grid16):
        # scalar product of two retained-band fields vs the integer-index
        # convolution, compared on the retained band
        g = grid16
        rng = np.random.default_rng(12)
        a = dealias(random_spectral(g, 13, ncomp=1))
        b = dealias(random_spectral(g, 14, ncomp=1))
        pa = transform_inverse(a)
        pb = transform_inverse(b)
        prod = transform_forward(RealField(pa.values * pb.values, g))
        prod = dealias(prod)

        idx = np.fft.fftfreq(g.n, 1.0 / g.n).astype(int)
        truth = np.zeros((g.n, g.n), dtype=complex)
        supp = [(i, j) for i in range(g.n) for j in range(g.n) if a.coeffs[0, i, j] != 0]
        suppb = [(i, j) for i in range(g.n) for j in range(g.n) if b.coeffs[0, i, j] != 0]
        for i1, j1 in supp:
            for i2, j2 in suppb:
                s1, s2 = idx[i1] + idx[i2], idx[j1] + idx[j2]
                if abs(s1) >= g.n // 2 or abs(s2) >= g.n // 2:
                    continue
                truth[s1 % g.n, s2 % g.n] += a.coeffs[0, i1, j1] * b.coeffs[0, i2, j2]
        truth *= g.dealias_mask
        scale = np.max(np.abs(truth))
        assert np.max(np.abs(prod.coeffs[0] - truth)) <= 1e-12 * scale


def test_expand_half_spectrum_exact(grid16):
    f = random_spectral(grid16, 15)
    half = grid16.n // 2 + 1
    rebuilt = expand_half_spectrum(f.coeffs[:, :, :half].copy(), grid16.n)
    scale = np.max(np.abs(f.coeffs))
    # same field up to the round-off already present in the redundant half
    assert np.max(np.abs(rebuilt - f.coeffs)) < 1e-13 * scale
    assert hermitian_error(SpectralVectorField(rebuilt, grid16)) < 1e-14 * scale
