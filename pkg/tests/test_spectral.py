import numpy as np
import pytest

from cxrphase.spectral import (
    AssdParams,
    SpectralError,
    apply_filter,
    assd_peak_frequency,
    build_assd_bank,
    build_frequency_grid,
    build_riesz,
    crop_quadrant,
    fft_forward,
    fft_inverse,
    mirror_double,
)


class TestFrequencyGrid:
    def test_dc_bin_is_zero(self):
        g = build_frequency_grid(16, 16)
        assert g.omega_mag[0, 0] == 0.0
        assert (g.omega_mag >= 0.0).all()

    def test_nyquist_bin_is_positive_pi(self):
        g = build_frequency_grid(16, 16)
        assert g.omega1[8, 0] == np.pi
        assert g.omega2[0, 8] == np.pi

    def test_bin_4_4_magnitude(self):
        g = build_frequency_grid(16, 16)
        assert np.isclose(g.omega_mag[4, 4], np.sqrt(2) * np.pi / 2, rtol=0, atol=1e-12)

    def test_deterministic_reconstruction(self):
        a, b = build_frequency_grid(24, 16), build_frequency_grid(24, 16)
        assert (a.omega1 == b.omega1).all() and (a.omega2 == b.omega2).all()

    def test_range_within_pi(self):
        g = build_frequency_grid(15, 17)
        assert g.omega1.max() < np.pi and g.omega1.min() > -np.pi

    def test_below_minimum(self):
        with pytest.raises(SpectralError):
            build_frequency_grid(4, 16)


class TestFft:
    def test_constant_dc_equals_pixel_sum(self):
        img = np.full((16, 16), 0.7)
        spec = fft_forward(img)
        n = img.size
        assert abs(spec[0, 0] - 0.7 * n) <= 1e-10 * n
        spec[0, 0] = 0.0
        assert np.abs(spec).max() <= 1e-10 * n

    def test_impulse_gives_flat_spectrum(self):
        img = np.zeros((16, 16))
        img[0, 0] = 1.0
        assert np.allclose(fft_forward(img), 1.0, rtol=0, atol=1e-12)

    def test_roundtrip_random(self, rng):
        img = rng.random((16, 16))
        assert np.abs(fft_inverse(fft_forward(img)) - img).max() <= 1e-10

    def test_inverse_of_flat_ones_is_impulse(self):
        out = fft_inverse(np.ones((16, 16), complex))
        assert np.isclose(out[0, 0], 1.0, rtol=0, atol=1e-12)
        assert np.abs(out[1:, :]).max() <= 1e-12 and np.abs(out[0, 1:]).max() <= 1e-12

    def test_roundtrip_ramp(self):
        img = np.outer(np.arange(16.0), np.ones(16))
        assert np.abs(fft_inverse(fft_forward(img)) - img).max() <= 1e-10

    def test_broken_symmetry_raises(self):
        spec = np.zeros((16, 16), complex)
        spec[1, 0] = 1.0  # conjugate partner bin (15, 0) left empty
        with pytest.raises(SpectralError, match="residue"):
            fft_inverse(spec)

    def test_non_finite_input_raises(self):
        img = np.zeros((8, 8))
        img[0, 0] = np.nan
        with pytest.raises(SpectralError):
            fft_forward(img)

    def test_parseval(self, rng):
        img = rng.normal(size=(32, 24))
        lhs = np.sum(np.abs(fft_forward(img)) ** 2)
        rhs = img.size * np.sum(img * img)
        assert abs(lhs - rhs) <= 1e-8 * rhs


class TestAssdBank:
    def test_dc_killed_and_unit_peak(self):
        g = build_frequency_grid(64, 64)
        for resp in build_assd_bank(g, AssdParams(alpha=1.3, s0=2.0, num_scales=3)):
            assert resp[0, 0] == 0.0
            assert resp.max() == 1.0

    def test_analytic_peak_bin(self):
        # |w| exp(-s|w|^a) peaks at (1/(s a))^(1/a); a=1, s=4 -> 0.25 rad/px
        g = build_frequency_grid(256, 256)
        resp = build_assd_bank(g, AssdParams(alpha=1.0, s0=4.0, num_scales=1))[0]
        assert np.isclose(assd_peak_frequency(4.0, 1.0), 0.25)
        row = resp[0, : 256 // 2]
        k_star = 0.25 * 256 / (2 * np.pi)
        assert abs(np.argmax(row) - k_star) <= 1.0

    def test_scales_progression(self):
        p = AssdParams(alpha=2.0, s0=1.5, scale_multiplier=3.0, num_scales=3)
        assert p.scales() == [1.5, 4.5, 13.5]

    def test_coarsest_wavelength_factory(self):
        p = AssdParams.from_coarsest_wavelength(25.0, alpha=2.0, scale_multiplier=2.0, num_scales=2)
        coarsest = p.scales()[-1]
        wavelength = 2 * np.pi / assd_peak_frequency(coarsest, p.alpha)
        assert np.isclose(wavelength, 25.0, rtol=1e-12)

    def test_invalid_params(self):
        with pytest.raises(ValueError, match="alpha"):
            AssdParams(alpha=3.0)
        with pytest.raises(ValueError, match="s0"):
            AssdParams(s0=-1.0)
        with pytest.raises(ValueError, match="num_scales"):
            AssdParams(num_scales=0)


class TestRiesz:
    def test_unit_energy_off_dc(self):
        g = build_frequency_grid(32, 24)
        r1, r2 = build_riesz(g)
        energy = (np.abs(r1) ** 2 + np.abs(r2) ** 2).ravel()[1:]
        assert np.abs(energy - 1.0).max() <= 1e-12

    def test_dc_is_zero(self):
        r1, r2 = build_riesz(build_frequency_grid(16, 16))
        assert r1[0, 0] == 0.0 and r2[0, 0] == 0.0

    def test_pure_axis_bin(self):
        r1, r2 = build_riesz(build_frequency_grid(16, 16))
        # omega2 = 0, omega1 > 0 at bin (1, 0)
        assert r1[1, 0] == -1j
        assert r2[1, 0] == 0.0


class TestApplyFilter:
    def test_constant_through_bandpass_is_zero(self):
        g = build_frequency_grid(32, 32)
        resp = build_assd_bank(g, AssdParams())[0]
        out = apply_filter(np.full((32, 32), 0.5), resp)
        assert np.abs(out).max() <= 1e-10

    def test_impulse_through_flat_response(self):
        img = np.zeros((16, 16))
        img[3, 5] = 1.0
        out = apply_filter(img, np.ones((16, 16)))
        assert np.abs(out - img).max() <= 1e-12

    def test_cosine_eigenfunction(self):
        # an on-grid cosine is an eigenfunction of any radially real response
        n = 64
        g = build_frequency_grid(n, n)
        resp = build_assd_bank(g, AssdParams(alpha=1.0, s0=4.0, num_scales=1))[0]
        k = 3
        img = np.cos(2 * np.pi * k * np.arange(n) / n)[None, :] * np.ones((n, 1))
        out = apply_filter(img, resp)
        assert np.abs(out - resp[0, k] * img).max() <= 1e-10

    def test_bandpass_output_mean_is_zero(self, rng):
        g = build_frequency_grid(32, 32)
        resp = build_assd_bank(g, AssdParams())[1]
        out = apply_filter(rng.random((32, 32)), resp)
        assert abs(out.mean()) <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(SpectralError, match="shape"):
            apply_filter(np.zeros((16, 16)), np.ones((8, 8)))

    def test_linearity(self, rng):
        g = build_frequency_grid(24, 24)
        resp = build_assd_bank(g, AssdParams())[0]
        x, y = rng.random((24, 24)), rng.random((24, 24))
        a, b = 2.25, -0.75
        lhs = apply_filter(a * x + b * y, resp)
        rhs = a * apply_filter(x, resp) + b * apply_filter(y, resp)
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_riesz_antisymmetry(self, rng):
        # an odd kernel maps a centrally symmetric image to an antisymmetric one;
        # build the input from low-frequency cosines about the grid center so it
        # is exactly band-limited (the odd pair is nonzero on the Nyquist bins)
        n = 32
        c = (n - 1) / 2
        i = np.arange(n)[:, None] - c
        j = np.arange(n)[None, :] - c
        sym = np.zeros((n, n))
        for k in range(6):
            for m in range(6):
                sym += rng.normal() * np.cos(2 * np.pi * k * i / n) * np.cos(2 * np.pi * m * j / n)
        assert np.abs(sym - sym[::-1, ::-1]).max() <= 1e-12
        g = build_frequency_grid(n, n)
        r1, _ = build_riesz(g)
        out = apply_filter(sym, r1)
        assert np.abs(out + out[::-1, ::-1]).max() <= 1e-8


class TestMirrorPadding:
    def test_doubled_shape_and_quadrant(self, rng):
        img = rng.random((10, 14))
        padded = mirror_double(img)
        assert padded.shape == (20, 28)
        assert (crop_quadrant(padded, img.shape) == img).all()

    def test_reflection_structure(self, rng):
        img = rng.random((6, 4))
        padded = mirror_double(img)
        assert (padded[6:, :4] == img[::-1, :]).all()
        assert (padded[:6, 4:] == img[:, ::-1]).all()

    def test_periodic_extension_is_continuous(self, rng):
        # the wrap seam duplicates the first row/column: no jump under circular filtering
        img = rng.random((8, 8))
        padded = mirror_double(img)
        assert (padded[-1, :] == padded[0, :]).all()
        assert (padded[:, -1] == padded[:, 0]).all()
