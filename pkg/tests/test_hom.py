import math

import numpy as np
import pytest
from scipy.integrate import simpson

from noonchip.circuit import coupler_unitary
from noonchip.detection import pattern_probs
from noonchip.fock import evolve
from noonchip.hom import HomScanSpec, bandwidth_from_dip, dip_fwhm, hom_coincidence
from noonchip.sources import SpectrumSpec, noon_mixed, spectral_overlap

GAUSS_50NM = SpectrumSpec(center_nm=1562.0, fwhm_nm=50.0, shape="gaussian")


def gaussian_dip_fwhm_oracle(spectrum):
    # Closed form for a Gaussian intensity spectrum with the doubled
    # anti-correlation kernel: envelope exp(-w^2 tau^2 / (4 ln 2)) has its
    # half point at tau = 2 ln 2 / w.
    return 4.0 * math.log(2.0) / spectrum.fwhm_angular_freq


def quadrature_envelope_oracle(tau_fs, spectrum, n=200001, span_fwhm=8.0):
    w = spectrum.fwhm_angular_freq
    grid = np.linspace(-span_fwhm * w, span_fwhm * w, n)
    intensity = spectrum.intensity(grid)
    return simpson(intensity * np.cos(2 * grid * tau_fs), x=grid) / simpson(intensity, x=grid)


class TestHomCoincidence:
    def test_floor_at_partial_visibility(self):
        spec = HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=0.832)
        assert hom_coincidence(0.0, spec) == pytest.approx(0.084, abs=1e-6)

    def test_distinguishable_limit(self):
        spec = HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=1.0)
        assert hom_coincidence(5000.0, spec) == pytest.approx(0.5, abs=1e-6)

    def test_perfect_dip(self):
        spec = HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=1.0)
        assert hom_coincidence(0.0, spec) == pytest.approx(0.0, abs=1e-9)

    def test_even_in_delay(self):
        spec = HomScanSpec(spectrum=GAUSS_50NM)
        taus = np.array([3.0, 17.0, 55.0, 120.0])
        assert np.allclose(hom_coincidence(taus, spec), hom_coincidence(-taus, spec), atol=1e-8)

    def test_gaussian_never_overshoots(self):
        spec = HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=0.9)
        taus = np.linspace(-400, 400, 401)
        p = hom_coincidence(taus, spec)
        assert p.max() <= 0.5 + 1e-9
        assert p.min() >= (1 - 0.9) / 2 - 1e-9

    def test_sinc2_bounded_with_small_overshoot_allowance(self):
        spec = HomScanSpec(spectrum=SpectrumSpec(1562.0, 50.0, "sinc2"), baseline_visibility=1.0)
        taus = np.linspace(-400, 400, 401)
        p = hom_coincidence(taus, spec)
        assert p.max() <= 0.5 + 0.05
        assert p.min() >= -1e-9

    def test_matches_independent_quadrature(self):
        spec = HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=0.7)
        for tau in (0.0, 25.0, 60.0, 110.0):
            oracle = 0.5 * (1 - 0.7 * quadrature_envelope_oracle(tau, GAUSS_50NM))
            assert hom_coincidence(tau, spec) == pytest.approx(oracle, abs=1e-8)


class TestDipWidth:
    def test_gaussian_width_matches_closed_form(self):
        spec = HomScanSpec(spectrum=GAUSS_50NM)
        assert dip_fwhm(spec) == pytest.approx(gaussian_dip_fwhm_oracle(GAUSS_50NM), rel=1e-7)

    def test_reference_bandwidth_gives_reference_width(self):
        width = dip_fwhm(HomScanSpec(spectrum=GAUSS_50NM))
        assert abs(width - 71.9) / 71.9 < 0.2

    def test_doubling_bandwidth_halves_width(self):
        w1 = dip_fwhm(HomScanSpec(spectrum=SpectrumSpec(1562.0, 25.0)))
        w2 = dip_fwhm(HomScanSpec(spectrum=SpectrumSpec(1562.0, 50.0)))
        assert w1 == pytest.approx(2 * w2, rel=1e-6)

    def test_width_independent_of_baseline_visibility(self):
        w1 = dip_fwhm(HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=1.0))
        w2 = dip_fwhm(HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=0.4))
        assert w1 == pytest.approx(w2, rel=1e-12)

    def test_no_dip_signaled(self):
        with pytest.raises(ValueError):
            dip_fwhm(HomScanSpec(spectrum=GAUSS_50NM, baseline_visibility=0.0))

    def test_sinc2_width_positive(self):
        w = dip_fwhm(HomScanSpec(spectrum=SpectrumSpec(1562.0, 50.0, "sinc2")))
        assert w > 0


class TestBandwidthInversion:
    @pytest.mark.parametrize("shape", ["gaussian", "sinc2"])
    def test_round_trip(self, shape):
        s = SpectrumSpec(1562.0, 50.0, shape)
        width = dip_fwhm(HomScanSpec(spectrum=s))
        recovered = bandwidth_from_dip(width, shape=shape, center_nm=1562.0)
        assert recovered == pytest.approx(50.0, rel=1e-3)

    def test_reference_width_gives_reference_bandwidth(self):
        bw = bandwidth_from_dip(71.9, shape="gaussian", center_nm=1562.0)
        assert abs(bw - 50.0) / 50.0 < 0.2

    def test_monotone(self):
        widths = [50.0, 80.0, 120.0, 200.0]
        bands = [bandwidth_from_dip(w) for w in widths]
        assert all(b2 < b1 for b1, b2 in zip(bands, bands[1:]))

    def test_invalid_width(self):
        with pytest.raises(ValueError):
            bandwidth_from_dip(0.0)


class TestFockConsistency:
    def test_zero_delay_matches_two_photon_model(self):
        # Zero-delay coincidence with V0 from the spectral overlap equals
        # the cross-port probability of the partially coherent two-photon
        # state through a single 50:50 coupler.
        s1 = SpectrumSpec(1562.0, 50.0)
        s2 = SpectrumSpec(1570.0, 50.0)
        p = spectral_overlap(s1, s2)
        spec = HomScanSpec(spectrum=s1, baseline_visibility=p)
        rho = noon_mixed(0.5, math.pi / 2, p)
        fock_side = pattern_probs(evolve(rho, coupler_unitary()))[1]
        assert hom_coincidence(0.0, spec) == pytest.approx(fock_side, abs=1e-9)
