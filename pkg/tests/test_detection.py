import math
from itertools import product

import numpy as np
import pytest

from noonchip.circuit import mzi_unitary
from noonchip.detection import (
    CROSS_PAIRS,
    LossSpec,
    apply_loss,
    fit_fringe,
    loss_budget,
    pattern_probs,
    splitter_tree_click_probs,
    visibility,
)
from noonchip.fock import DensityMatrix, PureState, enumerate_basis, evolve
from noonchip.sources import TWO_PHOTON_BASIS, noon_mixed, noon_pure

PHI = np.linspace(0.0, 2.0 * math.pi, 100, endpoint=False)


def fringe_p11(balance=0.5, purity=1.0, theta=math.pi / 2):
    u = mzi_unitary(theta)
    out = []
    for phi in PHI:
        rho = noon_mixed(balance, phi, purity)
        out.append(pattern_probs(evolve(rho, u))[1])
    return np.array(out)


def loss_enumeration_oracle(occ, eta_a, eta_b):
    """Distribution over surviving occupations by enumerating each photon's fate."""
    na, nb = occ
    dist = {}
    for fates_a in product([0, 1], repeat=na):
        for fates_b in product([0, 1], repeat=nb):
            p = 1.0
            for f in fates_a:
                p *= eta_a if f else (1 - eta_a)
            for f in fates_b:
                p *= eta_b if f else (1 - eta_b)
            key = (sum(fates_a), sum(fates_b))
            dist[key] = dist.get(key, 0.0) + p
    return dist


class TestApplyLoss:
    def test_unit_transmission_preserves_state(self):
        rho = noon_mixed(0.5, 0.3, 1.0)
        out = apply_loss(rho, 1.0, 1.0)
        idx = [out.basis.index(occ) for occ in TWO_PHOTON_BASIS]
        assert np.allclose(out.matrix[np.ix_(idx, idx)], rho.matrix, atol=1e-14)
        assert out.sector_weight(2) == pytest.approx(1.0, abs=1e-12)

    def test_split_pair_survival(self):
        eta = 0.3
        basis = tuple(enumerate_basis(2, 2))
        rho = DensityMatrix(basis, np.diag([0.0, 1.0, 0.0]))
        out = apply_loss(rho, eta, eta)
        assert out.probabilities()[out.basis.index((1, 1))] == pytest.approx(eta**2)

    def test_bunched_pair_binomial(self):
        eta = 0.4
        basis = tuple(enumerate_basis(2, 2))
        rho = DensityMatrix(basis, np.diag([1.0, 0.0, 0.0]))
        out = apply_loss(rho, eta, 0.9)
        oracle = loss_enumeration_oracle((2, 0), eta, 0.9)
        for occ, expected in oracle.items():
            assert out.probabilities()[out.basis.index(occ)] == pytest.approx(expected)
        assert oracle[(2, 0)] == pytest.approx(eta**2)
        assert oracle[(1, 0)] == pytest.approx(2 * eta * (1 - eta))

    def test_trace_preserved(self):
        rho = noon_mixed(0.3, 1.1, 0.7)
        out = apply_loss(rho, 0.2, 0.8)
        assert np.trace(out.matrix).real == pytest.approx(1.0, abs=1e-12)

    def test_commutes_with_mode_swap_when_symmetric(self):
        def swap(rho):
            perm = [rho.basis.index(occ[::-1]) for occ in rho.basis]
            return DensityMatrix(rho.basis, rho.matrix[np.ix_(perm, perm)])

        rho = noon_mixed(0.3, 0.5, 0.9)
        a = apply_loss(swap(rho), 0.6, 0.6)
        b = swap(apply_loss(rho, 0.6, 0.6))
        assert np.allclose(a.matrix, b.matrix, atol=1e-12)

    def test_invalid_transmission(self):
        with pytest.raises(ValueError):
            apply_loss(noon_mixed(0.5, 0, 1), 1.2, 0.5)


class TestPatternProbs:
    def test_antibunching_phase(self):
        out = evolve(noon_pure(0.5, math.pi / 2), mzi_unitary(math.pi / 2))
        assert np.allclose(pattern_probs(out), [0.0, 1.0, 0.0], atol=1e-12)

    def test_bunching_phase(self):
        out = evolve(noon_pure(0.5, 0.0), mzi_unitary(math.pi / 2))
        assert np.allclose(pattern_probs(out), [0.5, 0.0, 0.5], atol=1e-12)

    def test_maximally_mixed(self):
        rho = DensityMatrix(TWO_PHOTON_BASIS, np.eye(3) / 3.0)
        assert np.allclose(pattern_probs(rho), [1 / 3] * 3)

    def test_multi_sector_input(self):
        rho = apply_loss(noon_mixed(0.5, 0.0, 1.0), 0.5, 0.5)
        probs = pattern_probs(rho)
        assert probs.sum() == pytest.approx(rho.sector_weight(2), abs=1e-12)


class TestSplitterTree:
    def test_bunched_pattern_routing(self):
        # Enumerate the four equally likely routings of two photons in one
        # arm: both photons must take different splitter outputs for the
        # same-arm pair to fire, which happens in 2 of 4 cases.
        routings = list(product([0, 1], repeat=2))
        fraction = sum(1 for r in routings if r[0] != r[1]) / len(routings)
        assert fraction == 0.5
        clicks = splitter_tree_click_probs([1.0, 0.0, 0.0])
        assert clicks.same_arm_a == pytest.approx(fraction)
        assert clicks.same_arm_b == 0.0
        assert clicks.cross_total == 0.0

    def test_split_pattern_routing(self):
        # One photon per arm: some cross pair always fires.
        clicks = splitter_tree_click_probs([0.0, 1.0, 0.0])
        assert clicks.cross_total == pytest.approx(1.0)
        fr = clicks.pair_fractions
        for pair in CROSS_PAIRS:
            assert fr[pair] == pytest.approx(0.25)

    def test_bunched_peak_is_quarter_of_antibunched(self):
        u = mzi_unitary(math.pi / 2)
        same_a, cross = [], []
        for phi in PHI:
            clicks = splitter_tree_click_probs(pattern_probs(evolve(noon_pure(0.5, phi), u)))
            same_a.append(clicks.same_arm_a)
            cross.append(clicks.cross_total)
        assert max(same_a) == pytest.approx(max(cross) / 4.0, abs=1e-12)

    def test_invalid_input(self):
        with pytest.raises(ValueError):
            splitter_tree_click_probs([0.7, 0.7, 0.7])


class TestVisibilityFit:
    def test_full_contrast(self):
        values = np.sin(PHI) ** 2
        assert visibility(PHI, values, frequency=2.0) == pytest.approx(1.0, abs=1e-12)

    def test_constant_flags_flat(self):
        fit = fit_fringe(PHI, np.full_like(PHI, 0.25), frequency=2.0)
        assert fit.visibility == 0.0
        assert fit.flat

    def test_half_contrast(self):
        values = (1.0 + 0.5 * np.cos(2 * PHI)) / 2.0
        assert visibility(PHI, values, frequency=2.0) == pytest.approx(0.5, abs=1e-12)

    def test_requires_enough_samples(self):
        with pytest.raises(ValueError):
            visibility([0, 1, 2], [0, 1, 0], frequency=2.0)

    def test_requires_full_period(self):
        phi = np.linspace(0, 1.0, 20)
        with pytest.raises(ValueError):
            visibility(phi, np.sin(phi) ** 2, frequency=2.0)


class TestFringeLaws:
    def test_period_is_half_turn(self):
        p11 = fringe_p11()
        n = len(PHI)
        spectrum = np.abs(np.fft.rfft(p11))
        assert int(np.argmax(spectrum[1:])) + 1 == 2
        assert p11.max() == pytest.approx(1.0, abs=1e-12)
        assert p11.min() == pytest.approx(0.0, abs=1e-12)

    def test_pattern_complement(self):
        u = mzi_unitary(math.pi / 2)
        for phi in PHI[::7]:
            probs = pattern_probs(evolve(noon_pure(0.5, phi), u))
            assert probs[0] + probs[2] == pytest.approx(1.0 - probs[1], abs=1e-12)

    @pytest.mark.parametrize("theta", [0.0, math.pi])
    def test_bunched_rows(self, theta):
        p11 = fringe_p11(theta=theta)
        assert p11.max() <= 1e-12

    def test_imbalance_law(self):
        for b in np.arange(0.0, 0.51, 0.05):
            p11 = fringe_p11(balance=b)
            fit = fit_fringe(PHI, p11, frequency=2.0)
            assert fit.visibility == pytest.approx(2 * math.sqrt(b * (1 - b)), abs=1e-9)

    def test_imbalance_law_against_tensor_oracle(self):
        # Independent evolution through the explicit two-photon tensor map.
        from test_fock import two_photon_lift_oracle

        u = mzi_unitary(math.pi / 2).matrix
        lifted = two_photon_lift_oracle(u)
        b = 0.2
        amps0 = np.array([math.sqrt(b), 0.0, math.sqrt(1 - b)], dtype=complex)
        p11 = []
        for phi in PHI:
            amps = amps0 * np.array([1.0, 0.0, np.exp(2j * phi)])
            p11.append(abs((lifted @ amps)[1]) ** 2)
        fit = fit_fringe(PHI, np.array(p11), frequency=2.0)
        assert fit.visibility == pytest.approx(2 * math.sqrt(b * (1 - b)), abs=1e-9)

    def test_purity_law(self):
        for p in np.arange(0.0, 1.01, 0.1):
            fit = fit_fringe(PHI, fringe_p11(purity=p), frequency=2.0)
            assert fit.visibility == pytest.approx(p, abs=1e-9)


class TestLossBudget:
    def test_reference_inputs(self):
        brightness = loss_budget(5800.0, 13.0, 0.01)
        assert brightness == pytest.approx(5800.0 * 10.0**2.6 / 0.01)
        assert 2.2e8 <= brightness <= 2.4e8

    def test_no_loss(self):
        assert loss_budget(1234.0, 0.0, 1.0) == pytest.approx(1234.0)

    def test_pump_scaling(self):
        assert loss_budget(100.0, 3.0, 0.005) == pytest.approx(2 * loss_budget(100.0, 3.0, 0.01))

    def test_zero_pump_rejected(self):
        with pytest.raises(ValueError):
            loss_budget(100.0, 3.0, 0.0)

    def test_loss_spec_totals(self):
        spec = LossSpec()
        assert spec.total_a_db == pytest.approx(13.0)
        assert spec.eta_a == pytest.approx(10 ** (-1.3))
        with pytest.raises(ValueError):
            LossSpec(breakdown_a_db={"grating_coupler": -1.0})
