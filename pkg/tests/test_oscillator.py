"""System types and derived matrices: incidence, B factor, amplitude/phase."""

import numpy as np
import pytest

from oscsim import (
    ForcingSpec,
    NonlinearOscillatorSystem,
    OscillatorSystem,
    TimeDependentStiffnessSpec,
    amplitude_phase_from_ic,
    build_b_factor,
    build_incidence,
)
from oscsim.errors import NegativeEntry, NonSymmetric, ZeroFrequency
from oscsim.oscillator import graph_from_incidence

from conftest import random_pd_system


class TestBuildIncidence:
    def test_two_mass_example(self):
        k = build_incidence([[1.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(k, [[2.0, -1.0], [-1.0, 1.0]])

    def test_zero_graph(self):
        np.testing.assert_array_equal(build_incidence(np.zeros((3, 3))), np.zeros((3, 3)))

    def test_random_graph_psd(self, rng):
        g = np.abs(rng.standard_normal((4, 4)))
        g = 0.5 * (g + g.T)
        k = build_incidence(g)
        np.testing.assert_allclose(k, k.T)
        w = np.linalg.eigvalsh(k)
        assert w[0] >= -1e-10 * max(abs(w[-1]), 1.0)
        # row sums reduce to the wall springs
        np.testing.assert_allclose(k.sum(axis=1), np.diag(g), atol=1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(NonSymmetric):
            build_incidence([[1.0, 0.5], [0.2, 1.0]])

    def test_rejects_negative(self):
        with pytest.raises(NegativeEntry):
            build_incidence([[1.0, -0.5], [-0.5, 1.0]])

    def test_graph_round_trip(self, rng):
        g = np.abs(rng.standard_normal((5, 5)))
        g = 0.5 * (g + g.T)
        np.testing.assert_allclose(graph_from_incidence(build_incidence(g)), g, atol=1e-12)


class TestBFactor:
    def test_scalar(self):
        syst = OscillatorSystem([2.0], [[4.0]], [0.0], [0.0])
        b = build_b_factor(syst)
        np.testing.assert_allclose(b, [[np.sqrt(2.0)]])
        np.testing.assert_allclose(b @ b.T, [[2.0]])

    def test_unit_masses_two_springs(self):
        syst = OscillatorSystem([1.0, 1.0], [[1.0, 1.0], [1.0, 0.0]], [0.0, 0.0], [0.0, 0.0])
        b = build_b_factor(syst)
        # columns ordered (0,0), (0,1), (1,1)
        np.testing.assert_allclose(b[:, 0], [1.0, 0.0])
        np.testing.assert_allclose(b[:, 1], [1.0, -1.0])
        np.testing.assert_allclose(b[:, 2], [0.0, 0.0])
        np.testing.assert_allclose(b @ b.T, [[2.0, -1.0], [-1.0, 1.0]], atol=1e-14)

    def test_heavy_mass_pair_column(self):
        syst = OscillatorSystem([1.0, 4.0], [[0.0, 1.0], [1.0, 0.0]], [0.0, 0.0], [0.0, 0.0])
        b = build_b_factor(syst)
        np.testing.assert_allclose(b[:, 1], [1.0, -0.5])
        np.testing.assert_allclose(
            b @ b.T, [[1.0, -0.5], [-0.5, 0.25]], atol=1e-14
        )
        np.testing.assert_allclose(b @ b.T, syst.normal_form(), atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_reconstructs_normal_form(self, n, rng):
        syst = random_pd_system(n, rng)
        b = build_b_factor(syst)
        a = syst.normal_form()
        err = np.linalg.norm(b @ b.T - a) / np.linalg.norm(a)
        assert err <= 1e-10


class TestAmplitudePhase:
    def test_cosine_at_origin(self):
        a, phi = amplitude_phase_from_ic(1.0, 0.0, 3.0)
        assert a == pytest.approx(1.0) and phi == pytest.approx(0.0)

    def test_pure_sine(self):
        a, phi = amplitude_phase_from_ic(0.0, 1.0, 1.0)
        assert a == pytest.approx(1.0)
        assert phi == pytest.approx(-np.pi / 2)

    def test_quadrant(self):
        a, phi = amplitude_phase_from_ic(0.3, -0.4, 2.0)
        assert a == pytest.approx(np.sqrt(0.09 + 0.04))
        assert a * np.cos(phi) == pytest.approx(0.3, abs=1e-12)
        assert -a * 2.0 * np.sin(phi) == pytest.approx(-0.4, abs=1e-12)

    def test_rejects_zero_frequency(self):
        with pytest.raises(ZeroFrequency):
            amplitude_phase_from_ic(1.0, 1.0, 0.0)

    def test_round_trip_many(self, rng):
        for _ in range(1000):
            x0, v0 = rng.standard_normal(2)
            w = rng.uniform(0.1, 10.0)
            a, phi = amplitude_phase_from_ic(x0, v0, w)
            assert a * np.cos(phi) == pytest.approx(x0, abs=1e-12 * max(1, abs(x0)))
            assert -a * w * np.sin(phi) == pytest.approx(v0, abs=1e-11 * max(1, abs(v0)))


class TestTypes:
    def test_rejects_nonpositive_mass(self):
        with pytest.raises(NegativeEntry):
            OscillatorSystem([0.0], [[1.0]], [0.0], [0.0])

    def test_forcing_requires_positive_frequencies(self):
        with pytest.raises(ZeroFrequency):
            ForcingSpec([[1.0]], [[0.0]], [[0.0]])

    def test_forcing_evaluation(self):
        f = ForcingSpec([[0.1, 0.2]], [[2.0, 3.0]], [[0.0, np.pi / 2]])
        t = 0.7
        want = 0.1 * np.cos(2 * t) + 0.2 * np.cos(3 * t + np.pi / 2)
        assert f.force_at(t)[0] == pytest.approx(want)
        assert f.max_force_bound()[0] == pytest.approx(0.3)

    def test_nonlinear_energy_floor(self):
        with pytest.raises(NegativeEntry):
            NonlinearOscillatorSystem([1.0], [[1.0]], [[0.0]], [1.0], [0.0], energy=0.1)

    def test_td_spec_psd_check(self):
        # wall spring 1 + cos t dips to zero but stays PSD
        spec = TimeDependentStiffnessSpec(
            [[1.0]], np.full((1, 1, 1), 1.0), np.full((1, 1, 1), 1.0), np.zeros((1, 1, 1))
        )
        spec.check_psd_on_horizon(10.0)
        bad = TimeDependentStiffnessSpec(
            [[1.0]], np.full((1, 1, 1), 1.5), np.full((1, 1, 1), 1.0), np.zeros((1, 1, 1))
        )
        with pytest.raises(NegativeEntry):
            bad.check_psd_on_horizon(10.0)

    def test_td_spec_rejects_offdiagonal_constant(self):
        with pytest.raises(NonSymmetric):
            TimeDependentStiffnessSpec(
                [[1.0, 0.5], [0.5, 1.0]],
                np.zeros((2, 2, 1)),
                np.ones((2, 2, 1)),
                np.zeros((2, 2, 1)),
            )
