import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bellqi.noise import NoiseModel, parse_noise

MODELS = [
    NoiseModel.vacuum(),
    NoiseModel.thermal(0.2),
    NoiseModel.thermal(2.0),
    NoiseModel.poisson(1.0),
    NoiseModel.finite([0.2, 0.5, 0.3]),
]


class TestPmf:
    def test_thermal_values(self):
        assert NoiseModel.thermal(1).pmf(0) == pytest.approx(0.5)
        assert NoiseModel.thermal(0.5).pmf(2) == pytest.approx(0.25 / 3.375)

    def test_vacuum(self):
        assert NoiseModel.vacuum().pmf(0) == 1.0
        assert NoiseModel.vacuum().pmf(3) == 0.0

    def test_poisson(self):
        assert NoiseModel.poisson(2.0).pmf(3) == pytest.approx(math.exp(-2) * 8 / 6)

    def test_finite_outside_support(self):
        model = NoiseModel.finite([0.5, 0.5])
        assert model.pmf(2) == 0.0
        assert model.pmf(-1) == 0.0

    @pytest.mark.parametrize("model", MODELS, ids=lambda m: m.spec)
    def test_sums_to_one(self, model):
        n = np.arange(200)
        assert math.fsum(model.pmf(n)) == pytest.approx(1.0, abs=1e-12)

    def test_joint_is_product(self):
        model = NoiseModel.thermal(1)
        assert model.joint_pmf((0, 0)) == pytest.approx(0.25)
        assert model.joint_pmf((1, 0)) == pytest.approx(0.125)
        assert NoiseModel.vacuum().joint_pmf((0, 0, 0)) == 1.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 6), min_size=1, max_size=6), st.randoms(use_true_random=False))
    def test_joint_permutation_invariant(self, occ, rnd):
        shuffled = list(occ)
        rnd.shuffle(shuffled)
        for model in MODELS:
            assert model.joint_pmf(occ) == pytest.approx(model.joint_pmf(shuffled), rel=1e-12)


class TestMean:
    def test_values(self):
        assert NoiseModel.thermal(2).mean == 2
        assert NoiseModel.vacuum().mean == 0
        assert NoiseModel.finite([0.5, 0.5]).mean == 0.5


class TestValidation:
    @pytest.mark.parametrize("bad", [
        lambda: NoiseModel.thermal(-1),
        lambda: NoiseModel.poisson(float("inf")),
        lambda: NoiseModel.finite([0.5, 0.4]),
        lambda: NoiseModel.finite([]),
        lambda: NoiseModel("gaussian"),
    ])
    def test_rejected(self, bad):
        with pytest.raises(ValueError):
            bad()


class TestParse:
    @pytest.mark.parametrize("spec,expected", [
        ("vacuum", NoiseModel.vacuum()),
        ("thermal:0.5", NoiseModel.thermal(0.5)),
        ("poisson:1", NoiseModel.poisson(1.0)),
        ("pmf:0.25,0.75", NoiseModel.finite([0.25, 0.75])),
    ])
    def test_round_trip(self, spec, expected):
        model = parse_noise(spec)
        assert model == expected
        assert parse_noise(model.spec) == model

    @pytest.mark.parametrize("spec", ["thermal", "thermal:x", "gauss:1", "pmf:0.5", "vacuum:1", ""])
    def test_bad_specs(self, spec):
        with pytest.raises(ValueError):
            parse_noise(spec)


class TestTruncation:
    def test_vacuum_is_zero(self):
        for tol in (1e-3, 1e-12):
            assert NoiseModel.vacuum().truncation_cutoff(5, tol) == 0

    def test_bounded_support(self):
        model = NoiseModel.finite([0.2, 0.5, 0.3])
        assert model.truncation_cutoff(2, 1e-9) <= 4
        assert model.truncation_cutoff(2, 1e-9) == 4

    def test_thermal_against_brute_force_tail(self):
        model = NoiseModel.thermal(0.5)
        tol = 1e-6
        p = model.pmf(np.arange(80))
        # P(n1 + n2 > k) by explicit double sum
        joint = np.outer(p, p)
        totals = np.add.outer(np.arange(80), np.arange(80))

        def tail(k):
            return joint[totals > k].sum()

        expected = next(k for k in range(80) if tail(k) < tol)
        assert model.truncation_cutoff(2, tol) == expected
        assert model.total_sf(2, expected) == pytest.approx(tail(expected), rel=1e-6)

    @pytest.mark.parametrize("model", MODELS, ids=lambda m: m.spec)
    @pytest.mark.parametrize("tol", [1e-2, 1e-6, 1e-10])
    def test_single_mode_coverage(self, model, tol):
        k = model.truncation_cutoff(1, tol)
        assert math.fsum(model.pmf(np.arange(k + 1))) >= 1 - tol

    @pytest.mark.parametrize("model", MODELS[1:], ids=lambda m: m.spec)
    def test_total_pmf_matches_convolution(self, model):
        p = model.pmf(np.arange(40))
        conv = np.convolve(np.convolve(p, p), p)[:15]
        assert np.allclose(model.total_pmf(3, 14), conv, atol=1e-12)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(ValueError):
            NoiseModel.thermal(1).truncation_cutoff(2, 0.0)


class TestSampling:
    def test_vacuum_sparse_is_empty(self, rng):
        assert NoiseModel.vacuum().sample_occupation_sparse(1000, rng) == []

    def test_deterministic_single_photon(self, rng):
        assert NoiseModel.finite([0.0, 1.0]).sample_occupation_sparse(3, rng) == [(0, 1), (1, 1), (2, 1)]

    @pytest.mark.parametrize("mean", [0.3, 1.0, 4.0])
    def test_sparse_thermal_mean(self, mean, rng):
        m = 100_000
        occ = NoiseModel.thermal(mean).sample_occupation_sparse(m, rng)
        total = sum(c for _, c in occ)
        se = math.sqrt(mean * (1 + mean) / m)
        assert abs(total / m - mean) < 3 * se
        assert len({i for i, _ in occ}) == len(occ)
        assert all(c >= 1 for _, c in occ)

    @pytest.mark.parametrize("model", [NoiseModel.thermal(0.2), NoiseModel.thermal(2.0), NoiseModel.poisson(1.0)],
                             ids=lambda m: m.spec)
    def test_sparse_chi_square(self, model, rng):
        m = 100_000
        counts = np.zeros(m, dtype=int)
        for i, c in model.sample_occupation_sparse(m, rng):
            counts[i] = c
        kmax = model.truncation_cutoff(1, 1e-4)
        observed = np.bincount(np.minimum(counts, kmax), minlength=kmax + 1)
        expected = model.pmf(np.arange(kmax + 1)) * m
        expected[-1] = (1 - math.fsum(model.pmf(np.arange(kmax)))) * m
        # merge sparse bins so every expected count is at least 5
        obs_b, exp_b, acc_o, acc_e = [], [], 0, 0.0
        for o, e in zip(observed, expected):
            acc_o, acc_e = acc_o + o, acc_e + e
            if acc_e >= 5:
                obs_b.append(acc_o)
                exp_b.append(acc_e)
                acc_o, acc_e = 0, 0.0
        obs_b[-1] += acc_o
        exp_b[-1] += acc_e
        assert stats.chisquare(obs_b, exp_b).pvalue > 1e-3

    @pytest.mark.parametrize("model", MODELS[1:], ids=lambda m: m.spec)
    def test_sample_total_moments(self, model, rng):
        m, n = 37, 200_000
        totals = model.sample_total(m, n, rng)
        se = math.sqrt(m * model.variance / n)
        assert abs(totals.mean() - m * model.mean) < 4 * se

    @pytest.mark.parametrize("model", MODELS[1:], ids=lambda m: m.spec)
    def test_sample_positive_support(self, model, rng):
        draws = model.sample_positive(50_000, rng)
        assert draws.min() >= 1
        p = model.pmf(np.arange(1, 60))
        cond_mean = math.fsum(np.arange(1, 60) * p) / math.fsum(p)
        assert draws.mean() == pytest.approx(cond_mean, rel=0.03)

    def test_sample_matches_per_mode_mean(self, rng):
        for model in MODELS:
            x = model.sample(200_000, rng)
            se = math.sqrt(model.variance / x.size) if model.variance else 0
            assert abs(x.mean() - model.mean) <= 4 * se + 1e-15


def test_finite_total_pmf_enumeration():
    model = NoiseModel.finite([0.2, 0.5, 0.3])
    expected = np.zeros(7)
    for occ in itertools.product(range(3), repeat=3):
        expected[sum(occ)] += model.joint_pmf(occ)
    assert np.allclose(model.total_pmf(3, 6), expected)
