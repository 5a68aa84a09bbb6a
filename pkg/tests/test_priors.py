import itertools

import numpy as np
import pytest
from scipy.stats import binom

from ebsparse.priors import (
    BetaBinomialPrior,
    BinomialPrior,
    ComplexityPrior,
    MixturePrior,
    log_model_prior,
    log_size_mass,
)

ALL_BASE = [ComplexityPrior(), ComplexityPrior(a=0.3, c=2.0), BetaBinomialPrior(), BinomialPrior()]


def size_masses(prior, n_vars, max_size):
    return np.array([log_size_mass(prior, s, n_vars, max_size) for s in range(max_size + 1)])


class TestSizeMass:
    def test_all_variants_sum_to_one(self):
        priors = ALL_BASE + [MixturePrior(base=ComplexityPrior(), rate=0.5, anchor=(0,))]
        for prior in priors:
            for n_vars, max_size in [(10, 10), (500, 100), (12, 5), (7, 1)]:
                total = np.exp(size_masses(prior, n_vars, max_size)).sum()
                assert total == pytest.approx(1.0, abs=1e-12), (prior, n_vars, max_size)

    def test_complexity_constant_ratio(self):
        t = size_masses(ComplexityPrior(a=0.05, c=1.0), 500, 60)
        ratios = np.exp(np.diff(t))
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)
        assert ratios[0] == pytest.approx(0.732912, abs=1e-5)

    def test_complexity_c_shifts_ratio(self):
        t = size_masses(ComplexityPrior(a=0.1, c=4.0), 100, 20)
        assert np.exp(t[1] - t[0]) == pytest.approx(1.0 / (4.0 * 100**0.1), rel=1e-12)

    def test_betabinomial_hand_case(self):
        # max_size 2, shape 1: masses are exactly (1/2, 1/3, 1/6).
        t = size_masses(BetaBinomialPrior(shape=1.0), 6, 2)
        np.testing.assert_allclose(np.exp(t), [0.5, 1 / 3, 1 / 6], rtol=1e-12)

    def test_binomial_matches_scipy(self):
        for max_size in [2, 4, 9]:
            t = size_masses(BinomialPrior(), 50, max_size)
            ref = binom.pmf(np.arange(max_size + 1), max_size, 1.0 / max_size)
            np.testing.assert_allclose(np.exp(t), ref, rtol=1e-10)

    def test_binomial_degenerate_rank_one(self):
        t = size_masses(BinomialPrior(), 30, 1)
        assert t[0] == -np.inf
        assert t[1] == pytest.approx(0.0, abs=1e-15)

    def test_off_support_is_neg_inf(self):
        for prior in ALL_BASE:
            assert log_size_mass(prior, 6, 20, 5) == -np.inf
            assert log_size_mass(prior, -1, 20, 5) == -np.inf

    def test_rank_zero_design(self):
        assert log_size_mass(ComplexityPrior(), 0, 5, 0) == 0.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            log_size_mass(ComplexityPrior(), 0, 5, 9)
        with pytest.raises(ValueError):
            ComplexityPrior(c=0.0)
        with pytest.raises(ValueError):
            BetaBinomialPrior(shape=-1.0)
        with pytest.raises(ValueError):
            MixturePrior(base=ComplexityPrior(), rate=0.0, anchor=())


class TestModelPrior:
    def test_exhaustive_sum_to_one_small(self):
        n_vars, max_size = 8, 4
        priors = ALL_BASE + [MixturePrior(base=BetaBinomialPrior(), rate=0.3, anchor=(1, 5))]
        for prior in priors:
            total = 0.0
            for s in range(max_size + 1):
                for model in itertools.combinations(range(n_vars), s):
                    total += np.exp(log_model_prior(prior, model, n_vars, max_size))
            assert total == pytest.approx(1.0, abs=1e-12), prior

    def test_exchangeable_within_size(self):
        prior = ComplexityPrior()
        a = log_model_prior(prior, (0, 1, 2), 40, 10)
        b = log_model_prior(prior, (37, 5, 19), 40, 10)
        assert a == pytest.approx(b, rel=1e-14)

    def test_order_irrelevant(self):
        prior = MixturePrior(base=ComplexityPrior(), rate=1.0, anchor=(2, 7))
        assert log_model_prior(prior, (7, 2), 20, 6) == log_model_prior(prior, (2, 7), 20, 6)

    def test_oversized_model_neg_inf(self):
        assert log_model_prior(ComplexityPrior(), tuple(range(6)), 30, 5) == -np.inf

    def test_mixture_boosts_anchor_only(self):
        base = ComplexityPrior()
        n_vars, max_size = 15, 6
        anchor = (0, 4, 9)
        prior = MixturePrior(base=base, rate=0.2, anchor=anchor)
        w = np.exp(-0.2 * max_size)
        lp_base_anchor = log_model_prior(base, anchor, n_vars, max_size)
        expect = np.logaddexp(np.log1p(-w) + lp_base_anchor, np.log(w))
        assert log_model_prior(prior, anchor, n_vars, max_size) == pytest.approx(expect, rel=1e-14)
        other = (0, 4, 10)
        lp_other = log_model_prior(base, other, n_vars, max_size)
        assert log_model_prior(prior, other, n_vars, max_size) == pytest.approx(
            np.log1p(-w) + lp_other, rel=1e-14
        )

    def test_nested_mixture_rejected(self):
        inner = MixturePrior(base=ComplexityPrior(), rate=1.0, anchor=())
        with pytest.raises(ValueError):
            MixturePrior(base=inner, rate=1.0, anchor=())
