"""End-to-end variable selection on a moderately high-dimensional draw.

Mirrors the intended workflow on real data: estimate the noise variance
from a cross-validated lasso fit, start the chain at the lasso support,
and read off the median probability model plus coefficient summaries.
"""

import numpy as np

from ebsparse.lasso import cv_fit, model_from_fit, sigma2_from_fit
from ebsparse.oracle import sample_posterior_betas
from ebsparse.posterior import Hyperparams
from ebsparse.priors import ComplexityPrior
from ebsparse.sampler import ChainConfig, median_probability_model, run_chain
from ebsparse.simharness import generate_design


def main():
    rng = np.random.default_rng(23)
    n, p = 100, 200
    X = generate_design(n, p, 0.25, rng)
    beta = np.zeros(p)
    true_model = (0, 1, 2, 3)
    beta[list(true_model)] = (0.8, 1.6, 2.4, 3.2)
    y = X.values @ beta + rng.standard_normal(n)

    fit = cv_fit(X, y)
    sigma2 = sigma2_from_fit(fit, n)
    init = model_from_fit(fit, X, y, max_size=min(n, p))
    print(f"lasso: {fit.active_size} active columns, sigma2 estimate {sigma2:.3f}")

    hyper = Hyperparams(noise=sigma2)
    chain = run_chain(
        X, y, ComplexityPrior(), hyper,
        ChainConfig(iterations=20000, seed=3, init=init, max_size=min(n, p)),
    )
    selected = median_probability_model(chain.inclusion)
    print(f"true model:     {true_model}")
    print(f"selected model: {selected}")
    print("inclusion probabilities of true variables:",
          np.round(chain.inclusion[list(true_model)], 3))

    draws = sample_posterior_betas(X, y, chain, hyper, np.random.default_rng(4))
    means = draws.mean(axis=0)
    print("posterior mean coefficients on the true support:",
          np.round(means[list(true_model)], 3))


if __name__ == "__main__":
    main()
