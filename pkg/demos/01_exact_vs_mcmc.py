"""Exact enumeration vs Metropolis-Hastings on a small instance.

With p = 10 the model space has only 1024 members, so the posterior can be
enumerated exactly and the chain checked against it. Runs in a few seconds.
"""

import numpy as np

from ebsparse.linalg import DesignMatrix
from ebsparse.oracle import enumerate_posterior
from ebsparse.posterior import Hyperparams
from ebsparse.priors import ComplexityPrior
from ebsparse.sampler import ChainConfig, median_probability_model, run_chain


def main():
    rng = np.random.default_rng(7)
    n, p = 40, 10
    X = DesignMatrix.from_array(rng.standard_normal((n, p)))
    beta = np.zeros(p)
    beta[:2] = (1.4, -2.2)
    y = X.values @ beta + rng.standard_normal(n)

    prior, hyper = ComplexityPrior(), Hyperparams()
    exact = enumerate_posterior(X, y, prior, hyper)
    chain = run_chain(X, y, prior, hyper, ChainConfig(iterations=50000, seed=1))

    ranked = sorted(exact.table.items(), key=lambda kv: -kv[1])
    total = sum(chain.visit_counts.values())
    print(f"top models over {len(exact.table)} candidates (exact vs chain frequency):")
    for model, prob in ranked[:5]:
        freq = chain.visit_counts.get(model, 0) / total
        print(f"  {str(model):14s} exact={prob:.4f} chain={freq:.4f}")

    gap = np.abs(chain.inclusion - exact.inclusion).max()
    print(f"max inclusion-probability gap: {gap:.4f}")
    print(f"median probability model: {median_probability_model(chain.inclusion)}")
    print(f"acceptance rate: {chain.acceptance_rate:.3f}")


if __name__ == "__main__":
    main()
