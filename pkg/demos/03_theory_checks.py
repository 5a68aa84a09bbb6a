"""Walk through the theory-diagnostic toolkit on synthetic instances.

Covers the closed-form rate constants, the detection cutoff, the
normalizing-constant lower bound, the nested chi-square calibration
check, and the sparse singular value of a design.
"""

import numpy as np
from scipy import stats

from ebsparse.linalg import DesignMatrix
from ebsparse.oracle import (
    RateConstants,
    beta_min_cutoff,
    denominator_bound_check,
    min_sparse_singular_value,
    nested_chisq_stat,
)
from ebsparse.posterior import Hyperparams
from ebsparse.priors import ComplexityPrior


def main():
    hyper = Hyperparams()
    constants = RateConstants.from_hyperparams(hyper)
    print("rate constants at default hyperparameters:")
    print(f"  split exponent    {constants.split_exponent:.6f}")
    print(f"  decay rate        {constants.decay_rate:.8f}")
    print(f"  prior inflation   {constants.prior_inflation:.7f}")
    print(f"  occam cost        {constants.occam_cost:.7f}")

    rng = np.random.default_rng(31)
    X = DesignMatrix.from_array(rng.standard_normal((30, 8)))
    kappa = min_sparse_singular_value(X, 3)
    print(f"smallest 3-sparse singular value of a 30x8 design: {kappa:.3f}")
    cutoff = beta_min_cutoff(hyper, kappa, n_vars=8, margin=1.1)
    print(f"implied detection cutoff for coefficients: {cutoff:.3f}")

    held = 0
    for _ in range(200):
        beta = np.zeros(8)
        beta[:2] = rng.normal(0, 2, size=2)
        y = X.values @ beta + rng.standard_normal(30)
        held += denominator_bound_check(X, y, beta, ComplexityPrior(), hyper).holds
    print(f"normalizing-constant lower bound held in {held}/200 instances")

    beta = np.zeros(8)
    beta[:2] = (1.5, -2.0)
    values = [
        nested_chisq_stat(X, X.values @ beta + rng.standard_normal(30), (0, 1), (0, 1, 2, 3), 1.0)
        for _ in range(500)
    ]
    ks = stats.kstest(values, stats.chi2(df=2).cdf).statistic
    print(f"nested-model statistic vs chi-square(2): KS = {ks:.4f} over 500 draws")


if __name__ == "__main__":
    main()
