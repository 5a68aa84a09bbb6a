"""Priors over models (subsets of columns), factored through the subset size.

Every prior here puts mass on sizes 0..max_size and spreads the mass for a
given size uniformly over the C(n_vars, size) subsets of that size, except
for the mixture variant which adds a point mass at one chosen model. Size
masses are always renormalized to sum to one over the supported range.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import betaln, gammaln, logsumexp, xlogy


def log_binom(n: int, k) -> np.ndarray:
    """log of the binomial coefficient via log-gamma, elementwise in k."""
    k = np.asarray(k, dtype=np.float64)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


@dataclass(frozen=True)
class ComplexityPrior:
    """Size mass proportional to (c * n_vars**a)**(-size).

    Larger ``a`` or ``c`` penalizes model size more aggressively; successive
    size masses have the constant ratio 1 / (c * n_vars**a).
    """

    a: float = 0.05
    c: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.a < 0:
            raise ValueError("a must be nonnegative")


@dataclass(frozen=True)
class BetaBinomialPrior:
    """Binomial size mass with a Beta(shape * max_size, 1) mixing weight."""

    shape: float = 1.0

    def __post_init__(self):
        if self.shape <= 0:
            raise ValueError("shape must be positive")


@dataclass(frozen=True)
class BinomialPrior:
    """Binomial(max_size, 1/max_size) size mass, one active variable on average."""


@dataclass(frozen=True)
class MixturePrior:
    """Base prior plus a point mass exp(-rate * max_size) at ``anchor``."""

    base: "ModelPrior"
    rate: float
    anchor: tuple

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if isinstance(self.base, MixturePrior):
            raise ValueError("mixture base must not itself be a mixture")


ModelPrior = Union[ComplexityPrior, BetaBinomialPrior, BinomialPrior, MixturePrior]


def _log_raw_masses(prior: ModelPrior, n_vars: int, max_size: int) -> np.ndarray:
    s = np.arange(max_size + 1, dtype=np.float64)
    if isinstance(prior, ComplexityPrior):
        return -s * (np.log(prior.c) + prior.a * np.log(n_vars))
    if isinstance(prior, BetaBinomialPrior):
        a_n = prior.shape * max_size
        return log_binom(max_size, s) + np.log(a_n) + betaln(a_n + max_size - s, s + 1.0)
    if isinstance(prior, BinomialPrior):
        # xlogy keeps the max_size == 1 boundary finite where 1 - 1/max_size = 0.
        q = 1.0 / max_size
        return log_binom(max_size, s) + xlogy(s, q) + xlogy(max_size - s, 1.0 - q)
    raise TypeError(f"unknown prior {type(prior).__name__}")


@lru_cache(maxsize=128)
def _log_size_table(prior: ModelPrior, n_vars: int, max_size: int) -> np.ndarray:
    if n_vars < 1 or max_size < 0 or max_size > n_vars:
        raise ValueError(f"need 0 <= max_size <= n_vars, got ({n_vars}, {max_size})")
    if max_size == 0:
        table = np.zeros(1)
    elif isinstance(prior, MixturePrior):
        base = _log_size_table(prior.base, n_vars, max_size)
        w = np.exp(-prior.rate * max_size)
        table = np.log1p(-w) + base
        k = len(prior.anchor)
        if not 0 <= k <= max_size:
            raise ValueError(f"anchor size {k} outside 0..{max_size}")
        table[k] = np.logaddexp(table[k], np.log(w))
    else:
        raw = _log_raw_masses(prior, n_vars, max_size)
        table = raw - logsumexp(raw)
    table.flags.writeable = False
    return table


def log_size_mass(prior: ModelPrior, size: int, n_vars: int, max_size: int) -> float:
    """log mass the prior puts on models of the given size; -inf off support."""
    if size < 0 or size > max_size:
        return -np.inf
    return float(_log_size_table(prior, n_vars, max_size)[size])


def log_model_prior(prior: ModelPrior, model, n_vars: int, max_size: int) -> float:
    """log prior mass of one specific model (order of indices irrelevant).

    Parameters
    ----------
    prior : ModelPrior
        One of the prior variants above.
    model : iterable of int
        Active column indices.
    n_vars : int
        Total number of columns to choose from.
    max_size : int
        Largest supported model size (numerical rank of the design).
    """
    model = tuple(model)
    s = len(model)
    if isinstance(prior, MixturePrior):
        w = np.exp(-prior.rate * max_size)
        base = np.log1p(-w) + log_model_prior(prior.base, model, n_vars, max_size)
        if sorted(model) == sorted(prior.anchor):
            return float(np.logaddexp(base, np.log(w)))
        return float(base)
    lf = log_size_mass(prior, s, n_vars, max_size)
    if lf == -np.inf:
        return -np.inf
    return lf - float(log_binom(n_vars, s))
