"""Coordinate-descent lasso for chain initialization and noise estimation.

The objective is (1/2n) * ||y - X beta||^2 + lam * ||beta||_1. Data are
standardized internally (y centered, columns centered and scaled to squared
sample norm n) and coefficients are reported back on the original scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DesignMatrix, SingularModel, fit_model

CONVERGE_TOL = 1e-7
MAX_SWEEPS = 10_000
SCREEN_EPS = 1e-12


class NonConvergence(Exception):
    """Coordinate descent exhausted its sweep budget."""


class DegenerateFit(Exception):
    """Noise estimation needs more observations than active coefficients."""


@dataclass(frozen=True)
class LassoFit:
    """Solution at one penalty level, coefficients on the original scale.

    ``rss`` is measured on centered data, ||y_c - X_c beta||^2, i.e. with
    the intercept profiled out.
    """

    beta: np.ndarray
    lam: float
    rss: float
    sweeps: int

    @property
    def active_size(self) -> int:
        return int(np.count_nonzero(self.beta))

    @property
    def support(self) -> tuple:
        return tuple(int(j) for j in np.flatnonzero(self.beta))


def _standardize(X: DesignMatrix, y: np.ndarray):
    y = np.asarray(y, dtype=np.float64)
    ybar = float(y.mean())
    yc = y - ybar
    mu = X.values.mean(axis=0)
    Xc = X.values - mu
    scale = np.sqrt(np.einsum("ij,ij->j", Xc, Xc) / X.n)
    safe = np.where(scale > 0.0, scale, 1.0)
    Xs = Xc / safe
    return Xs, yc, safe, mu, ybar


def _soft(z: float, lam: float) -> float:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


def _cd_core(Xs: np.ndarray, yc: np.ndarray, lam: float, beta: np.ndarray, tol: float = CONVERGE_TOL):
    """Active-set coordinate descent on standardized data, in place.

    Alternates full-gradient screening passes with sweeps over the active
    set; every pass of either kind counts against the sweep budget.
    """
    n = Xs.shape[0]
    r = yc - Xs @ beta
    active = list(np.flatnonzero(beta))
    sweeps = 0
    while True:
        # Screening pass: pull in every coordinate violating the zero-side
        # optimality condition |x_j' r| / n <= lam.
        sweeps += 1
        corr = Xs.T @ r / n
        inactive_mask = np.ones(Xs.shape[1], dtype=bool)
        inactive_mask[active] = False
        violators = np.flatnonzero(inactive_mask & (np.abs(corr) > lam + SCREEN_EPS))
        if violators.size:
            active.extend(int(j) for j in violators)
        elif sweeps > 1 or not active:
            # No new coordinates and the active set already converged.
            break
        converged = not active
        while not converged:
            sweeps += 1
            if sweeps > MAX_SWEEPS:
                raise NonConvergence(f"no convergence in {MAX_SWEEPS} sweeps at lam={lam}")
            delta = 0.0
            for j in active:
                old = beta[j]
                xj = Xs[:, j]
                z = old + (xj @ r) / n
                new = _soft(z, lam)
                step = new - old
                if step != 0.0:
                    r -= step * xj
                    beta[j] = new
                    delta = max(delta, abs(step))
            if delta < tol:
                converged = True
                active = [j for j in active if beta[j] != 0.0]
        if sweeps > MAX_SWEEPS:
            raise NonConvergence(f"no convergence in {MAX_SWEEPS} sweeps at lam={lam}")
    return beta, r, sweeps


def cd_lasso(X: DesignMatrix, y: np.ndarray, lam: float) -> LassoFit:
    """Solve the lasso at one penalty level.

    Parameters
    ----------
    X : DesignMatrix
        Raw design; standardization happens internally.
    y : array
        Response vector of length X.n.
    lam : float
        Nonnegative penalty on the standardized scale.

    Raises
    ------
    NonConvergence
        After 10^4 coordinate sweeps without meeting the 1e-7 change
        tolerance.
    """
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    Xs, yc, scale, _, _ = _standardize(X, y)
    beta_std = np.zeros(X.p)
    beta_std, r, sweeps = _cd_core(Xs, yc, lam, beta_std)
    return LassoFit(beta=beta_std / scale, lam=float(lam), rss=float(r @ r), sweeps=sweeps)


def lambda_max(X: DesignMatrix, y: np.ndarray) -> float:
    """Smallest penalty with an all-zero solution, on the standardized scale."""
    Xs, yc, _, _, _ = _standardize(X, y)
    return float(np.max(np.abs(Xs.T @ yc)) / X.n)


def _grid(lam_top: float, n_grid: int, ratio: float) -> np.ndarray:
    return np.geomspace(lam_top, ratio * lam_top, n_grid)


def select_lambda(
    X: DesignMatrix,
    y: np.ndarray,
    folds: int = 5,
    n_grid: int = 50,
    min_ratio: float = 0.001,
) -> float:
    """Penalty minimizing K-fold cross-validated squared prediction error.

    Folds are contiguous index blocks, so the result is deterministic.
    The grid is log-spaced from lambda_max down to min_ratio * lambda_max;
    ties resolve to the largest penalty.
    """
    y = np.asarray(y, dtype=np.float64)
    n = X.n
    if folds < 2 or folds > n:
        raise ValueError(f"need 2 <= folds <= n, got {folds}")
    lam_top = lambda_max(X, y)
    if lam_top <= 0.0:
        raise ValueError("response is orthogonal to every centered column")
    grid = _grid(lam_top, n_grid, min_ratio)
    err = np.zeros(n_grid)
    blocks = np.array_split(np.arange(n), folds)
    for held in blocks:
        mask = np.ones(n, dtype=bool)
        mask[held] = False
        Xtr = DesignMatrix.from_array(X.values[mask])
        ytr = y[mask]
        Xs, yc, scale, mu, ybar = _standardize(Xtr, ytr)
        Xte = X.values[held] - mu
        yte = y[held]
        beta_std = np.zeros(X.p)
        for i, lam in enumerate(grid):
            # Path fits only rank penalties by prediction error, so a loose
            # tolerance is enough; the returned penalty's final fit is solved
            # at full precision by the caller.
            beta_std, _, _ = _cd_core(Xs, yc, lam, beta_std, tol=1e-4)
            pred = ybar + Xte @ (beta_std / scale)
            err[i] += float(np.sum((yte - pred) ** 2))
    return float(grid[int(np.argmin(err))])


def cv_fit(X: DesignMatrix, y: np.ndarray, folds: int = 5, n_grid: int = 50) -> LassoFit:
    """Full-data lasso fit at the cross-validation-selected penalty."""
    lam = select_lambda(X, y, folds=folds, n_grid=n_grid)
    return cd_lasso(X, y, lam)


def sigma2_from_fit(fit: LassoFit, n: int) -> float:
    """Residual variance rss / (n - active_size) from a lasso fit."""
    s = fit.active_size
    if n <= s:
        raise DegenerateFit(f"need n > active size, got n={n}, active={s}")
    return fit.rss / (n - s)


def estimate_sigma2(X: DesignMatrix, y: np.ndarray, folds: int = 5) -> float:
    """Noise variance estimate from the cross-validated lasso fit.

    Raises DegenerateFit when the selected active set is as large as the
    sample, leaving no residual degrees of freedom.
    """
    return sigma2_from_fit(cv_fit(X, y, folds=folds), X.n)


def model_from_fit(fit: LassoFit, X: DesignMatrix, y: np.ndarray, max_size: int) -> tuple:
    """Turn a lasso fit's support into a usable starting model.

    Oversized supports keep the max_size largest standardized coefficients;
    a support the least-squares machinery cannot fit falls back to the
    empty model.
    """
    support = fit.support
    if len(support) > max_size:
        Xc = X.values - X.values.mean(axis=0)
        scale = np.sqrt(np.einsum("ij,ij->j", Xc, Xc) / X.n)
        magnitude = np.abs(fit.beta) * scale
        ranked = sorted(support, key=lambda j: -magnitude[j])
        support = tuple(sorted(ranked[:max_size]))
    try:
        fit_model(X, y, support)
    except SingularModel:
        return ()
    return support


def initial_model(X: DesignMatrix, y: np.ndarray, max_size: int, folds: int = 5) -> tuple:
    """Model suggested by the cross-validated lasso support."""
    return model_from_fit(cv_fit(X, y, folds=folds), X, y, max_size)


def kkt_gap(X: DesignMatrix, y: np.ndarray, fit: LassoFit) -> float:
    """Largest violation of the lasso optimality conditions, measured on
    the standardized problem the solver actually optimized."""
    Xs, yc, scale, _, _ = _standardize(X, y)
    beta_std = fit.beta * scale
    corr = Xs.T @ (yc - Xs @ beta_std) / X.n
    gap = 0.0
    for j in range(X.p):
        if beta_std[j] != 0.0:
            gap = max(gap, abs(corr[j] - fit.lam * np.sign(beta_std[j])))
        else:
            gap = max(gap, max(abs(corr[j]) - fit.lam, 0.0))
    return gap
