"""Covariance-matrix-adaptation evolution strategy.

Standard (mu/mu_w, lambda) formulation with rank-one and rank-mu
covariance updates and cumulative step-size adaptation, specialized to
the unit box: candidates live in [0, 1]^n and are kept feasible by
resampling (with a clip fallback after too many rejections).  Everything
is driven by one seeded generator, so runs are reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NumericalError

_RESAMPLE_TRIES = 100


def default_population(dim: int) -> int:
    return 4 + int(3 * math.log(dim))


class CmaEs:
    """Minimizer over the unit box; drive with ask/tell."""

    def __init__(self, dim: int, seed, sigma0: float = 0.3,
                 population: int | None = None, mean0=None):
        if dim < 1:
            raise DomainError("dimension must be >= 1")
        if not (0.0 < sigma0 < 1.0):
            raise DomainError("sigma0 must be in (0, 1) box units")
        self.n = dim
        self.rng = np.random.default_rng(seed)
        self.lam = population if population is not None else default_population(dim)
        if self.lam < 2:
            raise DomainError("population must be >= 2")
        self.mu = self.lam // 2
        weights = np.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = weights / weights.sum()
        self.mu_eff = 1.0 / np.sum(self.weights ** 2)

        n = float(dim)
        self.c_sigma = (self.mu_eff + 2.0) / (n + self.mu_eff + 5.0)
        self.d_sigma = (1.0 + 2.0 * max(0.0, math.sqrt((self.mu_eff - 1.0) / (n + 1.0)) - 1.0)
                        + self.c_sigma)
        self.c_c = (4.0 + self.mu_eff / n) / (n + 4.0 + 2.0 * self.mu_eff / n)
        self.c_1 = 2.0 / ((n + 1.3) ** 2 + self.mu_eff)
        self.c_mu = min(1.0 - self.c_1,
                        2.0 * (self.mu_eff - 2.0 + 1.0 / self.mu_eff)
                        / ((n + 2.0) ** 2 + self.mu_eff))
        self.chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

        self.mean = np.full(dim, 0.5) if mean0 is None else np.asarray(mean0, float).copy()
        self.sigma = float(sigma0)
        self.cov = np.eye(dim)
        self.p_sigma = np.zeros(dim)
        self.p_c = np.zeros(dim)
        self.generation = 0
        self._decompose()

    def _decompose(self):
        self.cov = (self.cov + self.cov.T) / 2.0
        eigenvalues, eigenvectors = np.linalg.eigh(self.cov)
        self._basis = eigenvectors
        self._scales = np.sqrt(np.maximum(eigenvalues, 1e-20))

    def ask(self) -> np.ndarray:
        """Sample one generation of candidates inside the unit box."""
        out = np.empty((self.lam, self.n))
        for i in range(self.lam):
            for _ in range(_RESAMPLE_TRIES):
                z = self.rng.standard_normal(self.n)
                x = self.mean + self.sigma * (self._basis @ (self._scales * z))
                if (x >= 0.0).all() and (x <= 1.0).all():
                    break
            out[i] = np.clip(x, 0.0, 1.0)
        return out

    def tell(self, candidates: np.ndarray, costs):
        """Rank the generation and update mean, paths, covariance, sigma."""
        costs = np.asarray(costs, dtype=float)
        if candidates.shape != (self.lam, self.n) or costs.shape != (self.lam,):
            raise DomainError("tell() shape does not match the population")
        order = np.argsort(costs, kind="stable")[: self.mu]
        selected = candidates[order]
        y = (selected - self.mean) / self.sigma
        y_w = self.weights @ y
        self.mean = self.mean + self.sigma * y_w

        whitened = self._basis @ ((self._basis.T @ y_w) / self._scales)
        self.p_sigma = ((1.0 - self.c_sigma) * self.p_sigma
                        + math.sqrt(self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff)
                        * whitened)
        self.generation += 1
        ps_norm = float(np.linalg.norm(self.p_sigma))
        expected = math.sqrt(1.0 - (1.0 - self.c_sigma) ** (2 * self.generation))
        h_sigma = 1.0 if ps_norm / expected < (1.4 + 2.0 / (self.n + 1.0)) * self.chi_n else 0.0
        self.p_c = ((1.0 - self.c_c) * self.p_c
                    + h_sigma * math.sqrt(self.c_c * (2.0 - self.c_c) * self.mu_eff) * y_w)

        rank_mu = (self.weights[:, None] * y).T @ y
        delta_h = (1.0 - h_sigma) * self.c_c * (2.0 - self.c_c)
        self.cov = ((1.0 - self.c_1 - self.c_mu) * self.cov
                    + self.c_1 * (np.outer(self.p_c, self.p_c) + delta_h * self.cov)
                    + self.c_mu * rank_mu)
        self.sigma = self.sigma * math.exp(
            (self.c_sigma / self.d_sigma) * (ps_norm / self.chi_n - 1.0))
        if not math.isfinite(self.sigma):
            raise NumericalError("step size diverged")
        self._decompose()
