"""Adaptive random-walk Metropolis sampling and convergence diagnostics.

The kernel proposes jointly from a multivariate normal whose covariance is
adapted during warmup only: the proposal shape tracks the running empirical
covariance of the chain and a Robbins-Monro recursion tunes the global scale
toward a target acceptance rate. After warmup the kernel is frozen, so the
post-warmup draws target the correct stationary distribution. Everything is
driven by a caller-supplied ``numpy.random.Generator``; identical generators
give bit-identical chains.

Diagnostics are the classic split-chain potential scale reduction factor
(R-hat), autocorrelation-based effective sample size with Geyer's initial
monotone positive-pair truncation, and the Monte Carlo standard error of the
posterior mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ChainResult",
    "run_chain",
    "split_rhat",
    "effective_sample_size",
    "mcse_mean",
]


@dataclass
class ChainResult:
    draws: np.ndarray          # (n_draws, dim), post-warmup only
    acceptance_rate: float     # post-warmup acceptance fraction
    proposal_scale: float      # frozen log step scale multiplier exp()
    proposal_cov: np.ndarray   # frozen proposal covariance


def run_chain(
    log_post: Callable[[np.ndarray], float],
    start: np.ndarray,
    rng: np.random.Generator,
    warmup: int,
    draws: int,
    init_cov: np.ndarray | None = None,
    target_accept: float = 0.3,
) -> ChainResult:
    """Run one adaptive random-walk Metropolis chain.

    ``init_cov`` seeds the proposal covariance (e.g. an inverse-information
    estimate); the identity is used when absent. Covariance re-estimation
    from the chain history starts after 100 warmup iterations and the scale
    adaptation decays as iteration^-0.7, both stopping dead at the end of
    warmup.
    """
    x = np.asarray(start, dtype=float).copy()
    dim = x.size
    if init_cov is None:
        init_cov = np.eye(dim)
    # classic d-dimensional random-walk scaling
    log_scale = np.log(2.38**2 / dim)
    cov = np.array(init_cov, dtype=float)
    chol = _safe_cholesky(cov)

    lp = float(log_post(x))
    if not np.isfinite(lp):
        raise ValueError("log posterior is not finite at the chain start")

    # Welford accumulators for the running covariance of warmup states
    mean = np.zeros(dim)
    m2 = np.zeros((dim, dim))
    count = 0

    out = np.empty((draws, dim))
    accepted_post = 0
    total = warmup + draws
    for it in range(total):
        step = np.exp(0.5 * log_scale) * (chol @ rng.standard_normal(dim))
        prop = x + step
        lp_prop = float(log_post(prop))
        log_ratio = lp_prop - lp
        accept = np.log(rng.uniform()) < log_ratio
        if accept:
            x = prop
            lp = lp_prop

        if it < warmup:
            alpha = min(1.0, np.exp(min(log_ratio, 0.0)))
            gamma = min(0.2, (it + 1) ** -0.7)
            log_scale += gamma * (alpha - target_accept)
            log_scale = min(max(log_scale, -15.0), 5.0)
            count += 1
            delta = x - mean
            mean += delta / count
            m2 += np.outer(delta, x - mean)
            if it >= 100 and (it + 1) % 25 == 0:
                emp = m2 / (count - 1)
                cov = emp + 1e-9 * np.eye(dim) * max(1.0, np.trace(emp) / dim)
                chol = _safe_cholesky(cov)
        else:
            out[it - warmup] = x
            accepted_post += bool(accept)

    return ChainResult(
        draws=out,
        acceptance_rate=accepted_post / max(draws, 1),
        proposal_scale=float(np.exp(0.5 * log_scale)),
        proposal_cov=cov,
    )


def _safe_cholesky(cov: np.ndarray) -> np.ndarray:
    jitter = 0.0
    scale = max(float(np.trace(cov)) / cov.shape[0], 1e-12)
    for _ in range(8):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            jitter = max(jitter * 10.0, 1e-12 * scale)
    raise np.linalg.LinAlgError("proposal covariance is not positive definite")


def _split(chains: np.ndarray) -> np.ndarray:
    """Split each chain in half: (C, N, d) -> (2C, N//2, d)."""
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 3:
        raise ValueError("expected draws with shape (chains, iterations, dim)")
    c, n, d = chains.shape
    if n < 4:
        raise ValueError("need at least 4 iterations per chain to split")
    half = n // 2
    return np.concatenate([chains[:, :half, :], chains[:, n - half:, :]], axis=0)


def split_rhat(chains: np.ndarray) -> np.ndarray:
    """Split-chain potential scale reduction factor, one value per column."""
    s = _split(chains)
    m, n, d = s.shape
    chain_means = s.mean(axis=1)
    chain_vars = s.var(axis=1, ddof=1)
    w = chain_vars.mean(axis=0)
    b_over_n = chain_means.var(axis=0, ddof=1)
    var_plus = (n - 1) / n * w + b_over_n
    out = np.ones(d)
    ok = w > 0
    out[ok] = np.sqrt(var_plus[ok] / w[ok])
    return out


def effective_sample_size(chains: np.ndarray) -> np.ndarray:
    """Multi-chain effective sample size per column (split chains, Geyer
    initial monotone positive-pair truncation of the autocorrelations)."""
    s = _split(chains)
    m, n, d = s.shape
    total = m * n
    chain_vars = s.var(axis=1, ddof=1)
    w = chain_vars.mean(axis=0)
    var_plus = (n - 1) / n * w + s.mean(axis=1).var(axis=0, ddof=1)

    ess = np.empty(d)
    for j in range(d):
        if var_plus[j] <= 0 or w[j] <= 0:
            ess[j] = float(total)
            continue
        acov = np.mean([_autocov(s[c, :, j]) for c in range(m)], axis=0)
        rho = 1.0 - (w[j] - acov) / var_plus[j]
        rho[0] = 1.0
        # tau = -1 + 2 * sum of pair sums P_k = rho_{2k} + rho_{2k+1},
        # truncated at the first nonpositive pair and forced nonincreasing
        pair_sum = 0.0
        prev = np.inf
        for k in range(n // 2):
            p = rho[2 * k] + rho[2 * k + 1]
            if p <= 0.0:
                break
            p = min(p, prev)
            prev = p
            pair_sum += p
        tau = max(-1.0 + 2.0 * pair_sum, 1.0 / total)
        ess[j] = total / tau
    return ess


def _autocov(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance (normalized by n) via FFT, all lags."""
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n].real
    return acov / n


def mcse_mean(chains: np.ndarray) -> np.ndarray:
    """Monte Carlo standard error of the posterior mean per column."""
    chains = np.asarray(chains, dtype=float)
    flat = chains.reshape(-1, chains.shape[-1])
    sd = flat.std(axis=0, ddof=1)
    return sd / np.sqrt(effective_sample_size(chains))
