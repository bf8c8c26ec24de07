"""Conditional (stratified) logistic regression for matched sets.

Per matched set, the contribution to the likelihood is the within-set
softmax probability of the case row,

    exp(x_case . beta) / sum_j exp(x_j . beta),

so any per-set constant added to every row cancels: subject-level intercepts
are conditioned out, never estimated. Internally each set is stored as row
differences z_j = x_j - x_case (the case row becomes the zero vector), which
makes that cancellation structural rather than an arithmetic accident, and
the per-set log-probability is the stabilized -logsumexp_j(z_j . beta).

Fitting is by Newton iteration with step halving (maximum likelihood) or by
adaptive random-walk Metropolis over the same likelihood plus a per-block
Gaussian prior (posterior sampling). Both paths standardize columns by their
pooled standard deviation internally and return coefficients on the original
scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import mcmc
from .errors import ConvergenceError, SeparationError
from .splines import DesignMatrix

__all__ = [
    "ConditionalLikelihood",
    "PriorSpec",
    "SamplerConfig",
    "MleDiagnostics",
    "BayesDiagnostics",
    "FitResult",
    "log_likelihood",
    "gradient",
    "hessian",
    "fit_mle",
    "fit_bayes",
]

RHAT_WARN = 1.05


class ConditionalLikelihood:
    """Matched-set data prepared for likelihood evaluation.

    ``sets`` is an iterable of ``(case_row, control_rows)`` pairs with
    ``case_row`` of shape (dim,) and ``control_rows`` of shape (m-1, dim).
    Sets are grouped by size so evaluations are vectorized; the reduction
    order (ascending size, input order within size) is fixed, which keeps
    repeated evaluations bit-identical.
    """

    def __init__(
        self,
        sets: Iterable[tuple[np.ndarray, np.ndarray]],
        labels: Sequence[str] | None = None,
        blocks: Sequence[tuple[str, slice]] | None = None,
    ):
        dim = None
        grouped: dict[int, list[np.ndarray]] = {}
        sq_sum = None
        mean_sum = None
        n_rows = 0
        n_sets = 0
        for case_row, control_rows in sets:
            case = np.asarray(case_row, dtype=float)
            ctrl = np.atleast_2d(np.asarray(control_rows, dtype=float))
            if case.ndim != 1:
                raise ValueError("case row must be a vector")
            if ctrl.shape[0] < 1:
                raise ValueError("each set needs at least one control row")
            if ctrl.shape[1] != case.size:
                raise ValueError(
                    f"control rows have dimension {ctrl.shape[1]}, case has {case.size}"
                )
            if dim is None:
                dim = case.size
                sq_sum = np.zeros(dim)
                mean_sum = np.zeros(dim)
            elif case.size != dim:
                raise ValueError("all sets must share one covariate dimension")
            if not (np.all(np.isfinite(case)) and np.all(np.isfinite(ctrl))):
                raise ValueError("covariates must be finite")
            z = np.vstack([np.zeros(dim), ctrl - case])
            grouped.setdefault(z.shape[0], []).append(z)
            rows = np.vstack([case[np.newaxis, :], ctrl])
            mean_sum += rows.sum(axis=0)
            sq_sum += (rows**2).sum(axis=0)
            n_rows += rows.shape[0]
            n_sets += 1
        if n_sets == 0:
            raise ValueError("need at least one matched set")

        self.dimension = dim
        self.n_sets = n_sets
        self.n_rows = n_rows
        self.labels = tuple(labels) if labels is not None else None
        self.blocks = tuple(blocks) if blocks is not None else None
        mean = mean_sum / n_rows
        var = sq_sum / n_rows - mean**2
        self.pooled_sd = np.sqrt(np.maximum(var, 0.0))
        self._groups = [
            (m, np.stack(zs)) for m, zs in sorted(grouped.items())
        ]

    @classmethod
    def from_design_matrix(cls, dm: DesignMatrix) -> "ConditionalLikelihood":
        # rows arrive grouped by set, so one pass over the boundaries suffices
        if dm.set_index.size and np.any(np.diff(dm.set_index) < 0):
            order = np.argsort(dm.set_index, kind="stable")
            values, set_index, is_case = dm.values[order], dm.set_index[order], dm.is_case[order]
        else:
            values, set_index, is_case = dm.values, dm.set_index, dm.is_case
        boundaries = np.flatnonzero(np.diff(set_index)) + 1
        sets = []
        for rows, case_mask in zip(
            np.split(values, boundaries), np.split(is_case, boundaries)
        ):
            if case_mask.sum() != 1:
                raise ValueError("each set must have exactly one case row")
            sets.append((rows[case_mask][0], rows[~case_mask]))
        return cls(sets, labels=dm.column_labels, blocks=dm.blocks)

    def scaled_groups(self, inv_scale: np.ndarray) -> list[tuple[int, np.ndarray]]:
        return [(m, z * inv_scale) for m, z in self._groups]

    def block_of(self, column: int) -> str:
        if self.blocks:
            for name, sl in self.blocks:
                if sl.start <= column < sl.stop:
                    return name
        if self.labels:
            return self.labels[column]
        return f"column {column}"


def _group_ll(groups, beta: np.ndarray) -> float:
    total = 0.0
    for _, z in groups:
        e = z @ beta
        mx = e.max(axis=1)
        total -= float((mx + np.log(np.exp(e - mx[:, np.newaxis]).sum(axis=1))).sum())
    return total


def _group_grad_hess(groups, beta: np.ndarray, want_hess: bool = True):
    """One pass over the sets: log-likelihood, gradient, and (optionally)
    the Hessian, all in the parameterization of the supplied groups."""
    dim = beta.size
    ll = 0.0
    g = np.zeros(dim)
    h = np.zeros((dim, dim)) if want_hess else None
    for _, z in groups:
        e = z @ beta
        mx = e.max(axis=1)
        w = np.exp(e - mx[:, np.newaxis])
        norm = w.sum(axis=1)
        ll -= float((mx + np.log(norm)).sum())
        w /= norm[:, np.newaxis]
        zbar = np.einsum("nm,nmd->nd", w, z)
        g -= zbar.sum(axis=0)
        if want_hess:
            h -= np.einsum("nm,nmd,nme->de", w, z, z) - zbar.T @ zbar
    return (ll, g, h) if want_hess else (ll, g)


def log_likelihood(beta, lik: ConditionalLikelihood) -> float:
    """Conditional log-likelihood at ``beta`` (original covariate scale)."""
    beta = _check_beta(beta, lik)
    return _group_ll(lik._groups, beta)


def gradient(beta, lik: ConditionalLikelihood) -> np.ndarray:
    """Score vector: sum over sets of (x_case - softmax-weighted row mean)."""
    beta = _check_beta(beta, lik)
    _, g = _group_grad_hess(lik._groups, beta, want_hess=False)
    return g


def hessian(beta, lik: ConditionalLikelihood) -> np.ndarray:
    """Observed-information negative: minus the sum of within-set covariance
    matrices of the rows under softmax weights (symmetric, negative
    semidefinite)."""
    beta = _check_beta(beta, lik)
    _, _, h = _group_grad_hess(lik._groups, beta)
    return h


def _check_beta(beta, lik: ConditionalLikelihood) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (lik.dimension,):
        raise ValueError(f"beta must have shape ({lik.dimension},), got {beta.shape}")
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite")
    return beta


@dataclass
class MleDiagnostics:
    converged: bool
    iterations: int
    gradient_norm: float
    zero_information: bool = False
    ridge_restarted: bool = False


@dataclass
class BayesDiagnostics:
    rhat: np.ndarray
    ess: np.ndarray
    mcse: np.ndarray
    acceptance_rate: float
    converged: bool


@dataclass
class FitResult:
    """A fitted model: an MLE with covariance, or posterior draws."""

    mode: str                                  # "mle" | "bayes"
    point: np.ndarray                          # MLE or posterior mean
    labels: tuple[str, ...] | None
    blocks: tuple[tuple[str, slice], ...] | None
    covariance: np.ndarray | None = None       # mle only
    draws: np.ndarray | None = None            # (S, dim), bayes only
    diagnostics: MleDiagnostics | BayesDiagnostics | None = None

    @property
    def sd(self) -> np.ndarray:
        if self.mode == "mle":
            if self.covariance is None:
                return np.full_like(self.point, np.nan)
            return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return self.draws.std(axis=0, ddof=1)

    def block_slice(self, name: str) -> slice:
        if not self.blocks:
            raise ValueError("fit carries no block structure")
        for block, sl in self.blocks:
            if block == name:
                return sl
        raise ValueError(f"no block named {name!r}")


@dataclass(frozen=True)
class PriorSpec:
    """Independent Gaussian priors, one standard deviation per block.

    ``sd`` maps block names to prior standard deviations; ``default_sd``
    covers columns outside any named block.
    """

    family: str = "gaussian"
    mean: float = 0.0
    sd: Mapping[str, float] = field(default_factory=dict)
    default_sd: float = 10.0

    def __post_init__(self):
        if self.family != "gaussian":
            raise ValueError(f"unsupported prior family {self.family!r}")
        if self.mean != 0.0:
            raise ValueError("priors are centered at zero")
        for name, s in self.sd.items():
            if s <= 0:
                raise ValueError(f"prior sd for block {name!r} must be positive")
        if self.default_sd <= 0:
            raise ValueError("default prior sd must be positive")

    def column_sds(self, lik: ConditionalLikelihood) -> np.ndarray:
        out = np.full(lik.dimension, self.default_sd)
        if lik.blocks:
            for name, sl in lik.blocks:
                out[sl] = self.sd.get(name, self.default_sd)
        return out

    @classmethod
    def for_model(cls, interaction_kind: str) -> "PriorSpec":
        """Defaults: sd 10 on spline blocks; sd 1 on a single product-term
        coefficient, whose covariate has much larger scale."""
        inter_sd = 1.0 if interaction_kind == "linear_interaction" else 10.0
        return cls(sd={"temperature": 10.0, "pm25": 10.0, "interaction": inter_sd})


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    warmup: int = 1000
    draws: int = 1000          # per chain, post-warmup
    seed: int | None = None
    target_accept: float = 0.3

    def __post_init__(self):
        if self.chains < 2:
            raise ValueError("need at least 2 chains for split-Rhat")
        if self.warmup < 10 or self.draws < 10:
            raise ValueError("warmup and draws must each be at least 10")
        if self.seed is None:
            raise ValueError("sampler seed is required for reproducibility")


def _scales(lik: ConditionalLikelihood) -> np.ndarray:
    s = lik.pooled_sd.copy()
    s[s <= 0] = 1.0
    return s


def _newton(
    groups,
    lik: ConditionalLikelihood,
    tolerance: float,
    max_iter: int,
    separation_bound: float,
):
    """Newton iteration in the standardized parameterization.

    Returns (beta, covariance or None, diagnostics); raises on separation or
    persistent failure. Separation is flagged either when the coefficient
    sup-norm passes ``separation_bound`` while the gradient has not
    converged, or when the likelihood converges onto its supremum of zero
    (every case predicted perfectly).
    """
    dim = lik.dimension
    beta = np.zeros(dim)
    ll, g, h = _group_grad_hess(groups, beta)
    gnorm = float(np.abs(g).max())
    ridge_used = False

    if gnorm <= tolerance and float(np.abs(h).max()) < 1e-12:
        diag = MleDiagnostics(True, 0, gnorm, zero_information=True)
        return beta, None, diag

    iterations = 0
    converged = gnorm <= tolerance
    while not converged and iterations < max_iter:
        iterations += 1
        neg_h = -h
        try:
            step = np.linalg.solve(neg_h, g)
        except np.linalg.LinAlgError:
            step = None
        if step is None or not np.all(np.isfinite(step)):
            ridge_used = True
            step = np.linalg.solve(neg_h + 1e-8 * np.eye(dim), g)
            if not np.all(np.isfinite(step)):
                raise ConvergenceError("hessian is singular even after ridge restart")
        lam = 1.0
        improved = False
        for _ in range(40):
            cand = beta + lam * step
            cand_ll = _group_ll(groups, cand)
            # a full step that leaves the likelihood flat at floating-point
            # resolution is the Newton endgame, not a failure
            flat_ok = lam == 1.0 and cand_ll >= ll - 1e-12 * max(1.0, abs(ll))
            if cand_ll > ll or flat_ok:
                beta, ll = cand, cand_ll
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
        ll, g, h = _group_grad_hess(groups, beta)
        gnorm = float(np.abs(g).max())
        if gnorm <= tolerance:
            converged = True
        elif float(np.abs(beta).max()) > separation_bound:
            worst = int(np.abs(beta).argmax())
            raise SeparationError(
                f"coefficient sup-norm exceeded {separation_bound} (standardized) "
                f"with gradient norm {gnorm:.3g}; offending block: {lik.block_of(worst)}",
                block=lik.block_of(worst),
            )

    if not converged:
        raise ConvergenceError(
            f"Newton did not converge in {iterations} iterations (gradient norm {gnorm:.3g})"
        )
    if ll > -1e-6 * lik.n_sets:
        worst = int(np.abs(beta).argmax())
        raise SeparationError(
            "log-likelihood converged onto its supremum of zero (each case day "
            f"predicted with probability one); offending block: {lik.block_of(worst)}",
            block=lik.block_of(worst),
        )

    neg_h = -h
    try:
        cov = np.linalg.inv(neg_h)
    except np.linalg.LinAlgError:
        ridge_used = True
        try:
            cov = np.linalg.inv(neg_h + 1e-8 * np.eye(dim))
        except np.linalg.LinAlgError:
            raise ConvergenceError("hessian is singular at the optimum even after ridge restart")
    diag = MleDiagnostics(True, iterations, gnorm, ridge_restarted=ridge_used)
    return beta, cov, diag


def fit_mle(
    lik: ConditionalLikelihood,
    tolerance: float = 1e-8,
    max_iter: int = 200,
    separation_bound: float = 50.0,
) -> FitResult:
    """Maximum likelihood via Newton iteration with step halving.

    Convergence is gradient sup-norm <= ``tolerance`` in the standardized
    parameterization; the covariance is the inverse observed information,
    back-transformed to the original scale.
    """
    scale = _scales(lik)
    groups = lik.scaled_groups(1.0 / scale)
    beta_std, cov_std, diag = _newton(groups, lik, tolerance, max_iter, separation_bound)
    point = beta_std / scale
    cov = None
    if cov_std is not None:
        cov = cov_std / np.outer(scale, scale)
    return FitResult(
        mode="mle",
        point=point,
        labels=lik.labels,
        blocks=lik.blocks,
        covariance=cov,
        diagnostics=diag,
    )


def fit_bayes(
    lik: ConditionalLikelihood,
    prior: PriorSpec,
    config: SamplerConfig,
) -> FitResult:
    """Posterior sampling for likelihood + Gaussian prior.

    Chains start overdispersed around the MLE (or the prior center when the
    MLE is unavailable) and adapt only during warmup. Runs with identical
    seeds and configs are bit-identical. Non-convergence (any split-Rhat
    above 1.05) is recorded on the diagnostics, not raised.
    """
    scale = _scales(lik)
    groups = lik.scaled_groups(1.0 / scale)
    # prior is declared on the original scale; standardizing a column by s
    # multiplies its coefficient, hence its prior sd, by s
    prior_sd_std = prior.column_sds(lik) * scale
    prior_var = prior_sd_std**2

    def log_post(beta_std: np.ndarray) -> float:
        return _group_ll(groups, beta_std) - 0.5 * float((beta_std**2 / prior_var).sum())

    center = np.zeros(lik.dimension)
    init_cov = np.diag(prior_var)
    try:
        beta_std, cov_std, _ = _newton(groups, lik, 1e-8, 200, 50.0)
        center = beta_std
        if cov_std is not None:
            init_cov = cov_std
    except (SeparationError, ConvergenceError):
        pass

    seeds = np.random.SeedSequence(config.seed).spawn(config.chains)
    chol0 = np.linalg.cholesky(init_cov + 1e-12 * np.eye(lik.dimension))
    chains = []
    accept = []
    for c in range(config.chains):
        rng = np.random.default_rng(seeds[c])
        start = center + chol0 @ rng.standard_normal(lik.dimension)
        result = mcmc.run_chain(
            log_post,
            start,
            rng,
            warmup=config.warmup,
            draws=config.draws,
            init_cov=init_cov,
            target_accept=config.target_accept,
        )
        chains.append(result.draws)
        accept.append(result.acceptance_rate)

    std_draws = np.stack(chains)                      # (C, N, dim)
    rhat = mcmc.split_rhat(std_draws)
    ess = mcmc.effective_sample_size(std_draws)
    draws = (std_draws / scale).reshape(-1, lik.dimension)
    mcse = mcmc.mcse_mean(std_draws) / scale
    diag = BayesDiagnostics(
        rhat=rhat,
        ess=ess,
        mcse=mcse,
        acceptance_rate=float(np.mean(accept)),
        converged=bool(np.all(rhat <= RHAT_WARN)),
    )
    return FitResult(
        mode="bayes",
        point=draws.mean(axis=0),
        labels=lik.labels,
        blocks=lik.blocks,
        draws=draws,
        diagnostics=diag,
    )
