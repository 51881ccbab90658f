"""Choosing the next measurement setting and deciding when to stop.

A candidate setting k with bank pattern row f_k predicts the signal
probability P(c) = g_k . c + f_{kM}, a scalar Gaussian under the current
belief.  Mixing the binomial outcome likelihood over that Gaussian with
Gauss-Hermite quadrature gives the predictive distribution of the count
n; for each hypothetical n the posterior trace shrinks by the rank-one
amount Sg.Sg / (sigma^2(n) + g.Sg), so the predicted average variance is
a weighted sum of closed forms and never requires refitting.  The
setting minimizing that prediction is measured next.  Scoring reads the
belief and the bank and touches no randomness.

The run stops once the predicted improvement stays within a small
relative band of the current variance for several consecutive steps.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .gaussian_posterior import moments

_DEFAULT_NODES = 32
_P_CLIP = 1e-12


@dataclass(frozen=True)
class CandidateScore:
    """One candidate setting with its predicted average variance."""

    setting_index: int
    predicted_variance: float


@dataclass(frozen=True)
class StoppingConfig:
    eta: float = 0.01
    consecutive: int = 3

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if self.consecutive < 1:
            raise ValueError("consecutive must be at least 1")


def posterior_total_variance(post):
    """Total coefficient variance, the trace of Sigma = (2A)^-1."""
    _, cov = moments(post)
    return float(np.trace(cov))


def _outcome_sigma2(n_shots, strict_paper):
    n = np.arange(n_shots + 1, dtype=float)
    denom = (n_shots + 2.0) ** 2 * (n_shots + 3.0)
    if strict_paper:
        return np.maximum(n * (n_shots - n + 1.0) / denom, 1e-12)
    return (n + 1.0) * (n_shots - n + 1.0) / denom


def _predictive_pmf(m_p, s_p, n_shots, n_nodes):
    # Gauss-Hermite in the standardized variable: P = m_p + sqrt(2) s_p x
    x, w = np.polynomial.hermite.hermgauss(n_nodes)
    w = w / np.sqrt(np.pi)
    p_nodes = np.clip(m_p + np.sqrt(2.0) * s_p * x, _P_CLIP, 1.0 - _P_CLIP)
    n = np.arange(n_shots + 1, dtype=float)
    log_comb = gammaln(n_shots + 1.0) - gammaln(n + 1.0) - gammaln(n_shots - n + 1.0)
    log_pmf = (
        log_comb[None, :]
        + np.log(p_nodes)[:, None] * n[None, :]
        + np.log1p(-p_nodes)[:, None] * (n_shots - n)[None, :]
    )
    pmf = w @ np.exp(log_pmf)
    return pmf / pmf.sum()


def predictive_outcome_dist(post, pattern_row, n_shots, n_nodes=_DEFAULT_NODES):
    """Distribution of the click count if this setting were measured now.

    Returns a length n_shots + 1 probability vector.  The Gaussian
    predictive P is clipped into [1e-12, 1 - 1e-12] before entering the
    binomial likelihood and the result is renormalized, so mass outside
    the meaningful probability range is folded back in.
    """
    row = np.asarray(pattern_row, dtype=float)
    if row.size != post.dim + 1:
        raise ValueError(f"pattern row has {row.size} entries, expected {post.dim + 1}")
    mean, cov = moments(post)
    g = row[:-1] - row[-1]
    m_p = float(g @ mean + row[-1])
    s_p = float(np.sqrt(max(g @ cov @ g, 0.0)))
    return _predictive_pmf(m_p, s_p, n_shots, n_nodes)


def predicted_average_variance(post, pattern_row, n_shots, n_nodes=_DEFAULT_NODES,
                               strict_paper=False):
    """Expected posterior variance after measuring one candidate setting."""
    row = np.asarray(pattern_row, dtype=float)
    mean, cov = moments(post)
    return _score_one(mean, cov, float(np.trace(cov)), row, n_shots, n_nodes, strict_paper)


def _score_one(mean, cov, total_var, row, n_shots, n_nodes, strict_paper):
    g = row[:-1] - row[-1]
    sg = cov @ g
    g_sg = float(g @ sg)
    m_p = float(g @ mean + row[-1])
    pmf = _predictive_pmf(m_p, np.sqrt(max(g_sg, 0.0)), n_shots, n_nodes)
    var_n = total_var - (sg @ sg) / (_outcome_sigma2(n_shots, strict_paper) + g_sg)
    return float(pmf @ var_n)


def score_candidates(post, bank_frequencies, n_shots, exclude=(),
                     n_nodes=_DEFAULT_NODES, strict_paper=False):
    """Predicted average variance for every not-yet-measured setting.

    ``bank_frequencies`` is the full K x M frequency table.  Rows listed
    in ``exclude`` are skipped (measure each setting at most once).
    Pure function of its inputs.
    """
    freqs = np.asarray(bank_frequencies, dtype=float)
    if freqs.ndim != 2 or freqs.shape[1] != post.dim + 1:
        raise ValueError(f"frequency table shape {freqs.shape} does not fit dim {post.dim}")
    mean, cov = moments(post)
    total_var = float(np.trace(cov))
    skip = set(int(k) for k in exclude)
    scores = []
    for k in range(freqs.shape[0]):
        if k in skip:
            continue
        delta = _score_one(mean, cov, total_var, freqs[k], n_shots, n_nodes, strict_paper)
        scores.append(CandidateScore(setting_index=k, predicted_variance=delta))
    return scores


def select_next(post, bank_frequencies, n_shots, measured=(),
                n_nodes=_DEFAULT_NODES, strict_paper=False):
    """Greedy choice: the unmeasured setting with the smallest prediction.

    Ties resolve to the lowest setting index.  Raises if every setting
    has been measured already.
    """
    scores = score_candidates(post, bank_frequencies, n_shots, exclude=measured,
                              n_nodes=n_nodes, strict_paper=strict_paper)
    if not scores:
        raise ValueError("no unmeasured settings remain")
    best = scores[0]
    for s in scores[1:]:
        if s.predicted_variance < best.predicted_variance:
            best = s
    return best


def stopping_check(history, config=None):
    """True when the last few predictions sat inside the variance band.

    ``history`` holds (predicted_variance, current_variance) pairs in
    step order; the check needs |delta - var| < eta * var for the final
    ``consecutive`` entries.
    """
    if config is None:
        config = StoppingConfig()
    if len(history) < config.consecutive:
        return False
    for delta, var in list(history)[-config.consecutive:]:
        if not abs(delta - var) < config.eta * var:
            return False
    return True
