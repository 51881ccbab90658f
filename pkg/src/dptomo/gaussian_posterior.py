"""Gaussian belief over the free probe coefficients.

The working representation is the natural one,

    w(c) ~ exp(-c.A.c + b.c),

so a measurement update is a rank-one addition to A and a shift of b,
and moments follow from Sigma = (2A)^-1, mean = Sigma.b.  A stays
symmetric positive definite throughout; everything here treats
posteriors as immutable values and returns new ones.

``exact_moments_oracle`` integrates the true binomial-likelihood
posterior on a dense grid (dimension 1 or 2 only).  It exists to test
the Gaussian approximation against ground truth, not for production.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import erf, gammaln

SIGMA2_FLOOR = 1e-15


@dataclass(frozen=True)
class GaussianPosterior:
    """Natural parameters (A, b) of the coefficient belief."""

    A: np.ndarray
    b: np.ndarray

    @property
    def dim(self):
        return self.b.size


def init_prior(dim, epsilon=1e-6):
    """Nearly flat prior centered on the uniform mixture.

    A = epsilon * I and b = 2 * epsilon * (1/M, ..., 1/M) with
    M = dim + 1, so the prior mean is the uniform coefficient vector and
    the prior variance 1/(2 epsilon) per axis is effectively infinite.
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    m = dim + 1
    return GaussianPosterior(
        A=epsilon * np.eye(dim),
        b=np.full(dim, 2.0 * epsilon / m),
    )


def beta_moments(frequency, n_shots, strict_paper=False):
    """Mean and variance summarizing one binomial record of F = n/N.

    The default is the Beta(n + 1, N - n + 1) posterior: mu = (NF+1)/(N+2)
    and sigma^2 = (NF+1)(N(1-F)+1) / ((N+2)^2 (N+3)).  With
    ``strict_paper`` the variance numerator uses NF instead of NF+1,
    which vanishes at F = 0, so it is floored at 1e-12 to keep the
    update defined.
    """
    n = float(n_shots)
    f = float(frequency)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"frequency {f} outside [0, 1]")
    mu = (n * f + 1.0) / (n + 2.0)
    denom = (n + 2.0) ** 2 * (n + 3.0)
    if strict_paper:
        sigma2 = max((n * f) * (n * (1.0 - f) + 1.0) / denom, 1e-12)
    else:
        sigma2 = (n * f + 1.0) * (n * (1.0 - f) + 1.0) / denom
    return mu, sigma2


def bayes_update(post, pattern_row, frequency, n_shots, strict_paper=False):
    """Absorb one measured setting into the belief.

    ``pattern_row`` is the full frequency row (f_1 ... f_M) of the chosen
    setting.  Eliminating c_M makes the predicted probability affine,
    P(c) = g.c + f_M with g_m = f_m - f_M, and a Gaussian summary of the
    record then adds g g^T / (2 sigma^2) to A and shifts b.
    """
    row = np.asarray(pattern_row, dtype=float)
    if row.size != post.dim + 1:
        raise ValueError(f"pattern row has {row.size} entries, expected {post.dim + 1}")
    g = row[:-1] - row[-1]
    mu, sigma2 = beta_moments(frequency, n_shots, strict_paper=strict_paper)
    sigma2 = max(sigma2, SIGMA2_FLOOR)
    return GaussianPosterior(
        A=post.A + np.outer(g, g) / (2.0 * sigma2),
        b=post.b + (mu - row[-1]) * g / sigma2,
    )


def moments(post):
    """Mean vector and covariance matrix of the belief.

    Solved through the Cholesky factor of A, so a non positive definite
    A raises instead of silently returning garbage.
    """
    try:
        factor = cho_factor(post.A)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"A is not positive definite: {exc}") from exc
    cov = cho_solve(factor, np.eye(post.dim)) / 2.0
    mean = cho_solve(factor, post.b) / 2.0
    return mean, cov


def gaussian_outside_mass(post, lower=0.0, upper=1.0):
    """Posterior mass outside the box [lower, upper]^dim.

    Exact in one dimension.  In higher dimensions it is computed from
    the per-axis marginals as 1 - prod(inside_i), which ignores
    correlations but is the quantity the approximation checks gate on.
    """
    mean, cov = moments(post)
    sd = np.sqrt(np.diag(cov))
    z_hi = (upper - mean) / (sd * np.sqrt(2.0))
    z_lo = (lower - mean) / (sd * np.sqrt(2.0))
    inside = 0.5 * (erf(z_hi) - erf(z_lo))
    return float(1.0 - np.prod(inside))


def exact_moments_oracle(pattern_rows, click_counts, n_shots, epsilon,
                         n_points=2001, box=(-1.0, 2.0)):
    """Grid-integrated moments of the exact binomial posterior.

    Supports one or two free coefficients and at least 2001 points per
    axis.  The prior matches ``init_prior``; each record contributes the
    true binomial likelihood with P(c) = g.c + f_M, and any grid point
    where some P leaves [0, 1] carries zero likelihood.

    Returns (mean, covariance, log_norm); log_norm is unnormalized and
    only useful for relative comparisons.
    """
    rows = np.atleast_2d(np.asarray(pattern_rows, dtype=float))
    counts = np.asarray(click_counts, dtype=float)
    if counts.size != rows.shape[0]:
        raise ValueError("one click count per pattern row required")
    dim = rows.shape[1] - 1
    if dim not in (1, 2):
        raise ValueError("oracle supports dim 1 or 2 only")
    if n_points < 2001:
        raise ValueError("use at least 2001 grid points per axis")
    n = float(n_shots)
    g = rows[:, :-1] - rows[:, -1:]
    f_last = rows[:, -1]
    axis = np.linspace(box[0], box[1], n_points)
    if dim == 1:
        pts = axis[:, None]
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
    m0 = 1.0 / (dim + 1)
    logw = -epsilon * (pts ** 2).sum(axis=1) + 2.0 * epsilon * m0 * pts.sum(axis=1)
    for j in range(rows.shape[0]):
        p = pts @ g[j] + f_last[j]
        ok = (p > 0.0) & (p < 1.0)
        term = np.full(pts.shape[0], -np.inf)
        kj = counts[j]
        term[ok] = (
            gammaln(n + 1.0) - gammaln(kj + 1.0) - gammaln(n - kj + 1.0)
            + kj * np.log(p[ok]) + (n - kj) * np.log1p(-p[ok])
        )
        logw = logw + term
    peak = logw.max()
    if not np.isfinite(peak):
        raise ValueError("posterior vanishes everywhere on the grid; widen the box")
    w = np.exp(logw - peak)
    # trapezoid weights on the product grid
    wt1 = np.ones(n_points)
    wt1[0] = wt1[-1] = 0.5
    if dim == 1:
        wt = wt1
    else:
        wt = np.outer(wt1, wt1).ravel()
    z = float((w * wt).sum())
    mean = (pts * (w * wt)[:, None]).sum(axis=0) / z
    centered = pts - mean
    cov = (centered.T * (w * wt)) @ centered / z
    h = axis[1] - axis[0]
    log_norm = peak + np.log(z) + dim * np.log(h)
    return mean, cov, log_norm
