"""Quadratic centrality polynomials fitted by regularized least squares.

The minimizer of ||z - M b||^2 + alpha^2 ||b||^2 over a degree-2
Vandermonde system is solved through an orthogonal factorization of the
augmented system [M; alpha*I] rather than by inverting the normal
equations, which is exactly what the raw-Vandermonde condition numbers
punish. Sample times are centered before building M (this changes the
conditioning, not the minimizer) and the coefficients are mapped back to
the absolute-time basis afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .centrality import CentralitySeries
from .errors import ConditioningError, InsufficientDataError, ValidationError

POLY_DEGREE = 2

# Effective singularity cutoff: a raw Gram condition number above this is
# treated as rank deficiency when no regularization is requested.
_SINGULAR_KAPPA = 1e12

DEFAULT_KAPPA_CAP = 1e6
ALPHA_GRID = (0.0,) + tuple(10.0**k for k in range(-6, 1))


def vandermonde(times: np.ndarray) -> np.ndarray:
    """T x 3 design matrix with rows (1, t, t^2)."""
    t = np.asarray(times, dtype=float)
    return np.column_stack([np.ones_like(t), t, t * t])


def gram_condition(m: np.ndarray, alpha: float) -> float:
    """Condition number of MᵀM + alpha^2 I (ratio of extreme eigenvalues)."""
    gram = m.T @ m
    eig = np.linalg.eigvalsh(gram)
    lo = max(float(eig[0]), 0.0) + alpha * alpha
    hi = float(eig[-1]) + alpha * alpha
    if lo <= 0.0:
        return float("inf")
    return hi / lo


class FixedAlpha:
    """Always use one regularization magnitude."""

    def __init__(self, alpha: float):
        if alpha < 0:
            raise ValidationError(f"alpha must be non-negative, got {alpha}")
        self.alpha = alpha

    def select(self, times: np.ndarray) -> float:
        return self.alpha


class GridSearchAlpha:
    """Smallest grid alpha whose regularized condition number meets a cap.

    The sample-time grid repeats across agents and windows of equal
    length, so selections are cached per grid. Falls back to the largest
    grid value when no candidate meets the cap.
    """

    def __init__(self, cap: float = DEFAULT_KAPPA_CAP, grid=ALPHA_GRID):
        if cap <= 1:
            raise ValidationError(f"condition-number cap must exceed 1, got {cap}")
        self.cap = cap
        self.grid = tuple(sorted(grid))
        self._cache: dict[tuple, float] = {}

    def select(self, times: np.ndarray) -> float:
        key = tuple(np.round(np.asarray(times, dtype=float), 12).tolist())
        if key in self._cache:
            return self._cache[key]
        m = vandermonde(np.asarray(times, dtype=float))
        chosen = self.grid[-1]
        for alpha in self.grid:
            if gram_condition(m, alpha) <= self.cap:
                chosen = alpha
                break
        self._cache[key] = chosen
        return chosen


DEFAULT_ALPHA_POLICY = GridSearchAlpha()


@dataclass(frozen=True)
class CentralityPolynomial:
    """zeta(t) = b0 + b1*t + b2*t^2 over a closed time domain (seconds)."""

    coefficients: tuple[float, float, float]
    domain: tuple[float, float]
    alpha: float = 0.0
    condition_number: float = 1.0
    degree: int = POLY_DEGREE

    def evaluate(self, t):
        b0, b1, b2 = self.coefficients
        t = np.asarray(t, dtype=float)
        out = b0 + b1 * t + b2 * t * t
        return float(out) if out.ndim == 0 else out


def fit_samples(times, values, alpha_policy=None) -> CentralityPolynomial:
    """Fit a quadratic to (time, value) samples.

    ``times`` are absolute seconds. Raises InsufficientDataError below 3
    samples and ConditioningError when the system is rank deficient and
    the policy selected alpha = 0.
    """
    t = np.asarray(times, dtype=float)
    z = np.asarray(values, dtype=float)
    if t.shape != z.shape or t.ndim != 1:
        raise ValidationError("times and values must be 1-D arrays of equal length")
    if t.size < POLY_DEGREE + 1:
        raise InsufficientDataError(
            f"need at least {POLY_DEGREE + 1} samples for a quadratic fit, got {t.size}"
        )
    policy = alpha_policy if alpha_policy is not None else DEFAULT_ALPHA_POLICY

    t_bar = float(t.mean())
    tc = t - t_bar
    m = vandermonde(tc)
    alpha = float(policy.select(tc))
    kappa = gram_condition(m, alpha)
    if alpha == 0.0 and kappa > _SINGULAR_KAPPA:
        raise ConditioningError(
            "design matrix is rank deficient with alpha = 0; "
            "select a regularized alpha policy"
        )

    if alpha == 0.0:
        beta_c, *_ = np.linalg.lstsq(m, z, rcond=None)
    else:
        a_aug = np.vstack([m, alpha * np.eye(POLY_DEGREE + 1)])
        b_aug = np.concatenate([z, np.zeros(POLY_DEGREE + 1)])
        beta_c, *_ = np.linalg.lstsq(a_aug, b_aug, rcond=None)

    c0, c1, c2 = (float(b) for b in beta_c)
    # zeta(t) = c0 + c1*(t - t_bar) + c2*(t - t_bar)^2, expanded in t:
    beta = (
        c0 - c1 * t_bar + c2 * t_bar * t_bar,
        c1 - 2.0 * c2 * t_bar,
        c2,
    )
    return CentralityPolynomial(
        coefficients=beta,
        domain=(float(t.min()), float(t.max())),
        alpha=alpha,
        condition_number=kappa,
    )


def fit(
    series: CentralitySeries, alpha_policy=None, frame_rate_hz: float = 1.0
) -> CentralityPolynomial:
    """Fit a centrality series sampled at frame indices.

    Sample times are frame_index / frame_rate_hz seconds.
    """
    if frame_rate_hz <= 0:
        raise ValidationError(f"frame_rate_hz must be positive, got {frame_rate_hz}")
    times = [idx / frame_rate_hz for idx, _ in series.values]
    values = [v for _, v in series.values]
    return fit_samples(times, values, alpha_policy)


def derivative(poly: CentralityPolynomial, order: int) -> CentralityPolynomial:
    """Analytic first or second derivative, same domain and provenance."""
    b0, b1, b2 = poly.coefficients
    if order == 1:
        coeff = (b1, 2.0 * b2, 0.0)
    elif order == 2:
        coeff = (2.0 * b2, 0.0, 0.0)
    else:
        raise ValidationError(f"derivative order must be 1 or 2, got {order}")
    return replace(poly, coefficients=coeff)


def condition_diagnostics(t_count: int, alpha: float) -> tuple[float, float]:
    """(kappa_raw, kappa_regularized) of the uncentered Gram system.

    Uses the canonical sample times t = 0..T-1 that make the raw
    Vandermonde Gram matrix grow ill-conditioned with T.
    """
    if t_count < POLY_DEGREE + 1:
        raise InsufficientDataError(
            f"need at least {POLY_DEGREE + 1} samples, got {t_count}"
        )
    if alpha < 0:
        raise ValidationError(f"alpha must be non-negative, got {alpha}")
    m = vandermonde(np.arange(t_count, dtype=float))
    return gram_condition(m, 0.0), gram_condition(m, alpha)
