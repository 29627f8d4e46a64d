"""Closed-form degree-block soft thresholding.

The penalized problem

    minimize  0.5 * ||a - a_obs||_2**2 + lam * sum_ell beta[ell] * A[ell]

separates over degrees. Each degree block is either discarded entirely
(when ``A_obs[ell] <= lam * beta[ell]``) or shrunk towards zero by the real
factor ``1 - lam * beta[ell] / A_obs[ell]``. Because the factor depends on the
block only through its Euclidean norm, the map commutes with any unitary
transform acting inside a block, which is what keeps the result isotropic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import (
    CoefficientSet,
    DegreeWeights,
    _check_same_band_limit,
    degree_index,
    degree_norms,
    discrepancy,
    hybrid_norm,
)
from .errors import DomainError


@dataclass(frozen=True, eq=False)
class RegularizationResult:
    lam: float
    beta: DegreeWeights
    observed: CoefficientSet
    observed_norms: np.ndarray
    active: np.ndarray  # boolean mask over degrees
    shrink: np.ndarray  # alpha_ell, zero on inactive degrees
    coefficients: CoefficientSet
    norms: np.ndarray
    hybrid_norm_value: float
    discrepancy_value: float

    @property
    def active_set(self):
        return np.flatnonzero(self.active)

    @property
    def alpha(self):
        """Shrink factors keyed by active degree."""
        return {int(ell): float(self.shrink[ell]) for ell in self.active_set}

    @property
    def sparsity(self):
        """Fraction of the ``(L+1)**2`` regularized coefficients equal to zero."""
        return self.coefficients.zero_fraction()

    @property
    def l2_norm_ratio(self):
        """``||a_r||_2 / ||a_obs||_2`` (nan when the observation is zero)."""
        obs = np.sqrt(np.sum(self.observed_norms**2))
        if obs == 0:
            return float("nan")
        return float(np.sqrt(np.sum(self.norms**2)) / obs)

    def summary(self):
        return {
            "lambda": self.lam,
            "sparsity": self.sparsity,
            "active_degrees": int(self.active.sum()),
            "hybrid_norm": self.hybrid_norm_value,
            "discrepancy": self.discrepancy_value,
            "l2_norm_ratio": self.l2_norm_ratio,
        }


def active_mask(observed_norms, beta, lam):
    """Degrees with ``A_obs / beta > lam``; zero blocks are never active.

    The ratio form is the one the frontier knots use, so both agree exactly
    when ``lam`` sits on a knot.
    """
    return (observed_norms / beta > lam) & (observed_norms > 0)


def regularize(a_obs, beta, lam):
    """Solve the penalized problem exactly for a single ``lam >= 0``."""
    _check_same_band_limit(a_obs, beta)
    lam = float(lam)
    if not lam >= 0:
        raise DomainError(f"lambda must be non-negative, got {lam!r}")
    b = beta.beta
    A = degree_norms(a_obs)
    active = active_mask(A, b, lam)

    shrink = np.zeros_like(A)
    reg_norms = np.where(active, np.maximum(A - lam * b, 0.0), 0.0)
    shrink[active] = reg_norms[active] / A[active]

    coeffs = a_obs.with_values(a_obs.values * shrink[degree_index(a_obs.band_limit)])

    norm_value = float(np.sum(b[active] * reg_norms[active]))
    disc_value = float(lam**2 * np.sum(b[active] ** 2) + np.sum(A[~active] ** 2))
    return RegularizationResult(
        lam=lam,
        beta=beta,
        observed=a_obs,
        observed_norms=A,
        active=active,
        shrink=shrink,
        coefficients=coeffs,
        norms=reg_norms,
        hybrid_norm_value=norm_value,
        discrepancy_value=disc_value,
    )


def objective(a, a_obs, beta, lam):
    """``0.5 * discrepancy(a, a_obs) + lam * hybrid_norm(a, beta)``."""
    _check_same_band_limit(a, a_obs)
    return 0.5 * discrepancy(a, a_obs) + lam * hybrid_norm(a, beta)


@dataclass(frozen=True)
class ErrorBound:
    lam_max: float
    ell_star: int

    @property
    def lam_applied(self):
        """The value the command line uses when asked to apply the bound."""
        return 0.999 * self.lam_max


def lambda_bound_for_error(a_obs, beta, epsilon):
    """Largest open bound on ``lam`` that keeps ``||a_obs - a_r||_2 < epsilon``.

    The tail condition is evaluated on the realized degree norms:
    ``ell_star`` is the smallest degree whose tail energy
    ``sum_{ell > ell_star} A_obs[ell]**2`` is at most ``epsilon**2 / 4``, and
    the bound is ``epsilon / (2 * sqrt(sum_{ell <= ell_star} beta[ell]**2))``.
    """
    _check_same_band_limit(a_obs, beta)
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    sq = degree_norms(a_obs) ** 2
    # tail[k] = sum over ell > k
    tail = np.concatenate([np.cumsum(sq[::-1])[::-1][1:], [0.0]])
    ell_star = int(np.flatnonzero(tail <= epsilon**2 / 4)[0])
    lam_max = epsilon / (2.0 * np.sqrt(np.sum(beta.beta[: ell_star + 1] ** 2)))
    return ErrorBound(lam_max=float(lam_max), ell_star=ell_star)
