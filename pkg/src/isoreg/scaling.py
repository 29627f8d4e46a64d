"""Rescaling a regularized field after shrinkage.

Shrinkage always lowers the l2 norm. Two remedies are offered: the factor
that restores the observed norm exactly, and the factor minimizing the
discrepancy ``q(gamma) = ||a_obs - gamma * a_r||**2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import _check_same_band_limit
from .errors import DomainError, UndefinedScalingError

# relative tolerance for deciding that a_r is blockwise a non-negative multiple of a_obs
COLLINEARITY_RTOL = 1e-9


def _require_nonzero(a_r):
    if not np.any(a_r.values):
        raise UndefinedScalingError("regularized field is identically zero; scaling undefined")


def scaling_factor(a_obs, a_r):
    """``||a_obs||_2 / ||a_r||_2``."""
    _check_same_band_limit(a_obs, a_r)
    _require_nonzero(a_r)
    return float(np.linalg.norm(a_obs.values) / np.linalg.norm(a_r.values))


def _collinear_inner(a_obs, a_r):
    """Real inner product, after checking every block of ``a_r`` is ``c * a_obs`` with ``c >= 0``."""
    starts = np.arange(a_obs.band_limit + 1) ** 2
    cross = np.add.reduceat(np.conj(a_obs.values) * a_r.values, starts)
    n_obs = np.sqrt(np.add.reduceat(np.abs(a_obs.values) ** 2, starts))
    n_r = np.sqrt(np.add.reduceat(np.abs(a_r.values) ** 2, starts))
    # Cauchy-Schwarz holds with equality and a real non-negative inner product
    used = n_r > 0
    bad = used & ((n_obs == 0) | (np.abs(cross - n_obs * n_r) > COLLINEARITY_RTOL * n_obs * n_r))
    if np.any(bad):
        raise DomainError(
            "regularized coefficients are not blockwise non-negative multiples "
            f"of the observation (degrees {np.flatnonzero(bad).tolist()})"
        )
    return float(np.sum(cross.real))


def optimal_scaling(a_obs, a_r):
    """Factor minimizing ``||a_obs - gamma * a_r||**2``.

    Only defined here for ``a_r`` that is, degree by degree, a non-negative
    real multiple of ``a_obs`` (as produced by
    :func:`isoreg.regularizer.regularize`); then the inner product is real.
    """
    _check_same_band_limit(a_obs, a_r)
    _require_nonzero(a_r)
    c = _collinear_inner(a_obs, a_r)
    return c / float(np.sum(np.abs(a_r.values) ** 2))


def scaled_field(a_r, gamma):
    if not gamma > 0:
        raise DomainError(f"scaling factor must be positive, got {gamma!r}")
    return a_r.with_values(a_r.values * gamma)


@dataclass(frozen=True)
class ScalingReport:
    """Discrepancy as a quadratic in the scaling factor.

    ``q(gamma) = obs_energy - 2 * gamma * cross + gamma**2 * reg_energy``.
    """

    obs_energy: float
    reg_energy: float
    cross: float
    gamma_norm: float
    gamma_opt: float

    def q(self, gamma):
        gamma = np.asarray(gamma, dtype=np.float64)
        out = self.obs_energy - 2.0 * gamma * self.cross + gamma**2 * self.reg_energy
        return float(out) if out.ndim == 0 else out

    def curve(self, n=101, gamma_max=None):
        """``n`` evenly spaced samples of ``q`` on ``[0, gamma_max]``."""
        if gamma_max is None:
            gamma_max = 2.0 * max(self.gamma_norm, self.gamma_opt)
        g = np.linspace(0.0, gamma_max, n)
        return g, self.q(g)


def scaling_report(a_obs, a_r):
    _check_same_band_limit(a_obs, a_r)
    _require_nonzero(a_r)
    cross = _collinear_inner(a_obs, a_r)
    obs_energy = float(np.sum(np.abs(a_obs.values) ** 2))
    reg_energy = float(np.sum(np.abs(a_r.values) ** 2))
    return ScalingReport(
        obs_energy=obs_energy,
        reg_energy=reg_energy,
        cross=cross,
        gamma_norm=float(np.sqrt(obs_energy / reg_energy)),
        gamma_opt=cross / reg_energy,
    )
