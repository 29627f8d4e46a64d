"""Independent reference computations used to freeze expected values."""

import numpy as np
from scipy.optimize import brentq


def blockwise_line_search(a_obs, beta, lam):
    """Minimize the penalized objective by a 1-D search per degree block.

    Within a block the minimizer is ``t * block`` for some ``t`` in [0, 1];
    the scalar problem ``0.5 (1-t)^2 A^2 + lam beta t A`` is solved by root
    finding on its derivative, independently of any closed form.
    """
    out = np.zeros_like(a_obs.values)
    for ell in range(a_obs.band_limit + 1):
        blk = a_obs.block(ell)
        A = np.sqrt(np.sum(np.abs(blk) ** 2))
        if A == 0:
            continue
        b = beta.beta[ell]

        def dh(t):
            return -(1.0 - t) * A * A + lam * b * A

        if dh(0.0) >= 0:
            t = 0.0
        else:
            t = brentq(dh, 0.0, 1.0, xtol=1e-15, rtol=8.9e-16)
        out[ell * ell : (ell + 1) ** 2] = t * blk
    return out


def brute_objective(values, obs, beta, lam):
    """Objective by explicit double loop over (ell, m)."""
    L = int(round(np.sqrt(len(obs)))) - 1
    total = 0.0
    for ell in range(L + 1):
        sq = 0.0
        for m in range(-ell, ell + 1):
            i = ell * ell + ell + m
            total += 0.5 * abs(values[i] - obs[i]) ** 2
            sq += abs(values[i]) ** 2
        total += lam * beta[ell] * np.sqrt(sq)
    return total


def naive_synthesis(a, theta, phi):
    """Direct double sum using scipy's spherical harmonics."""
    from scipy.special import sph_harm_y

    L = a.band_limit
    out = np.zeros(np.shape(theta), dtype=complex)
    for ell in range(L + 1):
        for m in range(-ell, ell + 1):
            out += a[ell, m] * sph_harm_y(ell, m, theta, phi)
    return out
