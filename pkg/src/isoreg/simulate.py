"""Gaussian isotropic random fields and a Monte-Carlo isotropy harness."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import stats

from .coeffs import CoefficientSet, degree_m_arrays, degree_norms, l1_soft_threshold
from .errors import DomainError
from .regularizer import regularize
from .sht import harmonic_matrix, to_cartesian, to_spherical

# stream indices reserved for harness randomness, outside any realization range
_PROBE_STREAM = 2**32 - 2
_PROJECTION_STREAM = 2**32 - 1


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    """Angular power spectrum ``C[ell]``, the variance of each ``a[ell, m]``."""

    C: np.ndarray
    band_limit: int = field(init=False)

    def __post_init__(self):
        c = np.array(self.C, dtype=np.float64, copy=True).ravel()
        if c.size == 0:
            raise DomainError("spectrum needs at least one degree")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise DomainError("power spectrum must be finite and non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "band_limit", c.size - 1)


def cmb_like_spectrum(band_limit, amplitude=1e-6, bump=4.0, width=None):
    """Synthetic spectrum whose degree norms flatten out at high degree.

    Monopole and dipole are zero. The expected degree norm
    ``sqrt((2l+1) C_l)`` decays from ``amplitude * sqrt(1 + bump)`` at low
    degree to a flat floor ``amplitude``, loosely mimicking observed CMB
    maps, which show little decay at high degree.
    """
    L = int(band_limit)
    if width is None:
        width = max(L / 8.0, 1.0)
    ell = np.arange(L + 1, dtype=np.float64)
    energy = amplitude**2 * (1.0 + bump * np.exp(-ell / width))
    C = energy / (2.0 * ell + 1.0)
    C[:2] = 0.0
    return PowerSpectrum(C)


def _draw(C, rng):
    """One real-field coefficient set from a spectrum using ``rng``."""
    L = C.size - 1
    ell, m = degree_m_arrays(L)
    n = (L + 1) ** 2
    z = rng.standard_normal(n)
    out = np.zeros(n, dtype=np.complex128)
    # z is consumed as: one normal per (l, 0), two per (l, m>0)
    zero = m == 0
    pos = m > 0
    n0 = int(zero.sum())
    out[zero] = np.sqrt(C[ell[zero]]) * z[:n0]
    re, im = z[n0:].reshape(2, -1)
    sd = np.sqrt(C[ell[pos]] / 2.0)
    out[pos] = sd * (re + 1j * im)
    mirror = ell[pos] * ell[pos] + ell[pos] - m[pos]
    out[mirror] = np.where(m[pos] % 2 == 0, 1.0, -1.0) * np.conj(out[pos])
    return out


def realization_rng(seed, index=None):
    """Generator for realization ``index`` of an ensemble seeded by ``seed``."""
    key = [int(seed)] if index is None else [int(seed), int(index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def sample_isotropic(spectrum, seed):
    """Draw coefficients of a real Gaussian isotropic field.

    ``a[l, 0]`` is real normal with variance ``C_l``; for ``m > 0`` the real and
    imaginary parts are independent with variance ``C_l / 2`` each, and the
    negative orders follow from conjugate symmetry.
    """
    return CoefficientSet(_draw(spectrum.C, realization_rng(seed)), real_field=True)


def sample_ensemble(spectrum, realizations, seed, start=0):
    """Array of shape ``(realizations, (L+1)**2)``; row ``i`` uses stream ``(seed, start + i)``."""
    if realizations < 1:
        raise DomainError("need at least one realization")
    return np.stack(
        [_draw(spectrum.C, realization_rng(seed, start + i)) for i in range(realizations)]
    )


def estimate_spectrum(a):
    """Per-realization estimate ``A_l**2 / (2l + 1)``."""
    ell = np.arange(a.band_limit + 1)
    return PowerSpectrum(degree_norms(a) ** 2 / (2 * ell + 1))


def scaled_spectrum(spectrum):
    """``D_l = l (l + 1) C_l / (2 pi)``."""
    ell = np.arange(spectrum.band_limit + 1, dtype=np.float64)
    return ell * (ell + 1.0) * spectrum.C / (2.0 * np.pi)


# --------------------------------------------------------------------------
# isotropy harness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    spectrum: PowerSpectrum
    realizations: int
    seed: int

    def __post_init__(self):
        if self.realizations < 1:
            raise DomainError("realizations must be >= 1")


@dataclass(frozen=True)
class KSCheck:
    label: str
    statistic: float
    pvalue: float
    passed: bool


@dataclass
class IsotropyReport:
    seed: int
    realizations: int
    lam: float
    thresholder: str
    alpha: float
    checks: list
    skipped: bool = False

    @property
    def passed(self):
        return self.skipped or all(c.passed for c in self.checks)

    @property
    def min_pvalue(self):
        return min((c.pvalue for c in self.checks), default=float("nan"))

    def lines(self):
        out = [
            f"seed={self.seed}",
            f"realizations={self.realizations}",
            f"lambda={self.lam!r}",
            f"thresholder={self.thresholder}",
            f"significance={self.alpha!r}",
            f"tests={len(self.checks)}",
        ]
        if self.skipped:
            out.append("verdict=SKIPPED (degenerate all-zero ensemble)")
            return out
        for c in self.checks:
            out.append(
                f"{c.label}: D={c.statistic:.6f} p={c.pvalue:.6g} {'pass' if c.passed else 'FAIL'}"
            )
        out.append(f"verdict={'PASS' if self.passed else 'FAIL'}")
        return out


def _threshold_rows(rows, beta, lam, thresholder):
    out = np.empty_like(rows)
    for i, row in enumerate(rows):
        a = CoefficientSet(row, real_field=True)
        if thresholder == "group":
            out[i] = regularize(a, beta, lam).coefficients.values
        elif thresholder == "l1":
            out[i] = l1_soft_threshold(a, lam).values
        else:
            raise DomainError(f"unknown thresholder {thresholder!r}")
    return out


def default_probes(n, seed=0):
    """``n`` fixed pseudo-random probe directions as ``(theta, phi)`` arrays."""
    rng = realization_rng(seed, _PROBE_STREAM)
    v = rng.standard_normal((n, 3))
    return to_spherical(v)


def isotropy_test(spec, beta, lam, rho, probes, thresholder="group", alpha=0.01):
    """Compare regularized field values at ``probes`` and at ``rho @ probes``.

    Two independent ensembles of ``spec.realizations`` fields are drawn from
    the streams ``(seed, 0..N-1)`` and ``(seed, N..2N-1)``; the first is
    evaluated at the probes, the second at the rotated probes. Each probe
    marginal, and a fixed random projection of each probe pair, is compared
    with a two-sample Kolmogorov-Smirnov test. The overall level ``alpha``
    is Bonferroni-split across all tests.

    ``thresholder`` selects the degree-block regularizer (``"group"``) or
    the coordinate-dependent per-coefficient baseline (``"l1"``).
    """
    theta, phi = (np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in probes)
    if theta.size < 2:
        raise DomainError("need at least two probe points")
    N = spec.realizations
    L = spec.spectrum.band_limit
    if beta.band_limit != L:
        raise DomainError("weights and spectrum band limits differ")

    pts = to_cartesian(theta, phi)
    rth, rph = to_spherical(rho.apply(pts))
    Y = harmonic_matrix(L, theta, phi)
    Y_rot = harmonic_matrix(L, rth, rph)

    first = _threshold_rows(sample_ensemble(spec.spectrum, N, spec.seed), beta, lam, thresholder)
    second = _threshold_rows(sample_ensemble(spec.spectrum, N, spec.seed, start=N), beta, lam, thresholder)
    x = (first @ Y.T).real
    y = (second @ Y_rot.T).real

    report = IsotropyReport(spec.seed, N, float(lam), thresholder, alpha, [])
    if not np.any(x) and not np.any(y):
        report.skipped = True
        return report

    pairs = list(combinations(range(theta.size), 2))
    n_tests = theta.size + len(pairs)
    level = alpha / n_tests
    proj_rng = realization_rng(spec.seed, _PROJECTION_STREAM)
    for i in range(theta.size):
        res = stats.ks_2samp(x[:, i], y[:, i])
        report.checks.append(KSCheck(f"probe[{i}]", float(res.statistic), float(res.pvalue), res.pvalue > level))
    for i, j in pairs:
        w = proj_rng.standard_normal(2)
        w /= np.linalg.norm(w)
        res = stats.ks_2samp(x[:, [i, j]] @ w, y[:, [i, j]] @ w)
        report.checks.append(
            KSCheck(f"pair[{i},{j}]", float(res.statistic), float(res.pvalue), res.pvalue > level)
        )
    return report
