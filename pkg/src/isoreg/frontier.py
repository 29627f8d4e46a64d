"""Pareto frontier of (discrepancy, hybrid norm) over the regularization path.

Between consecutive knots ``A_obs[ell] / beta[ell]`` the active set is
constant, so along each segment

    discrepancy(lam) = lam**2 * S2 + R
    norm(lam)        = N1 - lam * S2

with ``S2 = sum beta**2``, ``N1 = sum beta * A_obs`` over the active degrees
and ``R = sum A_obs**2`` over the inactive ones. Knots are sorted once and a
query is a binary search. Near a knot ``N1 - lam * S2`` cancels badly, so
norms are evaluated as ``sum beta * (A_obs - lam * beta)`` over the active
degrees; the ``N1, S2`` form is only used to invert for a target norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import _check_same_band_limit, degree_norms
from .errors import DomainError


@dataclass(frozen=True)
class InactiveConstraint:
    """Returned by the constrained solvers when the constraint does not bind.

    ``solution`` is ``"zero"`` (the bound admits the zero field) or
    ``"observed"`` (the bound admits the observation itself); ``lam`` is a
    penalty value that reproduces that solution.
    """

    solution: str
    lam: float


@dataclass(frozen=True, eq=False)
class Segment:
    lam_lo: float
    lam_hi: float
    active: np.ndarray  # sorted degrees
    s2: float
    n1: float
    r: float
    observed_norms: np.ndarray  # A_obs on the active degrees
    beta: np.ndarray  # beta on the active degrees

    def discrepancy(self, lam):
        return lam * lam * self.s2 + self.r

    def hybrid_norm(self, lam):
        lam = np.asarray(lam, dtype=np.float64)
        b = self.beta
        terms = b * np.maximum(self.observed_norms - lam[..., None] * b, 0.0)
        out = np.sum(terms, axis=-1)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class L0Step:
    lam_lo: float
    lam_hi: float
    count: int
    discrepancy_lo: float
    discrepancy_hi: float


class Frontier:
    """Closed-form regularization path for one observation and weight choice.

    Attributes
    ----------
    knots : ndarray
        Distinct values ``A_obs / beta`` over degrees with ``A_obs > 0``,
        strictly decreasing.
    lam_zero : float
        Smallest penalty for which the solution vanishes (``knots[0]``, or 0
        for an all-zero observation).
    """

    def __init__(self, a_obs, beta):
        _check_same_band_limit(a_obs, beta)
        A = degree_norms(a_obs)
        b = beta.beta
        self.observed_norms = A
        self.beta = b
        self.total_energy = float(np.sum(A**2))
        self.total_norm = float(np.sum(b * A))

        nz = np.flatnonzero(A > 0)
        ratio = A[nz] / b[nz]
        order = np.argsort(-ratio, kind="stable")
        nz, ratio = nz[order], ratio[order]
        # distinct knots, each with the degrees dropping out there
        knots, first = np.unique(-ratio, return_index=True)
        self.knots = -knots
        self._groups = np.split(nz, first[1:]) if nz.size else []

        # cumulative totals for "every degree whose ratio >= knots[k]"
        k = self.knots.size
        self._s2 = np.zeros(k + 1)
        self._n1 = np.zeros(k + 1)
        self._dropped = np.zeros(k + 1)
        for i, g in enumerate(self._groups):
            self._s2[i + 1] = self._s2[i] + np.sum(b[g] ** 2)
            self._n1[i + 1] = self._n1[i] + np.sum(b[g] * A[g])
        # residual energy of groups j.. summed smallest first
        for i in range(k - 1, -1, -1):
            self._dropped[i] = self._dropped[i + 1] + np.sum(A[self._groups[i]] ** 2)
        self._counts = np.cumsum([0] + [g.size for g in self._groups])
        self.lam_zero = float(self.knots[0]) if k else 0.0

    # ``j`` active groups <=> lam in [knots[j], knots[j-1]) with knots[-1] = inf
    def _groups_active(self, lam):
        # number of knots strictly greater than lam
        return int(np.searchsorted(-self.knots, -lam, side="left"))

    def segment(self, j):
        """Segment with the ``j`` largest knot groups active."""
        if not 0 <= j <= self.knots.size:
            raise IndexError(j)
        lo = float(self.knots[j]) if j < self.knots.size else 0.0
        hi = float(self.knots[j - 1]) if j > 0 else np.inf
        active = np.sort(np.concatenate(self._groups[:j])) if j else np.array([], dtype=int)
        return Segment(
            lam_lo=lo,
            lam_hi=hi,
            active=active,
            s2=float(self._s2[j]),
            n1=float(self._n1[j]),
            r=float(self._dropped[j]),
            observed_norms=self.observed_norms[active],
            beta=self.beta[active],
        )

    @property
    def segments(self):
        """Segments ordered by increasing lambda; the last one is all-zero."""
        return [self.segment(j) for j in range(self.knots.size, -1, -1)]

    def segment_at(self, lam):
        if lam < 0:
            raise DomainError(f"lambda must be non-negative, got {lam!r}")
        return self.segment(self._groups_active(lam))

    def discrepancy(self, lam):
        return self.segment_at(lam).discrepancy(lam)

    def hybrid_norm(self, lam):
        return self.segment_at(lam).hybrid_norm(lam)

    def l0_count(self, lam):
        return int(self.segment_at(lam).active.size)

    def evaluate(self, lams):
        """Vectorized ``(discrepancy, hybrid_norm, l0_count)`` at each lambda."""
        lams = np.asarray(lams, dtype=np.float64)
        if np.any(lams < 0):
            raise DomainError("lambda must be non-negative")
        j = np.searchsorted(-self.knots, -lams, side="left")
        disc = lams**2 * self._s2[j] + self._dropped[j]
        norm = np.zeros_like(lams)
        for k in np.unique(j):
            sel = j == k
            norm[sel] = self.segment(int(k)).hybrid_norm(lams[sel])
        return disc, norm, self._counts[j]

    def sample(self, per_segment=1):
        """Sample points along the path ordered by lambda.

        Every segment contributes its endpoints plus ``per_segment`` evenly
        spaced interior points; the path ends at ``lam_zero``.
        """
        if per_segment < 0:
            raise DomainError("per_segment must be non-negative")
        edges = np.concatenate([[0.0], self.knots[::-1]])
        pts = [edges[:1]]
        for lo, hi in zip(edges[:-1], edges[1:]):
            inner = np.linspace(lo, hi, per_segment + 2)[1:]
            pts.append(inner)
        lams = np.unique(np.concatenate(pts))
        disc, norm, count = self.evaluate(lams)
        return lams, disc, norm, count


def build_frontier(a_obs, beta):
    return Frontier(a_obs, beta)


def lambda_from_sigma(frontier, sigma):
    """Penalty whose solution has discrepancy exactly ``sigma**2``.

    Returns :class:`InactiveConstraint` with ``solution="zero"`` when
    ``sigma**2`` is at least the total energy of the observation.
    """
    if not sigma >= 0:
        raise DomainError(f"sigma must be non-negative, got {sigma!r}")
    target = float(sigma) ** 2
    if target >= frontier.total_energy:
        return InactiveConstraint("zero", frontier.lam_zero)
    if target == 0:
        return 0.0
    # discrepancy at each knot, knots in increasing order
    asc = frontier.knots[::-1]
    disc_at_knots, _, _ = frontier.evaluate(asc)
    i = int(np.searchsorted(disc_at_knots, target, side="left"))
    # lam lies in [asc[i-1], asc[i]] where the active set is that of asc[i]'s left
    j = frontier.knots.size - i
    seg = frontier.segment(j)
    lam = np.sqrt(max(target - seg.r, 0.0) / seg.s2)
    return float(min(max(lam, seg.lam_lo), frontier.knots[j - 1]))


def lambda_from_kappa(frontier, kappa):
    """Penalty whose solution has hybrid norm exactly ``kappa``.

    Returns :class:`InactiveConstraint` with ``solution="observed"`` when
    ``kappa`` is at least the hybrid norm of the observation.
    """
    if not kappa >= 0:
        raise DomainError(f"kappa must be non-negative, got {kappa!r}")
    kappa = float(kappa)
    if kappa >= frontier.total_norm:
        return InactiveConstraint("observed", 0.0)
    if kappa == 0:
        return frontier.lam_zero
    asc = frontier.knots[::-1]
    _, norm_at_knots, _ = frontier.evaluate(asc)
    # norm decreases with lambda; find first knot where norm <= kappa
    i = int(np.searchsorted(-norm_at_knots, -kappa, side="left"))
    j = frontier.knots.size - i
    seg = frontier.segment(j)
    lam = (seg.n1 - kappa) / seg.s2
    return float(min(max(lam, seg.lam_lo), frontier.knots[j - 1]))


def l0_frontier(frontier):
    """Staircase of active-degree counts, ordered by increasing lambda."""
    steps = []
    for seg in frontier.segments[:-1]:
        steps.append(
            L0Step(
                lam_lo=seg.lam_lo,
                lam_hi=seg.lam_hi,
                count=int(seg.active.size),
                discrepancy_lo=seg.discrepancy(seg.lam_lo),
                discrepancy_hi=seg.discrepancy(seg.lam_hi),
            )
        )
    return steps
