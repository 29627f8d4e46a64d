"""Band-limited spherical-harmonic coefficient containers and degree norms.

Coefficients are stored densely in the order
``a[0,0], a[1,-1], a[1,0], a[1,1], a[2,-2], ...`` so that ``(ell, m)`` lives
at flat position ``ell**2 + ell + m``. Each degree therefore occupies the
contiguous slice ``ell**2 : (ell + 1)**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError


def flat_index(ell, m):
    """Flat position of ``(ell, m)``; works elementwise on arrays."""
    ell = np.asarray(ell)
    m = np.asarray(m)
    if np.any(ell < 0) or np.any(np.abs(m) > ell):
        raise DomainError("require ell >= 0 and |m| <= ell")
    idx = ell * ell + ell + m
    return int(idx) if idx.ndim == 0 else idx


def unflatten(index):
    """Inverse of :func:`flat_index`."""
    index = np.asarray(index)
    if np.any(index < 0):
        raise DomainError("flat index must be non-negative")
    ell = np.floor(np.sqrt(index)).astype(int)
    # guard against sqrt rounding for large perfect squares
    ell = np.where((ell + 1) ** 2 <= index, ell + 1, ell)
    ell = np.where(ell**2 > index, ell - 1, ell)
    m = index - ell * ell - ell
    if ell.ndim == 0:
        return int(ell), int(m)
    return ell, m


def degree_m_arrays(band_limit):
    """Arrays of ``ell`` and ``m`` for every flat position up to ``band_limit``."""
    return unflatten(np.arange((band_limit + 1) ** 2))


def degree_index(band_limit):
    """Degree of each flat position, i.e. ``ell`` repeated ``2*ell + 1`` times."""
    ells = np.arange(band_limit + 1)
    return np.repeat(ells, 2 * ells + 1)


def size_to_band_limit(n):
    L = int(round(np.sqrt(n))) - 1
    if L < 0 or (L + 1) ** 2 != n:
        raise DimensionError(f"{n} is not a perfect square (L+1)^2")
    return L


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Complex coefficients ``a[ell, m]`` for ``0 <= ell <= L``.

    ``real_field`` flags a set that represents a real-valued field; such a set
    satisfies ``a[ell, -m] == (-1)**m * conj(a[ell, m])``.
    """

    values: np.ndarray
    real_field: bool = False
    band_limit: int = field(init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128, copy=True).ravel()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "band_limit", size_to_band_limit(vals.size))

    def __eq__(self, other):
        if not isinstance(other, CoefficientSet):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    __hash__ = None

    @classmethod
    def zeros(cls, band_limit, real_field=False):
        return cls(np.zeros((band_limit + 1) ** 2, dtype=np.complex128), real_field)

    @classmethod
    def from_dict(cls, entries, band_limit, real_field=False):
        """Build from a ``{(ell, m): value}`` mapping; missing entries are zero."""
        vals = np.zeros((band_limit + 1) ** 2, dtype=np.complex128)
        for (ell, m), v in entries.items():
            if ell > band_limit:
                raise DimensionError(f"degree {ell} exceeds band limit {band_limit}")
            vals[flat_index(ell, m)] = v
        return cls(vals, real_field)

    def __len__(self):
        return self.values.size

    def __getitem__(self, key):
        ell, m = key
        return self.values[flat_index(ell, m)]

    def block(self, ell):
        """The ``2*ell + 1`` coefficients of degree ``ell``, ordered by ``m``."""
        if not 0 <= ell <= self.band_limit:
            raise DimensionError(f"degree {ell} outside 0..{self.band_limit}")
        return self.values[ell * ell : (ell + 1) ** 2]

    def blocks(self):
        return [self.block(ell) for ell in range(self.band_limit + 1)]

    def with_values(self, values, real_field=None):
        """New set with the same flags but different entries."""
        return CoefficientSet(values, self.real_field if real_field is None else real_field)

    def is_conjugate_symmetric(self, rtol=1e-12, atol=0.0):
        ell, m = degree_m_arrays(self.band_limit)
        mirror = self.values[ell * ell + ell - m]
        expected = np.where(m % 2 == 0, 1.0, -1.0) * np.conj(mirror)
        scale = max(np.abs(self.values).max(initial=0.0), 1.0)
        return bool(np.all(np.abs(self.values - expected) <= atol + rtol * scale))

    def l2_norm(self):
        return float(np.linalg.norm(self.values))

    def zero_fraction(self):
        return float(np.count_nonzero(self.values == 0) / self.values.size)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DegreeWeights:
    """Positive per-degree weights ``beta[ell]`` normalized so ``beta[0] == 1``."""

    beta: np.ndarray
    band_limit: int = field(init=False)

    def __post_init__(self):
        b = np.array(self.beta, dtype=np.float64, copy=True).ravel()
        if b.size == 0:
            raise DimensionError("weights need at least one degree")
        if not np.all(np.isfinite(b)) or np.any(b <= 0):
            raise DomainError("degree weights must be finite and strictly positive")
        if abs(b[0] - 1.0) > 1e-12:
            raise DomainError(f"beta_0 must equal 1, got {b[0]!r}")
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "band_limit", b.size - 1)

    @classmethod
    def constant(cls, band_limit):
        return cls(np.ones(band_limit + 1))

    @classmethod
    def powerlaw(cls, band_limit, p):
        """``beta[ell] = ell**(-p)`` for ``ell >= 1`` and ``beta[0] = 1``."""
        ell = np.arange(band_limit + 1, dtype=np.float64)
        ell[0] = 1.0
        return cls(ell ** (-float(p)))

    def __getitem__(self, ell):
        return self.beta[ell]


def _check_same_band_limit(x, y):
    if x.band_limit != y.band_limit:
        raise DimensionError(f"band limits differ: {x.band_limit} vs {y.band_limit}")


def degree_norms(a):
    """``A[ell] = sqrt(sum_m |a[ell, m]|**2)`` for every degree."""
    sq = np.abs(a.values) ** 2
    starts = np.arange(a.band_limit + 1) ** 2
    return np.sqrt(np.add.reduceat(sq, starts))


def hybrid_norm(a, beta):
    """Weighted sum of degree norms, ``sum_ell beta[ell] * A[ell]``."""
    _check_same_band_limit(a, beta)
    return float(np.dot(beta.beta, degree_norms(a)))


def l1_norm(a):
    """Sum of coefficient moduli. Depends on the coordinate frame."""
    return float(np.abs(a.values).sum())


def discrepancy(a, b):
    """Squared l2 distance ``sum |a - b|**2``."""
    _check_same_band_limit(a, b)
    return float(np.sum(np.abs(a.values - b.values) ** 2))


def l1_soft_threshold(a, lam):
    """Per-coefficient complex soft thresholding.

    Minimizes ``0.5 * ||x - a||**2 + lam * ||x||_1``; each entry is shrunk
    towards zero by ``lam`` in modulus, keeping its phase.
    """
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam!r}")
    mod = np.abs(a.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(mod > lam, 1.0 - lam / mod, 0.0)
    return a.with_values(a.values * factor)
