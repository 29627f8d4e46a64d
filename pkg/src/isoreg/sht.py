"""Exact band-limited spherical-harmonic transforms.

Fields are sampled on a Gauss-Legendre grid in ``cos(theta)`` with ``L + 1``
rings and ``2L + 1`` equispaced longitudes. For a field of band limit ``L``
that rule integrates every product ``Y[l,m] * conj(Y[l',m'])`` exactly, so
:func:`analyze` inverts :func:`synthesize` up to rounding.

Spherical harmonics are orthonormal with respect to the surface measure of
total mass ``4*pi`` and carry the Condon-Shortley phase:

    Y[l, m](theta, phi) = Lambda[l, m](cos theta) * exp(1j * m * phi),  m >= 0
    Y[l, -m] = (-1)**m * conj(Y[l, m])
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation as _SciRotation

from .coeffs import CoefficientSet, flat_index
from .errors import DimensionError, DomainError

FOUR_PI = 4.0 * np.pi


# --------------------------------------------------------------------------
# Legendre machinery
# --------------------------------------------------------------------------

def iter_legendre(L, cos_theta, sin_theta=None):
    """Yield ``(m, P)`` with ``P[l - m] = Lambda[l, m](cos_theta)`` for ``m <= l <= L``.

    The orthonormalized associated Legendre functions are generated by the
    usual three-term recurrence ascending in ``l`` at fixed ``m``, seeded from
    the sectoral values ``Lambda[m, m]``. Only one order is held in memory
    at a time.
    """
    x = np.asarray(cos_theta, dtype=np.float64)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None)) if sin_theta is None else np.asarray(sin_theta, dtype=np.float64)
    pmm = np.full(x.shape, 1.0 / np.sqrt(FOUR_PI))
    for m in range(L + 1):
        if m > 0:
            pmm = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * pmm
        out = np.empty((L - m + 1,) + x.shape)
        out[0] = pmm
        if m < L:
            out[1] = np.sqrt(2.0 * m + 3.0) * x * pmm
        a_prev = np.sqrt(2.0 * m + 3.0)
        for l in range(m + 2, L + 1):
            a_lm = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            out[l - m] = a_lm * (x * out[l - m - 1] - out[l - m - 2] / a_prev)
            a_prev = a_lm
        yield m, out


def legendre_table(L, cos_theta, sin_theta=None):
    """Dense table ``T[l, m, ...] = Lambda[l, m]`` (zero where ``m > l``)."""
    x = np.asarray(cos_theta, dtype=np.float64)
    table = np.zeros((L + 1, L + 1) + x.shape)
    for m, p in iter_legendre(L, x, sin_theta):
        table[m:, m] = p
    return table


def spherical_harmonic(ell, m, theta, phi):
    """Complex orthonormal ``Y[ell, m](theta, phi)`` with Condon-Shortley phase."""
    if ell < 0 or abs(m) > ell:
        raise DomainError(f"need 0 <= |m| <= ell, got ell={ell}, m={m}")
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    am = abs(m)
    for mm, p in iter_legendre(ell, np.cos(theta), np.sin(theta)):
        if mm == am:
            y = p[ell - am] * np.exp(1j * am * phi)
            break
    if m < 0:
        y = (-1) ** am * np.conj(y)
    return y


def legendre_polynomial(ell, x):
    """Legendre polynomial ``P_ell`` with ``P_ell(1) = 1``."""
    x = np.asarray(x, dtype=np.float64)
    p0, p1 = np.ones_like(x), x
    if ell == 0:
        return p0
    for l in range(2, ell + 1):
        p0, p1 = p1, ((2 * l - 1) * x * p1 - (l - 1) * p0) / l
    return p1


# --------------------------------------------------------------------------
# Grids and fields
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre rings times equispaced longitudes, exact up to ``band_limit``."""

    band_limit: int
    cos_theta: np.ndarray = field(init=False, repr=False)
    theta: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        L = int(self.band_limit)
        if L < 0:
            raise DomainError("band limit must be non-negative")
        x, w = np.polynomial.legendre.leggauss(L + 1)
        # north to south
        x, w = x[::-1].copy(), w[::-1].copy()
        object.__setattr__(self, "band_limit", L)
        object.__setattr__(self, "cos_theta", x)
        object.__setattr__(self, "theta", np.arccos(x))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "phi", 2.0 * np.pi * np.arange(2 * L + 1) / (2 * L + 1))

    @property
    def shape(self):
        return (self.theta.size, self.phi.size)

    @property
    def size(self):
        return self.theta.size * self.phi.size

    @property
    def sin_theta(self):
        return np.sqrt(1.0 - self.cos_theta**2)

    def mesh(self):
        """``(theta, phi)`` arrays of the grid shape."""
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def points(self):
        """Unit vectors of shape ``shape + (3,)``."""
        th, ph = self.mesh()
        return to_cartesian(th, ph)

    def cell_weights(self):
        """Quadrature weight of every node; they sum to ``4*pi``."""
        return np.outer(self.weights, np.full(self.phi.size, 2.0 * np.pi / self.phi.size))

    def integrate(self, values):
        return np.sum(self.cell_weights() * values)

    def __eq__(self, other):
        return isinstance(other, QuadratureGrid) and other.band_limit == self.band_limit

    def __hash__(self):
        return hash(self.band_limit)


@dataclass(frozen=True, eq=False)
class GridField:
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise DimensionError(f"field shape {v.shape} does not match grid {self.grid.shape}")

    @property
    def is_real(self):
        return not np.iscomplexobj(self.values)


def to_cartesian(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def to_spherical(xyz):
    xyz = np.asarray(xyz, dtype=np.float64)
    r = np.linalg.norm(xyz, axis=-1)
    theta = np.arccos(np.clip(xyz[..., 2] / r, -1.0, 1.0))
    phi = np.mod(np.arctan2(xyz[..., 1], xyz[..., 0]), 2.0 * np.pi)
    return theta, phi


def _padded(a, L):
    if a.band_limit > L:
        raise DimensionError(f"coefficient band limit {a.band_limit} exceeds grid band limit {L}")
    vals = np.zeros((L + 1) ** 2, dtype=np.complex128)
    vals[: a.values.size] = a.values
    return vals


def _order_profiles(vals, L, legendre):
    """``F[:, m mod N]`` = sum over ``l`` of ``a[l, m] * Lambda[l, |m|]`` (with sign for m<0)."""
    n_phi = 2 * L + 1
    F = None
    for m, p in legendre:
        if F is None:
            F = np.zeros(p.shape[1:] + (n_phi,), dtype=np.complex128)
        ells = np.arange(m, L + 1)
        F[..., m] = np.tensordot(vals[flat_index(ells, m)], p, axes=1)
        if m > 0:
            F[..., n_phi - m] = (-1) ** m * np.tensordot(vals[flat_index(ells, -m)], p, axes=1)
    return F


def _orders(L):
    n_phi = 2 * L + 1
    m = np.arange(n_phi)
    return np.where(m <= L, m, m - n_phi)


def synthesize(a, grid, use_fft=True):
    """Evaluate the truncated expansion at every grid node.

    Returns a real :class:`GridField` when ``a`` is flagged ``real_field``.
    ``use_fft=False`` sums the longitude series directly; both paths agree
    to rounding.
    """
    L = grid.band_limit
    vals = _padded(a, L)
    F = _order_profiles(vals, L, iter_legendre(L, grid.cos_theta, grid.sin_theta))
    n_phi = grid.phi.size
    if use_fft:
        f = np.fft.ifft(F, axis=1) * n_phi
    else:
        f = F @ np.exp(1j * np.outer(_orders(L), grid.phi))
    if a.real_field:
        f = f.real.copy()
    return GridField(grid, f)


def analyze(f, band_limit=None, use_fft=True):
    """Coefficients ``integral f * conj(Y[l, m])`` by exact quadrature."""
    grid = f.grid
    L = grid.band_limit
    out_L = L if band_limit is None else int(band_limit)
    if out_L > L:
        raise DimensionError(f"cannot analyze to degree {out_L} on a grid exact to {L}")
    n_phi = grid.phi.size
    vals = np.asarray(f.values, dtype=np.complex128)
    if use_fft:
        G = np.fft.fft(vals, axis=1) * (2.0 * np.pi / n_phi)
    else:
        G = vals @ np.exp(-1j * np.outer(grid.phi, _orders(L))) * (2.0 * np.pi / n_phi)
    G = G * grid.weights[:, None]
    coeffs = np.zeros((out_L + 1) ** 2, dtype=np.complex128)
    for m, p in iter_legendre(out_L, grid.cos_theta, grid.sin_theta):
        ells = np.arange(m, out_L + 1)
        coeffs[flat_index(ells, m)] = p @ G[:, m]
        if m > 0:
            coeffs[flat_index(ells, -m)] = (-1) ** m * (p @ G[:, n_phi - m])
    return CoefficientSet(coeffs, real_field=f.is_real)


def evaluate(a, theta, phi):
    """Evaluate the expansion at arbitrary points (direct summation)."""
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    L = a.band_limit
    F = _order_profiles(a.values, L, iter_legendre(L, np.cos(theta), np.sin(theta)))
    out = np.einsum("...k,...k->...", F, np.exp(1j * phi[..., None] * _orders(L)))
    return out.real if a.real_field else out


def harmonic_matrix(L, theta, phi):
    """``Y[p, i] = Y_i(theta_p, phi_p)`` for every flat index ``i`` up to ``L``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    Y = np.zeros((theta.size, (L + 1) ** 2), dtype=np.complex128)
    for m, p in iter_legendre(L, np.cos(theta), np.sin(theta)):
        ells = np.arange(m, L + 1)
        e = np.exp(1j * m * phi)
        Y[:, flat_index(ells, m)] = (p * e).T
        if m > 0:
            Y[:, flat_index(ells, -m)] = ((-1) ** m * np.conj(p * e)).T
    return Y


# --------------------------------------------------------------------------
# Rotations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Rotation:
    """Rotation ``Rz(alpha) @ Ry(beta) @ Rz(gamma)`` given by ZYZ Euler angles."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    @classmethod
    def from_matrix(cls, matrix):
        with warnings.catch_warnings():
            # at beta = 0 or pi only alpha + gamma is determined; any split is valid
            warnings.simplefilter("ignore", UserWarning)
            a, b, g = _SciRotation.from_matrix(matrix).as_euler("ZYZ")
        return cls(float(a), float(b), float(g))

    @classmethod
    def random(cls, rng):
        return cls.from_matrix(_SciRotation.random(random_state=rng).as_matrix())

    def matrix(self):
        return _SciRotation.from_euler("ZYZ", [self.alpha, self.beta, self.gamma]).as_matrix()

    def inverse(self):
        return Rotation(-self.gamma, -self.beta, -self.alpha)

    def compose(self, other):
        """``self`` after ``other``."""
        return Rotation.from_matrix(self.matrix() @ other.matrix())

    __matmul__ = compose

    def apply(self, xyz):
        return np.asarray(xyz) @ self.matrix().T


def rotate_field(a, rho, grid=None):
    """Coefficients of ``x -> f(rho^-1 x)`` where ``f`` is the expansion of ``a``.

    The rotated field is sampled by direct evaluation at the pre-images of
    the grid nodes and analyzed back; degree is preserved by rotation, so
    the result is exact for band-limited input. Cost is quartic in ``L``.
    """
    if grid is None:
        grid = QuadratureGrid(a.band_limit)
    if grid.band_limit < a.band_limit:
        raise DimensionError("grid band limit below coefficient band limit")
    pre = rho.inverse().apply(grid.points())
    th, ph = to_spherical(pre)
    values = evaluate(a, th, ph)
    return analyze(GridField(grid, values), band_limit=a.band_limit)


def field_errors(f, g):
    """``{"l2": ..., "linf": ...}`` of ``f - g`` by grid quadrature and grid maximum."""
    if f.grid != g.grid:
        raise DimensionError("fields live on different grids")
    diff = np.asarray(f.values) - np.asarray(g.values)
    l2 = np.sqrt(f.grid.integrate(np.abs(diff) ** 2))
    return {"l2": float(l2), "linf": float(np.max(np.abs(diff)))}
