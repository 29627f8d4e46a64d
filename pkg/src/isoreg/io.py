"""CSV and key-value file formats.

All floats are written with 17 significant digits so that a value read
back is bit-identical to the one written.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .coeffs import CoefficientSet, DegreeWeights, degree_m_arrays, size_to_band_limit
from .errors import DimensionError, FormatError
from .sht import GridField, QuadratureGrid
from .simulate import PowerSpectrum


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _read_rows(path, header):
    path = Path(path)
    with path.open(newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    reader = csv.reader(lines)
    try:
        got = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError(f"{path}: empty file") from None
    if got != header:
        raise FormatError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise FormatError(f"{path}: line {lineno}: expected {len(header)} fields")
        rows.append(row)
    return rows


def _write_rows(path, header, rows, comments=()):
    path = Path(path)
    with path.open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


# -- coefficients ----------------------------------------------------------

def write_coefficients(path, a):
    ell, m = degree_m_arrays(a.band_limit)
    v = a.values
    _write_rows(path, ["ell", "m", "re", "im"], zip(ell, m, v.real, v.imag))


def read_coefficients(path, require_real=False, symmetry_rtol=1e-12):
    """Parse a coefficient CSV.

    Rows must be complete and in flat ``(ell, m)`` order. The result is flagged
    ``real_field`` when the entries are conjugate symmetric; with
    ``require_real`` an asymmetric file is rejected.
    """
    rows = _read_rows(path, ["ell", "m", "re", "im"])
    try:
        ell = np.array([int(r[0]) for r in rows])
        m = np.array([int(r[1]) for r in rows])
        vals = np.array([float(r[2]) for r in rows]) + 1j * np.array([float(r[3]) for r in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    try:
        L = size_to_band_limit(len(rows))
    except DimensionError:
        raise FormatError(f"{path}: {len(rows)} rows is not a complete (L+1)^2 set") from None
    e_ell, e_m = degree_m_arrays(L)
    bad = np.flatnonzero((ell != e_ell) | (m != e_m))
    if bad.size:
        i = bad[0]
        raise FormatError(
            f"{path}: row {i + 2} is ({ell[i]},{m[i]}), expected ({e_ell[i]},{e_m[i]})"
        )
    a = CoefficientSet(vals)
    sym = a.is_conjugate_symmetric(rtol=symmetry_rtol)
    if require_real and not sym:
        raise FormatError(f"{path}: coefficients are not conjugate symmetric")
    return a.with_values(a.values, real_field=sym)


# -- weights / spectra ----------------------------------------------------

def _read_per_degree(path, name):
    rows = _read_rows(path, ["ell", name])
    try:
        ell = np.array([int(r[0]) for r in rows])
        vals = np.array([float(r[1]) for r in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if not np.array_equal(ell, np.arange(len(rows))):
        raise FormatError(f"{path}: degrees must run 0, 1, 2, ... without gaps")
    return vals


def read_weights(path):
    return DegreeWeights(_read_per_degree(path, "beta"))


def write_weights(path, beta):
    _write_rows(path, ["ell", "beta"], enumerate(beta.beta))


def read_spectrum(path):
    return PowerSpectrum(_read_per_degree(path, "C"))


def write_spectrum(path, spectrum):
    _write_rows(path, ["ell", "C"], enumerate(spectrum.C))


# -- grid fields ----------------------------------------------------------

_GRID_COMMENT = re.compile(r"#\s*band_limit=(\d+)")


def write_grid_field(path, f):
    if not f.is_real:
        raise FormatError("grid field files hold real fields only")
    th, ph = f.grid.mesh()
    _write_rows(
        path,
        ["theta", "phi", "value"],
        zip(th.ravel(), ph.ravel(), np.asarray(f.values).ravel()),
        comments=[f"band_limit={f.grid.band_limit} grid=gauss-legendre n_theta={f.grid.shape[0]} n_phi={f.grid.shape[1]}"],
    )


def read_grid_field(path):
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
    mt = _GRID_COMMENT.match(first)
    if not mt:
        raise FormatError(f"{path}: missing '# band_limit=...' grid header")
    grid = QuadratureGrid(int(mt.group(1)))
    rows = _read_rows(path, ["theta", "phi", "value"])
    if len(rows) != grid.size:
        raise FormatError(f"{path}: expected {grid.size} samples, got {len(rows)}")
    vals = np.array([float(r[2]) for r in rows]).reshape(grid.shape)
    return GridField(grid, vals)


# -- reports --------------------------------------------------------------

def write_frontier(path, lams, disc, norm, count):
    _write_rows(path, ["lambda", "discrepancy", "hybrid_norm", "l0_count"], zip(lams, disc, norm, count))


def write_l0(path, steps):
    _write_rows(
        path,
        ["lambda_lo", "lambda_hi", "l0_count", "discrepancy_lo", "discrepancy_hi"],
        ((s.lam_lo, s.lam_hi, s.count, s.discrepancy_lo, s.discrepancy_hi) for s in steps),
    )


def write_gamma_curve(path, report, n=101):
    g, q = report.curve(n)
    rows = [(gi, qi, "") for gi, qi in zip(g, q)]
    rows.append((report.gamma_norm, report.q(report.gamma_norm), "gamma_norm"))
    rows.append((report.gamma_opt, report.q(report.gamma_opt), "gamma_opt"))
    rows.sort(key=lambda r: r[0])
    _write_rows(path, ["gamma", "discrepancy", "marker"], rows)


def write_key_values(path, items):
    with Path(path).open("w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={fmt(v)}\n")


def read_key_values(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        k, sep, v = line.partition("=")
        if not sep:
            raise FormatError(f"{path}: malformed line {line!r}")
        out[k.strip()] = v.strip()
    return out
