import numpy as np
import pytest

from isoreg import CoefficientSet, DegreeWeights

ALPHA = np.sqrt(4 * np.pi / 3)


def random_coeffs(rng, L, real_field=False, scale=1.0):
    n = (L + 1) ** 2
    vals = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    a = CoefficientSet(vals)
    if real_field:
        a = make_real(a)
    return a


def make_real(a):
    """Project onto conjugate-symmetric coefficients."""
    from isoreg.coeffs import degree_m_arrays

    ell, m = degree_m_arrays(a.band_limit)
    v = a.values.copy()
    pos = m > 0
    mirror = ell[pos] ** 2 + ell[pos] - m[pos]
    v[mirror] = np.where(m[pos] % 2 == 0, 1.0, -1.0) * np.conj(v[pos])
    v[m == 0] = v[m == 0].real
    return CoefficientSet(v, real_field=True)


def random_weights(rng, L):
    b = rng.uniform(0.2, 3.0, L + 1)
    b[0] = 1.0
    return DegreeWeights(b)


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def apply_block_unitaries(a, unitaries):
    v = a.values.copy()
    for ell, U in enumerate(unitaries):
        v[ell * ell : (ell + 1) ** 2] = U @ v[ell * ell : (ell + 1) ** 2]
    return CoefficientSet(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def dipole():
    return CoefficientSet.from_dict({(1, 0): ALPHA}, 1, real_field=True)


@pytest.fixture
def x_dipole():
    return CoefficientSet.from_dict({(1, 1): -ALPHA / np.sqrt(2), (1, -1): ALPHA / np.sqrt(2)}, 1, real_field=True)


# -- acceptance reporting -------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    number, title = marker.args
    ok = rep.passed and _CRITERIA.get(number, (True, title))[0]
    _CRITERIA[number] = (ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")
