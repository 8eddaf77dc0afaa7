import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from qubitio.canonical import CanonicalIO5, CanonicalSIO4, LegacyIO5

ACCEPTANCE_LINES = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (z + z.conj().T) / 2


def io5_from_raw(r, alpha, beta):
    """Rescale raw parameters onto the five-operator normalization."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    na = math.sqrt((1 + r * r) * alpha[0] ** 2 + np.sum(alpha[1:] ** 2))
    nb = math.sqrt((1 + r * r) * abs(beta[0]) ** 2 + np.sum(np.abs(beta[1:]) ** 2))
    return CanonicalIO5(r, alpha / na, beta / nb)


def random_io5(rng, zero=()):
    """Random five-operator record; names in ``zero`` (e.g. "a2", "b3", "r") are set to 0."""
    r = 0.0 if "r" in zero else rng.uniform(0.2, 3.0)
    alpha = rng.uniform(0.05, 1.0, size=4)
    beta = rng.normal(size=3) + 1j * rng.normal(size=3)
    for name in zero:
        if name.startswith("a"):
            alpha[int(name[1]) - 1] = 0.0
        elif name.startswith("b"):
            beta[int(name[1]) - 1] = 0.0
    return io5_from_raw(r, alpha, beta)


def random_sio4(rng, n_zero=0):
    a = rng.uniform(0.0, 1.0, size=4)
    b = rng.normal(size=2) + 1j * rng.normal(size=2)
    if n_zero:
        a[rng.choice(4, size=n_zero, replace=False)] = 0.0
    if not a.any():
        a[0] = 1.0
    return CanonicalSIO4(a / np.linalg.norm(a), b / np.linalg.norm(b))


def random_legacy(rng, a2_zero=False):
    a = rng.uniform(0.05, 1.0, size=5)
    b = rng.normal(size=4) + 1j * rng.normal(size=4)
    if a2_zero:
        a[1] = 0.0
        b[0] = 0.0
    else:
        b[1] = -a[0] * b[0] / a[1]
    return LegacyIO5(a / np.linalg.norm(a), b / np.linalg.norm(b))


def product_residuals_hp(k, ent, digits=50):
    """Both rank-one product conditions at ``k`` in 50-digit arithmetic.

    ``A`` and ``B`` come from the plain square-root formulas, not the
    library's rearranged ones, so this is an independent check of ``k``.
    """
    with mpmath.workdps(digits):
        a, b, c, d, E, F, G = (mpmath.mpf(float(x)) for x in (ent.a, ent.b, ent.c, ent.d, ent.E, ent.F, ent.G))
        k = mpmath.mpf(float(k))
        A = ((a - k * d) + mpmath.sqrt((a - k * d) ** 2 + 4 * k * G**2)) / 2
        B = ((k * b - c) + mpmath.sqrt((k * b - c) ** 2 + 4 * k * F**2)) / (2 * k)
        r1 = abs((a - A) * (b - B) - E**2) / E**2
        r2 = abs((c - F**2 / B) * (d - G**2 / A) - E**2) / E**2
        return float(r1), float(r2)


def exact_discriminant(ent):
    """beta^2 - 4 alpha gamma in exact rational arithmetic from the stored entries."""
    a, b, c, d = (Fraction(x) for x in (ent.a, ent.b, ent.c, ent.d))
    e2, f2, g2 = (Fraction(z.real) ** 2 + Fraction(z.imag) ** 2 for z in (ent.e, ent.f, ent.g))
    fg = Fraction(ent.F) * Fraction(ent.G)
    adg, bcf = a * d - g2, b * c - f2
    d1, d2 = a * bcf - c * e2, b * adg - d * e2
    d3, d4 = a * (c * d - e2) - c * g2, b * (c * d - e2) - d * f2
    delta = adg * bcf - e2 * (a * b + c * d - e2 + 2 * fg)
    qa, qc = e2 * d2 * d4, e2 * d1 * d3
    qb = delta * (delta + e2 * (a * b + c * d + 4 * fg)) + 2 * e2 * e2 * (a * b * fg + a * d * f2 + b * c * g2 + c * d * fg)
    return qb * qb - 4 * qa * qc


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
