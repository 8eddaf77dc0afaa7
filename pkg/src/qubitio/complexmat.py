"""Small dense complex matrix kernel.

Matrices here never exceed 9x9 (the Choi matrix of a qutrit channel), so
every routine favours clarity over asymptotic speed.  Matrices are plain
``numpy`` arrays of dtype ``complex128``.
"""

from __future__ import annotations

import numpy as np

from .errors import ConstraintViolation

HERMITIAN_TOL = 1e-9
RANK_TOL = 1e-9
PSD_TOL = 1e-9
ZERO_FLOOR = 1e-14
MAX_DIM = 9


def as_cmatrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array no larger than 9x9."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not (0 < m.shape[0] <= MAX_DIM and 0 < m.shape[1] <= MAX_DIM):
        raise ValueError(f"matrix shape {m.shape} outside 1..{MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = as_cmatrix(a), as_cmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_cmatrix(a).conj().T


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _check_hermitian(a: np.ndarray, tol: float) -> None:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix is not square: {a.shape}")
    defect = max_abs(a - a.conj().T)
    if defect > tol:
        raise ConstraintViolation(f"matrix is not Hermitian: max |A - A^H| = {defect:.3g}")


def jacobi_eigh(a, tol: float = HERMITIAN_TOL, max_sweeps: int = 64):
    """Cyclic complex Jacobi eigensolver for a Hermitian matrix.

    Each rotation zeroes one off-diagonal pair ``(p, q)``; sweeps repeat
    until the off-diagonal Frobenius mass drops below ``1e-15 * ||A||_F``.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues descending and
    eigenvectors stored as columns.
    """
    a = as_cmatrix(a)
    _check_hermitian(a, tol)
    n = a.shape[0]
    h = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(h)
    for _ in range(max_sweeps):
        off = np.linalg.norm(h - np.diag(np.diag(h)))
        if off <= 1e-15 * scale or scale == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                hpq = h[p, q]
                mag = abs(hpq)
                if mag <= 1e-18 * scale:
                    continue
                phase = hpq / mag
                hpp, hqq = h[p, p].real, h[q, q].real
                theta = 0.5 * np.arctan2(2.0 * mag, hqq - hpp)
                c, s = np.cos(theta), np.sin(theta)
                # columns p, q of the unitary rotation
                rot = np.eye(n, dtype=np.complex128)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                h = rot.conj().T @ h @ rot
                v = v @ rot
    w = np.real(np.diag(h))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def hermitian_eigen(a, tol: float = HERMITIAN_TOL, method: str = "lapack"):
    """Eigen-decompose a Hermitian matrix; eigenvalues come out descending.

    ``method="lapack"`` calls :func:`numpy.linalg.eigh`; ``method="jacobi"``
    uses the pure :func:`jacobi_eigh` rotation solver.
    """
    if method == "jacobi":
        return jacobi_eigh(a, tol)
    if method != "lapack":
        raise ValueError(f"unknown eigen method {method!r}")
    a = as_cmatrix(a)
    _check_hermitian(a, tol)
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w[::-1].copy(), v[:, ::-1].copy()


def numerical_rank(a, tol_rel: float = RANK_TOL, tol: float = HERMITIAN_TOL) -> int:
    """Number of eigenvalues above ``tol_rel * lambda_max``.

    Matrices whose largest eigenvalue is below ``1e-14`` have rank 0.
    """
    w, _ = hermitian_eigen(a, tol)
    top = w[0]
    if top <= ZERO_FLOOR:
        return 0
    return int(np.sum(w > tol_rel * top))


def is_psd(a, tol: float = PSD_TOL) -> bool:
    w, _ = hermitian_eigen(a, max(tol, HERMITIAN_TOL))
    return bool(w[-1] >= -tol * max(1.0, w[0]))


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = as_cmatrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol
