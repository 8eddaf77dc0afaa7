"""Kraus operators, qubit channels and their Choi matrices.

Choi convention: a Kraus operator ``K`` is vectorized row-major, so for a
qubit the slot order is ``(K00, K01, K10, K11)``, and

    M = (1/d) * sum_i vec(K_i) vec(K_i)^H .

Every positional formula in :mod:`qubitio.decompose` depends on this order.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .complexmat import as_cmatrix, is_psd, is_unitary, max_abs
from .errors import InvalidChannel

COMPLETENESS_TOL = 1e-8
PATTERN_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class Pattern(enum.Enum):
    """Support shape of a 2x2 Kraus operator."""

    ROW1 = "Row1"
    ROW2 = "Row2"
    DIAGONAL = "Diagonal"
    ANTIDIAGONAL = "Antidiagonal"
    SINGLE_ENTRY = "SingleEntry"
    ZERO = "Zero"
    NOT_INCOHERENT = "NotIncoherent"

    @property
    def incoherent(self) -> bool:
        return self is not Pattern.NOT_INCOHERENT

    @property
    def strictly_incoherent(self) -> bool:
        return self in (Pattern.DIAGONAL, Pattern.ANTIDIAGONAL, Pattern.SINGLE_ENTRY, Pattern.ZERO)


_PAIR_PATTERNS = {
    frozenset({(0, 0), (0, 1)}): Pattern.ROW1,
    frozenset({(1, 0), (1, 1)}): Pattern.ROW2,
    frozenset({(0, 0), (1, 1)}): Pattern.DIAGONAL,
    frozenset({(0, 1), (1, 0)}): Pattern.ANTIDIAGONAL,
}


def support(k, tol: float = PATTERN_TOL) -> set[tuple[int, int]]:
    """Positions whose magnitude exceeds ``tol`` times the largest entry."""
    k = np.asarray(k)
    top = max_abs(k)
    if top == 0.0:
        return set()
    return {tuple(int(i) for i in idx) for idx in np.argwhere(np.abs(k) > tol * top)}


def classify_pattern(k, tol: float = PATTERN_TOL) -> Pattern:
    k = as_cmatrix(k)
    if k.shape != (2, 2):
        raise ValueError(f"pattern classification needs a 2x2 operator, got {k.shape}")
    supp = support(k, tol)
    if not supp:
        return Pattern.ZERO
    if len(supp) == 1:
        return Pattern.SINGLE_ENTRY
    return _PAIR_PATTERNS.get(frozenset(supp), Pattern.NOT_INCOHERENT)


def is_incoherent_operator(k, tol: float = PATTERN_TOL) -> bool:
    """At most one nonzero entry per column (any dimension)."""
    k = np.asarray(k)
    mask = np.zeros(k.shape, dtype=bool)
    for i, j in support(k, tol):
        mask[i, j] = True
    return bool(np.all(mask.sum(axis=0) <= 1))


def is_strictly_incoherent_operator(k, tol: float = PATTERN_TOL) -> bool:
    k = np.asarray(k)
    return is_incoherent_operator(k, tol) and is_incoherent_operator(k.T, tol)


def completeness_residual(kraus: Iterable) -> float:
    ops = [as_cmatrix(k) for k in kraus]
    d = ops[0].shape[0]
    total = sum(k.conj().T @ k for k in ops)
    return max_abs(total - np.eye(d))


@dataclass(frozen=True)
class QubitChannel:
    """A completeness-satisfying list of ``d x d`` Kraus operators, d in {2, 3}.

    Construction validates: ragged or non-square operators, ``d`` outside
    {2, 3}, or ``||sum K^H K - I||_max > 1e-8`` raise :class:`InvalidChannel`.
    """

    kraus: tuple
    completeness_residual: float = field(init=False)

    def __init__(self, kraus: Iterable, validate: bool = True):
        try:
            ops = tuple(as_cmatrix(k) for k in kraus)
        except ValueError as exc:
            raise InvalidChannel(str(exc)) from None
        if not ops:
            raise InvalidChannel("channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if d not in (2, 3):
            raise InvalidChannel(f"unsupported dimension {d}")
        for k in ops:
            if k.shape != (d, d):
                raise InvalidChannel(f"Kraus operator of shape {k.shape} in a d={d} channel")
        for k in ops:
            k.setflags(write=False)
        residual = completeness_residual(ops)
        if validate and residual > COMPLETENESS_TOL:
            raise InvalidChannel(f"completeness residual {residual:.2g} exceeds {COMPLETENESS_TOL:g}")
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "completeness_residual", residual)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def __len__(self) -> int:
        return len(self.kraus)

    def __iter__(self):
        return iter(self.kraus)

    def patterns(self, tol: float = PATTERN_TOL) -> list[Pattern]:
        if self.dim != 2:
            raise ValueError("patterns are defined for qubit operators only")
        return [classify_pattern(k, tol) for k in self.kraus]

    def drop_zeros(self, tol: float = 1e-12) -> "QubitChannel":
        """Remove operators whose largest entry is at most ``tol``."""
        kept = [k for k in self.kraus if max_abs(k) > tol]
        return QubitChannel(kept or [np.zeros((self.dim, self.dim))], validate=False)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k] for k in self.kraus],
        }

    @classmethod
    def from_json(cls, obj: dict, validate: bool = True) -> "QubitChannel":
        """Parse the channel JSON object; shape problems raise ``ValueError``."""
        if not isinstance(obj, dict) or "kraus" not in obj:
            raise ValueError("channel JSON must be an object with a 'kraus' array")
        raw = obj["kraus"]
        if not isinstance(raw, list) or not raw:
            raise ValueError("'kraus' must be a non-empty array")
        ops = []
        for n, mat in enumerate(raw):
            try:
                arr = np.array(mat, dtype=float)
            except (TypeError, ValueError):
                raise ValueError(f"Kraus operator {n} is not a rectangular array of [re, im] pairs") from None
            if arr.ndim != 3 or arr.shape[2] != 2:
                raise ValueError(f"Kraus operator {n} must be rows of [re, im] pairs, got shape {arr.shape}")
            ops.append(arr[..., 0] + 1j * arr[..., 1])
        dim = obj.get("dim", ops[0].shape[0])
        if any(op.shape != (dim, dim) for op in ops):
            raise ValueError(f"all Kraus operators must be {dim}x{dim}")
        return cls(ops, validate=validate)


ChannelLike = Union[QubitChannel, Sequence]


def _ops(ch: ChannelLike) -> tuple:
    return ch.kraus if isinstance(ch, QubitChannel) else tuple(as_cmatrix(k) for k in ch)


def load_channel(path, validate: bool = True) -> QubitChannel:
    with open(path) as fh:
        return QubitChannel.from_json(json.load(fh), validate=validate)


def dump_channel(ch: QubitChannel, path) -> None:
    Path(path).write_text(json.dumps(ch.to_json(), indent=1) + "\n")


def choi(ch: ChannelLike) -> np.ndarray:
    """Choi matrix ``(1/d) sum_i vec(K_i) vec(K_i)^H`` with row-major ``vec``."""
    ops = _ops(ch)
    d = ops[0].shape[0]
    vecs = np.array([k.reshape(-1) for k in ops])
    return (vecs.T @ vecs.conj()) / d


def check_choi(m, tol: float = 1e-9) -> list[str]:
    """List the violated Choi-matrix invariants of a qubit channel (empty when valid)."""
    m = np.asarray(m)
    problems = []
    if max_abs(m - m.conj().T) > tol:
        problems.append("not Hermitian")
    elif not is_psd(m, tol):
        problems.append("not positive semidefinite")
    if abs(np.trace(m) - 1) > tol:
        problems.append(f"trace {np.trace(m).real:.12g} != 1")
    if m.shape == (4, 4):
        if abs(m[0, 0] + m[2, 2] - 0.5) > tol or abs(m[1, 1] + m[3, 3] - 0.5) > tol:
            problems.append("diagonal completeness (m00+m22 = m11+m33 = 1/2) violated")
        if abs(m[0, 1] + m[2, 3]) > tol:
            problems.append("off-diagonal completeness (m01 + m23 = 0) violated")
    return problems


def channels_equal(ch1: ChannelLike, ch2: ChannelLike, tol: float = 1e-9) -> bool:
    m1, m2 = choi(ch1), choi(ch2)
    if m1.shape != m2.shape:
        raise ValueError("channels act on different dimensions")
    return max_abs(m1 - m2) <= tol


def mix_kraus(u, ops: Sequence) -> list[np.ndarray]:
    """Unitary remixing ``L_i = sum_j U_ij K_j``; ``ops`` is zero-padded to ``U``'s size."""
    u = as_cmatrix(u)
    m = u.shape[0]
    if u.shape != (m, m) or not is_unitary(u):
        raise ValueError("mixing matrix must be unitary")
    ops = [as_cmatrix(k) for k in ops]
    if len(ops) > m:
        raise ValueError(f"{len(ops)} operators cannot be mixed by a {m}x{m} unitary")
    shape = ops[0].shape
    stack = np.zeros((m,) + shape, dtype=np.complex128)
    for j, k in enumerate(ops):
        stack[j] = k
    mixed = np.tensordot(u, stack, axes=(1, 0))
    return [mixed[i] for i in range(m)]


def _check_density(rho: np.ndarray, tol: float = 1e-9) -> None:
    if rho.shape != (2, 2):
        raise ValueError(f"density matrix must be 2x2, got {rho.shape}")
    if max_abs(rho - rho.conj().T) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix trace is not 1")
    if not is_psd(rho, tol):
        raise ValueError("density matrix is not positive semidefinite")


def apply(ch: ChannelLike, rho) -> np.ndarray:
    rho = as_cmatrix(rho)
    _check_density(rho)
    return sum(k @ rho @ k.conj().T for k in _ops(ch))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        v = np.array([self.x, self.y, self.z], dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("Bloch vector has non-finite components")
        if float(v @ v) > (1 + 1e-12) ** 2:
            raise ValueError(f"Bloch vector norm {np.sqrt(v @ v):.6g} exceeds 1")

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def bloch_to_rho(b: BlochVector) -> np.ndarray:
    return 0.5 * (np.eye(2) + b.x * SIGMA_X + b.y * SIGMA_Y + b.z * SIGMA_Z)


def rho_to_bloch(rho) -> BlochVector:
    rho = np.asarray(rho)
    return BlochVector(
        float(2 * rho[0, 1].real),
        float(-2 * rho[0, 1].imag),
        float((rho[0, 0] - rho[1, 1]).real),
    )
