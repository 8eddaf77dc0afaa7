"""Membership tests, ranks and the named example channels."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import (
    COMPLETENESS_TOL,
    Pattern,
    QubitChannel,
    choi,
    classify_pattern,
    is_incoherent_operator,
    is_strictly_incoherent_operator,
    mix_kraus,
)
from .complexmat import RANK_TOL, as_cmatrix, hermitian_eigen, is_psd, max_abs, numerical_rank
from .decompose import DecompositionSolution, decompose_io, io_membership
from .errors import ConstraintViolation, NotIncoherentChannel

ZERO_TOL = 1e-9


def _as_choi(ch) -> np.ndarray:
    if isinstance(ch, QubitChannel):
        return choi(ch)
    return as_cmatrix(ch)


def is_sio_channel(ch, tol: float = ZERO_TOL) -> bool:
    """Structural test: a qubit SIO's Choi matrix couples only slots (0,3) and (1,2).

    Accepts a :class:`QubitChannel` or its 4x4 Choi matrix.
    """
    m = _as_choi(ch)
    if m.shape != (4, 4):
        raise ValueError("structural SIO test is defined for qubit channels")
    s = max(max_abs(m), 1e-300)
    return all(abs(m[i, j]) <= tol * s for i, j in ((0, 1), (2, 3), (0, 2), (1, 3)))


def _peel(block: np.ndarray, pivot: int, threshold: float) -> list[np.ndarray]:
    """Split a 2x2 PSD block into rank-many vectors.

    Rank two: the rank-one part keeps the whole ``pivot`` diagonal entry and
    the Schur remainder sits on the other slot.  Rank one: the dominant
    eigenvector.  Ranks are counted against ``threshold`` so that the total
    matches :func:`numerical_rank` of the full matrix.
    """
    w, vecs = hermitian_eigen(block)
    rank = int(np.sum(w > threshold))
    if rank == 0:
        return []
    if rank == 1:
        return [math.sqrt(w[0]) * vecs[:, 0]]
    other = 1 - pivot
    piv = block[pivot, pivot].real
    v = np.zeros(2, dtype=complex)
    v[pivot] = math.sqrt(piv)
    v[other] = np.conj(block[pivot, other]) / math.sqrt(piv)
    rem = np.zeros(2, dtype=complex)
    rem[other] = math.sqrt(max(block[other, other].real - abs(block[pivot, other]) ** 2 / piv, 0.0))
    return [v, rem]


def _unvec(v, slots) -> np.ndarray:
    k = np.zeros((2, 2), dtype=complex)
    for s, val in zip(slots, v):
        k[s // 2, s % 2] = val
    return k


def sio_decompose(ch, tol: float = ZERO_TOL) -> QubitChannel:
    """Strictly incoherent Kraus operators, exactly as many as the Kraus rank.

    The diagonal block ``[[a, g], [g*, d]]`` (slots 0, 3) is peeled on ``d``
    and the antidiagonal block ``[[b, f], [f*, c]]`` (slots 1, 2) on ``b``,
    leaving single-entry remainders on slots 0 and 2.
    """
    m = _as_choi(ch)
    if not is_sio_channel(m, tol):
        raise ConstraintViolation("Choi matrix does not have strictly incoherent structure")
    two_m = 2 * m
    w, _ = hermitian_eigen(two_m)
    threshold = max(RANK_TOL * w[0], 1e-14)
    ops = []
    for slots, pivot in (((0, 3), 1), ((1, 2), 0)):
        sub = two_m[np.ix_(slots, slots)]
        for v in _peel(sub, pivot, threshold):
            ops.append(_unvec(v, slots))
    return QubitChannel(ops, validate=False)


@dataclass(frozen=True)
class TwoKrausClass:
    tag: str  # Row1Row1_SIO | Row2Row2_SIO | Mixed_NotSIO | Degenerate
    witness_unitary: Optional[np.ndarray] = None
    theta: Optional[float] = None
    phi: Optional[float] = None


def _unit_phase(z: complex) -> complex:
    return z / abs(z) if abs(z) > 0 else 1.0


def classify_two_kraus(ch, tol: float = ZERO_TOL) -> TwoKrausClass:
    """Classify a two-operator incoherent qubit channel.

    Two first-row (or two second-row) operators form a unitary ``W`` of
    their row entries; after fixing phases so ``W``'s first column is real,
    ``W = [[cos t, sin t e^{ip}], [sin t, -cos t e^{ip}]]`` and the real
    rotation ``[[cos t, sin t], [sin t, -cos t]]`` turns the pair into two
    single-entry operators.  A first-row plus second-row pair with all four
    entries nonzero is not strictly incoherent.
    """
    ops = [k for k in (ch.kraus if isinstance(ch, QubitChannel) else ch) if max_abs(k) > 1e-12]
    if len(ops) != 2:
        raise ValueError(f"expected exactly two nonzero operators, got {len(ops)}")
    pats = [classify_pattern(k, tol) for k in ops]
    if Pattern.NOT_INCOHERENT in pats:
        raise NotIncoherentChannel("channel contains an operator that is not incoherent")

    if pats[0] == pats[1] and pats[0] in (Pattern.ROW1, Pattern.ROW2):
        row = 0 if pats[0] is Pattern.ROW1 else 1
        phases = np.array([np.conj(_unit_phase(k[row, 0])) for k in ops])
        w = np.array([k[row] for k in ops]) * phases[:, None]
        theta = math.atan2(abs(w[1, 0]), abs(w[0, 0]))
        phi = float(np.angle(w[0, 1])) % (2 * math.pi)
        c, s = math.cos(theta), math.sin(theta)
        witness = np.array([[c, s], [s, -c]]) @ np.diag(phases)
        tag = "Row1Row1_SIO" if row == 0 else "Row2Row2_SIO"
        return TwoKrausClass(tag, witness, theta, phi)

    if set(pats) == {Pattern.ROW1, Pattern.ROW2}:
        k1 = ops[pats.index(Pattern.ROW1)]
        theta = math.atan2(abs(k1[0, 1]), abs(k1[0, 0]))
        phi = float(np.angle(k1[0, 1]) - np.angle(k1[0, 0])) % (2 * math.pi)
        return TwoKrausClass("Mixed_NotSIO", None, theta, phi)

    return TwoKrausClass("Degenerate", np.eye(2, dtype=complex))


def witness_is_valid(ch, cls: TwoKrausClass, tol: float = 1e-10) -> bool:
    """The witness remix preserves the Choi matrix and yields SIO patterns only."""
    ops = [k for k in (ch.kraus if isinstance(ch, QubitChannel) else ch) if max_abs(k) > 1e-12]
    mixed = mix_kraus(cls.witness_unitary, ops)
    if max_abs(choi(mixed) - choi(ops)) > tol:
        return False
    return all(classify_pattern(k).strictly_incoherent for k in mixed)


@dataclass
class ChannelReport:
    is_valid_channel: bool
    is_io: bool
    is_sio: bool
    kraus_rank: int
    io_rank_upper: Optional[int]
    io_rank_certified: bool
    sio_rank: Optional[int] = None
    decomposition: Optional[DecompositionSolution] = None

    def to_json(self) -> dict:
        return {
            "is_valid_channel": self.is_valid_channel,
            "is_io": self.is_io,
            "is_sio": self.is_sio,
            "kraus_rank": self.kraus_rank,
            "io_rank_upper": self.io_rank_upper,
            "io_rank_certified": self.io_rank_certified,
            "sio_rank": self.sio_rank,
            "decomposition": self.decomposition.to_json() if self.decomposition else None,
        }


def report(ch: QubitChannel, tol: float = ZERO_TOL) -> ChannelReport:
    """Membership flags and ranks.

    Qubit channels get the structural IO/SIO tests and a constructive IO
    rank bound from :func:`decompose_io`.  Qutrit channels only get
    per-operator checks on the given Kraus list, so ``is_io``/``is_sio`` are
    sufficient conditions there and the IO rank bound is the operator count.
    """
    m = choi(ch)
    valid = ch.completeness_residual <= COMPLETENESS_TOL and is_psd(m)
    kraus_rank = numerical_rank(m)

    if ch.dim == 2:
        is_io = io_membership(m, tol)
        is_sio = is_io and is_sio_channel(m, tol)
        decomposition = decompose_io(m, tol) if is_io else None
        upper = len(decomposition.kraus) if decomposition else None
        sio_rank = len(sio_decompose(m, tol)) if is_sio else None
    else:
        ops = [k for k in ch.kraus if max_abs(k) > 1e-12]
        is_io = all(is_incoherent_operator(k, tol) for k in ops)
        is_sio = all(is_strictly_incoherent_operator(k, tol) for k in ops)
        decomposition = None
        upper = len(ops) if is_io else None
        sio_rank = None
    return ChannelReport(
        is_valid_channel=bool(valid),
        is_io=bool(is_io),
        is_sio=bool(is_sio),
        kraus_rank=kraus_rank,
        io_rank_upper=upper,
        io_rank_certified=upper is not None and upper == kraus_rank,
        sio_rank=sio_rank,
        decomposition=decomposition,
    )


def _eq15(theta: float, phi: float) -> list:
    c, s, ph = math.cos(theta), math.sin(theta), complex(math.cos(phi), math.sin(phi))
    return [np.array([[c, s * ph], [0, 0]]), np.array([[0, 0], [s, -c * ph]])]


def _qutrit_permutations() -> list:
    eye = np.eye(3)
    return [eye[list(p)] / math.sqrt(6) for p in itertools.permutations(range(3))]


GALLERY_NAMES = ("eq14", "eq15", "eq17", "flattening", "qutrit_permutations", "identity", "dephasing", "hadamard")


def gallery(name: str, theta: float = math.pi / 3, phi: float = 0.0) -> QubitChannel:
    """Named example channels.

    ``eq14`` is incoherent but not strictly incoherent with four linearly
    independent operators; ``eq17`` has Kraus rank 3 but needs four
    incoherent operators; ``eq15`` is the two-operator family parametrized
    by ``theta`` in (0, pi/2) and ``phi``; ``flattening`` is
    ``{|i><j|/sqrt 2}``; ``qutrit_permutations`` is the six 3x3 permutation
    matrices scaled by ``1/sqrt 6``; ``hadamard`` is the (coherent)
    Hadamard unitary.
    """
    h = 0.5
    table = {
        "eq14": lambda: [
            [[h, h], [0, 0]],
            [[0, 0], [h, -h]],
            [[h, 0], [0, h]],
            [[0, h], [h, 0]],
        ],
        "eq17": lambda: [
            [[h, h], [0, 0]],
            [[0, 0], [h, -h]],
            [[h, 0], [0, -h]],
            [[0, h], [h, 0]],
        ],
        "eq15": lambda: _eq15(theta, phi),
        "flattening": lambda: [np.outer(np.eye(2)[i], np.eye(2)[j]) / math.sqrt(2) for i in range(2) for j in range(2)],
        "qutrit_permutations": _qutrit_permutations,
        "identity": lambda: [np.eye(2)],
        "dephasing": lambda: [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])],
        "hadamard": lambda: [np.array([[1, 1], [1, -1]]) / math.sqrt(2)],
    }
    if name not in table:
        raise KeyError(f"unknown example {name!r}; available: {', '.join(GALLERY_NAMES)}")
    return QubitChannel(table[name]())
