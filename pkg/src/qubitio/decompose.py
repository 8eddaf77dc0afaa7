"""Four-operator incoherent decomposition of a qubit channel's Choi matrix.

Write ``2M`` for twice the Choi matrix of an incoherent qubit channel.  In
slot order ``(K00, K01, K10, K11)`` it has the shape

    [[a,  e,  0,  g],
     [e*, b,  f,  0],
     [0,  f*, c, -e],
     [g*, 0, -e*, d]]

and is split as a sum of four rank-one blocks living on the slot pairs
``(0,1)``, ``(2,3)``, ``(0,3)`` and ``(1,2)``.  Each rank-one block is the
Choi matrix of one incoherent Kraus operator: a first-row, second-row,
diagonal and antidiagonal operator respectively.

The split is fixed by two numbers ``A`` (diagonal block's ``(0,0)`` entry)
and ``B`` (antidiagonal block's slot-1 entry), both functions of a single
mixing parameter ``k > 0`` that solves a quadratic.  Degenerate inputs
(vanishing ``e``, ``f`` or ``g``) take closed-form branches instead.

All scalar equations use the magnitudes ``|e|, |f|, |g|``; the blocks are
assembled from the original complex entries.  Block determinants only see
magnitudes, so the rank-one conditions carry over unchanged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .canonical import CanonicalIO4, CanonicalIO5, CanonicalSIO4
from .channel import COMPLETENESS_TOL, QubitChannel, choi
from .complexmat import as_cmatrix, hermitian_eigen, is_psd, max_abs
from .errors import ConstraintViolation, NotIncoherentChannel, NoValidRoot

log = logging.getLogger(__name__)

ZERO_TOL = 1e-9
ROOT_RTOL = 1e-8

# slot pairs of the four rank-one blocks, and which member holds the
# nonnegative "alpha-type" amplitude
BLOCK_SLOTS = {
    "Row1": ((0, 1), 0),
    "Row2": ((2, 3), 0),
    "Diag": ((0, 3), 0),
    "Antidiag": ((1, 2), 1),
}
BLOCK_ORDER = ("Row1", "Row2", "Diag", "Antidiag")


@dataclass(frozen=True)
class ChoiEntries:
    """The seven scalars of ``2M``."""

    a: float
    b: float
    c: float
    d: float
    e: complex
    f: complex
    g: complex

    @property
    def E(self) -> float:
        return abs(self.e)

    @property
    def F(self) -> float:
        return abs(self.f)

    @property
    def G(self) -> float:
        return abs(self.g)

    def matrix(self) -> np.ndarray:
        """Reassemble ``2M``."""
        a, b, c, d, e, f, g = self.a, self.b, self.c, self.d, self.e, self.f, self.g
        return np.array(
            [
                [a, e, 0, g],
                [np.conj(e), b, f, 0],
                [0, np.conj(f), c, -e],
                [np.conj(g), 0, -np.conj(e), d],
            ],
            dtype=complex,
        )


@dataclass(frozen=True)
class QuadraticData:
    d1: float
    d2: float
    d3: float
    d4: float
    delta: float
    coeff_alpha: float
    coeff_beta: float
    coeff_gamma: float
    disc: float  # beta^2 - 4 alpha gamma, evaluated directly
    disc_closed: float  # factored closed form
    roots: tuple


class ABTerms(NamedTuple):
    """``A``, ``B`` and the four derived block entries for one value of ``k``."""

    k: float
    A: float
    B: float
    a_minus_A: float
    b_minus_B: float
    g2_over_A: float
    f2_over_B: float


@dataclass
class DecompositionSolution:
    branch: str
    kraus: QubitChannel
    blocks: dict
    canonical: Optional[CanonicalIO4]
    canonical_sio: Optional[CanonicalSIO4] = None
    k: Optional[float] = None
    A: Optional[float] = None
    B: Optional[float] = None
    quadratic: Optional[QuadraticData] = None
    valid_roots: int = 0
    choi_residual: float = 0.0
    block_defects: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "branch": self.branch,
            "k": self.k,
            "A": self.A,
            "B": self.B,
            "canonical": self.canonical.to_json() if self.canonical else None,
            "canonical_sio": self.canonical_sio.to_json() if self.canonical_sio else None,
            "kraus": self.kraus.to_json()["kraus"],
            "num_operators": len(self.kraus),
            "choi_residual": self.choi_residual,
            "block_defects": self.block_defects,
        }
        if self.quadratic is not None:
            out["quadratic"] = {
                "coeff_alpha": self.quadratic.coeff_alpha,
                "coeff_beta": self.quadratic.coeff_beta,
                "coeff_gamma": self.quadratic.coeff_gamma,
                "delta": self.quadratic.delta,
                "discriminant": self.quadratic.disc_closed,
                "roots": list(self.quadratic.roots),
                "valid_roots": self.valid_roots,
            }
        return out


def _scale(m: np.ndarray) -> float:
    return max(max_abs(m), 1e-300)


def io_membership(m, tol: float = ZERO_TOL) -> bool:
    """True iff the Choi matrix vanishes on the slot pairs (0,2) and (1,3).

    An incoherent operator has at most one nonzero entry per column, so its
    vectorization never couples slots 0 and 2 (column 0) or 1 and 3
    (column 1).  Conversely, :func:`decompose_io` builds an incoherent
    decomposition for every matrix that passes.
    """
    m = as_cmatrix(m)
    if m.shape != (4, 4):
        return False
    s = _scale(m)
    return bool(abs(m[0, 2]) <= tol * s and abs(m[1, 3]) <= tol * s)


def extract_entries(m, tol: float = ZERO_TOL) -> ChoiEntries:
    m = as_cmatrix(m)
    if m.shape != (4, 4):
        raise ValueError(f"qubit Choi matrix must be 4x4, got {m.shape}")
    s = _scale(m)
    for i, j in ((0, 2), (1, 3)):
        if abs(m[i, j]) > tol * s:
            raise NotIncoherentChannel(f"channel is not incoherent: |m{i}{j}| = {abs(m[i, j]):.6g}")
    if abs(m[2, 3] + m[0, 1]) > max(tol, COMPLETENESS_TOL) * s:
        raise ConstraintViolation(f"completeness breach: |m23 + m01| = {abs(m[2, 3] + m[0, 1]):.3g}")
    a, b, c, d = (2 * m[i, i].real for i in range(4))
    if abs(a + c - 1) > COMPLETENESS_TOL or abs(b + d - 1) > COMPLETENESS_TOL:
        raise ConstraintViolation(f"completeness breach: a + c = {a + c:.12g}, b + d = {b + d:.12g}")
    return ChoiEntries(a, b, c, d, complex(2 * m[0, 1]), complex(2 * m[1, 2]), complex(2 * m[0, 3]))


def _exact_polys(ent: ChoiEntries) -> tuple:
    """Cancellation-prone polynomials of the entries, evaluated exactly and rounded once.

    ``delta`` vanishes for double-root channels and the minors for nearly
    rank-deficient ones; plain float evaluation loses all relative accuracy
    there.  Returns ``(d1, d2, d3, d4, delta, delta + 4|e|^2|f||g|, bracket)``.
    """
    a, b, c, d = (Fraction(x) for x in (ent.a, ent.b, ent.c, ent.d))
    e2 = Fraction(ent.e.real) ** 2 + Fraction(ent.e.imag) ** 2
    f2 = Fraction(ent.f.real) ** 2 + Fraction(ent.f.imag) ** 2
    g2 = Fraction(ent.g.real) ** 2 + Fraction(ent.g.imag) ** 2
    fg = Fraction(ent.F) * Fraction(ent.G)
    adg, bcf, cde = a * d - g2, b * c - f2, c * d - e2
    delta = adg * bcf - e2 * (a * b + c * d - e2 + 2 * fg)
    exact = (
        a * bcf - c * e2,
        b * adg - d * e2,
        a * cde - c * g2,
        b * cde - d * f2,
        delta,
        delta + 4 * e2 * fg,
        adg * bcf - e2 * e2,
    )
    return tuple(float(x) for x in exact)


def quadratic_data(ent: ChoiEntries) -> QuadraticData:
    """Coefficients, discriminant and positive roots of ``alpha k^2 - beta k + gamma = 0``."""
    a, b, c, d = ent.a, ent.b, ent.c, ent.d
    e, f, g = ent.E, ent.F, ent.G
    e2, f2, g2 = e * e, f * f, g * g
    d1, d2, d3, d4, delta, delta_fg, bracket = _exact_polys(ent)
    qa = e2 * d2 * d4
    qb = delta * (delta + e2 * (a * b + c * d + 4 * f * g)) + 2 * e2 * e2 * (
        a * b * f * g + a * d * f2 + b * c * g2 + c * d * f * g
    )
    qc = e2 * d1 * d3
    disc = qb * qb - 4 * qa * qc
    disc_closed = delta * delta_fg * bracket**2

    if min(d1, d2, d3, d4, delta) < -1e-9:
        raise ConstraintViolation(
            f"entries are not positive semidefinite (minors {d1:.3g}, {d2:.3g}, {d3:.3g}, {d4:.3g}, delta {delta:.3g})"
        )
    # past the check above a negative delta is rounding in the entries, and the
    # closed form is a square times delta terms, so clamp at zero
    root_disc = max(disc_closed, 0.0)
    sq = math.sqrt(root_disc)
    roots = []
    if qb + sq > 0:
        # stable pair: small root via the product of roots, large via the sum
        small = 2 * qc / (qb + sq)
        if small > 0:
            roots.append(small)
        if qa > 0:
            large = (qb + sq) / (2 * qa)
            if large > 0 and math.isfinite(large):
                roots.append(large)
    return QuadraticData(d1, d2, d3, d4, delta, qa, qb, qc, disc, disc_closed, tuple(sorted(roots)))


def delta_from_canonical(form: CanonicalIO5) -> float:
    """``delta`` written in the five-operator parameters; a sum of squares, so never negative.

    Only the moduli of ``beta`` enter, matching the fact that ``delta``
    depends on ``e, f, g`` through their magnitudes.
    """
    r = form.r
    a1, a2, a3, a4 = form.alpha
    b1, b2, b3 = (abs(z) for z in form.beta)
    return (
        a1**2 * a4**2 * b2**2 * (b1**2 + b3**2)
        + a3**2 * a4**2 * b1**2 * (b2**2 + b1**2 * r**2)
        + r**2 * (a2 * a3 * b1**2 - a1**2 * b2 * b3) ** 2
    )


def ab_terms(k: float, ent: ChoiEntries) -> ABTerms:
    """``A(k)``, ``B(k)`` and derived quantities, each in cancellation-free form."""
    if not k > 0:
        raise ValueError(f"mixing parameter must be positive, got {k}")
    a, b, c, d = ent.a, ent.b, ent.c, ent.d
    f2, g2 = ent.F**2, ent.G**2

    t = a - k * d
    s = math.sqrt(t * t + 4 * k * g2)
    if t >= 0:
        A = 0.5 * (t + s)
        g2_over_A = 2 * g2 / (t + s) if t + s > 0 else 0.0
    else:
        A = 2 * k * g2 / (s - t)
        g2_over_A = (s - t) / (2 * k)
    a_minus_A = 2 * k * (a * d - g2) / ((a + k * d) + s)

    u = k * b - c
    s2 = math.sqrt(u * u + 4 * k * f2)
    if u >= 0:
        B = (u + s2) / (2 * k)
        f2_over_B = 2 * k * f2 / (u + s2) if u + s2 > 0 else 0.0
    else:
        B = 2 * f2 / (s2 - u)
        f2_over_B = 0.5 * (s2 - u)
    b_minus_B = 2 * (b * c - f2) / ((c + k * b) + s2)
    return ABTerms(k, A, B, a_minus_A, b_minus_B, g2_over_A, f2_over_B)


def compute_AB(k: float, ent: ChoiEntries, tol: float = 1e-9) -> tuple:
    """``(A, B)`` for mixing parameter ``k``; checks ``|g|^2/d < A < a`` and ``|f|^2/c < B < b``."""
    terms = ab_terms(k, ent)
    A, B = terms.A, terms.B
    lo_a = ent.G**2 / ent.d if ent.d > 0 else 0.0
    lo_b = ent.F**2 / ent.c if ent.c > 0 else 0.0
    if not (lo_a - tol <= A <= ent.a + tol and lo_b - tol <= B <= ent.b + tol):
        raise ConstraintViolation(f"A = {A:.6g} or B = {B:.6g} outside its admissible interval")
    return A, B


def product_residuals(terms: ABTerms, ent: ChoiEntries) -> tuple:
    """Relative residuals of both rank-one conditions on the row blocks.

    ``(a-A)(b-B) = |e|^2`` and ``(c - |f|^2/B)(d - |g|^2/A) = |e|^2``, the
    second evaluated by direct subtraction so it checks the first
    independently.
    """
    e2 = ent.E**2
    r1 = abs(terms.a_minus_A * terms.b_minus_B - e2) / e2
    r2 = abs((ent.c - terms.f2_over_B) * (ent.d - terms.g2_over_A) - e2) / e2
    return r1, r2


def _rounding_floor(terms: ABTerms, ent: ChoiEntries) -> float:
    """Relative forward-error bound of the direct-subtraction residual.

    When ``|e|`` is small, ``c - |f|^2/B`` and ``d - |g|^2/A`` cancel
    heavily and the second residual cannot drop below roughly
    ``eps * (c |d - g2/A| + d |c - f2/B|) / |e|^2`` however exact ``k`` is.
    """
    eps = np.finfo(float).eps
    c_rest, d_rest = ent.c - terms.f2_over_B, ent.d - terms.g2_over_A
    noise = 8 * eps * (max(ent.c, terms.f2_over_B) * abs(d_rest) + max(ent.d, terms.g2_over_A) * abs(c_rest))
    return noise / ent.E**2


def _polish(k: float, ent: ChoiEntries, steps: int = 8) -> float:
    """Newton refinement of ``(a-A)(b-B) - |e|^2 = 0`` in ``log k``; only improving steps are kept."""
    e2 = ent.E**2

    def h(logk):
        t = ab_terms(math.exp(logk), ent)
        return t.a_minus_A * t.b_minus_B - e2

    x = math.log(k)
    hx = h(x)
    for _ in range(steps):
        if hx == 0.0:
            break
        step = 1e-6
        slope = (h(x + step) - h(x - step)) / (2 * step)
        if slope == 0.0:
            break
        x_new = x - hx / slope
        h_new = h(x_new)
        if abs(h_new) >= abs(hx):
            break
        x, hx = x_new, h_new
    return math.exp(x)


def select_root(q: QuadraticData, ent: ChoiEntries, rtol: float = ROOT_RTOL, polish: bool = True):
    """Smallest root whose ``(A, B)`` satisfy both rank-one conditions.

    Squaring twice to reach the quadratic can admit roots of the squared
    equation only; each candidate is substituted back.  A spurious root
    leaves an O(1) residual; the second residual is allowed its rounding
    floor on top of ``rtol``.  Returns ``(k, number_of_valid_roots)``.
    """
    if not q.roots:
        raise NoValidRoot("quadratic has no positive root")
    valid = []
    for k in q.roots:
        kk = _polish(k, ent) if polish else k
        terms = ab_terms(kk, ent)
        r1, r2 = product_residuals(terms, ent)
        if r1 <= rtol and r2 <= rtol + _rounding_floor(terms, ent):
            valid.append(kk)
    if not valid:
        raise NoValidRoot(f"no root of {q.roots} satisfies the rank-one conditions")
    return min(valid), len(valid)


def _pair_block(p, q, s) -> np.ndarray:
    return np.array([[p, q], [np.conj(q), s]], dtype=complex)


def _embed_block(block: np.ndarray, slots) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[np.ix_(slots, slots)] = block
    return out


def split_blocks(ent: ChoiEntries, A: float, B: float, terms: Optional[ABTerms] = None) -> dict:
    """The four 4x4 rank-one blocks summing to ``2M``, keyed by operator type.

    With ``terms`` the derived entries come from :func:`ab_terms`; otherwise
    they are formed from ``A`` and ``B`` directly.
    """
    e, f, g = ent.e, ent.f, ent.g
    if terms is None:
        g2_over_A = ent.G**2 / A if A > 0 else 0.0
        f2_over_B = ent.F**2 / B if B > 0 else 0.0
        a_minus_A, b_minus_B = ent.a - A, ent.b - B
        c_rest, d_rest = ent.c - f2_over_B, ent.d - g2_over_A
    else:
        g2_over_A, f2_over_B = terms.g2_over_A, terms.f2_over_B
        a_minus_A, b_minus_B = terms.a_minus_A, terms.b_minus_B
        c_rest, d_rest = terms.k * b_minus_B, a_minus_A / terms.k
    pairs = {
        "Row1": _pair_block(a_minus_A, e, b_minus_B),
        "Row2": _pair_block(c_rest, -e, d_rest),
        "Diag": _pair_block(A, g, g2_over_A),
        "Antidiag": _pair_block(B, f, f2_over_B),
    }
    return {tag: _embed_block(pairs[tag], BLOCK_SLOTS[tag][0]) for tag in BLOCK_ORDER}


def block_defect(block: np.ndarray, slots) -> float:
    """Second eigenvalue of the 2x2 sub-block (zero for an exact rank-one block)."""
    w, _ = hermitian_eigen(block[np.ix_(slots, slots)])
    return float(abs(w[1]))


def rank1_to_kraus(block: np.ndarray, slots, alpha_index: int = 0) -> np.ndarray:
    """Kraus operator whose vectorization ``v`` gives ``v v^H = block``.

    ``v`` is the dominant eigenvector scaled by the root of its eigenvalue,
    rephased so the entry at ``slots[alpha_index]`` is real nonnegative.
    Slot ``s`` maps to matrix entry ``(s // 2, s % 2)``.
    """
    sub = block[np.ix_(slots, slots)]
    k = np.zeros((2, 2), dtype=complex)
    if max_abs(sub) == 0.0:
        return k
    w, vecs = hermitian_eigen(sub)
    v = math.sqrt(max(w[0], 0.0)) * vecs[:, 0]
    idx = alpha_index if abs(v[alpha_index]) > 0 else 1 - alpha_index
    pivot = v[idx]
    if abs(pivot) > 0:
        v = v * (abs(pivot) / pivot)
        v[idx] = abs(pivot)
    for s, val in zip(slots, v):
        k[s // 2, s % 2] = val
    return k


def _vec(k: np.ndarray, slots) -> tuple:
    return tuple(k[s // 2, s % 2] for s in slots)


def fit_canonical(ops: dict, tol: float = 1e-12) -> Optional[CanonicalIO4]:
    """Read the four-operator canonical parameters off typed operators.

    ``ops`` maps each block tag to its Kraus operator.  Returns ``None``
    when the first-row/second-row pair cannot be written with a finite
    ratio ``r`` (a first-row weight with an empty second row).
    """
    p, q = _vec(ops["Row1"], (0, 1))
    s, t = _vec(ops["Row2"], (2, 3))
    p, s = p.real, s.real
    if s > tol:
        alpha1, r, beta1 = s, p / s, q
    elif p > tol:
        return None
    else:
        alpha1 = 0.0
        if abs(q) > tol:
            beta1, r = q, abs(t) / abs(q)
        elif abs(t) > tol:
            return None
        else:
            beta1, r = 0j, 0.0
    alpha2, beta2 = _vec(ops["Diag"], (0, 3))
    beta3, alpha3 = _vec(ops["Antidiag"], (1, 2))
    try:
        return CanonicalIO4(r, (alpha1, alpha2.real, alpha3.real), (beta1, beta2, beta3))
    except ValueError as exc:
        log.warning("canonical parameters failed validation: %s", exc)
        return None


def _clip(x: float, tol: float) -> float:
    if x < -tol:
        raise ConstraintViolation(f"block entry {x:.3g} is negative; matrix is not PSD")
    return max(x, 0.0)


def _sio_blocks(ent: ChoiEntries, zero: float) -> dict:
    """Peel each slot-pair block ``[[a, g], [g*, d]]``, ``[[b, f], [f*, c]]``.

    Pivots ``d`` and ``b``: the rank-one part takes the whole pivot and the
    remainders ``a - |g|^2/d`` (slot 0) and ``c - |f|^2/b`` (slot 2) become
    single-entry operators in the first- and second-row slots.
    """
    a, b, c, d = ent.a, ent.b, ent.c, ent.d
    # a coupling can exceed the threshold while its diagonal is below it (|g|^2 <= a d)
    if d > 0 and (d > zero or ent.G > zero):
        diag = _pair_block(ent.G**2 / d, ent.g, d)
        rem0 = _clip(a - ent.G**2 / d, zero)
    else:
        diag, rem0 = _pair_block(0, 0, 0), a
    if b > 0 and (b > zero or ent.F > zero):
        anti = _pair_block(b, ent.f, ent.F**2 / b)
        rem2 = _clip(c - ent.F**2 / b, zero)
    else:
        anti, rem2 = _pair_block(0, 0, 0), c
    # remainders at or below the rank threshold are numerical noise
    rem0 = rem0 if rem0 > zero else 0.0
    rem2 = rem2 if rem2 > zero else 0.0
    pairs = {
        "Row1": _pair_block(rem0, 0, 0),
        "Row2": _pair_block(rem2, 0, 0),
        "Diag": diag,
        "Antidiag": anti,
    }
    return {tag: _embed_block(pairs[tag], BLOCK_SLOTS[tag][0]) for tag in BLOCK_ORDER}


def _branch_sio(ent, zero):
    return _sio_blocks(ent, zero), {}


def _branch_row(ent, zero):
    a, b, c, d = ent.a, ent.b, ent.c, ent.d
    E2 = ent.E**2
    # small f and g borrow a sliver of b and d so they are not dropped
    b_f = d_g = 0.0
    for _ in range(3):
        A = _clip(a - E2 / (b - b_f), zero)
        C = _clip(c - E2 / (d - d_g), zero)
        d_g = ent.G**2 / A if A > 0 else 0.0
        b_f = ent.F**2 / C if C > 0 else 0.0
    pairs = {
        "Row1": _pair_block(E2 / (b - b_f), ent.e, b - b_f),
        "Row2": _pair_block(E2 / (d - d_g), -ent.e, d - d_g),
        "Diag": _pair_block(A, ent.g if A > 0 else 0, d_g),
        "Antidiag": _pair_block(b_f, ent.f if C > 0 else 0, C),
    }
    return {tag: _embed_block(pairs[tag], BLOCK_SLOTS[tag][0]) for tag in BLOCK_ORDER}, {}


def _branch_g0(ent, zero):
    a, b, c, d = ent.a, ent.b, ent.c, ent.d
    E2 = ent.E**2
    cde = c * d - E2
    d4 = b * cde - d * ent.F**2
    b_minus_B = d4 / cde
    B = ent.F**2 * d / cde
    a_minus_A = E2 / b_minus_B
    A = _clip(a - a_minus_A, zero)
    pairs = {
        "Row1": _pair_block(a_minus_A, ent.e, b_minus_B),
        "Row2": _pair_block(E2 / d, -ent.e, d),
        "Diag": _pair_block(A, 0, 0),
        "Antidiag": _pair_block(B, ent.f, cde / d),
    }
    return {tag: _embed_block(pairs[tag], BLOCK_SLOTS[tag][0]) for tag in BLOCK_ORDER}, dict(A=A, B=B)


def _branch_f0(ent, zero):
    a, b, c, d = ent.a, ent.b, ent.c, ent.d
    E2 = ent.E**2
    cde = c * d - E2
    d3 = a * cde - c * ent.G**2
    a_minus_A = d3 / cde
    A = ent.G**2 * c / cde
    b_minus_B = E2 / a_minus_A
    B = _clip(b - b_minus_B, zero)
    pairs = {
        "Row1": _pair_block(a_minus_A, ent.e, b_minus_B),
        "Row2": _pair_block(c, -ent.e, E2 / c),
        "Diag": _pair_block(A, ent.g, cde / c),
        "Antidiag": _pair_block(B, 0, 0),
    }
    return {tag: _embed_block(pairs[tag], BLOCK_SLOTS[tag][0]) for tag in BLOCK_ORDER}, dict(A=A, B=B)


def _branch_quadratic(ent, zero):
    q = quadratic_data(ent)
    k, nvalid = select_root(q, ent)
    terms = ab_terms(k, ent)
    A, B = compute_AB(k, ent)
    log.debug("quadratic branch: %d of %d roots valid", nvalid, len(q.roots))
    return split_blocks(ent, A, B, terms), dict(k=k, A=A, B=B, quadratic=q, valid_roots=nvalid)


_BRANCHES = {
    "sio": _branch_sio,
    "row": _branch_row,
    "g0": _branch_g0,
    "f0": _branch_f0,
    "quadratic": _branch_quadratic,
}

# residual (relative to max|2M|) above which the next branch is tried
FALLBACK_RESIDUAL = 1e-10
# residual above which no branch counts as a decomposition
ACCEPT_RESIDUAL = 1e-6


def _branch_order(ent, zero):
    """Tolerance-selected branch first, then whatever else can apply."""
    if ent.E <= zero:
        first = "sio"
    elif ent.F <= zero and ent.G <= zero:
        first = "row"
    elif ent.G <= zero:
        first = "g0"
    elif ent.F <= zero:
        first = "f0"
    else:
        return ["quadratic"]
    rest = []
    if ent.E > 0 and ent.F > 0 and ent.G > 0:
        rest.append("quadratic")
    if ent.E > 0:
        rest += ["g0", "f0", "row"]
    rest.append("sio")
    return [first] + [b for b in rest if b != first]


def _assemble(m, ent, zero, branch):
    with np.errstate(divide="raise", invalid="raise"):
        blocks, sol = _BRANCHES[branch](ent, zero)
    ops, defects = {}, {}
    for tag in BLOCK_ORDER:
        slots, alpha_index = BLOCK_SLOTS[tag]
        defects[tag] = block_defect(blocks[tag], slots)
        ops[tag] = rank1_to_kraus(blocks[tag], slots, alpha_index)
    kept = [ops[tag] for tag in BLOCK_ORDER if max_abs(ops[tag]) > zero]
    kraus = QubitChannel(kept, validate=False)
    residual = max_abs(choi(kraus) - m)
    if not math.isfinite(residual):
        raise ConstraintViolation(f"{branch} branch produced non-finite operators")
    return blocks, sol, ops, defects, kraus, residual


def decompose_io(m, tol: float = ZERO_TOL) -> DecompositionSolution:
    """At most four incoherent Kraus operators reproducing the Choi matrix ``m``.

    Branches (``zero = tol * max|2M|``):

    ``sio``       ``|e| <= zero``: strictly incoherent structure, peeled blockwise.
    ``row``       ``|f|, |g| <= zero``: row blocks take ``b`` and ``d`` whole.
    ``g0``        ``|g| <= zero``: closed form ``B = |f|^2 d / (cd - |e|^2)``.
    ``f0``        ``|f| <= zero``: closed form ``A = |g|^2 c / (cd - |e|^2)``.
    ``quadratic`` generic: ``k`` from the quadratic, validated by substitution.

    The selected branch is checked by rebuilding the Choi matrix. When a
    coupling sits just above zero but under the threshold the degenerate
    formulas can be off, so the remaining branches are tried and the one
    with the smallest residual is kept.

    Raises :class:`NotIncoherentChannel`, :class:`ConstraintViolation` or
    :class:`NoValidRoot`.
    """
    m = as_cmatrix(m)
    ent = extract_entries(m, tol)
    if not is_psd(m, 1e-9):
        raise ConstraintViolation("Choi matrix is not positive semidefinite")
    scale = _scale(2 * m)
    zero = tol * scale

    best, errors = None, []
    for branch in _branch_order(ent, zero):
        try:
            built = _assemble(m, ent, zero, branch)
        except (ConstraintViolation, NoValidRoot, ZeroDivisionError, FloatingPointError, ValueError) as exc:
            errors.append(exc)
            continue
        if best is None or built[-1] < best[1][-1]:
            best = (branch, built)
        if built[-1] <= FALLBACK_RESIDUAL * scale:
            break
        log.debug("%s branch residual %.3g, trying next branch", branch, built[-1])
    if best is None or best[1][-1] > ACCEPT_RESIDUAL * scale:
        if best is None and len(errors) == 1:
            raise errors[0]
        detail = f"best residual {best[1][-1]:.3g}" if best else "; ".join(map(str, errors))
        raise ConstraintViolation(f"no branch reproduces the Choi matrix ({detail})")

    branch, (blocks, sol, ops, defects, kraus, residual) = best
    fields = dict(k=None, A=None, B=None, quadratic=None, valid_roots=0)
    fields.update(sol)
    return DecompositionSolution(
        branch=branch,
        kraus=kraus,
        blocks=blocks,
        canonical=fit_canonical(ops),
        canonical_sio=_sio_record(ops) if branch == "sio" else None,
        choi_residual=residual,
        block_defects=defects,
        **fields,
    )


def _sio_record(ops: dict) -> Optional[CanonicalSIO4]:
    a1, b1 = _vec(ops["Diag"], (0, 3))
    b2, a2 = _vec(ops["Antidiag"], (1, 2))
    a3 = abs(ops["Row1"][0, 0])
    a4 = abs(ops["Row2"][1, 0])
    try:
        return CanonicalSIO4((a1.real, a2.real, a3, a4), (b1, b2))
    except ValueError as exc:
        log.warning("SIO parameters failed validation: %s", exc)
        return None
