"""Fixed-shape parametrizations of incoherent qubit channels.

Four parameter records are supported:

* :class:`LegacyIO5` -- five operators with a row-1, row-2, diagonal,
  antidiagonal and a single ``|0><0|``-type operator, weights ``a_i``/``b_i``.
* :class:`CanonicalIO5` -- the same five shapes, re-parametrized with a
  ratio ``r`` so that the row operators' cross term cancels identically.
* :class:`CanonicalIO4` -- the optimal four-operator form (no ``|0><0|`` term).
* :class:`CanonicalSIO4` -- the four-operator strictly incoherent form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .channel import QubitChannel, choi, mix_kraus
from .complexmat import max_abs

NORM_TOL = 1e-9


def _norm_error(weights_sq) -> float:
    return abs(float(sum(weights_sq)) - 1.0)


def _check_nonneg(name, values):
    for n, v in enumerate(values, 1):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"{name}{n} must be a finite nonnegative real, got {v!r}")


def _complex_tuple(values, n):
    out = tuple(complex(v) for v in values)
    if len(out) != n:
        raise ValueError(f"expected {n} complex parameters, got {len(out)}")
    return out


def _real_tuple(values, n):
    out = tuple(float(v) for v in values)
    if len(out) != n:
        raise ValueError(f"expected {n} real parameters, got {len(out)}")
    return out


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _unpair(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    re, im = p
    return complex(re, im)


@dataclass(frozen=True)
class CanonicalIO5:
    r: float
    alpha: tuple  # (alpha1, alpha2, alpha3, alpha4), real >= 0
    beta: tuple  # (beta1, beta2, beta3), complex

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "alpha", _real_tuple(self.alpha, 4))
        object.__setattr__(self, "beta", _complex_tuple(self.beta, 3))
        _check_nonneg("r", [self.r])
        _check_nonneg("alpha", self.alpha)
        a1, a2, a3, a4 = self.alpha
        b1, b2, b3 = self.beta
        ea = _norm_error([a2**2, a3**2, a4**2, (self.r**2 + 1) * a1**2])
        eb = _norm_error([abs(b2) ** 2, abs(b3) ** 2, (self.r**2 + 1) * abs(b1) ** 2])
        if ea > NORM_TOL or eb > NORM_TOL:
            raise ValueError(f"normalization violated (alpha error {ea:.2g}, beta error {eb:.2g})")

    def operators(self) -> list[np.ndarray]:
        r = self.r
        a1, a2, a3, a4 = self.alpha
        b1, b2, b3 = self.beta
        return [
            np.array([[r * a1, b1], [0, 0]], dtype=complex),
            np.array([[0, 0], [a1, -r * b1]], dtype=complex),
            np.array([[a2, 0], [0, b2]], dtype=complex),
            np.array([[0, b3], [a3, 0]], dtype=complex),
            np.array([[a4, 0], [0, 0]], dtype=complex),
        ]

    def to_json(self) -> dict:
        return {"form": "io5", "r": self.r, "alpha": list(self.alpha), "beta": [_pair(b) for b in self.beta]}


@dataclass(frozen=True)
class CanonicalIO4:
    r: float
    alpha: tuple  # (alpha1, alpha2, alpha3)
    beta: tuple  # (beta1, beta2, beta3)

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "alpha", _real_tuple(self.alpha, 3))
        object.__setattr__(self, "beta", _complex_tuple(self.beta, 3))
        _check_nonneg("r", [self.r])
        _check_nonneg("alpha", self.alpha)
        a1, a2, a3 = self.alpha
        b1, b2, b3 = self.beta
        ea = _norm_error([a2**2, a3**2, (self.r**2 + 1) * a1**2])
        eb = _norm_error([abs(b2) ** 2, abs(b3) ** 2, (self.r**2 + 1) * abs(b1) ** 2])
        if ea > NORM_TOL or eb > NORM_TOL:
            raise ValueError(f"normalization violated (alpha error {ea:.2g}, beta error {eb:.2g})")

    def operators(self) -> list[np.ndarray]:
        return CanonicalIO5(self.r, self.alpha + (0.0,), self.beta).operators()[:4]

    def to_json(self) -> dict:
        return {"form": "io4", "r": self.r, "alpha": list(self.alpha), "beta": [_pair(b) for b in self.beta]}


@dataclass(frozen=True)
class CanonicalSIO4:
    a: tuple  # (a1, a2, a3, a4), real >= 0
    b: tuple  # (b1, b2), complex

    def __post_init__(self):
        object.__setattr__(self, "a", _real_tuple(self.a, 4))
        object.__setattr__(self, "b", _complex_tuple(self.b, 2))
        _check_nonneg("a", self.a)
        ea = _norm_error([x**2 for x in self.a])
        eb = _norm_error([abs(x) ** 2 for x in self.b])
        if ea > NORM_TOL or eb > NORM_TOL:
            raise ValueError(f"normalization violated (a error {ea:.2g}, b error {eb:.2g})")

    def operators(self) -> list[np.ndarray]:
        a1, a2, a3, a4 = self.a
        b1, b2 = self.b
        return [
            np.array([[a1, 0], [0, b1]], dtype=complex),
            np.array([[0, b2], [a2, 0]], dtype=complex),
            np.array([[a3, 0], [0, 0]], dtype=complex),
            np.array([[0, 0], [a4, 0]], dtype=complex),
        ]

    def to_json(self) -> dict:
        return {"form": "sio4", "a": list(self.a), "b": [_pair(x) for x in self.b]}


@dataclass(frozen=True)
class LegacyIO5:
    a: tuple  # (a1, ..., a5), real >= 0
    b: tuple  # (b1, ..., b4), complex

    def __post_init__(self):
        object.__setattr__(self, "a", _real_tuple(self.a, 5))
        object.__setattr__(self, "b", _complex_tuple(self.b, 4))
        _check_nonneg("a", self.a)
        a, b = self.a, self.b
        ea = _norm_error([x**2 for x in a])
        eb = _norm_error([abs(x) ** 2 for x in b])
        cross = abs(a[0] * b[0] + a[1] * b[1])
        if ea > NORM_TOL or eb > NORM_TOL or cross > NORM_TOL:
            raise ValueError(
                f"normalization violated (a error {ea:.2g}, b error {eb:.2g}, a1b1+a2b2 = {cross:.2g})"
            )

    def operators(self) -> list[np.ndarray]:
        a1, a2, a3, a4, a5 = self.a
        b1, b2, b3, b4 = self.b
        return [
            np.array([[a1, b1], [0, 0]], dtype=complex),
            np.array([[0, 0], [a2, b2]], dtype=complex),
            np.array([[a3, 0], [0, b3]], dtype=complex),
            np.array([[0, b4], [a4, 0]], dtype=complex),
            np.array([[a5, 0], [0, 0]], dtype=complex),
        ]

    def to_json(self) -> dict:
        return {"form": "legacy5", "a": list(self.a), "b": [_pair(x) for x in self.b]}


CanonicalForm = Union[CanonicalIO4, CanonicalIO5, CanonicalSIO4, LegacyIO5]


def form_from_json(obj: dict) -> CanonicalForm:
    kind = obj.get("form", "io4")
    if kind in ("io4", "io5"):
        cls = CanonicalIO4 if kind == "io4" else CanonicalIO5
        return cls(obj["r"], obj["alpha"], [_unpair(b) for b in obj["beta"]])
    if kind == "sio4":
        return CanonicalSIO4(obj["a"], [_unpair(b) for b in obj["b"]])
    if kind == "legacy5":
        return LegacyIO5(obj["a"], [_unpair(b) for b in obj["b"]])
    raise ValueError(f"unknown canonical form {kind!r}")


def to_kraus(form: CanonicalForm, drop_tol: float = 0.0) -> QubitChannel:
    """Operator list of ``form`` with all-zero operators removed."""
    ops = [k for k in form.operators() if max_abs(k) > drop_tol]
    return QubitChannel(ops)


def legacy_to_five(form: LegacyIO5, tol: float = 1e-12) -> CanonicalIO5:
    """Re-express a :class:`LegacyIO5` record with the ratio parameter ``r``.

    With ``a2 > 0`` this is a relabelling (``r = a1/a2``).  With ``a2 = 0``
    the record is strictly incoherent; the output has ``r = 0`` and the lone
    ``|1><1|``-type weight ``b2`` is folded into the diagonal operator, the
    displaced ``|0><0|`` weight landing in ``alpha4``.  The channel is
    preserved in both cases, the operator list only in the first.
    """
    a1, a2, a3, a4, a5 = form.a
    b1, b2, b3, b4 = form.b
    if a2 > tol:
        return CanonicalIO5(a1 / a2, (a2, a3, a4, a5), (b1, b3, b4))

    # a2 = 0: operator 2 is b2|1><1|; fold it into diag(a3, b3).
    mag = math.hypot(abs(b3), abs(b2))
    if mag > 0:
        phase = b3 / abs(b3) if abs(b3) > 0 else 1.0
        beta2 = mag * phase
        alpha2 = a3 * abs(b3) / mag
    else:
        beta2, alpha2 = 0j, a3
    alpha4 = math.sqrt(max(a1**2 + a5**2 + a3**2 - alpha2**2, 0.0))
    return CanonicalIO5(0.0, (0.0, alpha2, a4, alpha4), (b1, beta2, b4))


def _eliminate(ops: list, idx: list) -> list:
    """Zero one operator among ``ops[idx]`` by a unitary remix.

    The operators at ``idx`` must span fewer than ``len(idx)`` dimensions.
    The left singular vectors of their stacked vectorizations give the
    unitary; rows beyond the rank come out numerically zero.
    """
    vecs = np.array([ops[i].reshape(-1) for i in idx])
    w, _, _ = np.linalg.svd(vecs)
    u = np.eye(len(ops), dtype=complex)
    u[np.ix_(idx, idx)] = w.conj().T
    return mix_kraus(u, ops)


def _embed(n: int, idx: list, block) -> np.ndarray:
    u = np.eye(n, dtype=complex)
    u[np.ix_(idx, idx)] = block
    return u


def reduce_observation1(form: CanonicalIO5, tol: float = 1e-9) -> QubitChannel:
    """Shrink a five-operator record with a vanishing parameter to <= 4 operators.

    Dispatch, first match wins:

    * ``alpha4 = 0``: drop the fifth operator.
    * ``alpha1*beta1 = 0`` or ``r = 0``: the channel is strictly incoherent;
      rebuild it in the four-operator SIO form.
    * ``beta2 = 0``: the diagonal operator is parallel to ``|0><0|``; merge.
    * ``alpha3 = 0``: three operators live in the first row; remix one away.
    * ``alpha2 = 0``: rotate the first-row pair and the second-row/diagonal
      pair so that two single-entry antidiagonal operators appear, then
      remix one of the three antidiagonal-space operators away.
    * ``beta3 = 0``: mirror image of the previous case on the diagonal space.

    Raises ``ValueError`` when no parameter is below ``tol``.
    """
    r = form.r
    a1, a2, a3, a4 = form.alpha
    b1, b2, b3 = form.beta
    ops = form.operators()

    if a4 <= tol:
        out = ops[:4]
    elif a1 * abs(b1) <= tol or r * a1 <= tol or r * abs(b1) <= tol:
        from .classify import sio_decompose

        return sio_decompose(choi(ops))
    elif abs(b2) <= tol:
        out = _eliminate(ops, [2, 4])
    elif a3 <= tol:
        out = _eliminate(ops, [0, 3, 4])
    elif a2 <= tol:
        n1 = math.hypot(r * a1, a4)
        u = np.array([[r * a1, a4], [-a4, r * a1]]) / n1
        n2 = math.hypot(r * abs(b1), abs(b2))
        v = np.array([[r * np.conj(b1), -np.conj(b2)], [b2, r * b1]]) / n2
        mixer = _embed(5, [0, 4], u) @ _embed(5, [1, 2], v)
        out = _eliminate(mix_kraus(mixer, ops), [2, 3, 4])
    elif abs(b3) <= tol:
        n = math.hypot(a1, a3)
        u = np.array([[a1, a3], [-a3, a1]]) / n
        out = _eliminate(mix_kraus(_embed(5, [1, 3], u), ops), [2, 3, 4])
    else:
        raise ValueError("no parameter below tolerance; use decompose_io for the generic case")
    return QubitChannel([k for k in out if max_abs(k) > 1e-12], validate=True)
