"""Seeded sampling of canonical incoherent channels and the reachable-state cloud.

Random streams
--------------
All draws use numpy's PCG64 generator.  Work is cut into chunks of
``CHUNK`` channels; chunk ``j`` of a run seeded with ``seed`` draws from

    numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(j,))))

so the output depends only on ``(seed, count)``, never on how many
workers process the chunks.

Per chunk of ``n`` channels the draw order is: ``r`` (n uniforms on
``r_range``), ``alpha`` (n x 3 uniforms on [0, 1]), ``beta`` real parts
then imaginary parts (each n x 3 uniforms on ``[-beta_box, beta_box]``).
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .canonical import CanonicalIO4, CanonicalIO5
from .channel import BlochVector, bloch_to_rho

CHUNK = 4096


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    count: int = 1
    r_range: tuple = (1.0, 2.0)
    beta_box: float = 2.0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        lo, hi = self.r_range
        if not (0 <= lo <= hi):
            raise ValueError(f"r_range must satisfy 0 <= lo <= hi, got {self.r_range}")
        if self.beta_box <= 0:
            raise ValueError("beta_box must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        out = asdict(self)
        out["r_range"] = list(self.r_range)
        return out


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def sample_io_params(rng: np.random.Generator, n: int, r_range=(1.0, 2.0), beta_box: float = 2.0, n_alpha: int = 3):
    """Vectorized draws: returns ``(r, alpha, beta)`` of shapes (n,), (n, n_alpha), (n, 3).

    ``alpha`` and ``beta`` are normalized to unit length, then their first
    components are divided by ``sqrt(1 + r^2)``.
    """
    r = rng.uniform(r_range[0], r_range[1], size=n)
    alpha = _unit_rows(rng.uniform(0.0, 1.0, size=(n, n_alpha)))
    re = rng.uniform(-beta_box, beta_box, size=(n, 3))
    im = rng.uniform(-beta_box, beta_box, size=(n, 3))
    beta = _unit_rows(re + 1j * im)
    scale = 1.0 / np.sqrt(1.0 + r * r)
    alpha[:, 0] *= scale
    beta[:, 0] *= scale
    return r, alpha, beta


def sample_io(rng: np.random.Generator, r_range=(1.0, 2.0), beta_box: float = 2.0) -> CanonicalIO4:
    """One random four-operator canonical channel."""
    r, alpha, beta = sample_io_params(rng, 1, r_range, beta_box)
    return CanonicalIO4(r[0], alpha[0], beta[0])


def sample_io5(rng: np.random.Generator, r_range=(1.0, 2.0), beta_box: float = 2.0) -> CanonicalIO5:
    """Five-operator analogue: ``alpha`` is a normalized 4-vector."""
    r, alpha, beta = sample_io_params(rng, 1, r_range, beta_box, n_alpha=4)
    return CanonicalIO5(r[0], alpha[0], beta[0])


def canonical_operators(r: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Stacked Kraus operators of shape (n, 4, 2, 2) for batches of four-operator records."""
    n = r.shape[0]
    ops = np.zeros((n, 4, 2, 2), dtype=complex)
    ops[:, 0, 0, 0] = r * alpha[:, 0]
    ops[:, 0, 0, 1] = beta[:, 0]
    ops[:, 1, 1, 0] = alpha[:, 0]
    ops[:, 1, 1, 1] = -r * beta[:, 0]
    ops[:, 2, 0, 0] = alpha[:, 1]
    ops[:, 2, 1, 1] = beta[:, 1]
    ops[:, 3, 0, 1] = beta[:, 2]
    ops[:, 3, 1, 0] = alpha[:, 2]
    return ops


def _bloch_rows(rho: np.ndarray) -> np.ndarray:
    return np.stack(
        [2 * rho[:, 0, 1].real, -2 * rho[:, 0, 1].imag, (rho[:, 0, 0] - rho[:, 1, 1]).real],
        axis=1,
    )


@dataclass
class RegionResult:
    initial: BlochVector
    points: np.ndarray  # (count, 3) output Bloch vectors
    seed: int

    def bloch_vectors(self) -> list[BlochVector]:
        return [BlochVector(*map(float, p)) for p in self.points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "z"])
        for x, y, z in self.points:
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(z))])
        return buf.getvalue()


def _region_chunk(seed, index, n, rho, r_range, beta_box):
    rng = chunk_rng(seed, index)
    r, alpha, beta = sample_io_params(rng, n, r_range, beta_box)
    ops = canonical_operators(r, alpha, beta)
    out = np.einsum("nkij,jl,nkml->nim", ops, rho, ops.conj())
    return _bloch_rows(out)


def achievable_region(cfg: SamplerConfig, initial: BlochVector, workers: int = 1) -> RegionResult:
    """Output Bloch vectors of ``cfg.count`` random channels applied to ``initial``."""
    rho = bloch_to_rho(initial)
    sizes = [min(CHUNK, cfg.count - start) for start in range(0, cfg.count, CHUNK)]
    jobs = [(cfg.seed, j, n, rho, cfg.r_range, cfg.beta_box) for j, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _region_chunk(*job), jobs))
    else:
        parts = [_region_chunk(*job) for job in jobs]
    return RegionResult(initial, np.concatenate(parts, axis=0), cfg.seed)


def dump_config(cfg: SamplerConfig) -> str:
    return json.dumps(cfg.to_json(), indent=1)
