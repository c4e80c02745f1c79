"""Seeded Monte Carlo estimation over standard Gaussian space.

Draws are produced in fixed blocks of ``BLOCK_ROWS`` samples.  Block ``b``
of a config with seed ``s`` comes from its own PCG64 stream keyed by
``SeedSequence(s, spawn_key=(b,))``, and per-block moments are merged in
block order, so an estimate depends only on ``(inputs, seed, n_samples)``:
not on ``batch_size`` and not on the number of worker threads.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterator

import numpy as np

from .core import Estimate, Polytope, VectorSet

BLOCK_ROWS = 1024
SEED_MASK = (1 << 64) - 1


def derive_seed(seed: int, label: str | int) -> int:
    digest = hashlib.blake2b(f"{int(seed) & SEED_MASK}/{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 100_000
    seed: int = 0
    batch_size: int = 4096
    antithetic: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1 or self.batch_size < 1:
            raise ValueError("n_samples and batch_size must be positive")
        if self.batch_size > self.n_samples:
            object.__setattr__(self, "batch_size", self.n_samples)
        object.__setattr__(self, "seed", int(self.seed) & SEED_MASK)

    def derive(self, label: str | int) -> McConfig:
        """Independent child stream, e.g. ``cfg.derive("width")``."""
        return replace(self, seed=derive_seed(self.seed, label))

    def with_samples(self, n_samples: int) -> McConfig:
        return replace(self, n_samples=n_samples, batch_size=min(self.batch_size, n_samples))


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _block_draws(dim: int, rows: int, seed: int, block: int, antithetic: bool) -> np.ndarray:
    rng = block_rng(seed, block)
    if not antithetic:
        return rng.standard_normal((rows, dim))
    half = rng.standard_normal(((rows + 1) // 2, dim))
    return np.vstack([half, -half])[:rows]


def gaussian_blocks(dim: int, cfg: McConfig) -> Iterator[np.ndarray]:
    """Yield the config's Gaussian samples, block by block."""
    n_blocks = -(-cfg.n_samples // BLOCK_ROWS)
    for b in range(n_blocks):
        rows = min(BLOCK_ROWS, cfg.n_samples - b * BLOCK_ROWS)
        yield _block_draws(dim, rows, cfg.seed, b, cfg.antithetic)


def _block_moments(fn, dim, cfg, b):
    rows = min(BLOCK_ROWS, cfg.n_samples - b * BLOCK_ROWS)
    vals = np.asarray(fn(_block_draws(dim, rows, cfg.seed, b, cfg.antithetic)), dtype=np.float64)
    mean = vals.mean(axis=0)
    m2 = ((vals - mean) ** 2).sum(axis=0)
    return rows, mean, m2


def moments(fn: Callable[[np.ndarray], np.ndarray], dim: int, cfg: McConfig):
    """Sample mean and sum of squared deviations of ``fn(g)``.

    ``fn`` maps a (rows, dim) batch to shape (rows,) or (rows, k).
    Returns ``(n, mean, m2)``.
    """
    n_blocks = -(-cfg.n_samples // BLOCK_ROWS)
    blocks = range(n_blocks)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(lambda b: _block_moments(fn, dim, cfg, b), blocks))
    else:
        results = [_block_moments(fn, dim, cfg, b) for b in blocks]
    n, mean, m2 = results[0]
    for nb, mb, m2b in results[1:]:
        total = n + nb
        delta = mb - mean
        mean = mean + delta * (nb / total)
        m2 = m2 + m2b + delta * delta * (n * nb / total)
        n = total
    return n, mean, m2


def estimate_mean(fn, dim: int, cfg: McConfig) -> Estimate:
    n, mean, m2 = moments(fn, dim, cfg)
    var = float(m2) / (n - 1) if n > 1 else 0.0
    return Estimate(float(mean), float(np.sqrt(var / n)), n, cfg.seed)


def estimate_event_prob(predicate: Callable[[np.ndarray], np.ndarray], dim: int, cfg: McConfig,
                        vectorized: bool = True) -> Estimate:
    """Pr[predicate(g)] for g ~ N(0, I_dim); binomial standard error."""
    if vectorized:
        def fn(g):
            return np.asarray(predicate(g), dtype=bool).astype(np.float64)
    else:
        def fn(g):
            return np.fromiter((bool(predicate(row)) for row in g), dtype=np.float64, count=len(g))
    n, mean, _ = moments(fn, dim, cfg)
    p = float(mean)
    return Estimate(p, float(np.sqrt(max(p * (1.0 - p), 0.0) / n)), n, cfg.seed)


def estimate_width(T: VectorSet, cfg: McConfig) -> Estimate:
    """Gaussian width E[max_t t.g]."""
    return estimate_mean(lambda g: T.products(g).max(axis=1), T.dim, cfg)


@dataclass(frozen=True, eq=False)
class SupForm:
    """``x -> max_i (p_i . x + c_i)`` over a finite VectorSet; shifts may be None."""

    points: VectorSet
    shifts: np.ndarray | None = None

    def __post_init__(self):
        if self.shifts is not None:
            shifts = np.array(self.shifts, dtype=np.float64).ravel()
            if shifts.shape[0] != len(self.points):
                raise ValueError("one shift per point required")
            if not np.any(shifts):
                shifts = None
            object.__setattr__(self, "shifts", shifts)

    @property
    def dim(self) -> int:
        return self.points.dim

    def evaluate(self, g: np.ndarray) -> np.ndarray:
        vals = self.points.products(g[:, : self.dim])
        if self.shifts is not None:
            vals = vals + self.shifts
        return vals.max(axis=1)

    def same_as(self, other: SupForm) -> bool:
        if not self.points.same_as(other.points):
            return False
        if self.shifts is None or other.shifts is None:
            return self.shifts is None and other.shifts is None
        return bool(np.array_equal(self.shifts, other.shifts))


def as_sup_form(obj) -> SupForm:
    if isinstance(obj, SupForm):
        return obj
    if isinstance(obj, VectorSet):
        return SupForm(obj)
    if hasattr(obj, "sup_form"):
        return obj.sup_form()
    raise TypeError(f"cannot interpret {type(obj).__name__} as a sup-form function")


def estimate_l1_gap(F, G, dim: int, cfg: McConfig) -> Estimate:
    """E|F(g) - G(g)| for g ~ N(0, I_dim); shorter forms ignore trailing coordinates."""
    F, G = as_sup_form(F), as_sup_form(G)
    if F.dim > dim or G.dim > dim:
        raise ValueError(f"forms of dimension {F.dim}, {G.dim} exceed sampling dimension {dim}")
    if F.same_as(G):
        return Estimate(0.0, 0.0, cfg.n_samples, cfg.seed)
    return estimate_mean(lambda g: np.abs(F.evaluate(g) - G.evaluate(g)), dim, cfg)


def estimate_gaussian_distance(K: Polytope, L: Polytope, cfg: McConfig) -> Estimate:
    """Gaussian measure of the symmetric difference of K and L."""
    if K.dim != L.dim:
        raise ValueError(f"dimension mismatch: {K.dim} vs {L.dim}")
    return estimate_event_prob(lambda g: K.contains_batch(g) != L.contains_batch(g), K.dim, cfg)


def gaussian_volume(K: Polytope, cfg: McConfig) -> Estimate:
    return estimate_event_prob(K.contains_batch, K.dim, cfg)
