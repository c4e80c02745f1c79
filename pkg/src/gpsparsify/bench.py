"""Benchmark instances and closed-form helpers."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy import integrate, special

from .core import Polytope, VectorSet

# above this many points the generators emit CSR storage
SPARSE_ABOVE = 1024


@lru_cache(maxsize=None)
def a_n(n: int) -> float:
    """``E max`` of ``n`` iid standard normals.

    ``int_0^inf (1 - Phi^n) - int_-inf^0 Phi^n`` on [-10, 10]; both tails
    beyond 10 are below ``n * 1e-23`` and are dropped.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return 0.0

    def upper(x):
        return -math.expm1(n * special.log_ndtr(x))

    def lower(x):
        return math.exp(n * special.log_ndtr(x))

    peak = math.sqrt(2.0 * math.log(n))
    hi, _ = integrate.quad(upper, 0.0, 10.0, points=[min(peak, 9.0)], limit=400,
                           epsabs=1e-11, epsrel=1e-11)
    lo, _ = integrate.quad(lower, -10.0, 0.0, limit=400, epsabs=1e-11, epsrel=1e-11)
    return hi - lo


def gen_coordinate_example(n: int, sparse: bool | None = None) -> VectorSet:
    """``{e_i / a_n(n)}``: unit Gaussian width, pairwise orthogonal."""
    if n < 2:
        raise ValueError("n must be at least 2")
    scale = 1.0 / a_n(n)
    if sparse is None:
        sparse = n > SPARSE_ABOVE
    pts = sp.identity(n, format="csr") * scale if sparse else np.eye(n) * scale
    return VectorSet(pts)


def gen_shifted_polytope(n: int, sparse: bool | None = None) -> Polytope:
    """``x_0 + x_i / a(n) <= sqrt(1 + 1/a(n)^2)`` for i = 1..n, in ``R^(n+1)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    a = a_n(n)
    norm = math.sqrt(1.0 + 1.0 / a ** 2)
    if sparse is None:
        sparse = n > SPARSE_ABOVE
    rows = np.repeat(np.arange(n), 2)
    cols = np.stack([np.zeros(n, dtype=np.intp), np.arange(1, n + 1)], axis=1).ravel()
    vals = np.tile([1.0 / norm, 1.0 / (a * norm)], n)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n + 1))
    return Polytope(n + 1, mat if sparse else mat.toarray(), np.ones(n))


def gen_random_unit_cloud(n: int, m: int, seed: int) -> VectorSet:
    """``m`` iid uniform unit vectors in ``R^n``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    pts = rng.standard_normal((m, n))
    norms = np.linalg.norm(pts, axis=1)
    while np.any(norms == 0):  # probability zero, but keep the contract total
        bad = norms == 0
        pts[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(pts, axis=1)
    return VectorSet(pts / norms[:, None])


def gen_two_scale_clusters(n: int = 32, clusters: int = 8, per_cluster: int = 16,
                           spread: float = 1e-3, seed: int = 0) -> VectorSet:
    """Tight clusters (radius ``spread``) around random unit centers."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    centers = rng.standard_normal((clusters, n))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    offsets = rng.standard_normal((clusters, per_cluster, n)) * (spread / math.sqrt(n))
    return VectorSet((centers[:, None, :] + offsets).reshape(-1, n))


def gen_symmetric_cloud(n: int, m: int, seed: int) -> VectorSet:
    """``C u -C`` for a random unit cloud ``C`` of ``m`` points (2m vectors)."""
    pts = gen_random_unit_cloud(n, m, seed).dense()
    return VectorSet(np.vstack([pts, -pts]))


def gen_slab(n: int = 2, r: float = 1.0) -> Polytope:
    """``{|x_1| <= r}``."""
    normals = np.zeros((2, n))
    normals[0, 0], normals[1, 0] = 1.0, -1.0
    return Polytope(n, normals, [r, r])


def gen_uniform_body(n: int = 16, m: int = 8, r: float = 1.0, seed: int = 0) -> Polytope:
    """``m`` random unit-normal halfspaces, all at distance ``r``."""
    return Polytope(n, gen_random_unit_cloud(n, m, seed).dense(), np.full(m, float(r)))


def gen_regular_polygon(m: int, inradius: float = 1.0, phase: float = 0.0) -> Polytope:
    """Regular ``m``-gon in the plane: facet normals at angles ``phase + 2 pi k / m``."""
    if m < 3:
        raise ValueError("a polygon needs at least 3 sides")
    ang = phase + 2.0 * math.pi * np.arange(m) / m
    return Polytope(2, np.stack([np.cos(ang), np.sin(ang)], axis=1), np.full(m, float(inradius)))


def inscribed_polygon(m: int, radius: float = 1.0) -> Polytope:
    """Regular ``m``-gon with vertices on the circle of the given radius."""
    return gen_regular_polygon(m, radius * math.cos(math.pi / m))


def polygon_measure(m: int, inradius: float = 1.0) -> float:
    """Gaussian measure of a regular ``m``-gon centered at the origin.

    Polar form: the polygon is ``2m`` congruent right triangles; over the
    half-angle ``pi/m`` the boundary sits at ``rho = inradius / cos(theta)``.
    """
    def slice_(theta):
        rho = inradius / math.cos(theta)
        return -math.expm1(-rho * rho / 2.0)

    val, _ = integrate.quad(slice_, 0.0, math.pi / m, epsabs=1e-13, epsrel=1e-13)
    return 2.0 * m * val / (2.0 * math.pi)


def disk_measure(radius: float = 1.0) -> float:
    return -math.expm1(-radius * radius / 2.0)


def first_m(n: int, c: float) -> int:
    """``round(n^(1-c))``: size of the proper subset kept in the gap examples."""
    return max(1, int(round(n ** (1.0 - c))))
