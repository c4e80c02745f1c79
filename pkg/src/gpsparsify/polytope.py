"""Sparsify intersections of halfspaces that sit close to the origin.

Uniform offsets go straight through the shifted-supremum sparsifier and a
threshold at 1.  Mixed offsets are first lifted: halfspace ``t.x <= r_t``
becomes a block of halfspaces ``t.x + y_i / (sqrt(2) Q) <= 2r`` over fresh
Gaussian coordinates ``y``, all with the same offset.  The lifted body is
sparsified on the uniform path and then cut back to ``R^n`` at a sampled ``y``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import Polytope, VectorSet
from .mc import McConfig, estimate_gaussian_distance, estimate_width, gaussian_volume
from .sparsify import sparsify

log = logging.getLogger(__name__)

UNIT_NORM_TOL = 1e-6
OFFSET_TIE_TOL = 1e-12


@dataclass(frozen=True)
class LiftConfig:
    Q: float | None = None  # None: take the value the two accuracy constraints require
    M_cap: int = 4096
    y_candidates: int = 16
    tau: float = 1.0

    def __post_init__(self):
        if self.Q is not None and not self.Q > 0:
            raise ValueError("Q must be positive")
        if self.M_cap < 1 or self.y_candidates < 1:
            raise ValueError("M_cap and y_candidates must be positive")


@dataclass(frozen=True, eq=False)
class LiftedPolytope:
    base_dim: int
    aux_dim: int
    Q: float
    Q_required: float
    capped: bool
    delta: np.ndarray  # 2r - r_t per input halfspace
    M: np.ndarray  # realized block sizes
    r: float
    polytope: Polytope
    info: dict = field(default_factory=dict, repr=False)

    @property
    def lifted_offset(self) -> float:
        return 2.0 * self.r / math.sqrt(1.0 + 1.0 / (2.0 * self.Q ** 2))

    def block(self, t: int) -> Polytope:
        """The lifted halfspaces coming from input halfspace ``t``."""
        start = int(self.M[:t].sum())
        rows = np.arange(start, start + int(self.M[t]))
        return Polytope(self.polytope.dim, self.polytope.normals[rows], self.polytope.offsets[rows])


def empty_threshold(eps: float) -> float:
    """Offsets below ``-sqrt(2 ln(2/eps))`` leave Gaussian volume under eps."""
    return -math.sqrt(2.0 * math.log(2.0 / eps))


def eta_schedule(r: float, eps: float) -> tuple[float, float]:
    """``(eta1, eta2)``: sparsifier accuracy and the anti-concentration margin."""
    eta2 = eps / (8.0 * r * (2.0 * r + math.sqrt(2.0 * math.log(2.0 / eps))))
    return eta2 ** 2 / 4.0, eta2


def _volume_shortcut(K: Polytope, eps: float, cfg: McConfig) -> Polytope | None:
    vol = gaussian_volume(K, cfg)
    guard = 3.0 * vol.std_err
    if vol.mean + guard <= eps:
        return Polytope.empty(K.dim, path="empty", volume=vol.mean, volume_std_err=vol.std_err)
    if vol.mean - guard >= 1.0 - eps:
        return Polytope.full(K.dim, path="full", volume=vol.mean, volume_std_err=vol.std_err)
    return None


def sparsify_uniform(T: VectorSet, r: float, eps: float, cfg: McConfig) -> Polytope:
    """Sparsify ``K = {x : t.x <= 1 for t in T}`` where every ``|t| = 1/r``."""
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 0.5]")
    if not r >= 1:
        raise ValueError("r must be at least 1")
    if np.any(np.abs(T.norms * r - 1.0) > UNIT_NORM_TOL):
        raise ValueError("all vectors must have norm 1/r; use sparsify_polytope for mixed offsets")
    K = Polytope(T.dim, T.points, np.ones(len(T)))
    eta1, eta2 = eta_schedule(r, eps)
    if len(T) == 1:
        # one facet is already as sparse as it gets, and exact
        return Polytope(K.dim, K.normals, K.offsets,
                        info={"path": "uniform", "support": 1, "eta1": eta1, "eta2": eta2})
    shortcut = _volume_shortcut(K, eps, cfg.derive("volume"))
    if shortcut is not None:
        return shortcut
    width = estimate_width(T, cfg.derive("width"))
    if width.mean <= 3 * width.std_err:
        # every direction coincides: the body has a single facet
        return Polytope(K.dim, K.normals, K.offsets,
                        info={"path": "uniform", "support": len(T), "eta1": eta1, "eta2": eta2})
    rel = min(eta1 / width.mean, 0.49)
    sup = sparsify(T, rel, cfg.derive("sparsify"))
    # J(x) = max_s (s.x + c_s) <= 1  <=>  s.x <= 1 - c_s for every s
    info = {"path": "uniform", "support": len(sup), "eta1": eta1, "eta2": eta2,
            "width": sup.width_used, "max_shift": float(sup.shifts.max(initial=0.0))}
    return Polytope(K.dim, sup.support.points, 1.0 - sup.shifts, info=info)


def _required_Q(delta: np.ndarray, r_t: np.ndarray, r: float, eps: float, tau: float) -> float:
    N = len(delta)
    first = math.ceil(3 ** 0.25 * math.sqrt(100.0 * tau) * (N / eps) ** 0.75
                      * float(np.max(np.sqrt(1.0 / delta))))
    second = float(np.max(20.0 / delta * np.sqrt(N * (2.0 * r - r_t) / eps)))
    return float(max(first, second))


def lift(halfspaces: Polytope, r: float, eps: float, lc: LiftConfig) -> LiftedPolytope:
    """Lift every halfspace to a block of halfspaces with common offset.

    ``Q`` is capped so that the largest block ``exp((delta_t Q)^2)`` fits in
    ``M_cap``; the cap almost always binds and is then reported.
    """
    if halfspaces.kind != "list":
        raise ValueError("lift needs an explicit halfspace list")
    if not r >= 1:
        raise ValueError("r must be at least 1")
    r_t = np.asarray(halfspaces.offsets, dtype=np.float64)
    if np.any(r_t > r + OFFSET_TIE_TOL):
        raise ValueError("every offset must be at most r")
    n, N = halfspaces.dim, len(halfspaces)
    delta = 2.0 * r - r_t
    required = _required_Q(delta, r_t, r, eps, lc.tau) if lc.Q is None else float(lc.Q)
    q_cap = math.sqrt(math.log(lc.M_cap)) / float(delta.max()) if lc.M_cap > 1 else 0.0
    capped = required > q_cap
    Q = q_cap if capped else required
    if capped:
        warnings.warn(f"Q reduced from {required:.4g} to {Q:.4g} so blocks fit M_cap={lc.M_cap}",
                      RuntimeWarning)
    if Q ** 2 < 1.0 / 6.0:
        raise ValueError(f"Q={Q:.3g} puts the lifted offset below 1; raise M_cap")
    with np.errstate(over="ignore"):
        sizes = np.exp(np.minimum((delta * Q) ** 2, 700.0)) * (1.0 + 1e-9)
    M = np.clip(np.floor(sizes), 1, lc.M_cap).astype(np.int64)
    aux = int(M.sum())
    scale = 1.0 / math.sqrt(1.0 + 1.0 / (2.0 * Q ** 2))
    base = sp.csr_matrix(halfspaces.normals)
    owner = np.repeat(np.arange(N), M)
    x_part = base[owner] * scale
    y_part = sp.csr_matrix((np.full(aux, scale / (math.sqrt(2.0) * Q)),
                            (np.arange(aux), np.arange(aux))), shape=(aux, aux))
    normals = sp.hstack([x_part, y_part], format="csr")
    offsets = np.full(aux, 2.0 * r * scale)
    poly = Polytope(n + aux, normals, offsets)
    return LiftedPolytope(n, aux, Q, required, capped, delta, M, float(r), poly,
                          info={"N": N, "tau": lc.tau, "M_cap": lc.M_cap})


def cross_section(L: Polytope, base_dim: int, y: np.ndarray) -> Polytope:
    """``{x : (x, y) in L}``; parallel facets are merged keeping the tighter one."""
    if L.kind != "list":
        return Polytope(base_dim, kind=L.kind)
    if sp.issparse(L.normals):
        ax = L.normals[:, :base_dim].toarray()
        b = L.offsets - np.asarray(L.normals[:, base_dim:] @ y).ravel()
    else:
        ax = np.asarray(L.normals[:, :base_dim])
        b = L.offsets - L.normals[:, base_dim:] @ y
    zero = np.linalg.norm(ax, axis=1) == 0
    if np.any(zero & (b < 0)):
        return Polytope.empty(base_dim)
    ax, b = ax[~zero], b[~zero]
    if len(ax) == 0:
        return Polytope.full(base_dim)
    norms = np.linalg.norm(ax, axis=1)
    ax, b = ax / norms[:, None], b / norms
    _, first, inverse = np.unique(np.round(ax, 12), axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    tight = np.full(len(first), np.inf)
    np.minimum.at(tight, inverse, b)
    order = np.argsort(first)
    return Polytope(base_dim, ax[first[order]], tight[order])


def choose_cross_section(L_lifted: Polytope, K: Polytope, lc: LiftConfig,
                         cfg: McConfig) -> Polytope:
    """Among ``y_candidates`` sampled cuts, the one closest to ``K``.

    Every candidate is scored on the same evaluation draws, so the
    comparison is not blurred by independent noise.
    """
    n = K.dim
    if L_lifted.dim < n:
        raise ValueError("lifted polytope has fewer coordinates than K")
    m = L_lifted.dim - n
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.derive("y").seed)))
    scores, cands = [], []
    for k in range(lc.y_candidates):
        y = rng.standard_normal(m)
        cand = cross_section(L_lifted, n, y)
        est = estimate_gaussian_distance(K, cand, cfg.derive("score"))
        scores.append(est)
        cands.append(cand)
    best = int(np.argmin([s.mean for s in scores]))
    chosen = cands[best]
    info = dict(chosen.info, candidate_distances=[s.mean for s in scores], chosen=best,
                distance=scores[best].mean, distance_std_err=scores[best].std_err)
    return Polytope(chosen.dim, chosen.normals, chosen.offsets, chosen.kind, info=info)


def sparsify_polytope(halfspaces: Polytope, eps: float, cfg: McConfig,
                      lc: LiftConfig | None = None) -> Polytope:
    """Approximate ``K`` within Gaussian distance ``eps`` by few halfspaces."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5)")
    lc = lc or LiftConfig()
    K = halfspaces
    if K.kind != "list" or len(K) == 0:
        return K
    offsets = np.asarray(K.offsets)
    if np.any(offsets < empty_threshold(eps)):
        return Polytope.empty(K.dim, path="pruned")
    if len(K) == 1:
        return Polytope(K.dim, K.normals, K.offsets, info={"path": "single", "support": 1})
    r = max(1.0, float(offsets.max()))
    if np.ptp(offsets) <= OFFSET_TIE_TOL and offsets[0] >= 1.0:
        r0 = float(offsets[0])
        T = VectorSet(K.normals * (1.0 / r0) if not sp.issparse(K.normals)
                      else K.normals.multiply(1.0 / r0).tocsr())
        out = sparsify_uniform(T, r0, eps, cfg.derive("uniform"))
        return out
    shortcut = _volume_shortcut(K, eps, cfg.derive("volume"))
    if shortcut is not None:
        return shortcut
    lifted = lift(K, r, eps, lc)
    r_lift = lifted.lifted_offset
    Lp = lifted.polytope
    T = VectorSet(Lp.normals.multiply(1.0 / r_lift).tocsr())
    L_prime = sparsify_uniform(T, r_lift, 188.0 * eps / 300.0, cfg.derive("lifted"))
    if L_prime.kind != "list":
        return Polytope(K.dim, kind=L_prime.kind, info=dict(L_prime.info, path="lifted"))
    out = choose_cross_section(L_prime, K, lc, cfg.derive("cross"))
    info = dict(out.info, path="lifted", Q=lifted.Q, Q_required=lifted.Q_required,
                capped=lifted.capped, M=lifted.M.tolist(), lifted_support=L_prime.info.get("support"))
    log.debug("sparsify_polytope: %d halfspaces -> %d", len(K), len(out))
    return Polytope(out.dim, out.normals, out.offsets, out.kind, info=info)
