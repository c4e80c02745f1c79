"""Approximate a norm by a norm that only sees a few directions.

The norm is given by a finite symmetric cloud ``T`` with ``nu(x) = max_t t.x``.
The pipeline works at unit width: sparsify ``T`` to additive error
``eps^3/160``, close the support under negation with matched shifts, then
center the shifts with auxiliary coordinates at budget ``eps^3/80``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import VectorSet, is_symmetric, symmetrize as symmetrize_set
from .mc import McConfig, estimate_l1_gap, estimate_width
from .sparsify import AUX_CAP, DegenerateWidthError, SparseSup, center, sparsify


@dataclass(frozen=True, eq=False)
class JuntaNorm:
    dim: int
    directions: VectorSet
    ambient_pad: int
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.directions.dim != self.dim + self.ambient_pad:
            raise ValueError("directions must live in R^(dim + ambient_pad)")

    @property
    def total_dim(self) -> int:
        return self.dim + self.ambient_pad

    def evaluate_batch(self, g: np.ndarray) -> np.ndarray:
        g = np.atleast_2d(g)
        if g.shape[1] == self.dim and self.ambient_pad:
            g = np.hstack([g, np.zeros((g.shape[0], self.ambient_pad))])
        elif g.shape[1] != self.total_dim:
            raise ValueError(f"x must have length {self.dim} or {self.total_dim}")
        return self.directions.products(g).max(axis=1)

    def active(self) -> tuple[np.ndarray, VectorSet]:
        """Columns that are either original coordinates or read by some
        direction, and the directions restricted to them.

        The other auxiliary coordinates never affect ``psi``; sampling only the
        active ones gives the same distribution at a fraction of the cost.
        """
        mat = self.directions.points
        if sp.issparse(mat):
            used = np.unique(mat.tocsr().indices)
        else:
            used = np.flatnonzero(np.any(mat != 0, axis=0))
        cols = np.union1d(np.arange(self.dim), used)
        sub = mat[:, cols]
        return cols, VectorSet(sub.tocsr() if sp.issparse(sub) else sub)


def eval_norm(psi: JuntaNorm, x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(psi.evaluate_batch(x[None, :])[0])


def symmetric_union(sp_sup: SparseSup) -> SparseSup:
    """``S' u -S'`` with ``-s`` inheriting the shift of ``s``.

    A vector reached twice keeps the larger shift, which is what the
    supremum over both copies evaluates to.
    """
    pts = sp_sup.support.dense()
    both = np.vstack([pts, -pts])
    shifts = np.concatenate([sp_sup.shifts, sp_sup.shifts])
    keys: dict[bytes, int] = {}
    keep: list[int] = []
    best = []
    for i, row in enumerate(both):
        key = (row + 0.0).tobytes()  # +0.0 folds -0.0 into 0.0
        if key in keys:
            j = keys[key]
            best[j] = max(best[j], shifts[i])
            continue
        keys[key] = len(keep)
        keep.append(i)
        best.append(shifts[i])
    src = np.concatenate([sp_sup.source_indices, sp_sup.source_indices])[keep]
    return SparseSup(VectorSet(both[keep]), np.array(best), sp_sup.width_used, src,
                     info=dict(sp_sup.info, symmetric_from=len(sp_sup)))


def sparsify_norm(T_dual: VectorSet, eps: float, cfg: McConfig, A_cap: int = AUX_CAP, *,
                  symmetrize: bool = False, kappa: float = 1.0, measure: bool = True) -> JuntaNorm:
    """Junta norm ``psi`` with ``Pr[nu(g) in [(1-eps)psi(g), (1+eps)psi(g)]] >= 1-eps`` as target."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5)")
    if not is_symmetric(T_dual):
        if not symmetrize:
            raise ValueError("T_dual is not symmetric; pass symmetrize=True to use T u -T")
        T_dual = symmetrize_set(T_dual)
    width = estimate_width(T_dual, cfg.derive("width"))
    if width.mean <= 3 * width.std_err:
        raise DegenerateWidthError("width of the dual cloud is indistinguishable from 0")
    w = width.mean
    unit = T_dual.scaled(1.0 / w)
    one_sided = eps ** 3 / 160.0
    sparse = sparsify(unit, one_sided, cfg.derive("sparsify"))
    union = symmetric_union(sparse)
    centered = center(union, eps ** 3 / 80.0, A_cap, kappa=kappa)
    pad = centered.dim - T_dual.dim
    directions = centered.scaled(w)
    info = {
        "width": w,
        "width_std_err": width.std_err,
        "support": len(sparse),
        "symmetric_support": len(union),
        "directions": len(directions),
        "additive_target": eps ** 3 / 40.0,
        "budgets": {"sparsify": one_sided, "center": eps ** 3 / 80.0},
    }
    psi = JuntaNorm(T_dual.dim, directions, pad, info)
    if measure:
        cols, active = psi.active()
        gap = estimate_l1_gap(T_dual, active, len(cols), cfg.derive("gap"))
        info["additive_gap"] = gap.mean / w
        info["additive_gap_std_err"] = gap.std_err / w
    return psi


def orthogonal_complement(psi: JuntaNorm) -> sp.csc_matrix:
    """Orthonormal basis (sparse columns) of the complement of span(directions).

    Coordinates no direction reads contribute unit vectors; the rest of the
    complement is the null space of the directions on the coordinates they use.
    """
    from scipy.linalg import null_space

    mat = psi.directions.points
    if sp.issparse(mat):
        used = np.unique(mat.tocsr().indices)
        dense_used = mat[:, used].toarray()
    else:
        used = np.flatnonzero(np.any(mat != 0, axis=0))
        dense_used = np.asarray(mat)[:, used]
    unused = np.setdiff1d(np.arange(psi.total_dim), used)
    blocks = []
    if len(used):
        inner = null_space(dense_used)
        if inner.size:
            rows = np.repeat(used, inner.shape[1])
            cols = np.tile(np.arange(inner.shape[1]), len(used))
            blocks.append(sp.csc_matrix((inner.ravel(), (rows, cols)),
                                        shape=(psi.total_dim, inner.shape[1])))
    if len(unused):
        blocks.append(sp.csc_matrix((np.ones(len(unused)), (unused, np.arange(len(unused)))),
                                    shape=(psi.total_dim, len(unused))))
    if not blocks:
        return sp.csc_matrix((psi.total_dim, 0))
    return sp.hstack(blocks, format="csc")
