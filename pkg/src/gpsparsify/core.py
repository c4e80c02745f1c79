"""Domain types and exact geometry shared by every other module.

Point sets and halfspace normals may be held either as dense ``ndarray`` rows
or as ``scipy.sparse`` CSR rows.  Sparse rows are only needed for the
auxiliary-coordinate constructions, whose vectors live in ``R^(n+A)`` with one
extra nonzero each; everything user-facing goes through dense arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

DEDUP_TOL = 1e-12
NORMAL_TOL = 1e-9
# dense matrices sparser than this are multiplied through CSR
_SPARSE_DENSITY = 0.05


def _as_matrix(points) -> np.ndarray | sp.csr_matrix:
    if sp.issparse(points):
        mat = sp.csr_matrix(points, dtype=np.float64)
        mat.sum_duplicates()
        return mat
    arr = np.array(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _row_norms(mat) -> np.ndarray:
    if sp.issparse(mat):
        return np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
    return np.linalg.norm(mat, axis=1)


def _all_finite(mat) -> bool:
    data = mat.data if sp.issparse(mat) else mat
    return bool(np.all(np.isfinite(data)))


def _product_operand(mat):
    """Return the operand used for ``G @ mat.T`` (CSR when mostly zeros)."""
    if sp.issparse(mat):
        return mat
    if mat.size >= 4096 and np.count_nonzero(mat) <= _SPARSE_DENSITY * mat.size:
        return sp.csr_matrix(mat)
    return mat


def _products(operand, g: np.ndarray) -> np.ndarray:
    """Row-wise inner products: ``out[k, i] = g[k] . operand[i]``."""
    if sp.issparse(operand):
        return np.asarray((operand @ g.T).T)
    return g @ operand.T


@dataclass(frozen=True, eq=False)
class VectorSet:
    """Finite index set ``T`` of the canonical process ``f_T(x) = max_t t.x``."""

    points: np.ndarray | sp.csr_matrix
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        mat = _as_matrix(self.points)
        object.__setattr__(self, "points", mat)
        if mat.shape[0] == 0 or mat.shape[1] == 0:
            raise ValueError("VectorSet must be nonempty with positive dimension")
        if not _all_finite(mat):
            raise ValueError("VectorSet entries must be finite")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != mat.shape[0]:
                raise ValueError("one label per point required")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.points)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.points.toarray()
        return self.points

    def row(self, i: int) -> np.ndarray:
        if self.is_sparse:
            return self.points[i].toarray().ravel()
        return self.points[i]

    @cached_property
    def norms(self) -> np.ndarray:
        return _row_norms(self.points)

    @cached_property
    def _operand(self):
        return _product_operand(self.points)

    def products(self, g: np.ndarray) -> np.ndarray:
        """``g @ T.T`` for a batch ``g`` of shape (k, dim)."""
        return _products(self._operand, g)

    def subset(self, indices: Sequence[int]) -> VectorSet:
        idx = np.asarray(indices, dtype=np.intp)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return VectorSet(self.points[idx], labels)

    def scaled(self, alpha: float) -> VectorSet:
        return VectorSet(self.points * float(alpha), self.labels)

    def padded(self, extra: int) -> VectorSet:
        """Append ``extra`` zero coordinates to every point."""
        if extra == 0:
            return self
        if self.is_sparse:
            mat = sp.hstack([self.points, sp.csr_matrix((len(self), extra))], format="csr")
        else:
            mat = np.hstack([self.points, np.zeros((len(self), extra))])
        return VectorSet(mat, self.labels)

    def same_as(self, other: VectorSet) -> bool:
        if self.dim != other.dim or len(self) != len(other):
            return False
        if self.is_sparse or other.is_sparse:
            diff = sp.csr_matrix(self.points) - sp.csr_matrix(other.points)
            return diff.count_nonzero() == 0
        return bool(np.array_equal(self.points, other.points))


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_err: float
    n_samples: int
    seed: int

    def __post_init__(self):
        if not self.std_err >= 0:
            raise ValueError("std_err must be nonnegative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")


@dataclass(frozen=True)
class Halfspace:
    """``{x : normal . x <= offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.array(self.normal, dtype=np.float64).ravel()
        norm = float(np.linalg.norm(normal))
        if not np.isfinite(norm) or norm == 0.0 or not np.isfinite(self.offset):
            raise ValueError("halfspace needs a finite nonzero normal and finite offset")
        normal = normal / norm
        normal.setflags(write=False)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    def contains(self, x) -> bool:
        return bool(np.dot(self.normal, np.asarray(x, dtype=np.float64)) <= self.offset)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Intersection of unit-normal halfspaces, or one of the sentinels.

    ``kind`` is ``"list"``, ``"empty"`` or ``"full"``.  Normals are
    renormalized on construction and offsets rescaled to match.  ``info``
    carries construction diagnostics and is ignored by comparisons.
    """

    dim: int
    normals: np.ndarray | sp.csr_matrix = None
    offsets: np.ndarray = None
    kind: str = "list"
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind not in ("list", "empty", "full"):
            raise ValueError(f"unknown polytope kind {self.kind!r}")
        if self.kind != "list":
            object.__setattr__(self, "normals", _as_matrix(np.zeros((0, self.dim))))
            object.__setattr__(self, "offsets", np.zeros(0))
            return
        normals = _as_matrix(self.normals if self.normals is not None else np.zeros((0, self.dim)))
        offsets = np.array(self.offsets if self.offsets is not None else [], dtype=np.float64).ravel()
        if normals.shape[1] != self.dim:
            raise ValueError(f"normals have length {normals.shape[1]}, expected {self.dim}")
        if normals.shape[0] != offsets.shape[0]:
            raise ValueError("one offset per normal required")
        if not (_all_finite(normals) and np.all(np.isfinite(offsets))):
            raise ValueError("normals and offsets must be finite")
        norms = _row_norms(normals)
        if np.any(norms == 0):
            raise ValueError("zero normal")
        if np.any(np.abs(norms - 1.0) > NORMAL_TOL):
            if sp.issparse(normals):
                normals = sp.csr_matrix(sp.diags(1.0 / norms) @ normals)
            else:
                normals = normals / norms[:, None]
                normals.setflags(write=False)
            offsets = offsets / norms
        offsets.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def empty(cls, dim: int, **info) -> Polytope:
        return cls(dim, kind="empty", info=dict(info))

    @classmethod
    def full(cls, dim: int, **info) -> Polytope:
        return cls(dim, kind="full", info=dict(info))

    @classmethod
    def from_halfspaces(cls, dim: int, halfspaces: Sequence[Halfspace]) -> Polytope:
        if not halfspaces:
            return cls(dim, np.zeros((0, dim)), np.zeros(0))
        return cls(dim, np.stack([h.normal for h in halfspaces]), [h.offset for h in halfspaces])

    def __len__(self) -> int:
        return int(self.normals.shape[0])

    @property
    def halfspaces(self) -> list[Halfspace]:
        mat = self.normals.toarray() if sp.issparse(self.normals) else self.normals
        return [Halfspace(mat[i], self.offsets[i]) for i in range(len(self))]

    @cached_property
    def _operand(self):
        return _product_operand(self.normals)

    def contains_batch(self, g: np.ndarray) -> np.ndarray:
        """Membership of each row of ``g``; rows may be longer than ``dim``
        only if the extra coordinates are meant to be ignored."""
        g = np.atleast_2d(g)
        if g.shape[1] != self.dim:
            raise ValueError(f"points have length {g.shape[1]}, expected {self.dim}")
        if self.kind == "empty":
            return np.zeros(g.shape[0], dtype=bool)
        if self.kind == "full" or len(self) == 0:
            return np.ones(g.shape[0], dtype=bool)
        return np.all(_products(self._operand, g) <= self.offsets, axis=1)

    def contains(self, x) -> bool:
        return bool(self.contains_batch(np.asarray(x, dtype=np.float64)[None, :])[0])


def eval_sup(T: VectorSet, x) -> float:
    """Exact ``max_t t.x``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != T.dim:
        raise ValueError(f"x has length {x.shape[0]}, expected {T.dim}")
    return float(np.max(T.products(x[None, :])[0]))


def diameter(P: VectorSet | np.ndarray) -> float:
    pts = P.dense() if isinstance(P, VectorSet) else np.atleast_2d(np.asarray(P, dtype=np.float64))
    if pts.shape[0] < 2:
        return 0.0
    return float(np.max(pdist(pts)))


def symmetrize(T: VectorSet) -> VectorSet:
    """``T u -T`` with points closer than ``DEDUP_TOL`` merged (first kept)."""
    pts = T.dense()
    both = np.vstack([pts, -pts])
    labels = None
    if T.labels is not None:
        labels = list(T.labels) + ["-" + s for s in T.labels]
    keep = _first_unique(both, DEDUP_TOL)
    out = both[keep]
    return VectorSet(out, None if labels is None else [labels[i] for i in keep])


def _first_unique(pts: np.ndarray, tol: float) -> np.ndarray:
    tree = cKDTree(pts)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    dropped = np.zeros(len(pts), dtype=bool)
    if len(pairs):
        # pairs are (i, j) with i < j; a later point goes when an earlier kept one is close
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        for i, j in pairs[order]:
            if not dropped[i]:
                dropped[j] = True
    return np.flatnonzero(~dropped)


def is_symmetric(T: VectorSet, tol: float = DEDUP_TOL) -> bool:
    pts = T.dense()
    dist, _ = cKDTree(pts).query(-pts)
    return bool(np.all(dist <= tol))
