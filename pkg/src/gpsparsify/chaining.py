"""Admissible partition sequences and the chaining functional they bound.

Level ``h`` of a sequence may hold at most ``2^(2^h)`` parts.  The sequence
is built top-down: the level budget is split across the parts of the previous
level in proportion to their sizes (largest remainder, every part keeps at
least one child), and each part is split by farthest-first traversal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import VectorSet, diameter


@dataclass(frozen=True, eq=False)
class Part:
    indices: np.ndarray  # sorted indices into T
    center: int
    radius: float  # max distance from center to a member

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class AdmissibleSequence:
    levels: list[list[Part]]
    size: int

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def part_of(self, h: int) -> np.ndarray:
        """``out[t]`` = position of the level-h part containing index t."""
        out = np.empty(self.size, dtype=np.intp)
        for k, part in enumerate(self.levels[h]):
            out[part.indices] = k
        return out

    def validate(self, n: int | None = None) -> None:
        n = self.size if n is None else n
        if n != self.size:
            raise ValueError(f"sequence built for {self.size} points, set has {n}")
        if len(self.levels[0]) != 1 or len(self.levels[0][0]) != n:
            raise ValueError("level 0 must be the single part containing every index")
        prev = None
        for h, level in enumerate(self.levels):
            if len(level) > level_budget(h, n):
                raise ValueError(f"level {h} has {len(level)} parts, budget {level_budget(h, n)}")
            seen = np.zeros(n, dtype=np.int64)
            for part in level:
                if len(part) == 0 or part.center not in set(part.indices.tolist()):
                    raise ValueError(f"level {h}: empty part or center outside its part")
                seen[part.indices] += 1
            if not np.all(seen == 1):
                raise ValueError(f"level {h} is not a partition of the index set")
            owner = self.part_of(h)
            if prev is not None:
                for part in level:
                    if len(np.unique(prev[part.indices])) != 1:
                        raise ValueError(f"level {h} does not refine level {h - 1}")
            prev = owner


def level_budget(h: int, n: int) -> int:
    """``min(2^(2^h), n)``."""
    if h >= 6:  # 2^64 exceeds any index set we can hold
        return n
    return min(2 ** (2 ** h), n)


def default_depth(n: int) -> int:
    h = 0
    while level_budget(h, n) < n:
        h += 1
    return h + 1


def allocate(budget: int, sizes: list[int]) -> list[int]:
    """Split ``budget`` children across parts: at least one each, at most the
    part size, remainder proportional to size by largest remainder."""
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    k = len(sizes_arr)
    total = int(sizes_arr.sum())
    budget = min(budget, total)
    if budget <= k:
        return [1] * k
    alloc = np.ones(k, dtype=np.int64)
    remaining = budget - k
    capacity = sizes_arr - 1
    while remaining > 0:
        open_ = capacity > 0
        weights = np.where(open_, sizes_arr, 0).astype(np.float64)
        quota = remaining * weights / weights.sum()
        base = np.minimum(np.floor(quota).astype(np.int64), capacity)
        alloc += base
        capacity -= base
        remaining -= int(base.sum())
        if remaining == 0:
            break
        frac = np.where(capacity > 0, quota - np.floor(quota), -1.0)
        # largest fractional part first, lower part position on ties
        order = np.lexsort((np.arange(k), -frac))
        for i in order:
            if remaining == 0 or frac[i] < 0:
                break
            alloc[i] += 1
            capacity[i] -= 1
            remaining -= 1
        # parts saturated at capacity may leave budget; loop redistributes it
    return alloc.tolist()


def _distances(T: VectorSet, idx: np.ndarray, c: int) -> np.ndarray:
    if T.is_sparse:
        ones = sp.csr_matrix(np.ones((len(idx), 1)))
        diff = T.points[idx] - ones @ T.points[c]
        return np.sqrt(np.asarray(diff.multiply(diff).sum(axis=1)).ravel())
    return np.linalg.norm(T.points[idx] - T.points[c], axis=1)


def farthest_first(T: VectorSet, idx: np.ndarray, k: int) -> list[Part]:
    """Split the points ``idx`` (sorted) into at most ``k`` parts.

    The first center is the lowest index; each next center is the point
    farthest from the chosen centers (lowest index on ties).  Points join
    their nearest center, the lower-indexed center on ties.  Traversal stops
    early once every remaining point coincides with a center.
    """
    m = len(idx)
    if k >= m:
        return [Part(np.array([i]), int(i), 0.0) for i in idx]
    centers = [0]
    columns = [_distances(T, idx, int(idx[0]))]
    nearest = columns[0].copy()
    while len(centers) < k:
        far = int(np.argmax(nearest))
        if nearest[far] == 0.0:
            break
        centers.append(far)
        columns.append(_distances(T, idx, int(idx[far])))
        np.minimum(nearest, columns[-1], out=nearest)
    # idx is sorted, so ordering centers by position orders them by T index
    rank = np.argsort(centers)
    d_all = np.stack(columns, axis=1)[:, rank]
    owner = np.argmin(d_all, axis=1)  # first minimum = lowest-index center
    dist = d_all[np.arange(m), owner]
    parts = []
    for j, c in enumerate(np.asarray(centers)[rank]):
        members = np.flatnonzero(owner == j)
        parts.append(Part(idx[members], int(idx[c]), float(dist[members].max())))
    return parts


def build_admissible_sequence(T: VectorSet, h_max: int | None = None) -> AdmissibleSequence:
    n = len(T)
    if h_max is None:
        h_max = default_depth(n)
    if h_max < 0:
        raise ValueError("h_max must be nonnegative")
    all_idx = np.arange(n)
    root_radius = float(_distances(T, all_idx, 0).max())
    levels = [[Part(all_idx, 0, root_radius)]]
    for h in range(1, h_max + 1):
        prev = levels[-1]
        if len(prev) == n:
            levels.append(prev)
            continue
        alloc = allocate(level_budget(h, n), [len(p) for p in prev])
        level = []
        for part, k in zip(prev, alloc):
            if k == 1:
                level.append(part)
            else:
                level.extend(farthest_first(T, part.indices, k))
        levels.append(level)
    return AdmissibleSequence(levels, n)


def _part_diameter(T: VectorSet, part: Part) -> float:
    if len(part) == 1:
        return 0.0
    pts = T.points[part.indices]
    return diameter(pts.toarray() if sp.issparse(pts) else pts)


def level_diameters(T: VectorSet, seq: AdmissibleSequence) -> list[np.ndarray]:
    cache: dict[int, float] = {}
    out = []
    for level in seq.levels:
        diams = np.empty(len(level))
        for k, part in enumerate(level):
            key = id(part)
            if key not in cache:
                cache[key] = _part_diameter(T, part)
            diams[k] = cache[key]
        out.append(diams)
    return out


def gamma2_upper(T: VectorSet, seq: AdmissibleSequence) -> float:
    """``max_t sum_h 2^(h/2) diam(A_h(t))`` over the levels of ``seq``."""
    seq.validate(len(T))
    total = np.zeros(len(T))
    for h, diams in enumerate(level_diameters(T, seq)):
        total += 2.0 ** (h / 2) * diams[seq.part_of(h)]
    return float(total.max())
