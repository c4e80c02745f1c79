"""Sparsify ``f_T`` by a shifted supremum over a few representatives.

Pipeline: estimate the width, rescale ``T`` to unit width, build an
admissible sequence, harvest ("chop") parts that are small for their level,
keep one representative per harvested part and compensate with the expected
excess of the part over its representative.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import integrate, special

from .chaining import AdmissibleSequence, build_admissible_sequence, _part_diameter
from .core import VectorSet, diameter
from .mc import McConfig, SupForm, estimate_width, moments

log = logging.getLogger(__name__)

SHIFT_SLACK = 1e-6
AUX_CAP = 2 ** 16  # default cap on the auxiliary dimension of center()


class DegenerateWidthError(ValueError):
    """Raised when the width estimate cannot be told apart from zero."""


@dataclass(frozen=True, eq=False)
class ChopPart:
    indices: np.ndarray
    representative: int
    stage: int

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class ChopPartition:
    parts: list[ChopPart]
    delta: float
    fallback_stage: int | None = None

    @property
    def representatives(self) -> np.ndarray:
        return np.array([p.representative for p in self.parts], dtype=np.intp)


@dataclass(frozen=True, eq=False)
class SparseSup:
    """``x -> max_s (s.x + c_s)`` with ``s`` drawn from the source set."""

    support: VectorSet
    shifts: np.ndarray
    width_used: float
    source_indices: np.ndarray
    shift_errors: np.ndarray | None = None
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        shifts = np.array(self.shifts, dtype=np.float64).ravel()
        if shifts.shape[0] != len(self.support):
            raise ValueError("one shift per support vector required")
        src = np.asarray(self.source_indices, dtype=np.intp).ravel()
        if src.shape[0] != len(self.support):
            raise ValueError("one source index per support vector required")
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "source_indices", src)

    @property
    def dim(self) -> int:
        return self.support.dim

    def __len__(self) -> int:
        return len(self.support)

    def sup_form(self) -> SupForm:
        return SupForm(self.support, self.shifts)

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.shape[0] != self.dim:
            raise ValueError(f"x has length {x.shape[0]}, expected {self.dim}")
        return float(np.max(self.support.products(x[None, :])[0] + self.shifts))


def _placeable(T: VectorSet, part, threshold: float) -> bool:
    """Whether ``diam(part) <= threshold``; the k-center radius decides most cases."""
    if len(part) == 1:
        return True
    if part.radius > threshold:
        return False
    if 2.0 * part.radius <= threshold:
        return True
    return _part_diameter(T, part) <= threshold


def chop(T: VectorSet, seq: AdmissibleSequence, delta: float) -> ChopPartition:
    """Harvest parts with ``2 diam(P) <= delta 2^(-h/2)`` at stages h = 1, 2, ...

    A part at a later level is either inside a harvested part or disjoint
    from every harvested point, since levels refine.  Points still uncovered
    after the last level become singletons at a fallback stage.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    seq.validate(len(T))
    covered = np.zeros(len(T), dtype=bool)
    parts: list[ChopPart] = []
    for h in range(1, seq.depth + 1):
        threshold = delta * 2.0 ** (-h / 2) / 2.0
        for part in seq.levels[h]:
            if covered[part.indices[0]]:
                continue
            if _placeable(T, part, threshold):
                parts.append(ChopPart(part.indices, part.center, h))
                covered[part.indices] = True
        if covered.all():
            return ChopPartition(parts, float(delta))
    fallback = seq.depth + 1
    for i in np.flatnonzero(~covered):
        parts.append(ChopPart(np.array([i]), int(i), fallback))
    return ChopPartition(parts, float(delta), fallback_stage=fallback)


def compute_shifts(T: VectorSet, part: ChopPartition, cfg: McConfig,
                   width_used: float | None = None) -> SparseSup:
    """Shift of part P: Monte Carlo estimate of ``E max_{t in P} g.(t - s_P)``.

    Singleton parts get exactly 0; estimates are clamped to ``[0, width_used]``.
    All parts share one set of draws.
    """
    reps = part.representatives
    if width_used is None:
        width_used = estimate_width(T, cfg.derive("width")).mean
    width_used = float(width_used)
    shifts = np.zeros(len(part.parts))
    errors = np.zeros(len(part.parts))
    multi = [k for k, p in enumerate(part.parts) if len(p) > 1]
    if multi:
        order = np.concatenate([part.parts[k].indices for k in multi])
        starts = np.cumsum([0] + [len(part.parts[k]) for k in multi[:-1]])
        cols, inverse = np.unique(order, return_inverse=True)
        sub = T.subset(cols)
        rep_cols = np.searchsorted(cols, reps[multi])

        def excess(g):
            x = sub.products(g)
            return np.maximum.reduceat(x[:, inverse], starts, axis=1) - x[:, rep_cols]

        n, mean, m2 = moments(excess, T.dim, cfg)
        raw = np.atleast_1d(mean)
        se = np.sqrt(np.atleast_1d(m2) / max(n - 1, 1) / n)
        hi = width_used * (1.0 + SHIFT_SLACK)
        for j, k in enumerate(multi):
            if raw[j] > hi + 3 * se[j]:
                warnings.warn(f"shift {raw[j]:.6g} of part {k} exceeds width {width_used:.6g}"
                              " by more than 3 standard errors; clamped", RuntimeWarning)
        shifts[multi] = np.clip(raw, 0.0, max(width_used, 0.0))
        errors[multi] = se
    return SparseSup(T.subset(reps), shifts, width_used, reps, shift_errors=errors,
                     info={"parts": len(part.parts), "delta": part.delta})


def _trivial(T: VectorSet, width: float) -> SparseSup:
    return SparseSup(T, np.zeros(len(T)), width, np.arange(len(T)),
                     info={"parts": len(T), "trivial": True})


def sparsify(T: VectorSet, eps: float, cfg: McConfig, c_mm: float | None = None) -> SparseSup:
    """Sparsifier with relative L1 error target ``eps``.

    A one-point set is returned unchanged.  Otherwise a width estimate within
    three standard errors of zero is rejected with DegenerateWidthError.
    ``c_mm``, a guess at the majorizing-measure constant, only adds the stage
    by which chopping would have to end (``1 + floor(2 c_mm / delta)`` at
    unit width) to ``info``; termination never depends on it.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5)")
    width = estimate_width(T, cfg.derive("width"))
    if len(T) == 1:
        return _trivial(T, max(width.mean, 0.0))
    if width.mean <= 3 * width.std_err:
        raise DegenerateWidthError(
            f"width estimate {width.mean:.3g} +/- {width.std_err:.2g} is indistinguishable from 0")
    w = width.mean
    unit = T.scaled(1.0 / w)
    seq = build_admissible_sequence(unit)
    part = chop(unit, seq, eps / 2.0)
    normalized = compute_shifts(unit, part, cfg.derive("shifts"), width_used=1.0)
    support = T.subset(normalized.source_indices)
    info = dict(normalized.info, eps=eps, depth=seq.depth, width_std_err=width.std_err,
                stages=[p.stage for p in part.parts])
    if c_mm is not None:
        info["stage_bound"] = 1 + math.floor(2.0 * c_mm / part.delta)
    log.debug("sparsify: |T|=%d -> |S|=%d (w=%.4g)", len(T), len(support), w)
    return SparseSup(support, normalized.shifts * w, w, normalized.source_indices,
                     shift_errors=normalized.shift_errors * w, info=info)


def chop_error_bound(T: VectorSet, part: ChopPartition) -> float:
    """``delta (1 + sum_P exp(-2 delta^2 / diam(P)^2))`` for the realized partition."""
    return part.delta * (1.0 + tail_sum(T, part))


def tail_sum(T: VectorSet, part: ChopPartition) -> float:
    total = 0.0
    for p in part.parts:
        if len(p) > 1:
            d = diameter(T.subset(p.indices))
            if d > 0:
                total += math.exp(-2.0 * part.delta ** 2 / d ** 2)
    return total


def mu_abs_max(A: int) -> float:
    """``E max_{i <= A} |g_i|`` by quadrature of ``1 - erf(x / sqrt 2)^A`` on [0, inf)."""
    if A < 1:
        raise ValueError("A must be positive")

    def integrand(x):
        return -math.expm1(A * math.log1p(-special.erfc(x / math.sqrt(2.0))))

    peak = math.sqrt(2.0 * math.log(2.0 * A)) if A > 1 else 1.0
    # the integrand is below 1e-300 past x = 40 for any A we can store
    val, _ = integrate.quad(integrand, 0.0, 40.0, points=[peak], limit=400,
                            epsabs=1e-12, epsrel=1e-12)
    return val


def aux_count(width_used: float, eps: float, A_cap: int, kappa: float = 1.0) -> tuple[int, bool]:
    """``min(A_cap, ceil(exp(kappa w / eps)))`` and whether the cap bound."""
    exponent = kappa * width_used / eps
    if exponent >= math.log(A_cap):
        return A_cap, math.ceil(math.exp(min(exponent, 700.0))) > A_cap
    return max(1, math.ceil(math.exp(exponent))), False


def center(sp_sup: SparseSup, eps: float, A_cap: int = AUX_CAP, cfg: McConfig | None = None,
           kappa: float = 1.0) -> VectorSet:
    """Centered replacement of a shifted supremum in ``R^(dim + A)``.

    Each ``(s, c_s)`` becomes the pairs ``(s, +-c_s e_j / mu_A)``, j <= A, so
    the constant shift is traded for ``c_s max_j |g_j| / mu_A``.  Zero shifts
    collapse to ``(s, 0)``.  ``cfg`` is unused (``mu_A`` is computed by
    quadrature) and kept for signature symmetry with the other stages.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5)")
    if A_cap < 2:
        raise ValueError("A_cap must be at least 2")
    A, capped = aux_count(sp_sup.width_used, eps, A_cap, kappa)
    if capped:
        warnings.warn(f"auxiliary dimension capped at A_cap={A_cap}", RuntimeWarning)
    mu = mu_abs_max(A)
    base = sp.csr_matrix(sp_sup.support.points)
    n = sp_sup.dim
    blocks = []
    for i, c in enumerate(sp_sup.shifts):
        head = base[i]
        if c == 0.0:
            blocks.append(sp.hstack([head, sp.csr_matrix((1, A))], format="csr"))
            continue
        reps = sp.vstack([head] * (2 * A), format="csr")
        signs = np.tile([1.0, -1.0], A) * (c / mu)
        cols = np.repeat(np.arange(A), 2)
        aux = sp.csr_matrix((signs, (np.arange(2 * A), cols)), shape=(2 * A, A))
        blocks.append(sp.hstack([reps, aux], format="csr"))
    mat = sp.vstack(blocks, format="csr")
    if not sp_sup.support.is_sparse and mat.shape[0] * (n + A) <= 4_000_000:
        # small outputs stay dense like the rest of the user-facing sets
        return VectorSet(mat.toarray())
    return VectorSet(mat)
