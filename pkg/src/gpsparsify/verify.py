"""Statistical checks of the inequalities the constructions rely on.

Every check reports ``measured`` against ``bound`` and passes iff
``measured <= bound + 3 std_err``.  Each check draws from streams derived
from its own config, never from the streams used to build the object.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .chaining import build_admissible_sequence, gamma2_upper
from .core import Polytope, VectorSet, is_symmetric
from .mc import (McConfig, as_sup_form, estimate_event_prob, estimate_gaussian_distance,
                 estimate_l1_gap, estimate_width)
from .sparsify import AUX_CAP

SIGMAS = 3.0


@dataclass(frozen=True)
class CheckReport:
    name: str
    bound: float
    measured: float
    std_err: float
    n_samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.bound + SIGMAS * self.std_err)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {"name": d["name"], "bound": d["bound"], "measured": d["measured"],
                "std_err": d["std_err"], "pass": self.passed, "n_samples": d["n_samples"],
                "seed": d["seed"]}


def _report(name, bound, est) -> CheckReport:
    return CheckReport(name, float(bound), float(est.mean), float(est.std_err),
                       int(est.n_samples), int(est.seed))


def check_tail(T: VectorSet, rho: float, cfg: McConfig) -> CheckReport:
    """``Pr[|f_T(g) - w| >= rho] <= 2 exp(-rho^2 / (2 max |t|^2))``."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    w = estimate_width(T, cfg.derive("width")).mean
    sigma2 = float(np.max(T.norms) ** 2)
    bound = 2.0 * np.exp(-rho ** 2 / (2.0 * sigma2)) if sigma2 > 0 else (2.0 if rho == 0 else 0.0)
    est = estimate_event_prob(lambda g: np.abs(T.products(g).max(axis=1) - w) >= rho,
                              T.dim, cfg.derive("event"))
    return _report(f"tail(rho={rho:g})", bound, est)


def check_anticoncentration(T: VectorSet, eps: float, cfg: McConfig) -> CheckReport:
    """``Pr[|f_T(g)| <= eps w(T)] <= 10 eps`` for symmetric ``T``."""
    if not is_symmetric(T):
        raise ValueError("anti-concentration check needs a symmetric set")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5)")
    width = estimate_width(T, cfg.derive("width"))
    if width.mean <= SIGMAS * width.std_err:
        raise ValueError("width is indistinguishable from 0")
    level = eps * width.mean
    est = estimate_event_prob(lambda g: np.abs(T.products(g).max(axis=1)) <= level,
                              T.dim, cfg.derive("event"))
    return _report(f"anticoncentration(eps={eps:g})", 10.0 * eps, est)


def check_cck(T: VectorSet, theta: float, eps: float, cfg: McConfig) -> CheckReport:
    """``Pr[|f_T(g) - theta| <= eps] <= 4 eps (1 + w(T))`` for unit vectors."""
    if np.any(np.abs(T.norms - 1.0) > 1e-6):
        raise ValueError("CCK check needs unit vectors")
    if not eps > 0:
        raise ValueError("eps must be positive")
    w = estimate_width(T, cfg.derive("width")).mean
    est = estimate_event_prob(lambda g: np.abs(T.products(g).max(axis=1) - theta) <= eps,
                              T.dim, cfg.derive("event"))
    return _report(f"cck(theta={theta:g},eps={eps:g})", 4.0 * eps * (1.0 + w), est)


def check_sparsifier(T: VectorSet, sp_sup, eps: float, cfg: McConfig) -> CheckReport:
    """Relative L1 gap ``E|f_T - sparsifier| / w(T) <= eps``."""
    form = as_sup_form(sp_sup)
    dim = max(T.dim, form.dim)
    gap = estimate_l1_gap(T, form, dim, cfg.derive("gap"))
    if gap.mean == 0.0 and gap.std_err == 0.0:
        return _report(f"sparsifier(eps={eps:g})", eps, gap)
    w = estimate_width(T, cfg.derive("width")).mean
    if not w > 0:
        raise ValueError("width estimate is not positive; relative gap undefined")
    return CheckReport(f"sparsifier(eps={eps:g})", float(eps), gap.mean / w, gap.std_err / w,
                       gap.n_samples, gap.seed)


def check_gamma2_sandwich(T: VectorSet, C: float, cfg: McConfig) -> CheckReport:
    """``w(T) <= C gamma2_upper(T)`` with the default admissible sequence."""
    if not C > 0:
        raise ValueError("C must be positive")
    width = estimate_width(T, cfg.derive("width"))
    g2 = gamma2_upper(T, build_admissible_sequence(T))
    return _report(f"gamma2_sandwich(C={C:g})", C * g2, width)


def check_multiplicative(T_dual: VectorSet, psi, eps: float, cfg: McConfig) -> CheckReport:
    """``Pr[nu(g) outside [(1-eps) psi(g), (1+eps) psi(g)]] <= eps``.

    ``g`` lives in ``R^(dim + pad)``; ``nu`` reads the first ``dim``
    coordinates.  Only coordinates that ``psi`` can see are sampled.
    """
    if T_dual.dim != psi.dim:
        raise ValueError(f"dual set has dimension {T_dual.dim}, norm has {psi.dim}")
    cols, active = psi.active()
    dim = len(cols)

    def fails(g):
        nu = T_dual.products(g[:, : T_dual.dim]).max(axis=1)
        val = active.products(g).max(axis=1)
        return (nu < (1.0 - eps) * val) | (nu > (1.0 + eps) * val)

    est = estimate_event_prob(fails, dim, cfg.derive("event"))
    return _report(f"multiplicative(eps={eps:g})", eps, est)


def check_polytope(K: Polytope, L: Polytope, eps: float, cfg: McConfig) -> CheckReport:
    """``dist_G(K, L) <= eps``."""
    est = estimate_gaussian_distance(K, L, cfg.derive("distance"))
    return _report(f"polytope(eps={eps:g})", eps, est)


def _suite_sets(quick: bool) -> dict[str, VectorSet]:
    from . import bench

    sets = {"coordinate64": bench.gen_coordinate_example(64),
            "cloud32x64": bench.gen_random_unit_cloud(32, 64, seed=1),
            "symcloud32x64": bench.gen_symmetric_cloud(32, 64, seed=2)}
    if not quick:
        sets.update({"coordinate256": bench.gen_coordinate_example(256),
                     "cloud64x512": bench.gen_random_unit_cloud(64, 512, seed=3),
                     "twoscale": bench.gen_two_scale_clusters()})
    return sets


def run_suite(cfg: McConfig, suite: str = "all", c_sandwich: float = 30.0,
              A_cap: int = AUX_CAP, kappa: float = 1.0, lc=None) -> list[CheckReport]:
    """Every check on the benchmark sets.

    ``quick`` uses the small sets and one accuracy level; ``all`` adds the
    larger sets, the accuracy sweep, the norm and the polytope cases.
    """
    from . import bench
    from .core import symmetrize
    from .norm import sparsify_norm
    from .polytope import sparsify_polytope
    from .sparsify import sparsify

    if suite not in ("all", "quick"):
        raise ValueError(f"unknown suite {suite!r}")
    quick = suite == "quick"
    reports = []
    for name, T in _suite_sets(quick).items():
        sub = cfg.derive(name)

        def tag(rep, name=name):
            return CheckReport(f"{name}:{rep.name}", rep.bound, rep.measured, rep.std_err,
                               rep.n_samples, rep.seed)

        reports.append(tag(check_tail(T, 3.0 * float(T.norms.max()), sub.derive("tail"))))
        reports.append(tag(check_gamma2_sandwich(T, c_sandwich, sub.derive("gamma2"))))
        sym = T if is_symmetric(T) else symmetrize(T)
        reports.append(tag(check_anticoncentration(sym, 0.05, sub.derive("anti"))))
        unit = T.scaled(1.0 / float(T.norms.max()))
        if np.all(np.abs(unit.norms - 1.0) <= 1e-6):
            for theta in (0.0, 1.0):
                reports.append(tag(check_cck(unit, theta, 0.05, sub.derive(f"cck{theta:g}"))))
        for eps in ((0.2,) if quick else (0.4, 0.2, 0.1)):
            sp_sup = sparsify(T, eps, sub.derive(f"build{eps:g}"))
            reports.append(tag(check_sparsifier(T, sp_sup, eps, sub.derive(f"check{eps:g}"))))
    if not quick:
        cloud = bench.gen_symmetric_cloud(64, 256, seed=4)
        psi = sparsify_norm(cloud, 0.25, cfg.derive("norm-build"), A_cap, kappa=kappa,
                            measure=False)
        reports.append(check_multiplicative(cloud, psi, 0.25, cfg.derive("norm-check")))
        bodies = {"slab": bench.gen_slab(), "octagon": bench.gen_regular_polygon(8),
                  "shifted64": bench.gen_shifted_polytope(64)}
        for name, K in bodies.items():
            L = sparsify_polytope(K, 0.3, cfg.derive(f"{name}-build"), lc)
            rep = check_polytope(K, L, 0.3, cfg.derive(f"{name}-check"))
            reports.append(CheckReport(f"{name}:{rep.name}", rep.bound, rep.measured,
                                       rep.std_err, rep.n_samples, rep.seed))
    return reports
