"""Sparsify suprema of Gaussian processes, norms and narrow polytopes."""

from .chaining import AdmissibleSequence, build_admissible_sequence, gamma2_upper
from .core import (Estimate, Halfspace, Polytope, VectorSet, diameter, eval_sup,
                   is_symmetric, symmetrize)
from .mc import (McConfig, SupForm, estimate_event_prob, estimate_gaussian_distance,
                 estimate_l1_gap, estimate_width, gaussian_volume)
from .norm import JuntaNorm, eval_norm, sparsify_norm
from .polytope import (LiftConfig, LiftedPolytope, choose_cross_section, lift,
                       sparsify_polytope, sparsify_uniform)
from .sparsify import (ChopPartition, DegenerateWidthError, SparseSup, center, chop,
                       compute_shifts, sparsify)

__version__ = "0.1.0"
