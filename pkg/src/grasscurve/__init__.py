"""Constant-curvature holomorphic 2-spheres in G(2, n+2; C).

Verification of the quadratic constraint system on coefficient vectors,
geometric invariants (curvature, ramification, degeneracy), congruence
moves, explicit families, and a feasibility search over prescribed degrees.
"""

from .curve import (
    Curve,
    CurveFormatError,
    GramReport,
    VerifyReport,
    coefficient_vectors,
    curve_from_dict,
    curve_to_dict,
    evaluate,
    fullness_rank,
    gram_residual,
    load_curve,
    plucker,
    save_curve,
    verify,
)
from .exterior import MultiVec, herm_inner, rank_tuple, tuple_rank, wedge
from .families import family_d2n, family_dn, veronese
from .gauge import GaugeError, Mobius, apply_gl2, apply_mobius, apply_unitary, canonicalize_a1
from .invariants import (
    NonImmersionError,
    PolyVec,
    RamificationReport,
    curvature_at,
    det_a1_sq,
    g_vector,
    gauss_slack,
    lemma_q,
    ramification,
    tail_probe,
)
from .solver import (
    SearchProblem,
    SearchReport,
    curve_from_w,
    feasibility_scan,
    jacobian,
    residuals,
    search,
)

__version__ = "0.1.0"

__all__ = [
    "Curve",
    "CurveFormatError",
    "GaugeError",
    "GramReport",
    "Mobius",
    "MultiVec",
    "NonImmersionError",
    "PolyVec",
    "RamificationReport",
    "SearchProblem",
    "SearchReport",
    "VerifyReport",
    "apply_gl2",
    "apply_mobius",
    "apply_unitary",
    "canonicalize_a1",
    "coefficient_vectors",
    "curvature_at",
    "curve_from_dict",
    "curve_from_w",
    "curve_to_dict",
    "det_a1_sq",
    "evaluate",
    "family_d2n",
    "family_dn",
    "feasibility_scan",
    "fullness_rank",
    "g_vector",
    "gauss_slack",
    "gram_residual",
    "herm_inner",
    "jacobian",
    "lemma_q",
    "load_curve",
    "plucker",
    "ramification",
    "rank_tuple",
    "residuals",
    "save_curve",
    "search",
    "tail_probe",
    "tuple_rank",
    "verify",
    "veronese",
    "wedge",
]
