"""Exact rational iterated preimages for maps of P^1 over Q and the
preimage curves of one-parameter quadratic families."""

from preimdyn.arith import INF, PrimeSet, QuadTower, TowerScalar
from preimdyn.curves import QuadFamily, components, enumerate_until_stable, preimage_curve_poly
from preimdyn.dynamics import RatMap, canonical_height, is_preperiodic, new_ratmap, to_normal_form
from preimdyn.errors import PreimError
from preimdyn.infinity import places_at_infinity, theorem_bound_check
from preimdyn.kernels import BACKEND
from preimdyn.poly import Poly, RatFunc
from preimdyn.preimage import preimage_set, verify_s_unit_chain

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "INF",
    "Poly",
    "PreimError",
    "PrimeSet",
    "QuadFamily",
    "QuadTower",
    "RatFunc",
    "RatMap",
    "TowerScalar",
    "canonical_height",
    "components",
    "enumerate_until_stable",
    "is_preperiodic",
    "new_ratmap",
    "places_at_infinity",
    "preimage_curve_poly",
    "preimage_set",
    "theorem_bound_check",
    "to_normal_form",
    "verify_s_unit_chain",
]
