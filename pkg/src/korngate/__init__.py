"""Exact-arithmetic checks of Korn compatibility for nonconforming finite elements."""
from .elements import REGISTRY, get_element
from .geometry import (Cell, Face, Mesh, make_two_cube_domain, make_two_square_domain, parse_mesh,
                       reference_simplex)
from .korn import (KornReport, PwField, PwSpace, dof_coverage_test, jump_on_face, korn_constant_estimate,
                   korn_kernel_test)
from .polyalg import Poly, VecPoly
from .sharpness import build_counterexample, run_case, verify_sharpness
from .spaces import RigidMotion, SpaceBasis

__all__ = [
    "REGISTRY", "get_element", "Cell", "Face", "Mesh", "make_two_cube_domain", "make_two_square_domain",
    "parse_mesh", "reference_simplex", "KornReport", "PwField", "PwSpace", "dof_coverage_test",
    "jump_on_face", "korn_constant_estimate", "korn_kernel_test", "Poly", "VecPoly",
    "build_counterexample", "run_case", "verify_sharpness", "RigidMotion", "SpaceBasis",
]
