"""Triangles: barycentric algebra, dual bases, centroid weights and the quadratic solver."""

from .bary import BaryPoly, bary_integral, check_barycentric
from .dual import (CentroidWeights, TriDualBasis, boundary_lagrange_centroid, build_dual_basis,
                   omega_factorial_scale,
                   centroid_weights, cyclic_solutions, gl_points, moment_matrix,
                   quadratic_basis_eval)
from .mesh import MeshError, TriMesh, make_structured, read_mesh, write_mesh
from .solver import (TriRunConfig, TriSolutionQ2, interior_flux_cancellation, linear_operator,
                     random_average_trials, rotation_case, run_2d, stable_dt, translation_case,
                     tri_rhs_q2, upwind_point_weights)

__all__ = [
    "BaryPoly", "bary_integral", "check_barycentric",
    "CentroidWeights", "TriDualBasis", "boundary_lagrange_centroid", "build_dual_basis",
    "centroid_weights", "cyclic_solutions", "gl_points", "moment_matrix", "omega_factorial_scale",
    "quadratic_basis_eval",
    "MeshError", "TriMesh", "make_structured", "read_mesh", "write_mesh",
    "TriRunConfig", "TriSolutionQ2", "interior_flux_cancellation", "linear_operator",
    "random_average_trials", "rotation_case", "run_2d", "stable_dt", "translation_case",
    "tri_rhs_q2", "upwind_point_weights",
]
