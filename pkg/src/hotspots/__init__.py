"""Numerical laboratory for second Neumann eigenfunctions of triangles.

Vertex-anchored Bessel expansions (method of particular solutions) compute
the eigenpair; analysis routines locate critical points, trace the nodal
arc, extract vertex Bessel coefficients, and classify triangles across the
angle moduli space.
"""

from .config import AnalysisConfig, RunConfig, SolverConfig, load_config
from .eigensolver import (BasisSpec, Discretization, Eigenpair, VertexBlock,
                          assemble, fem_bracket, find_mu2, make_basis,
                          make_discretization, residual_certificate,
                          sigma_min)
from .field import (FieldSample, directional_derivative, eval, eval_fields,
                    grid_samples, rotational_derivative)
from .geometry import (EdgeFrame, LabeledTriangle, ShapeClass, angles,
                       classify, edge_frame, from_angles, straight_line_path)
from .analysis import (CriticalPointReport, HotSpotsVerdict, NodalArc,
                       VertexCoefficients, bessel_coefficients,
                       boundary_critical_points, classify_critical_point,
                       extremum_locus, hot_spots_verdict,
                       interior_critical_points, nodal_arc)
from .specfun import BesselEval, bessel_j, bessel_j_scaled, ln_gamma
from .sweep import (PathRecord, SweepRecord, continuation, crit_trajectory,
                    isosceles_scan, moduli_sweep)

__version__ = "0.1.0"
