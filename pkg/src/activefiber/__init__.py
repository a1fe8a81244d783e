"""Nonlinear FE solver for active, incompressible, fiber-reinforced tissue.

The package couples a transversely isotropic hyperelastic law with an
internal kinematic constraint carried by the collagen weave around the
muscle fibers, discretized with mixed Q1-Q0 hexahedra and solved by a
two-step free-contraction / loaded-state procedure. Built-in semi-analytic
oracles verify the solver on homogeneous slab states and axisymmetric tube
inflation.
"""

__version__ = "0.1.0"

from .assembly import Assembler, BoundaryLoad, assemble_residual
from .charts import CARTESIAN, CYLINDRICAL, ChartKind, CoordinateChart, Metric
from .dofs import (DofMap, DofState, dirichlet_from_faces,
                   free_contraction_bcs, stretch_bcs)
from .kinematics import (KinematicState, covariant_gradient_coefficients,
                         deformation_gradient, strain_state)
from .materials import (ActivationState, MaterialParams, MultiplierPair,
                        PseudoActiveTensions, active_energy, cauchy_from_pk2,
                        cauchy_fiber_physical, constraint_h, constraint_h4,
                        constraint_h6, energy_derivatives, passive_energy,
                        pk2_from_cauchy, pk2_state_a, pk2_state_c,
                        pseudo_active_tensions)
from .mesh import Mesh, build_cylinder_mesh, build_slab_mesh
from .oracle import (CylinderGeometry, CylinderOracle, CylinderSolution,
                     HomogeneousSolution, cylinder_solve, slab_equibiaxial,
                     slab_free_contraction, slab_solve, slab_uniaxial)
from .pipeline import (ScheduleStep, StateCTarget, SweepResult,
                       continuation_sweep, solve_state_a, solve_state_c,
                       two_step)
from .solver import SolveReport, SolverConfig, solve_nonlinear
