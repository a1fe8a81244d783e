"""Point kinematics: deformation gradient, strain measures, invariants.

All strain quantities live in the locally orthonormal fiber frame: axis 1 is
the fiber direction, axis 2 the collagen-strut (cross-fiber) direction and
axis 3 the remaining transverse direction. World-coordinate effects enter
only through the deformed metric, so the right Cauchy-Green components are

    C_IJ = Phi_I^a g_ab(x) Phi_J^b

with Phi_I^a = d(theta^a)/dX^I the mixed-basis deformation gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import CoordinateChart
from .errors import DomainError, InvertedElementError


@dataclass(frozen=True)
class KinematicState:
    """Deformation state at a material point, fiber-frame components."""

    phi: np.ndarray        # (3, 3) mixed components Phi_I^a
    C: np.ndarray          # (3, 3) right Cauchy-Green, fiber frame
    E: np.ndarray          # (3, 3) Green strain
    i1: float
    i3: float
    i4: float
    i6: float

    @property
    def lambda_fiber(self) -> float:
        return float(np.sqrt(self.i4))

    @property
    def lambda_cross(self) -> float:
        return float(np.sqrt(self.i6))


def deformation_gradient(dtheta_dX) -> np.ndarray:
    """Validate and store mixed deformation-gradient components.

    dtheta_dX[I, a] = d(theta^a)/dX^I; no metric is applied here.
    """
    phi = np.asarray(dtheta_dX, float)
    if phi.shape != (3, 3):
        raise DomainError(f"expected 3x3 gradient components, got {phi.shape}")
    if not np.all(np.isfinite(phi)):
        raise DomainError("non-finite deformation gradient components")
    return phi


def strain_state(phi, chart: CoordinateChart, deformed_point) -> KinematicState:
    """Build the full kinematic state from gradient components and the chart.

    Raises InvertedElementError if the mapping has non-positive volume ratio.
    """
    phi = deformation_gradient(phi)
    gdiag = chart.metric_diag(np.asarray(deformed_point, float))
    jac = np.linalg.det(phi) * float(np.sqrt(np.prod(gdiag)))
    if jac <= 0.0:
        raise InvertedElementError(-1, f"volume ratio {jac:.3e} <= 0")
    C = np.einsum("Ia,a,Ja->IJ", phi, gdiag, phi)
    E = 0.5 * (C - np.eye(3))
    return KinematicState(
        phi=phi,
        C=C,
        E=E,
        i1=float(np.trace(C)),
        i3=float(np.linalg.det(C)),
        i4=float(C[0, 0]),
        i6=float(C[1, 1]),
    )


def covariant_gradient_coefficients(chart: CoordinateChart, deformed_point) -> np.ndarray:
    """Chart coefficients for covariant differentiation of test functions.

    Returns G[b, a, m] such that grad_I u_a picks up the correction
    -G[b, a, m] Phi_I^m u_b. Zero for Cartesian charts.
    """
    return chart.christoffels(deformed_point)
