"""World coordinate charts: Cartesian and cylindrical.

Both charts used here have diagonal metrics, which the assembly exploits;
the public Metric type still carries full 3x3 components. Cylindrical world
coordinates are (r, phi, z) with the axis along z, lengths in cm and phi in
radians, so the covariant metric is diag(1, r^2, 1).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


class ChartKind(enum.Enum):
    CARTESIAN = "cartesian"
    CYLINDRICAL = "cylindrical"


@dataclass(frozen=True)
class Metric:
    """Covariant/contravariant world metric components at one point."""

    covariant: np.ndarray
    contravariant: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "covariant", np.asarray(self.covariant, float))
        object.__setattr__(self, "contravariant", np.asarray(self.contravariant, float))
        object.__setattr__(self, "point", np.asarray(self.point, float))


@dataclass(frozen=True)
class CoordinateChart:
    """A world coordinate system for reference or deformed configurations."""

    kind: ChartKind = ChartKind.CARTESIAN

    @property
    def is_cartesian(self) -> bool:
        return self.kind is ChartKind.CARTESIAN

    def metric_diag(self, points: np.ndarray) -> np.ndarray:
        """Diagonal of the covariant metric at one or many points.

        points: (..., 3) world coordinates. Returns (..., 3).
        """
        points = np.asarray(points, float)
        if self.is_cartesian:
            return np.ones_like(points)
        r = points[..., 0]
        if np.any(r <= 0.0):
            raise DomainError("cylindrical metric requires r > 0")
        out = np.ones_like(points)
        out[..., 1] = r * r
        return out

    def metric_at(self, point) -> Metric:
        """Full covariant/contravariant metric at a single world point."""
        point = np.asarray(point, float)
        diag = self.metric_diag(point)
        return Metric(np.diag(diag), np.diag(1.0 / diag), point)

    def christoffels(self, point) -> np.ndarray:
        """Connection coefficients Gamma^b_{a,m} of the chart at a point.

        These are the correction coefficients entering the covariant
        derivative of a covector field,
            grad_I u_a = d(u_a)/dX^I - Gamma^b_{a,m} Phi_I^m u_b,
        returned as an array G[b, a, m]. All zero for Cartesian; for
        cylindrical the only nonzero entries couple (r, phi).
        """
        point = np.asarray(point, float)
        gamma = np.zeros((3, 3, 3))
        if self.is_cartesian:
            return gamma
        r = float(point[0])
        if r <= 0.0:
            raise DomainError("cylindrical chart requires r > 0")
        gamma[0, 1, 1] = -r          # Gamma^r_{phi,phi}
        gamma[1, 0, 1] = 1.0 / r     # Gamma^phi_{r,phi}
        gamma[1, 1, 0] = 1.0 / r     # Gamma^phi_{phi,r}
        return gamma

    def to_cartesian(self, points: np.ndarray) -> np.ndarray:
        """Map world coordinates to Cartesian positions, shape preserved."""
        points = np.asarray(points, float)
        if self.is_cartesian:
            return points.copy()
        r, phi, z = points[..., 0], points[..., 1], points[..., 2]
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)

    def basis_cartesian(self, points: np.ndarray) -> np.ndarray:
        """Covariant basis vectors g_a as Cartesian columns, shape (..., 3, 3).

        out[..., :, a] is the basis vector of world coordinate a.
        """
        points = np.asarray(points, float)
        if self.is_cartesian:
            shape = points.shape[:-1] + (3, 3)
            return np.broadcast_to(np.eye(3), shape).copy()
        r, phi = points[..., 0], points[..., 1]
        c, s = np.cos(phi), np.sin(phi)
        zero = np.zeros_like(r)
        one = np.ones_like(r)
        # columns: d(x,y,z)/dr, d(x,y,z)/dphi, d(x,y,z)/dz
        return np.stack(
            [
                np.stack([c, -r * s, zero], axis=-1),
                np.stack([s, r * c, zero], axis=-1),
                np.stack([zero, zero, one], axis=-1),
            ],
            axis=-2,
        )


CARTESIAN = CoordinateChart(ChartKind.CARTESIAN)
CYLINDRICAL = CoordinateChart(ChartKind.CYLINDRICAL)
