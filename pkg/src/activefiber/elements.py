"""Trilinear hexahedral shape functions and Gauss quadrature rules.

Element coordinates live on the unit cube xi in [0, 1]^3. Corner ordering
follows the binary convention: node n has corner (n & 1, (n >> 1) & 1,
(n >> 2) & 1), i.e. xi1 varies fastest.
"""
from __future__ import annotations

import numpy as np

CORNERS = np.array([[(n >> k) & 1 for k in range(3)] for n in range(8)], float)

_G = 0.5 / np.sqrt(3.0)
# 2x2x2 Gauss points on [0,1]^3, same corner-style ordering
GAUSS8_POINTS = 0.5 + (2.0 * CORNERS - 1.0) * _G
GAUSS8_WEIGHTS = np.full(8, 0.125)

# 2x2 rule on the unit square for face integrals
GAUSS4_POINTS = 0.5 + (2.0 * CORNERS[:4, :2] - 1.0) * _G
GAUSS4_WEIGHTS = np.full(4, 0.25)


def shape_eval(xi):
    """Trilinear shape values and derivatives at one point of the unit cube.

    Returns (psi, dpsi) with psi shape (8,) and dpsi shape (8, 3); the
    values satisfy sum(psi) = 1 and sum(dpsi, axis=0) = 0.
    """
    xi = np.asarray(xi, float)
    psi = np.ones(8)
    dpsi = np.ones((8, 3))
    for k in range(3):
        f = np.where(CORNERS[:, k] > 0.5, xi[k], 1.0 - xi[k])
        df = np.where(CORNERS[:, k] > 0.5, 1.0, -1.0)
        psi *= f
        for m in range(3):
            dpsi[:, m] *= df if m == k else f
    return psi, dpsi


def shape_tables(points):
    """Shape values/derivatives tabulated at many points: (Q,8) and (Q,8,3)."""
    points = np.atleast_2d(np.asarray(points, float))
    psis = np.empty((points.shape[0], 8))
    dpsis = np.empty((points.shape[0], 8, 3))
    for q, xi in enumerate(points):
        psis[q], dpsis[q] = shape_eval(xi)
    return psis, dpsis


def face_shape_tables(points):
    """Bilinear quad shape values/derivatives at (Q,2) points: (Q,4), (Q,4,2)."""
    points = np.atleast_2d(np.asarray(points, float))
    corners = CORNERS[:4, :2]
    psis = np.empty((points.shape[0], 4))
    dpsis = np.empty((points.shape[0], 4, 2))
    for q, xi in enumerate(points):
        psi = np.ones(4)
        dpsi = np.ones((4, 2))
        for k in range(2):
            f = np.where(corners[:, k] > 0.5, xi[k], 1.0 - xi[k])
            df = np.where(corners[:, k] > 0.5, 1.0, -1.0)
            psi *= f
            for m in range(2):
                dpsi[:, m] *= df if m == k else f
        psis[q], dpsis[q] = psi, dpsi
    return psis, dpsis
