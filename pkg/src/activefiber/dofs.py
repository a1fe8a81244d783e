"""Degree-of-freedom bookkeeping: values, Dirichlet pins and tied groups.

The reduced unknown vector used by the nonlinear solver is

    [ free nodal coordinates (node-major, axis-minor order),
      element pressures p_e,
      element coupling multipliers q_e (free-contraction solves only) ]

Tied groups collapse several nodal dofs onto one master unknown (used for
the plane top face of the cylinder, which realizes the zero-net-axial-force
end condition); the master occupies the natural position of the group's
lowest (node, axis) pair and its residual row accumulates all member rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError
from .mesh import Mesh


@dataclass
class DofState:
    """Deformed nodal world coordinates plus element multipliers."""

    coords: np.ndarray            # (N, 3)
    p: np.ndarray                 # (E,)
    q: np.ndarray | None = None   # (E,) only for free-contraction solves

    def copy(self) -> "DofState":
        return DofState(self.coords.copy(), self.p.copy(),
                        None if self.q is None else self.q.copy())


class DofMap:
    """Maps between full nodal arrays and the reduced unknown vector."""

    def __init__(self, mesh: Mesh, dirichlet: dict[tuple[int, int], float],
                 ties: list[list[tuple[int, int]]] | None = None):
        n = mesh.n_nodes
        self.mesh = mesh
        self.dirichlet = dict(dirichlet)
        status = np.zeros((n, 3), dtype=int)      # 0 free, 1 fixed, 2 tied member
        values = np.zeros((n, 3))
        for (node, axis), val in dirichlet.items():
            status[node, axis] = 1
            values[node, axis] = val
        master_of = {}
        for group in ties or []:
            group = sorted(group)
            master = group[0]
            if status[master] != 0:
                raise MeshError("tie master collides with a Dirichlet pin")
            for member in group[1:]:
                if status[member[0], member[1]] != 0:
                    raise MeshError("tied dof collides with a Dirichlet pin")
                status[member[0], member[1]] = 2
                master_of[member] = master
        self._status = status
        self._values = values
        order = np.argwhere(status == 0)          # (node, axis), row-major
        self.n_free = order.shape[0]
        self._free_nodes = order[:, 0]
        self._free_axes = order[:, 1]
        self._free_index = {(int(n), int(a)): i for i, (n, a) in enumerate(order)}
        members = sorted(master_of)
        self._member_nodes = np.array([m[0] for m in members], dtype=int)
        self._member_axes = np.array([m[1] for m in members], dtype=int)
        self._member_targets = np.array(
            [self._free_index[master_of[m]] for m in members], dtype=int)
        self._member_index = {
            m: self._free_index[master_of[m]] for m in members}

    def free_index(self, node: int, axis: int) -> int:
        dof = (node, axis)
        if dof in self._free_index:
            return self._free_index[dof]
        return self._member_index[dof]

    def extract(self, coords: np.ndarray) -> np.ndarray:
        """Reduced vector holding the free entries of a full (N,3) array."""
        return coords[self._free_nodes, self._free_axes].copy()

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Full (N,3) coordinates from the reduced vector."""
        coords = self._values.copy()
        coords[self._free_nodes, self._free_axes] = x
        if self._member_nodes.size:
            coords[self._member_nodes, self._member_axes] = x[self._member_targets]
        return coords

    def reduce_rows(self, rows: np.ndarray) -> np.ndarray:
        """Accumulate full (N,3) residual rows onto the reduced layout."""
        out = rows[self._free_nodes, self._free_axes].copy()
        if self._member_nodes.size:
            np.add.at(out, self._member_targets,
                      rows[self._member_nodes, self._member_axes])
        return out


def dirichlet_from_faces(mesh: Mesh, pins) -> dict[tuple[int, int], float]:
    """Build a Dirichlet dict from (face_set, axis, value) entries.

    value may be a float or a callable mapping the reference coordinate of
    the pinned axis to the prescribed deformed coordinate.
    """
    out: dict[tuple[int, int], float] = {}
    for face_set, axis, value in pins:
        for node in mesh.face_nodes(face_set):
            ref = mesh.nodes[node, axis]
            out[(int(node), int(axis))] = float(value(ref) if callable(value) else value)
    return out


def free_contraction_bcs(mesh: Mesh):
    """Symmetry pins (and the cylinder top-face tie) for unloaded solves.

    The slab keeps its three minimum faces on their planes, which pins all
    rigid modes without stressing a homogeneous state. The cylinder sector
    keeps the phi faces on their reference half-planes and the bottom face
    at z = 0; the top face stays plane through a tie so the net axial force
    vanishes while the height remains free.
    """
    if mesh.frame == "slab":
        dirichlet = dirichlet_from_faces(
            mesh, [("xmin", 0, 0.0), ("ymin", 1, 0.0), ("zmin", 2, 0.0)])
        return dirichlet, []
    dirichlet = {}
    for name in ("phi0", "phi1"):
        for node in mesh.face_nodes(name):
            dirichlet[(int(node), 1)] = float(mesh.nodes[node, 1])
    for node in mesh.face_nodes("bottom"):
        dirichlet[(int(node), 2)] = 0.0
    ties = [[(int(node), 2) for node in mesh.face_nodes("top")]]
    return dirichlet, ties


def stretch_bcs(mesh: Mesh, lambda_x: float | None = None,
                lambda_y: float | None = None):
    """Dirichlet pins for stretch-controlled slab tests.

    Prescribes deformed face coordinates reaching the target stretch on the
    axes given; unstretched axes keep only their minimum-face symmetry pin.
    """
    if mesh.frame != "slab":
        raise MeshError("stretch-controlled tests are slab-only")
    pins = []
    for axis, lam, lo, hi in ((0, lambda_x, "xmin", "xmax"),
                              (1, lambda_y, "ymin", "ymax")):
        pins.append((lo, axis, 0.0))
        if lam is not None:
            pins.append((hi, axis, lambda ref, lam=lam: lam * ref))
    pins.append(("zmin", 2, 0.0))
    dirichlet = dirichlet_from_faces(mesh, pins)
    return dirichlet, []
