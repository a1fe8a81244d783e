"""Hexahedral meshes for the slab and cylinder-sector geometries.

Nodes store reference world coordinates (Cartesian x,y,z or cylindrical
r,phi,z in cm/radians). Elements are 8-node bricks with the binary corner
ordering of the elements module. Face sets hold oriented boundary quads:
node order is chosen so the bilinear tangent cross product points outward
from the body.

The per-mesh fiber frame fixes the locally orthonormal body axes used for
strain components: the slab frame is (x, y, z) with fibers along x and
collagen struts along y; the cylinder frame is (circumferential, axial,
radial) with fibers circumferential and struts axial.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .charts import CARTESIAN, CYLINDRICAL, CoordinateChart
from .elements import CORNERS
from .errors import MeshError

# local corner ids (binary ordering) of the six brick faces, ordered so the
# quad's (t1 x t2) normal points out of the element
_FACE_CORNERS = {
    "xmin": (0, 4, 6, 2),
    "xmax": (1, 3, 7, 5),
    "ymin": (0, 1, 5, 4),
    "ymax": (2, 6, 7, 3),
    "zmin": (0, 2, 3, 1),
    "zmax": (4, 5, 7, 6),
}


@dataclass(frozen=True)
class FaceSet:
    """Oriented boundary quads: (F, 4) node ids plus owning elements (F,)."""

    quads: np.ndarray
    elements: np.ndarray


@dataclass(frozen=True)
class Mesh:
    chart: CoordinateChart
    nodes: np.ndarray                 # (N, 3) reference world coordinates
    elements: np.ndarray              # (E, 8) connectivity
    face_sets: dict[str, FaceSet]
    frame: str                        # 'slab' or 'cylinder' fiber-frame tag

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def face_nodes(self, name: str) -> np.ndarray:
        """Sorted unique node ids of a face set."""
        return np.unique(self.face_sets[name].quads)

    def to_json_dict(self) -> dict:
        return {
            "chart": self.chart.kind.value,
            "frame": self.frame,
            "nodes": self.nodes.tolist(),
            "elements": self.elements.tolist(),
            "face_sets": {
                name: {"quads": fs.quads.tolist(), "elements": fs.elements.tolist()}
                for name, fs in self.face_sets.items()
            },
        }

    def save_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=1)


def _grid(counts, spans):
    """Structured node grid: returns (N,3) coords and an index lookup."""
    nx, ny, nz = counts
    axes = [np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(spans, counts)]
    idx = lambda i, j, k: (k * (ny + 1) + j) * (nx + 1) + i  # noqa: E731
    coords = np.empty(((nx + 1) * (ny + 1) * (nz + 1), 3))
    for k in range(nz + 1):
        for j in range(ny + 1):
            for i in range(nx + 1):
                coords[idx(i, j, k)] = (axes[0][i], axes[1][j], axes[2][k])
    return coords, idx


def _brick_elements(counts, idx):
    nx, ny, nz = counts
    elems = np.empty((nx * ny * nz, 8), dtype=int)
    e = 0
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                corner0 = np.array([i, j, k])
                elems[e] = [idx(*(corner0 + CORNERS[n].astype(int))) for n in range(8)]
                e += 1
    return elems


def _face_sets(counts, elems):
    nx, ny, nz = counts
    sets = {}
    picks = {
        "xmin": lambda i, j, k: i == 0,
        "xmax": lambda i, j, k: i == nx - 1,
        "ymin": lambda i, j, k: j == 0,
        "ymax": lambda i, j, k: j == ny - 1,
        "zmin": lambda i, j, k: k == 0,
        "zmax": lambda i, j, k: k == nz - 1,
    }
    for name, pick in picks.items():
        quads, owners = [], []
        e = 0
        for k in range(nz):
            for j in range(ny):
                for i in range(nx):
                    if pick(i, j, k):
                        quads.append([elems[e][c] for c in _FACE_CORNERS[name]])
                        owners.append(e)
                    e += 1
        sets[name] = FaceSet(np.array(quads, dtype=int), np.array(owners, dtype=int))
    return sets


def build_slab_mesh(lx, ly, lz, nx, ny, nz) -> Mesh:
    """Cartesian slab on [0,lx]x[0,ly]x[0,lz] with fibers along x."""
    if min(lx, ly, lz) <= 0 or min(nx, ny, nz) < 1:
        raise MeshError("slab dimensions and divisions must be positive")
    counts = (nx, ny, nz)
    coords, idx = _grid(counts, [(0, lx), (0, ly), (0, lz)])
    elems = _brick_elements(counts, idx)
    return Mesh(CARTESIAN, coords, elems, _face_sets(counts, elems), "slab")


def build_cylinder_mesh(r_int, r_ext, length, nr, nphi, nz,
                        sector_angle) -> Mesh:
    """Cylinder-sector mesh in (r, phi, z) world coordinates.

    Fibers run circumferentially, struts axially. The grid axes map as
    (r, phi, z) -> structured (x, y, z), so face-set names translate to
    inner/outer (r), phi0/phi1 (phi) and bottom/top (z).
    """
    if not 0 < r_int < r_ext:
        raise MeshError("need 0 < r_int < r_ext")
    if not 0 < sector_angle <= 2 * np.pi:
        raise MeshError("sector angle must lie in (0, 2*pi]")
    if min(nr, nphi, nz) < 1 or length <= 0:
        raise MeshError("divisions and length must be positive")
    counts = (nr, nphi, nz)
    coords, idx = _grid(counts, [(r_int, r_ext), (0.0, sector_angle), (0.0, length)])
    elems = _brick_elements(counts, idx)
    raw = _face_sets(counts, elems)
    sets = {
        "inner": raw["xmin"], "outer": raw["xmax"],
        "phi0": raw["ymin"], "phi1": raw["ymax"],
        "bottom": raw["zmin"], "top": raw["zmax"],
    }
    return Mesh(CYLINDRICAL, coords, elems, sets, "cylinder")
