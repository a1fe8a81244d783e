"""Mixed Q1-Q0 residual assembly for the two solution states.

Residual layout (deterministic, shared with the solver):

    [ free nodal rows reduced by the DofMap (node-major, axis-minor),
      one incompressibility row per element, normalized by element volume,
      one coupling-constraint row per element (free-contraction only) ]

Nodal rows carry kPa*cm^2; the volume normalization of the element rows
keeps convergence tolerances mesh independent. Elements are integrated with
the 2x2x2 Gauss rule and summed in fixed element order, so identical inputs
produce bitwise-identical residuals.

The per-quadrature-point stress evaluation mirrors the point API of the
materials module but runs batched over (elements, points).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import ChartKind
from .dofs import DofMap
from .elements import (GAUSS4_POINTS, GAUSS4_WEIGHTS, GAUSS8_POINTS,
                       GAUSS8_WEIGHTS, face_shape_tables, shape_tables)
from .errors import DomainError, InvertedElementError, MeshError
from .materials import MaterialParams, energy_derivatives
from .mesh import Mesh

# cyclic quad node order -> bilinear binary corner order
_QUAD_TO_BILINEAR = np.array([0, 1, 3, 2])


@dataclass(frozen=True)
class BoundaryLoad:
    """A surface load on a named face set.

    kind 'follower_pressure': magnitude is a scalar pressure (kPa) acting
    along the deformed inward normal, integrated over the deformed face.
    kind 'traction_reference': magnitude is a 3-vector of contravariant
    world traction components per unit undeformed area.
    """

    face_set: str
    kind: str
    magnitude: float | np.ndarray

    def __post_init__(self):
        if self.kind not in ("follower_pressure", "traction_reference"):
            raise DomainError(f"unknown load kind {self.kind!r}")


@dataclass
class Kinematics:
    """Batched quadrature-point kinematics for one deformed configuration."""

    phi: np.ndarray      # (E, Q, 3, 3) mixed components Phi[I, a]
    x: np.ndarray        # (E, Q, 3) deformed world points
    gdiag: np.ndarray    # (E, Q, 3) deformed world metric diagonal
    C: np.ndarray        # (E, Q, 3, 3)
    Cinv: np.ndarray
    detC: np.ndarray     # (E, Q)
    i1: np.ndarray
    i4: np.ndarray
    i6: np.ndarray


class Assembler:
    """Precomputed reference geometry plus residual evaluation."""

    def __init__(self, mesh: Mesh, params: MaterialParams):
        self.mesh = mesh
        self.params = params
        self.conn = mesh.elements
        self.psi, self.dpsi = shape_tables(GAUSS8_POINTS)      # (Q,8), (Q,8,3)
        coords = mesh.nodes[self.conn]                         # (E,8,3)
        dref = np.einsum("qnK,enA->eqAK", self.dpsi, coords)   # dTheta^A/dxi_K
        if mesh.chart.kind is ChartKind.CARTESIAN:
            A = dref                                           # X == Theta
        else:
            rq = np.einsum("qn,en->eq", self.psi, coords[:, :, 0])
            if np.any(rq <= 0.0):
                raise MeshError("cylinder mesh reaches r <= 0")
            # fiber frame (circumferential, axial, radial)
            A = np.stack([rq[..., None] * dref[:, :, 1, :],
                          dref[:, :, 2, :],
                          dref[:, :, 0, :]], axis=2)           # (E,Q,I,K)
        detA = np.linalg.det(A)
        bad = np.argwhere(detA <= 0.0)
        if bad.size:
            raise MeshError(f"non-positive reference volume in element {bad[0][0]}")
        invA = np.linalg.inv(A)                                # (E,Q,K,I)
        self.grad = np.einsum("qnK,eqKI->eqnI", self.dpsi, invA)
        self.wdet = GAUSS8_WEIGHTS[None, :] * detA             # (E,Q)
        self.volumes = self.wdet.sum(axis=1)                   # (E,)
        self.n_elements = mesh.n_elements

    # ---------------- kinematics ----------------

    def kinematics(self, coords: np.ndarray) -> Kinematics:
        """Quadrature-point kinematics for deformed nodal coordinates."""
        theta = coords[self.conn]                              # (E,8,3)
        phi = np.einsum("eqnI,enA->eqIA", self.grad, theta)
        x = np.einsum("qn,enA->eqA", self.psi, theta)
        if self.mesh.chart.kind is ChartKind.CARTESIAN:
            gdiag = np.ones_like(x)
        else:
            r = x[..., 0]
            if np.any(r <= 0.0):
                e = int(np.argwhere(r <= 0.0)[0][0])
                raise InvertedElementError(e, "deformed radius reached r <= 0")
            gdiag = np.ones_like(x)
            gdiag[..., 1] = r * r
        jac = np.linalg.det(phi) * np.sqrt(np.prod(gdiag, axis=-1))
        if np.any(jac <= 0.0):
            e = int(np.argwhere(jac <= 0.0)[0][0])
            raise InvertedElementError(e, "non-positive volume ratio")
        C = np.einsum("eqIa,eqa,eqJa->eqIJ", phi, gdiag, phi)
        return Kinematics(
            phi=phi, x=x, gdiag=gdiag, C=C,
            Cinv=np.linalg.inv(C), detC=jac * jac,
            i1=np.einsum("eqII->eq", C), i4=C[..., 0, 0], i6=C[..., 1, 1])

    # ---------------- stresses ----------------

    def pk2_state_a(self, kin: Kinematics, p_e, q_e, beta) -> np.ndarray:
        p = np.asarray(p_e)[:, None]
        q = np.asarray(q_e)[:, None]
        w1, w4, h4, h6 = energy_derivatives(
            kin.i1, kin.i4, kin.i6, beta, q, True, self.params)
        P = -p[..., None, None] * kin.Cinv
        idx = np.arange(3)
        P[..., idx, idx] += 2.0 * w1[..., None]
        P[..., 0, 0] += 2.0 * w4 + beta * self.params.t0 / kin.i4
        P[..., 1, 1] += -q * h6
        return P

    def pk2_state_c(self, kin: Kinematics, p_e, beta,
                    tensions_qp: np.ndarray | None) -> np.ndarray:
        p = np.asarray(p_e)[:, None]
        w1, w4, _, _ = energy_derivatives(
            kin.i1, kin.i4, kin.i6, beta, 0.0, False, self.params)
        P = -p[..., None, None] * kin.Cinv
        idx = np.arange(3)
        P[..., idx, idx] += 2.0 * w1[..., None]
        tf = tcf = 0.0
        if tensions_qp is not None:
            tf, tcf = tensions_qp[..., 0], tensions_qp[..., 1]
        P[..., 0, 0] += 2.0 * w4 + (beta * self.params.t0 + tf) / kin.i4
        P[..., 1, 1] += tcf / kin.i6
        return P

    def tensions_qp(self, kin: Kinematics, q_e) -> np.ndarray:
        """Frozen pseudo-active tensions per quadrature point, shape (E,Q,2)."""
        from .materials import constraint_h4, constraint_h6
        q = np.asarray(q_e)[:, None]
        tf = -q * constraint_h4(kin.i4, self.params.a_over_d) * kin.i4
        tcf = -q * constraint_h6(kin.i6) * kin.i6
        return np.stack([tf, tcf], axis=-1)

    # ---------------- residual rows ----------------

    def nodal_rows(self, kin: Kinematics, P: np.ndarray) -> np.ndarray:
        """Internal-force rows, full (N,3) layout before reduction."""
        N = np.einsum("eqIJ,eqJa->eqIa", P, kin.phi)
        elem = np.einsum("eq,eqIa,eqnI->ena", self.wdet, N, self.grad)
        if self.mesh.chart.kind is ChartKind.CYLINDRICAL:
            r = kin.x[..., 0]
            # Gamma-corrections of the covariant test-function gradient
            t2 = np.zeros_like(kin.x)
            t2[..., 0] = -r * np.einsum("eqI,eqI->eq", N[..., 1], kin.phi[..., 1])
            t2[..., 1] = (np.einsum("eqI,eqI->eq", N[..., 0], kin.phi[..., 1])
                          + np.einsum("eqI,eqI->eq", N[..., 1], kin.phi[..., 0])) / r
            elem -= np.einsum("eq,qn,eqa->ena", self.wdet, self.psi, t2)
        rows = np.zeros((self.mesh.n_nodes, 3))
        np.add.at(rows, self.conn, elem)
        return rows

    def volume_rows(self, kin: Kinematics) -> np.ndarray:
        """Incompressibility rows (det C - 1), element-volume normalized."""
        return np.einsum("eq,eq->e", self.wdet, kin.detC - 1.0) / self.volumes

    def constraint_rows(self, kin: Kinematics) -> np.ndarray:
        """Coupling-constraint rows, element-volume normalized."""
        from .materials import constraint_h
        h = constraint_h(kin.i4, kin.i6, self.params.a_over_d)
        return np.einsum("eq,eq->e", self.wdet, h) / self.volumes

    # ---------------- boundary loads ----------------

    def load_rows(self, coords: np.ndarray, loads) -> np.ndarray:
        """External-force rows for surface loads, full (N,3) layout."""
        rows = np.zeros((self.mesh.n_nodes, 3))
        for load in loads or []:
            fs = self.mesh.face_sets[load.face_set]
            quads = fs.quads[:, _QUAD_TO_BILINEAR]             # (F,4) bilinear order
            psi, dpsi = face_shape_tables(GAUSS4_POINTS)       # (Q,4), (Q,4,2)
            if load.kind == "follower_pressure":
                pts = coords[quads]                            # deformed geometry
            else:
                pts = self.mesh.nodes[quads]
            theta = np.einsum("qn,fnA->fqA", psi, pts)
            dtheta = np.einsum("qnj,fnA->fqAj", dpsi, pts)     # (F,Q,3,2)
            basis = self.mesh.chart.basis_cartesian(theta)     # (F,Q,3,3)
            tang = np.einsum("fqxA,fqAj->fqxj", basis, dtheta)
            area = np.cross(tang[..., 0], tang[..., 1])        # outward, (F,Q,3)
            if load.kind == "follower_pressure":
                degenerate = np.linalg.norm(area, axis=-1) < 1e-14
                if np.any(degenerate):
                    raise DomainError(
                        f"degenerate face geometry in set {load.face_set!r}")
                force = -float(load.magnitude) * area          # per unit eta-area
                ginv = np.linalg.inv(basis)
                s_contra = np.einsum("fqax,fqx->fqa", ginv, force)
            else:
                s_ref = np.asarray(load.magnitude, float).reshape(3)
                s_contra = np.linalg.norm(area, axis=-1)[..., None] * s_ref
            contrib = np.einsum("q,qn,fqa->fna", GAUSS4_WEIGHTS, psi, s_contra)
            np.add.at(rows, quads, contrib)
        return rows

    # ---------------- assembled residuals ----------------

    def split_state_a(self, x, dofmap: DofMap, coupling: bool):
        nf, ne = dofmap.n_free, self.n_elements
        p = x[nf:nf + ne]
        q = x[nf + ne:nf + 2 * ne] if coupling else np.zeros(ne)
        return dofmap.expand(x[:nf]), p, q

    def residual_state_a(self, x, dofmap: DofMap, beta, coupling=True):
        coords, p, q = self.split_state_a(x, dofmap, coupling)
        kin = self.kinematics(coords)
        P = self.pk2_state_a(kin, p, q, beta)
        parts = [dofmap.reduce_rows(self.nodal_rows(kin, P)),
                 self.volume_rows(kin)]
        if coupling:
            parts.append(self.constraint_rows(kin))
        return np.concatenate(parts)

    def residual_state_c(self, x, dofmap: DofMap, beta, tensions_qp=None,
                         loads=None):
        nf = dofmap.n_free
        coords = dofmap.expand(x[:nf])
        p = x[nf:nf + self.n_elements]
        kin = self.kinematics(coords)
        P = self.pk2_state_c(kin, p, beta, tensions_qp)
        rows = self.nodal_rows(kin, P)
        if loads:
            rows -= self.load_rows(coords, loads)
        return np.concatenate([dofmap.reduce_rows(rows), self.volume_rows(kin)])


def assemble_residual(mesh: Mesh, coords, p, params: MaterialParams, beta,
                      state_a: bool, q=None, tensions_qp=None, loads=None,
                      dirichlet=None, ties=None, coupling=True):
    """One-shot residual assembly (functional front end to Assembler).

    coords are deformed nodal world coordinates (N,3); p and q are element
    multiplier arrays. Returns the reduced residual vector; see the module
    docstring for the ordering.
    """
    asm = Assembler(mesh, params)
    dofmap = DofMap(mesh, dirichlet or {}, ties or [])
    if state_a:
        x = [dofmap.extract(np.asarray(coords, float)), np.asarray(p, float)]
        if coupling:
            x.append(np.zeros(mesh.n_elements) if q is None else np.asarray(q, float))
        return asm.residual_state_a(np.concatenate(x), dofmap, beta, coupling)
    x = np.concatenate([dofmap.extract(np.asarray(coords, float)),
                        np.asarray(p, float)])
    return asm.residual_state_c(x, dofmap, beta, tensions_qp, loads)
