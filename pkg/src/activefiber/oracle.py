"""Semi-analytic reference solutions used to verify the FE solver.

Slab states are homogeneous diagonal deformations, so equilibrium reduces to
scalar root finding in one stretch: free faces carry zero Cauchy stress, the
volume is preserved exactly and, with the coupling active, the solution sits
on the constraint manifold. Loaded states first solve the free-contraction
problem at the same activation to inherit the frozen tensions, mirroring the
two-step pipeline in miniature.

The cylinder reduction covers the *unconstrained* tube: an incompressible
axisymmetric inflation-extension map

    r(R)^2 = r_int^2 + (R^2 - R_int^2) / lam_z,   z = lam_z Z,  phi = Phi

with two scalar unknowns (r_int, lam_z) fixed by radial equilibrium across
the wall and zero net axial force (open tube). Enforcing the coupling
constraint pointwise would over-determine this kinematics, so the
constrained cylinder is verified by element-mean constraint residuals and
self-convergence instead of an oracle.

All scalar root finding uses bracketed Brent iterations; wall integrals use
composite Gauss-Legendre panels whose count is an explicit parameter so
quadrature convergence is testable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ActiveFiberError, DomainError
from .materials import (MaterialParams, constraint_h4, constraint_h6,
                        energy_derivatives)

_BRENT_OPTS = dict(xtol=1e-15, rtol=8.9e-16, maxiter=200)


@dataclass(frozen=True)
class HomogeneousSolution:
    """Homogeneous slab equilibrium: stretches, multipliers, Cauchy stresses."""

    lam: np.ndarray          # (3,) fiber, strut, transverse stretches
    p: float
    q: float
    sigma: np.ndarray        # (3,) physical Cauchy diagonal (kPa)
    t_fiber: float
    t_cross: float
    beta: float
    coupling: bool

    @property
    def i4(self) -> float:
        return float(self.lam[0] ** 2)

    @property
    def i6(self) -> float:
        return float(self.lam[1] ** 2)

    def node_field(self, reference_nodes: np.ndarray) -> np.ndarray:
        """Deformed nodal coordinates of the homogeneous map."""
        return reference_nodes * self.lam[None, :]


@dataclass(frozen=True)
class CylinderGeometry:
    r_int: float
    r_ext: float
    length: float

    def __post_init__(self):
        if not 0 < self.r_int < self.r_ext or self.length <= 0:
            raise DomainError("invalid cylinder geometry")


@dataclass(frozen=True)
class CylinderSolution:
    """Axisymmetric tube equilibrium with radial stress profiles."""

    geom: CylinderGeometry
    pressure: float
    beta: float
    r_int: float
    lam_z: float
    R: np.ndarray            # report grid (reference radii)
    r: np.ndarray            # deformed radii on the grid
    sigma_rr: np.ndarray
    sigma_tt: np.ndarray
    sigma_zz: np.ndarray
    p: np.ndarray            # pressure multiplier profile

    @property
    def r_ext(self) -> float:
        return float(np.sqrt(self.r_int ** 2
                             + (self.geom.r_ext ** 2 - self.geom.r_int ** 2) / self.lam_z))

    @property
    def height(self) -> float:
        return self.lam_z * self.geom.length

    def radius_at(self, R) -> np.ndarray:
        return np.sqrt(self.r_int ** 2
                       + (np.asarray(R, float) ** 2 - self.geom.r_int ** 2) / self.lam_z)

    def node_field(self, reference_nodes: np.ndarray) -> np.ndarray:
        out = np.asarray(reference_nodes, float).copy()
        out[:, 0] = self.radius_at(reference_nodes[:, 0])
        out[:, 2] = self.lam_z * reference_nodes[:, 2]
        return out


# ---------------------------------------------------------------------------
# homogeneous slab states
# ---------------------------------------------------------------------------

def _wstar(i1, i4, beta, params):
    w1, w4, _, _ = energy_derivatives(i1, i4, 1.0, beta, 0.0, False, params)
    return w1, w4


def _manifold_cross_stretch(lam_f, params):
    """Strut-direction stretch on the h = 0 manifold at fiber stretch lam_f."""
    lam2 = 1.0 + (np.pi - 2.0) * (1.0 - lam_f ** -0.5) * params.a_over_d
    if np.any(np.asarray(lam2) <= 0.0):
        raise DomainError("constraint manifold left the admissible range")
    return lam2


def _bracketed_root(fun, lo, hi, grow=1.6, tries=40):
    """Brent root with an expanding bracket; raises if no sign change found."""
    flo, fhi = fun(lo), fun(hi)
    for _ in range(tries):
        if np.sign(flo) != np.sign(fhi):
            return brentq(fun, lo, hi, **_BRENT_OPTS)
        lo = max(lo / grow, 1e-3)
        hi = hi * grow
        flo, fhi = fun(lo), fun(hi)
    raise ActiveFiberError(
        f"root bracketing failed on [{lo:.3g}, {hi:.3g}] "
        f"(f(lo)={flo:.3g}, f(hi)={fhi:.3g})")


def slab_free_contraction(beta, params: MaterialParams,
                          coupling: bool = True) -> HomogeneousSolution:
    """Free-contraction equilibrium of the homogeneous slab."""
    if beta == 0.0:
        return HomogeneousSolution(np.ones(3), 0.0, 0.0, np.zeros(3),
                                   0.0, 0.0, 0.0, coupling)

    def build(lam_f):
        i4 = lam_f * lam_f
        if coupling:
            lam2 = _manifold_cross_stretch(lam_f, params)
        else:
            lam2 = lam_f ** -0.5
        i6 = lam2 * lam2
        lam3 = 1.0 / (lam_f * lam2)
        i1 = i4 + i6 + lam3 * lam3
        w1, w4 = _wstar(i1, i4, beta, params)
        p = 2.0 * w1 * lam3 * lam3                       # sigma_33 = 0
        if coupling:
            # sigma_22 = 0 fixes q through the strut-direction reaction
            q = (p - 2.0 * i6 * w1) * 2.0 / np.sqrt(i6)
        else:
            q = 0.0
        tf = -q * constraint_h4(i4, params.a_over_d) * i4
        tcf = -q * constraint_h6(i6) * i6
        s11 = -p + 2.0 * i4 * (w1 + w4) + beta * params.t0 + tf
        s22 = -p + 2.0 * i6 * w1 + tcf
        return lam2, lam3, p, q, tf, tcf, s11, s22

    lam_f = _bracketed_root(lambda lf: build(lf)[6], 0.35, 1.0000001)
    lam2, lam3, p, q, tf, tcf, s11, s22 = build(lam_f)
    return HomogeneousSolution(
        np.array([lam_f, lam2, lam3]), p, q,
        np.array([s11, s22, 0.0]), tf, tcf, beta, coupling)


def _tensions_for_state_c(beta, params, coupling):
    if coupling and beta > 0.0:
        st = slab_free_contraction(beta, params, True)
        return st.t_fiber, st.t_cross
    return 0.0, 0.0


def slab_equibiaxial(lam, beta, params: MaterialParams,
                     coupling: bool = True) -> HomogeneousSolution:
    """Loaded state with prescribed in-plane stretches lam_f = lam_cf = lam."""
    if lam <= 0:
        raise DomainError("stretch must be positive")
    tf, tcf = _tensions_for_state_c(beta, params, coupling)
    i4 = i6 = lam * lam
    lam3 = lam ** -2.0
    i1 = 2.0 * i4 + lam3 * lam3
    w1, w4 = _wstar(i1, i4, beta, params)
    p = 2.0 * w1 * lam3 * lam3
    s11 = -p + 2.0 * i4 * (w1 + w4) + beta * params.t0 + tf
    s22 = -p + 2.0 * i6 * w1 + tcf
    return HomogeneousSolution(np.array([lam, lam, lam3]), p, 0.0,
                               np.array([s11, s22, 0.0]), tf, tcf,
                               beta, coupling)


def slab_uniaxial(lam, beta, params: MaterialParams, coupling: bool = True,
                  direction: str = "fiber") -> HomogeneousSolution:
    """Loaded state with one prescribed stretch, other faces traction free."""
    if lam <= 0:
        raise DomainError("stretch must be positive")
    if direction not in ("fiber", "cross"):
        raise DomainError("direction must be 'fiber' or 'cross'")
    tf, tcf = _tensions_for_state_c(beta, params, coupling)

    def build(lam_free):
        if direction == "fiber":
            lam1, lam2 = lam, lam_free
        else:
            lam1, lam2 = lam_free, lam
        lam3 = 1.0 / (lam1 * lam2)
        i4, i6 = lam1 * lam1, lam2 * lam2
        i1 = i4 + i6 + lam3 * lam3
        w1, w4 = _wstar(i1, i4, beta, params)
        p = 2.0 * w1 * lam3 * lam3                       # sigma_33 = 0
        s11 = -p + 2.0 * i4 * (w1 + w4) + beta * params.t0 + tf
        s22 = -p + 2.0 * i6 * w1 + tcf
        return lam1, lam2, lam3, p, s11, s22

    free_res = (lambda lf: build(lf)[5]) if direction == "fiber" \
        else (lambda lf: build(lf)[4])
    guess = lam ** -0.5
    lam_free = _bracketed_root(free_res, 0.8 * guess, 1.25 * guess)
    lam1, lam2, lam3, p, s11, s22 = build(lam_free)
    return HomogeneousSolution(np.array([lam1, lam2, lam3]), p, 0.0,
                               np.array([s11, s22, 0.0]), tf, tcf,
                               beta, coupling)


def slab_solve(scenario: str, beta, params: MaterialParams, coupling=True,
               lam=None, direction="fiber") -> HomogeneousSolution:
    """Dispatch front end: 'free_contraction', 'uniaxial' or 'equibiaxial'."""
    if scenario == "free_contraction":
        return slab_free_contraction(beta, params, coupling)
    if scenario == "uniaxial":
        return slab_uniaxial(lam, beta, params, coupling, direction)
    if scenario == "equibiaxial":
        return slab_equibiaxial(lam, beta, params, coupling)
    raise DomainError(f"unknown slab scenario {scenario!r}")


# ---------------------------------------------------------------------------
# axisymmetric cylinder (unconstrained)
# ---------------------------------------------------------------------------

class _WallQuadrature:
    """Composite Gauss-Legendre panels over the reference wall thickness."""

    def __init__(self, geom: CylinderGeometry, npanels: int, order: int = 10):
        gx, gw = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(geom.r_int, geom.r_ext, npanels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        self.edges = edges
        self.R = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        self.w = (half[:, None] * gw[None, :]).ravel()
        self.gx, self.gw = gx, gw
        self.npanels, self.order = npanels, order

    def subinterval(self, a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return mid + half * self.gx, half * self.gw


class CylinderOracle:
    """Two-unknown reduction of the unconstrained tube, reusable across loads."""

    def __init__(self, geom: CylinderGeometry, params: MaterialParams,
                 tensions=None, npanels: int = 64):
        self.geom = geom
        self.params = params
        self.tensions = tensions        # callable R -> (tf, tcf) or None
        self.quad = _WallQuadrature(geom, npanels)

    # -- pointwise stress differences (independent of the multiplier p) --

    def _diffs(self, R, r_int, lam_z, beta):
        R = np.asarray(R, float)
        r2 = r_int ** 2 + (R ** 2 - self.geom.r_int ** 2) / lam_z
        if np.any(r2 <= 0.0):
            raise DomainError("tube kinematics reached r <= 0")
        r = np.sqrt(r2)
        lam_t = r / R
        lam_r = R / (r * lam_z)
        i4 = lam_t * lam_t
        i6 = np.full_like(i4, lam_z * lam_z)
        i1 = i4 + i6 + lam_r * lam_r
        w1, w4 = _wstar(i1, i4, beta, self.params)
        tf, tcf = (self.tensions(R) if self.tensions is not None else (0.0, 0.0))
        d_tr = 2.0 * w1 * (i4 - lam_r ** 2) + 2.0 * i4 * w4 \
            + beta * self.params.t0 + tf
        d_zr = 2.0 * w1 * (i6 - lam_r ** 2) + tcf
        drdR = R / (r * lam_z)
        return r, lam_r, w1, d_tr, d_zr, drdR

    def _radial_integrand(self, R, r_int, lam_z, beta):
        r, _, _, d_tr, _, drdR = self._diffs(R, r_int, lam_z, beta)
        return d_tr / r * drdR

    def lame_residual(self, r_int, lam_z, beta, pressure):
        """Radial equilibrium integrated across the wall, minus the load."""
        f = self._radial_integrand(self.quad.R, r_int, lam_z, beta)
        return float(np.sum(self.quad.w * f)) - pressure

    def sigma_rr_at(self, R, r_int, lam_z, beta):
        """Radial stress at reference radii R; zero at the outer surface."""
        R = np.atleast_1d(np.asarray(R, float))
        edges = self.quad.edges
        panel_int = np.empty(self.quad.npanels)
        f_all = self._radial_integrand(self.quad.R, r_int, lam_z, beta)
        w = self.quad.w.reshape(self.quad.npanels, -1)
        panel_int = (w * f_all.reshape(self.quad.npanels, -1)).sum(axis=1)
        tails = np.concatenate([np.cumsum(panel_int[::-1])[::-1], [0.0]])
        out = np.empty_like(R)
        for k, Rk in enumerate(R):
            p = min(np.searchsorted(edges, Rk, side="right") - 1,
                    self.quad.npanels - 1)
            xs, ws = self.quad.subinterval(Rk, edges[p + 1])
            local = float(np.sum(ws * self._radial_integrand(
                xs, r_int, lam_z, beta)))
            out[k] = -(local + tails[p + 1])
        return out

    def axial_residual(self, r_int, lam_z, beta):
        """Net axial force over the wall cross-section (open tube)."""
        R = self.quad.R
        r, _, _, _, d_zr, drdR = self._diffs(R, r_int, lam_z, beta)
        s_rr = self.sigma_rr_at(R, r_int, lam_z, beta)
        s_zz = s_rr + d_zr
        return 2.0 * np.pi * float(np.sum(self.quad.w * s_zz * r * drdR))

    def solve(self, pressure, beta, r_int_guess=None,
              lam_z_guess=None) -> CylinderSolution:
        """Solve for (r_int, lam_z) with nested bracketed Brent iterations."""
        ri0 = self.geom.r_int if r_int_guess is None else r_int_guess
        lz0 = 1.0 if lam_z_guess is None else lam_z_guess

        def inner(lam_z):
            return _bracketed_root(
                lambda ri: self.lame_residual(ri, lam_z, beta, pressure),
                0.85 * ri0, 1.18 * ri0, grow=1.25)

        def outer(lam_z):
            return self.axial_residual(inner(lam_z), lam_z, beta)

        lam_z = _bracketed_root(outer, 0.92 * lz0, 1.09 * lz0, grow=1.18)
        r_int = inner(lam_z)
        return self._solution(pressure, beta, r_int, lam_z)

    def _solution(self, pressure, beta, r_int, lam_z) -> CylinderSolution:
        R = np.linspace(self.geom.r_int, self.geom.r_ext, 65)
        r, lam_r, w1, d_tr, d_zr, _ = self._diffs(R, r_int, lam_z, beta)
        s_rr = self.sigma_rr_at(R, r_int, lam_z, beta)
        p_prof = 2.0 * w1 * lam_r ** 2 - s_rr
        return CylinderSolution(
            geom=self.geom, pressure=pressure, beta=beta,
            r_int=float(r_int), lam_z=float(lam_z),
            R=R, r=r, sigma_rr=s_rr, sigma_tt=s_rr + d_tr,
            sigma_zz=s_rr + d_zr, p=p_prof)


def cylinder_solve(pressure, beta, params: MaterialParams,
                   geom: CylinderGeometry, tensions=None, npanels: int = 64,
                   axial: str = "zero_net_force", path=None) -> CylinderSolution:
    """Solve the unconstrained tube, ramping loads for robustness.

    path: optional list of (pressure, beta) waypoints to traverse with warm
    starts before the final state; defaults to a proportional ramp. The
    pressure acts on the inner surface; axial ends carry zero net force.
    """
    if axial != "zero_net_force":
        raise DomainError("only the zero_net_force axial condition is supported")
    if pressure < 0:
        raise DomainError("pressure must be non-negative")
    oracle = CylinderOracle(geom, params, tensions, npanels)
    if path is None:
        ramps = np.linspace(0.0, 1.0, 9)[1:]
        path = [(pressure * s, beta * s) for s in ramps]
    elif not path or path[-1] != (pressure, beta):
        path = list(path) + [(pressure, beta)]
    sol = None
    for P_k, beta_k in path:
        sol = oracle.solve(
            P_k, beta_k,
            r_int_guess=None if sol is None else sol.r_int,
            lam_z_guess=None if sol is None else sol.lam_z)
    if sol is None:
        sol = oracle.solve(pressure, beta)
    return sol
