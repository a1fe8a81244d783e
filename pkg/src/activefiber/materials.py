"""Constitutive law for active, incompressible, transversely isotropic tissue.

The strain energy splits into a passive exponential part, an activation-scaled
active part, and a multiplier term enforcing the collagen coupling constraint

    h(I4, I6) = 1 - sqrt(I6) + (pi - 2) (1 - I4^(-1/4)) a/D = 0,

which ties the fiber stretch (I4) to the strut-direction stretch (I6) while
the tissue is actively contracting. The free-contraction state additionally
carries a beating tension beta*T0 along the deformed fiber direction.

Second Piola-Kirchhoff components are assembled in the orthonormal fiber
frame of the reference configuration; the deformed metric in that frame is
the right Cauchy-Green tensor itself, so the incompressibility multiplier
enters through C^{-1} and the fiber/strut tension terms are normalized by
I4 and I6 respectively.

Scalar functions in this module accept and broadcast over numpy arrays, so
the element assembly can evaluate them on whole quadrature batches.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OverflowGuardError

_PI_MINUS_2 = np.pi - 2.0
_Q_GUARD = 700.0


@dataclass(frozen=True)
class MaterialParams:
    """Material constants: passive/active moduli, beating tension, geometry.

    Stress-like constants are in kPa; c2p..c4p and a_over_d dimensionless.
    a_over_d is the ratio of myocyte radius to the repeat distance D = 4a + d,
    so it must lie in (0, 0.25).
    """

    c1p: float
    c2p: float
    c3p: float
    c4p: float
    c1a: float
    c2a: float
    c3a: float
    c4a: float
    t0: float
    a_over_d: float

    def __post_init__(self):
        vals = [self.c1p, self.c2p, self.c3p, self.c4p,
                self.c1a, self.c2a, self.c3a, self.c4a,
                self.t0, self.a_over_d]
        if not all(np.isfinite(v) for v in vals):
            raise DomainError("material parameters must be finite")
        if self.c1p <= 0.0:
            raise DomainError("c1p must be positive")
        if not 0.0 < self.a_over_d < 0.25:
            raise DomainError("a_over_d must lie in (0, 0.25) since D = 4a + d")

    @classmethod
    def lin_yin(cls, t0: float = 35.0, a_over_d: float = 0.2) -> "MaterialParams":
        """The Lin-Yin myocardium constants with configurable T0 and a/D."""
        return cls(c1p=0.292, c2p=0.321, c3p=-0.260, c4p=0.201,
                   c1a=-3.870, c2a=4.830, c3a=2.512, c4a=0.951,
                   t0=t0, a_over_d=a_over_d)


@dataclass(frozen=True)
class ActivationState:
    """Activation level and which solution state is being evaluated."""

    beta: float
    state_a: bool  # True while solving the free-contraction state

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError("activation beta must lie in [0, 1]")


@dataclass(frozen=True)
class MultiplierPair:
    """Incompressibility pressure p and coupling multiplier q (kPa)."""

    p: float
    q: float = 0.0


@dataclass(frozen=True)
class PseudoActiveTensions:
    """Constraint reaction tensions along fiber and strut directions (kPa)."""

    t_fiber: float
    t_cross: float


def _check_positive(name, value):
    if np.any(np.asarray(value) <= 0.0):
        raise DomainError(f"{name} must be positive")


def constraint_h(i4, i6, a_over_d):
    """Coupling constraint value; zero when the collagen weave is taut."""
    _check_positive("I4", i4)
    _check_positive("I6", i6)
    return 1.0 - np.sqrt(i6) + _PI_MINUS_2 * (1.0 - np.asarray(i4, float) ** -0.25) * a_over_d


def constraint_h4(i4, a_over_d):
    """dh/dI4."""
    _check_positive("I4", i4)
    return _PI_MINUS_2 * a_over_d * 0.25 * np.asarray(i4, float) ** -1.25


def constraint_h6(i6):
    """dh/dI6."""
    _check_positive("I6", i6)
    return -0.5 / np.sqrt(i6)


def _q_exponent(i1, i4, params: MaterialParams):
    e1 = np.asarray(i1, float) - 3.0
    e4 = np.asarray(i4, float) - 1.0
    q = params.c2p * e1 * e1 + params.c3p * e1 * e4 + params.c4p * e4 * e4
    if np.any(q > _Q_GUARD):
        raise OverflowGuardError(
            f"passive exponent {float(np.max(q)):.1f} exceeds guard {_Q_GUARD:.0f}")
    return q


def passive_energy(i1, i4, params: MaterialParams):
    """Passive strain-energy density (kPa)."""
    return params.c1p * (np.exp(_q_exponent(i1, i4, params)) - 1.0)


def active_energy(i1, i4, params: MaterialParams):
    """Active strain-energy density (kPa), prior to scaling by beta."""
    e1 = np.asarray(i1, float) - 3.0
    e4 = np.asarray(i4, float) - 1.0
    return (params.c1a * e1 * e4 + params.c2a * e1 * e1
            + params.c3a * e4 * e4 + params.c4a * e1)


def energy_derivatives(i1, i4, i6, beta, q, state_a, params: MaterialParams):
    """Energy derivatives and constraint derivatives at a strain state.

    Returns (w1, w4, h4, h6) where w1 = dW*/dI1 and w4 = dW*/dI4 with
    W* = W_pas + beta W_act, plus the multiplier contribution -q/2 h4 folded
    into w4 while evaluating the free-contraction state. The constraint has
    no I1 dependence, so w1 never sees q.
    """
    e1 = np.asarray(i1, float) - 3.0
    e4 = np.asarray(i4, float) - 1.0
    eq = np.exp(_q_exponent(i1, i4, params))
    w1 = params.c1p * eq * (2.0 * params.c2p * e1 + params.c3p * e4) + beta * (
        params.c1a * e4 + 2.0 * params.c2a * e1 + params.c4a)
    w4 = params.c1p * eq * (params.c3p * e1 + 2.0 * params.c4p * e4) + beta * (
        params.c1a * e1 + 2.0 * params.c3a * e4)
    h4 = constraint_h4(i4, params.a_over_d)
    h6 = constraint_h6(i6)
    if state_a:
        w4 = w4 - 0.5 * np.asarray(q, float) * h4
    return w1, w4, h4, h6


def pseudo_active_tensions(q, i4, i6, a_over_d) -> PseudoActiveTensions:
    """Constraint reaction tensions from the converged free-contraction state.

    T_f = -q h4 I4 and T_cf = -q h6 I6; both vanish with q.
    """
    tf = -np.asarray(q, float) * constraint_h4(i4, a_over_d) * np.asarray(i4, float)
    tcf = -np.asarray(q, float) * constraint_h6(i6) * np.asarray(i6, float)
    if np.ndim(tf) == 0:
        return PseudoActiveTensions(float(tf), float(tcf))
    return PseudoActiveTensions(tf, tcf)


def _pk2_common(C, w1, p):
    Cinv = np.linalg.inv(C)
    return -p * Cinv + 2.0 * w1 * np.eye(3)


def pk2_state_a(state, multipliers: MultiplierPair, beta, params: MaterialParams):
    """Second Piola-Kirchhoff components for the free-contraction state.

    The multiplier q acts through the folded -q/2 h4 term in w4 along the
    fiber axis and the explicit -q h6 term along the strut axis; the beating
    tension enters normalized by I4 so its Cauchy magnitude is beta*T0.
    """
    w1, w4, h4, h6 = energy_derivatives(
        state.i1, state.i4, state.i6, beta, multipliers.q, True, params)
    P = _pk2_common(state.C, w1, multipliers.p)
    P[0, 0] += 2.0 * w4 + beta * params.t0 / state.i4
    P[1, 1] += -multipliers.q * h6
    return P


def pk2_state_c(state, p, beta, tensions: PseudoActiveTensions,
                params: MaterialParams):
    """Second Piola-Kirchhoff components for the loaded state.

    The frozen tensions act as follower tensions: dividing by the current
    I4/I6 keeps their Cauchy magnitudes at the values inherited from the
    free-contraction state.
    """
    w1, w4, _, _ = energy_derivatives(
        state.i1, state.i4, state.i6, beta, 0.0, False, params)
    P = _pk2_common(state.C, w1, p)
    P[0, 0] += 2.0 * w4 + (beta * params.t0 + tensions.t_fiber) / state.i4
    P[1, 1] += tensions.t_cross / state.i6
    return P


def cauchy_from_pk2(phi, pk2, metric_contra_deformed=None):
    """Push PK2 components forward to contravariant world Cauchy components.

    tau^{ab} = Phi_I^a P^{IJ} Phi_J^b. For Cartesian charts these are the
    physical components; in curvilinear charts they are contravariant and
    must be scaled by the covariant metric diagonal for physical values.
    The optional metric argument is accepted for symmetry with the inverse
    map but is not needed in the forward direction.
    """
    phi = np.asarray(phi, float)
    if abs(np.linalg.det(phi)) < 1e-14:
        raise DomainError("singular deformation gradient")
    return np.einsum("Ia,IJ,Jb->ab", phi, np.asarray(pk2, float), phi)


def pk2_from_cauchy(phi, tau_contra):
    """Inverse of cauchy_from_pk2."""
    phi = np.asarray(phi, float)
    phi_inv = np.linalg.inv(phi)
    # phi_inv[a, I] inverts phi[I, a]
    return np.einsum("aI,ab,bJ->IJ", phi_inv, np.asarray(tau_contra, float), phi_inv)


def cauchy_fiber_physical(C, pk2):
    """Physical Cauchy components on the deformed, orthonormalized fiber frame.

    Realizes the deformed basis through the Cholesky factor of C (ordering
    fiber, strut, transverse), so for diagonal states sigma_II = C_II P^II.
    """
    L = np.linalg.cholesky(np.asarray(C, float))
    return L.T @ np.asarray(pk2, float) @ L
