"""Two-step solution pipeline: free contraction, then the loaded state.

Step one solves the free-contraction state at a given activation, with the
coupling-constraint rows active and no surface loads; the converged coupling
multipliers freeze into per-quadrature-point pseudo-active tensions. Step
two re-solves under loads or prescribed stretches, carrying those tensions
as follower stresses. Each nonlinear solve warm starts from the nearest
available solution and falls back to adaptive parameter bisection, since
the strongly activated states are far outside the Newton basin of the
reference configuration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import Assembler, BoundaryLoad
from .dofs import DofMap, DofState, free_contraction_bcs
from .errors import SolveError
from .mesh import Mesh
from .materials import MaterialParams
from .solver import SolveReport, SolverConfig, solve_nonlinear


@dataclass(frozen=True)
class StateCTarget:
    """Boundary conditions and loads defining a loaded-state solve."""

    dirichlet: dict
    ties: tuple | list = ()
    loads: tuple | list = ()


@dataclass
class ScheduleStep:
    """One point of a continuation schedule."""

    s: float
    beta: float
    target: StateCTarget | None = None   # None: free contraction only


@dataclass
class SweepResult:
    steps: list = field(default_factory=list)
    failed_at: float | None = None

    @property
    def ok(self) -> bool:
        return self.failed_at is None


def _adaptive_homotopy(solve_at, x0, t0, t1, config, max_depth=7):
    """March a solution from t0 to t1, bisecting the interval on failure."""
    report = solve_at(t1, x0)
    if report.converged:
        return report
    if max_depth <= 0:
        return report
    tm = 0.5 * (t0 + t1)
    mid = _adaptive_homotopy(solve_at, x0, t0, tm, config, max_depth - 1)
    if not mid.converged:
        return mid
    return _adaptive_homotopy(solve_at, mid.x, tm, t1, config, max_depth - 1)


def _element_mean(asm: Assembler, field_qp: np.ndarray) -> np.ndarray:
    return np.einsum("eq,eq...->e...", asm.wdet, field_qp) / \
        asm.volumes.reshape((-1,) + (1,) * (field_qp.ndim - 2))


def observables_from(asm: Assembler, mesh: Mesh, coords, p, q=None) -> dict:
    """Volume-averaged stretch/stress observables plus geometry readouts."""
    kin = asm.kinematics(coords)
    w = asm.wdet / asm.wdet.sum()
    lam_f = float(np.sum(w * np.sqrt(kin.i4)))
    lam_cf = float(np.sum(w * np.sqrt(kin.i6)))
    lam_cfp = float(np.sum(w * np.sqrt(kin.C[..., 2, 2])))
    obs = {
        "lambda_f": lam_f,
        "lambda_cf": lam_cf,
        "lambda_cfp": lam_cfp,
        "volume_ratio": float(np.sum(asm.wdet * np.sqrt(kin.detC))
                              / asm.wdet.sum()),
        "p_mean": float(np.mean(p)),
    }
    if q is not None:
        obs["q_mean"] = float(np.mean(q))
    if mesh.frame == "cylinder":
        obs["r_int"] = float(np.mean(coords[mesh.face_nodes("inner"), 0]))
        obs["r_ext"] = float(np.mean(coords[mesh.face_nodes("outer"), 0]))
        top = float(np.mean(coords[mesh.face_nodes("top"), 2]))
        bottom = float(np.mean(coords[mesh.face_nodes("bottom"), 2]))
        obs["height"] = top - bottom
        ref_h = float(np.max(mesh.nodes[:, 2]) - np.min(mesh.nodes[:, 2]))
        obs["lambda_z"] = (top - bottom) / ref_h
    return obs


def _cauchy_observables(asm: Assembler, kin, P) -> dict:
    """Mean physical Cauchy components on the deformed fiber frame."""
    L = np.linalg.cholesky(kin.C)
    sigma = np.einsum("eqxI,eqIJ,eqJy->eqxy", np.swapaxes(L, -1, -2), P, L)
    w = asm.wdet / asm.wdet.sum()
    return {
        "sigma_ff": float(np.sum(w * sigma[..., 0, 0])),
        "sigma_cf": float(np.sum(w * sigma[..., 1, 1])),
        "sigma_cfp": float(np.sum(w * sigma[..., 2, 2])),
    }


def solve_state_a(mesh: Mesh, params: MaterialParams, beta: float,
                  config: SolverConfig, coupling: bool = True,
                  dirichlet=None, ties=None, warm: np.ndarray | None = None,
                  warm_beta: float = 0.0) -> SolveReport:
    """Solve the free-contraction state at activation beta.

    The system unknowns are the free nodal coordinates plus the element
    multipliers p (and q when the coupling is enabled). Without a warm
    start the activation ramps from zero over the configured number of
    continuation steps.
    """
    asm = Assembler(mesh, params)
    if dirichlet is None and ties is None:
        dirichlet, ties = free_contraction_bcs(mesh)
    dofmap = DofMap(mesh, dirichlet or {}, list(ties or []))
    ne = mesh.n_elements

    def x_identity():
        parts = [dofmap.extract(mesh.nodes), np.zeros(ne)]
        if coupling:
            parts.append(np.zeros(ne))
        return np.concatenate(parts)

    def solve_at(beta_k, x_start):
        fn = lambda x: asm.residual_state_a(x, dofmap, beta_k, coupling)  # noqa: E731
        return solve_nonlinear(fn, x_start, config)

    if warm is not None:
        report = _adaptive_homotopy(
            lambda t, x: solve_at(warm_beta + t * (beta - warm_beta), x),
            warm, 0.0, 1.0, config)
    else:
        betas = np.linspace(0.0, beta, config.continuation_steps + 1)
        x = x_identity()
        report = solve_at(0.0, x)
        for b0, b1 in zip(betas[:-1], betas[1:]):
            report = _adaptive_homotopy(
                lambda t, xs, b0=b0, b1=b1: solve_at(b0 + t * (b1 - b0), xs),
                report.x, 0.0, 1.0, config)
            if not report.converged:
                break

    coords, p, q = asm.split_state_a(report.x, dofmap, coupling)
    report.dofs = DofState(coords, p.copy(), q.copy() if coupling else None)
    if report.converged:
        kin = asm.kinematics(coords)
        report.tensions_qp = asm.tensions_qp(kin, q)
        report.tensions = _element_mean(asm, report.tensions_qp)
        report.observables = observables_from(asm, mesh, coords, p, q)
        P = asm.pk2_state_a(kin, p, q, beta)
        report.observables.update(_cauchy_observables(asm, kin, P))
    return report


def solve_state_c(mesh: Mesh, params: MaterialParams, beta: float,
                  tensions_qp: np.ndarray | None, config: SolverConfig,
                  target: StateCTarget, start: DofState | None = None,
                  start_loads=None) -> SolveReport:
    """Solve the loaded state, ramping pins and loads from a start solution.

    start provides warm coordinates and pressures (typically the state-A
    solution or the previous sweep step); pinned coordinates interpolate
    from their start values to the target values while load magnitudes ramp
    from start_loads (default zero) to the target loads.
    """
    asm = Assembler(mesh, params)
    dofmap = DofMap(mesh, dict(target.dirichlet), list(target.ties))
    ne = mesh.n_elements
    if start is None:
        start = DofState(mesh.nodes.copy(), np.zeros(ne))
    start_vals = {dof: start.coords[dof] for dof in target.dirichlet}
    target_vals = dict(target.dirichlet)
    base_mags = {}
    if start_loads:
        for load in start_loads:
            base_mags[(load.face_set, load.kind)] = np.asarray(load.magnitude, float)

    def configure(t):
        dirichlet_t = {dof: (1.0 - t) * start_vals[dof] + t * target_vals[dof]
                       for dof in target_vals}
        loads_t = []
        for load in target.loads:
            m0 = base_mags.get((load.face_set, load.kind), 0.0)
            mag = (1.0 - t) * m0 + t * np.asarray(load.magnitude, float)
            loads_t.append(BoundaryLoad(load.face_set, load.kind, mag))
        return DofMap(mesh, dirichlet_t, list(target.ties)), loads_t

    def solve_at(t, x_start):
        dofmap_t, loads_t = configure(t)
        fn = lambda x: asm.residual_state_c(  # noqa: E731
            x, dofmap_t, beta, tensions_qp, loads_t)
        return solve_nonlinear(fn, x_start, config)

    dofmap0, _ = configure(0.0)
    x0 = np.concatenate([dofmap0.extract(start.coords), start.p])
    report = _adaptive_homotopy(solve_at, x0, 0.0, 1.0, config)

    dofmap1, _ = configure(1.0)
    coords = dofmap1.expand(report.x[:dofmap1.n_free])
    p = report.x[dofmap1.n_free:]
    report.dofs = DofState(coords, p.copy())
    report.tensions_qp = tensions_qp
    if tensions_qp is not None:
        report.tensions = _element_mean(asm, tensions_qp)
    if report.converged:
        kin = asm.kinematics(coords)
        report.observables = observables_from(asm, mesh, coords, p)
        P = asm.pk2_state_c(kin, p, beta, tensions_qp)
        report.observables.update(_cauchy_observables(asm, kin, P))
    return report


def two_step(mesh: Mesh, params: MaterialParams, beta: float,
             config: SolverConfig, target: StateCTarget,
             coupling: bool = True, warm_a: SolveReport | None = None,
             warm_c: SolveReport | None = None, warm_beta: float = 0.0,
             start_loads=None):
    """Run the free-contraction and loaded solves at one activation level."""
    report_a = solve_state_a(
        mesh, params, beta, config, coupling,
        warm=None if warm_a is None else warm_a.x, warm_beta=warm_beta)
    if not report_a.converged:
        raise SolveError(f"free-contraction solve failed at beta={beta:g}: "
                         f"|r|={report_a.residual_norm:.3e}")
    tensions = report_a.tensions_qp if coupling else None
    start = warm_c.dofs if warm_c is not None else report_a.dofs
    report_c = solve_state_c(mesh, params, beta, tensions, config, target,
                             start=start, start_loads=start_loads)
    return report_a, report_c


def continuation_sweep(mesh: Mesh, params: MaterialParams,
                       schedule: list[ScheduleStep], config: SolverConfig,
                       coupling: bool = True) -> SweepResult:
    """Run the two-step pipeline over an ordered schedule with warm starts.

    The first failing step aborts the sweep; prior results are retained in
    the returned SweepResult together with the failing s value.
    """
    result = SweepResult()
    prev_a = prev_c = None
    prev_beta = 0.0
    prev_loads = None
    for step in schedule:
        try:
            report_a = solve_state_a(
                mesh, params, step.beta, config, coupling,
                warm=None if prev_a is None else prev_a.x,
                warm_beta=prev_beta)
            if not report_a.converged:
                raise SolveError(
                    f"state A diverged (|r|={report_a.residual_norm:.3e})")
            report_c = None
            if step.target is not None:
                tensions = report_a.tensions_qp if coupling else None
                start = prev_c.dofs if prev_c is not None else report_a.dofs
                report_c = solve_state_c(
                    mesh, params, step.beta, tensions, config, step.target,
                    start=start, start_loads=prev_loads)
                if not report_c.converged:
                    raise SolveError(
                        f"state C diverged (|r|={report_c.residual_norm:.3e})")
        except Exception as err:  # keep partial results, report the s value
            result.failed_at = step.s
            result.steps.append({"s": step.s, "beta": step.beta,
                                 "error": str(err)})
            return result
        result.steps.append({"s": step.s, "beta": step.beta,
                             "state_a": report_a, "state_c": report_c})
        prev_a, prev_c = report_a, report_c
        prev_beta = step.beta
        prev_loads = step.target.loads if step.target is not None else None
    return result
