"""Nonlinear solution of the assembled square systems.

Two backends solve the same root-finding problem:

  powell_hybrid      MINPACK's hybrd (dogleg trust region, forward-difference
                     Jacobian) through scipy.optimize.root. This is the
                     classic Powell method; a short plain-Newton polish runs
                     afterwards when the returned iterate sits slightly above
                     the requested infinity-norm tolerance, since hybrd stops
                     on step size rather than residual size.
  newton_line_search Damped Newton with a forward-difference Jacobian and
                     backtracking on the residual infinity norm.

Convergence always means ||r||_inf <= tolerance. A residual that is already
converged at the initial iterate returns it untouched, which keeps beta = 0
solves exactly at the reference configuration.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .dofs import DofState
from .errors import ActiveFiberError, NonFiniteResidualError


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-11          # infinity norm of the scaled residual
    max_iterations: int = 80
    fd_step: float = float(np.sqrt(np.finfo(float).eps))
    continuation_steps: int = 20
    backend: str = "powell_hybrid"    # or "newton_line_search"

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1 or self.continuation_steps < 1:
            raise ValueError("iteration and continuation counts must be >= 1")
        if self.backend not in ("powell_hybrid", "newton_line_search"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class SolveReport:
    """Outcome of one nonlinear solve or one two-step pipeline stage."""

    converged: bool
    iterations: int
    residual_norm: float
    x: np.ndarray | None = None
    dofs: DofState | None = None
    tensions: np.ndarray | None = None      # (E, 2) element means
    tensions_qp: np.ndarray | None = None   # (E, Q, 2) frozen per point
    observables: dict = field(default_factory=dict)
    message: str = ""


def _checked(fn):
    def wrapped(x):
        r = np.asarray(fn(x), float)
        if not np.all(np.isfinite(r)):
            raise NonFiniteResidualError(np.flatnonzero(~np.isfinite(r)))
        return r
    return wrapped


def fd_jacobian(fn, x, r0, step):
    """Forward-difference Jacobian with per-column step h_j = step*max(1,|x_j|)."""
    n = x.size
    J = np.empty((r0.size, n))
    for j in range(n):
        h = step * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        J[:, j] = (fn(xp) - r0) / h
    return J


def _newton(fn, x, r, config: SolverConfig, max_iter):
    """Backtracking Newton iterations; returns (x, r, iterations, ok)."""
    norm = np.linalg.norm(r, np.inf)
    for it in range(max_iter):
        if norm <= config.tolerance:
            return x, r, it, True
        J = fd_jacobian(fn, x, r, config.fd_step)
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return x, r, it, False
        scale = 1.0
        for _ in range(10):
            try:
                r_new = fn(x + scale * dx)
            except ActiveFiberError:
                scale *= 0.5
                continue
            if np.linalg.norm(r_new, np.inf) < norm or scale < 1e-3:
                break
            scale *= 0.5
        else:
            return x, r, it + 1, False
        x = x + scale * dx
        r = r_new
        norm = np.linalg.norm(r, np.inf)
    return x, r, max_iter, norm <= config.tolerance


def solve_nonlinear(residual_fn, x0, config: SolverConfig) -> SolveReport:
    """Find a root of a square nonlinear system.

    Returns a SolveReport whose x field holds the best iterate; converged
    is True only if the residual infinity norm meets the tolerance. NaN or
    inf residual entries abort immediately naming the offending rows.
    """
    fn = _checked(residual_fn)
    x0 = np.asarray(x0, float)
    try:
        r0 = fn(x0)
    except NonFiniteResidualError as err:
        return SolveReport(False, 0, np.inf, x=x0.copy(),
                           message=f"initial residual not finite: {err}")
    if r0.size != x0.size:
        raise ValueError(f"system is not square: {x0.size} unknowns, "
                         f"{r0.size} residual rows")
    norm0 = float(np.linalg.norm(r0, np.inf))
    if norm0 <= config.tolerance:
        return SolveReport(True, 0, norm0, x=x0.copy())

    x, r, iters = x0, r0, 0
    try:
        if config.backend == "powell_hybrid":
            sol = optimize.root(
                fn, x0, method="hybr",
                options={"xtol": 1e-13, "eps": config.fd_step,
                         "maxfev": config.max_iterations * (x0.size + 2)})
            x, iters = sol.x, int(sol.nfev)
            r = fn(x)
            if np.linalg.norm(r, np.inf) > config.tolerance:
                x, r, extra, _ = _newton(fn, x, r, config, 12)
                iters += extra
        else:
            x, r, iters, _ = _newton(fn, x0, r0, config, config.max_iterations)
    except NonFiniteResidualError as err:
        return SolveReport(False, iters, norm0, x=x0.copy(),
                           message=str(err))
    except ActiveFiberError as err:
        return SolveReport(False, iters, norm0, x=x0.copy(),
                           message=f"residual evaluation failed: {err}")

    norm = float(np.linalg.norm(r, np.inf))
    if norm >= norm0 and norm > config.tolerance:
        # never accept an iterate worse than the warm start
        x, norm = x0.copy(), norm0
    return SolveReport(norm <= config.tolerance, iters, norm, x=np.asarray(x))
