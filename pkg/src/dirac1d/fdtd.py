"""Finite-difference time-domain schemes: CNFD, SIFD1, SIFD2, LFFD.

All four use the centered difference delta_x Phi_j = (Phi_{j+1} -
Phi_{j-1})/(2h) in space.  In time:

    CNFD   Crank-Nicolson average of the full right-hand side (implicit,
           unconditionally stable, conserves mass and - for time-independent
           potentials - the discrete energy).
    SIFD1  leap-frog transport term, implicit (sigma3 + potential) average;
           the implicit part is a pointwise 2x2 solve.
    SIFD2  implicit (transport + sigma3) average, explicit potential term;
           decouples per Fourier mode where the stencil symbol is
           sin(mu_l h)/h.
    LFFD   fully explicit leap-frog.

Three-level schemes launch with the shared Taylor first step
(:func:`dirac1d.stepping.first_step`).
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import ConfigurationError, SolverError
from .grid import SpinorField
from .linalg import CyclicBlockTridiagSolver
from .model import DiracProblem
from .stepping import (
    SolverDiagnostics,
    Stepper,
    StepperState,
    first_step,
    register_scheme,
)

__all__ = [
    "CNFDStepper", "SIFD1Stepper", "SIFD2Stepper", "LFFDStepper",
    "first_step", "cnfd_step", "sifd1_step", "sifd2_step", "lffd_step",
]


def _centered_diff(v: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * h)


@register_scheme
class CNFDStepper(Stepper):
    """Crank-Nicolson finite difference method.

    Each step solves (i*I - tau/2*K) Phi^{n+1} = (i*I + tau/2*K) Phi^n with
    K = -i*sigma1*delta_x + sigma3 + eps*(V*I - A1*sigma1) at t_n + tau/2.
    The direct path factors the cyclic block-tridiagonal matrix once
    (re-factored every step for time-dependent potentials); `solver="krylov"`
    switches to matrix-free GMRES.
    """

    scheme = "cnfd"
    needs_history = False

    def __init__(self, problem: DiracProblem, tau: float,
                 state: Optional[StepperState] = None,
                 solver: str = "direct", residual_tol: float = 1e-12,
                 check_residual: bool = True):
        if solver not in ("direct", "krylov"):
            raise ConfigurationError(f"unknown CNFD solver {solver!r}")
        self._solver_kind = solver
        self.residual_tol = float(residual_tol)
        self.check_residual = check_residual
        super().__init__(problem, tau, state)

    def _prepare(self):
        self._factorized = None
        if self.problem.potentials.time_independent or self.problem.epsilon == 0.0:
            ev, ea = self._eps_potentials(0.0)
            self._const_pots = (ev, ea)
            if self._solver_kind == "direct":
                self._factorized = self._factor(ev, ea)
        else:
            self._const_pots = None

    def _factor(self, ev: np.ndarray, ea: np.ndarray) -> CyclicBlockTridiagSolver:
        n = self.grid.N
        half = 0.5 * self.tau
        diag = np.zeros((n, 2, 2), dtype=np.complex128)
        diag[:, 0, 0] = 1j - half * (1.0 + ev)
        diag[:, 1, 1] = 1j - half * (ev - 1.0)
        diag[:, 0, 1] = half * ea
        diag[:, 1, 0] = half * ea
        c = 1j * self.tau / (4.0 * self.grid.h)
        b_plus = np.array([[0.0, c], [c, 0.0]])
        b_minus = -b_plus
        return CyclicBlockTridiagSolver(diag, b_plus, b_minus)

    def _apply_k(self, v: np.ndarray, ev: np.ndarray, ea: np.ndarray) -> np.ndarray:
        d = _centered_diff(v, self.grid.h)
        k1 = -1j * d[1] + (1.0 + ev) * v[0] - ea * v[1]
        k2 = -1j * d[0] + (ev - 1.0) * v[1] - ea * v[0]
        return np.stack((k1, k2))

    def _step(self) -> np.ndarray:
        half = 0.5 * self.tau
        if self._const_pots is not None:
            ev, ea = self._const_pots
        else:
            ev, ea = self._eps_potentials(self.t + half)
        rhs = 1j * self._curr + half * self._apply_k(self._curr, ev, ea)

        if self._solver_kind == "direct":
            solver = self._factorized if self._factorized is not None else self._factor(ev, ea)
            flat = np.empty(2 * self.grid.N, dtype=np.complex128)
            flat[0::2], flat[1::2] = rhs[0], rhs[1]
            sol = solver.solve(flat)
            new = np.stack((sol[0::2], sol[1::2]))
            iters = 1
        else:
            n2 = 2 * self.grid.N

            def matvec(x):
                v = x.reshape(2, self.grid.N, order="F")  # interleaved layout
                out = 1j * v - half * self._apply_k(v, ev, ea)
                return out.reshape(n2, order="F")

            op = LinearOperator((n2, n2), matvec=matvec, dtype=np.complex128)
            b = rhs.reshape(n2, order="F")
            x0 = self._curr.reshape(n2, order="F")
            sol, info = gmres(op, b, x0=x0, rtol=1e-13, atol=0.0)
            if info != 0:
                raise SolverError("CNFD GMRES did not converge", step=self.n,
                                  diagnostics=SolverDiagnostics(np.nan, int(info)))
            new = sol.reshape(2, self.grid.N, order="F")
            iters = 1

        if self.check_residual:
            lhs = 1j * new - half * self._apply_k(new, ev, ea)
            scale = np.linalg.norm(rhs)
            resid = float(np.linalg.norm(lhs - rhs) / scale) if scale > 0 else 0.0
            self.diagnostics = SolverDiagnostics(resid, iters)
            if resid > self.residual_tol:
                raise SolverError(
                    f"CNFD linear residual {resid:.3e} exceeds tolerance {self.residual_tol:.1e}",
                    step=self.n, diagnostics=self.diagnostics,
                )
        else:
            self.diagnostics = SolverDiagnostics(0.0, iters)
        return new


@register_scheme
class SIFD1Stepper(Stepper):
    """Semi-implicit scheme with an explicit transport term.

    The implicit bracket decouples per node:
        Phi^{n+1}_j = [(i - eps*tau*V_j) I2 - tau*sigma3
                       + eps*tau*A_j*sigma1]^{-1} H^n_j,
        H^n_j = -2i*tau*sigma1*delta_x Phi^n_j
                + [(i + eps*tau*V_j) I2 + tau*(sigma3 - eps*A_j*sigma1)] Phi^{n-1}_j.
    """

    scheme = "sifd1"

    def _prepare(self):
        eps = self.problem.epsilon
        pots = self.problem.potentials
        guard = abs(self.tau) * (1.0 + eps * (pots.v_max + pots.a_max))
        if guard >= 0.5:
            raise ConfigurationError(
                f"SIFD1 pointwise solve guard violated: |tau|*(1 + eps*(V_max + A_max)) "
                f"= {guard:.3g} >= 0.5; reduce tau"
            )
        self._inv_cache = None
        if pots.time_independent or eps == 0.0:
            ev, ea = self._eps_potentials(0.0)
            self._inv_cache = self._invert(ev, ea)

    def _invert(self, ev, ea):
        tau = self.tau
        m11 = 1j - tau * ev - tau
        m22 = 1j - tau * ev + tau
        m12 = tau * ea
        det = m11 * m22 - m12 * m12
        bad = np.abs(det) < 1e-300
        if np.any(bad):
            raise SolverError("singular pointwise matrix", step=self.n,
                              node=int(np.argmax(bad)))
        return m22 / det, -m12 / det, m11 / det  # i11, i12, i22

    def _step(self) -> np.ndarray:
        tau = self.tau
        if self._inv_cache is not None:
            i11, i12, i22 = self._inv_cache
            ev, ea = self._eps_potentials(self.t)
        else:
            ev, ea = self._eps_potentials(self.t)
            i11, i12, i22 = self._invert(ev, ea)
        d = _centered_diff(self._curr, self.grid.h)
        p1, p2 = self._prev
        h1 = -2j * tau * d[1] + (1j + tau * ev + tau) * p1 - tau * ea * p2
        h2 = -2j * tau * d[0] + (1j + tau * ev - tau) * p2 - tau * ea * p1
        return np.stack((i11 * h1 + i12 * h2, i12 * h1 + i22 * h2))


@register_scheme
class SIFD2Stepper(Stepper):
    """Semi-implicit scheme solved per Fourier mode.

    (i I2 - tau*s_l*sigma1 - tau*sigma3) hat(Phi)^{n+1}_l =
        (i I2 + tau*s_l*sigma1 + tau*sigma3) hat(Phi)^{n-1}_l
        + 2*tau*hat(G^n Phi^n)_l,     s_l = sin(mu_l h)/h.

    One forward transform of G^n Phi^n and one inverse transform per step;
    spectral history is carried along to avoid re-transforming.
    """

    scheme = "sifd2"

    stencil_symbol = staticmethod(lambda grid: np.sin(grid.mu_fft * grid.h) / grid.h)

    def _prepare(self):
        tau = self.tau
        s = self.stencil_symbol(self.grid)
        det = -1.0 - tau * tau - (tau * s) ** 2
        # det is real and <= -1: the per-mode matrix can never be singular
        assert np.all(np.abs(det) >= 1.0)
        self._i11 = (1j + tau) / det
        self._i22 = (1j - tau) / det
        self._i12 = tau * s / det
        self._r11 = 1j + tau
        self._r22 = 1j - tau
        self._r12 = tau * s
        self._hat_prev = None
        self._hat_curr = None

    def _step(self) -> np.ndarray:
        tau = self.tau
        if self._hat_prev is None:
            self._hat_prev = np.fft.fft(self._prev, axis=1)
        ev, ea = self._eps_potentials(self.t)
        w1 = ev * self._curr[0] - ea * self._curr[1]
        w2 = ev * self._curr[1] - ea * self._curr[0]
        what = np.fft.fft(np.stack((w1, w2)), axis=1)
        p1, p2 = self._hat_prev
        l1 = self._r11 * p1 + self._r12 * p2 + 2.0 * tau * what[0]
        l2 = self._r12 * p1 + self._r22 * p2 + 2.0 * tau * what[1]
        new_hat = np.stack((self._i11 * l1 + self._i12 * l2,
                            self._i12 * l1 + self._i22 * l2))
        self._hat_prev = self._hat_curr
        self._hat_curr = new_hat
        return np.fft.ifft(new_hat, axis=1)


@register_scheme
class LFFDStepper(Stepper):
    """Fully explicit leap-frog: Phi^{n+1} = Phi^{n-1} - 2i*tau*K(t_n)Phi^n."""

    scheme = "lffd"

    def _step(self) -> np.ndarray:
        ev, ea = self._eps_potentials(self.t)
        v1, v2 = self._curr
        d = _centered_diff(self._curr, self.grid.h)
        k1 = -1j * d[1] + (1.0 + ev) * v1 - ea * v2
        k2 = -1j * d[0] + (ev - 1.0) * v2 - ea * v1
        return self._prev - 2j * self.tau * np.stack((k1, k2))


def _single_step(cls, state: StepperState, problem: DiracProblem, tau: float,
                 **opts) -> SpinorField:
    stepper = cls(problem, tau, state=state, **opts)
    stepper.advance()
    return stepper.phi.copy()


def cnfd_step(state: StepperState, problem: DiracProblem, tau: float, **opts) -> SpinorField:
    """One Crank-Nicolson step from the given state."""
    return _single_step(CNFDStepper, state, problem, tau, **opts)


def sifd1_step(state: StepperState, problem: DiracProblem, tau: float) -> SpinorField:
    """One SIFD1 step (Taylor launch if the state has no history)."""
    return _single_step(SIFD1Stepper, state, problem, tau)


def sifd2_step(state: StepperState, problem: DiracProblem, tau: float) -> SpinorField:
    """One SIFD2 step (Taylor launch if the state has no history)."""
    return _single_step(SIFD2Stepper, state, problem, tau)


def lffd_step(state: StepperState, problem: DiracProblem, tau: float) -> SpinorField:
    """One leap-frog step (Taylor launch if the state has no history)."""
    return _single_step(LFFDStepper, state, problem, tau)
