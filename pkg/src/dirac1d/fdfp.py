"""Fourier-pseudospectral schemes: CNFP, SIFP1, SIFP2, LFFP.

Same time discretizations as the FDTD family, with the trigonometric
interpolation derivative in space: mode l of d/dx is exactly i*mu_l, so the
free part (mu_l*sigma1 + sigma3) is diagonal per mode.  The l = -N/2 mode is
kept as-is.  Per-step cost is O(N log N) (one transform pair, plus one pair
per fixed-point sweep for CNFP).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, SolverError
from .fdtd import SIFD2Stepper, _single_step
from .grid import SpinorField
from .model import DiracProblem
from .stepping import SolverDiagnostics, Stepper, StepperState, register_scheme

__all__ = [
    "FixedPointConfig", "CNFPStepper", "SIFP1Stepper", "SIFP2Stepper", "LFFPStepper",
    "cnfp_step", "sifp1_step", "sifp2_step", "lffp_step",
]


@dataclass
class FixedPointConfig:
    """Convergence control for the CNFP potential-term fixed point."""

    tol: float = 1e-14
    max_iters: int = 50

    def __post_init__(self):
        if self.tol <= 0 or self.max_iters < 1:
            raise ConfigurationError("fixed point needs tol > 0 and max_iters >= 1")


@register_scheme
class CNFPStepper(Stepper):
    """Crank-Nicolson in time, spectral in space.

    The free part (i I2 - tau/2*(mu_l*sigma1 + sigma3)) is inverted exactly
    per mode; the O(eps*tau) potential term is lagged on the iterate and
    converges with contraction about eps*tau*(V_max + A_max)/2.  Conserves
    mass to the fixed-point tolerance and, for time-independent potentials,
    the spectral discrete energy.
    """

    scheme = "cnfp"
    needs_history = False

    def __init__(self, problem: DiracProblem, tau: float,
                 state: Optional[StepperState] = None,
                 fixed_point: Optional[FixedPointConfig] = None):
        self.fixed_point = fixed_point or FixedPointConfig()
        super().__init__(problem, tau, state)

    def _prepare(self):
        mu = self.grid.mu_fft
        half = 0.5 * self.tau
        det = -1.0 - half * half * (1.0 + mu * mu)
        self._i11 = (1j + half) / det
        self._i22 = (1j - half) / det
        self._i12 = half * mu / det
        self._r11 = 1j + half
        self._r22 = 1j - half
        self._r12 = half * mu
        self._hat_curr = None
        pots = self.problem.potentials
        self._free_run = self.problem.epsilon == 0.0 or (pots.v_max == 0.0 and pots.a_max == 0.0)

    def _solve_free(self, rhs_hat: np.ndarray) -> np.ndarray:
        return np.stack((self._i11 * rhs_hat[0] + self._i12 * rhs_hat[1],
                         self._i12 * rhs_hat[0] + self._i22 * rhs_hat[1]))

    def _step(self) -> np.ndarray:
        if self._hat_curr is None:
            self._hat_curr = np.fft.fft(self._curr, axis=1)
        c1, c2 = self._hat_curr
        y = np.stack((self._r11 * c1 + self._r12 * c2,
                      self._r12 * c1 + self._r22 * c2))

        if self._free_run:
            new_hat = self._solve_free(y)
            self._hat_curr = new_hat
            self.diagnostics = SolverDiagnostics(0.0, 1)
            return np.fft.ifft(new_hat, axis=1)

        half = 0.5 * self.tau
        ev, ea = self._eps_potentials(self.t + half)
        norm_curr = np.linalg.norm(self._curr)
        tol = self.fixed_point.tol * max(norm_curr, 1e-300)

        x = self._curr
        for it in range(1, self.fixed_point.max_iters + 1):
            s1 = x[0] + self._curr[0]
            s2 = x[1] + self._curr[1]
            p = np.stack((half * (ev * s1 - ea * s2), half * (ev * s2 - ea * s1)))
            new_hat = self._solve_free(y + np.fft.fft(p, axis=1))
            x_new = np.fft.ifft(new_hat, axis=1)
            change = np.linalg.norm(x_new - x)
            x = x_new
            if change <= tol:
                self._hat_curr = new_hat
                self.diagnostics = SolverDiagnostics(float(change / max(norm_curr, 1e-300)), it)
                return x
        pots = self.problem.potentials
        contraction = self.problem.epsilon * abs(self.tau) * (pots.v_max + pots.a_max) / 2.0
        raise SolverError(
            f"CNFP fixed point did not converge in {self.fixed_point.max_iters} sweeps "
            f"(contraction estimate {contraction:.3g}); reduce tau or raise max_iters",
            step=self.n,
            diagnostics=SolverDiagnostics(float("nan"), self.fixed_point.max_iters),
        )


@register_scheme
class SIFP1Stepper(Stepper):
    """SIFD1 with the spectral transport term; pointwise 2x2 implicit solve."""

    scheme = "sifp1"

    def _prepare(self):
        self._mu = self.grid.mu_fft
        eps = self.problem.epsilon
        pots = self.problem.potentials
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
        return m22 / det, -m12 / det, m11 / det

    def _step(self) -> np.ndarray:
        tau = self.tau
        ev, ea = self._eps_potentials(self.t)
        if self._inv_cache is not None:
            i11, i12, i22 = self._inv_cache
        else:
            i11, i12, i22 = self._invert(ev, ea)
        d = np.fft.ifft(1j * self._mu * np.fft.fft(self._curr, axis=1), axis=1)
        p1, p2 = self._prev
        h1 = -2j * tau * d[1] + (1j + tau * ev + tau) * p1 - tau * ea * p2
        h2 = -2j * tau * d[0] + (1j + tau * ev - tau) * p2 - tau * ea * p1
        return np.stack((i11 * h1 + i12 * h2, i12 * h1 + i22 * h2))


@register_scheme
class SIFP2Stepper(SIFD2Stepper):
    """SIFD2 with the exact per-mode symbol mu_l in place of sin(mu_l h)/h."""

    scheme = "sifp2"

    stencil_symbol = staticmethod(lambda grid: grid.mu_fft)


@register_scheme
class LFFPStepper(Stepper):
    """Fully explicit leap-frog with the spectral derivative."""

    scheme = "lffp"

    def _prepare(self):
        self._imu = 1j * self.grid.mu_fft

    def _step(self) -> np.ndarray:
        ev, ea = self._eps_potentials(self.t)
        v1, v2 = self._curr
        d = np.fft.ifft(self._imu * np.fft.fft(self._curr, axis=1), axis=1)
        k1 = -1j * d[1] + (1.0 + ev) * v1 - ea * v2
        k2 = -1j * d[0] + (ev - 1.0) * v2 - ea * v1
        return self._prev - 2j * self.tau * np.stack((k1, k2))


def cnfp_step(state: StepperState, problem: DiracProblem, tau: float,
              fixed_point: Optional[FixedPointConfig] = None) -> SpinorField:
    """One CNFP step from the given state."""
    return _single_step(CNFPStepper, state, problem, tau, fixed_point=fixed_point)


def sifp1_step(state: StepperState, problem: DiracProblem, tau: float) -> SpinorField:
    """One SIFP1 step (Taylor launch if the state has no history)."""
    return _single_step(SIFP1Stepper, state, problem, tau)


def sifp2_step(state: StepperState, problem: DiracProblem, tau: float) -> SpinorField:
    """One SIFP2 step (Taylor launch if the state has no history)."""
    return _single_step(SIFP2Stepper, state, problem, tau)


def lffp_step(state: StepperState, problem: DiracProblem, tau: float) -> SpinorField:
    """One LFFP step (Taylor launch if the state has no history)."""
    return _single_step(LFFPStepper, state, problem, tau)
