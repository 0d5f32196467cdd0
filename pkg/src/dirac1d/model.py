"""Problem definition and physical observables.

Governing equation on the torus (a, b), for the 2-spinor Phi(t, x):

    i dPhi/dt = (-i sigma1 d/dx + sigma3) Phi
                + eps (V(t,x) I2 - A1(t,x) sigma1) Phi,

with 0 < eps <= 1 scaling the electromagnetic potentials and runs extending
to the horizon t = T0/eps.  Observables: mass h*sum|Phi_j|^2, probability
density rho_j = |phi1|^2 + |phi2|^2, current J_j = 2 Re(conj(phi1) phi2),
and the two discrete energies (centered-difference or spectral kinetic term)
conserved by the Crank-Nicolson schemes for time-independent potentials.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .grid import (
    SpinorField,
    TorusGrid,
    centered_difference,
    make_grid,
    spectral_derivative,
)

SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)

# max over x of |cos(x) + sin(2x)|, attained at sin(x) = (sqrt(33)-1)/8
_COS_PLUS_SIN2_MAX = 1.7601725930461
# max over R of |(1-x)/(1+x^2)| = (1+sqrt(2))/2, attained at x = 1-sqrt(2)
_RATIONAL_V_MAX = (1.0 + math.sqrt(2.0)) / 2.0


@dataclass
class PotentialPair:
    """Electric and magnetic potential evaluators with declared sup bounds.

    V and A1 map (t, x-array) -> array; they must be vectorized in x and
    reentrant.  v_max/a_max are the declared sup norms used by the CFL
    bounds; `check_bounds` spot-checks them by sampling.
    """

    V: Callable[[float, np.ndarray], np.ndarray]
    A1: Callable[[float, np.ndarray], np.ndarray]
    time_independent: bool
    v_max: float
    a_max: float

    def __post_init__(self):
        if self.v_max < 0 or self.a_max < 0:
            raise ConfigurationError("potential bounds must be nonnegative")

    def evaluate(self, t: float, x: np.ndarray):
        v = np.broadcast_to(np.asarray(self.V(t, x), dtype=float), x.shape)
        a = np.broadcast_to(np.asarray(self.A1(t, x), dtype=float), x.shape)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(a))):
            raise ConfigurationError(f"potential evaluation returned non-finite values at t={t}")
        return v, a


def _zero_evaluator(t, x):
    return np.zeros_like(x)


def zero_potentials() -> PotentialPair:
    """The free problem: V = A1 = 0."""
    return PotentialPair(_zero_evaluator, _zero_evaluator, True, 0.0, 0.0)


def sample_potential_matrix(p: PotentialPair, eps: float, t: float, grid: TorusGrid) -> np.ndarray:
    """Per-node coupling matrix G_j = eps*(V_j I2 - A1_j sigma1), shape (N, 2, 2)."""
    v, a = p.evaluate(t, grid.x)
    g = np.zeros((grid.N, 2, 2), dtype=np.complex128)
    g[:, 0, 0] = eps * v
    g[:, 1, 1] = eps * v
    g[:, 0, 1] = -eps * a
    g[:, 1, 0] = -eps * a
    return g


def check_bounds(p: PotentialPair, grid: TorusGrid, t_final: float,
                 space_factor: int = 16, time_samples: int = 100) -> bool:
    """Sample |V|, |A1| densely and warn if a declared bound is exceeded."""
    xs = grid.a + (grid.b - grid.a) * np.arange(space_factor * grid.N) / (space_factor * grid.N)
    ts = [0.0] if p.time_independent else np.linspace(0.0, t_final, time_samples)
    ok = True
    for t in ts:
        v, a = p.evaluate(float(t), xs)
        vmax, amax = np.abs(v).max(), np.abs(a).max()
        if vmax > p.v_max * (1 + 1e-12) or amax > p.a_max * (1 + 1e-12):
            warnings.warn(
                f"declared potential bounds exceeded at t={t}: "
                f"|V| up to {vmax:.6g} (declared {p.v_max:.6g}), "
                f"|A1| up to {amax:.6g} (declared {p.a_max:.6g})",
                stacklevel=2,
            )
            ok = False
            break
    return ok


@dataclass
class DiracProblem:
    """A fully discretized problem instance bound to one grid.

    phi0_deriv, when given, evaluates the exact spatial derivative of the
    initial data at the nodes (used by the Taylor first step of the
    three-level schemes); otherwise the spectral derivative of phi0 is used.
    """

    grid: TorusGrid
    epsilon: float
    potentials: PotentialPair
    phi0: SpinorField
    phi0_deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    T0: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigurationError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.T0 <= 0:
            raise ConfigurationError("T0 must be positive")
        if self.phi0.grid != self.grid:
            raise ConfigurationError("phi0 must live on the problem grid")

    @property
    def t_final(self) -> float:
        """Run horizon T0/eps (T0 itself for the free problem eps = 0)."""
        return self.T0 / self.epsilon if self.epsilon > 0 else self.T0

    def phi0_derivative_values(self) -> np.ndarray:
        if self.phi0_deriv is not None:
            return np.asarray(self.phi0_deriv(self.grid.x), dtype=np.complex128)
        return spectral_derivative(self.phi0).values


def mass(f: SpinorField) -> float:
    """Total probability h*sum_j |Phi_j|^2 (the squared l2 norm)."""
    mag2 = np.abs(f.values[0]) ** 2 + np.abs(f.values[1]) ** 2
    return float(f.grid.h * mag2.sum())


def density(f: SpinorField) -> np.ndarray:
    """Probability density rho_j = |phi1_j|^2 + |phi2_j|^2."""
    return np.abs(f.values[0]) ** 2 + np.abs(f.values[1]) ** 2


def current(f: SpinorField) -> np.ndarray:
    """Current density J_j = Phi_j* sigma1 Phi_j = 2 Re(conj(phi1_j) phi2_j)."""
    return 2.0 * np.real(np.conj(f.values[0]) * f.values[1])


def _energy_from_derivative(f: SpinorField, deriv: np.ndarray,
                            p: PotentialPair, eps: float) -> float:
    if not p.time_independent:
        raise ConfigurationError("the discrete energy is defined only for time-independent potentials")
    phi1, phi2 = f.values
    d1, d2 = deriv
    kinetic = -1j * (np.conj(phi1) * d2 + np.conj(phi2) * d1)
    rho = np.abs(phi1) ** 2 + np.abs(phi2) ** 2
    sig3 = np.abs(phi1) ** 2 - np.abs(phi2) ** 2
    j1 = 2.0 * np.real(np.conj(phi1) * phi2)
    v, a = p.evaluate(0.0, f.grid.x)
    total = f.grid.h * np.sum(kinetic + sig3 + eps * v * rho - eps * a * j1)
    scale = max(1.0, abs(total.real))
    if abs(total.imag) > 1e-12 * scale:
        raise ConfigurationError(
            f"energy assembly produced imaginary part {total.imag:.3e} (assembly bug?)"
        )
    return float(total.real)


def energy_fd(f: SpinorField, p: PotentialPair, eps: float) -> float:
    """Discrete energy with the centered-difference kinetic term."""
    return _energy_from_derivative(f, centered_difference(f).values, p, eps)


def energy_fp(f: SpinorField, p: PotentialPair, eps: float) -> float:
    """Discrete energy with the spectral kinetic term."""
    return _energy_from_derivative(f, spectral_derivative(f).values, p, eps)


@dataclass
class Observables:
    """Bundle of the physical observables of one field snapshot."""

    mass: float
    energy: float
    rho: np.ndarray
    current: np.ndarray


def observables(f: SpinorField, p: PotentialPair, eps: float,
                kinetic: str = "fd") -> Observables:
    """Mass, discrete energy (kinetic = "fd" or "fp") and the densities."""
    if kinetic == "fd":
        e = energy_fd(f, p, eps)
    elif kinetic == "fp":
        e = energy_fp(f, p, eps)
    else:
        raise ConfigurationError(f"unknown kinetic term {kinetic!r} (use 'fd' or 'fp')")
    return Observables(mass=mass(f), energy=e, rho=density(f), current=current(f))


def continuity_residual(f_prev: SpinorField, f_next: SpinorField, tau: float) -> float:
    """Max-norm residual of the discrete continuity law between two snapshots.

    Uses (rho_next - rho_prev)/tau + delta_x of the time-averaged current;
    O(h^2 + tau^2) on consistent scheme output.
    """
    if f_prev.grid != f_next.grid:
        raise ConfigurationError("snapshots must share a grid")
    h = f_prev.grid.h
    drho = (density(f_next) - density(f_prev)) / tau
    jmid = 0.5 * (current(f_prev) + current(f_next))
    dj = (np.roll(jmid, -1) - np.roll(jmid, 1)) / (2.0 * h)
    return float(np.abs(drho + dj).max())


# ---------------------------------------------------------------------------
# problem setups (grid-independent descriptions) and named presets
# ---------------------------------------------------------------------------

@dataclass
class ProblemSetup:
    """Grid-independent problem description, discretized on demand.

    For expanding setups (`expand_with_horizon`), the computational interval
    grows with the horizon: (base_a - T0/eps, base_b + T0/eps), and N is
    derived from the requested mesh size.
    """

    a: float
    b: float
    epsilon: float
    T0: float
    potentials: PotentialPair
    phi0_func: Callable[[np.ndarray], np.ndarray]
    phi0_deriv_func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    expand_with_horizon: bool = False
    key: Optional[dict] = field(default=None)

    def domain(self) -> tuple[float, float]:
        if self.expand_with_horizon:
            pad = self.T0 / self.epsilon if self.epsilon > 0 else self.T0
            return self.a - pad, self.b + pad
        return self.a, self.b

    def grid_for_mesh(self, h: float) -> TorusGrid:
        """Grid holding the mesh size (N rounded up to even if needed)."""
        a, b = self.domain()
        n = (b - a) / h
        N = int(math.ceil(n - 1e-9))
        if N % 2 != 0:
            N += 1
        return make_grid(a, b, N)

    def grid_with_nodes(self, N: int) -> TorusGrid:
        a, b = self.domain()
        return make_grid(a, b, N)

    def discretize(self, h: Optional[float] = None, N: Optional[int] = None) -> DiracProblem:
        if (h is None) == (N is None):
            raise ConfigurationError("give exactly one of h or N")
        grid = self.grid_for_mesh(h) if h is not None else self.grid_with_nodes(N)
        phi0 = SpinorField(grid, np.asarray(self.phi0_func(grid.x), dtype=np.complex128))
        return DiracProblem(grid, self.epsilon, self.potentials, phi0,
                            phi0_deriv=self.phi0_deriv_func, T0=self.T0)

    def with_epsilon(self, epsilon: float) -> "ProblemSetup":
        key = dict(self.key, epsilon=epsilon) if self.key is not None else None
        return ProblemSetup(self.a, self.b, epsilon, self.T0, self.potentials,
                            self.phi0_func, self.phi0_deriv_func,
                            self.expand_with_horizon, key)


# preset evaluators live at module level so problem setups pickle cleanly
# (worker pools ship them to subprocesses)

def _torus_V(t, x):
    return 1.0 / (1.0 + np.sin(x) ** 2)


def _torus_A1(t, x):
    return np.cos(x) + np.sin(2.0 * x)


def _torus_phi0(x):
    return np.array([1.0 / (1.0 + np.sin(x) ** 2),
                     1.0 / (3.0 + np.cos(x))], dtype=np.complex128)


def _torus_phi0_deriv(x):
    return np.array([-np.sin(2.0 * x) / (1.0 + np.sin(x) ** 2) ** 2,
                     np.sin(x) / (3.0 + np.cos(x)) ** 2], dtype=np.complex128)


def _torus_benchmark(epsilon: float) -> ProblemSetup:
    """Smooth periodic benchmark on (0, 2*pi) with horizon 2/eps."""
    pots = PotentialPair(_torus_V, _torus_A1, time_independent=True,
                         v_max=1.0, a_max=_COS_PLUS_SIN2_MAX)
    return ProblemSetup(0.0, 2.0 * np.pi, epsilon, 2.0, pots,
                        _torus_phi0, _torus_phi0_deriv,
                        key={"preset": "periodic-s51", "epsilon": epsilon})


def _packet_V(t, x):
    return (1.0 - x) / (1.0 + x ** 2)


def _packet_A1(t, x):
    return (1.0 + x) ** 2 / (1.0 + x ** 2)


def _packet_s0(x):
    return (1.0 + np.cos(2.0 * np.pi * x)) / 40.0


def _packet_s0p(x):
    return -(np.pi / 20.0) * np.sin(2.0 * np.pi * x)


def _packet_s0pp(x):
    return -(np.pi ** 2 / 10.0) * np.cos(2.0 * np.pi * x)


def _packet_phi0(x):
    g = 0.5 * np.exp(-4.0 * x ** 2) * np.exp(1j * _packet_s0(x))
    sp = _packet_s0p(x)
    return np.array([g * (1.0 + np.sqrt(1.0 + sp ** 2)), g * sp])


def _packet_phi0_deriv(x):
    sp, spp = _packet_s0p(x), _packet_s0pp(x)
    g = 0.5 * np.exp(-4.0 * x ** 2) * np.exp(1j * _packet_s0(x))
    root = np.sqrt(1.0 + sp ** 2)
    lead = -8.0 * x + 1j * sp
    return np.array([g * (lead * (1.0 + root) + sp * spp / root),
                     g * (lead * sp + spp)])


def _wavepacket_expanding(epsilon: float) -> ProblemSetup:
    """Gaussian wavepacket with oscillatory phase on an expanding interval.

    The outgoing waves reach |x| ~ t, so the interval (-7, 7) is padded by
    the horizon T0/eps on both sides; errors are read off at t = 1/eps.
    """
    pots = PotentialPair(_packet_V, _packet_A1, time_independent=True,
                         v_max=_RATIONAL_V_MAX, a_max=2.0)
    return ProblemSetup(-7.0, 7.0, epsilon, 1.0, pots,
                        _packet_phi0, _packet_phi0_deriv,
                        expand_with_horizon=True,
                        key={"preset": "whole-space-s52", "epsilon": epsilon})


_PRESETS = {
    "periodic-s51": _torus_benchmark,
    "whole-space-s52": _wavepacket_expanding,
}


def preset(name: str, epsilon: float) -> ProblemSetup:
    """Named built-in problem setups: 'periodic-s51', 'whole-space-s52'."""
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {sorted(_PRESETS)}"
        ) from None
    return builder(epsilon)


def preset_names() -> list[str]:
    return sorted(_PRESETS)
