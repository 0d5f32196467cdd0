"""Ground-truth generators: exact free evolution and the TSFP integrator.

The free flow is applied exactly per mode through the symbol
Gamma_l = mu_l*sigma1 + sigma3, whose exponential is

    exp(-i t Gamma_l) = cos(t*delta_l) I2 - i sin(t*delta_l)/delta_l * Gamma_l,
    delta_l = sqrt(1 + mu_l^2),

so each mode evolves unitarily.  The TSFP reference integrator Strang-splits
between this free flow and the pointwise potential flow

    exp(-i s eps (V I2 - A1 sigma1))
        = exp(-i s eps V) [cos(s eps A1) I2 + i sin(s eps A1) sigma1],

applied potential-first (half, free, half); both sub-flows preserve the mass
exactly.  Reference snapshots can be cached to disk in a simple binary
format (magic "DREF1", header, complex64 node pairs) with a JSON manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .grid import SpinorField, TorusGrid, make_grid, subsample, trig_resample
from .model import DiracProblem, ProblemSetup
from .stepping import Stepper, StepperState, register_scheme

__all__ = [
    "free_dirac_exact", "TSFPStepper", "tsfp_step",
    "ReferenceSolution", "ExactFreeReference", "reference_solution",
    "reference_cache_key", "save_reference", "load_reference", "ReferenceCache",
]

MAGIC = b"DREF1"
SUBSTEP_ORDER = "potential-first"


def _free_multipliers(grid: TorusGrid, t: float):
    mu = grid.mu_fft
    delta = np.sqrt(1.0 + mu * mu)
    c = np.cos(t * delta)
    s = np.sin(t * delta) / delta
    return c - 1j * s, -1j * s * mu, c + 1j * s  # f11, f12, f22


def _apply_free(values: np.ndarray, grid: TorusGrid, t: float) -> np.ndarray:
    f11, f12, f22 = _free_multipliers(grid, t)
    hat = np.fft.fft(values, axis=1)
    out = np.stack((f11 * hat[0] + f12 * hat[1], f12 * hat[0] + f22 * hat[1]))
    return np.fft.ifft(out, axis=1)


def free_dirac_exact(phi0: SpinorField, t: float) -> SpinorField:
    """Evolve the trigonometric interpolant of phi0 under the free equation."""
    return SpinorField(phi0.grid, _apply_free(phi0.values, phi0.grid, t))


@register_scheme
class TSFPStepper(Stepper):
    """Strang-split reference integrator (reference use only).

    potential half step (t + tau/4), full free step, potential half step
    (t + 3*tau/4); potentials at the half-interval midpoints matter only in
    the time-dependent case.
    """

    scheme = "tsfp"
    needs_history = False

    def _prepare(self):
        self._f11, self._f12, self._f22 = _free_multipliers(self.grid, self.tau)
        self._time_indep = (self.problem.potentials.time_independent
                            or self.problem.epsilon == 0.0)
        if self._time_indep:
            self._half = self._potential_multipliers(0.5 * self.tau, 0.0)
            self._full = self._potential_multipliers(self.tau, 0.0)
        else:
            self._half = self._full = None

    def _potential_multipliers(self, s: float, t: float):
        ev, ea = self._eps_potentials(t)
        phase = np.exp(-1j * s * ev)
        return phase * np.cos(s * ea), 1j * phase * np.sin(s * ea)

    @staticmethod
    def _apply_pointwise(values: np.ndarray, mult) -> np.ndarray:
        u, w = mult
        return np.stack((u * values[0] + w * values[1],
                         w * values[0] + u * values[1]))

    def _free(self, values: np.ndarray) -> np.ndarray:
        hat = np.fft.fft(values, axis=1)
        out = np.stack((self._f11 * hat[0] + self._f12 * hat[1],
                        self._f12 * hat[0] + self._f22 * hat[1]))
        return np.fft.ifft(out, axis=1)

    def _step(self) -> np.ndarray:
        if self._time_indep:
            x = self._apply_pointwise(self._curr, self._half)
            x = self._free(x)
            return self._apply_pointwise(x, self._half)
        x = self._apply_pointwise(
            self._curr, self._potential_multipliers(0.5 * self.tau, self.t + 0.25 * self.tau))
        x = self._free(x)
        return self._apply_pointwise(
            x, self._potential_multipliers(0.5 * self.tau, self.t + 0.75 * self.tau))

    def propagate(self, n_steps: int) -> None:
        """Advance n_steps; merges interior potential half steps when allowed."""
        if n_steps <= 0:
            return
        if not self._time_indep or n_steps == 1:
            for _ in range(n_steps):
                self.advance()
            return
        x = self._apply_pointwise(self._curr, self._half)
        for _ in range(n_steps - 1):
            x = self._apply_pointwise(self._free(x), self._full)
        x = self._apply_pointwise(self._free(x), self._half)
        self._curr = x
        self.n += n_steps
        self.t += n_steps * self.tau


def tsfp_step(state: StepperState, problem: DiracProblem, tau: float) -> SpinorField:
    """One Strang-split step from the given state."""
    stepper = TSFPStepper(problem, tau, state=state)
    stepper.advance()
    return stepper.phi.copy()


class ReferenceSolution:
    """Fine-grid snapshots at fixed times, restrictable to coarser grids."""

    def __init__(self, grid: TorusGrid, tau_e: float, fields: dict,
                 manifest: Optional[dict] = None):
        self.grid = grid
        self.tau_e = tau_e
        self.fields = fields  # time -> SpinorField on self.grid
        self.times = sorted(fields)
        self.manifest = manifest or {}

    def snapshot(self, t: float) -> SpinorField:
        key = self._match_time(t)
        return self.fields[key]

    def _match_time(self, t: float) -> float:
        for stored in self.times:
            if abs(stored - t) <= 1e-9 * max(1.0, abs(t)):
                return stored
        raise ConfigurationError(f"no reference snapshot at t={t}; stored {self.times}")

    def restricted(self, t: float, grid: TorusGrid,
                   allow_interpolation: bool = False,
                   min_space_ratio: float = 4.0) -> SpinorField:
        """Snapshot at t on the given coarse grid.

        Nested grids are restricted by exact node subsampling; non-nesting
        grids require allow_interpolation (trigonometric resampling).
        min_space_ratio guards how much finer the reference must be.
        """
        fine = self.snapshot(t)
        if grid == self.grid:
            if min_space_ratio > 1.0:
                raise ConfigurationError(
                    f"reference grid N={self.grid.N} is not {min_space_ratio:g}x finer "
                    f"than the test grid N={grid.N}"
                )
            return fine
        if self.grid.N < min_space_ratio * grid.N:
            raise ConfigurationError(
                f"reference grid N={self.grid.N} is not {min_space_ratio:g}x finer "
                f"than the test grid N={grid.N}"
            )
        if self.grid.N % grid.N == 0:
            return subsample(fine, grid)
        if allow_interpolation:
            return trig_resample(fine, grid)
        raise ConfigurationError(
            f"grids do not nest (N_e={self.grid.N}, N={grid.N}) and interpolation "
            "is not enabled"
        )


class ExactFreeReference:
    """Exact evolution for the free problem (eps = 0), evaluated on demand."""

    def __init__(self, setup: ProblemSetup, h_e: Optional[float] = None,
                 n_fine: Optional[int] = None):
        if setup.epsilon != 0.0 and (setup.potentials.v_max or setup.potentials.a_max):
            raise ConfigurationError("exact reference requires the free problem")
        if n_fine is not None:
            self.grid = setup.grid_with_nodes(n_fine)
        elif h_e is not None:
            self.grid = setup.grid_for_mesh(h_e)
        else:
            raise ConfigurationError("give h_e or n_fine for the exact reference")
        self.phi0 = SpinorField(self.grid, np.asarray(setup.phi0_func(self.grid.x),
                                                      dtype=np.complex128))
        self.manifest = {"kind": "exact-free", "N": self.grid.N}

    def restricted(self, t: float, grid: TorusGrid,
                   allow_interpolation: bool = False,
                   min_space_ratio: float = 1.0) -> SpinorField:
        fine = free_dirac_exact(self.phi0, t)
        if grid == self.grid:
            return fine
        if self.grid.N % grid.N == 0:
            return subsample(fine, grid)
        if allow_interpolation:
            return trig_resample(fine, grid)
        raise ConfigurationError("grids do not nest and interpolation is not enabled")


def reference_solution(setup: ProblemSetup, h_e: float, tau_e: float,
                       t_targets: Sequence[float]) -> ReferenceSolution:
    """Run TSFP on the fine grid and collect snapshots at the target times."""
    if tau_e <= 0:
        raise ConfigurationError("tau_e must be positive")
    problem = setup.discretize(h=h_e)
    steps = {}
    for t in t_targets:
        if t < 0:
            raise ConfigurationError("snapshot times must be nonnegative")
        k = int(round(t / tau_e))
        if abs(k * tau_e - t) > 1e-8 * max(1.0, abs(t)):
            raise ConfigurationError(
                f"snapshot time {t} is not an integer multiple of tau_e={tau_e}"
            )
        steps[k] = float(t)

    stepper = TSFPStepper(problem, tau_e)
    fields = {}
    last = 0
    for k in sorted(steps):
        stepper.propagate(k - last)
        last = k
        fields[steps[k]] = stepper.phi.copy()
    manifest = {
        "kind": "tsfp",
        "substep_order": SUBSTEP_ORDER,
        "h_e": problem.grid.h,
        "tau_e": tau_e,
        "N": problem.grid.N,
        "epsilon": setup.epsilon,
        "problem": setup.key,
        "times": sorted(fields),
    }
    return ReferenceSolution(problem.grid, tau_e, fields, manifest)


# ---------------------------------------------------------------------------
# disk cache
# ---------------------------------------------------------------------------

def reference_cache_key(setup: ProblemSetup, h_e: float, tau_e: float,
                        t_targets: Sequence[float]) -> str:
    """Content hash identifying a reference run; needs a describable setup."""
    if setup.key is None:
        raise ConfigurationError(
            "this problem setup has no stable description (key=None); caching "
            "is only available for presets and expression-built problems"
        )
    payload = {
        "problem": setup.key,
        "domain": list(setup.domain()),
        "epsilon": setup.epsilon,
        "T0": setup.T0,
        "h_e": h_e,
        "tau_e": tau_e,
        "times": [float(t) for t in t_targets],
        "substep_order": SUBSTEP_ORDER,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def save_reference(path: str, ref: ReferenceSolution, config_hash: str = "") -> None:
    """Write snapshots as DREF1 binary plus a JSON manifest sidecar."""
    grid = ref.grid
    times = ref.times
    header = MAGIC + struct.pack("<ddII", grid.a, grid.b, grid.N, len(times))
    header += struct.pack(f"<{len(times)}d", *times)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            for t in times:
                pairs = np.ascontiguousarray(ref.fields[t].values.T).astype("<c8")
                fh.write(pairs.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    manifest = dict(ref.manifest)
    manifest["config_hash"] = config_hash
    tmp_manifest = path + ".json.tmp"
    with open(tmp_manifest, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    os.replace(tmp_manifest, path + ".json")


def load_reference(path: str) -> ReferenceSolution:
    """Read a DREF1 snapshot file (values come back as complex128)."""
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != MAGIC:
            raise ConfigurationError(f"{path} is not a reference cache file")
        a, b, n, n_times = struct.unpack("<ddII", fh.read(24))
        times = struct.unpack(f"<{n_times}d", fh.read(8 * n_times))
        grid = make_grid(a, b, n)
        fields = {}
        for t in times:
            raw = np.frombuffer(fh.read(8 * 2 * n), dtype="<c8").reshape(n, 2)
            fields[t] = SpinorField(grid, raw.T.astype(np.complex128))
    manifest = {}
    if os.path.exists(path + ".json"):
        with open(path + ".json") as fh:
            manifest = json.load(fh)
    tau_e = manifest.get("tau_e", 0.0)
    return ReferenceSolution(grid, tau_e, fields, manifest)


class ReferenceCache:
    """Directory of cached references keyed by the config hash."""

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def path_for(self, key: str) -> str:
        return os.path.join(self.directory, key + ".dref")

    def fetch(self, setup: ProblemSetup, h_e: float, tau_e: float,
              t_targets: Sequence[float]) -> ReferenceSolution:
        """Load a matching cached reference or compute and store one."""
        key = reference_cache_key(setup, h_e, tau_e, t_targets)
        path = self.path_for(key)
        if not os.path.exists(path):
            ref = reference_solution(setup, h_e, tau_e, t_targets)
            save_reference(path, ref, config_hash=key)
        # always read back from disk so results are identical whether the
        # snapshot was just computed or found cached (complex64 rounding)
        return load_reference(path)
