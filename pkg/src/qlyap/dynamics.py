"""Closed-loop propagation of the plant/target pair and trajectory metrics.

The control field is the trace-form feedback ``f = kappa Tr([-iH1, rho]
rho_d)``; freezing it over each step and conjugating both states by the
resulting exact step unitaries keeps the two spectra invariant to roundoff,
which is the invariant everything downstream relies on.  The distance
function ``V = 0.5 ||rho - rho_d||^2`` is non-increasing along exact
solutions; a per-substep monotonicity guard bisects any step where the
discretization breaks that.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .errors import ConfigInvalidError, DimensionMismatchError, StepRejectedError
from .linalg import spectrum, validate_density
from .structure import ControlSystem

TOL_MONO_RATE = 1e-9  # allowed V increase per unit time within one substep
TOL_SPEC = 1e-9
RESOLUTION_GUARD = 0.1
MAX_HALVINGS = 20
DEFAULT_RECORDS = 2000


@dataclass
class SimulationConfig:
    """Step size, horizon, gain and recording density for one run."""

    dt: float
    t_final: float
    kappa: float = 1.0
    record_stride: int = 0  # 0 selects a stride targeting ~2000 records
    orbit_samples: int = 1024

    def validate(self, sys: ControlSystem | None = None) -> None:
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ConfigInvalidError(f"dt must be positive, got {self.dt}")
        if not (self.t_final >= self.dt):
            raise ConfigInvalidError(f"t_final {self.t_final} must be >= dt {self.dt}")
        if not (self.kappa > 0.0):
            raise ConfigInvalidError(f"kappa must be positive, got {self.kappa}")
        if self.record_stride < 0:
            raise ConfigInvalidError("record_stride must be >= 0")
        if self.orbit_samples < 16:
            raise ConfigInvalidError("orbit_samples must be >= 16")
        if sys is not None:
            omega_max = max(abs(w) for w in sys.omegas.values())
            if self.dt * omega_max > RESOLUTION_GUARD:
                warnings.warn(
                    f"dt*max|omega| = {self.dt * omega_max:.3g} exceeds the "
                    f"resolution guard {RESOLUTION_GUARD}",
                    stacklevel=2,
                )


@dataclass
class Trajectory:
    """Recorded run: states, control values and distance function.

    ``max_mono_violation`` is the largest committed single-substep increase
    of V (bounded by TOL_MONO_RATE per unit time by construction) and
    ``spectrum_drift`` the largest deviation of either state's eigenvalue
    multiset from its initial value over the recorded points.
    """

    times: np.ndarray
    rho: np.ndarray
    rho_d: np.ndarray
    control: np.ndarray
    lyapunov: np.ndarray
    dt: float
    max_mono_violation: float = 0.0
    spectrum_drift: float = 0.0

    def __len__(self) -> int:
        return len(self.times)


def feedback_control(
    rho: np.ndarray, rho_d: np.ndarray, sys: ControlSystem, kappa: float = 1.0
) -> float:
    """Feedback field ``kappa Tr([-iH1, rho] rho_d)``.

    The trace is real for Hermitian arguments; an imaginary residue above
    1e-12 (relative) indicates corrupted inputs and raises.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    rho_d = np.asarray(rho_d, dtype=np.complex128)
    if rho.shape != rho_d.shape or rho.shape != sys.h1.shape:
        raise DimensionMismatchError("state and system dimensions must match")
    if kappa <= 0.0:
        raise ConfigInvalidError(f"kappa must be positive, got {kappa}")
    comm = -1j * (sys.h1 @ rho - rho @ sys.h1)
    val = complex(np.sum(comm.T * rho_d))  # Tr(comm rho_d)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ValueError(f"feedback trace has imaginary residue {val.imag:.3e}")
    return kappa * val.real


def lyapunov_value(rho: np.ndarray, rho_d: np.ndarray) -> float:
    """Distance function ``0.5 ||rho - rho_d||^2`` (Hilbert-Schmidt)."""
    rho = np.asarray(rho, dtype=np.complex128)
    rho_d = np.asarray(rho_d, dtype=np.complex128)
    if rho.shape != rho_d.shape:
        raise DimensionMismatchError("state dimensions must match")
    d = rho - rho_d
    return 0.5 * float(np.sum(d.conj() * d).real)


def simulate(
    sys: ControlSystem,
    rho0: np.ndarray,
    rho_d0: np.ndarray,
    cfg: SimulationConfig,
) -> Trajectory:
    """Integrate the coupled pair under the feedback law.

    The plant state is conjugated by ``exp(-i (H0 + f H1) h)`` with f frozen
    over the substep, the target by ``exp(-i H0 h)``.  Raises
    :class:`StepRejectedError` if a grid step cannot be made monotone within
    MAX_HALVINGS bisections.
    """
    cfg.validate(sys)
    rho0 = validate_density(rho0)
    rho_d0 = validate_density(rho_d0)
    if rho0.shape[0] != sys.dim or rho_d0.shape[0] != sys.dim:
        raise DimensionMismatchError("state dimension does not match the system")
    if np.abs(spectrum(rho0) - spectrum(rho_d0)).max() > 1e-8:
        warnings.warn(
            "initial and target states are not isospectral; the distance "
            "cannot reach zero",
            stacklevel=2,
        )
    n = sys.dim
    n_grid = int(round(cfg.t_final / cfg.dt))
    n_grid = max(n_grid, 1)
    stride = cfg.record_stride if cfg.record_stride > 0 else max(1, n_grid // DEFAULT_RECORDS)
    n_rec_max = 1 + n_grid // stride + (1 if n_grid % stride else 0)
    rec_t = np.zeros(n_rec_max)
    rec_rho = np.zeros((n_rec_max, n, n), np.complex128)
    rec_rhod = np.zeros((n_rec_max, n, n), np.complex128)
    rec_f = np.zeros(n_rec_max)
    rec_v = np.zeros(n_rec_max)
    status, n_rec, max_violation = _kernel.evolve(
        sys.h0,
        sys.h1,
        rho0.copy(),
        rho_d0.copy(),
        cfg.dt,
        n_grid,
        stride,
        cfg.kappa,
        TOL_MONO_RATE,
        MAX_HALVINGS,
        rec_t,
        rec_rho,
        rec_rhod,
        rec_f,
        rec_v,
    )
    if status == _kernel.STATUS_STEP_REJECTED:
        raise StepRejectedError(
            f"step-size control exhausted {MAX_HALVINGS} halvings at t ~ {rec_t[n_rec - 1]:.4g}"
        )
    if status == _kernel.STATUS_NOT_FINITE:
        raise StepRejectedError("propagation produced non-finite values")
    traj = Trajectory(
        times=rec_t[:n_rec].copy(),
        rho=rec_rho[:n_rec].copy(),
        rho_d=rec_rhod[:n_rec].copy(),
        control=rec_f[:n_rec].copy(),
        lyapunov=rec_v[:n_rec].copy(),
        dt=cfg.dt,
        max_mono_violation=max_violation,
    )
    spec0 = spectrum(traj.rho[0])
    spec0_d = spectrum(traj.rho_d[0])
    drift = 0.0
    for i in range(len(traj)):
        drift = max(drift, float(np.abs(spectrum(traj.rho[i]) - spec0).max()))
        drift = max(drift, float(np.abs(spectrum(traj.rho_d[i]) - spec0_d).max()))
    traj.spectrum_drift = drift
    if drift > TOL_SPEC:
        warnings.warn(f"spectrum drift {drift:.3e} exceeds {TOL_SPEC:.1e}", stacklevel=2)
    return traj


def distance_to_target(traj: Trajectory) -> np.ndarray:
    """Hilbert-Schmidt distance ``||rho(t_i) - rho_d(t_i)||`` per record."""
    diff = traj.rho - traj.rho_d
    return np.sqrt(np.sum((diff.conj() * diff).real, axis=(1, 2)))


def _approx_gcd(values: np.ndarray, tol: float) -> float:
    g = 0.0
    for v in values:
        a, b = max(g, v), min(g, v)
        while b > tol:
            a, b = b, a % b
        g = a
    return g


def orbit_period(sys: ControlSystem) -> tuple[float, bool]:
    """Sampling period for the free orbit of the target.

    Returns ``(T, commensurate)``.  If the transition frequencies share an
    approximate common divisor g (Euclid with tolerance 1e-9 relative) the
    orbit is periodic with period 2*pi/g; otherwise one period of the
    fastest frequency is used and the sampled minimum is only an upper bound
    on the true orbit distance.
    """
    omegas = np.array([abs(w) for w in sys.omegas.values()])
    omegas = omegas[omegas > 0]
    if omegas.size == 0:
        return 2.0 * np.pi, True
    omega_max = float(omegas.max())
    g = _approx_gcd(np.sort(omegas), 1e-9 * omega_max)
    if g > omega_max / 64.0:
        return 2.0 * np.pi / g, True
    return 2.0 * np.pi / omega_max, False


def _orbit_states(sys: ControlSystem, rho_ref: np.ndarray, samples: int) -> np.ndarray:
    t_grid, _ = orbit_period(sys)
    taus = np.arange(samples) * (t_grid / samples)
    a = sys.h0_diag
    phases = np.exp(-1j * np.outer(taus, a))  # (samples, n)
    return phases[:, :, None] * rho_ref[None, :, :] * phases.conj()[:, None, :]


def distance_to_orbit(
    traj: Trajectory,
    sys: ControlSystem,
    samples: int = 1024,
    rho_ref: np.ndarray | None = None,
) -> np.ndarray:
    """Distance from rho(t_i) to the sampled free orbit of rho_d(0).

    The orbit is sampled at ``samples`` uniformly spaced conjugation times
    over one (near-)period; the reported values overestimate the true orbit
    distance by at most :func:`orbit_discretization_bound`.  ``rho_ref``
    overrides the orbit reference point (default: the recorded rho_d[0]).
    """
    if samples < 16:
        raise ConfigInvalidError("samples must be >= 16")
    orbit = _orbit_states(sys, traj.rho_d[0] if rho_ref is None else rho_ref, samples)
    out = np.empty(len(traj))
    chunk = max(1, 4_000_000 // (samples * sys.dim * sys.dim))
    for start in range(0, len(traj), chunk):
        block = traj.rho[start : start + chunk]
        diff = block[:, None, :, :] - orbit[None, :, :, :]
        dists = np.sqrt(np.sum((diff.conj() * diff).real, axis=(2, 3)))
        out[start : start + chunk] = dists.min(axis=1)
    return out


def orbit_discretization_bound(sys: ControlSystem, rho_ref: np.ndarray, samples: int = 1024) -> float:
    """Half the largest gap between consecutive orbit samples."""
    orbit = _orbit_states(sys, np.asarray(rho_ref, np.complex128), samples)
    nxt = np.roll(orbit, -1, axis=0)
    gaps = np.sqrt(np.sum(np.abs(nxt - orbit) ** 2, axis=(1, 2)))
    return 0.5 * float(gaps.max())


def interaction_picture(traj: Trajectory, sys: ControlSystem) -> Trajectory:
    """Undo the free evolution: ``rho_bar(t) = e^{iH0 t} rho(t) e^{-iH0 t}``.

    The transformed target is constant, the distance function is unchanged
    (both states are rotated by the same unitary at every record).
    """
    a = sys.h0_diag
    phases = np.exp(1j * np.outer(traj.times, a))
    rho_bar = phases[:, :, None] * traj.rho * phases.conj()[:, None, :]
    rhod_bar = phases[:, :, None] * traj.rho_d * phases.conj()[:, None, :]
    v_bar = 0.5 * np.sum(np.abs(rho_bar - rhod_bar) ** 2, axis=(1, 2))
    if np.abs(v_bar - traj.lyapunov).max() > 1e-12 * max(1.0, float(traj.lyapunov.max())):
        raise AssertionError("distance function changed under the frame rotation")
    return Trajectory(
        times=traj.times.copy(),
        rho=rho_bar,
        rho_d=rhod_bar,
        control=traj.control.copy(),
        lyapunov=v_bar,
        dt=traj.dt,
        max_mono_violation=traj.max_mono_violation,
        spectrum_drift=traj.spectrum_drift,
    )


def max_lyapunov_value(weights: np.ndarray) -> float:
    """Largest V over isospectral pairs with the given spectrum.

    Attained at the order-reversing rearrangement: ``sum w^2 - sum
    w_sorted_desc * w_sorted_asc``.
    """
    w = np.asarray(weights, dtype=np.float64)
    desc = np.sort(w)[::-1]
    return float(np.sum(w * w) - np.sum(desc * desc[::-1]))
