"""Preset scenario library.

One preset per qualitatively distinct control regime: two-level targets on
and off the equatorial plane, pseudo-pure targets in and out of the
exceptional phase-degenerate family, generic stationary / non-stationary
qutrit targets, a commutator-exception pair, a degenerate-spectrum target,
and the two non-ideal Hamiltonians (missing coupling, repeated transition
frequency).  Preset systems use commensurate transition frequencies so the
free orbit is exactly periodic and orbit distances are well sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SimulationConfig
from .errors import UnknownPresetError
from .linalg import matrix_exponential
from .structure import ControlSystem


@dataclass(frozen=True)
class Scenario:
    """A ready-to-run configuration: system, target, defaults, description."""

    name: str
    description: str
    system: ControlSystem
    rho_d0: np.ndarray
    sim: SimulationConfig
    initial: np.ndarray | None = None  # None means: sample isospectral to the target


def _two_level_system() -> ControlSystem:
    return ControlSystem(np.diag([0.0, 1.0]), np.array([[0, 1], [1, 0]], dtype=complex))


def _ideal_qutrit_system() -> ControlSystem:
    # gaps 1, 1.5, 2.5: distinct (strongly regular) and commensurate (orbit period 4*pi)
    h0 = np.diag([0.0, 1.0, 2.5])
    h1 = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=complex)
    return ControlSystem(h0, h1)


def _bloch2(x: float, y: float, z: float) -> np.ndarray:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return 0.5 * (np.eye(2, dtype=complex) + x * sx + y * sy + z * sz)


def pseudo_pure_state(psi: np.ndarray, w: float) -> np.ndarray:
    """Density operator ``w P + u (I - P)`` for the rank-one projector of psi."""
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    n = psi.size
    u = (1.0 - w) / (n - 1)
    proj = np.outer(psi, psi.conj())
    return w * proj + u * (np.eye(n, dtype=complex) - proj)


def _fixed_generic_unitary() -> np.ndarray:
    # a fixed, reproducible unitary in general position (no rng involved)
    k = np.array(
        [
            [0.10, 0.31 + 0.42j, -0.23 + 0.11j],
            [0.31 - 0.42j, -0.20, 0.47 - 0.19j],
            [-0.23 - 0.11j, 0.47 + 0.19j, 0.30],
        ]
    )
    return matrix_exponential(1j * k)


def _exception_pair() -> tuple[np.ndarray, np.ndarray]:
    # isospectral pair whose commutator is diagonal but nonzero
    rho1 = np.array(
        [
            [1 / 12, -1 / 12, -1 / 12],
            [-1 / 12, 11 / 24, 1 / 8],
            [-1 / 12, 1 / 8, 11 / 24],
        ],
        dtype=complex,
    )
    rho2 = np.array(
        [
            [1 / 3, -1j / 12, 1j / 12],
            [1j / 12, 1 / 3, -1j / 4],
            [-1j / 12, 1j / 4, 1 / 3],
        ],
        dtype=complex,
    )
    return rho1, rho2


def _build_two_level_generic() -> Scenario:
    return Scenario(
        name="two_level_generic",
        description="Two-level target off the equatorial plane: full trajectory "
        "tracking from every non-antipodal start.",
        system=_two_level_system(),
        rho_d0=_bloch2(0.5, 0.0, 0.62),
        sim=SimulationConfig(dt=0.01, t_final=300.0),
    )


def _build_two_level_equatorial() -> Scenario:
    return Scenario(
        name="two_level_equatorial",
        description="Two-level target on the equatorial plane: the orbit circle is "
        "reached but the relative phase locks at an arbitrary offset.",
        system=_two_level_system(),
        rho_d0=_bloch2(0.8, 0.0, 0.0),
        sim=SimulationConfig(dt=0.01, t_final=300.0),
    )


def _build_pseudo_pure_generic() -> Scenario:
    psi = np.array([2.0, 1.0, 2.0]) / 3.0
    return Scenario(
        name="pseudo_pure_generic",
        description="Pseudo-pure qutrit target in general position (three nonzero "
        "amplitudes): trajectory tracking succeeds.",
        system=_ideal_qutrit_system(),
        rho_d0=pseudo_pure_state(psi, 0.9),
        sim=SimulationConfig(dt=0.01, t_final=300.0),
    )


def _build_pseudo_pure_exceptional() -> Scenario:
    psi = np.array([1.0, np.exp(1j * np.pi / 5), 0.0]) / np.sqrt(2.0)
    return Scenario(
        name="pseudo_pure_exceptional",
        description="Pseudo-pure qutrit target with exactly two equal-modulus "
        "amplitudes: phase locking fails, only the orbit is tracked.",
        system=_ideal_qutrit_system(),
        rho_d0=pseudo_pure_state(psi, 0.9),
        sim=SimulationConfig(dt=0.01, t_final=400.0),
    )


def _build_qutrit_generic_stationary() -> Scenario:
    return Scenario(
        name="qutrit_generic_stationary",
        description="Ideal qutrit, generic diagonal stationary target: the target "
        "is the unique sink among the six rearrangements.",
        system=_ideal_qutrit_system(),
        rho_d0=np.diag([0.5, 1 / 3, 1 / 6]).astype(complex),
        sim=SimulationConfig(dt=0.01, t_final=500.0),
    )


def _build_qutrit_generic_nonstationary() -> Scenario:
    u = _fixed_generic_unitary()
    rho_d0 = u @ np.diag([0.5, 1 / 3, 1 / 6]).astype(complex) @ u.conj().T
    return Scenario(
        name="qutrit_generic_nonstationary",
        description="Ideal qutrit, rotating generic target with full-rank adjoint "
        "block: almost every start tracks the target trajectory.",
        system=_ideal_qutrit_system(),
        rho_d0=rho_d0,
        # rotating-frame averaging slows the contraction ~7x vs the
        # stationary case; the threshold is reached around t ~ 1300
        sim=SimulationConfig(dt=0.01, t_final=2000.0),
    )


def _build_qutrit_nonstationary_exception() -> Scenario:
    rho1, rho2 = _exception_pair()
    return Scenario(
        name="qutrit_nonstationary_exception",
        description="Isospectral pair with a nonzero diagonal commutator: the "
        "feedback field stays zero along the free flow and the distance never closes.",
        system=_ideal_qutrit_system(),
        rho_d0=rho2,
        sim=SimulationConfig(dt=0.01, t_final=400.0),
        initial=rho1,
    )


def _build_qutrit_degenerate_target() -> Scenario:
    return Scenario(
        name="qutrit_degenerate_target",
        description="Stationary target with a repeated weight: the target remains "
        "a sink; the two other stationary points carry centre directions.",
        system=_ideal_qutrit_system(),
        rho_d0=np.diag([0.25, 0.25, 0.5]).astype(complex),
        sim=SimulationConfig(dt=0.01, t_final=500.0),
    )


def _build_qutrit_nonideal_h1() -> Scenario:
    h0 = np.diag([0.0, 1.0, 2.5])
    h1 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    return Scenario(
        name="qutrit_nonideal_h1",
        description="Nearest-neighbour coupling only (1-3 transition undriven): "
        "the target gains a two-dimensional centre and most runs stall short of it.",
        system=ControlSystem(h0, h1),
        rho_d0=np.diag([0.5, 1 / 3, 1 / 6]).astype(complex),
        sim=SimulationConfig(dt=0.01, t_final=500.0),
    )


def _build_qutrit_nonideal_h0() -> Scenario:
    h0 = np.diag([0.0, 1.0, 2.0])
    h1 = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=complex)
    return Scenario(
        name="qutrit_nonideal_h0",
        description="Equally spaced levels (repeated transition frequency): the "
        "frequency power matrix drops to rank two and the stall set grows.",
        system=ControlSystem(h0, h1),
        rho_d0=np.diag([0.5, 1 / 3, 1 / 6]).astype(complex),
        sim=SimulationConfig(dt=0.01, t_final=500.0),
    )


_BUILDERS = {
    "two_level_generic": _build_two_level_generic,
    "two_level_equatorial": _build_two_level_equatorial,
    "pseudo_pure_generic": _build_pseudo_pure_generic,
    "pseudo_pure_exceptional": _build_pseudo_pure_exceptional,
    "qutrit_generic_stationary": _build_qutrit_generic_stationary,
    "qutrit_generic_nonstationary": _build_qutrit_generic_nonstationary,
    "qutrit_nonstationary_exception": _build_qutrit_nonstationary_exception,
    "qutrit_degenerate_target": _build_qutrit_degenerate_target,
    "qutrit_nonideal_h1": _build_qutrit_nonideal_h1,
    "qutrit_nonideal_h0": _build_qutrit_nonideal_h0,
}

PRESET_NAMES = tuple(_BUILDERS)


def get_preset(name: str) -> Scenario:
    """Build a fresh Scenario for the given preset name."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None


def list_presets() -> list[tuple[str, str]]:
    """(name, description) for every registered preset."""
    return [(name, _BUILDERS[name]().description) for name in PRESET_NAMES]


def matched_ideal(name: str) -> Scenario:
    """Idealized counterpart of a non-ideal preset (same target and horizon).

    For the missing-coupling preset the absent transition is restored; for
    the repeated-frequency preset the level spacing is made strongly regular.
    Useful for like-for-like convergence comparisons under identical seeds.
    """
    base = get_preset(name)
    if name == "qutrit_nonideal_h1":
        system = ControlSystem(base.system.h0, np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=complex))
    elif name == "qutrit_nonideal_h0":
        system = ControlSystem(np.diag([0.0, 1.0, 2.5]), base.system.h1)
    else:
        raise UnknownPresetError(f"preset {name!r} has no idealized counterpart")
    return Scenario(
        name=f"{name}_idealized",
        description=f"Idealized counterpart of {name}.",
        system=system,
        rho_d0=base.rho_d0,
        sim=base.sim,
        initial=base.initial,
    )
