"""Scenario execution: config ingestion, verdicts, artifacts, batch statistics.

A scenario is either a named preset, an inline system+target, or a preset
with explicit overrides.  Runs are fully deterministic for a given master
seed: per-run generators derive from spawned seed sequences, artifacts carry
no timestamps, and JSON keys are sorted, so identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (
    SimulationConfig,
    Trajectory,
    distance_to_orbit,
    distance_to_target,
    interaction_picture,
    max_lyapunov_value,
    orbit_discretization_bound,
    simulate,
)
from .errors import ConfigError
from .linalg import spectrum, validate_density
from .presets import Scenario, get_preset
from .stability import enumerate_critical_points
from .structure import (
    ControlSystem,
    a_tilde_rank,
    ad_bracket_sequence,
    analyze_structure,
    bracket_span,
    pseudo_pure_invariant_check,
)
from .errors import NotPseudoPureError, NotStationaryError
from .linalg import build_generator_basis
from .stability import stability_survey

DEFAULT_SEED = 7
TRAJ_THRESHOLD_FACTOR = 1e-3  # times sqrt(2 Vmax)
ENDPOINT_MATCH_TOL = 1e-3
FINAL_WINDOW_FRACTION = 0.1

VERDICT_TRAJECTORY = "trajectory_converged"
VERDICT_ORBIT = "orbit_converged_only"
VERDICT_SADDLE = "converged_to_saddle"
VERDICT_NONE = "non_converged"
VERDICTS = (VERDICT_TRAJECTORY, VERDICT_ORBIT, VERDICT_SADDLE, VERDICT_NONE)


@dataclass
class ScenarioConfig:
    """Parsed scenario file.  Numbers may be given as decimal strings."""

    preset: str | None = None
    system: dict | None = None
    target: dict | None = None
    initial: dict | None = None
    sim: dict = field(default_factory=dict)
    outputs: tuple = ("summary",)
    seed: int = DEFAULT_SEED
    name: str = "scenario"

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        known = {"preset", "system", "target", "initial", "sim", "outputs", "seed", "name"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        preset = raw.get("preset")
        system = raw.get("system")
        if preset is None and system is None:
            raise ConfigError("config must give a preset or an inline system")
        if preset is not None and system is not None:
            raise ConfigError("give either a preset or an inline system, not both")
        if system is not None and raw.get("target") is None:
            raise ConfigError("an inline system requires an explicit target")
        outputs = tuple(raw.get("outputs", ("summary",)))
        bad = [o for o in outputs if o not in ("trajectory_csv", "report_json", "summary")]
        if bad:
            raise ConfigError(f"unknown outputs: {bad}")
        seed = raw.get("seed", DEFAULT_SEED)
        if not isinstance(seed, int) or seed < 0 or seed > 2**64 - 1:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        return cls(
            preset=preset,
            system=system,
            target=raw.get("target"),
            initial=raw.get("initial"),
            sim=dict(raw.get("sim", {})),
            outputs=outputs,
            seed=seed,
            name=raw.get("name", preset or "scenario"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        return cls.from_dict(raw)


def _num(value, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {name!r} is not a number: {value!r}") from None


def _complex_matrix(entry: dict, name: str) -> np.ndarray:
    if not isinstance(entry, dict) or "real" not in entry:
        raise ConfigError(f"{name} must be given as {{'real': [[...]], 'imag': [[...]]}}")
    real = np.asarray(entry["real"], dtype=float)
    imag = np.asarray(entry.get("imag", np.zeros_like(real)), dtype=float)
    if real.shape != imag.shape:
        raise ConfigError(f"{name}: real and imag parts differ in shape")
    return real + 1j * imag


def _resolve_target(entry: dict, sys: ControlSystem) -> np.ndarray:
    if "matrix" in entry:
        return validate_density(_complex_matrix(entry["matrix"], "target.matrix"))
    if "spectrum" in entry:
        weights = np.array([_num(x, "target.spectrum") for x in entry["spectrum"]])
        eigenbasis = entry.get("eigenbasis", "h0")
        if eigenbasis == "h0":
            return validate_density(np.diag(weights).astype(complex))
        u = _complex_matrix(eigenbasis, "target.eigenbasis")
        return validate_density(u @ np.diag(weights).astype(complex) @ u.conj().T)
    raise ConfigError("target must give 'matrix' or 'spectrum'")


@dataclass
class ResolvedScenario:
    name: str
    system: ControlSystem
    rho_d0: np.ndarray
    sim: SimulationConfig
    initial_mode: str  # "explicit" | "permutation" | "random"
    initial_state: np.ndarray | None
    initial_permutation: int | None


def resolve(cfg: ScenarioConfig) -> ResolvedScenario:
    """Materialize a config into system, target, simulation and initial rule."""
    if cfg.preset is not None:
        scenario: Scenario = get_preset(cfg.preset)
        system = scenario.system
        rho_d0 = scenario.rho_d0
        sim_defaults = scenario.sim
        default_initial = scenario.initial
        if cfg.target is not None:
            rho_d0 = _resolve_target(cfg.target, system)
            default_initial = None
    else:
        h0_diag = np.array([_num(x, "system.h0_diag") for x in cfg.system.get("h0_diag", ())])
        if h0_diag.size == 0:
            raise ConfigError("system.h0_diag is required for an inline system")
        h1 = _complex_matrix(cfg.system.get("h1"), "system.h1")
        system = ControlSystem(np.diag(h0_diag), h1)
        rho_d0 = _resolve_target(cfg.target, system)
        sim_defaults = SimulationConfig(dt=0.01, t_final=300.0)
        default_initial = None
    sim_kwargs = {
        "dt": sim_defaults.dt,
        "t_final": sim_defaults.t_final,
        "kappa": sim_defaults.kappa,
        "record_stride": sim_defaults.record_stride,
        "orbit_samples": sim_defaults.orbit_samples,
    }
    for key in ("dt", "t_final", "kappa"):
        if key in cfg.sim:
            sim_kwargs[key] = _num(cfg.sim[key], f"sim.{key}")
    for key in ("record_stride", "orbit_samples"):
        if key in cfg.sim:
            sim_kwargs[key] = int(cfg.sim[key])
    sim_cfg = SimulationConfig(**sim_kwargs)
    initial_mode, initial_state, initial_perm = "random", None, None
    if cfg.initial is not None:
        if "matrix" in cfg.initial:
            initial_mode = "explicit"
            initial_state = validate_density(_complex_matrix(cfg.initial["matrix"], "initial.matrix"))
        elif "permutation" in cfg.initial:
            initial_mode = "permutation"
            initial_perm = int(cfg.initial["permutation"])
        elif cfg.initial.get("random_isospectral", False):
            initial_mode = "random"
        else:
            raise ConfigError("initial must give 'matrix', 'permutation' or 'random_isospectral'")
    elif default_initial is not None:
        initial_mode = "explicit"
        initial_state = default_initial
    return ResolvedScenario(
        name=cfg.name,
        system=system,
        rho_d0=rho_d0,
        sim=sim_cfg,
        initial_mode=initial_mode,
        initial_state=initial_state,
        initial_permutation=initial_perm,
    )


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian with fixed phases."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_isospectral(rho_ref: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample ``U rho_ref U^†`` with Haar-distributed U."""
    u = haar_unitary(rho_ref.shape[0], rng)
    return u @ rho_ref @ u.conj().T


def permutation_states(rho_d0: np.ndarray, max_n: int = 6) -> list[np.ndarray]:
    """Rearrangement companions of a state: same eigenframe, permuted weights.

    Entry 0 is the state itself; the last entry is the order reversal.
    """
    evals, evecs = np.linalg.eigh(rho_d0)
    points = enumerate_critical_points(evals, max_n=max_n)
    return [evecs @ p.rho0 @ evecs.conj().T for p in points]


@dataclass
class RunSummary:
    verdict: str
    final_V: float
    final_distance: float
    final_orbit_distance: float
    orbit_grid_bound: float
    limiting_permutation: int | None
    run_index: int
    spectrum_drift: float
    max_mono_violation: float
    wall_time: float

    def to_artifact_dict(self) -> dict:
        # wall_time deliberately omitted: artifacts must be byte-reproducible
        return {
            "verdict": self.verdict,
            "final_V": self.final_V,
            "final_distance": self.final_distance,
            "final_orbit_distance": self.final_orbit_distance,
            "orbit_grid_bound": self.orbit_grid_bound,
            "limiting_permutation": self.limiting_permutation,
            "run_index": self.run_index,
            "spectrum_drift": self.spectrum_drift,
            "max_mono_violation": self.max_mono_violation,
        }


def summarize(
    traj: Trajectory,
    system: ControlSystem,
    rho_d0: np.ndarray,
    orbit_samples: int,
    run_index: int = 0,
    wall_time: float = 0.0,
) -> RunSummary:
    """Convergence verdict and endpoint diagnostics for one trajectory.

    trajectory_converged: final-window mean target distance below 1e-3 times
    the diameter sqrt(2 Vmax).  orbit_converged_only: same bound (plus the
    sampling bound) for the orbit distance.  converged_to_saddle: the
    frame-rotated endpoint matches a non-trivial rearrangement companion.
    """
    dist = distance_to_target(traj)
    window = max(1, int(np.ceil(FINAL_WINDOW_FRACTION * len(traj))))
    # orbit distances are only needed over the verdict window
    tail = Trajectory(
        times=traj.times[-window:],
        rho=traj.rho[-window:],
        rho_d=traj.rho_d[-window:],
        control=traj.control[-window:],
        lyapunov=traj.lyapunov[-window:],
        dt=traj.dt,
    )
    dorb = distance_to_orbit(tail, system, orbit_samples, rho_ref=traj.rho_d[0])
    bound = orbit_discretization_bound(system, traj.rho_d[0], orbit_samples)
    weights = spectrum(rho_d0)
    vmax = max_lyapunov_value(weights)
    threshold = TRAJ_THRESHOLD_FACTOR * np.sqrt(2.0 * max(vmax, 1e-300))
    mean_dist = float(dist[-window:].mean())
    mean_orb = float(dorb.mean())
    endpoint = interaction_picture(traj, system).rho[-1]
    limiting = None
    for k, state in enumerate(permutation_states(rho_d0)):
        if np.sqrt(np.sum(np.abs(endpoint - state) ** 2)) <= ENDPOINT_MATCH_TOL:
            limiting = k
            break
    if mean_dist <= threshold:
        verdict = VERDICT_TRAJECTORY
    elif mean_orb <= threshold + bound:
        verdict = VERDICT_ORBIT
    elif limiting is not None and limiting > 0:
        verdict = VERDICT_SADDLE
    else:
        verdict = VERDICT_NONE
    return RunSummary(
        verdict=verdict,
        final_V=float(traj.lyapunov[-1]),
        final_distance=float(dist[-1]),
        final_orbit_distance=float(dorb[-1]),
        orbit_grid_bound=float(bound),
        limiting_permutation=limiting,
        run_index=run_index,
        spectrum_drift=float(traj.spectrum_drift),
        max_mono_violation=float(traj.max_mono_violation),
        wall_time=wall_time,
    )


def _matrix_dict(m: np.ndarray) -> dict:
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_trajectory_csv(path: Path, traj: Trajectory, system: ControlSystem, orbit_samples: int) -> None:
    """Fixed-schema CSV: t, f, V, dist_target, dist_orbit with 17 significant digits."""
    dist = distance_to_target(traj)
    dorb = distance_to_orbit(traj, system, orbit_samples)
    lines = ["t,f,V,dist_target,dist_orbit"]
    for i in range(len(traj)):
        lines.append(
            f"{traj.times[i]:.17g},{traj.control[i]:.17g},{traj.lyapunov[i]:.17g},"
            f"{dist[i]:.17g},{dorb[i]:.17g}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _initial_state(resolved: ResolvedScenario, rng: np.random.Generator) -> np.ndarray:
    if resolved.initial_mode == "explicit":
        return resolved.initial_state
    if resolved.initial_mode == "permutation":
        states = permutation_states(resolved.rho_d0)
        k = resolved.initial_permutation
        if not 0 <= k < len(states):
            raise ConfigError(f"permutation index {k} out of range [0, {len(states)})")
        return states[k]
    return random_isospectral(resolved.rho_d0, rng)


def _run_one(
    resolved: ResolvedScenario, child: np.random.SeedSequence, run_index: int = 0
) -> tuple[RunSummary, Trajectory]:
    rng = np.random.default_rng(child)
    rho0 = _initial_state(resolved, rng)
    t0 = time.perf_counter()
    traj = simulate(resolved.system, rho0, resolved.rho_d0, resolved.sim)
    wall = time.perf_counter() - t0
    summary = summarize(
        traj,
        resolved.system,
        resolved.rho_d0,
        resolved.sim.orbit_samples,
        run_index=run_index,
        wall_time=wall,
    )
    return summary, traj


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path = ".", quiet: bool = False) -> RunSummary:
    """Execute one run and write the requested artifacts.

    The run's generator is the first spawn of the master seed, so a batch of
    one reproduces this run exactly.
    """
    resolved = resolve(cfg)
    child = np.random.SeedSequence(cfg.seed).spawn(1)[0]
    summary, traj = _run_one(resolved, child)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "trajectory_csv" in cfg.outputs:
        write_trajectory_csv(
            out / f"{cfg.name}_trajectory.csv", traj, resolved.system, resolved.sim.orbit_samples
        )
    if "report_json" in cfg.outputs:
        payload = {
            "name": cfg.name,
            "master_seed": cfg.seed,
            "sim": {
                "dt": resolved.sim.dt,
                "t_final": resolved.sim.t_final,
                "kappa": resolved.sim.kappa,
                "orbit_samples": resolved.sim.orbit_samples,
            },
            "summary": summary.to_artifact_dict(),
            "final_rho": _matrix_dict(traj.rho[-1]),
            "final_rho_d": _matrix_dict(traj.rho_d[-1]),
        }
        _write_json(out / f"{cfg.name}_report.json", payload)
    if "summary" in cfg.outputs and not quiet:
        print(
            f"{cfg.name}: {summary.verdict}  V={summary.final_V:.6g}  "
            f"dist={summary.final_distance:.6g}  orbit={summary.final_orbit_distance:.6g}  "
            f"seed={cfg.seed}"
        )
    return summary


@dataclass
class BatchResult:
    verdict_counts: dict
    v_histogram_edges: np.ndarray
    v_histogram_counts: np.ndarray
    limiting_permutation_counts: dict
    summaries: list


def run_batch(
    cfg: ScenarioConfig,
    n_runs: int,
    out_dir: str | Path = ".",
    workers: int = 1,
    quiet: bool = False,
) -> BatchResult:
    """Run ``n_runs`` independent scenarios with deterministically derived seeds.

    Member runs may execute in parallel threads (the inner loop releases the
    GIL); aggregation is by run index, so the result is schedule-independent.
    """
    if n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")
    resolved = resolve(cfg)
    children = np.random.SeedSequence(cfg.seed).spawn(n_runs)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ic: _run_one(resolved, ic[1], ic[0]), enumerate(children)))
    else:
        results = [_run_one(resolved, c, i) for i, c in enumerate(children)]
    summaries = [s for s, _ in results]
    counts = {v: 0 for v in VERDICTS}
    for s in summaries:
        counts[s.verdict] += 1
    weights = spectrum(resolved.rho_d0)
    vmax = max(max_lyapunov_value(weights), 1e-300)
    edges = np.linspace(0.0, vmax * 1.0001, 25)
    hist, _ = np.histogram([s.final_V for s in summaries], bins=edges)
    perm_counts: dict = {}
    for s in summaries:
        key = "none" if s.limiting_permutation is None else str(s.limiting_permutation)
        perm_counts[key] = perm_counts.get(key, 0) + 1
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "trajectory_csv" in cfg.outputs:
        for idx, (_, traj) in enumerate(results):
            write_trajectory_csv(
                out / f"{cfg.name}_run{idx:03d}_trajectory.csv",
                traj,
                resolved.system,
                resolved.sim.orbit_samples,
            )
    if "report_json" in cfg.outputs:
        payload = {
            "name": cfg.name,
            "master_seed": cfg.seed,
            "n_runs": n_runs,
            "verdict_counts": counts,
            "v_histogram": {"edges": edges.tolist(), "counts": hist.tolist()},
            "limiting_permutation_counts": perm_counts,
            "runs": [s.to_artifact_dict() for s in summaries],
        }
        _write_json(out / f"{cfg.name}_batch.json", payload)
    if "summary" in cfg.outputs and not quiet:
        print(f"{cfg.name}: {n_runs} runs, master seed {cfg.seed}")
        for v in VERDICTS:
            print(f"  {v}: {counts[v]}")
    return BatchResult(
        verdict_counts=counts,
        v_histogram_edges=edges,
        v_histogram_counts=hist,
        limiting_permutation_counts=perm_counts,
        summaries=summaries,
    )


def analyze_command(cfg: ScenarioConfig, out_dir: str | Path = ".", quiet: bool = False) -> dict:
    """Structural and stability analysis without simulating.

    Emits regularity/connectivity flags, the bracket-span ranks, the
    adjoint-block rank of the target, the pseudo-pure exception flag where
    applicable, and (for stationary targets) the critical-point table.
    """
    resolved = resolve(cfg)
    system = resolved.system
    basis = build_generator_basis(system.dim)
    structure = analyze_structure(system)
    span = bracket_span(ad_bracket_sequence(system), basis, sys=system)
    report: dict = {
        "name": cfg.name,
        "dim": system.dim,
        "structure": {
            "strongly_regular": structure.strongly_regular,
            "colliding_pairs": [list(map(list, c)) for c in structure.colliding_pairs],
            "fully_connected": structure.fully_connected,
            "missing_edges": [list(p) for p in structure.missing_edges],
        },
        "span": {
            "rank": span.rank,
            "vandermonde_rank": span.vandermonde_rank,
            "full": span.full,
            "spanned_pairs": [list(p) for p in span.spanned_pairs],
        },
        "a_tilde_rank": a_tilde_rank(resolved.rho_d0, basis),
    }
    try:
        report["pseudo_pure_exceptional"] = pseudo_pure_invariant_check(resolved.rho_d0)
    except NotPseudoPureError:
        report["pseudo_pure_exceptional"] = None
    try:
        surveys = stability_survey(system, resolved.rho_d0, basis)
        report["stability"] = [
            {
                "permutation": list(r.point.permutation),
                "critical_value": r.point.critical_value,
                "classification": r.classification,
                "eigenvalues": {
                    "real": r.eigenvalues.real.tolist(),
                    "imag": r.eigenvalues.imag.tolist(),
                },
                "n_negative": r.n_negative,
                "n_positive": r.n_positive,
                "n_imaginary": r.n_imaginary,
                "stable_manifold_dim": r.stable_manifold_dim,
                "isotropy_pairs": [list(p) for p in r.isotropy_pairs],
            }
            for r in surveys
        ]
    except NotStationaryError as exc:
        report["stability"] = {"error": "NotStationary", "detail": str(exc)}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "report_json" in cfg.outputs:
        _write_json(out / f"{cfg.name}_analysis.json", report)
    if "summary" in cfg.outputs and not quiet:
        s = report["structure"]
        print(
            f"{cfg.name}: strongly_regular={s['strongly_regular']} "
            f"fully_connected={s['fully_connected']} span_rank={report['span']['rank']} "
            f"vandermonde_rank={report['span']['vandermonde_rank']} "
            f"a_tilde_rank={report['a_tilde_rank']}"
        )
        if isinstance(report["stability"], list):
            for entry in report["stability"]:
                print(
                    f"  perm {entry['permutation']}: {entry['classification']} "
                    f"(V={entry['critical_value']:.6g}, stable dim {entry['stable_manifold_dim']})"
                )
    return report
