"""Command-line interface.

Verbs: ``simulate <config>``, ``batch <config> --runs N``, ``analyze
<config>``, ``presets``.  The config argument is a JSON file path or a bare
preset name.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure (step-size control exhausted).
"""

from __future__ import annotations

import argparse
import sys as _sys

from .errors import ConfigError, QlyapError, StepRejectedError
from .presets import PRESET_NAMES, list_presets
from .scenarios import ScenarioConfig, analyze_command, run_batch, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_config(config_arg: str, args: argparse.Namespace) -> ScenarioConfig:
    if config_arg in PRESET_NAMES:
        cfg = ScenarioConfig.from_dict({"preset": config_arg, "outputs": ["summary", "report_json"]})
    else:
        cfg = ScenarioConfig.from_file(config_arg)
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "dt", None) is not None:
        cfg.sim["dt"] = args.dt
    if getattr(args, "t_final", None) is not None:
        cfg.sim["t_final"] = args.t_final
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlyap",
        description="Feedback-controlled quantum state steering: simulation and stability analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON config file or preset name")
        p.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", default=".", help="artifact output directory")
        p.add_argument("--quiet", action="store_true", help="suppress the summary line")

    p_sim = sub.add_parser("simulate", help="run one closed-loop simulation")
    common(p_sim)
    p_sim.add_argument("--dt", type=float, default=None, help="override the step size")
    p_sim.add_argument("--t-final", dest="t_final", type=float, default=None, help="override the horizon")

    p_batch = sub.add_parser("batch", help="run many simulations with derived seeds")
    common(p_batch)
    p_batch.add_argument("--runs", type=int, required=True, help="number of member runs")
    p_batch.add_argument("--workers", type=int, default=1, help="parallel worker threads")
    p_batch.add_argument("--dt", type=float, default=None, help="override the step size")
    p_batch.add_argument("--t-final", dest="t_final", type=float, default=None, help="override the horizon")

    p_an = sub.add_parser("analyze", help="structure, span and stability analysis (no simulation)")
    common(p_an)

    sub.add_parser("presets", help="list preset scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "presets":
        for name, description in list_presets():
            print(f"{name}: {description}")
        return EXIT_OK
    try:
        cfg = _load_config(args.config, args)
        if args.command == "simulate":
            run_scenario(cfg, out_dir=args.out, quiet=args.quiet)
        elif args.command == "batch":
            run_batch(cfg, args.runs, out_dir=args.out, workers=args.workers, quiet=args.quiet)
        elif args.command == "analyze":
            analyze_command(cfg, out_dir=args.out, quiet=args.quiet)
    except StepRejectedError as exc:
        print(f"numerical failure: {exc}", file=_sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except QlyapError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
