"""Command line front end: ``run``, ``synth`` and ``eval`` subcommands.

Every run writes a ``run.json`` echoing the fully resolved configuration,
and the report path renders trajectory / CDF figures next to the CSV
outputs unless ``--no-figures`` is given. Validation failures exit with
code 2 and a single ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, config, evalkit, fusion, report, sensors, synth
from .beacons import load_matches, write_matches
from .sensors import ValidationError
from .synth import ScenarioError


def _parse_origin(text: Optional[str]) -> Optional[tuple[float, float]]:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"--origin expects 'lat,lon', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _write_run_manifest(out_dir: Path, command: str, inputs: dict, cfg) -> None:
    manifest = {
        "tool": "stridefuse",
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "config": config.resolved_dict(cfg) if cfg is not None else None,
    }
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def cmd_run(args: argparse.Namespace) -> int:
    run_cfg = config.load_run_config(
        args.config,
        ges=False if args.no_ges else None,
        mdr=False if args.no_mdr else None,
        first_pass=True if args.first_pass else None,
        literal_sum=True if args.literal_sum else None,
    )
    pcfg = run_cfg.pipeline

    samples = sensors.load_imu_stream(args.imu)
    db = None
    if args.beacons:
        db = sensors.load_beacons(args.beacons, origin=_parse_origin(args.origin))
    matches = None
    if args.matches:
        if db is None:
            raise ValidationError("--matches requires --beacons")
        matches = load_matches(args.matches, db)

    records = fusion.run_pipeline(samples, matches, db, pcfg)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fusion.write_trajectory(records, out_dir / "trajectory.csv")
    _write_run_manifest(
        out_dir,
        "run",
        {
            "imu": str(args.imu),
            "matches": str(args.matches) if args.matches else None,
            "beacons": str(args.beacons) if args.beacons else None,
            "truth": str(args.truth) if args.truth else None,
        },
        pcfg,
    )

    truth = synth.load_truth(args.truth) if args.truth else None
    errors_fused = errors_pdr = None
    if truth is not None:
        truth_pos = [s.position for s in truth]
        errors_fused = evalkit.horizontal_error([r.x_fused for r in records], truth_pos)
        errors_pdr = evalkit.horizontal_error([r.x_pdr for r in records], truth_pos)
        evalkit.cdf_export(errors_fused, out_dir / "cdf.csv")

    recognition = None
    if matches:
        recognized = sum(1 for r in records if r.update_applied)
        recognition = evalkit.RecognitionStats(
            recognized=recognized,
            total=len(matches),
            accuracy=recognized / len(matches) if matches else None,
        )
    evalkit.write_metrics(
        evalkit.metrics_summary(errors_fused, recognition), out_dir / "metrics.json"
    )

    if not args.no_figures:
        report.save_trajectory_figure(
            records, out_dir / "trajectory.png", truth=truth, db=db
        )
        if errors_fused is not None:
            curves = {"fused": errors_fused, "dead reckoning": errors_pdr}
            report.save_cdf_figure(curves, out_dir / "cdf.png")
    return 0


def _recommended_config_toml(scenario: synth.Scenario) -> str:
    """Run configuration matched to a generated dataset.

    The step-length gain mirrors the generator's; q covers the realistic
    per-step drift of this detector (span bias plus heading wander), and r
    reflects the accuracy of the synthetic beacon fixes.
    """
    return (
        "[stride]\n"
        f"k = {scenario.weinberg_k!r}\n"
        "\n"
        "[fusion]\n"
        "q = 0.4\n"
        "r = 4.0\n"
        "smooth_a = 0.7\n"
    )


def _write_dataset(walk: synth.GeneratedWalk, scenario: synth.Scenario, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    sensors.write_imu_stream(walk.stream, out_dir / "imu.csv")
    sensors.write_beacons(walk.beacons, out_dir / "beacons.csv")
    write_matches(walk.matches, out_dir / "matches.jsonl")
    synth.write_truth(walk.truth, out_dir / "truth.csv")
    (out_dir / "scenario.toml").write_text(synth.scenario_to_toml(scenario), encoding="utf-8")
    (out_dir / "config.toml").write_text(_recommended_config_toml(scenario), encoding="utf-8")


def cmd_synth(args: argparse.Namespace) -> int:
    if bool(args.profile) == bool(args.scenario):
        raise ValidationError("exactly one of --profile or --scenario is required")
    if args.profile:
        scenario = synth.closed_loop_scenario(args.profile)
    else:
        scenario = synth.scenario_from_toml(Path(args.scenario).read_text(encoding="utf-8"))
    if args.seed is not None:
        from dataclasses import replace

        scenario = replace(scenario, rng_seed=args.seed)

    out_dir = Path(args.out)
    if args.monte_carlo:
        from dataclasses import replace

        for i in range(args.monte_carlo):
            variant = replace(scenario, rng_seed=scenario.rng_seed + i)
            _write_dataset(synth.generate(variant), variant, out_dir / f"mc_{i:03d}")
    else:
        _write_dataset(synth.generate(scenario), scenario, out_dir)
    _write_run_manifest(
        out_dir,
        "synth",
        {
            "profile": args.profile,
            "scenario": str(args.scenario) if args.scenario else None,
            "seed": scenario.rng_seed,
            "monte_carlo": args.monte_carlo,
        },
        None,
    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    records = fusion.load_trajectory(args.trajectory)
    truth = synth.load_truth(args.truth)
    truth_pos = [s.position for s in truth]
    errors_fused = evalkit.horizontal_error([r.x_fused for r in records], truth_pos)
    errors_pdr = evalkit.horizontal_error([r.x_pdr for r in records], truth_pos)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    evalkit.cdf_export(errors_fused, out_dir / "cdf.csv")
    evalkit.write_metrics(evalkit.metrics_summary(errors_fused), out_dir / "metrics.json")
    if not args.no_figures:
        report.save_trajectory_figure(records, out_dir / "trajectory.png", truth=truth)
        report.save_cdf_figure(
            {"fused": errors_fused, "dead reckoning": errors_pdr}, out_dir / "cdf.png"
        )
    _write_run_manifest(
        out_dir,
        "eval",
        {"trajectory": str(args.trajectory), "truth": str(args.truth)},
        None,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stridefuse",
        description="Dead reckoning + visual beacon fusion pipeline",
    )
    parser.add_argument("--version", action="version", version=f"stridefuse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the fusion pipeline on recorded inputs")
    p_run.add_argument("--imu", required=True, help="IMU CSV stream")
    p_run.add_argument("--matches", help="match JSONL from the recognizer")
    p_run.add_argument("--beacons", help="beacon database CSV")
    p_run.add_argument("--truth", help="ground truth CSV (enables error metrics)")
    p_run.add_argument("--config", help="run configuration TOML")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--origin", help="'lat,lon' origin for geographic beacon files")
    p_run.add_argument("--no-ges", action="store_true", help="disable the gross error gate")
    p_run.add_argument("--no-mdr", action="store_true", help="always trust the magnetometer")
    p_run.add_argument(
        "--first-pass",
        action="store_true",
        help="use the best-ranked gate survivor instead of the consistency vote",
    )
    p_run.add_argument(
        "--literal-sum",
        action="store_true",
        help="use the summed-history gate threshold variant",
    )
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_run.set_defaults(func=cmd_run)

    p_synth = sub.add_parser("synth", help="generate a synthetic walk dataset")
    p_synth.add_argument("--profile", choices=["sparse", "dense"], help="canonical scenario")
    p_synth.add_argument("--scenario", help="scenario TOML file")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, help="override the scenario seed")
    p_synth.add_argument(
        "--monte-carlo", type=int, metavar="N", help="generate N reseeded variants"
    )
    p_synth.set_defaults(func=cmd_synth)

    p_eval = sub.add_parser("eval", help="evaluate a trajectory CSV against ground truth")
    p_eval.add_argument("--trajectory", required=True, help="trajectory CSV from 'run'")
    p_eval.add_argument("--truth", required=True, help="ground truth CSV")
    p_eval.add_argument("--out", required=True, help="output directory")
    p_eval.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
