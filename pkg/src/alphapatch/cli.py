"""Command line entry point: simulate, verify-lemmas and scenario.

All artifacts are written with fixed float formatting and no timestamps, so
identical inputs give byte-identical files.  Artifacts are staged in a
temporary directory and moved into ``--out`` only when the command succeeds.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
import tempfile
import warnings
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .config import PRESETS, SimulationConfig, make_config, parse_config, preset, with_overrides
from .curve import Contour, contour_from_csv, contour_from_json, contour_to_json, fmt
from .diagnostics import records_to_csv
from .errors import AlphaPatchError, ValidationError
from .evolve import RunResult, SimulationState, build_initial, run
from .singularity import (
    TrapezoidBarrier,
    bad_bound,
    barrier_X,
    barrier_containment,
    build_scenario_initial_data,
    rectangle,
    region_velocity,
    scenario_sign_check,
    sign_threshold,
)

RUN_SUMMARY_SCHEMA = "alphapatch.run-summary/1"
LEMMA_REPORT_SCHEMA = "alphapatch.lemma-report/1"
SIGN_CHECK_SCHEMA = "alphapatch.sign-check/1"
SNAPSHOT_SCHEMA = "alphapatch.snapshot/1"
SCHEMA_DIR = Path(__file__).with_name("schemas")


class CommandError(Exception):
    """Input problem reported to the user with a nonzero exit status."""


def resolve_threads(flag: int | None) -> int:
    """--threads, else ALPHAPATCH_THREADS, else 1."""
    if flag is not None:
        n = flag
    else:
        env = os.environ.get("ALPHAPATCH_THREADS", "").strip()
        try:
            n = int(env) if env else 1
        except ValueError:
            raise CommandError(f"ALPHAPATCH_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise CommandError(f"thread count must be positive, got {n}")
    return n


def _dump(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(v: float | None) -> float | str | None:
    """JSON-safe float: infinities become strings."""
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


class _Staging:
    """Collect output files and publish them atomically on success."""

    def __init__(self, out: Path):
        self.out = out
        self.files: dict[str, str] = {}

    def write(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> list[str]:
        self.out.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=".alphapatch-", dir=self.out.parent))
        try:
            for name, text in self.files.items():
                path = tmp / name
                path.parent.mkdir(parents=True, exist_ok=True)
                with open(path, "w", newline="\n") as fh:
                    fh.write(text)
            self.out.mkdir(parents=True, exist_ok=True)
            for name in self.files:
                dest = self.out / name
                dest.parent.mkdir(parents=True, exist_ok=True)
                os.replace(tmp / name, dest)
        finally:
            shutil.rmtree(tmp, ignore_errors=True)
        return sorted(self.files)


# ------------------------------------------------------------------ config

def load_config(args: argparse.Namespace) -> SimulationConfig:
    base = preset(args.preset) if args.preset else None
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise CommandError(f"config file not found: {path}")
        cfg = parse_config(path, base)
    elif base is not None:
        cfg = base
    else:
        cfg = make_config()
    if args.seed is not None:
        cfg = with_overrides(cfg, seed=args.seed)
    if args.out:
        cfg = with_overrides(cfg, output_dir=str(args.out))
    return cfg


def load_contours(paths: list[str]) -> list[Contour]:
    contours = []
    for i, p in enumerate(paths):
        path = Path(p)
        if not path.is_file():
            raise CommandError(f"input contour not found: {path}")
        text = path.read_text()
        try:
            if path.suffix.lower() == ".json":
                c = contour_from_json(text)
            else:
                c = contour_from_csv(text, label=path.stem or f"patch{i}")
        except (ValueError, KeyError) as exc:
            raise CommandError(f"cannot read contour {path}: {exc}") from exc
        contours.append(c)
    return contours


# ------------------------------------------------------------------ artifacts

def snapshot_doc(t: float, system, index: int) -> dict[str, Any]:
    return {
        "schema": SNAPSHOT_SCHEMA,
        "time": t,
        "index": index,
        "strengths": list(system.strengths),
        "geometry": system.geometry.value,
        "contours": [contour_to_json(c, {"time": t}) for c in system.contours],
    }


def run_summary(command: str, cfg: SimulationConfig, result: RunResult, threads: int,
                artifacts: list[str], extra: dict | None = None) -> dict[str, Any]:
    recs = result.records
    peak_sup = max((p.sup_F for r in recs for p in r.patches), default=math.nan)
    min_delta = min((r.delta for r in recs), default=math.inf)
    doc = {
        "schema": RUN_SUMMARY_SCHEMA,
        "version": __version__,
        "command": command,
        "stop_reason": result.stop_reason,
        "message": result.message,
        "final_time": result.final.time,
        "steps": result.final.step_count,
        "final_criterion": result.final.cumulative_criterion,
        "peak_sup_F": _num(peak_sup),
        "min_delta": _num(min_delta),
        "max_mirror_defect": _num(max((d for _, d in result.mirror_defects), default=None)),
        "n_records": len(recs),
        "threads": threads,
        "seed": cfg.seed,
        "config": {k: v for k, v in cfg.to_dict().items() if k != "output_dir"},
        "artifacts": artifacts,
    }
    if extra:
        doc.update(extra)
    return doc


def _simulation_files(stage: _Staging, result: RunResult) -> list[str]:
    names = ["diagnostics.csv"]
    stage.write("diagnostics.csv", records_to_csv(result.records))
    for i, (t, system) in enumerate(result.snapshots):
        name = f"snapshots/snapshot_{i:04d}.json"
        stage.write(name, _dump(snapshot_doc(t, system, i)))
        names.append(name)
    return names


# ------------------------------------------------------------------ commands

def command_simulate(cfg: SimulationConfig, contour_paths: list[str], threads: int) -> dict:
    contours = load_contours(contour_paths) if contour_paths else None
    if cfg.initial.get("kind") == "files" and not contours:
        raise CommandError("config asks for contour files but none were given")
    initial = build_initial(cfg, contours)
    result = run(cfg, initial)
    stage = _Staging(Path(cfg.output_dir))
    names = _simulation_files(stage, result)
    names.append("run_summary.json")
    summary = run_summary("simulate", cfg, result, threads, sorted(names))
    stage.write("run_summary.json", _dump(summary))
    stage.commit()
    return summary


def lemma_cells(m_list, beta_grid, n_samples: int, quad: int, seed: int):
    """Bad-part quadrature against the closed-form bounds on random points.

    theta = 1 on the box (0, 2 x1) x (0, 2 x2); the bad part keeps the strip
    below x (axis 1) or left of x (axis 2).  Axis 1 samples satisfy
    x2 <= m x1 and the bound is an upper bound; axis 2 samples satisfy
    m x1 <= x2 and the bound is a lower bound.  Slack >= 0 means the
    inequality holds.
    """
    rng = np.random.default_rng(seed)
    cells = []
    for m in m_list:
        for beta in beta_grid:
            for axis in (1, 2):
                for _ in range(n_samples):
                    u, v = rng.uniform(0.05, 1.0, size=2)
                    if axis == 1:
                        x = (u, m * u * v)
                    else:
                        x = (v / m * u, u)
                    cell: dict[str, Any] = {"axis": axis, "m": m, "beta": beta,
                                            "x": [float(x[0]), float(x[1])]}
                    try:
                        reg = [rectangle(0.0, 2 * x[0], 0.0, 2 * x[1])]
                        val = region_velocity(axis, "bad", x, reg, beta, quad)
                        bound = bad_bound(axis, x, m, beta)
                        slack = bound - val if axis == 1 else val - bound
                        cell.update(quadrature=val, bound=bound, slack=slack, error=None)
                    except AlphaPatchError as exc:
                        cell.update(quadrature=None, bound=None, slack=None,
                                    error=f"{type(exc).__name__}: {exc}")
                    cells.append(cell)
    return cells


def command_verify_lemmas(m_list, beta_grid, n_samples: int, quad: int, seed: int,
                          out: Path, threads: int) -> dict:
    cells = lemma_cells(m_list, beta_grid, n_samples, quad, seed)
    thresholds = []
    for m in m_list:
        for axis in (1, 2):
            entry: dict[str, Any] = {"axis": axis, "m": m}
            try:
                entry.update(beta_star=sign_threshold(axis, m), error=None)
            except AlphaPatchError as exc:
                entry.update(beta_star=None, error=f"{type(exc).__name__}: {exc}")
            thresholds.append(entry)
    slacks = [c["slack"] for c in cells if c["slack"] is not None]
    report = {
        "schema": LEMMA_REPORT_SCHEMA,
        "seed": seed,
        "quad": quad,
        "threads": threads,
        "m_list": list(m_list),
        "beta_grid": list(beta_grid),
        "cells": cells,
        "thresholds": thresholds,
        "min_slack": min(slacks) if slacks else None,
        "n_errors": sum(c["error"] is not None for c in cells),
    }
    stage = _Staging(out)
    stage.write("lemma_report.json", _dump(report))
    stage.commit()
    return report


def sign_check_doc(check, barrier: TrapezoidBarrier) -> dict[str, Any]:
    return {
        "schema": SIGN_CHECK_SCHEMA,
        "epsilon": barrier.epsilon, "beta": barrier.beta, "m": barrier.m, "a": barrier.a,
        "X0": barrier_X(0.0, barrier),
        "vertical": [{"x": [float(p[0]), float(p[1])], "u1": float(u)}
                     for p, u in zip(check.vertical_points, check.u1)],
        "sloped": [{"x": [float(p[0]), float(p[1])], "u2": float(u)}
                   for p, u in zip(check.sloped_points, check.u2)],
        "u1_negative": check.u1_negative,
        "u2_positive": check.u2_positive,
        "warnings": check.coefficient_warnings,
    }


def command_scenario(cfg: SimulationConfig, epsilon: float | None, beta: float | None,
                     threads: int) -> dict:
    if epsilon is not None:
        cfg = with_overrides(cfg, epsilon=epsilon)
    if beta is not None:
        cfg = with_overrides(cfg, alpha=2.0 * beta)
    b = cfg.beta
    notes = []
    if b >= 1.0 / 6.0:
        notes.append(f"beta={b:g} lies outside (0, 1/6), where the construction is stated")
    initial = build_scenario_initial_data(cfg.epsilon, cfg.m, cfg.a, cfg.n_nodes,
                                          cfg.smoothing, cfg.alpha, cfg.normalization)
    barrier = TrapezoidBarrier(cfg.epsilon, cfg.m, cfg.a, cfg.barrier_C, b)
    check = scenario_sign_check(initial, barrier, cfg.scenario_samples, quad=cfg.quad_order,
                                quad_n=cfg.quad_n)
    for w in check.coefficient_warnings + notes:
        warnings.warn(w, stacklevel=2)

    T = barrier.collision_time
    rows = ["time,X,contained,margin"]

    def observe(state: SimulationState) -> None:
        if state.time > T:
            return
        ok, margin = barrier_containment(state.system, barrier, state.time,
                                         quad_n=cfg.quad_n)
        rows.append(f"{fmt(state.time)},{fmt(barrier_X(state.time, barrier))},"
                    f"{int(ok)},{fmt(margin)}")

    result = run(cfg, initial, observe)
    stage = _Staging(Path(cfg.output_dir))
    names = _simulation_files(stage, result)
    stage.write("sign_check.json", _dump(sign_check_doc(check, barrier)))
    stage.write("containment.csv", "\n".join(rows) + "\n")
    names += ["sign_check.json", "containment.csv", "run_summary.json"]
    summary = run_summary("scenario", cfg, result, threads, sorted(names), {
        "collision_time": T,
        "sign_check": {"u1_negative": check.u1_negative, "u2_positive": check.u2_positive},
        "warnings": check.coefficient_warnings + notes,
    })
    stage.write("run_summary.json", _dump(summary))
    stage.commit()
    return summary


# ------------------------------------------------------------------ parser

def _floats(text: str) -> list[float]:
    text = text.strip()
    return [float(s) for s in text.split(",") if s.strip()] if text else []


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--preset", metavar="NAME", choices=sorted(PRESETS),
                   help="start from a shipped preset")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--threads", metavar="N", type=int, default=None,
                   help="worker threads (default: $ALPHAPATCH_THREADS or 1)")
    p.add_argument("--seed", metavar="N", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphapatch",
                                     description="Contour dynamics for alpha-patches.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="evolve patches and write diagnostics")
    _common(sim)
    sim.add_argument("contours", nargs="*", metavar="CONTOUR",
                     help="initial contour files (CSV gamma,x1,x2 or contour JSON)")

    lem = sub.add_parser("verify-lemmas", help="check the velocity lemmas by quadrature")
    _common(lem)
    lem.add_argument("--m-list", type=_floats, default=[5.0], metavar="M[,M...]")
    lem.add_argument("--beta-grid", type=_floats, default=[0.05, 0.1, 0.15], metavar="B[,B...]")
    lem.add_argument("--x-samples", type=int, default=5, metavar="N")
    lem.add_argument("--quad", type=int, default=8, metavar="Q")

    sce = sub.add_parser("scenario", help="odd-symmetric singularity scenario")
    _common(sce)
    sce.add_argument("--epsilon", type=float, default=None)
    sce.add_argument("--beta", type=float, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = resolve_threads(args.threads)
        if args.command == "simulate":
            cfg = load_config(args)
            summary = command_simulate(cfg, args.contours, threads)
            print(f"stop_reason={summary['stop_reason']} t={summary['final_time']:.6g} "
                  f"steps={summary['steps']} out={cfg.output_dir}")
        elif args.command == "verify-lemmas":
            seed = 0 if args.seed is None else args.seed
            out = Path(args.out or "out")
            if args.config and not Path(args.config).is_file():
                raise CommandError(f"config file not found: {args.config}")
            report = command_verify_lemmas(args.m_list, args.beta_grid, args.x_samples,
                                           args.quad, seed, out, threads)
            print(f"cells={len(report['cells'])} errors={report['n_errors']} "
                  f"min_slack={report['min_slack']}")
            for t in report["thresholds"]:
                print(f"axis={t['axis']} m={t['m']:g} beta*={t['beta_star']}")
        else:
            if not args.config and not args.preset:
                args.preset = "krzy-scenario"
            cfg = load_config(args)
            if cfg.initial.get("kind") != "scenario":
                cfg = with_overrides(cfg, initial={"kind": "scenario"}, geometry="half-plane")
            summary = command_scenario(cfg, args.epsilon, args.beta, threads)
            print(f"stop_reason={summary['stop_reason']} "
                  f"u1_negative={summary['sign_check']['u1_negative']} "
                  f"u2_positive={summary['sign_check']['u2_positive']} out={cfg.output_dir}")
    except ValidationError as exc:
        print("invalid configuration:", file=sys.stderr)
        for p in exc.problems:
            print(f"  {p}", file=sys.stderr)
        return 2
    except (CommandError, AlphaPatchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
