"""Command-line entry points.

Subcommands: simulate, sweep, fit-decay, verify-kernels, verify-lemmas,
compare-mhd.  Shared flags (--config, --output, --seed, --threads) may
also be set through environment variables with the ``MHDWAVE_`` prefix
(e.g. ``MHDWAVE_OUTPUT``); flags win over the environment.

Every invocation writes a ``manifest.jsonl`` naming the config hash and
the emitted files.  CSV outputs are byte-deterministic for a fixed config
and seed; wall-clock timestamps appear only in the manifest.

Exit codes: 0 success, 2 configuration error, 3 solver blow-up or step
failure, 4 data/usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, config_hash, parse_config_file, serialize_config
from .decay import (
    DecayExperimentConfig,
    fit_power_law,
    gamma_prefactor_scan,
    run_decay_experiment,
    singular_limit_experiment,
    verify_expintegral,
)
from .errors import (
    BlowUpError,
    ConfigurationError,
    DataError,
    MhdWaveError,
    StepSizeError,
    WindowError,
)
from .initial import make_initial_data
from .kernels import BoundSampleSpec, verify_kernel_bounds
from .solver import SolverConfig, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_DATA = 4

ENV_PREFIX = "MHDWAVE_"


def _env_default(name: str):
    return os.environ.get(ENV_PREFIX + name.upper())


class _Manifest:
    def __init__(self, outdir: Path, cfg: RunConfig | None, args_echo: dict):
        self.outdir = outdir
        self.rows = []
        head = {
            "kind": "run",
            "version": __version__,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "args": args_echo,
        }
        if cfg is not None:
            head["config_hash"] = config_hash(cfg)
            head["config"] = json.loads(serialize_config(cfg))
        self.rows.append(head)
        self.config_hash = head.get("config_hash")

    def add_file(self, path: Path, kind: str) -> None:
        self.rows.append({"kind": kind, "path": path.name, "config_hash": self.config_hash})

    def write(self) -> None:
        self.outdir.mkdir(parents=True, exist_ok=True)
        with open(self.outdir / "manifest.jsonl", "w", encoding="utf-8") as fh:
            for row in self.rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")


def _write_csv(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)


def _float_cell(x) -> str:
    return repr(float(x))


def _series_rows(traj, norm_ids):
    yield ["t"] + norm_ids
    for i, t in enumerate(traj.times):
        yield [_float_cell(t)] + [_float_cell(traj.snapshots[i][k]) for k in norm_ids]


def _load_run_config(args) -> RunConfig:
    if args.config:
        cfg = parse_config_file(args.config)
    else:
        cfg = RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.output:
        cfg.output_dir = args.output
    return cfg


def _experiment_config(cfg: RunConfig) -> DecayExperimentConfig:
    return DecayExperimentConfig(
        grid=cfg.grid(), gamma=cfg.gamma, dt=cfg.dt, t_end=cfg.t_end, scheme=cfg.scheme,
        family=cfg.family, params=cfg.initial_params(), q_list=cfg.q_list,
        s_list_u=cfg.s_list_u, s_list_b=cfg.s_list_b, m=cfg.m, c_label=cfg.c_label,
        window=cfg.window, snapshot_every=cfg.snapshot_every,
    )


def _norm_ids(cfg: RunConfig):
    ids = []
    for q in cfg.q_list:
        ids += [f"u_L{q:g}", f"b_L{q:g}"]
    ids += [f"u_H{s:g}" for s in cfg.s_list_u]
    ids += [f"b_H{s:g}" for s in cfg.s_list_b]
    return ids


def _fit_summary_rows(comparisons):
    yield ["norm_id", "exponent", "theory", "delta", "theory_lq", "r2",
           "window_lo", "window_hi", "non_power_law"]
    for c in comparisons:
        if c.fit is None:
            yield [c.norm_id, "", "", "", "", "", "", "", "trivial"]
            continue
        yield [
            c.norm_id,
            _float_cell(c.fit.exponent),
            _float_cell(c.theory.exponent) if c.theory else "",
            _float_cell(c.delta) if c.delta is not None else "",
            _float_cell(c.theory_lq.exponent) if c.theory_lq else "",
            _float_cell(c.fit.r2),
            _float_cell(c.fit.window[0]),
            _float_cell(c.fit.window[1]),
            str(c.fit.non_power_law).lower(),
        ]


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    outdir = Path(cfg.output_dir)
    manifest = _Manifest(outdir, cfg, {"command": "simulate"})
    grid = cfg.grid()
    solver_cfg = SolverConfig(
        gamma=cfg.gamma, dt=cfg.dt, t_end=cfg.t_end, grid=grid, scheme=cfg.scheme,
        cfl_safety=cfg.cfl_safety, nonlinear=cfg.nonlinear,
        snapshot_every=cfg.snapshot_every,
    )
    from .diagnostics import norm_observer

    observer = norm_observer(cfg.q_list, cfg.s_list_u, cfg.s_list_b, cfg.m, cfg.gamma)
    if args.resume:
        state, gamma_ck = load_checkpoint(args.resume)
        if abs(gamma_ck - cfg.gamma) > 1e-15 * max(1.0, abs(cfg.gamma)):
            raise ConfigurationError(
                f"checkpoint gamma {gamma_ck} does not match config gamma {cfg.gamma}",
                path="physics.gamma",
            )
        if state.grid != grid:
            raise ConfigurationError("checkpoint grid does not match config grid",
                                     path="grid")
        initial = (state.u_hat, state.b_hat, state.bt_hat)
        t_offset = state.t
        solver_cfg = replace(solver_cfg, t_end=max(0.0, cfg.t_end - t_offset))
    else:
        initial = make_initial_data(cfg.family, cfg.initial_params(), grid)
        t_offset = 0.0

    ck_paths = []

    def sink(state):
        p = outdir / f"checkpoint_t{state.t + t_offset:012.6f}.mhdw"
        outdir.mkdir(parents=True, exist_ok=True)
        shifted = replace_time(state, state.t + t_offset)
        save_checkpoint(p, shifted, cfg.gamma)
        ck_paths.append(p)

    traj = run(solver_cfg, initial, observer,
               checkpoint_every=args.checkpoint_every, checkpoint_sink=sink)
    ids = _norm_ids(cfg)
    rows = [["t"] + ids]
    for i, t in enumerate(traj.times):
        rows.append([_float_cell(t + t_offset)] + [_float_cell(traj.snapshots[i][k]) for k in ids])
    series = outdir / "series.csv"
    _write_csv(series, rows)
    manifest.add_file(series, "series")
    for p in ck_paths:
        manifest.add_file(p, "checkpoint")
    manifest.write()
    return EXIT_OK


def replace_time(state, t):
    out = state.copy()
    out.t = t
    return out


def cmd_sweep(args) -> int:
    cfg = _load_run_config(args)
    outdir = Path(cfg.output_dir)
    manifest = _Manifest(outdir, cfg, {"command": "sweep", "gammas": args.gammas})
    gammas = sorted(float(x) for x in args.gammas.split(","))
    base = _experiment_config(cfg)
    executor = ThreadPoolExecutor(max_workers=args.threads) if args.threads > 1 else None
    try:
        sweep = gamma_prefactor_scan(gammas, base, executor)
    finally:
        if executor:
            executor.shutdown()
    ids = _norm_ids(cfg)
    rows = [["gamma", "norm_id", "exponent", "theory", "r2", "prefactor", "final_value"]]
    for g in sweep.gammas:
        for nid in ids:
            c = sweep.fits[g][nid]
            rows.append([
                _float_cell(g), nid,
                _float_cell(c.fit.exponent),
                _float_cell(c.theory.exponent) if c.theory else "",
                _float_cell(c.fit.r2),
                _float_cell(np.exp(c.fit.log_prefactor)),
                _float_cell(sweep.final_norms[g][nid]),
            ])
    sweep_csv = outdir / "sweep.csv"
    _write_csv(sweep_csv, rows)
    manifest.add_file(sweep_csv, "sweep")
    # prefactor curve per tracked norm, for offline plotting
    curve = [["norm_id"] + [_float_cell(g) for g in sweep.gammas]]
    for nid in ids:
        curve.append([nid] + [_float_cell(np.exp(sweep.fits[g][nid].fit.log_prefactor))
                              for g in sweep.gammas])
    curve_csv = outdir / "prefactor_curve.csv"
    _write_csv(curve_csv, curve)
    manifest.add_file(curve_csv, "prefactor_curve")
    manifest.write()
    return EXIT_OK


def cmd_fit_decay(args) -> int:
    cfg = _load_run_config(args)
    outdir = Path(cfg.output_dir)
    manifest = _Manifest(outdir, cfg, {"command": "fit-decay", "series": args.series})
    with open(args.series, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    if header[0] != "t":
        raise DataError("series CSV must have a leading t column")
    t = data[:, 0]
    window = cfg.window if cfg.window else (float(t[1]), float(t[-1]))
    from .decay import _theory_pair  # same pairing as the live experiment

    base = _experiment_config(cfg)
    rows = [["norm_id", "exponent", "theory", "delta", "r2", "window_lo", "window_hi"]]
    for j, nid in enumerate(header[1:], start=1):
        fit = fit_power_law(zip(t, data[:, j]), window)
        try:
            theory, _ = _theory_pair(nid, base)
            theory_val = theory.exponent
            delta = fit.exponent - theory_val
            rows.append([nid, _float_cell(fit.exponent), _float_cell(theory_val),
                         _float_cell(delta), _float_cell(fit.r2),
                         _float_cell(window[0]), _float_cell(window[1])])
        except (ValueError, MhdWaveError):
            rows.append([nid, _float_cell(fit.exponent), "", "", _float_cell(fit.r2),
                         _float_cell(window[0]), _float_cell(window[1])])
    out = outdir / "fit_summary.csv"
    _write_csv(out, rows)
    manifest.add_file(out, "fit_summary")
    manifest.write()
    return EXIT_OK


def cmd_verify_kernels(args) -> int:
    cfg = _load_run_config(args)
    outdir = Path(cfg.output_dir)
    manifest = _Manifest(outdir, cfg, {"command": "verify-kernels"})
    spec = BoundSampleSpec()
    report = verify_kernel_bounds(cfg.gamma, spec)
    refined = verify_kernel_bounds(cfg.gamma, spec.refined())
    out = outdir / "kernel_bounds.csv"
    _write_csv(out, report.to_csv_rows())
    manifest.add_file(out, "kernel_bounds")
    ref_out = outdir / "kernel_bounds_refined.csv"
    _write_csv(ref_out, refined.to_csv_rows())
    manifest.add_file(ref_out, "kernel_bounds_refined")
    manifest.write()
    return EXIT_OK


def cmd_verify_lemmas(args) -> int:
    cfg = _load_run_config(args)
    outdir = Path(cfg.output_dir)
    manifest = _Manifest(outdir, cfg, {"command": "verify-lemmas"})
    report = verify_expintegral()
    for ineq in ("p-1", "p-2", "p-3"):
        out = outdir / f"expintegral_{ineq}.csv"
        _write_csv(out, report.to_csv_rows(ineq))
        manifest.add_file(out, f"expintegral_{ineq}")
    stable = report.stable()
    summary = outdir / "expintegral_summary.csv"
    rows = [["case", "regime", "C_emp", "C_emp_refined", "stable_1pct"]]
    for key, v in sorted(report.c_emp.items()):
        rows.append([key[0], key[1], repr(float(v)), repr(float(report.c_emp_refined[key])),
                     str(stable).lower()])
    _write_csv(summary, rows)
    manifest.add_file(summary, "expintegral_summary")
    manifest.write()
    return EXIT_OK


def cmd_compare_mhd(args) -> int:
    cfg = _load_run_config(args)
    outdir = Path(cfg.output_dir)
    gammas = [float(x) for x in args.gammas.split(",")]
    manifest = _Manifest(outdir, cfg, {"command": "compare-mhd", "gammas": gammas,
                                       "T": args.T})
    base = _experiment_config(cfg)
    gs, errs = singular_limit_experiment(gammas, args.T, base)
    rows = [["gamma", "error", "ratio_to_previous"]]
    for i, (g, e) in enumerate(zip(gs, errs)):
        ratio = errs[i] / errs[i - 1] if i else ""
        rows.append([_float_cell(g), _float_cell(e),
                     _float_cell(ratio) if ratio != "" else ""])
    out = outdir / "singular_limit.csv"
    _write_csv(out, rows)
    manifest.add_file(out, "singular_limit")
    manifest.write()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhdwave",
        description="Damped wave-type MHD pseudo-spectral simulator and verification harness",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=_env_default("config"),
                       help="JSON config file (MHDWAVE_CONFIG)")
        p.add_argument("--output", default=_env_default("output"),
                       help="output directory (MHDWAVE_OUTPUT)")
        seed_env = _env_default("seed")
        p.add_argument("--seed", type=int,
                       default=int(seed_env) if seed_env else None,
                       help="seed override (MHDWAVE_SEED)")
        threads_env = _env_default("threads")
        p.add_argument("--threads", type=int,
                       default=int(threads_env) if threads_env else 1,
                       help="sweep concurrency; results identical per N (MHDWAVE_THREADS)")

    p = sub.add_parser("simulate", help="run one simulation, emit the norm series")
    common(p)
    p.add_argument("--resume", help="checkpoint file to continue from")
    p.add_argument("--checkpoint-every", type=int, default=None,
                   help="write a checkpoint every N steps")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="gamma sweep of the decay experiment")
    common(p)
    p.add_argument("--gammas", default="0.25,0.5,1.0", help="comma-separated gamma list")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit-decay", help="fit power laws to an existing series CSV")
    common(p)
    p.add_argument("series", help="series CSV produced by simulate")
    p.set_defaults(func=cmd_fit_decay)

    p = sub.add_parser("verify-kernels", help="empirical kernel-bound constants")
    common(p)
    p.set_defaults(func=cmd_verify_kernels)

    p = sub.add_parser("verify-lemmas", help="exponential-integral inequality constants")
    common(p)
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("compare-mhd", help="singular-limit comparison against gamma = 0")
    common(p)
    p.add_argument("--gammas", default="0.1,0.05,0.025")
    p.add_argument("--T", type=float, default=5.0)
    p.set_defaults(func=cmd_compare_mhd)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        print(json.dumps({"error": "configuration", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, StepSizeError) as exc:
        print(json.dumps({"error": "solver", "message": str(exc),
                          "t": getattr(exc, "t", None)}), file=sys.stderr)
        return EXIT_SOLVER
    except (DataError, WindowError, MhdWaveError) as exc:
        print(json.dumps({"error": "data", "message": str(exc)}), file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
