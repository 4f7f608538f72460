"""Command-line interface.

Subcommands (each takes one YAML config):

* simulate  - run once, write trajectory/snapshot CSVs and the check report
* sweep     - vanishing-diffusion sweep with uniformity check
* verify    - re-run the simulation and evaluate every estimate check,
              including delta-uniformity over verify.deltas
* mms       - manufactured-solution convergence orders
* stability - Gronwall perturbation growth probe

Exit codes: 0 all good, 2 the run completed but an enabled check failed,
1 anything that prevented a result (bad usage, bad config, IO failure).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__, kernels
from .config import RunConfig, parse_config
from .csvio import (write_checks_csv, write_checks_text, write_order_csv,
                    write_snapshots_csv, write_stability_csv, write_sweep_csv,
                    write_sweep_norms_csv, write_trajectory_csv)
from .errors import ConfigError, DriftclusterError
from .estimates import EstimateReport, run_trajectory_checks
from .experiments import delta_sweep, gronwall_stability, mms_order_study
from .stepping import run


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors (2 is reserved for checks)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="driftcluster",
                     description="finite-volume clustering model: "
                                 "simulation and verification harness")
    parser.add_argument("--version", action="version",
                        version=f"driftcluster {__version__} "
                                f"(kernels: {kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command")
    for name, doc in (
            ("simulate", "run once and check the a priori bounds"),
            ("sweep", "vanishing-diffusion convergence sweep"),
            ("verify", "re-run and evaluate every estimate check"),
            ("mms", "manufactured-solution order study"),
            ("stability", "Gronwall perturbation growth probe")):
        p = sub.add_parser(name, help=doc, description=doc)
        p.add_argument("config", help="path to the YAML run configuration")
        p.add_argument("--quiet", action="store_true",
                       help="suppress informational output")
        p.add_argument("--out-dir", default=None,
                       help="override output.dir from the config")
        p.add_argument("--seed", type=int, default=None,
                       help="override ic.seed (random_fourier preset only)")
    return parser


def _say(args, message):
    if not args.quiet:
        print(message)


def _print_checks(args, report: EstimateReport):
    for c in report.checks:
        line = (f"[{'PASS' if c.passed else 'FAIL'}] {c.name} ({c.law}): "
                f"worst margin {c.worst_margin:.6g} at t={c.time_of_worst:.6g}"
                f" (tolerance {c.tolerance:.6g})")
        if c.passed:
            _say(args, line)
        else:
            print(line, file=sys.stderr)


def _load(args) -> RunConfig:
    with open(args.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    if args.out_dir is not None:
        cfg = replace(cfg, output=replace(cfg.output, dir=args.out_dir))
    if args.seed is not None:
        if cfg.ic is not None and cfg.ic.preset == "random_fourier":
            cfg = replace(cfg, ic=replace(cfg.ic, seed=args.seed))
        else:
            print("note: --seed ignored (ic preset has no seed)",
                  file=sys.stderr)
    return cfg


def _need(cfg: RunConfig, command: str, *blocks: str):
    missing = [b for b in blocks if getattr(cfg, b) is None]
    if missing:
        raise ConfigError([f"{b}: section required by the "
                           f"'{command}' command" for b in missing])


def _out(cfg: RunConfig, name: str) -> str:
    import os
    return os.path.join(cfg.output.dir, name)


def _cmd_simulate(cfg: RunConfig, args) -> int:
    _need(cfg, "simulate", "ic", "step")
    tr = run(cfg.ic, cfg.params, cfg.step, cfg.grid,
             snapshot_stride=cfg.output.snapshot_stride,
             record_times=cfg.output.record_times)
    write_trajectory_csv(_out(cfg, "trajectory.csv"), tr)
    write_snapshots_csv(_out(cfg, "snapshots.csv"), tr)
    report = run_trajectory_checks(tr, cfg.params)
    write_checks_csv(_out(cfg, "checks.csv"), report)
    write_checks_text(_out(cfg, "checks.txt"), report)
    _print_checks(args, report)
    if tr.diverged:
        print(f"run diverged: {tr.error}", file=sys.stderr)
        return 2
    _say(args, f"simulate: {tr.n_steps} steps to t={tr.times[-1]:.6g}, "
               f"outputs in {cfg.output.dir}")
    return 0 if report.passed else 2


def _cmd_sweep(cfg: RunConfig, args) -> int:
    _need(cfg, "sweep", "ic", "step", "sweep")
    rep = delta_sweep(cfg.ic, cfg.params, cfg.sweep.deltas, cfg.sweep.times,
                      cfg.step, cfg.grid, kappa=cfg.sweep.kappa,
                      reference=cfg.sweep.reference,
                      workers=cfg.sweep.workers)
    write_sweep_csv(_out(cfg, "sweep.csv"), rep)
    write_sweep_norms_csv(_out(cfg, "sweep_norms.csv"), rep)
    if rep.diverged:
        print(f"sweep: diverged runs at delta={rep.diverged}",
              file=sys.stderr)
        return 2
    for j, t in enumerate(rep.times):
        _say(args, f"sweep t={t:g}: errors "
                   f"{[float(e) for e in rep.errors[:, j]]}, "
                   f"p={rep.fitted_p[j]:.3f}, "
                   f"monotone={'yes' if rep.monotone[j] else 'NO'}")
    _say(args, f"sweep: floor={rep.floor:.3e}, reference={rep.reference}, "
               f"shared schedule={'yes' if rep.schedule_ok else 'NO'}")
    u = rep.uniformity
    line = (f"[{'PASS' if u.passed else 'FAIL'}] {u.name}: worst ratio "
            f"{u.details['ratios'][u.details['worst_norm']]:.3f} "
            f"(kappa={u.details['kappa']:g})")
    if u.passed:
        _say(args, line)
    else:
        print(line, file=sys.stderr)
    return 0 if rep.passed else 2


def _cmd_verify(cfg: RunConfig, args) -> int:
    _need(cfg, "verify", "ic", "step")
    tr = run(cfg.ic, cfg.params, cfg.step, cfg.grid,
             snapshot_stride=cfg.output.snapshot_stride,
             record_times=cfg.output.record_times)
    report = run_trajectory_checks(tr, cfg.params)
    checks = list(report.checks)
    sweep_rep = delta_sweep(cfg.ic, cfg.params, cfg.verify.deltas,
                            [cfg.step.t_end], cfg.step, cfg.grid,
                            kappa=cfg.verify.kappa)
    checks.append(sweep_rep.uniformity)
    full = EstimateReport(checks=checks)
    write_checks_csv(_out(cfg, "checks.csv"), full)
    write_checks_text(_out(cfg, "checks.txt"), full)
    _print_checks(args, full)
    if tr.diverged:
        print(f"run diverged: {tr.error}", file=sys.stderr)
        return 2
    return 0 if full.passed else 2


def _cmd_mms(cfg: RunConfig, args) -> int:
    _need(cfg, "mms", "mms")
    rep = mms_order_study(cfg.params, cfg.mms.resolutions,
                          t_final=cfg.mms.t_final,
                          dt_over_h=cfg.mms.dt_over_h)
    write_order_csv(_out(cfg, "order.csv"), rep)
    _say(args, f"mms coupled: order {rep.coupled_order:.3f} "
               f"(R^2 {rep.coupled_r2:.4f}), errors {rep.coupled_l2}")
    _say(args, f"mms elliptic: order {rep.elliptic_order:.3f}, "
               f"errors {rep.elliptic_sup}")
    ok = (rep.coupled_order >= cfg.mms.min_order
          and rep.coupled_r2 >= cfg.mms.min_r2
          and cfg.mms.elliptic_order_min <= rep.elliptic_order
          <= cfg.mms.elliptic_order_max
          and rep.monotone_coupled and rep.monotone_elliptic)
    if not ok:
        print("mms: order criteria not met", file=sys.stderr)
    return 0 if ok else 2


def _cmd_stability(cfg: RunConfig, args) -> int:
    _need(cfg, "stability", "ic", "step", "stability")
    rep = gronwall_stability(cfg.ic, cfg.params, cfg.stability.etas,
                             cfg.step, cfg.grid,
                             center=cfg.stability.center,
                             width=cfg.stability.width,
                             n_times=cfg.stability.n_times,
                             envelope_slack=cfg.stability.envelope_slack,
                             linearity_tol=cfg.stability.linearity_tol)
    write_stability_csv(_out(cfg, "stability.csv"), rep)
    _say(args, f"stability: C_hat={rep.c_hat:.4f}, envelope margin "
               f"{rep.envelope_margin:.3e} "
               f"({'ok' if rep.envelope_ok else 'VIOLATED'})")
    _say(args, f"stability: linearity ratios {rep.linearity_ratios} "
               f"({'ok' if rep.linearity_ok else 'VIOLATED'})")
    if not rep.passed:
        print("stability: Gronwall criteria not met", file=sys.stderr)
    return 0 if rep.passed else 2


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
    "mms": _cmd_mms,
    "stability": _cmd_stability,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("driftcluster: error: a subcommand is required",
              file=sys.stderr)
        return 1
    try:
        cfg = _load(args)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"driftcluster: error: {exc}", file=sys.stderr)
        return 1
    except DriftclusterError as exc:
        print(f"driftcluster: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
