"""CSV and text serialization of trajectories and reports.

Floats are written with 17 significant digits (%.17g), enough to round-trip
IEEE doubles exactly, so identical runs produce byte-identical files.  All
files use "\n" line endings and carry a header row; column orders are fixed
and documented in the README.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .stepping import DIAGNOSTICS, Snapshot, Trajectory


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _open_writer(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_trajectory_csv(path, tr: Trajectory) -> None:
    """Per-state diagnostics: t, then the DIAGNOSTICS columns."""
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(("t",) + DIAGNOSTICS)
        for k in range(tr.times.size):
            writer.writerow([_fmt(tr.times[k])]
                            + [_fmt(v) for v in tr.data[k]])


def write_snapshots_csv(path, tr: Trajectory) -> None:
    """Recorded states: one (t, x, u, phi) row per cell per snapshot."""
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(("t", "x", "u", "phi"))
        x = tr.grid.centers
        for snap in tr.snapshots:
            for i in range(x.size):
                writer.writerow((_fmt(snap.t), _fmt(x[i]),
                                 _fmt(snap.u[i]), _fmt(snap.phi[i])))


def read_snapshots_csv(path) -> list[Snapshot]:
    """Inverse of write_snapshots_csv (exact round trip)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header != ["t", "x", "u", "phi"]:
        raise ValueError(f"unexpected snapshot header: {header}")
    snaps: list[Snapshot] = []
    current_t = None
    us: list[float] = []
    phis: list[float] = []

    def flush():
        if current_t is not None:
            snaps.append(Snapshot(t=current_t, u=np.array(us),
                                  phi=np.array(phis)))

    for row in body:
        t = float(row[0])
        if current_t is None or t != current_t:
            flush()
            current_t, us, phis = t, [], []
        us.append(float(row[2]))
        phis.append(float(row[3]))
    flush()
    return snaps


def write_checks_csv(path, report) -> None:
    """EstimateReport rows: name, law, passed, margin, time, tolerance."""
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(("name", "law", "passed", "worst_margin",
                         "time_of_worst", "tolerance"))
        for c in report.checks:
            writer.writerow((c.name, c.law, _fmt(c.passed),
                             _fmt(c.worst_margin), _fmt(c.time_of_worst),
                             _fmt(c.tolerance)))


def write_checks_text(path, report) -> None:
    """Human-readable companion to write_checks_csv, details included."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    lines = []
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"[{status}] {c.name} ({c.law}): "
                     f"worst margin {_fmt(c.worst_margin)} at "
                     f"t={_fmt(c.time_of_worst)}, tolerance {_fmt(c.tolerance)}")
        for key in sorted(c.details):
            lines.append(f"    {key} = {c.details[key]}")
    lines.append("overall: " + ("PASS" if report.passed else "FAIL"))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(path, rep) -> None:
    """One row per (delta, time); floor and per-time fit repeated per row."""
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(("delta", "time", "sup_error", "floor",
                         "fitted_p", "monotone_above_floor"))
        for i, d in enumerate(rep.deltas):
            for j, t in enumerate(rep.times):
                p = rep.fitted_p[j] if j < len(rep.fitted_p) else np.nan
                mono = (rep.monotone[j] if j < len(rep.monotone) else False)
                writer.writerow((_fmt(d), _fmt(t), _fmt(rep.errors[i, j]),
                                 _fmt(rep.floor), _fmt(p), _fmt(mono)))


def write_sweep_norms_csv(path, rep) -> None:
    """Max-in-time norms per delta, as fed to the uniformity check."""
    fh, writer = _open_writer(path)
    with fh:
        names = sorted({k for v in rep.norms_by_delta.values() for k in v})
        writer.writerow(("delta",) + tuple(names))
        for d in sorted(rep.norms_by_delta, reverse=True):
            row = [_fmt(d)] + [_fmt(rep.norms_by_delta[d][k]) for k in names]
            writer.writerow(row)


def write_order_csv(path, rep) -> None:
    """One row per resolution; fitted orders repeated per row."""
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(("n", "h", "dt", "coupled_l2", "coupled_sup",
                         "phi_sup_err", "coupled_order", "coupled_r2",
                         "elliptic_sup", "elliptic_order", "elliptic_r2"))
        for k, n in enumerate(rep.resolutions):
            writer.writerow((
                _fmt(n), _fmt(rep.hs[k]), _fmt(rep.dts[k]),
                _fmt(rep.coupled_l2[k]), _fmt(rep.coupled_sup[k]),
                _fmt(rep.phi_sup_err[k]), _fmt(rep.coupled_order),
                _fmt(rep.coupled_r2), _fmt(rep.elliptic_sup[k]),
                _fmt(rep.elliptic_order), _fmt(rep.elliptic_r2)))


def write_stability_csv(path, rep) -> None:
    """One row per (eta, time) with the fitted envelope alongside."""
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(("eta", "time", "separation", "envelope", "c_hat"))
        for i, eta in enumerate(rep.etas):
            for j, t in enumerate(rep.times):
                envelope = (rep.initial_separations[i]
                            * np.exp(rep.c_hat * t)
                            * (1.0 + rep.envelope_slack))
                writer.writerow((_fmt(eta), _fmt(t),
                                 _fmt(rep.separations[i, j]),
                                 _fmt(envelope), _fmt(rep.c_hat)))
