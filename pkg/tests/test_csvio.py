"""CSV writers: schemas, exact float round-trips, reproducible bytes."""

import csv

import numpy as np
import pytest

from driftcluster import (DIAGNOSTICS, Grid, InitialCondition, Params,
                          StepControl, run, run_trajectory_checks)
from driftcluster.csvio import (read_snapshots_csv, write_checks_csv,
                                write_checks_text, write_order_csv,
                                write_snapshots_csv, write_stability_csv,
                                write_sweep_csv, write_sweep_norms_csv,
                                write_trajectory_csv)


@pytest.fixture(scope="module")
def short_run():
    g = Grid(32)
    p = Params(delta=0.01, epsilon=0.5, r=1.0, law="bistable", a=0.25)
    ic = InitialCondition(preset="bump", center=0.0, width=0.5,
                          amplitude=0.8, baseline=0.1)
    return run(ic, p, StepControl(t_end=0.1, dt_max=1e-3), g,
               snapshot_stride=20), p


def test_trajectory_schema(tmp_path, short_run):
    tr, _ = short_run
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(path, tr)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", *DIAGNOSTICS]
    assert len(rows) - 1 == len(tr.times)
    # %.17g strings recover the float64 values exactly
    got = np.array([[float(v) for v in row] for row in rows[1:]])
    np.testing.assert_array_equal(got[:, 0], tr.times)
    np.testing.assert_array_equal(got[:, 1:], tr.data)


def test_snapshot_round_trip(tmp_path, short_run):
    tr, _ = short_run
    path = tmp_path / "snapshots.csv"
    write_snapshots_csv(path, tr)
    snaps = read_snapshots_csv(path)
    assert len(snaps) == len(tr.snapshots)
    for a, b in zip(snaps, tr.snapshots):
        assert a.t == b.t
        np.testing.assert_array_equal(a.u, b.u)
        np.testing.assert_array_equal(a.phi, b.phi)


def test_writers_are_byte_stable(tmp_path, short_run):
    tr, p = short_run
    rep = run_trajectory_checks(tr, p)
    pairs = []
    for stem, writer, arg in [("traj", write_trajectory_csv, tr),
                              ("snap", write_snapshots_csv, tr),
                              ("checks", write_checks_csv, rep),
                              ("checks_txt", write_checks_text, rep)]:
        p1 = tmp_path / f"{stem}_1"
        p2 = tmp_path / f"{stem}_2"
        writer(p1, arg)
        writer(p2, arg)
        pairs.append((p1.read_bytes(), p2.read_bytes()))
    for b1, b2 in pairs:
        assert b1 == b2


def test_zero_length_run_files(tmp_path):
    g = Grid(16)
    p = Params(delta=0.0, epsilon=1.0, r=0.0, law="monostable")
    tr = run(InitialCondition(preset="constant", value=0.5), p,
             StepControl(t_end=0.0, dt_max=1e-3), g)
    tpath = tmp_path / "t.csv"
    spath = tmp_path / "s.csv"
    write_trajectory_csv(tpath, tr)
    write_snapshots_csv(spath, tr)
    with open(tpath, newline="") as fh:
        assert len(list(csv.reader(fh))) == 2  # header + t=0 row
    assert len(read_snapshots_csv(spath)) == 1


def test_checks_text_format(tmp_path, short_run):
    tr, p = short_run
    rep = run_trajectory_checks(tr, p)
    path = tmp_path / "checks.txt"
    write_checks_text(path, rep)
    text = path.read_text()
    for check in rep.checks:
        tag = "[PASS]" if check.passed else "[FAIL]"
        assert f"{tag} {check.name}" in text


def test_checks_csv_schema(tmp_path, short_run):
    tr, p = short_run
    rep = run_trajectory_checks(tr, p)
    path = tmp_path / "checks.csv"
    write_checks_csv(path, rep)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["name"] for r in rows} == {c.name for c in rep.checks}
    assert all(r["passed"] in ("true", "false") for r in rows)


def test_sweep_csvs(tmp_path):
    from driftcluster import delta_sweep
    ic = InitialCondition(preset="bump", center=0.0, width=0.5,
                          amplitude=0.8, baseline=0.1)
    p = Params(delta=0.0, epsilon=0.5, r=1.0, law="bistable", a=0.25)
    rep = delta_sweep(ic, p, [0.3, 0.1], [0.2],
                      StepControl(t_end=0.2, dt_max=1e-3), Grid(32))
    spath = tmp_path / "sweep.csv"
    npath = tmp_path / "norms.csv"
    write_sweep_csv(spath, rep)
    write_sweep_norms_csv(npath, rep)
    with open(spath, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2  # one per (delta, time)
    assert {"delta", "time", "sup_error", "floor"} <= set(rows[0])
    with open(npath, newline="") as fh:
        nrows = list(csv.DictReader(fh))
    assert len(nrows) == 2  # one per delta
    assert "u_sup" in nrows[0]


def test_order_csv(tmp_path):
    from driftcluster import mms_order_study
    p = Params(delta=0.01, epsilon=0.5, r=1.0, law="monostable")
    rep = mms_order_study(p, [16, 32, 64], t_final=0.1)
    path = tmp_path / "order.csv"
    write_order_csv(path, rep)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert {"n", "h", "dt", "coupled_l2", "elliptic_sup"} <= set(rows[0])


def test_stability_csv(tmp_path):
    from driftcluster import gronwall_stability
    ic = InitialCondition(preset="bump", center=0.0, width=0.5,
                          amplitude=0.8, baseline=0.1)
    p = Params(delta=0.0, epsilon=0.5, r=1.0, law="bistable", a=0.25)
    rep = gronwall_stability(ic, p, [1e-2, 1e-3],
                             StepControl(t_end=0.2, dt_max=1e-3), Grid(32))
    path = tmp_path / "stability.csv"
    write_stability_csv(path, rep)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {"eta", "time", "separation", "envelope"} <= set(rows[0])
    assert len(rows) == 2 * len(rep.times)
