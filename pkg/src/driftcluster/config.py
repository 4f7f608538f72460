"""YAML run configuration: schema, defaults, validation.

One file drives every CLI command.  Blocks `grid` and `params` are always
required; `ic` and `step` are required by the commands that integrate in
time; `sweep`, `mms`, `stability` and `verify` configure their commands and
are otherwise ignored.  Unknown keys anywhere are rejected.  All problems
in a file are collected and reported together as one ConfigError.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import yaml

from .errors import ConfigError
from .grid import Grid
from .model import IC_PRESETS, LAWS, RHS_FORMS, InitialCondition, Params
from .stepping import FLUX_LIMITERS, StepControl

DEFAULT_OUT_DIR_ENV = "DRIFTCLUSTER_OUT_DIR"

_IC_FIELDS = {
    "constant": ("value",),
    "bump": ("center", "width", "amplitude", "baseline"),
    "smoothed_step": ("center", "width", "lower", "upper"),
    "random_fourier": ("seed", "modes", "baseline", "amplitude"),
}


@dataclass
class OutputConfig:
    dir: str
    snapshot_stride: int
    record_times: list


@dataclass
class SweepConfig:
    deltas: list
    times: list
    kappa: float
    reference: str
    workers: int


@dataclass
class MmsConfig:
    resolutions: list
    t_final: float
    dt_over_h: float
    min_order: float
    min_r2: float
    elliptic_order_min: float
    elliptic_order_max: float


@dataclass
class StabilityConfig:
    etas: list
    center: float
    width: float
    n_times: int
    envelope_slack: float
    linearity_tol: float


@dataclass
class VerifyConfig:
    deltas: list
    kappa: float


@dataclass
class RunConfig:
    grid: Grid
    params: Params
    ic: InitialCondition | None
    step: StepControl | None
    output: OutputConfig
    sweep: SweepConfig | None
    mms: MmsConfig | None
    stability: StabilityConfig | None
    verify: VerifyConfig


class _Block:
    """One mapping block: typed key extraction with error collection."""

    def __init__(self, raw: dict, path: str, errors: list):
        self.raw = raw if isinstance(raw, dict) else {}
        self.path = path
        self.errors = errors
        self.seen = set()
        if raw is not None and not isinstance(raw, dict):
            errors.append(f"{path}: must be a mapping of keys to values")

    def _take(self, key, required, default):
        self.seen.add(key)
        if key not in self.raw:
            if required:
                self.errors.append(f"{self.path}.{key}: required key missing")
            return default, key not in self.raw
        return self.raw[key], False

    def number(self, key, *, lo=None, hi=None, lo_open=False, hi_open=False,
               required=False, default=None, integer=False):
        val, missing = self._take(key, required, default)
        if missing or val is None:
            return default
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.errors.append(
                f"{self.path}.{key}: must be a number, got {val!r}")
            return default
        if integer and not isinstance(val, int):
            self.errors.append(
                f"{self.path}.{key}: must be an integer, got {val!r}")
            return default
        if not self._in_range(val, lo, hi, lo_open, hi_open):
            self.errors.append(
                f"{self.path}.{key}: must lie in "
                f"{self._range_text(lo, hi, lo_open, hi_open)}, got {val}")
            return default
        return int(val) if integer else float(val)

    def choice(self, key, options, *, required=False, default=None):
        val, missing = self._take(key, required, default)
        if missing or val is None:
            return default
        if val not in options:
            self.errors.append(
                f"{self.path}.{key}: must be one of {list(options)}, "
                f"got {val!r}")
            return default
        return val

    def flag(self, key, *, default=False):
        val, missing = self._take(key, False, default)
        if missing:
            return default
        if not isinstance(val, bool):
            self.errors.append(
                f"{self.path}.{key}: must be true or false, got {val!r}")
            return default
        return val

    def text(self, key, *, required=False, default=None):
        val, missing = self._take(key, required, default)
        if missing or val is None:
            return default
        if not isinstance(val, str):
            self.errors.append(
                f"{self.path}.{key}: must be a string, got {val!r}")
            return default
        return val

    def number_list(self, key, *, lo=None, hi=None, lo_open=False,
                    hi_open=False, required=False, default=None,
                    integer=False, min_len=1):
        val, missing = self._take(key, required, default)
        if missing or val is None:
            return default
        if not isinstance(val, (list, tuple)):
            self.errors.append(
                f"{self.path}.{key}: must be a list of numbers, got {val!r}")
            return default
        out = []
        for i, item in enumerate(val):
            if isinstance(item, bool) or not isinstance(item, (int, float)) \
                    or (integer and not isinstance(item, int)):
                self.errors.append(
                    f"{self.path}.{key}[{i}]: must be "
                    f"{'an integer' if integer else 'a number'}, got {item!r}")
                return default
            if not self._in_range(item, lo, hi, lo_open, hi_open):
                self.errors.append(
                    f"{self.path}.{key}[{i}]: must lie in "
                    f"{self._range_text(lo, hi, lo_open, hi_open)}, got {item}")
                return default
            out.append(int(item) if integer else float(item))
        if len(out) < min_len:
            self.errors.append(
                f"{self.path}.{key}: needs at least {min_len} entries, "
                f"got {len(out)}")
            return default
        return out

    def reject_unknown(self):
        for key in self.raw:
            if key not in self.seen:
                self.errors.append(f"{self.path}.{key}: unknown key")

    @staticmethod
    def _in_range(val, lo, hi, lo_open, hi_open):
        if lo is not None and (val <= lo if lo_open else val < lo):
            return False
        if hi is not None and (val >= hi if hi_open else val > hi):
            return False
        return True

    @staticmethod
    def _range_text(lo, hi, lo_open, hi_open):
        left = "(" if lo_open else "["
        right = ")" if hi_open else "]"
        lo_s = "-inf" if lo is None else f"{lo:g}"
        hi_s = "inf" if hi is None else f"{hi:g}"
        return f"{left}{lo_s}, {hi_s}{right}"


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError listing every problem found."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"not valid YAML: {exc}"]) from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a mapping of sections"])

    errors: list[str] = []
    known = {"grid", "params", "ic", "step", "output", "sweep", "mms",
             "stability", "verify"}
    for key in raw:
        if key not in known:
            errors.append(f"{key}: unknown section")
    for section in ("grid", "params"):
        if section not in raw:
            errors.append(f"{section}: required section missing")

    # grid
    gb = _Block(raw.get("grid", {}), "grid", errors)
    n = gb.number("n", lo=8, required=True, integer=True, default=8)
    gb.reject_unknown()

    # params
    pb = _Block(raw.get("params", {}), "params", errors)
    delta = pb.number("delta", lo=0.0, hi=1.0, hi_open=True, required=True,
                      default=0.0)
    epsilon = pb.number("epsilon", lo=0.0, lo_open=True, required=True,
                        default=1.0)
    r = pb.number("r", lo=0.0, required=True, default=0.0)
    law = pb.choice("law", LAWS, required=True, default="monostable")
    a = pb.number("a", lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    rhs_form = pb.choice("rhs_form", RHS_FORMS, default="divergence")
    pb.reject_unknown()
    if law == "bistable" and a is None:
        errors.append("params.a: required for the bistable law, "
                      "must lie in (0, 1)")

    # ic (optional block)
    ic = None
    if "ic" in raw:
        ib = _Block(raw.get("ic", {}), "ic", errors)
        preset = ib.choice("preset", IC_PRESETS, required=True)
        fields = {}
        if preset is not None:
            allowed = _IC_FIELDS[preset]
            for key in ib.raw:
                if key != "preset" and key not in allowed:
                    errors.append(
                        f"ic.{key}: not a setting of preset {preset!r} "
                        f"(accepted: {list(allowed)})")
                    ib.seen.add(key)
            if preset == "constant":
                fields["value"] = ib.number("value", lo=0.0, default=1.0)
            elif preset == "bump":
                fields["center"] = ib.number("center", lo=-1.0, hi=1.0,
                                             lo_open=True, hi_open=True,
                                             default=0.0)
                fields["width"] = ib.number("width", lo=0.0, lo_open=True,
                                            default=0.4)
                fields["amplitude"] = ib.number("amplitude", lo=0.0,
                                                default=1.0)
                fields["baseline"] = ib.number("baseline", lo=0.0, default=0.0)
            elif preset == "smoothed_step":
                fields["center"] = ib.number("center", lo=-1.0, hi=1.0,
                                             lo_open=True, hi_open=True,
                                             default=0.0)
                fields["width"] = ib.number("width", lo=0.0, lo_open=True,
                                            default=0.4)
                fields["lower"] = ib.number("lower", lo=0.0, default=0.2)
                fields["upper"] = ib.number("upper", lo=0.0, default=1.0)
            elif preset == "random_fourier":
                fields["seed"] = ib.number("seed", lo=0, integer=True,
                                           default=0)
                fields["modes"] = ib.number("modes", lo=1, integer=True,
                                            default=4)
                fields["baseline"] = ib.number("baseline", lo=0.0, default=0.1)
                fields["amplitude"] = ib.number("amplitude", lo=0.0,
                                                default=1.0)
        ib.reject_unknown()
        if preset is not None and not errors:
            ic = InitialCondition(preset=preset, **fields)

    # step (optional block)
    step = None
    if "step" in raw:
        sb = _Block(raw.get("step", {}), "step", errors)
        t_end = sb.number("t_end", lo=0.0, required=True, default=1.0)
        dt_max = sb.number("dt_max", lo=0.0, lo_open=True, required=True,
                           default=1e-3)
        cfl_safety = sb.number("cfl_safety", lo=0.0, hi=1.0, lo_open=True,
                               default=0.9)
        velocity_resolve = sb.flag("velocity_resolve", default=False)
        flux_limiter = sb.choice("flux_limiter", FLUX_LIMITERS,
                                 default="upwind")
        sb.reject_unknown()
        if not errors:
            step = StepControl(t_end=t_end, dt_max=dt_max,
                               cfl_safety=cfl_safety,
                               velocity_resolve=velocity_resolve,
                               flux_limiter=flux_limiter)

    # output
    ob = _Block(raw.get("output", {}), "output", errors)
    default_dir = os.environ.get(DEFAULT_OUT_DIR_ENV, "out")
    out_dir = ob.text("dir", default=default_dir)
    stride = ob.number("snapshot_stride", lo=1, integer=True, default=10)
    record_times = ob.number_list("record_times", lo=0.0, lo_open=True,
                                  default=[])
    ob.reject_unknown()
    output = OutputConfig(dir=out_dir, snapshot_stride=stride,
                          record_times=record_times or [])

    # sweep
    sweep = None
    if "sweep" in raw:
        wb = _Block(raw.get("sweep", {}), "sweep", errors)
        deltas = wb.number_list("deltas", lo=0.0, hi=1.0, lo_open=True,
                                hi_open=True, required=True, min_len=2)
        times = wb.number_list("times", lo=0.0, lo_open=True)
        kappa = wb.number("kappa", lo=1.0, default=3.0)
        reference = wb.choice("reference",
                              ("transport", "richardson", "smallest_delta"),
                              default="transport")
        workers = wb.number("workers", lo=1, integer=True, default=1)
        wb.reject_unknown()
        if deltas is not None and any(
                d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
            errors.append("sweep.deltas: must be strictly decreasing")
        if times is None:
            times = ([0.25 * step.t_end, 0.5 * step.t_end, step.t_end]
                     if step is not None else None)
        if not errors and deltas is not None and times is not None:
            sweep = SweepConfig(deltas=deltas, times=times, kappa=kappa,
                                reference=reference, workers=workers)

    # mms
    mms = None
    if "mms" in raw:
        mb = _Block(raw.get("mms", {}), "mms", errors)
        resolutions = mb.number_list("resolutions", lo=8, integer=True,
                                     required=True, min_len=3)
        t_final = mb.number("t_final", lo=0.0, lo_open=True, default=0.5)
        dt_over_h = mb.number("dt_over_h", lo=0.0, hi=0.9, lo_open=True,
                              default=0.2)
        min_order = mb.number("min_order", lo=0.0, default=1.0)
        min_r2 = mb.number("min_r2", lo=0.0, hi=1.0, default=0.98)
        ell_lo = mb.number("elliptic_order_min", lo=0.0, default=1.8)
        ell_hi = mb.number("elliptic_order_max", lo=0.0, default=2.2)
        mb.reject_unknown()
        if resolutions is not None and any(
                n2 <= n1 for n1, n2 in zip(resolutions, resolutions[1:])):
            errors.append("mms.resolutions: must be strictly increasing")
        if not errors and resolutions is not None:
            mms = MmsConfig(resolutions=resolutions, t_final=t_final,
                            dt_over_h=dt_over_h, min_order=min_order,
                            min_r2=min_r2, elliptic_order_min=ell_lo,
                            elliptic_order_max=ell_hi)

    # stability
    stability = None
    if "stability" in raw:
        tb = _Block(raw.get("stability", {}), "stability", errors)
        etas = tb.number_list("etas", lo=0.0, lo_open=True, required=True,
                              min_len=2)
        center = tb.number("center", lo=-1.0, hi=1.0, lo_open=True,
                           hi_open=True, default=0.3)
        width = tb.number("width", lo=0.0, lo_open=True, default=0.25)
        n_times = tb.number("n_times", lo=2, integer=True, default=10)
        slack = tb.number("envelope_slack", lo=0.0, hi=1.0, default=0.05)
        lin_tol = tb.number("linearity_tol", lo=0.0, hi=1.0, lo_open=True,
                            default=0.2)
        tb.reject_unknown()
        if not errors and etas is not None:
            stability = StabilityConfig(etas=etas, center=center, width=width,
                                        n_times=n_times, envelope_slack=slack,
                                        linearity_tol=lin_tol)

    # verify (always present with defaults; the block may tighten it)
    vb = _Block(raw.get("verify", {}), "verify", errors)
    v_deltas = vb.number_list("deltas", lo=0.0, hi=1.0, lo_open=True,
                              hi_open=True, min_len=2,
                              default=[0.1, 0.01, 0.001])
    v_kappa = vb.number("kappa", lo=1.0, default=3.0)
    vb.reject_unknown()
    if v_deltas is not None and any(
            d2 >= d1 for d1, d2 in zip(v_deltas, v_deltas[1:])):
        errors.append("verify.deltas: must be strictly decreasing")
    verify = VerifyConfig(deltas=v_deltas or [0.1, 0.01, 0.001],
                          kappa=v_kappa)

    if errors:
        raise ConfigError(errors)

    return RunConfig(
        grid=Grid(n), params=Params(delta=delta, epsilon=epsilon, r=r,
                                    law=law, a=a if a is not None else 0.5,
                                    rhs_form=rhs_form),
        ic=ic, step=step, output=output, sweep=sweep, mms=mms,
        stability=stability, verify=verify)
