"""Model definition: parameters, reproduction laws, initial profiles.

The density u(x, t) is transported by a velocity phi, diffuses with
coefficient delta >= 0 and reproduces at net rate r u E(u).  Two reproduction
laws are supported:

* monostable: E(u) = 1 - u (logistic),
* bistable:   E(u) = (1 - u)(u - a) with threshold a in (0, 1).

delta = 0 selects the pure transport limit; the stepper switches scheme on
that value, so it is part of the parameter set rather than a solver option.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import Grid

LAWS = ("monostable", "bistable")
RHS_FORMS = ("divergence", "chain_rule")
IC_PRESETS = ("constant", "bump", "smoothed_step", "random_fourier")


@dataclass(frozen=True)
class Params:
    """Physical parameters of one run.

    delta in [0, 1) is the diffusion coefficient, epsilon > 0 the velocity
    screening length, r >= 0 the reproduction strength.  a is the bistable
    threshold and must lie in (0, 1); it is ignored by the monostable law.
    rhs_form picks the discrete source of the velocity equation: the
    conservative face-difference of E(u) ("divergence", default) or the
    chain-rule form E'(u) du/dx kept as a cross-check.
    """

    delta: float
    epsilon: float
    r: float
    law: str
    a: float = 0.5
    rhs_form: str = "divergence"

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValidationError(
                f"delta must lie in [0, 1), got {self.delta}")
        if not self.epsilon > 0.0:
            raise ValidationError(
                f"epsilon must be positive, got {self.epsilon}")
        if not self.r >= 0.0:
            raise ValidationError(
                f"r must be nonnegative, got {self.r}")
        if self.law not in LAWS:
            raise ValidationError(
                f"law must be one of {LAWS}, got {self.law!r}")
        if self.law == "bistable" and not 0.0 < self.a < 1.0:
            raise ValidationError(
                f"a must lie in (0, 1), got {self.a}")
        if self.rhs_form not in RHS_FORMS:
            raise ValidationError(
                f"rhs_form must be one of {RHS_FORMS}, got {self.rhs_form!r}")

    @property
    def bistable(self) -> bool:
        return self.law == "bistable"


def reproduction_rate(u, params: Params):
    """Elementwise net reproduction rate E(u)."""
    u = np.asarray(u, dtype=np.float64)
    if params.bistable:
        return (1.0 - u) * (u - params.a)
    return 1.0 - u


def reproduction_rate_deriv(u, params: Params):
    """Elementwise E'(u)."""
    u = np.asarray(u, dtype=np.float64)
    if params.bistable:
        return -2.0 * u + params.a + 1.0
    return np.full_like(u, -1.0)


def reaction(u, params: Params):
    """Elementwise reaction term r u E(u)."""
    u = np.asarray(u, dtype=np.float64)
    return params.r * u * reproduction_rate(u, params)


def reaction_lipschitz(params: Params, lo: float, hi: float) -> float:
    """sup of |d/du (u E(u))| over [lo, hi].

    The derivative is linear (monostable) or quadratic (bistable), so the
    sup is attained at an interval endpoint or the interior vertex.
    """
    if hi < lo:
        lo, hi = hi, lo

    def deriv(u):
        if params.bistable:
            a = params.a
            return -3.0 * u * u + 2.0 * (1.0 + a) * u - a
        return 1.0 - 2.0 * u

    candidates = [deriv(lo), deriv(hi)]
    if params.bistable:
        vertex = (1.0 + params.a) / 3.0
        if lo < vertex < hi:
            candidates.append(deriv(vertex))
    return float(max(abs(c) for c in candidates))


@dataclass(frozen=True)
class InitialCondition:
    """Named nonnegative initial profile.

    Presets and the fields they read:

    * ``constant``:       value
    * ``bump``:           baseline + amplitude exp(-((x - center)/width)^2)
    * ``smoothed_step``:  lower -> upper tanh transition at center over width
    * ``random_fourier``: baseline + amplitude-scaled nonnegative field from
      seeded cosine modes (Neumann-compatible), deterministic per seed
    """

    preset: str
    value: float = 1.0
    center: float = 0.0
    width: float = 0.4
    amplitude: float = 1.0
    baseline: float = 0.0
    lower: float = 0.2
    upper: float = 1.0
    seed: int = 0
    modes: int = 4

    def __post_init__(self):
        if self.preset not in IC_PRESETS:
            raise ValidationError(
                f"preset must be one of {IC_PRESETS}, got {self.preset!r}")
        if self.preset == "constant" and self.value < 0.0:
            raise ValidationError(
                f"value must be nonnegative, got {self.value}")
        if self.preset in ("bump", "smoothed_step") and not self.width > 0.0:
            raise ValidationError(
                f"width must be positive, got {self.width}")
        if self.preset == "bump":
            if self.baseline < 0.0 or self.amplitude < 0.0:
                raise ValidationError(
                    "bump baseline and amplitude must be nonnegative, got "
                    f"baseline={self.baseline}, amplitude={self.amplitude}")
        if self.preset == "smoothed_step":
            if self.lower < 0.0 or self.upper < 0.0:
                raise ValidationError(
                    "smoothed_step levels must be nonnegative, got "
                    f"lower={self.lower}, upper={self.upper}")
        if self.preset == "random_fourier":
            if self.baseline < 0.0 or self.amplitude < 0.0:
                raise ValidationError(
                    "random_fourier baseline and amplitude must be "
                    f"nonnegative, got baseline={self.baseline}, "
                    f"amplitude={self.amplitude}")
            if self.modes < 1:
                raise ValidationError(
                    f"modes must be at least 1, got {self.modes}")


def build_initial(ic: InitialCondition, grid: Grid) -> np.ndarray:
    """Sample the preset at the cell centers; result is nonnegative."""
    x = grid.centers
    if ic.preset == "constant":
        u0 = np.full(grid.n, float(ic.value))
    elif ic.preset == "bump":
        u0 = ic.baseline + ic.amplitude * np.exp(-((x - ic.center) / ic.width) ** 2)
    elif ic.preset == "smoothed_step":
        u0 = ic.lower + (ic.upper - ic.lower) * 0.5 * (
            1.0 + np.tanh((x - ic.center) / ic.width))
    else:  # random_fourier
        rng = np.random.default_rng(ic.seed)
        ks = np.arange(1, ic.modes + 1)
        coeffs = rng.standard_normal(ic.modes) / ks
        # cosine modes have zero slope at both walls
        field = np.zeros(grid.n)
        for k, c in zip(ks, coeffs):
            field += c * np.cos(k * np.pi * (x + 1.0) / 2.0)
        spread = field.max() - field.min()
        if spread > 0.0:
            field = (field - field.min()) / spread
        else:
            field = np.zeros(grid.n)
        u0 = ic.baseline + ic.amplitude * field
    if (u0 < 0.0).any():
        raise ValidationError("initial profile has negative entries")
    return u0
