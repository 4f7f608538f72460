"""Shared fixtures: small, fast default problems used across the suite."""

import numpy as np
import pytest

from driftcluster import Grid, InitialCondition, Params, StepControl


@pytest.fixture
def grid64():
    return Grid(64)


@pytest.fixture
def bump_ic():
    return InitialCondition(preset="bump", center=0.0, width=0.5,
                            amplitude=0.8, baseline=0.1)


@pytest.fixture
def bistable_params():
    return Params(delta=0.01, epsilon=0.5, r=1.0, law="bistable", a=0.25)


@pytest.fixture
def monostable_params():
    return Params(delta=0.01, epsilon=0.5, r=1.0, law="monostable")


@pytest.fixture
def short_control():
    return StepControl(t_end=0.2, dt_max=2e-3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
