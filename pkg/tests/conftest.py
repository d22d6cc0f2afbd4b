"""Shared fixtures: preset pulses and their collocation results.

The full-size preset computations (especially the five-mode pulse at its
default grid) are expensive, so they are computed once per session and shared
by the acceptance tests and the structural invariant suite. Unit tests use
smaller grids built inline.
"""

from __future__ import annotations

import numpy as np
import pytest

from nftkit.collocation import FCPolicy, WindowSpec, fc_modes
from nftkit.presets import get_preset


class PresetRun:
    """A preset pulse analyzed on its default grid."""

    def __init__(self, name: str):
        self.preset = get_preset(name)
        self.grid = self.preset.grid()
        self.pulse = self.preset.build(self.grid)
        self.windows = WindowSpec.hann(self.grid)
        self.policy = FCPolicy(count=self.preset.reference.K)
        self.op, self.modes = fc_modes(self.pulse, self.policy, self.windows)
        self.reference = self.preset.reference

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes])

    @property
    def bs(self) -> np.ndarray:
        return np.array([m.b for m in self.modes])


@pytest.fixture(scope="session")
def run_2sol() -> PresetRun:
    return PresetRun("2sol")


@pytest.fixture(scope="session")
def run_5sol() -> PresetRun:
    return PresetRun("5sol")


@pytest.fixture(scope="session")
def run_sech22() -> PresetRun:
    return PresetRun("sech22")


@pytest.fixture(scope="session")
def preset_runs(run_2sol, run_5sol, run_sech22) -> dict[str, PresetRun]:
    return {"2sol": run_2sol, "5sol": run_5sol, "sech22": run_sech22}
