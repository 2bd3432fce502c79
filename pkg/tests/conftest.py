"""
Shared fixtures for the sbvsim test suite
"""

import textwrap
from pathlib import Path

import pytest

from sbvsim.linkrate import LinkScenario, Mode
from sbvsim.spectrum import AllocationOrder, ToneGrid, allocate_subbands

REPO_ROOT = Path(__file__).resolve().parent.parent

# 16 tones at 1, 3, ..., 31 MHz: 7 legacy DS tones and 7 extension tones
TOY_DELTA_F = 2e6
TOY_F_START = 1e6
TOY_F_MAX = 33e6


@pytest.fixture
def toy_grid():
    return ToneGrid(f_max=TOY_F_MAX, delta_f=TOY_DELTA_F, f_start=TOY_F_START)


@pytest.fixture
def make_scenario():
    """Factory for scenarios on the standard 4312.5 Hz grid"""

    def _make(mode=Mode.SBV, n_op=3, f_max=35.2e6, width=5e6, order=AllocationOrder.SNAKE, **kwargs):
        grid = ToneGrid(f_max=f_max)
        alloc = allocate_subbands(n_op, f_max, width, order) if f_max > 17.664e6 else None
        return LinkScenario(mode=mode, n_op=n_op, grid=grid, alloc=alloc, **kwargs)

    return _make


@pytest.fixture
def write_file(tmp_path):
    """Write dedented text to tmp_path/name and return the path"""

    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def scenario_ini(write_file):
    """A three-operator SBV run description with a small coverage sample count"""
    return write_file(
        "scenario.ini",
        """
        [scenario]
        mode = SBV
        n_op = 3
        n_us = 24
        f_max_hz = 35.2e6
        distance_m = 100
        f_max_list_hz = 17.664e6, 35.2e6, 70.4e6, 105.6e6

        [coverage]
        n_samples = 2000
        seed = 11
        thresholds_mbps = 0:200:10
        n_us_list = 24

        [output]
        directory = results
        """,
    )
