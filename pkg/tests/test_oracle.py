import numpy as np
import pytest

from neckmodes.geometry import build_geometry
from neckmodes.grids import GridSpec
from neckmodes.modes import SourceSpec, Bump, solve_mode_finite
from neckmodes.oracle import (OracleError, mode_source_2d, oracle_discrepancy,
                              solve_fd_oracle)


@pytest.fixture(scope="module")
def geom():
    return build_geometry({"s": 6.0})


@pytest.fixture(scope="module")
def src(geom):
    return SourceSpec("t", ((1.0 + 0.4j, (1, 1), Bump(4.0, 1.5)),
                            (0.6 - 0.9j, (3, 1), Bump(4.5, 1.2))))


def test_zero_source(geom):
    sol = solve_fd_oracle(geom, 1, lambda R, PH: np.zeros_like(R, dtype=complex))
    assert np.all(sol.values == 0)


def test_superposition(geom, src):
    both = solve_fd_oracle(geom, 1, mode_source_2d(src, geom, (1, 3), 1), level=0)
    parts = sum(solve_fd_oracle(geom, 1, mode_source_2d(src, geom, (n,), 1),
                                level=0).values for n in (1, 3))
    scale = np.max(np.abs(both.values))
    assert np.max(np.abs(both.values - parts)) < 1e-11 * scale


def test_two_level_order(geom, src):
    refs = {n: solve_mode_finite(geom, n, 1, src, GridSpec(level=3))
            for n in (1, 3)}
    d0 = oracle_discrepancy(geom, src, (1, 3), 1, 0, refs)
    d1 = oracle_discrepancy(geom, src, (1, 3), 1, 1, refs)
    assert 1.6 <= np.log2(d0 / d1) <= 2.4


def test_size_guard(geom):
    with pytest.raises(OracleError):
        solve_fd_oracle(geom, 1, lambda R, PH: np.zeros_like(R, dtype=complex),
                        level=4)


def test_p2_unsupported():
    g = build_geometry({"p": 2, "s": 6.0})
    with pytest.raises(OracleError):
        solve_fd_oracle(g, 1, lambda R, PH: np.zeros_like(R, dtype=complex))
