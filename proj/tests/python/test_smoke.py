import math

import pytest

import opfrelax


def test_bundled_names():
    assert opfrelax.bundled_case_names() == ["threebus", "case9", "case14", "case30"]


def test_solve_case9_r1():
    rep = opfrelax.solve("case9", "r1")
    assert rep["status"] == "optimal"
    assert rep["recovery"]["exact"]
    assert abs(rep["objective"] - 5297.4) / 5297.4 < 0.01


def test_compare_ordering():
    cmp = opfrelax.compare("case9", parallel=False)
    assert cmp["ordering_ok"]
    assert cmp["r2"]["objective"] <= cmp["r1"]["objective"] + 1e-6 * (1 + abs(cmp["r1"]["objective"]))


def test_chordal_info():
    info = opfrelax.chordal_info("case30")
    assert info["buses"] == 30
    assert sum(info["clique_histogram"].values()) == info["cliques"]


def test_project_sweep():
    pts = opfrelax.project("r1", "p1p2", directions=4, grid=16)
    assert len(pts) == 4
    assert all(math.isfinite(x) and math.isfinite(y) for x, y in pts)


def test_errors():
    with pytest.raises(ValueError):
        opfrelax.solve("missing.m")
    with pytest.raises(ValueError):
        opfrelax.project("r9")
