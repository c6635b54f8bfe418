"""Python access to the opfrelax conic OPF relaxations."""

import json

from ._opfrelax import Error, ModelError, ParseError, bundled_case_names, project
from . import _opfrelax

__all__ = [
    "Error",
    "ModelError",
    "ParseError",
    "bundled_case_names",
    "chordal_info",
    "compare",
    "project",
    "solve",
]


def solve(case, relaxation="r1"):
    """Solve one relaxation ("r1", "rch", "r2" or "bf") and return the report dict."""
    return json.loads(_opfrelax.solve_json(case, relaxation))


def compare(case, parallel=True):
    """Objectives, timings and exactness of all four relaxations."""
    return json.loads(_opfrelax.compare_json(case, parallel))


def chordal_info(case):
    return json.loads(_opfrelax.chordal_info_json(case))
