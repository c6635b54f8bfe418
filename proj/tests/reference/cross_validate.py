"""Solve exported conic programs with cvxpy/Clarabel.

    python cross_validate.py PROGRAM_DIR [--write OPTIMA_JSON] [--check OPTIMA_JSON]

--write freezes the external optima; --check re-solves and compares against a
frozen file (relative tolerance 1e-6).
"""

import argparse
import json
import math
import pathlib
import sys

import numpy as np
import scipy.sparse as sp
import cvxpy as cp


def sparse(d):
    rows, cols, vals = zip(*d["entries"]) if d["entries"] else ((), (), ())
    return sp.csr_matrix((vals, (rows, cols)), shape=(d["rows"], d["cols"]))


def smat_rows(k):
    # (row, i, j) for the svec layout: lower triangle, column by column
    out = []
    r = 0
    for j in range(k):
        for i in range(j, k):
            out.append((r, i, j))
            r += 1
    return out


def build(prog):
    n = prog["num_vars"]
    x = cp.Variable(n)
    c = np.asarray(prog["c"])
    A, b = sparse(prog["A"]), np.asarray(prog["b"])
    G, h = sparse(prog["G"]), np.asarray(prog["h"])
    s = h - G @ x
    cons = []
    if A.shape[0]:
        cons.append(A @ x == b)
    row = 0
    for cone in prog["cones"]:
        kind, dim = cone["kind"], cone["dim"]
        if kind == "nonneg":
            cons.append(s[row:row + dim] >= 0)
            row += dim
        elif kind == "soc":
            cons.append(cp.SOC(s[row], s[row + 1:row + dim]))
            row += dim
        elif kind == "rsoc":
            a, bb, u = s[row], s[row + 1], s[row + 2:row + dim]
            cons.append(cp.SOC(a + bb, cp.hstack([a - bb, math.sqrt(2.0) * u])))
            row += dim
        elif kind == "psd":
            k = dim
            M = cp.Variable((k, k), symmetric=True)
            for r, i, j in smat_rows(k):
                scale = 1.0 if i == j else 1.0 / math.sqrt(2.0)
                cons.append(M[i, j] == scale * s[row + r])
            cons.append(M >> 0)
            row += k * (k + 1) // 2
        else:
            raise ValueError(f"unknown cone kind {kind}")
    return cp.Problem(cp.Minimize(c @ x + prog.get("offset", 0.0)), cons)


def solve(path):
    # Tightest tolerance that Clarabel reports as fully optimal.
    prog = json.loads(pathlib.Path(path).read_text())
    result = None
    for tol in (1e-10, 1e-9, 1e-8):
        problem = build(prog)
        problem.solve(solver=cp.CLARABEL, tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol, max_iter=500)
        result = (problem.status, float(problem.value), tol)
        if problem.status == cp.OPTIMAL:
            break
    return result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("programs")
    ap.add_argument("--write")
    ap.add_argument("--check")
    args = ap.parse_args()

    files = sorted(pathlib.Path(args.programs).glob("*.json"))
    if not files:
        print("no programs found", file=sys.stderr)
        return 2
    results = {}
    for f in files:
        status, value, tol = solve(f)
        results[f.stem] = {"status": status, "objective": value, "solver": "CLARABEL", "tol": tol}
        print(f"{f.stem:28s} {status:18s} {value:.10g}  tol {tol:g}")

    if args.write:
        pathlib.Path(args.write).write_text(json.dumps(results, indent=2, sort_keys=True) + "\n")
    if args.check:
        frozen = json.loads(pathlib.Path(args.check).read_text())
        bad = 0
        for name, ref in frozen.items():
            got = results.get(name)
            if got is None:
                print(f"missing program {name}")
                bad += 1
                continue
            rel = abs(got["objective"] - ref["objective"]) / (1 + abs(ref["objective"]))
            if rel > 1e-6:
                print(f"{name}: {got['objective']} vs frozen {ref['objective']} (rel {rel:.2e})")
                bad += 1
        return 1 if bad else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
