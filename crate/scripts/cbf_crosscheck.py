#!/usr/bin/env python3
"""Re-solve a CBF file written by `sonc export-cbf` with cvxpy.

Usage: cbf_crosscheck.py FILE.cbf [--expect VALUE] [--tol TOL]

Prints the optimal value. With --expect, exits 1 when the value differs
by more than --tol (default 1e-6).
"""

import argparse
import sys

import cvxpy as cp
import numpy as np


def read_cbf(path):
    with open(path) as fh:
        lines = [l.strip() for l in fh if l.strip() and not l.startswith("#")]
    it = iter(lines)
    prob = {"sense": "MAX", "cones": [], "nrows": 0, "obj": {}, "a": [], "b": {}}
    for key in it:
        if key == "VER":
            next(it)
        elif key == "OBJSENSE":
            prob["sense"] = next(it)
        elif key == "VAR":
            nvar, ncones = map(int, next(it).split())
            prob["nvar"] = nvar
            for _ in range(ncones):
                kind, size = next(it).split()
                prob["cones"].append((kind, int(size)))
        elif key == "CON":
            nrows, nblocks = map(int, next(it).split())
            prob["nrows"] = nrows
            for _ in range(nblocks):
                kind, _size = next(it).split()
                if kind != "L=":
                    raise ValueError(f"unsupported constraint domain {kind}")
        elif key == "OBJACOORD":
            for _ in range(int(next(it))):
                j, v = next(it).split()
                prob["obj"][int(j)] = float(v)
        elif key == "ACOORD":
            for _ in range(int(next(it))):
                i, j, v = next(it).split()
                prob["a"].append((int(i), int(j), float(v)))
        elif key == "BCOORD":
            for _ in range(int(next(it))):
                i, v = next(it).split()
                prob["b"][int(i)] = float(v)
        else:
            raise ValueError(f"unsupported section {key}")
    return prob


def solve(prob):
    x = cp.Variable(prob["nvar"])
    cons = []
    k = 0
    for kind, size in prob["cones"]:
        if kind == "L+":
            cons.append(x[k:k + size] >= 0)
        elif kind == "QR":
            a, b, c = x[k], x[k + 1], x[k + 2:k + size]
            # 2ab >= |c|^2  <=>  ||(sqrt2 c, a - b)|| <= a + b
            cons.append(cp.SOC(a + b, cp.hstack([np.sqrt(2) * c, cp.reshape(a - b, (1,), order="F")])))
        elif kind != "F":
            raise ValueError(f"unsupported variable domain {kind}")
        k += size
    m = prob["nrows"]
    a = np.zeros((m, prob["nvar"]))
    for i, j, v in prob["a"]:
        a[i, j] += v
    b = np.zeros(m)
    for i, v in prob["b"].items():
        b[i] = v
    cons.append(a @ x + b == 0)
    c = np.zeros(prob["nvar"])
    for j, v in prob["obj"].items():
        c[j] = v
    obj = cp.Maximize(c @ x) if prob["sense"] == "MAX" else cp.Minimize(c @ x)
    p = cp.Problem(obj, cons)
    p.solve(solver=cp.CLARABEL)
    return p.status, p.value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("cbf")
    ap.add_argument("--expect", type=float)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()
    status, value = solve(read_cbf(args.cbf))
    print(f"status = {status}")
    print(f"value = {value:.10g}")
    if args.expect is not None and (value is None or abs(value - args.expect) > args.tol):
        sys.exit(1)


if __name__ == "__main__":
    main()
