#!/usr/bin/env python3
"""Solve an LP-format mixed-integer program and write a solution file.

Usage: lp_solve.py LP_FILE SOL_FILE [REL_GAP] [TIME_LIMIT_SECONDS]

Reads the deterministic CPLEX-LP-style files written by the dommove tools
(Minimize / Subject To / Bounds / Binaries / End) and solves them with
scipy.optimize.milp (HiGHS). The solution file carries an `objective` line,
a `bound` line with the proven dual bound, and `name value` pairs for the
nonzero variables. A TIME_LIMIT of 0 means no limit.

Exit codes: 0 solved (optimal or within the requested gap/limits with an
incumbent), 2 infeasible or unbounded, 3 anything else.
"""

import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp


def fail(code, message):
    print(message, file=sys.stderr)
    sys.exit(code)


def is_number(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


def parse_terms(tokens):
    """Tokens like ['zp_1_1', '+', '2', 'xp_1', '-', 'phat_1_1']."""
    terms = []
    sign = 1.0
    coef = None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        elif is_number(tok):
            coef = float(tok)
        else:
            value = sign * (1.0 if coef is None else coef)
            terms.append((value, tok))
            sign, coef = 1.0, None
    return terms


def parse_lp(path):
    objective = []
    rows = []  # (terms, sense, rhs)
    bounds = {}  # name -> [lo, hi]
    binaries = []
    section = None
    with open(path) as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("\\"):
                continue
            header = line.lower()
            if header in ("minimize", "subject to", "bounds", "binaries", "end"):
                section = header
                continue
            if section == "minimize":
                if line.startswith("obj:"):
                    line = line[len("obj:"):]
                objective.extend(parse_terms(line.split()))
            elif section == "subject to":
                name, _, body = line.partition(":")
                if not body:
                    fail(3, f"constraint row without a name: {line!r}")
                tokens = body.split()
                sense_pos = next(
                    (k for k, t in enumerate(tokens) if t in ("<=", ">=", "=")), None
                )
                if sense_pos is None or sense_pos + 2 != len(tokens):
                    fail(3, f"cannot parse constraint: {line!r}")
                terms = parse_terms(tokens[:sense_pos])
                rows.append((terms, tokens[sense_pos], float(tokens[sense_pos + 1])))
            elif section == "bounds":
                tokens = line.split()
                if len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                    hi = np.inf if tokens[4] in ("+inf", "+infinity") else float(tokens[4])
                    bounds[tokens[2]] = [float(tokens[0]), hi]
                elif len(tokens) == 3 and tokens[1] == ">=":
                    bounds[tokens[0]] = [float(tokens[2]), np.inf]
                elif len(tokens) == 2 and tokens[1] == "free":
                    bounds[tokens[0]] = [-np.inf, np.inf]
                else:
                    fail(3, f"cannot parse bound: {line!r}")
            elif section == "binaries":
                binaries.extend(line.split())
    return objective, rows, bounds, binaries


def main():
    if len(sys.argv) < 3:
        fail(3, __doc__)
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    rel_gap = float(sys.argv[3]) if len(sys.argv) > 3 else 1e-8
    time_limit = float(sys.argv[4]) if len(sys.argv) > 4 else 0.0

    objective, rows, bounds, binaries = parse_lp(lp_path)

    names = []
    index = {}

    def var(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for _, name in objective:
        var(name)
    for terms, _, _ in rows:
        for _, name in terms:
            var(name)
    for name in bounds:
        var(name)
    for name in binaries:
        var(name)

    n = len(names)
    c = np.zeros(n)
    for coef, name in objective:
        c[index[name]] += coef

    binset = set(binaries)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    integrality = np.zeros(n)
    for i, name in enumerate(names):
        if name in binset:
            lb[i], ub[i] = 0.0, 1.0
            integrality[i] = 1
        if name in bounds:
            lb[i], ub[i] = bounds[name]

    data, ri, ci = [], [], []
    row_lo = np.empty(len(rows))
    row_hi = np.empty(len(rows))
    for r, (terms, sense, rhs) in enumerate(rows):
        for coef, name in terms:
            data.append(coef)
            ri.append(r)
            ci.append(index[name])
        if sense == "<=":
            row_lo[r], row_hi[r] = -np.inf, rhs
        elif sense == ">=":
            row_lo[r], row_hi[r] = rhs, np.inf
        else:
            row_lo[r], row_hi[r] = rhs, rhs
    matrix = sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

    options = {"mip_rel_gap": rel_gap, "presolve": True}
    if time_limit > 0:
        options["time_limit"] = time_limit
    result = milp(
        c=c,
        constraints=LinearConstraint(matrix, row_lo, row_hi),
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options=options,
    )

    if result.status == 2:
        fail(2, f"infeasible: {result.message}")
    if result.status == 3:
        fail(2, f"unbounded: {result.message}")
    if result.x is None:
        fail(3, f"no incumbent: {result.message}")

    with open(sol_path, "w") as out:
        out.write("# scipy.optimize.milp (HiGHS)\n")
        out.write(f"objective {float(result.fun)!r}\n")
        dual = getattr(result, "mip_dual_bound", None)
        if dual is not None:
            out.write(f"bound {float(dual)!r}\n")
        for name, value in zip(names, result.x):
            if abs(value) > 1e-12:
                out.write(f"{name} {float(value)!r}\n")
    sys.exit(0)


if __name__ == "__main__":
    main()
