"""Solve an exported LP file with scipy.optimize.milp and print the optimum.

Only understands the subset written by the exporter: one objective, rows
with `>=`/`<=`, `free` bounds and a Binary section.
"""
import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp


def terms(text):
    out, sign, toks, i = {}, 1.0, text.split(), 0
    while i < len(toks):
        t = toks[i]
        if t in ("+", "-"):
            sign = -1.0 if t == "-" else 1.0
        else:
            try:
                coef = float(t)
                i += 1
                var = toks[i]
            except ValueError:
                coef, var = 1.0, t
            out[var] = out.get(var, 0.0) + sign * coef
            sign = 1.0
        i += 1
    return out


def main(path):
    section, objective, rows, binary, pending = None, {}, [], [], ""
    for line in open(path):
        t = line.strip()
        if not t or t.startswith("\\"):
            continue
        if t in ("Minimize", "Subject To", "Bounds", "Binary", "End"):
            section = t
            continue
        if section == "Minimize":
            objective.update(terms(t.split(":", 1)[-1]))
        elif section == "Subject To":
            pending += " " + t
            m = re.search(r"(>=|<=)\s*(\S+)$", pending)
            if m:
                body = pending[: m.start()].split(":", 1)[1]
                rows.append((terms(body), m.group(1), float(m.group(2))))
                pending = ""
        elif section == "Binary":
            binary.extend(t.split())
    names = sorted({v for r in rows for v in r[0]} | set(objective))
    index = {v: i for i, v in enumerate(names)}
    c = np.zeros(len(names))
    for v, a in objective.items():
        c[index[v]] = a
    A = np.zeros((len(rows), len(names)))
    lo, hi = [], []
    for r, (coefs, sense, rhs) in enumerate(rows):
        for v, a in coefs.items():
            A[r, index[v]] = a
        lo.append(rhs if sense == ">=" else -np.inf)
        hi.append(rhs if sense == "<=" else np.inf)
    integrality = np.array([1 if v in binary else 0 for v in names])
    lb = np.array([0.0 if v in binary else -np.inf for v in names])
    ub = np.array([1.0 if v in binary else np.inf for v in names])
    res = milp(c, constraints=LinearConstraint(A, lo, hi), integrality=integrality, bounds=Bounds(lb, ub))
    if not res.success:
        sys.exit(f"milp failed: {res.message}")
    print(repr(res.fun))


if __name__ == "__main__":
    main(sys.argv[1])
