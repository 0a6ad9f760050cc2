"""Offline derivation of the regularised lattice moments

    M_ab = [∬ - sum_{n != 0}] log|y| y1^a y2^b

used by ``nvscatter.logquad``.  The moments are not convergent integrals on
their own; they are defined through Gaussian-weighted test functions.  For
``phi_s(y) = y1^a y2^b exp(-|y|^2 / s^2)`` the difference between the exact
integral and the punctured lattice sum is, up to exponentially small terms,

    sum_{i, l} (-1)^(i+l) / (s^(2i+2l) i! l!) M_{a+2i, b+2l}.

Evaluating the left side in extended precision for a range of widths ``s``
and solving the resulting least-squares system for the moments up to total
degree ``DU`` gives the low-order moments to double precision.

    python tools/log_moments.py --degree 16 --unknowns 24 --smin 7 --smax 14 --widths 12 --out M.json
"""
from __future__ import annotations

import argparse
import json
from math import factorial

import mpmath as mp
import numpy as np


def exact(s, a, b):
    """``∬ log|y| y1^a y2^b exp(-|y|^2/s^2) dy`` in closed form (a, b even)."""
    ap = a + b + 1
    s = mp.mpf(s)
    rad = (s ** (ap + 1) / 4) * mp.gamma(mp.mpf(ap + 1) / 2) * (
        2 * mp.log(s) + mp.digamma(mp.mpf(ap + 1) / 2))
    ang = 2 * mp.gamma(mp.mpf(a + 1) / 2) * mp.gamma(mp.mpf(b + 1) / 2) / mp.gamma(mp.mpf(a + b) / 2 + 1)
    return rad * ang


def lattice_sums(s, degree):
    """Punctured lattice sums of the same integrands for all even ``a >= b``."""
    R = int(9 * s) + 2
    s2 = mp.mpf(s) ** 2
    ex = [mp.exp(-mp.mpf(i * i) / s2) for i in range(R + 1)]
    pw = [[mp.mpf(i) ** a for a in range(degree + 1)] for i in range(R + 1)]
    acc = {(a, b): mp.mpf(0) for a in range(0, degree + 1, 2)
           for b in range(0, degree + 1 - a, 2) if a >= b}
    for i in range(R + 1):
        for j in range(R + 1):
            if i == 0 and j == 0:
                continue
            mult = (1 if i == 0 else 2) * (1 if j == 0 else 2)
            base = mult * mp.log(mp.mpf(i * i + j * j)) / 2 * ex[i] * ex[j]
            for a, b in acc:
                acc[(a, b)] += base * pw[i][a] * pw[j][b]
    return acc


def fit(degree, unknowns, widths):
    unk = [(c, d) for c in range(0, unknowns + 1, 2) for d in range(0, unknowns + 1, 2)
           if c + d <= unknowns and c >= d]
    idx = {u: i for i, u in enumerate(unk)}
    rows, rhs = [], []
    for s in widths:
        for (a, b), lat in lattice_sums(s, degree).items():
            row = [mp.mpf(0)] * len(unk)
            for i in range(unknowns):
                for l in range(unknowns):
                    c, d = a + 2 * i, b + 2 * l
                    if c + d > unknowns:
                        continue
                    row[idx[(max(c, d), min(c, d))]] += (
                        mp.mpf(-1) ** (i + l) / (mp.mpf(s) ** (2 * (i + l)) * factorial(i) * factorial(l)))
            sc = mp.mpf(s) ** (-mp.mpf(a + b) / 2)
            rows.append([x * sc for x in row])
            rhs.append((exact(s, a, b) - lat) * sc)
    A = np.array([[float(x) for x in r] for r in rows])
    M = np.linalg.lstsq(A, np.array([float(x) for x in rhs]), rcond=1e-15)[0]
    for _ in range(2):  # refinement with residuals in extended precision
        r = [rhs[i] - mp.fsum(rows[i][j] * M[j] for j in range(len(unk))) for i in range(len(rows))]
        M = M + np.linalg.lstsq(A, np.array([float(x) for x in r]), rcond=1e-15)[0]
    return {f"{c},{d}": float(M[idx[(c, d)]]) for c, d in unk}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=16)
    ap.add_argument("--unknowns", type=int, default=24)
    ap.add_argument("--smin", type=float, default=7.0)
    ap.add_argument("--smax", type=float, default=14.0)
    ap.add_argument("--widths", type=int, default=12)
    ap.add_argument("--dps", type=int, default=50)
    ap.add_argument("--out", default="-")
    a = ap.parse_args()
    mp.mp.dps = a.dps
    res = fit(a.degree, a.unknowns, np.linspace(a.smin, a.smax, a.widths))
    text = json.dumps(res, indent=0)
    if a.out == "-":
        print(text)
    else:
        with open(a.out, "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
