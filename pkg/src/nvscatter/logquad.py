"""Local corrections of the trapezoid rule for integrands with a ``log|z|``
singularity on the unit square lattice.

For smooth ``phi`` decaying at infinity,

    ∬ log|y| phi(y) dy  =  sum_{n != 0} log|n| phi(n) + sum_{n in S} w_n phi(n) + O(|D|^10 phi)

where the weights ``w_n`` reproduce the regularised lattice moments
``M_ab = [∬ - sum'] log|y| y1^a y2^b`` for even ``a + b <= 8``.  The moments
were computed once in extended precision (``tools/log_moments.py``); the
radial combinations are checked in the tests against the closed form
``sum_{a+b=2m} C(m, a/2) M_ab = Z'(-m)/2`` with ``Z(s) = 4 zeta(s) beta(s)``.
On a lattice of spacing ``h`` the rule picks up an extra ``h^2 log h phi(0)``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

#: regularised lattice moments M_ab (a >= b, both even), symmetric in (a, b)
LATTICE_LOG_MOMENTS = {
    (0, 0): -1.3105329259115095,
    (2, 0): -0.04859348400513646,
    (2, 2): -0.013560080068733585,
    (4, 0): 0.028784308597930262,
    (4, 2): 0.00307586462773662,
    (4, 4): 0.019813195740660514,
    (6, 0): -0.021985585588384208,
    (6, 2): -0.023172728659753266,
    (8, 0): 0.05321085605857979,
}

#: representatives of the symmetric point orbits carrying the weights
STENCIL_ORBITS = ((0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2), (4, 0))


def moment(a: int, b: int) -> float:
    if a % 2 or b % 2:
        return 0.0
    return LATTICE_LOG_MOMENTS[(max(a, b), min(a, b))]


def orbit(p: int, q: int) -> list[tuple[int, int]]:
    """Images of ``(p, q)`` under the symmetry group of the square."""
    pts = {(sx * x, sy * y) for x, y in ((p, q), (q, p)) for sx in (1, -1) for sy in (1, -1)}
    return sorted(pts)


@lru_cache(maxsize=None)
def correction_stencil() -> tuple[np.ndarray, np.ndarray]:
    """Offsets ``(n1, n2)`` and weights of the correction.

    Returns
    -------
    offsets : (P, 2) int array
    weights : (P,) float array
    """
    conds = sorted(LATTICE_LOG_MOMENTS)
    A = np.array([[sum(float(x) ** a * float(y) ** b for x, y in orbit(*o))
                   for o in STENCIL_ORBITS] for a, b in conds])
    rhs = np.array([LATTICE_LOG_MOMENTS[c] for c in conds])
    w_orb = np.linalg.solve(A, rhs)
    offsets, weights = [], []
    for o, w in zip(STENCIL_ORBITS, w_orb):
        for p in orbit(*o):
            offsets.append(p)
            weights.append(w)
    return np.array(offsets, dtype=int), np.array(weights)
