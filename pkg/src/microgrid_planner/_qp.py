"""Thin wrapper around the Clarabel interior-point solver for convex QPs.

    minimize    1/2 z'Pz + q'z
    subject to  A_eq z = b_eq,  G z <= h
"""
from __future__ import annotations

from dataclasses import dataclass

import clarabel
import numpy as np
import scipy.sparse as sp

from .core import InfeasibleModelError, NonConvergenceError

_OK = {"Solved", "AlmostSolved"}


@dataclass
class QPResult:
    z: np.ndarray
    objective: float
    status: str
    iterations: int


def solve_qp(P, q, A_eq, b_eq, G, h, tol: float = 1e-12, what: str = "model") -> QPResult:
    n = len(q)
    P = sp.triu(sp.csc_matrix(P, shape=(n, n))).tocsc()
    blocks, rhs, cones = [], [], []
    if A_eq is not None and A_eq.shape[0]:
        blocks.append(sp.csc_matrix(A_eq))
        rhs.append(np.asarray(b_eq, dtype=float))
        cones.append(clarabel.ZeroConeT(A_eq.shape[0]))
    if G is not None and G.shape[0]:
        blocks.append(sp.csc_matrix(G))
        rhs.append(np.asarray(h, dtype=float))
        cones.append(clarabel.NonnegativeConeT(G.shape[0]))
    A = sp.vstack(blocks).tocsc()
    b = np.concatenate(rhs)

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_feas = tol
    settings.tol_ktratio = 1e-8
    settings.max_iter = 200
    solver = clarabel.DefaultSolver(P, np.asarray(q, dtype=float), A, b, cones, settings)
    sol = solver.solve()
    status = str(sol.status)
    if "Infeasible" in status:
        raise InfeasibleModelError(what, status)
    if status not in _OK:
        raise NonConvergenceError(f"QP solver stopped with status {status} on {what}")
    return QPResult(np.array(sol.x), float(sol.obj_val), status, int(sol.iterations))
