"""Assembly of the operation problem (one or many scenarios) as a sparse QP.

Per scenario the variables are the user loads ``x`` (N*T, user-major), the
storage charge/discharge ``rc``/``rd`` and an epigraph variable ``u`` with
``u >= 0, u >= Q - r_max`` so that ``beta_o * |u|^2`` equals the operator cost.
When capacities are decision variables they come first as
``(alpha_s, alpha_w, alpha_e)``, and storage limits are written in energy
form so the whole model stays linear in them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .core import MicrogridSpec, Portfolio
from .scenarios import Scenario


@dataclass
class Block:
    x: int | None
    rc: int | None
    rd: int | None
    u: int
    n_users: int
    horizon: int

    def loads(self, z: np.ndarray) -> np.ndarray:
        if self.x is None:
            return np.zeros((0, self.horizon))
        return z[self.x : self.x + self.n_users * self.horizon].reshape(self.n_users, self.horizon)

    def storage(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        T = self.horizon
        if self.rc is None:
            return np.zeros(T), np.zeros(T)
        return z[self.rc : self.rc + T].copy(), z[self.rd : self.rd + T].copy()


@dataclass
class QPData:
    P: sp.csc_matrix
    q: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    G: sp.csr_matrix
    h: np.ndarray
    blocks: list[Block]
    invest: bool

    def args(self):
        return self.P, self.q, self.A_eq, self.b_eq, self.G, self.h


class _Rows:
    """Accumulates row groups of a sparse constraint matrix from small dense blocks."""

    def __init__(self):
        self.data, self.rows, self.cols, self.rhs = [], [], [], []
        self.m = 0

    def add(self, parts, rhs):
        """``parts`` is a list of (column offset, dense block) sharing a row count."""
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        k = len(rhs)
        for off, M in parts:
            M = np.atleast_2d(M)
            assert M.shape[0] == k
            r, c = np.nonzero(M)
            self.data.append(M[r, c])
            self.rows.append(r + self.m)
            self.cols.append(c + off)
        self.rhs.append(rhs)
        self.m += k

    def matrix(self, n):
        if not self.m:
            return sp.csr_matrix((0, n)), np.zeros(0)
        data = np.concatenate(self.data) if self.data else np.zeros(0)
        rows = np.concatenate(self.rows) if self.rows else np.zeros(0, int)
        cols = np.concatenate(self.cols) if self.cols else np.zeros(0, int)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.m, n)), np.concatenate(self.rhs)


def build(
    spec: MicrogridSpec,
    scenarios: Sequence[Scenario],
    weights: Sequence[float],
    portfolio: Portfolio,
    invest: bool = False,
    fixed_load: np.ndarray | None = None,
    days: int | None = None,
) -> QPData:
    """Stack the operation problem over ``scenarios``.

    With ``invest=False`` capacities are taken from ``portfolio`` and the
    objective is ``sum_w weight * f``; with ``invest=True`` the portfolio only
    supplies unit costs and budget and the objective is
    ``(capital cost) / days + sum_w weight * f``.
    ``fixed_load`` (length T) replaces the user variables by a given aggregate
    elastic load, so users drop out of the model.
    """
    T = spec.horizon
    N = spec.n_users if fixed_load is None else 0
    st = spec.storage
    days = spec.days if days is None else days
    with_storage = invest or portfolio.alpha_e > 0

    # column layout
    n = 3 if invest else 0
    blocks = []
    for _ in scenarios:
        x = n if N else None
        n += N * T
        rc = rd = None
        if with_storage:
            rc, rd = n, n + T
            n += 2 * T
        blocks.append(Block(x, rc, rd, n, N, T))
        n += T

    I_T = np.eye(T)
    ones_T = np.ones((1, T))
    lower_tri = np.tril(np.ones((T, T)))
    sum_users = np.hstack([I_T] * N) if N else None
    A, G = _Rows(), _Rows()
    Pdiag = np.zeros(n)
    q = np.zeros(n)

    if invest:
        c = portfolio.unit_costs
        q[:3] = c / days
        G.add([(0, -np.eye(3))], np.zeros(3))
        if np.isfinite(portfolio.budget):
            G.add([(0, c.reshape(1, 3))], [portfolio.budget])

    b = spec.inelastic if fixed_load is None else spec.inelastic + np.asarray(fixed_load, dtype=float)
    for scen, w, blk in zip(scenarios, weights, blocks):
        if N:
            lo = np.concatenate([u_.lower for u_ in spec.users])
            hi = np.concatenate([u_.upper for u_ in spec.users])
            y = np.concatenate([u_.preferred for u_ in spec.users])
            beta = np.repeat([u_.beta for u_ in spec.users], T)
            G.add([(blk.x, np.eye(N * T))], hi)
            G.add([(blk.x, -np.eye(N * T))], -lo)
            A.add([(blk.x, np.kron(np.eye(N), ones_T))], [u_.total for u_ in spec.users])
            Pdiag[blk.x : blk.x + N * T] = 2 * w * beta
            q[blk.x : blk.x + N * T] = -2 * w * beta * y

        Pdiag[blk.u : blk.u + T] = 2 * w * spec.beta_o
        G.add([(blk.u, -I_T)], np.zeros(T))

        # u >= Q - r_max  with  Q = b + sum_i x_i + rc - rd
        parts = [(blk.u, -I_T)]
        neg_parts = []
        if N:
            parts.append((blk.x, sum_users))
            neg_parts.append((blk.x, -sum_users))
        if with_storage:
            parts += [(blk.rc, I_T), (blk.rd, -I_T)]
            neg_parts += [(blk.rc, -I_T), (blk.rd, I_T)]
        if invest:
            parts.append((0, np.column_stack([-scen.solar, -scen.wind, np.zeros(T)])))
            G.add(parts, -b)
        else:
            r_max = scen.solar * portfolio.alpha_s + scen.wind * portfolio.alpha_w
            G.add(parts, r_max - b)
        # Q >= 0
        if neg_parts:
            G.add(neg_parts, b)

        if with_storage:
            net_c = st.eta_c * lower_tri
            net_d = -(1.0 / st.eta_d) * lower_tri
            G.add([(blk.rc, -I_T)], np.zeros(T))
            G.add([(blk.rd, -I_T)], np.zeros(T))
            A.add([(blk.rc, st.eta_c * ones_T), (blk.rd, -(1.0 / st.eta_d) * ones_T)], [0.0])
            if invest:
                e_col = lambda coef: (0, np.column_stack([np.zeros(T), np.zeros(T), np.full(T, coef)]))
                G.add([(blk.rc, I_T), e_col(-st.charge_rate)], np.zeros(T))
                G.add([(blk.rd, I_T), e_col(-st.discharge_rate)], np.zeros(T))
                G.add([(blk.rc, net_c), (blk.rd, net_d), e_col(-(st.soc_max - st.soc0))], np.zeros(T))
                G.add([(blk.rc, -net_c), (blk.rd, -net_d), e_col(-(st.soc0 - st.soc_min))], np.zeros(T))
            else:
                a = portfolio.alpha_e
                G.add([(blk.rc, I_T)], np.full(T, a * st.charge_rate))
                G.add([(blk.rd, I_T)], np.full(T, a * st.discharge_rate))
                G.add([(blk.rc, net_c), (blk.rd, net_d)], np.full(T, a * (st.soc_max - st.soc0)))
                G.add([(blk.rc, -net_c), (blk.rd, -net_d)], np.full(T, a * (st.soc0 - st.soc_min)))

    A_eq, b_eq = A.matrix(n)
    G_in, h = G.matrix(n)
    return QPData(sp.diags(Pdiag, format="csc"), q, A_eq, b_eq, G_in, h, blocks, invest)
