"""Bounded-variable revised primal simplex (dense, two-phase).

Rows ``A x (<=|=|>=) b`` become ``A x + s = b`` with sign-restricted slacks.
Pricing is Dantzig's rule with lowest-index tie breaking; after a run of
degenerate pivots it falls back to Bland's rule until progress resumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
OPT_TOL = 1e-9
FEAS_TOL = 1e-6
REFACTOR_EVERY = 64
DEGENERATE_RUN = 30


class NumericalBreakdown(ArithmeticError):
    pass


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int


@dataclass
class LpStandardForm:
    c: np.ndarray
    A: np.ndarray
    senses: list
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: list
    is_binary: np.ndarray

    @classmethod
    def from_model(cls, model):
        return cls(*model.to_arrays())


class _Tableau:
    def __init__(self, A, b, lb, ub, basis, x):
        self.M = A
        self.b = b
        self.lb = lb
        self.ub = ub
        self.basis = basis
        self.x = x
        self.iterations = 0
        self.refactor()

    def refactor(self):
        B = self.M[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B) if len(self.basis) else np.zeros((0, 0))
        except np.linalg.LinAlgError as err:
            raise NumericalBreakdown("singular basis") from err
        if len(self.basis) and not np.all(np.isfinite(self.Binv)):
            raise NumericalBreakdown("basis inverse is not finite")
        nonbasic = np.ones(self.M.shape[1], dtype=bool)
        nonbasic[self.basis] = False
        rhs = self.b - self.M[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    def run(self, cost, max_iter):
        n_cols = self.M.shape[1]
        in_basis = np.zeros(n_cols, dtype=bool)
        in_basis[self.basis] = True
        degenerate = 0
        has_lb, has_ub = np.isfinite(self.lb), np.isfinite(self.ub)
        movable = self.ub - self.lb > 0
        while True:
            if self.iterations >= max_iter:
                raise NumericalBreakdown(f"iteration limit {max_iter} reached")
            pi = cost[self.basis] @ self.Binv if len(self.basis) else np.zeros(0)
            d = cost - pi @ self.M if len(self.basis) else cost.copy()
            at_lb = has_lb & (np.abs(self.x - self.lb) <= 1e-12)
            at_ub = has_ub & (np.abs(self.x - self.ub) <= 1e-12)
            up = (d < -OPT_TOL) & ~at_ub & movable
            down = (d > OPT_TOL) & ~at_lb & movable
            candidates = (up | down) & ~in_basis
            if not candidates.any():
                return "optimal"
            idx = np.flatnonzero(candidates)
            if degenerate >= DEGENERATE_RUN:
                j = int(idx[0])
            else:
                j = int(idx[np.argmax(np.abs(d[idx]))])
            delta = 1.0 if d[j] < 0 else -1.0
            alpha = self.Binv @ self.M[:, j] if len(self.basis) else np.zeros(0)
            theta, leave, leave_to = self.ratio_test(alpha, delta)
            flip = self.ub[j] - self.lb[j]
            if flip <= theta:
                theta, leave = flip, None
            if math.isinf(theta):
                return "unbounded"
            self.iterations += 1
            degenerate = degenerate + 1 if theta <= 1e-12 else 0
            self.x[j] += delta * theta
            if len(self.basis):
                self.x[self.basis] -= delta * theta * alpha
            if leave is None:
                continue
            leaving = self.basis[leave]
            self.x[leaving] = leave_to
            pivot = alpha[leave]
            if abs(pivot) < PIVOT_TOL:
                raise NumericalBreakdown(f"pivot {pivot:.3e} below tolerance")
            row = self.Binv[leave] / pivot
            self.Binv -= np.outer(alpha, row)
            self.Binv[leave] = row
            self.basis[leave] = j
            in_basis[leaving], in_basis[j] = False, True
            self.since_refactor += 1
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()

    def ratio_test(self, alpha, delta):
        """Largest step before a basic variable hits a bound; ties go to the lowest variable index."""
        if not len(self.basis):
            return math.inf, None, None
        rate = delta * alpha
        xb, lbb, ubb = self.x[self.basis], self.lb[self.basis], self.ub[self.basis]
        theta = np.full(len(rate), math.inf)
        dec = (rate > PIVOT_TOL) & np.isfinite(lbb)
        inc = (rate < -PIVOT_TOL) & np.isfinite(ubb)
        theta[dec] = (xb[dec] - lbb[dec]) / rate[dec]
        theta[inc] = (ubb[inc] - xb[inc]) / -rate[inc]
        np.maximum(theta, 0.0, out=theta)
        best = theta.min()
        if math.isinf(best):
            return best, None, None
        ties = np.flatnonzero(theta <= best + 1e-12)
        leave = int(ties[np.argmin(self.basis[ties])])
        return float(best), leave, lbb[leave] if dec[leave] else ubb[leave]


def solve_lp_arrays(c, A, senses, b, lb, ub, max_iter=None) -> LpResult:
    """Minimise ``c.x`` subject to the rows and bounds; returns status optimal/infeasible/unbounded."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    s_lb = np.array([0.0 if s in ("<=", "=") else -math.inf for s in senses])
    s_ub = np.array([0.0 if s in (">=", "=") else math.inf for s in senses])
    lb = np.concatenate([np.asarray(lb, dtype=float), s_lb])
    ub = np.concatenate([np.asarray(ub, dtype=float), s_ub])
    if np.any(lb > ub):
        return LpResult("infeasible", None, math.nan, 0)

    x = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    x[n:] = 0.0
    residual = b - A @ x[:n]
    # slack basic where its bound allows the residual, artificial otherwise
    basis, art_rows, art_sign = [], [], []
    for i in range(m):
        if s_lb[i] - 1e-12 <= residual[i] <= s_ub[i] + 1e-12:
            basis.append(n + i)
        else:
            basis.append(None)
            art_rows.append(i)
            art_sign.append(1.0 if residual[i] >= 0 else -1.0)
    k = len(art_rows)
    art = np.zeros((m, k))
    for col, (i, sign) in enumerate(zip(art_rows, art_sign)):
        art[i, col] = sign
        basis[i] = n + m + col
    M = np.hstack([A, np.eye(m), art])
    lb = np.concatenate([lb, np.zeros(k)])
    ub = np.concatenate([ub, np.full(k, math.inf)])
    x = np.concatenate([x, np.zeros(k)])
    if max_iter is None:
        max_iter = 50 * (m + n + k) + 1000

    tab = _Tableau(M, b, lb, ub, np.array(basis, dtype=int), x)
    if k:
        phase1 = np.concatenate([np.zeros(n + m), np.ones(k)])
        tab.run(phase1, max_iter)
        if tab.x[n + m:].sum() > FEAS_TOL:
            return LpResult("infeasible", None, math.nan, tab.iterations)
        tab.ub[n + m:] = 0.0
        tab.x[n + m:] = np.clip(tab.x[n + m:], 0.0, 0.0)
        tab.refactor()
    cost = np.concatenate([c, np.zeros(m + k)])
    status = tab.run(cost, max_iter)
    if status == "unbounded":
        return LpResult("unbounded", None, -math.inf, tab.iterations)
    tab.refactor()
    xs = tab.x[:n].copy()
    return LpResult("optimal", xs, float(c @ xs), tab.iterations)
