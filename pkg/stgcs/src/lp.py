"""Sparse LP assembly on top of scipy's HiGHS interface.

Variables are allocated in blocks, constraints are appended as dense blocks over a
column index array and stored as COO triplets until `solve()` builds the CSR matrices.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.optimize
import scipy.sparse

from .errors import SolverError
from ..utils import logger

# scipy.optimize.linprog status codes
OPTIMAL = 0
ITERATION_LIMIT = 1
INFEASIBLE = 2
UNBOUNDED = 3
NUMERICAL = 4

HIGHS_OPTIONS = {
    'primal_feasibility_tolerance': 1e-10,
    'dual_feasibility_tolerance': 1e-10,
}

# HiGHS defaults (1e-7 tolerances); used for the large flow relaxation
HIGHS_DEFAULT_OPTIONS: dict = {}

# tried in order after a numerical failure
FALLBACK_OPTIONS = [HIGHS_DEFAULT_OPTIONS, {'presolve': False}]


@dataclass
class LPResult:
    status: int
    x: Optional[np.ndarray]
    fun: Optional[float]
    message: str = ''

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def infeasible(self) -> bool:
        return self.status == INFEASIBLE

    @property
    def unbounded(self) -> bool:
        return self.status == UNBOUNDED


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=(None, None), options=None) -> LPResult:
    """Minimize `c @ x` with HiGHS. Infeasible and unbounded outcomes are returned, never raised.

    A numerical failure is retried with each of `FALLBACK_OPTIONS` not tried yet;
    `SolverError` is raised only when every attempt fails.
    """
    options = HIGHS_OPTIONS if options is None else options
    attempts = [options] + [o for o in FALLBACK_OPTIONS if o != options]
    for k, opts in enumerate(attempts):
        sol = scipy.optimize.linprog(
            c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
            method='highs', options=opts,
        )
        if sol.status not in (ITERATION_LIMIT, NUMERICAL):
            break
        logger.debug(f'HiGHS status {sol.status} with options {opts} ({sol.message}), attempt {k + 1}/{len(attempts)}')
    else:
        raise SolverError('LP solve failed', status=sol.status, solver_message=sol.message)
    x = sol.x if sol.status == OPTIMAL else None
    fun = float(sol.fun) if sol.status == OPTIMAL else None
    return LPResult(status=sol.status, x=x, fun=fun, message=sol.message)


class SparseLP:
    """Incrementally built LP: `min c.x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, lb <= x <= ub`."""

    def __init__(self):
        self.nb_variables = 0
        self._costs = []
        self._lower = []
        self._upper = []
        self._ub = ([], [], [])
        self._b_ub = []
        self._eq = ([], [], [])
        self._b_eq = []

    def add_variables(self, size: int, lower: float = -np.inf, upper: float = np.inf, cost: float = 0.0) -> np.ndarray:
        ids = np.arange(self.nb_variables, self.nb_variables + size)
        self.nb_variables += size
        self._costs.extend([cost] * size)
        self._lower.extend([lower] * size)
        self._upper.extend([upper] * size)
        return ids

    def set_cost(self, ids, values):
        for i, v in zip(np.atleast_1d(ids), np.broadcast_to(values, np.shape(np.atleast_1d(ids)))):
            self._costs[int(i)] += float(v)

    @staticmethod
    def _append(store, rhs_store, cols, block, rhs):
        rows, cs, vals = store
        block = np.atleast_2d(np.asarray(block, dtype=float))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        cols = np.asarray(cols)
        if cols.ndim == 1:
            cols = np.broadcast_to(cols, block.shape)
        if rhs.shape[0] != block.shape[0]:
            raise ValueError(f'rhs has {rhs.shape[0]} rows, block has {block.shape[0]}')
        offset = len(rhs_store)
        r_idx, c_idx = np.nonzero(block)
        rows.extend((r_idx + offset).tolist())
        cs.extend(cols[r_idx, c_idx].tolist())
        vals.extend(block[r_idx, c_idx].tolist())
        rhs_store.extend(rhs.tolist())

    def add_inequalities(self, cols, block, rhs):
        """Append rows `block @ x[cols] <= rhs` (`cols` per column, or per entry when 2-D)."""
        self._append(self._ub, self._b_ub, cols, block, rhs)

    def add_equalities(self, cols, block, rhs):
        """Append rows `block @ x[cols] == rhs`."""
        self._append(self._eq, self._b_eq, cols, block, rhs)

    @property
    def shape(self):
        return len(self._b_ub), len(self._b_eq), self.nb_variables

    def _matrix(self, store, nrows):
        if nrows == 0:
            return None
        rows, cols, vals = store
        return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(nrows, self.nb_variables))

    def solve(self, options=None) -> LPResult:
        n_ub, n_eq, n_var = self.shape
        logger.debug(f'Solving LP with {n_var} variables, {n_ub} inequalities, {n_eq} equalities')
        A_ub = self._matrix(self._ub, n_ub)
        A_eq = self._matrix(self._eq, n_eq)
        bounds = [(None if np.isneginf(lo) else lo, None if np.isposinf(hi) else hi) for lo, hi in zip(self._lower, self._upper)]
        return solve_lp(
            np.asarray(self._costs, dtype=float),
            A_ub=A_ub, b_ub=np.asarray(self._b_ub) if n_ub else None,
            A_eq=A_eq, b_eq=np.asarray(self._b_eq) if n_eq else None,
            bounds=bounds, options=options,
        )
