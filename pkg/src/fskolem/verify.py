"""Independent checks of Skolem function vectors.

``certify_sat`` asks the SAT oracle whether the error formula is
unsatisfiable.  Everything else here is brute force over truth tables and
deliberately shares nothing with the engines beyond AIG evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .aig import AigManager, enumerate_columns
from .frontend import FactoredSpec
from .sat_oracle import SatOracle
from .skolem import FINAL, ErrorFormula, SkolemVector

EXHAUSTIVE_Y_BOUND = 20
EXHAUSTIVE_X_BOUND = 20
CB_BOUND = 16


class BoundExceeded(ValueError):
    pass


@dataclass
class TruthTable:
    """Boolean function tabulated over ``variables``; row r sets variables[j] to bit j of r."""

    variables: Tuple[int, ...]
    values: np.ndarray

    def __call__(self, assignment: Mapping[int, int]) -> bool:
        row = 0
        for j, v in enumerate(self.variables):
            if assignment[v]:
                row |= 1 << j
        return bool(self.values[row])

    def of(self, mgr: AigManager, f: int) -> np.ndarray:
        """Table of AIG ``f`` over the same rows."""
        return mgr.eval_vec([f], enumerate_columns(self.variables))[0]


def certify_sat(spec: FactoredSpec, vec: SkolemVector, oracle: Optional[SatOracle] = None) -> bool:
    """True iff the error formula for ``vec`` is unsatisfiable.

    Functions are matched to their variables, so ``vec`` may use any
    elimination order of the same X.
    """
    by_var = vec.as_dict()
    if set(by_var) != set(spec.x_order):
        raise ValueError("vector and spec quantify different variables")
    ef = ErrorFormula(spec)
    return ef.check([by_var[x] for x in spec.x_order], oracle or SatOracle()) is None


def _exists_x(spec: FactoredSpec, y_cols, x_bound, oracle):
    """Boolean array over Y-rows: does some X satisfy F?"""
    mgr = spec.manager
    conj = spec.conjunction()
    rows = len(next(iter(y_cols.values()))) if y_cols else 1
    if spec.n <= x_bound:
        out = np.zeros(rows, dtype=bool)
        for xbits in range(1 << spec.n):
            cols = dict(y_cols)
            for j, x in enumerate(spec.x_order):
                cols[x] = np.full(rows, bool((xbits >> j) & 1))
            out |= mgr.eval_vec([conj], cols)[0]
            if out.all():
                break
        return out
    from .frontend import TseitinEncoder

    oracle = oracle or SatOracle()
    out = np.zeros(rows, dtype=bool)
    for r in range(rows):
        enc = TseitinEncoder(mgr)
        enc.assert_root(conj)
        for y, col in y_cols.items():
            enc.assert_root(mgr.mk_var(y), bool(col[r]))
        out[r] = oracle.solve(enc.cnf()).sat
    return out


def certify_exhaustive(
    spec: FactoredSpec,
    vec: SkolemVector,
    y_bound: int = EXHAUSTIVE_Y_BOUND,
    x_bound: int = EXHAUSTIVE_X_BOUND,
    oracle: Optional[SatOracle] = None,
) -> bool:
    """For every Y-valuation, ``F(Psi(Y), Y) == exists X. F(X, Y)``."""
    if vec.phase != FINAL:
        raise ValueError("exhaustive certification needs a final (Y-only) vector")
    if set(vec.x_order) != set(spec.x_order):
        raise ValueError("vector and spec quantify different variables")
    mgr = spec.manager
    ys = set(spec.y_vars)
    for p in vec.psi:
        if not mgr.support(p) <= ys:
            raise ValueError("vector mentions variables outside Y")
    if spec.m > y_bound:
        raise BoundExceeded(f"|Y|={spec.m} exceeds bound {y_bound}")
    y_cols = enumerate_columns(spec.y_vars)
    if not y_cols:
        y_cols = {}
    rows = 1 << spec.m
    if y_cols:
        psi_cols = mgr.eval_vec(vec.psi, y_cols)
    else:
        psi_cols = [np.full(rows, bool(mgr.eval(p, {}))) for p in vec.psi]
    cols = dict(y_cols)
    for x, c in zip(vec.x_order, psi_cols):
        cols[x] = c
    if not cols:
        cols = {0: np.zeros(rows, dtype=bool)}  # shape carrier only
    lhs = mgr.eval_vec([spec.conjunction()], cols)[0]
    rhs = _exists_x(spec, y_cols, x_bound, oracle)
    return bool(np.array_equal(lhs, rhs))


def _exists_prefix(spec: FactoredSpec, i: int, bound: int = CB_BOUND) -> TruthTable:
    """``exists x_1..x_{i-1}. F`` tabulated over x_i..x_n and Y (i is 0-based)."""
    if spec.n + spec.m > bound:
        raise BoundExceeded(f"|X|+|Y|={spec.n + spec.m} exceeds bound {bound}")
    mgr = spec.manager
    conj = spec.conjunction()
    free = tuple(spec.x_order[i:]) + tuple(spec.y_vars)
    base = enumerate_columns(free)
    rows = 1 << len(free)
    acc = np.zeros(rows, dtype=bool)
    prefix = spec.x_order[:i]
    for bits in range(1 << len(prefix)):
        cols = dict(base)
        for j, x in enumerate(prefix):
            cols[x] = np.full(rows, bool((bits >> j) & 1))
        if not cols:
            cols = {0: np.zeros(rows, dtype=bool)}
        acc |= mgr.eval_vec([conj], cols)[0]
    return TruthTable(free, acc)


def _restrict(tt: TruthTable, var: int, bit: int) -> TruthTable:
    j = tt.variables.index(var)
    vars_ = tt.variables[:j] + tt.variables[j + 1 :]
    shape = (2,) * len(tt.variables)
    # row index bit j <-> axis (n-1-j) in C order
    arr = tt.values.reshape(shape)
    axis = len(tt.variables) - 1 - j
    sub = np.take(arr, bit, axis=axis)
    return TruthTable(vars_, sub.reshape(-1))


def exact_cb(spec: FactoredSpec, i: int, bit: int, bound: int = CB_BOUND) -> TruthTable:
    """``(not exists x_1..x_{i-1}. F)[x_i <- bit]`` over x_{i+1}..x_n and Y (0-based i)."""
    ex = _exists_prefix(spec, i, bound)
    r = _restrict(ex, spec.x_order[i], bit)
    return TruthTable(r.variables, ~r.values)


def implies(mgr: AigManager, f: int, tt: TruthTable) -> bool:
    """Does AIG ``f`` imply the tabulated function (f's support must be covered)?"""
    if not mgr.support(f) <= set(tt.variables):
        raise ValueError("function depends on variables outside the table")
    return bool(np.all(~tt.of(mgr, f) | tt.values))


def check_prop1(
    spec: FactoredSpec,
    i: int,
    psi: int,
    later: Optional[Sequence[int]] = None,
    bound: int = CB_BOUND,
) -> bool:
    """Skolem-space sandwich for ``psi`` as a Skolem function for x_i (0-based).

    Checks ``G[x_i<-1] & !G[x_i<-0]  =>  psi  =>  G[x_i<-1] | !G[x_i<-0]`` where
    ``G = exists x_1..x_{i-1}. F``.  If ``later`` is given (the vector's
    Y-only functions for x_{i+1}..x_n), those are substituted into G first,
    which is the right reading for a component of a final vector.
    """
    mgr = spec.manager
    cb1 = exact_cb(spec, i, 1, bound)  # = !G[x_i<-1]
    cb0 = exact_cb(spec, i, 0, bound)  # = !G[x_i<-0]
    lower = ~cb1.values & cb0.values
    upper = ~cb1.values | cb0.values
    vars_ = cb1.variables
    if later is None:
        cols = enumerate_columns(vars_)
        if not cols:
            cols = {0: np.zeros(1, dtype=bool)}
        p = mgr.eval_vec([psi], cols)[0]
        return bool(np.all(~lower | p) and np.all(~p | upper))
    rest = spec.x_order[i + 1 :]
    if len(later) != len(rest):
        raise ValueError("need one function per later variable")
    ycols = enumerate_columns(spec.y_vars)
    rows = 1 << spec.m
    if not ycols:
        ycols = {0: np.zeros(rows, dtype=bool)}
    later_cols = mgr.eval_vec(list(later), ycols) if later else []
    # row index into the (x_{i+1..n}, Y) tables for each Y-row
    idx = np.zeros(rows, dtype=np.int64)
    for j, v in enumerate(vars_):
        if v in spec.x_order:
            col = later_cols[rest.index(v)]
        else:
            col = ycols[v]
        idx |= col.astype(np.int64) << j
    cols = dict(ycols)
    for x, c in zip(rest, later_cols):
        cols[x] = c
    p = mgr.eval_vec([psi], cols)[0]
    lo, up = lower[idx], upper[idx]
    return bool(np.all(~lo | p) and np.all(~p | up))
