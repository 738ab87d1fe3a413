"""Random factored instances for tests and benchmark sweeps."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .aig import FALSE, TRUE, AigManager
from .frontend import FactoredSpec


def function_from_table(mgr: AigManager, variables: Sequence[int], table: Sequence[bool]) -> int:
    """AIG for the function whose row r (bit j of r = variables[j]) is ``table[r]``.

    Built by Shannon expansion on the highest variable first.
    """
    table = [bool(t) for t in table]
    if len(table) != 1 << len(variables):
        raise ValueError("table length must be 2**len(variables)")

    def build(k, rows):
        if all(rows):
            return TRUE
        if not any(rows):
            return FALSE
        half = len(rows) // 2
        v = mgr.mk_var(variables[k - 1])
        lo = build(k - 1, rows[:half])
        hi = build(k - 1, rows[half:])
        return mgr.mk_ite(v, hi, lo)

    # rows are ordered with variables[-1] as the most significant bit
    return build(len(variables), table)


def random_spec(
    rng: np.random.Generator,
    n_max: int = 6,
    m_max: int = 6,
    r_max: int = 10,
    width: int = 4,
    clause_prob: float = 0.3,
    true_prob: float = 0.7,
    x_bias: float = 0.5,
    name: str = "",
    manager: Optional[AigManager] = None,
) -> FactoredSpec:
    """Random instance: each factor is a random clause or a random function.

    Sizes are drawn uniformly from ``1..n_max`` (X), ``0..m_max`` (Y) and
    ``1..r_max`` (factors).  Every factor mentions at most ``width``
    variables and at least one X variable.
    """
    mgr = manager if manager is not None else AigManager()
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    r = int(rng.integers(1, r_max + 1))
    xs = [mgr.fresh_var(f"x{i + 1}") for i in range(n)]
    ys = [mgr.fresh_var(f"y{j + 1}") for j in range(m)]
    pool = xs + ys
    factors = []
    for _ in range(r):
        w = int(rng.integers(1, min(width, len(pool)) + 1))
        vs = [xs[int(rng.integers(n))]]
        while len(vs) < w:
            # with probability x_bias draw from X, otherwise from X and Y alike
            src = xs if rng.random() < x_bias else pool
            cand = [v for v in src if v not in vs] or [v for v in pool if v not in vs]
            vs.append(cand[int(rng.integers(len(cand)))])
        if rng.random() < clause_prob:
            signs = rng.integers(0, 2, size=len(vs))
            f = mgr.mk_big_or(mgr.mk_var(v) ^ int(s) for v, s in zip(vs, signs))
        else:
            # bias towards satisfiable factors so F is rarely trivially false
            table = rng.random(1 << len(vs)) < true_prob
            f = function_from_table(mgr, vs, table)
        factors.append(f)
    return FactoredSpec(mgr, factors, xs, ys, name)


def random_suite(seed: int, count: int, **kwargs):
    """``count`` independent instances, reproducible from ``seed``."""
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        yield random_spec(rng, name=f"random-{seed}-{k}", **kwargs)
