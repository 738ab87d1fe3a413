"""Skolem function synthesis for factored formulas.

Two engines:

* ``mono_skolem`` eliminates x1..xn one at a time, each time conjoining every
  factor that mentions the variable and taking the positive cofactor as the
  Skolem function.
* ``cegar_skolem`` never builds those conjunctions.  It starts from per-factor
  under-approximations of the "can't be 0 / can't be 1" functions and grows
  them from counterexamples to the error formula until the abstract vector
  is a Skolem function vector.

Both finish with ``reverse_substitute`` so that every function depends on Y
only.  Positions in ``x_order`` are 0-based throughout.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .aig import FALSE, TRUE, AigManager
from .frontend import FactoredSpec, TseitinEncoder
from .sat_oracle import SatOracle

logger = logging.getLogger(__name__)

CHAINED = "chained"
FINAL = "final"

GENERALIZE_STRATEGIES = ("cube", "whole", "element")


class EngineError(RuntimeError):
    """An invariant the algorithms guarantee was violated (a bug, not bad input)."""


class BudgetExceeded(RuntimeError):
    def __init__(self, kind: str, stats: "RunStats"):
        super().__init__(f"{kind} budget exceeded")
        self.kind = kind
        self.stats = stats


@dataclass
class Budget:
    max_iterations: int = 10**6
    max_seconds: Optional[float] = None
    max_nodes: Optional[int] = None


@dataclass
class SkolemVector:
    manager: AigManager
    x_order: List[int]
    psi: List[int]
    phase: str = CHAINED

    def __len__(self):
        return len(self.psi)

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.x_order, self.psi))

    def sizes(self) -> List[int]:
        return [self.manager.node_count(p) for p in self.psi]

    def avg_size(self) -> float:
        s = self.sizes()
        return sum(s) / len(s) if s else 0.0

    def max_size(self) -> int:
        return max(self.sizes(), default=0)


@dataclass
class RefinementStep:
    """What one ``update_abs_ref`` call did; kept for per-step checks."""

    pi: Dict[int, int]
    k: int
    l: int
    cbr1_before: List[int]
    cbr1_after: List[int]
    added: List[Tuple[int, int, int]] = field(default_factory=list)  # (bit, position, ref)


@dataclass
class RunStats:
    engine: str
    iterations: int = 0
    sat_calls: int = 0
    sat_seconds: float = 0.0
    total_seconds: float = 0.0
    avg_size: float = 0.0
    max_size: int = 0
    state: Optional["CbState"] = None
    trace: List[RefinementStep] = field(default_factory=list)

    @property
    def sat_time_frac(self) -> float:
        return self.sat_seconds / self.total_seconds if self.total_seconds > 0 else 0.0


class _Clock:
    def __init__(self, budget: Budget, stats: RunStats, mgr: AigManager):
        self.budget = budget
        self.stats = stats
        self.mgr = mgr
        self.t0 = time.perf_counter()

    def check(self):
        b = self.budget
        if b.max_seconds is not None and time.perf_counter() - self.t0 > b.max_seconds:
            self._fail("time")
        if b.max_nodes is not None and len(self.mgr) > b.max_nodes:
            self._fail("nodes")

    def _fail(self, kind):
        self.stats.total_seconds = time.perf_counter() - self.t0
        raise BudgetExceeded(kind, self.stats)


# ----------------------------------------------------------------------
# baseline


def reverse_substitute(vec: SkolemVector) -> SkolemVector:
    """Substitute psi_i into psi_1..psi_{i-1} for i = n down to 2."""
    mgr = vec.manager
    psi = list(vec.psi)
    xs = vec.x_order
    for i in range(len(psi) - 1, 0, -1):
        for k in range(i - 1, -1, -1):
            psi[k] = mgr.compose(psi[k], xs[i], psi[i])
    mgr.clear_caches()
    return SkolemVector(mgr, list(xs), psi, FINAL)


def mono_skolem(spec: FactoredSpec, budget: Optional[Budget] = None) -> Tuple[SkolemVector, RunStats]:
    mgr = spec.manager
    stats = RunStats("mono")
    clock = _Clock(budget or Budget(), stats, mgr)
    factors = list(spec.factors)
    psi = []
    for x in spec.x_order:
        clock.check()
        with_x = [f for f in factors if x in mgr.support(f)]
        factors = [f for f in factors if x not in mgr.support(f)]
        conj = mgr.mk_big_and(with_x)
        p = mgr.cofactor(conj, x, 1)
        psi.append(p)
        clock.check()
        if with_x:
            factors.append(mgr.compose(conj, x, p))
    mgr.clear_caches()
    vec = reverse_substitute(SkolemVector(mgr, list(spec.x_order), psi, CHAINED))
    clock.check()
    stats.total_seconds = time.perf_counter() - clock.t0
    stats.avg_size, stats.max_size = vec.avg_size(), vec.max_size()
    return vec, stats


# ----------------------------------------------------------------------
# refinement sets


class CbState:
    """Sets ``cbr0[i]``, ``cbr1[i]`` of functions, read as their disjunction.

    The disjunction of each set is maintained alongside the member list.
    FALSE members and structural duplicates are never stored, so an empty
    set stands for FALSE.
    """

    def __init__(self, manager: AigManager, x_order: Sequence[int]):
        self.manager = manager
        self.x_order = list(x_order)
        n = len(self.x_order)
        self.sets: Tuple[List[List[int]], List[List[int]]] = ([[] for _ in range(n)], [[] for _ in range(n)])
        self._disj: Tuple[List[int], List[int]] = ([FALSE] * n, [FALSE] * n)

    @property
    def n(self) -> int:
        return len(self.x_order)

    @property
    def cbr0(self) -> List[List[int]]:
        return self.sets[0]

    @property
    def cbr1(self) -> List[List[int]]:
        return self.sets[1]

    def add(self, bit: int, i: int, g: int) -> bool:
        if g == FALSE or g in self.sets[bit][i]:
            return False
        self.sets[bit][i].append(g)
        self._disj[bit][i] = self.manager.mk_or(self._disj[bit][i], g)
        return True

    def disj(self, bit: int, i: int) -> int:
        return self._disj[bit][i]

    def psi_abstract(self, i: int) -> int:
        return self._disj[1][i] ^ 1

    def abstract_vector(self) -> SkolemVector:
        return SkolemVector(
            self.manager, list(self.x_order), [self.psi_abstract(i) for i in range(self.n)], CHAINED
        )


def init_abs_ref(spec: FactoredSpec) -> Tuple[CbState, SkolemVector]:
    """Per-factor contributions to the refinement sets.

    For each factor f and each x_i in its support (in order), add
    ``!f[x_i<-0]`` to cbr0[i] and ``!f[x_i<-1]`` to cbr1[i], then replace f by
    ``f[x_i <- f[x_i<-1]]`` (which is ``exists x_i. f``).
    """
    mgr = spec.manager
    state = CbState(mgr, spec.x_order)
    for f in spec.factors:
        for i, x in enumerate(spec.x_order):
            if x not in mgr.support(f):
                continue
            f0 = mgr.cofactor(f, x, 0)
            f1 = mgr.cofactor(f, x, 1)
            state.add(0, i, f0 ^ 1)
            state.add(1, i, f1 ^ 1)
            f = mgr.compose(f, x, f1)
    mgr.clear_caches()
    return state, state.abstract_vector()


# ----------------------------------------------------------------------
# error formula


class ErrorFormula:
    """``F(X',Y) & AND_i (x_i <-> psi_i) & !F(X,Y)`` with a cached CNF core.

    The Tseitin encoding of ``F(X',Y) & !F(X,Y)`` is built once; each query
    forks it and adds only the ``x_i <-> psi_i`` constraints.
    """

    def __init__(self, spec: FactoredSpec):
        self.spec = spec
        mgr = spec.manager
        # primed copies are allocated once per spec and reused
        self.prime: Dict[int, int] = spec.__dict__.setdefault("_primes", {})
        for x in spec.x_order:
            if x not in self.prime:
                self.prime[x] = mgr.fresh_var(mgr.name(x) + "'")
        conj = spec.conjunction()
        self.f_prime = mgr.rename(conj, self.prime)
        self.static = mgr.mk_and(self.f_prime, conj ^ 1)
        self._core = TseitinEncoder(mgr)
        self._core.assert_root(self.static)
        for v in self.variables:
            self._core.declare(v)

    @property
    def variables(self) -> List[int]:
        return list(self.prime.values()) + list(self.spec.x_order) + list(self.spec.y_vars)

    def root(self, psi: Sequence[int]) -> int:
        mgr = self.spec.manager
        eqs = [mgr.mk_iff(mgr.mk_var(x), p) for x, p in zip(self.spec.x_order, psi)]
        return mgr.mk_and(self.static, mgr.mk_big_and(eqs))

    def encoder(self, psi: Sequence[int]) -> TseitinEncoder:
        mgr = self.spec.manager
        enc = self._core.fork()
        for x, p in zip(self.spec.x_order, psi):
            enc.assert_root(mgr.mk_iff(mgr.mk_var(x), p))
        return enc

    def check(self, psi: Sequence[int], oracle: SatOracle) -> Optional[Dict[int, int]]:
        """A counterexample over X' + X + Y, or None if the formula is UNSAT."""
        enc = self.encoder(psi)
        res = oracle.solve(enc.cnf())
        if not res.sat:
            return None
        return {v: res.model[enc.var_map[v]] for v in self.variables}


def build_error_formula(spec: FactoredSpec, psi: SkolemVector) -> Tuple[int, Dict[int, int]]:
    """AIG root of the error formula and the map x -> x' of fresh copies."""
    ef = ErrorFormula(spec)
    return ef.root(psi.psi), dict(ef.prime)


# ----------------------------------------------------------------------
# refinement


def generalize(
    manager: AigManager,
    pi: Mapping[int, int],
    members: Sequence[int],
    other: int = TRUE,
    strategy: str = "element",
) -> int:
    """A function xi with Supp(xi) in Supp(OR members), pi |= xi, xi => OR members.

    ``cube``: the literals of pi over the support of the disjunction.
    ``whole``: the disjunction itself.
    ``element``: the member true under pi that minimises
    ``|Supp(member) | Supp(other)|``; ties go to the smaller AIG, then to the
    earlier member.
    """
    mgr = manager
    if strategy == "element":
        other_supp = mgr.support(other)
        best = None
        for pos, g in enumerate(members):
            if not mgr.eval(g, pi):
                continue
            key = (len(mgr.support(g) | other_supp), mgr.node_count(g), pos)
            if best is None or key < best[0]:
                best = (key, g)
        if best is None:
            raise EngineError("generalize: assignment does not satisfy the set")
        return best[1]
    phi = mgr.mk_big_or(members)
    if not mgr.eval(phi, pi):
        raise EngineError("generalize: assignment does not satisfy the set")
    if strategy == "whole":
        return phi
    if strategy == "cube":
        return mgr.mk_cube({v: pi[v] for v in mgr.support(phi)})
    raise ValueError(f"unknown generalize strategy {strategy!r}")


def update_abs_ref(
    state: CbState, pi: Mapping[int, int], strategy: str = "element"
) -> RefinementStep:
    """Grow the refinement sets from counterexample ``pi`` (in place)."""
    mgr = state.manager
    xs = state.x_order
    n = state.n
    before = [state.disj(1, i) for i in range(n)]
    step = RefinementStep(dict(pi), -1, -1, before, [])

    def gen(bit, i, other):
        return generalize(mgr, pi, state.sets[bit][i], other, strategy)

    def add(bit, i, g):
        if state.add(bit, i, g):
            step.added.append((bit, i, g))

    k = -1
    for m in range(n - 1, -1, -1):
        if mgr.eval(state.disj(0, m), pi) and mgr.eval(state.disj(1, m), pi):
            k = m
            break
    if k < 0:
        raise EngineError("no pivot: counterexample satisfies no cbr0[k] & cbr1[k]")
    step.k = k
    mu0 = gen(0, k, TRUE)
    mu1 = gen(1, k, mu0)
    mu = mgr.mk_and(mu0, mu1)
    l = k + 1
    while True:
        if l >= n:
            raise EngineError(f"refinement scan ran past x_n (pivot k={k})")
        x = xs[l]
        if x in mgr.support(mu):
            if pi[x] == 1:
                mu1 = mgr.cofactor(mu, x, 1)
                add(1, l, mu1)
                if mgr.eval(state.disj(0, l), pi):
                    mu0 = gen(0, l, mu1)
                    mu = mgr.mk_and(mu0, mu1)
                else:
                    break
            else:
                mu0 = mgr.cofactor(mu, x, 0)
                add(0, l, mu0)
                if not mgr.eval(state.disj(1, l), pi):
                    raise EngineError(f"x_{l + 1}=0 under pi but cbr1 is false there")
                mu1 = gen(1, l, mu0)
                mu = mgr.mk_and(mu0, mu1)
        l += 1
    step.l = l
    step.cbr1_after = [state.disj(1, i) for i in range(n)]
    mgr.clear_caches()
    return step


def cegar_skolem(
    spec: FactoredSpec,
    oracle: Optional[SatOracle] = None,
    strategy: str = "element",
    budget: Optional[Budget] = None,
    record_trace: bool = False,
    on_refine: Optional[Callable[[RefinementStep], None]] = None,
) -> Tuple[SkolemVector, RunStats]:
    if strategy not in GENERALIZE_STRATEGIES:
        raise ValueError(f"unknown generalize strategy {strategy!r}")
    mgr = spec.manager
    oracle = oracle if oracle is not None else SatOracle()
    stats = RunStats("cegar")
    budget = budget or Budget()
    clock = _Clock(budget, stats, mgr)
    calls0, secs0 = oracle.calls, oracle.seconds

    def sync():
        stats.sat_calls = oracle.calls - calls0
        stats.sat_seconds = oracle.seconds - secs0

    state, _ = init_abs_ref(spec)
    stats.state = state
    ef = ErrorFormula(spec)
    while True:
        clock.check()
        psi = [state.psi_abstract(i) for i in range(state.n)]
        pi = ef.check(psi, oracle)
        sync()
        if pi is None:
            break
        if stats.iterations >= budget.max_iterations:
            raise BudgetExceeded("iterations", stats)
        step = update_abs_ref(state, pi, strategy)
        stats.iterations += 1
        if record_trace:
            stats.trace.append(step)
        if on_refine is not None:
            on_refine(step)
        logger.debug("refinement %d: k=%d l=%d", stats.iterations, step.k, step.l)
    vec = reverse_substitute(state.abstract_vector())
    clock.check()
    stats.total_seconds = time.perf_counter() - clock.t0
    stats.avg_size, stats.max_size = vec.avg_size(), vec.max_size()
    return vec, stats
