"""Hash-consed And-Inverter Graphs.

A reference to a function is a plain ``int`` literal in the AIGER style:
``2 * node_index + complemented``.  Node 0 is the constant, so ``FALSE == 0``
and ``TRUE == 1``.  Every other node is either a variable leaf or a two-input
AND whose children have strictly smaller indices, so ascending node order is
always a topological order.

Simplification is deliberately light: constant rules, idempotence,
contradiction, canonical child order, and the two-level rules of Brummayer
and Biere (contradiction, idempotence, subsumption, substitution,
resolution).  No rewriting or fraiging is done; semantic questions go
through truth tables or the SAT oracle.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

FALSE = 0
TRUE = 1

_CONST = -2
_LEAF = -1


class AigError(Exception):
    """Misuse of the AIG manager (foreign reference, unbound variable...)."""


def negate(ref: int) -> int:
    return ref ^ 1


def is_const(ref: int) -> bool:
    return ref < 2


def is_complemented(ref: int) -> bool:
    return bool(ref & 1)


def node_index(ref: int) -> int:
    return ref >> 1


class AigManager:
    """Node store with structural hashing.

    ``var_names`` maps variable ids to external names; ids are positive
    integers chosen by the caller (``mk_var``) or allocated (``fresh_var``).
    """

    def __init__(self, two_level: bool = True):
        self.two_level = two_level
        # left child / right child; leaves store (_LEAF, var id)
        self._left: List[int] = [_CONST]
        self._right: List[int] = [0]
        self._unique: Dict[tuple, int] = {}
        self._var_node: Dict[int, int] = {}
        self.var_names: Dict[int, str] = {}
        self._compose_cache: Dict[tuple, int] = {}
        self._support_cache: Dict[int, frozenset] = {}

    # ------------------------------------------------------------------
    # bookkeeping

    def __len__(self):
        return len(self._left)

    @property
    def num_ands(self) -> int:
        return len(self._left) - 1 - len(self._var_node)

    def check(self, ref) -> None:
        if not isinstance(ref, (int, np.integer)) or ref < 0 or (ref >> 1) >= len(self._left):
            raise AigError(f"reference {ref!r} does not belong to this manager")

    def clear_caches(self) -> None:
        """Drop compose/cofactor and support memo tables."""
        self._compose_cache.clear()
        self._support_cache.clear()

    def is_var(self, ref: int) -> bool:
        return self._left[ref >> 1] == _LEAF

    def is_and(self, ref: int) -> bool:
        return self._left[ref >> 1] >= 0

    def var_of(self, ref: int) -> int:
        """Variable id of a leaf reference (ignoring complementation)."""
        idx = ref >> 1
        if self._left[idx] != _LEAF:
            raise AigError(f"reference {ref} is not a variable")
        return self._right[idx]

    def children(self, ref: int) -> tuple:
        idx = ref >> 1
        if self._left[idx] < 0:
            raise AigError(f"reference {ref} is not an AND node")
        return self._left[idx], self._right[idx]

    @property
    def variables(self) -> List[int]:
        return sorted(self._var_node)

    def name(self, var: int) -> str:
        return self.var_names.get(var, str(var))

    # ------------------------------------------------------------------
    # construction

    def mk_var(self, var: int, name: Optional[str] = None) -> int:
        if var <= 0:
            raise AigError(f"variable ids must be positive, got {var}")
        idx = self._var_node.get(var)
        if idx is None:
            idx = len(self._left)
            self._left.append(_LEAF)
            self._right.append(var)
            self._var_node[var] = idx
            if name is not None:
                self.var_names[var] = name
        elif name is not None and self.var_names.get(var, name) != name:
            raise AigError(f"variable {var} already bound to {self.var_names[var]!r}")
        return 2 * idx

    def has_var(self, var: int) -> bool:
        return var in self._var_node

    def fresh_var(self, name: Optional[str] = None) -> int:
        """Allocate an unused variable id and return it (the id, not a ref)."""
        var = max(self._var_node, default=0) + 1
        self.mk_var(var, name)
        return var

    def mk_not(self, a: int) -> int:
        self.check(a)
        return a ^ 1

    def mk_and(self, a: int, b: int) -> int:
        self.check(a)
        self.check(b)
        return self._and(a, b)

    def _and(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if a == b:
            return a
        if a ^ b == 1:
            return FALSE
        if self.two_level:
            r = self._two_level(a, b)
            if r is not None:
                return r
        key = (a, b)
        idx = self._unique.get(key)
        if idx is None:
            idx = len(self._left)
            self._left.append(a)
            self._right.append(b)
            self._unique[key] = idx
        return 2 * idx

    def _two_level(self, a: int, b: int) -> Optional[int]:
        L, R = self._left, self._right
        a_and = L[a >> 1] >= 0
        b_and = L[b >> 1] >= 0
        if a_and and not a & 1:
            c, d = L[a >> 1], R[a >> 1]
            if b == c ^ 1 or b == d ^ 1:
                return FALSE
            if b == c or b == d:
                return a
        if b_and and not b & 1:
            c, d = L[b >> 1], R[b >> 1]
            if a == c ^ 1 or a == d ^ 1:
                return FALSE
            if a == c or a == d:
                return b
        if a_and and b_and:
            c, d = L[a >> 1], R[a >> 1]
            e, f = L[b >> 1], R[b >> 1]
            if not a & 1 and not b & 1:
                if c ^ 1 in (e, f) or d ^ 1 in (e, f):
                    return FALSE
            elif a & 1 and b & 1:
                # (!c | !d) & (!e | !f) with a resolvable pair
                if (c == e and d == f ^ 1) or (c == f and d == e ^ 1):
                    return c ^ 1
                if (d == e and c == f ^ 1) or (d == f and c == e ^ 1):
                    return d ^ 1
            else:
                if a & 1:
                    neg, pos = (c, d), (e, f)
                    pos_ref = b
                else:
                    neg, pos = (e, f), (c, d)
                    pos_ref = a
                # subsumption: the positive AND already falsifies the negated one
                if neg[0] ^ 1 in pos or neg[1] ^ 1 in pos:
                    return pos_ref
                if neg[0] in pos:
                    return self._and(neg[1] ^ 1, pos_ref)
                if neg[1] in pos:
                    return self._and(neg[0] ^ 1, pos_ref)
        for x, y in ((a, b), (b, a)):
            if L[x >> 1] >= 0 and x & 1:
                c, d = L[x >> 1], R[x >> 1]
                if y == c ^ 1 or y == d ^ 1:
                    return y
                if y == c:
                    return self._and(y, d ^ 1)
                if y == d:
                    return self._and(y, c ^ 1)
        return None

    def mk_or(self, a: int, b: int) -> int:
        return self.mk_and(a ^ 1, b ^ 1) ^ 1

    def mk_xor(self, a: int, b: int) -> int:
        # (a | b) & !(a & b)
        return self.mk_and(self.mk_or(a, b), self.mk_and(a, b) ^ 1)

    def mk_iff(self, a: int, b: int) -> int:
        return self.mk_xor(a, b) ^ 1

    def mk_ite(self, c: int, t: int, e: int) -> int:
        return self.mk_or(self.mk_and(c, t), self.mk_and(c ^ 1, e))

    def mk_big_and(self, refs: Iterable[int]) -> int:
        acc = TRUE
        for r in refs:
            acc = self.mk_and(acc, r)
            if acc == FALSE:
                break
        return acc

    def mk_big_or(self, refs: Iterable[int]) -> int:
        return self.mk_big_and(r ^ 1 for r in refs) ^ 1

    def mk_cube(self, assignment: Mapping[int, int]) -> int:
        """Conjunction of the literals of a partial assignment."""
        return self.mk_big_and(
            self.mk_var(v) ^ (0 if assignment[v] else 1) for v in sorted(assignment)
        )

    # ------------------------------------------------------------------
    # traversal

    def cone(self, roots: Iterable[int]) -> List[int]:
        """Node indices reachable from ``roots`` in ascending (topological) order."""
        L, R = self._left, self._right
        seen = set()
        stack = []
        for r in roots:
            self.check(r)
            stack.append(r >> 1)
        while stack:
            idx = stack.pop()
            if idx in seen or idx == 0:
                continue
            seen.add(idx)
            if L[idx] >= 0:
                stack.append(L[idx] >> 1)
                stack.append(R[idx] >> 1)
        return sorted(seen)

    def support(self, f: int) -> frozenset:
        idx = f >> 1
        self.check(f)
        cached = self._support_cache.get(idx)
        if cached is None:
            L, R = self._left, self._right
            cached = frozenset(R[i] for i in self.cone([f]) if L[i] == _LEAF)
            self._support_cache[idx] = cached
        return cached

    def node_count(self, f: int) -> int:
        """Number of distinct AND nodes reachable from ``f``.

        Variable leaves and the constant are not counted; shared nodes count
        once.
        """
        return self.node_count_many([f])

    def node_count_many(self, roots: Iterable[int]) -> int:
        L = self._left
        return sum(1 for i in self.cone(roots) if L[i] >= 0)

    # ------------------------------------------------------------------
    # substitution

    def compose_many(self, f: int, subst: Mapping[int, int]) -> int:
        """Simultaneously replace variables by functions: ``f[v <- subst[v]]``."""
        self.check(f)
        if f < 2 or not subst:
            return f
        for g in subst.values():
            self.check(g)
        L, R = self._left, self._right
        new: Dict[int, int] = {}
        for idx in self.cone([f]):
            left = L[idx]
            if left == _LEAF:
                new[idx] = subst.get(R[idx], 2 * idx)
                continue
            right = R[idx]
            nl = new.get(left >> 1, 0) ^ (left & 1) if left > 1 else left
            nr = new.get(right >> 1, 0) ^ (right & 1) if right > 1 else right
            if nl == left and nr == right:
                new[idx] = 2 * idx
            else:
                new[idx] = self._and(nl, nr)
        return new[f >> 1] ^ (f & 1)

    def compose(self, f: int, var: int, g: int) -> int:
        """``f[var <- g]``, memoized until ``clear_caches``."""
        key = (f, var, g)
        r = self._compose_cache.get(key)
        if r is None:
            if var not in self._var_node:
                r = f
                self.check(f)
                self.check(g)
            else:
                r = self.compose_many(f, {var: g})
            self._compose_cache[key] = r
        return r

    def cofactor(self, f: int, var: int, bit: int) -> int:
        return self.compose(f, var, TRUE if bit else FALSE)

    def rename(self, f: int, mapping: Mapping[int, int]) -> int:
        """Rename variables (var id -> var id)."""
        return self.compose_many(f, {v: self.mk_var(w) for v, w in mapping.items()})

    # ------------------------------------------------------------------
    # evaluation

    def eval(self, f: int, assignment: Mapping[int, int]) -> int:
        """Value of ``f`` under ``assignment`` (var id -> 0/1)."""
        return self.eval_many([f], assignment)[0]

    def eval_many(self, roots: Sequence[int], assignment: Mapping[int, int]) -> List[int]:
        L, R = self._left, self._right
        val = {0: 0}
        for idx in self.cone(roots):
            left = L[idx]
            if left == _LEAF:
                v = R[idx]
                try:
                    val[idx] = 1 if assignment[v] else 0
                except KeyError:
                    raise AigError(f"variable {self.name(v)} is unassigned") from None
            else:
                right = R[idx]
                val[idx] = (val[left >> 1] ^ (left & 1)) & (val[right >> 1] ^ (right & 1))
        return [val[r >> 1] ^ (r & 1) for r in roots]

    def eval_vec(self, roots: Sequence[int], columns: Mapping[int, np.ndarray]):
        """Bit-parallel evaluation.

        ``columns`` maps each support variable to a boolean array; all arrays
        must share one shape.  Returns one boolean array per root.
        """
        if not columns:
            shape: tuple = (1,)
        else:
            shape = np.shape(next(iter(columns.values())))
        L, R = self._left, self._right
        val: Dict[int, np.ndarray] = {0: np.zeros(shape, dtype=bool)}

        def get(lit):
            a = val[lit >> 1]
            return ~a if lit & 1 else a

        for idx in self.cone(roots):
            left = L[idx]
            if left == _LEAF:
                v = R[idx]
                if v not in columns:
                    raise AigError(f"variable {self.name(v)} is unassigned")
                val[idx] = np.asarray(columns[v], dtype=bool)
            else:
                val[idx] = get(left) & get(R[idx])
        return [np.broadcast_to(get(r), shape).copy() for r in roots]


def enumerate_columns(variables: Sequence[int]) -> Dict[int, np.ndarray]:
    """Columns of a full truth table; row ``r`` sets ``variables[j]`` to bit j of r."""
    rows = np.arange(1 << len(variables), dtype=np.int64)
    return {v: ((rows >> j) & 1).astype(bool) for j, v in enumerate(variables)}


def truth_table(mgr: AigManager, f: int, variables: Sequence[int]) -> np.ndarray:
    """Truth table of ``f`` over ``variables`` (row layout of ``enumerate_columns``)."""
    return mgr.eval_vec([f], enumerate_columns(variables))[0]
