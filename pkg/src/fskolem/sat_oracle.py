"""SAT oracle: a bundled CDCL solver plus an external-process backend.

Models are total over ``1..num_vars``; variables the search never had to
decide default to 0 through phase initialisation.  Every model is checked
against the clauses before it is returned.
"""

from __future__ import annotations

import heapq
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .frontend import Cnf

SAT = "SAT"
UNSAT = "UNSAT"


class OracleError(RuntimeError):
    def __init__(self, message: str, diagnostics: str = ""):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class SatResult:
    status: str
    model: Optional[Dict[int, int]] = None

    @property
    def sat(self) -> bool:
        return self.status == SAT


def _luby(i: int) -> int:
    """i-th term (1-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


class CdclSolver:
    """Conflict-driven clause learning with two watched literals.

    First-UIP learning, VSIDS-style activities, phase saving (initial phase
    0) and Luby restarts.  Literal encoding: ``2*v`` positive, ``2*v+1``
    negative.
    """

    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]], max_conflicts: Optional[int] = None):
        self.n = num_vars
        self.max_conflicts = max_conflicts
        self.assigns = [-1] * (num_vars + 1)
        self.level = [0] * (num_vars + 1)
        self.reason = [-1] * (num_vars + 1)
        self.phase = [0] * (num_vars + 1)
        self.activity = [0.0] * (num_vars + 1)
        self.var_inc = 1.0
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.clauses: List[List[int]] = []
        self.watches: List[List[int]] = [[] for _ in range(2 * num_vars + 2)]
        self.heap = [(0.0, v) for v in range(1, num_vars + 1)]
        heapq.heapify(self.heap)
        self.conflicts = 0
        self.ok = True
        for c in clauses:
            self._add_input(c)

    def _add_input(self, clause):
        if not self.ok:
            return
        lits = set()
        for x in clause:
            v = abs(x)
            if v == 0 or v > self.n:
                raise OracleError(f"literal {x} outside 1..{self.n}")
            lits.add(2 * v + (x < 0))
        if any(l ^ 1 in lits for l in lits):
            return
        lits = sorted(lits)
        if not lits:
            self.ok = False
            return
        if len(lits) == 1:
            val = self._value(lits[0])
            if val == 0:
                self.ok = False
            elif val < 0:
                # propagated at the start of solve()
                self._enqueue(lits[0], -1)
            return
        self._attach(lits)

    def _attach(self, lits):
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)
        return ci

    def _value(self, lit):
        a = self.assigns[lit >> 1]
        if a < 0:
            return -1
        return a ^ (lit & 1)

    def _enqueue(self, lit, reason):
        v = lit >> 1
        self.assigns[v] = 1 - (lit & 1)
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int:
        """Returns the index of a conflicting clause, or -1."""
        assigns = self.assigns
        clauses = self.clauses
        watches = self.watches
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            nws = len(ws)
            while i < nws:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                a = assigns[first >> 1]
                if a >= 0 and a ^ (first & 1) == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    ak = assigns[lk >> 1]
                    if ak < 0 or ak ^ (lk & 1) == 1:
                        c[1], c[k] = lk, c[1]
                        watches[lk].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if a >= 0:
                        # first literal false: conflict
                        while i < nws:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(self.trail)
                        return ci
                    self._enqueue(first, ci)
            del ws[j:]
        return -1

    def _bump(self, v):
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.n + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.n + 1) if self.assigns[u] < 0]
            heapq.heapify(self.heap)
            return
        if self.assigns[v] < 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl):
        seen = self.seen
        learnt = [0]
        counter = 0
        p = -1
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        clause = self.clauses[confl]
        while True:
            for q in clause:
                if q == p:
                    continue
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] == cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen[p >> 1] = False
            counter -= 1
            if counter == 0:
                break
            clause = self.clauses[self.reason[p >> 1]]
        learnt[0] = p ^ 1
        for q in learnt[1:]:
            seen[q >> 1] = False
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: self.level[learnt[k] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    def _cancel_until(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        for lit in self.trail[start:]:
            v = lit >> 1
            self.phase[v] = self.assigns[v]
            self.assigns[v] = -1
            self.reason[v] = -1
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, start)

    def _pick(self):
        heap = self.heap
        while heap:
            act, v = heapq.heappop(heap)
            if self.assigns[v] < 0 and -act == self.activity[v]:
                return v
        for v in range(1, self.n + 1):
            if self.assigns[v] < 0:
                return v
        return 0

    def solve(self) -> Optional[List[int]]:
        """Returns ``assigns`` (index = variable) if SAT, else None."""
        if not self.ok:
            return None
        if self._propagate() >= 0:
            self.ok = False
            return None
        self.seen = [False] * (self.n + 1)
        restart_no = 1
        budget = 100 * _luby(restart_no)
        since_restart = 0
        while True:
            confl = self._propagate()
            if confl >= 0:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    self.ok = False
                    return None
                if self.max_conflicts is not None and self.conflicts > self.max_conflicts:
                    raise OracleError("conflict budget exhausted", f"conflicts={self.conflicts}")
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    ci = self._attach(learnt)
                    self._enqueue(learnt[0], ci)
                self.var_inc /= 0.95
                continue
            if since_restart >= budget:
                restart_no += 1
                budget = 100 * _luby(restart_no)
                since_restart = 0
                self._cancel_until(0)
                continue
            v = self._pick()
            if v == 0:
                return list(self.assigns)
            self.trail_lim.append(len(self.trail))
            self._enqueue(2 * v + (1 - self.phase[v]), -1)


def check_model(cnf: Cnf, model: Dict[int, int]) -> Optional[List[int]]:
    """First clause falsified by ``model``, or None."""
    for c in cnf.clauses:
        if not any((model.get(abs(l), 0) == 1) == (l > 0) for l in c):
            return c
    return None


@dataclass
class SatOracle:
    """Pluggable oracle.  ``backend`` is ``"internal"`` or a shell command.

    The external command receives the path of a DIMACS file as its last
    argument and must print ``s SATISFIABLE``/``s UNSATISFIABLE`` and ``v``
    lines in SAT-competition format.
    """

    backend: str = "internal"
    timeout: Optional[float] = None
    max_conflicts: Optional[int] = None
    calls: int = 0
    seconds: float = 0.0
    _cmd: List[str] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.set_backend(self.backend)

    def set_backend(self, kind: str) -> None:
        if kind == "internal":
            self._cmd = []
        else:
            cmd = shlex.split(kind)
            if not cmd:
                raise OracleError("empty solver command")
            self._cmd = cmd
        self.backend = kind

    def solve(self, cnf: Cnf) -> SatResult:
        t0 = time.perf_counter()
        try:
            if self._cmd:
                res = self._solve_external(cnf)
            else:
                assigns = CdclSolver(cnf.num_vars, cnf.clauses, self.max_conflicts).solve()
                if assigns is None:
                    res = SatResult(UNSAT)
                else:
                    res = SatResult(SAT, {v: max(assigns[v], 0) for v in range(1, cnf.num_vars + 1)})
        finally:
            self.calls += 1
            self.seconds += time.perf_counter() - t0
        if res.sat:
            bad = check_model(cnf, res.model)
            if bad is not None:
                raise OracleError("solver returned a model that violates a clause", f"clause={bad}")
        return res

    def _solve_external(self, cnf: Cnf) -> SatResult:
        fd, path = tempfile.mkstemp(suffix=".cnf")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(cnf.to_dimacs())
            try:
                proc = subprocess.run(
                    self._cmd + [path], capture_output=True, text=True, timeout=self.timeout
                )
            except FileNotFoundError:
                raise OracleError(f"solver executable not found: {self._cmd[0]}") from None
            except subprocess.TimeoutExpired as e:
                raise OracleError("external solver timed out", str(e.stdout or "")[-2000:]) from None
        finally:
            os.unlink(path)
        return parse_solver_output(proc.stdout, cnf.num_vars, proc.stderr)


def parse_solver_output(out: str, num_vars: int, stderr: str = "") -> SatResult:
    status = None
    model: Dict[int, int] = {}
    for line in out.splitlines():
        line = line.strip()
        if line.startswith("s "):
            word = line[2:].strip()
            if word == "SATISFIABLE":
                status = SAT
            elif word == "UNSATISFIABLE":
                status = UNSAT
            else:
                raise OracleError(f"solver reported {word!r}", out[-2000:] + stderr[-2000:])
        elif line.startswith("v "):
            for tok in line[2:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise OracleError(f"bad token in model line: {tok!r}", line) from None
                if lit:
                    model[abs(lit)] = 1 if lit > 0 else 0
    if status is None:
        raise OracleError("no 's' line in solver output", out[-2000:] + stderr[-2000:])
    if status == UNSAT:
        return SatResult(UNSAT)
    return SatResult(SAT, {v: model.get(v, 0) for v in range(1, num_vars + 1)})


_default = SatOracle()


def set_backend(kind: str) -> None:
    """Switch the module-level default oracle."""
    _default.set_backend(kind)


def solve(cnf: Cnf) -> SatResult:
    return _default.solve(cnf)


def _main(argv=None):
    # minimal DIMACS-in / competition-format-out driver around the internal solver
    import sys

    args = sys.argv[1:] if argv is None else argv
    text = open(args[0]).read() if args else sys.stdin.read()
    nv, clauses, cur = 0, [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line[0] == "c":
            continue
        if line[0] == "p":
            nv = int(line.split()[2])
            continue
        for tok in line.split():
            x = int(tok)
            if x == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(x)
    res = SatOracle().solve(Cnf(nv, clauses))
    if res.sat:
        print("s SATISFIABLE")
        print("v " + " ".join(str(v if res.model[v] else -v) for v in range(1, nv + 1)) + " 0")
        return 10
    print("s UNSATISFIABLE")
    return 20


if __name__ == "__main__":
    raise SystemExit(_main())
