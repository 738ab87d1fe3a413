import itertools
import stat
import sys

import numpy as np
import pytest

from fskolem.frontend import Cnf
from fskolem.sat_oracle import (
    CdclSolver,
    OracleError,
    SatOracle,
    _luby,
    check_model,
    parse_solver_output,
)
from fskolem.skolem import ErrorFormula, init_abs_ref

from conftest import X1, X2, Y1, Y2, Y3, f_golden


def brute_sat(num_vars, clauses):
    for bits in itertools.product((0, 1), repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def random_cnf(rng, num_vars, num_clauses, width=3):
    clauses = []
    for _ in range(num_clauses):
        k = int(rng.integers(1, width + 1))
        vs = rng.choice(np.arange(1, num_vars + 1), size=min(k, num_vars), replace=False)
        clauses.append([int(v) if rng.random() < 0.5 else -int(v) for v in vs])
    return Cnf(num_vars, clauses)


def test_unit_sat():
    res = SatOracle().solve(Cnf(1, [[1]]))
    assert res.sat and res.model == {1: 1}


def test_unit_unsat():
    assert not SatOracle().solve(Cnf(1, [[1], [-1]])).sat


def test_empty_clause_and_empty_cnf():
    assert not SatOracle().solve(Cnf(2, [[1, 2], []])).sat
    res = SatOracle().solve(Cnf(3, []))
    assert res.sat and res.model == {1: 0, 2: 0, 3: 0}  # don't-cares complete with 0


def test_luby_prefix():
    assert [_luby(i) for i in range(1, 16)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_pigeonhole_unsat():
    # 4 pigeons, 3 holes
    var = lambda p, h: 3 * p + h + 1
    clauses = [[var(p, h) for h in range(3)] for p in range(4)]
    for h in range(3):
        for p, q in itertools.combinations(range(4), 2):
            clauses.append([-var(p, h), -var(q, h)])
    assert CdclSolver(12, clauses).solve() is None


def test_randomized_against_brute_force():
    rng = np.random.default_rng(2024)
    oracle = SatOracle()
    for _ in range(400):
        nv = int(rng.integers(1, 13))
        cnf = random_cnf(rng, nv, int(rng.integers(0, 5 * nv)))
        res = oracle.solve(cnf)
        assert res.sat == brute_sat(nv, cnf.clauses)
        if res.sat:
            assert check_model(cnf, res.model) is None
    assert oracle.calls == 400


def test_conflict_budget():
    var = lambda p, h: 5 * p + h + 1
    clauses = [[var(p, h) for h in range(5)] for p in range(6)]
    for h in range(5):
        for p, q in itertools.combinations(range(6), 2):
            clauses.append([-var(p, h), -var(q, h)])
    with pytest.raises(OracleError):
        SatOracle(max_conflicts=3).solve(Cnf(30, clauses))


def test_parse_solver_output():
    res = parse_solver_output("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 4)
    assert res.model == {1: 1, 2: 0, 3: 1, 4: 0}
    assert not parse_solver_output("s UNSATISFIABLE\n", 4).sat
    with pytest.raises(OracleError):
        parse_solver_output("s UNKNOWN\n", 1)
    with pytest.raises(OracleError):
        parse_solver_output("garbage\n", 1)


@pytest.fixture
def external_solver(tmp_path):
    script = tmp_path / "solver.sh"
    script.write_text(f'#!/bin/sh\nexec "{sys.executable}" -m fskolem.sat_oracle "$@"\n')
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    return str(script)


def test_external_backend_matches_internal(external_solver):
    rng = np.random.default_rng(5)
    ext, internal = SatOracle(external_solver), SatOracle()
    for _ in range(15):
        cnf = random_cnf(rng, 8, 30)
        a, b = ext.solve(cnf), internal.solve(cnf)
        assert a.sat == b.sat
        if a.sat:
            assert check_model(cnf, a.model) is None


def test_external_bad_model_is_rejected(tmp_path):
    script = tmp_path / "liar.sh"
    script.write_text("#!/bin/sh\necho 's SATISFIABLE'\necho 'v -1 0'\n")
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    with pytest.raises(OracleError):
        SatOracle(str(script)).solve(Cnf(1, [[1]]))


def test_missing_executable():
    with pytest.raises(OracleError):
        SatOracle("/nonexistent/solver-binary").solve(Cnf(1, [[1]]))


def test_golden_error_formula_sat(golden):
    _, vec = init_abs_ref(golden)
    ef = ErrorFormula(golden)
    pi = ef.check(vec.psi, SatOracle())
    assert pi is not None
    primed = {x: pi[ef.prime[x]] for x in golden.x_order}
    env = {Y1: pi[Y1], Y2: pi[Y2], Y3: pi[Y3]}
    assert f_golden({**env, X1: primed[X1], X2: primed[X2]})
    assert not f_golden({**env, X1: pi[X1], X2: pi[X2]})
