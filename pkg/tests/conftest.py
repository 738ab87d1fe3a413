import itertools
from pathlib import Path

import pytest
from hypothesis import strategies as st

from fskolem import AigManager, parse_qdimacs

FIXTURES = Path(__file__).parent / "fixtures"

# variable ids of the golden instance (three clauses over x1 x2 y1 y2 y3)
X1, X2, Y1, Y2, Y3 = 1, 2, 3, 4, 5


@pytest.fixture
def golden():
    return parse_qdimacs((FIXTURES / "golden.qdimacs").read_text(), name="golden")


def f_golden(e):
    """The golden instance as plain Python over an env dict."""
    x1, x2, y1, y2, y3 = (e[v] for v in (X1, X2, Y1, Y2, Y3))
    f1 = (not x1) or (not x2) or (not y1)
    f2 = x2 or (not y3) or (not y2)
    f3 = x1 or (not x2) or y3
    return f1 and f2 and f3


def assignments(variables):
    variables = list(variables)
    for bits in itertools.product((0, 1), repeat=len(variables)):
        yield dict(zip(variables, bits))


def same_function(mgr, f, pyfunc, variables):
    """Exhaustive comparison of AIG ``f`` against a Python predicate."""
    return all(bool(mgr.eval(f, env)) == bool(pyfunc(env)) for env in assignments(variables))


# ----------------------------------------------------------------------
# expression trees independent of the AIG code


def exprs(num_vars):
    leaves = st.one_of(
        st.integers(1, num_vars).map(lambda v: ("var", v)),
        st.sampled_from([("const", 0), ("const", 1)]),
    )

    def extend(children):
        return st.one_of(
            children.map(lambda e: ("not", e)),
            st.tuples(st.sampled_from(["and", "or", "xor"]), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


def py_eval(e, env):
    tag = e[0]
    if tag == "var":
        return env[e[1]]
    if tag == "const":
        return e[1]
    if tag == "not":
        return 1 - py_eval(e[1], env)
    a, b = py_eval(e[1], env), py_eval(e[2], env)
    return {"and": a & b, "or": a | b, "xor": a ^ b}[tag]


def build(mgr, e):
    tag = e[0]
    if tag == "var":
        return mgr.mk_var(e[1])
    if tag == "const":
        return e[1]
    if tag == "not":
        return mgr.mk_not(build(mgr, e[1]))
    a, b = build(mgr, e[1]), build(mgr, e[2])
    return {"and": mgr.mk_and, "or": mgr.mk_or, "xor": mgr.mk_xor}[tag](a, b)


def fresh_manager(num_vars):
    mgr = AigManager()
    for v in range(1, num_vars + 1):
        mgr.mk_var(v)
    return mgr


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get("acceptance", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
