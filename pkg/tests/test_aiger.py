import pytest
from hypothesis import given, settings

from fskolem.aig import FALSE, TRUE, AigManager
from fskolem.aiger import AigerError, read_aag, write_aag, write_dot

from conftest import assignments, build, exprs, fresh_manager, py_eval


@settings(max_examples=80, deadline=None)
@given(exprs(4), exprs(4))
def test_round_trip_into_fresh_manager(e1, e2):
    src = fresh_manager(4)
    f, g = build(src, e1), build(src, e2)
    text = write_aag(src, [("f", f), ("g", g)], [1, 2, 3, 4])
    dst = AigManager()
    outs = dict(read_aag(text, dst, {str(v): 10 + v for v in range(1, 5)}))
    for env in assignments(range(1, 5)):
        shifted = {10 + v: b for v, b in env.items()}
        assert dst.eval(outs["f"], shifted) == py_eval(e1, env)
        assert dst.eval(outs["g"], shifted) == py_eval(e2, env)


def test_constants_and_header():
    mgr = fresh_manager(1)
    text = write_aag(mgr, [("t", TRUE), ("f", FALSE)], [1])
    assert text.splitlines()[0] == "aag 1 1 0 2 0"
    outs = read_aag(text, AigManager(), {"1": 1})
    assert outs == [("t", TRUE), ("f", FALSE)]


def test_unknown_input_name():
    mgr = fresh_manager(2)
    text = write_aag(mgr, [("o", mgr.mk_and(mgr.mk_var(1), mgr.mk_var(2)))])
    with pytest.raises(AigerError):
        read_aag(text, AigManager(), {"1": 1})


@pytest.mark.parametrize(
    "text",
    ["", "aig 1 1 0 1 0\n2\n2\n", "aag 1 0 1 0 0\n2 3\n", "aag 3 1 0 1 1\n2\n6\n", "aag 2 1 0 1 1\n2\n4\n4 2 8\n"],
)
def test_malformed(text):
    with pytest.raises(AigerError):
        read_aag(text, AigManager(), {"i0": 1})


def test_dot_mentions_outputs_and_names():
    mgr = AigManager()
    mgr.mk_var(1, "a")
    mgr.mk_var(2, "b")
    f = mgr.mk_and(mgr.mk_var(1), mgr.mk_var(2) ^ 1)
    dot = write_dot(mgr, [("psi", f)])
    assert dot.startswith("digraph") and '"a"' in dot and "psi" in dot and "dashed" in dot
