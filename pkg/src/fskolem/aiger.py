"""ASCII AIGER (``aag``) export/import and DOT output for Skolem vectors."""

from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

from .aig import AigManager


class AigerError(ValueError):
    pass


def write_aag(mgr: AigManager, outputs: Sequence[Tuple[str, int]], inputs: Sequence[int] = ()) -> str:
    """Combinational ``aag`` with one output per ``(name, ref)``.

    Inputs are ``inputs`` (variable ids, in order) followed by any other
    variable in the cone, sorted by id; each carries its manager name in the
    symbol table.
    """
    roots = [r for _, r in outputs]
    cone = mgr.cone(roots)
    leaves = [mgr.var_of(2 * i) for i in cone if mgr.is_var(2 * i)]
    order = list(inputs) + sorted(set(leaves) - set(inputs))
    lit_of: Dict[int, int] = {}
    for k, v in enumerate(order, 1):
        lit_of[mgr.mk_var(v) >> 1] = 2 * k
    gates = []
    nxt = len(order) + 1
    for i in cone:
        if mgr.is_var(2 * i):
            continue
        a, b = mgr.children(2 * i)
        lit_of[i] = 2 * nxt
        nxt += 1
        ra = lit_of[a >> 1] ^ (a & 1)
        rb = lit_of[b >> 1] ^ (b & 1)
        gates.append((lit_of[i], max(ra, rb), min(ra, rb)))

    def tr(r):
        return r if r < 2 else lit_of[r >> 1] ^ (r & 1)

    M = nxt - 1
    lines = [f"aag {M} {len(order)} 0 {len(outputs)} {len(gates)}"]
    lines += [str(2 * k) for k in range(1, len(order) + 1)]
    lines += [str(tr(r)) for _, r in outputs]
    lines += [f"{l} {a} {b}" for l, a, b in gates]
    lines += [f"i{k} {mgr.name(v)}" for k, v in enumerate(order)]
    lines += [f"o{k} {name}" for k, (name, _) in enumerate(outputs)]
    lines.append("c")
    lines.append("skolem functions")
    return "\n".join(lines) + "\n"


def read_aag(text: str, mgr: AigManager, input_vars: Dict[str, int]) -> List[Tuple[str, int]]:
    """Load outputs of an ``aag`` file into ``mgr``.

    Inputs are matched by symbol name through ``input_vars`` (name -> var id);
    an input whose name is unknown is an error.  Returns ``(name, ref)`` per
    output; unnamed outputs get ``o<k>``.
    """
    lines = text.splitlines()
    if not lines:
        raise AigerError("empty file")
    head = lines[0].split()
    if len(head) < 6 or head[0] != "aag":
        raise AigerError("not an ASCII AIGER file")
    M, I, L, O, A = map(int, head[1:6])
    if L:
        raise AigerError("latches are not supported")
    body = lines[1:]
    if len(body) < I + O + A:
        raise AigerError("truncated file")
    in_lits = [int(body[k]) for k in range(I)]
    out_lits = [int(body[I + k]) for k in range(O)]
    gate_lines = [tuple(map(int, body[I + O + k].split())) for k in range(A)]
    in_names: Dict[int, str] = {}
    out_names: Dict[int, str] = {}
    for line in body[I + O + A :]:
        if line.startswith("c"):
            break
        tag, _, name = line.partition(" ")
        if tag[:1] == "i":
            in_names[int(tag[1:])] = name
        elif tag[:1] == "o":
            out_names[int(tag[1:])] = name
    ref: Dict[int, int] = {0: 0}
    for k, lit in enumerate(in_lits):
        name = in_names.get(k, f"i{k}")
        if name not in input_vars:
            raise AigerError(f"input {name!r} does not name a free variable")
        ref[lit >> 1] = mgr.mk_var(input_vars[name])
    for g in gate_lines:
        if len(g) != 3:
            raise AigerError(f"malformed gate line {g}")
        lhs, a, b = g
        try:
            ra = ref[a >> 1] ^ (a & 1)
            rb = ref[b >> 1] ^ (b & 1)
        except KeyError:
            raise AigerError(f"gate {lhs} uses an undefined literal") from None
        ref[lhs >> 1] = mgr.mk_and(ra, rb)
    out = []
    for k, lit in enumerate(out_lits):
        if lit >> 1 not in ref:
            raise AigerError(f"output {k} uses an undefined literal")
        out.append((out_names.get(k, f"o{k}"), ref[lit >> 1] ^ (lit & 1)))
    return out


def write_dot(mgr: AigManager, outputs: Sequence[Tuple[str, int]]) -> str:
    cone = mgr.cone([r for _, r in outputs])
    lines = ["digraph aig {", "  rankdir=BT;"]
    for i in cone:
        if mgr.is_var(2 * i):
            lines.append(f'  n{i} [shape=box,label="{mgr.name(mgr.var_of(2 * i))}"];')
        else:
            lines.append(f'  n{i} [shape=circle,label="&"];')
            for c in mgr.children(2 * i):
                style = ",style=dashed" if c & 1 else ""
                src = f"n{c >> 1}" if c > 1 else "const"
                lines.append(f"  {src} -> n{i} [arrowhead=none{style}];")
    for k, (name, r) in enumerate(outputs):
        lines.append(f'  o{k} [shape=plaintext,label="{name}"];')
        style = " [style=dashed]" if r & 1 else ""
        src = f"n{r >> 1}" if r > 1 else "const"
        lines.append(f"  {src} -> o{k}{style};")
    if any(r < 2 for _, r in outputs):
        lines.append('  const [shape=box,label="0"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
