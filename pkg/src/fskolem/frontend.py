"""Problem instances: parsing, variable ordering and CNF encoding."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .aig import FALSE, TRUE, AigManager


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {col}" if col is not None else "") + ": "
        super().__init__(where + message)


@dataclass
class FactoredSpec:
    """``exists X. f1 & ... & fr`` over free variables Y.

    ``x_order`` is the elimination order x1..xn; ``y_vars`` is kept sorted.
    """

    manager: AigManager
    factors: List[int]
    x_order: List[int]
    y_vars: List[int]
    name: str = ""

    def __post_init__(self):
        self.factors = list(self.factors)
        self.x_order = list(self.x_order)
        self.y_vars = sorted(set(self.y_vars))
        if len(set(self.x_order)) != len(self.x_order):
            raise ValueError("x_order has duplicates")
        xs = set(self.x_order)
        if xs & set(self.y_vars):
            raise ValueError("X and Y overlap")
        allowed = xs | set(self.y_vars)
        for f in self.factors:
            stray = self.manager.support(f) - allowed
            if stray:
                names = ", ".join(self.manager.name(v) for v in sorted(stray))
                raise ValueError(f"factor mentions undeclared variables: {names}")

    @property
    def n(self) -> int:
        return len(self.x_order)

    @property
    def m(self) -> int:
        return len(self.y_vars)

    @property
    def r(self) -> int:
        return len(self.factors)

    def conjunction(self) -> int:
        return self.manager.mk_big_and(self.factors)

    def with_order(self, x_order: Sequence[int]) -> "FactoredSpec":
        if sorted(x_order) != sorted(self.x_order):
            raise ValueError("new order is not a permutation of X")
        return FactoredSpec(self.manager, self.factors, list(x_order), self.y_vars, self.name)


@dataclass
class Cnf:
    num_vars: int
    clauses: List[List[int]] = field(default_factory=list)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# QDIMACS


def parse_qdimacs(text: str, manager: Optional[AigManager] = None, name: str = "") -> FactoredSpec:
    """Read a QDIMACS instance; each clause becomes one factor.

    Only prefixes of the shape ``[a Y] [e X]`` are accepted (consecutive
    blocks of the same kind are merged).  X is the innermost ``e`` block;
    every other variable (universal or unquantified) is free.
    """
    mgr = manager if manager is not None else AigManager()
    header = None
    blocks: List[Tuple[str, List[int]]] = []
    quantified: Dict[int, int] = {}
    clauses: List[List[int]] = []
    current: List[int] = []
    seen_clause = False
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), 1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise ParseError("negative counts in header", lineno)
            continue
        if header is None:
            raise ParseError("missing 'p cnf' header", lineno)
        nvars = header[0]
        tokens = line.split()
        if tokens[0] in ("a", "e"):
            if seen_clause:
                raise ParseError("quantifier line after clauses", lineno)
            if tokens[-1] != "0":
                raise ParseError("quantifier line must end with 0", lineno)
            vs = []
            for tok in tokens[1:-1]:
                v = _int(tok, lineno)
                if v <= 0 or v > nvars:
                    raise ParseError(f"variable {tok} out of range", lineno)
                if v in quantified:
                    raise ParseError(f"variable {v} quantified twice", lineno)
                quantified[v] = lineno
                vs.append(v)
            if blocks and blocks[-1][0] == tokens[0]:
                blocks[-1][1].extend(vs)
            else:
                blocks.append((tokens[0], vs))
            continue
        seen_clause = True
        for tok in tokens:
            lit = _int(tok, lineno)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                if abs(lit) > nvars:
                    raise ParseError(f"literal {lit} out of range", lineno)
                current.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' header", last_line or None)
    if current:
        raise ParseError("last clause is not terminated by 0", last_line)
    if len(clauses) != header[1]:
        raise ParseError(f"header announces {header[1]} clauses, found {len(clauses)}", last_line)

    kinds = tuple(k for k, _ in blocks if _)
    if kinds not in ((), ("e",), ("a",), ("a", "e")):
        raise ParseError(
            "unsupported prefix " + " ".join(kinds) + ": expected a single exists block innermost"
        )
    x_order = [v for k, vs in blocks if k == "e" for v in vs]

    used = {abs(l) for c in clauses for l in c} | set(quantified)
    for v in sorted(used):
        mgr.mk_var(v, str(v))
    factors = [mgr.mk_big_or(mgr.mk_var(abs(l)) ^ (l < 0) for l in c) for c in clauses]
    xs = set(x_order)
    y_vars = [v for v in used if v not in xs]
    return FactoredSpec(mgr, factors, x_order, y_vars, name)


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"unexpected token {tok!r}", lineno) from None


# ----------------------------------------------------------------------
# .fctr: declarations + one Boolean expression per factor

_TOKEN = re.compile(r"\s*(?:(#[^\n]*)|([A-Za-z_][A-Za-z0-9_'.\[\]]*)|(\d+)|(.))")


def _tokenize(text: str):
    line, col0 = 1, 0
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        # line/column bookkeeping over the consumed span
        chunk = text[pos:start]
        nl = chunk.count("\n")
        if nl:
            line += nl
            col0 = pos + chunk.rfind("\n") + 1
        pos = m.end()
        if m.lastindex is None:
            continue
        kind = ("comment", "name", "num", "op")[m.lastindex - 1]
        if kind == "comment":
            continue
        out.append((kind, m.group(m.lastindex), line, start - col0 + 1))
    out.append(("eof", "", line, pos - col0 + 1))
    return out


class _ExprParser:
    # precedence: ! > & > ^ > | > -> > <->
    def __init__(self, tokens, mgr: AigManager, names: Dict[str, int]):
        self.toks = tokens
        self.i = 0
        self.mgr = mgr
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        t = self.take()
        if t[1] != value:
            raise ParseError(f"expected {value!r}, got {t[1] or 'end of input'!r}", t[2], t[3])
        return t

    def parse(self):
        return self.iff()

    def iff(self):
        a = self.implies()
        while self.peek()[1] == "<" and self._lookahead("<", "-", ">"):
            self.i += 3
            a = self.mgr.mk_iff(a, self.implies())
        return a

    def implies(self):
        a = self.disj()
        if self.peek()[1] == "-" and self._lookahead("-", ">"):
            self.i += 2
            return self.mgr.mk_or(a ^ 1, self.implies())
        return a

    def _lookahead(self, *vals):
        return all(
            self.i + k < len(self.toks) and self.toks[self.i + k][1] == v
            for k, v in enumerate(vals)
        )

    def disj(self):
        a = self.xor()
        while self.peek()[1] == "|":
            self.take()
            a = self.mgr.mk_or(a, self.xor())
        return a

    def xor(self):
        a = self.conj()
        while self.peek()[1] == "^":
            self.take()
            a = self.mgr.mk_xor(a, self.conj())
        return a

    def conj(self):
        a = self.unary()
        while self.peek()[1] == "&":
            self.take()
            a = self.mgr.mk_and(a, self.unary())
        return a

    def unary(self):
        t = self.peek()
        if t[1] in ("!", "~"):
            self.take()
            return self.unary() ^ 1
        if t[1] == "(":
            self.take()
            a = self.parse()
            self.expect(")")
            return a
        if t[0] == "num" and t[1] in ("0", "1"):
            self.take()
            return TRUE if t[1] == "1" else FALSE
        if t[0] == "name":
            self.take()
            if t[1] in ("true", "false"):
                return TRUE if t[1] == "true" else FALSE
            if t[1] not in self.names:
                raise ParseError(f"undeclared name {t[1]!r}", t[2], t[3])
            return self.mgr.mk_var(self.names[t[1]])
        raise ParseError(f"unexpected {t[1] or 'end of input'!r}", t[2], t[3])


def parse_factored(text: str, manager: Optional[AigManager] = None, name: str = "") -> FactoredSpec:
    """Read the ``.fctr`` format.

    ``var <name> : x;`` / ``var <name> : y;`` declarations (x variables are
    ordered as declared), then one factor expression per ``;``-terminated
    statement using ``! & ^ | -> <->``, parentheses and the constants 0/1.
    ``#`` starts a comment.
    """
    mgr = manager if manager is not None else AigManager()
    toks = _tokenize(text)
    names: Dict[str, int] = {}
    x_order: List[int] = []
    y_vars: List[int] = []
    factors: List[int] = []
    i = 0
    next_id = max(mgr.variables, default=0) + 1
    while toks[i][0] != "eof":
        t = toks[i]
        if t[0] == "op" and t[1] == ";":
            i += 1
            continue
        if t[0] == "name" and t[1] == "var" and toks[i + 1][0] == "name":
            vname = toks[i + 1]
            colon, kind, semi = toks[i + 2], toks[i + 3], toks[i + 4] if i + 4 < len(toks) else toks[-1]
            if colon[1] != ":":
                raise ParseError("expected ':' in declaration", colon[2], colon[3])
            if kind[1] not in ("x", "y"):
                raise ParseError("variable kind must be x or y", kind[2], kind[3])
            if semi[1] != ";":
                raise ParseError("expected ';' after declaration", semi[2], semi[3])
            if vname[1] in names:
                raise ParseError(f"duplicate declaration of {vname[1]!r}", vname[2], vname[3])
            vid = next_id
            next_id += 1
            mgr.mk_var(vid, vname[1])
            names[vname[1]] = vid
            (x_order if kind[1] == "x" else y_vars).append(vid)
            i += 5
            continue
        # factor expression
        end = i
        while toks[end][1] != ";" and toks[end][0] != "eof":
            end += 1
        if toks[end][0] == "eof":
            raise ParseError("factor not terminated by ';'", t[2], t[3])
        p = _ExprParser(toks[i:end] + [("eof", "", toks[end][2], toks[end][3])], mgr, names)
        f = p.parse()
        rest = p.peek()
        if rest[0] != "eof":
            raise ParseError(f"unexpected {rest[1]!r}", rest[2], rest[3])
        factors.append(f)
        i = end + 1
    return FactoredSpec(mgr, factors, x_order, y_vars, name)


def load_spec(path, manager: Optional[AigManager] = None) -> FactoredSpec:
    """Parse a ``.qdimacs``/``.cnf`` or ``.fctr`` file, chosen by extension."""
    from pathlib import Path

    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ParseError(f"cannot read {p}: {e.strerror}") from None
    if p.suffix == ".fctr":
        return parse_factored(text, manager, name=p.stem)
    return parse_qdimacs(text, manager, name=p.stem)


# ----------------------------------------------------------------------


def occurrence_counts(spec: FactoredSpec) -> Dict[int, int]:
    counts = {x: 0 for x in spec.x_order}
    for f in spec.factors:
        for v in spec.manager.support(f):
            if v in counts:
                counts[v] += 1
    return counts


def order_variables(spec: FactoredSpec) -> FactoredSpec:
    """Variables occurring in fewer factors come first; ties keep input order."""
    counts = occurrence_counts(spec)
    return spec.with_order(sorted(spec.x_order, key=lambda x: counts[x]))


# ----------------------------------------------------------------------
# Tseitin


class TseitinEncoder:
    """Incremental Tseitin encoding of AIG cones into a CNF.

    One CNF variable per AIG variable and per AND node reached; an AND node
    ``t = a & b`` contributes ``(-t | a)``, ``(-t | b)``, ``(-a | -b | t)``.
    ``fork`` copies the state so a shared core can be extended cheaply.
    """

    def __init__(self, manager: AigManager):
        self.mgr = manager
        self.num_vars = 0
        self.clauses: List[List[int]] = []
        self.node_var: Dict[int, int] = {}
        self.var_map: Dict[int, int] = {}

    def fork(self) -> "TseitinEncoder":
        other = TseitinEncoder(self.mgr)
        other.num_vars = self.num_vars
        other.clauses = list(self.clauses)
        other.node_var = dict(self.node_var)
        other.var_map = dict(self.var_map)
        return other

    def declare(self, var: int) -> int:
        """CNF variable for AIG variable ``var`` (allocated on demand)."""
        idx = self.mgr.mk_var(var) >> 1
        return self._leaf(idx, var)

    def _leaf(self, idx, var):
        c = self.node_var.get(idx)
        if c is None:
            self.num_vars += 1
            c = self.num_vars
            self.node_var[idx] = c
            self.var_map[var] = c
        return c

    def literal(self, ref: int) -> int:
        if ref < 2:
            raise ValueError("constants have no CNF literal")
        mgr = self.mgr
        todo = [i for i in mgr.cone([ref]) if i not in self.node_var]
        for idx in todo:
            r = 2 * idx
            if mgr.is_var(r):
                self._leaf(idx, mgr.var_of(r))
                continue
            a, b = mgr.children(r)
            la = self.node_var[a >> 1] * (-1 if a & 1 else 1)
            lb = self.node_var[b >> 1] * (-1 if b & 1 else 1)
            self.num_vars += 1
            t = self.num_vars
            self.node_var[idx] = t
            self.clauses.append([-t, la])
            self.clauses.append([-t, lb])
            self.clauses.append([-la, -lb, t])
        c = self.node_var[ref >> 1]
        return -c if ref & 1 else c

    def assert_root(self, ref: int, value: bool = True) -> None:
        if not value:
            ref ^= 1
        if ref == TRUE:
            return
        if ref == FALSE:
            self.clauses.append([])
            return
        self.clauses.append([self.literal(ref)])

    def cnf(self) -> Cnf:
        return Cnf(self.num_vars, list(self.clauses))


def tseitin_cnf(
    manager: AigManager, roots: Sequence[int], polarity: Optional[Sequence[bool]] = None
) -> Tuple[Cnf, Dict[int, int]]:
    """Equisatisfiable CNF asserting each root (or its negation per ``polarity``).

    Returns the CNF and the map AIG variable id -> CNF variable.
    """
    enc = TseitinEncoder(manager)
    if polarity is None:
        polarity = [True] * len(roots)
    for r, p in zip(roots, polarity):
        enc.assert_root(r, p)
    return enc.cnf(), dict(enc.var_map)


def format_expr(mgr: AigManager, f: int) -> str:
    """Expression text for ``f`` in ``.fctr`` syntax (shared nodes are repeated)."""
    if f == TRUE:
        return "1"
    if f == FALSE:
        return "0"
    memo: Dict[int, str] = {}
    for idx in mgr.cone([f]):
        r = 2 * idx
        if mgr.is_var(r):
            memo[idx] = _text_name(mgr, mgr.var_of(r))
        else:
            a, b = mgr.children(r)
            memo[idx] = f"({_lit_text(memo, a)} & {_lit_text(memo, b)})"
    return _lit_text(memo, f)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_'.\[\]]*$")


def _text_name(mgr: AigManager, var: int) -> str:
    """Variable name usable in ``.fctr`` text; numeric QDIMACS names get a ``v`` prefix."""
    name = mgr.name(var)
    if _IDENT.match(name) and name not in ("var", "true", "false"):
        return name
    return f"v{name}"


def _lit_text(memo, r):
    s = memo[r >> 1]
    return "!" + s if r & 1 else s


def format_factored(spec: FactoredSpec) -> str:
    mgr = spec.manager
    lines = [f"var {_text_name(mgr, x)} : x;" for x in spec.x_order]
    lines += [f"var {_text_name(mgr, y)} : y;" for y in spec.y_vars]
    lines += [format_expr(mgr, f) + ";" for f in spec.factors]
    return "\n".join(lines) + "\n"
