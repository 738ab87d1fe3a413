"""Command line: ``fskolem synth | verify | bench``.

Exit codes: 0 success, 1 usage (or oracle failure), 2 parse error,
3 budget exceeded, 4 verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .aig import AigManager
from .aiger import AigerError, read_aag, write_aag, write_dot
from .frontend import FactoredSpec, ParseError, load_spec, order_variables
from .generate import random_spec
from .sat_oracle import OracleError, SatOracle
from .skolem import FINAL, Budget, BudgetExceeded, SkolemVector, cegar_skolem, mono_skolem
from .verify import BoundExceeded, certify_exhaustive, certify_sat

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3, 4

CSV_VERSION = 1
CSV_COLUMNS = [
    "instance", "engine", "status", "n", "m", "r", "refinements", "sat_calls",
    "sat_time_frac", "avg_size", "max_size", "total_ms",
]
SCATTER_COLUMNS = [
    "instance", "mono_status", "cegar_status", "mono_avg_size", "cegar_avg_size",
    "mono_max_size", "cegar_max_size", "mono_ms", "cegar_ms",
]
INSTANCE_SUFFIXES = (".qdimacs", ".cnf", ".fctr")
_BUDGET_STATUS = {"time": "timeout", "nodes": "memout", "iterations": "budget"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"status=error reason=usage message={message!r}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_engine_flags(p):
    p.add_argument("--generalize", choices=["cube", "whole", "element"], default="element")
    p.add_argument("--order", choices=["given", "occurrence"], default="occurrence")
    p.add_argument("--solver", metavar="CMD", help="external SAT solver command (DIMACS in, competition output)")
    p.add_argument("--budget-iterations", type=int, default=10**6)
    p.add_argument("--budget-time", type=float, default=60.0, help="seconds per run")
    p.add_argument("--budget-nodes", type=int, default=20_000_000, help="AIG nodes per run")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fskolem", description="Skolem functions for factored formulas")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize a Skolem function vector")
    s.add_argument("input")
    s.add_argument("--engine", choices=["mono", "cegar"], default="cegar")
    s.add_argument("--verify", choices=["none", "sat", "exhaustive"], default="none")
    s.add_argument("--emit", choices=["aiger", "dot"], default="aiger")
    s.add_argument("-o", "--output", help="output file (default: <input stem>.skolem.aag|.dot; '-' for stdout)")
    _add_engine_flags(s)

    v = sub.add_parser("verify", help="check a Skolem vector stored as AIGER")
    v.add_argument("input")
    v.add_argument("vector")
    v.add_argument("--solver", metavar="CMD")
    v.add_argument("--exhaustive-bound", type=int, default=16, help="max |Y| for the brute-force check")

    b = sub.add_parser("bench", help="run both engines over a directory, write CSV")
    b.add_argument("dir", nargs="?")
    b.add_argument("--engine", choices=["mono", "cegar", "both"], default="both")
    b.add_argument("--verify", choices=["none", "sat", "exhaustive"], default="none")
    b.add_argument("--out", help="CSV path (default stdout)")
    b.add_argument("--scatter", help="write per-instance mono/cegar pairs here")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--random", type=int, default=0, metavar="N", help="add N generated instances")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--omit-timing", action="store_true", help="blank timing columns (reproducible CSV)")
    _add_engine_flags(b)
    return p


def _budget(args) -> Budget:
    return Budget(args.budget_iterations, args.budget_time, args.budget_nodes)


def _oracle(args) -> SatOracle:
    return SatOracle(args.solver) if getattr(args, "solver", None) else SatOracle()


def run_engine(spec: FactoredSpec, engine: str, args, oracle: Optional[SatOracle] = None):
    if args.order == "occurrence":
        spec = order_variables(spec)
    if engine == "mono":
        return mono_skolem(spec, _budget(args))
    return cegar_skolem(spec, oracle or _oracle(args), args.generalize, _budget(args))


def _fail(reason: str, code: int, message: str = "") -> int:
    line = f"status=error reason={reason}"
    if message:
        line += f" message={message!r}"
    print(line)
    return code


def _verify_vector(spec, vec, mode, oracle) -> bool:
    ok = certify_sat(spec, vec, oracle)
    if mode == "exhaustive":
        ok = ok and certify_exhaustive(spec, vec, oracle=oracle)
    return ok


def cmd_synth(args) -> int:
    try:
        spec = load_spec(args.input)
    except ParseError as e:
        return _fail("parse-error", EXIT_PARSE, str(e))
    t0 = time.perf_counter()
    oracle = _oracle(args)
    try:
        vec, stats = run_engine(spec, args.engine, args, oracle)
    except BudgetExceeded as e:
        return _fail(_BUDGET_STATUS[e.kind], EXIT_BUDGET, str(e))
    except OracleError as e:
        return _fail("oracle-error", EXIT_USAGE, str(e))
    wall = time.perf_counter() - t0
    verified = "skipped"
    if args.verify != "none":
        try:
            verified = "yes" if _verify_vector(spec, vec, args.verify, oracle) else "no"
        except BoundExceeded as e:
            return _fail("verify-bound", EXIT_USAGE, str(e))
    mgr = spec.manager
    outputs = [(mgr.name(x), p) for x, p in zip(vec.x_order, vec.psi)]
    text = write_aag(mgr, outputs, spec.y_vars) if args.emit == "aiger" else write_dot(mgr, outputs)
    out = args.output
    if out is None:
        out = str(Path(args.input).with_suffix("")) + (".skolem.aag" if args.emit == "aiger" else ".skolem.dot")
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    status = "ok" if verified != "no" else "verify-failed"
    print(
        f"status={status} engine={args.engine} n={spec.n} m={spec.m} r={spec.r} "
        f"iterations={stats.iterations} avg_size={vec.avg_size():.2f} max_size={vec.max_size()} "
        f"verified={verified} wall_ms={wall * 1000:.1f}"
        + ("" if out == "-" else f" output={out}")
    )
    return EXIT_OK if verified != "no" else EXIT_VERIFY


def cmd_verify(args) -> int:
    try:
        spec = load_spec(args.input)
    except ParseError as e:
        return _fail("parse-error", EXIT_PARSE, str(e))
    mgr = spec.manager
    try:
        text = Path(args.vector).read_text()
    except OSError as e:
        return _fail("usage", EXIT_USAGE, f"cannot read {args.vector}: {e.strerror}")
    y_names = {mgr.name(y): y for y in spec.y_vars}
    x_names = {mgr.name(x): x for x in spec.x_order}
    try:
        outs = dict(read_aag(text, mgr, y_names))
    except AigerError as e:
        return _fail("name-mismatch", EXIT_USAGE, str(e))
    if set(outs) != set(x_names):
        missing = sorted(set(x_names) - set(outs))
        extra = sorted(set(outs) - set(x_names))
        return _fail("name-mismatch", EXIT_USAGE, f"missing={missing} unexpected={extra}")
    vec = SkolemVector(mgr, list(spec.x_order), [outs[mgr.name(x)] for x in spec.x_order], FINAL)
    oracle = _oracle(args)
    try:
        ok = certify_sat(spec, vec, oracle)
        exhaustive = "skipped"
        if spec.m <= args.exhaustive_bound and spec.n <= 20:
            ex = certify_exhaustive(spec, vec, oracle=oracle)
            exhaustive = "pass" if ex else "fail"
            if ex != ok:
                return _fail("internal", EXIT_USAGE, "SAT and exhaustive checks disagree")
    except OracleError as e:
        return _fail("oracle-error", EXIT_USAGE, str(e))
    print(f"{'PASS' if ok else 'FAIL'} sat={'pass' if ok else 'fail'} exhaustive={exhaustive}")
    return EXIT_OK if ok else EXIT_VERIFY


# ----------------------------------------------------------------------
# bench


def _load_job(job):
    kind, ref = job
    if kind == "file":
        return load_spec(ref)
    seed, k = ref
    return random_spec(np.random.default_rng([seed, k]), name=f"random-{seed}-{k}")


def _job_name(job) -> str:
    kind, ref = job
    return Path(ref).name if kind == "file" else f"random-{ref[0]}-{ref[1]}"


def bench_one(job, engine: str, args) -> Dict:
    """One CSV row.  Failures become a status, never an exception."""
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update(instance=_job_name(job), engine=engine)
    t0 = time.perf_counter()
    try:
        spec = _load_job(job)  # a fresh manager per run keeps sizes independent
    except ParseError:
        row["status"] = "parse-error"
        return row
    row.update(n=spec.n, m=spec.m, r=spec.r)
    oracle = _oracle(args)
    try:
        vec, stats = run_engine(spec, engine, args, oracle)
        row["status"] = "ok"
        if args.verify != "none" and not _verify_vector(spec, vec, args.verify, oracle):
            row["status"] = "verify-failed"
    except BudgetExceeded as e:
        row["status"] = _BUDGET_STATUS[e.kind]
        stats = e.stats
        vec = None
    except OracleError:
        row["status"] = "oracle-error"
        return row
    except BoundExceeded:
        row["status"] = "verify-bound"
        return row
    elapsed = time.perf_counter() - t0
    row.update(
        refinements=stats.iterations if engine == "cegar" else 0,
        sat_calls=stats.sat_calls,
        sat_time_frac=f"{stats.sat_time_frac:.3f}",
        total_ms=f"{elapsed * 1000:.1f}",
    )
    if vec is not None:
        row.update(avg_size=f"{vec.avg_size():.2f}", max_size=vec.max_size())
    if args.omit_timing:
        row.update(sat_time_frac="", total_ms="")
    return row


def _bench_task(payload):
    job, engine, args = payload
    return bench_one(job, engine, args)


def collect_jobs(args) -> List:
    jobs = []
    if args.dir:
        d = Path(args.dir)
        if not d.is_dir():
            raise FileNotFoundError(args.dir)
        jobs += [("file", str(p)) for p in sorted(d.iterdir()) if p.suffix in INSTANCE_SUFFIXES]
    jobs += [("random", (args.seed, k)) for k in range(args.random)]
    return jobs


def cmd_bench(args) -> int:
    try:
        jobs = collect_jobs(args)
    except FileNotFoundError:
        return _fail("usage", EXIT_USAGE, f"no such directory: {args.dir}")
    engines = ["mono", "cegar"] if args.engine == "both" else [args.engine]
    tasks = [(job, e, args) for job in jobs for e in engines]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_task, tasks))
    else:
        rows = [_bench_task(t) for t in tasks]

    buf = io.StringIO()
    buf.write(f"# fskolem bench csv v{CSV_VERSION}\n")
    w = csv.DictWriter(buf, CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())

    if args.scatter:
        by = {}
        for row in rows:
            by.setdefault(row["instance"], {})[row["engine"]] = row
        sbuf = io.StringIO()
        sw = csv.DictWriter(sbuf, SCATTER_COLUMNS, lineterminator="\n")
        sw.writeheader()
        for inst, pair in by.items():
            mono, cegar = pair.get("mono", {}), pair.get("cegar", {})
            sw.writerow({
                "instance": inst,
                "mono_status": mono.get("status", ""), "cegar_status": cegar.get("status", ""),
                "mono_avg_size": mono.get("avg_size", ""), "cegar_avg_size": cegar.get("avg_size", ""),
                "mono_max_size": mono.get("max_size", ""), "cegar_max_size": cegar.get("max_size", ""),
                "mono_ms": mono.get("total_ms", ""), "cegar_ms": cegar.get("total_ms", ""),
            })
        Path(args.scatter).write_text(sbuf.getvalue())
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return {"synth": cmd_synth, "verify": cmd_verify, "bench": cmd_bench}[args.cmd](args)


if __name__ == "__main__":
    raise SystemExit(main())
