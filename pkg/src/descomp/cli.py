"""Command-line front end.

Exit codes: 0 true/pass, 1 false/fail, 2 usage or parse error,
3 internal or wrapped-operation error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from typing import Sequence, TextIO

from . import complementation as cm
from .evaluator import EvaluationError, eval_formula
from .interpretations import (InterpretationError, ProjectionFormError, apply,
                              check_projection_form, dynamic_projection_test,
                              read_interpretation)
from .logic import FormulaError, parse
from .problems import GENERATORS, gnp_graph, random_altgraph, random_cnf
from .sat2col import sat2col_interpretation
from .structures import StructureError, format_structure, read_structure
from .suites import SUITES, run_suite

OK, FALSE, USAGE, INTERNAL = 0, 1, 2, 3

_INPUT_ERRORS = (FormulaError, StructureError, InterpretationError, OSError)


class UsageError(Exception):
    pass


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".descomp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, out: TextIO, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
    else:
        out.write(text)


def _interp(spec: str | None):
    if not spec:
        raise UsageError("--interp is required")
    if spec == "sat2col":
        return sat2col_interpretation()
    return read_interpretation(spec)


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


# ------------------------------------------------------------- commands

def cmd_eval(args, out) -> int:
    _need(args, "structure", "formula")
    A = read_structure(args.structure)
    phi = parse(args.formula, A.vocab, free=())
    value = bool(eval_formula(A, phi))
    out.write("true\n" if value else "false\n")
    return OK if value else FALSE


def cmd_reduce(args, out) -> int:
    _need(args, "infile")
    I = _interp(args.interp)
    A = read_structure(args.infile)
    _emit(args, out, format_structure(apply(I, A)))
    return OK


def cmd_check(args, out) -> int:
    I = _interp(args.interp)
    nmax = 5 if args.nmax is None else args.nmax
    ok = True
    try:
        form = check_projection_form(I)
        out.write(f"PASS projection-form {len(form.cases)} relations\n")
    except ProjectionFormError as e:
        ok = False
        out.write(f"FAIL projection-form {e.kind} {e.relation}: {e.detail}\n")
    report = dynamic_projection_test(I, range(2, nmax + 1), r=20, seed=args.seed)
    for s in report.sizes:
        out.write(f"{'PASS' if s.ok else 'FAIL'} dynamic {s.summary()}\n")
        if not args.quiet:
            for line in s.inconsistencies[:5]:
                out.write(f"#   {line}\n")
    ok = ok and report.ok
    out.write("qfp\n" if ok else "not-qfp\n")
    return OK if ok else FALSE


def cmd_gen(args, out) -> int:
    n = 4 if args.n is None else args.n
    if args.cnf:
        A = random_cnf(n, args.seed)
    elif args.altgraph:
        A = random_altgraph(n, args.p, 0.5, args.seed)
    elif args.graph in GENERATORS:
        A = GENERATORS[args.graph](n)
    elif args.graph == "gnp":
        A = gnp_graph(n, args.p, args.seed)
    else:
        raise UsageError(f"unknown generator {args.graph!r}; "
                         f"choose from {', '.join([*GENERATORS, 'gnp'])}")
    _emit(args, out, format_structure(A))
    return OK


def cmd_suite(args, out) -> int:
    if args.name not in SUITES:
        raise UsageError(f"unknown suite {args.name!r}; choose from {', '.join(SUITES)}")
    checks = run_suite(args.name, args.nmax, args.trials, args.seed,
                       emit=lambda s: out.write(s + "\n"), verbose=not args.quiet)
    return OK if all(c.ok for c in checks) else FALSE


def _graph_target(args):
    _need(args, "graph", "target")
    G = read_structure(args.graph)
    if not 0 <= args.target < G.size:
        raise UsageError(f"target {args.target} outside 0..{G.size - 1}")
    return G


def cmd_certify(args, out) -> int:
    G = _graph_target(args)
    _emit(args, out, cm.make_certificate(G, args.target).to_text())
    return OK


def cmd_verify_cert(args, out) -> int:
    G = _graph_target(args)
    _need(args, "infile")
    with open(args.infile) as fh:
        cert = cm.Certificate.from_text(fh.read())
    v = cm.verify_certificate(G, args.target, cert)
    out.write("accept\n" if v else f"reject {v.reason}\n")
    return OK if v else FALSE


COMMANDS = {
    "eval": cmd_eval, "reduce": cmd_reduce, "check": cmd_check, "gen": cmd_gen,
    "suite": cmd_suite, "certify": cmd_certify, "verify-cert": cmd_verify_cert,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="descomp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--quiet", action="store_true")
        return p

    p = add("eval", "evaluate a sentence on a structure file")
    p.add_argument("--structure")
    p.add_argument("--formula")

    p = add("reduce", "apply an interpretation to a structure file")
    p.add_argument("--interp", default="sat2col")
    p.add_argument("--in", dest="infile")
    p.add_argument("--out")

    p = add("check", "certify an interpretation as a projection")
    p.add_argument("--interp", default="sat2col")
    p.add_argument("--nmax", type=int)

    p = add("gen", "generate a structure")
    p.add_argument("--graph", default="gnp")
    p.add_argument("--cnf", action="store_true")
    p.add_argument("--altgraph", action="store_true")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--out")

    p = add("suite", "run a property suite")
    p.add_argument("name")
    p.add_argument("--nmax", type=int)
    p.add_argument("--trials", type=int)

    p = add("certify", "write a non-reachability certificate")
    p.add_argument("--graph")
    p.add_argument("--target", type=int)
    p.add_argument("--out")

    p = add("verify-cert", "check a non-reachability certificate")
    p.add_argument("--graph")
    p.add_argument("--target", type=int)
    p.add_argument("--in", dest="infile")
    return ap


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None,
         stderr: TextIO | None = None) -> int:
    out = sys.stdout if stdout is None else stdout
    err = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write(f"descomp: usage: {e}\n")
        return USAGE
    except FormulaError as e:
        err.write(f"descomp: parse error: {e}\n")
        return USAGE
    except _INPUT_ERRORS as e:
        err.write(f"descomp: input error: {e}\n")
        return USAGE
    except (cm.CertificateError, EvaluationError, ProjectionFormError) as e:
        err.write(f"descomp: error: {e}\n")
        return INTERNAL
    except Exception as e:  # noqa: BLE001
        err.write(f"descomp: internal error: {type(e).__name__}: {e}\n")
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
