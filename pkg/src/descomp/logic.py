"""Formula syntax: AST, parser, printer and syntactic classifiers.

Concrete syntax::

    formula  := quant | iff
    quant    := ("all" | "ex") var "." formula | "exR" Name "/" int "." formula
    iff      := imp ("<->" imp)*            left associative
    imp      := or ("->" imp)?              right associative
    or       := and ("|" and)*
    and      := unary ("&" unary)*
    unary    := "!" unary | quant | primary
    primary  := "(" formula ")" | R(t,..) | suc(t,t) | t=t | t!=t | t<=t
              | TC[(x1,..,xk ; y1,..,yk). formula](s1,..,sk ; t1,..,tk)
              | DTC[...] (same shape)
    term     := var | min | max | numeral
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

from .structures import Vocabulary

KEYWORDS = frozenset({"all", "ex", "exR", "TC", "DTC", "suc", "min", "max"})


class FormulaError(ValueError):
    """Ill-formed formula: syntax, arity or scoping problem."""

    def __init__(self, msg: str, pos: int | None = None):
        self.pos = pos
        super().__init__(msg if pos is None else f"{msg} (at position {pos})")


# --------------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Min:
    pass


@dataclass(frozen=True)
class Max:
    pass


@dataclass(frozen=True)
class Num:
    value: int


Term = Union[Var, Min, Max, Num]
MIN, MAX = Min(), Max()


def term(t) -> Term:
    """Coerce ``"x"``, ``"min"``, ``"max"`` or an int to a term."""
    if isinstance(t, (Var, Min, Max, Num)):
        return t
    if isinstance(t, int):
        return Num(t)
    if t == "min":
        return MIN
    if t == "max":
        return MAX
    return Var(t)


# ------------------------------------------------------------------ formulas

class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: tuple


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Suc(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Le(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class TC(Formula):
    """Reflexive transitive closure of ``body`` read as an edge relation
    from ``pre`` tuples to ``post`` tuples, applied to ``src`` and ``dst``."""
    pre: tuple
    post: tuple
    body: Formula
    src: tuple
    dst: tuple


@dataclass(frozen=True)
class DTC(Formula):
    pre: tuple
    post: tuple
    body: Formula
    src: tuple
    dst: tuple


@dataclass(frozen=True)
class ExistsRel(Formula):
    name: str
    arity: int
    body: Formula


BINARY = (And, Or, Implies, Iff)
ATOMIC = (Atom, Eq, Suc, Le)


# -------------------------------------------------------------- constructors

def atom(rel: str, *args) -> Atom:
    return Atom(rel, tuple(term(a) for a in args))


def eq(a, b) -> Eq:
    return Eq(term(a), term(b))


def neq(a, b) -> Not:
    return Not(Eq(term(a), term(b)))


def suc(a, b) -> Suc:
    return Suc(term(a), term(b))


def le(a, b) -> Le:
    return Le(term(a), term(b))


def conj(*fs: Formula) -> Formula:
    """Left-nested conjunction; ``conj()`` is the always-true ``min=min``."""
    fs = [f for f in fs if f is not None]
    if not fs:
        return Eq(MIN, MIN)
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    """Left-nested disjunction; ``disj()`` is the always-false ``min!=min``."""
    fs = [f for f in fs if f is not None]
    if not fs:
        return Not(Eq(MIN, MIN))
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def forall(vars_: Iterable[str] | str, body: Formula) -> Formula:
    vs = [vars_] if isinstance(vars_, str) else list(vars_)
    for v in reversed(vs):
        body = Forall(v, body)
    return body


def exists(vars_: Iterable[str] | str, body: Formula) -> Formula:
    vs = [vars_] if isinstance(vars_, str) else list(vars_)
    for v in reversed(vs):
        body = Exists(v, body)
    return body


def tc(pre, post, body, src, dst, deterministic=False) -> Formula:
    cls = DTC if deterministic else TC
    return cls(tuple(pre), tuple(post), body,
               tuple(term(t) for t in src), tuple(term(t) for t in dst))


def flatten(phi: Formula, kind) -> list[Formula]:
    """Operands of a nested ``kind`` (``And`` or ``Or``) chain, left to right."""
    if isinstance(phi, kind):
        return flatten(phi.left, kind) + flatten(phi.right, kind)
    return [phi]


def iter_nodes(phi: Formula):
    yield phi
    if isinstance(phi, Not):
        yield from iter_nodes(phi.body)
    elif isinstance(phi, BINARY):
        yield from iter_nodes(phi.left)
        yield from iter_nodes(phi.right)
    elif isinstance(phi, (Forall, Exists, ExistsRel, TC, DTC)):
        yield from iter_nodes(phi.body)


def term_vars(terms) -> list[str]:
    return [t.name for t in terms if isinstance(t, Var)]


# --------------------------------------------------------------- classifiers

def free_vars(phi: Formula) -> tuple[str, ...]:
    """Unbound first-order variables in first-occurrence (text) order."""
    out: dict[str, None] = {}

    def walk(f, bound):
        if isinstance(f, ATOMIC):
            args = f.args if isinstance(f, Atom) else (f.left, f.right)
            for v in term_vars(args):
                if v not in bound:
                    out.setdefault(v)
        elif isinstance(f, Not):
            walk(f.body, bound)
        elif isinstance(f, BINARY):
            walk(f.left, bound)
            walk(f.right, bound)
        elif isinstance(f, (Forall, Exists)):
            walk(f.body, bound | {f.var})
        elif isinstance(f, ExistsRel):
            walk(f.body, bound)
        elif isinstance(f, (TC, DTC)):
            walk(f.body, bound | set(f.pre) | set(f.post))
            for v in term_vars(f.src + f.dst):
                if v not in bound:
                    out.setdefault(v)
        else:
            raise TypeError(f"not a formula: {f!r}")

    walk(phi, frozenset())
    return tuple(out)


@lru_cache(maxsize=65536)
def is_numeric(phi: Formula) -> bool:
    """True iff no input relation atom and no second-order quantifier occurs."""
    return not any(isinstance(f, (Atom, ExistsRel)) for f in iter_nodes(phi))


def is_quantifier_free(phi: Formula) -> bool:
    """No first- or second-order quantifier and no TC/DTC operator."""
    return not any(isinstance(f, (Forall, Exists, ExistsRel, TC, DTC))
                   for f in iter_nodes(phi))


def is_tc_positive(phi: Formula) -> bool:
    """True iff, in negation normal form, no TC/DTC occurs under a negation.

    Implication contributes a negative left side; both sides of ``<->``
    occur with both polarities.  The body of a DTC also counts as both
    polarities, because the deterministic reduct negates it.
    """

    def ok(f, positive):
        if isinstance(f, ATOMIC):
            return True
        if isinstance(f, Not):
            return ok(f.body, not positive)
        if isinstance(f, (And, Or)):
            return ok(f.left, positive) and ok(f.right, positive)
        if isinstance(f, Implies):
            return ok(f.left, not positive) and ok(f.right, positive)
        if isinstance(f, Iff):
            return all(ok(g, p) for g in (f.left, f.right) for p in (True, False))
        if isinstance(f, (Forall, Exists, ExistsRel)):
            return ok(f.body, positive)
        if isinstance(f, TC):
            return positive and ok(f.body, True)
        if isinstance(f, DTC):
            return positive and ok(f.body, True) and ok(f.body, False)
        raise TypeError(f"not a formula: {f!r}")

    return ok(phi, True)


def check_formula(phi: Formula, vocab: Vocabulary, free: Iterable[str] | None = None,
                  so: dict[str, int] | None = None) -> None:
    """Raise :class:`FormulaError` unless ``phi`` is well-formed over ``vocab``.

    ``so`` declares free second-order variables with their arities.
    """
    so = dict(so or {})

    def walk(f, so):
        if isinstance(f, Atom):
            arity = so.get(f.rel)
            if arity is None:
                if f.rel not in vocab:
                    raise FormulaError(f"unknown relation symbol {f.rel!r}")
                arity = vocab.arity(f.rel)
            if len(f.args) != arity:
                raise FormulaError(
                    f"{f.rel} has arity {arity}, used with {len(f.args)} argument(s)")
        elif isinstance(f, Not):
            walk(f.body, so)
        elif isinstance(f, BINARY):
            walk(f.left, so)
            walk(f.right, so)
        elif isinstance(f, (Forall, Exists)):
            walk(f.body, so)
        elif isinstance(f, ExistsRel):
            if f.arity < 1:
                raise FormulaError(f"relation variable {f.name} needs arity >= 1")
            if f.name in vocab:
                raise FormulaError(f"relation variable {f.name} shadows the vocabulary")
            walk(f.body, {**so, f.name: f.arity})
        elif isinstance(f, (TC, DTC)):
            k = len(f.pre)
            if k < 1 or not len(f.post) == len(f.src) == len(f.dst) == k:
                raise FormulaError("TC tuples must all have the same length k >= 1")
            if len(set(f.pre) | set(f.post)) != 2 * k:
                raise FormulaError("TC bound variables must be pairwise distinct")
            walk(f.body, so)

    walk(phi, so)
    if free is not None:
        extra = [v for v in free_vars(phi) if v not in set(free)]
        if extra:
            raise FormulaError(f"unbound variable(s) {extra}")


# -------------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
                    r"|(?P<sym><->|->|!=|<=|[=!&|()\[\],;./]))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary):
        self.toks = _tokenize(text)
        self.i = 0
        self.vocab = vocab
        self.so: dict[str, int] = {}

    # token helpers
    def peek(self, off=0):
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def at(self, value, off=0):
        kind, val, _ = self.peek(off)
        return kind in ("sym", "id") and val == value

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value or kind == "eof":
            raise FormulaError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def ident(self, what="identifier"):
        kind, val, pos = self.next()
        if kind != "id" or val in KEYWORDS:
            raise FormulaError(f"expected {what}, found {val or 'end of input'!r}", pos)
        return val

    def integer(self):
        kind, val, pos = self.next()
        if kind != "num":
            raise FormulaError(f"expected integer, found {val!r}", pos)
        return int(val)

    # grammar
    def parse(self):
        f = self.formula()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise FormulaError(f"unexpected {val!r}", pos)
        return f

    def formula(self):
        if self.at("all") or self.at("ex") or self.at("exR"):
            return self.quant()
        return self.iff()

    def quant(self):
        kind, val, pos = self.next()
        if val == "exR":
            name = self.ident("relation variable")
            self.expect("/")
            arity = self.integer()
            self.expect(".")
            if name in self.vocab:
                raise FormulaError(f"relation variable {name} shadows the vocabulary", pos)
            if arity < 1:
                raise FormulaError("relation variable needs arity >= 1", pos)
            saved = self.so.get(name)
            self.so[name] = arity
            try:
                body = self.formula()
            finally:
                if saved is None:
                    del self.so[name]
                else:
                    self.so[name] = saved
            return ExistsRel(name, arity, body)
        var = self.ident("variable")
        self.expect(".")
        body = self.formula()
        return Forall(var, body) if val == "all" else Exists(var, body)

    def iff(self):
        left = self.imp()
        while self.at("<->"):
            self.next()
            left = Iff(left, self.imp())
        return left

    def imp(self):
        left = self.or_()
        if self.at("->"):
            self.next()
            return Implies(left, self.imp_rhs())
        return left

    def imp_rhs(self):
        if self.at("all") or self.at("ex") or self.at("exR"):
            return self.quant()
        return self.imp()

    def or_(self):
        left = self.and_()
        while self.at("|"):
            self.next()
            left = Or(left, self.and_())
        return left

    def and_(self):
        left = self.unary()
        while self.at("&"):
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.at("!"):
            self.next()
            return Not(self.unary())
        if self.at("all") or self.at("ex") or self.at("exR"):
            return self.quant()
        return self.primary()

    def primary(self):
        kind, val, pos = self.peek()
        if self.at("("):
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if kind == "id" and val in ("TC", "DTC"):
            return self.closure()
        if kind == "id" and val == "suc":
            self.next()
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return Suc(a, b)
        if kind == "id" and val not in KEYWORDS and self.at("(", 1):
            self.next()
            self.next()
            args = [self.term()]
            while self.at(","):
                self.next()
                args.append(self.term())
            self.expect(")")
            if val in self.so:
                arity = self.so[val]
            elif val in self.vocab:
                arity = self.vocab.arity(val)
            else:
                raise FormulaError(f"unknown relation symbol {val!r}", pos)
            if len(args) != arity:
                raise FormulaError(
                    f"{val} has arity {arity}, used with {len(args)} argument(s)", pos)
            return Atom(val, tuple(args))
        left = self.term()
        kind, op, opos = self.next()
        if op not in ("=", "!=", "<="):
            raise FormulaError(f"expected '=', '!=' or '<=' after term, found {op!r}", opos)
        right = self.term()
        if op == "=":
            return Eq(left, right)
        if op == "!=":
            return Not(Eq(left, right))
        return Le(left, right)

    def term(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(int(val))
        if kind == "id":
            if val == "min":
                return MIN
            if val == "max":
                return MAX
            if val not in KEYWORDS:
                return Var(val)
        raise FormulaError(f"expected term, found {val or 'end of input'!r}", pos)

    def closure(self):
        kind, val, pos = self.next()
        self.expect("[")
        self.expect("(")
        pre = self.names()
        self.expect(";")
        post = self.names()
        self.expect(")")
        self.expect(".")
        body = self.formula()
        self.expect("]")
        self.expect("(")
        src = self.terms()
        self.expect(";")
        dst = self.terms()
        self.expect(")")
        if not len(pre) == len(post) == len(src) == len(dst):
            raise FormulaError(f"{val} tuples must have equal length", pos)
        if len(set(pre) | set(post)) != 2 * len(pre):
            raise FormulaError(f"{val} bound variables must be distinct", pos)
        cls = TC if val == "TC" else DTC
        return cls(tuple(pre), tuple(post), body, tuple(src), tuple(dst))

    def names(self):
        out = [self.ident("variable")]
        while self.at(","):
            self.next()
            out.append(self.ident("variable"))
        return out

    def terms(self):
        out = [self.term()]
        while self.at(","):
            self.next()
            out.append(self.term())
        return out


def parse(text: str, vocab: Vocabulary, free: Iterable[str] | None = None) -> Formula:
    """Parse ``text`` over ``vocab``; with ``free`` given, also check scoping."""
    phi = _Parser(text, vocab).parse()
    if free is not None:
        check_formula(phi, vocab, free)
    return phi


# ------------------------------------------------------------------- printer

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_OPS = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def term_text(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Min):
        return "min"
    if isinstance(t, Max):
        return "max"
    return str(t.value)


def _prec(f) -> int:
    if isinstance(f, (Forall, Exists, ExistsRel)):
        return 0
    if isinstance(f, BINARY):
        return _PREC[type(f)]
    if isinstance(f, Not) and not isinstance(f.body, Eq):
        return 5
    return 6


def to_text(phi: Formula) -> str:
    """Print ``phi`` so that ``parse(to_text(phi))`` rebuilds the same AST."""

    def p(f, ctx):
        s = raw(f)
        return f"({s})" if _prec(f) < ctx else s

    def raw(f):
        if isinstance(f, Atom):
            return f"{f.rel}(" + ",".join(map(term_text, f.args)) + ")"
        if isinstance(f, Eq):
            return f"{term_text(f.left)}={term_text(f.right)}"
        if isinstance(f, Suc):
            return f"suc({term_text(f.left)},{term_text(f.right)})"
        if isinstance(f, Le):
            return f"{term_text(f.left)}<={term_text(f.right)}"
        if isinstance(f, Not):
            if isinstance(f.body, Eq):
                return f"{term_text(f.body.left)}!={term_text(f.body.right)}"
            return "!" + p(f.body, 5)
        if isinstance(f, BINARY):
            prec = _PREC[type(f)]
            if isinstance(f, Implies):
                lc, rc = prec + 1, prec
            else:
                lc, rc = prec, prec + 1
            return f"{p(f.left, lc)} {_OPS[type(f)]} {p(f.right, rc)}"
        if isinstance(f, Forall):
            return f"all {f.var}. {p(f.body, 0)}"
        if isinstance(f, Exists):
            return f"ex {f.var}. {p(f.body, 0)}"
        if isinstance(f, ExistsRel):
            return f"exR {f.name}/{f.arity}. {p(f.body, 0)}"
        if isinstance(f, (TC, DTC)):
            op = "TC" if isinstance(f, TC) else "DTC"
            return (f"{op}[({','.join(f.pre)};{','.join(f.post)}). {p(f.body, 0)}]"
                    f"({','.join(map(term_text, f.src))};{','.join(map(term_text, f.dst))})")
        raise TypeError(f"not a formula: {f!r}")

    return p(phi, 0)


# ------------------------------------------------------------ substitution

_fresh = itertools.count()


def fresh_name(base: str = "v") -> str:
    """A variable name of the form ``_<base><k>``; never produced by users
    who stick to names without a leading underscore."""
    return f"_{base.lstrip('_')}{next(_fresh)}"


def substitute(phi: Formula, mapping: dict[str, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free variables.

    Every bound first-order variable is renamed to a fresh name.
    """

    def st(t, env):
        if isinstance(t, Var) and t.name in env:
            return env[t.name]
        return t

    def go(f, env):
        if isinstance(f, Atom):
            return Atom(f.rel, tuple(st(t, env) for t in f.args))
        if isinstance(f, (Eq, Suc, Le)):
            return type(f)(st(f.left, env), st(f.right, env))
        if isinstance(f, Not):
            return Not(go(f.body, env))
        if isinstance(f, BINARY):
            return type(f)(go(f.left, env), go(f.right, env))
        if isinstance(f, (Forall, Exists)):
            new = fresh_name(f.var)
            return type(f)(new, go(f.body, {**env, f.var: Var(new)}))
        if isinstance(f, ExistsRel):
            return ExistsRel(f.name, f.arity, go(f.body, env))
        if isinstance(f, (TC, DTC)):
            pre = tuple(fresh_name(v) for v in f.pre)
            post = tuple(fresh_name(v) for v in f.post)
            inner = {**env, **{v: Var(w) for v, w in zip(f.pre + f.post, pre + post)}}
            return type(f)(pre, post, go(f.body, inner),
                           tuple(st(t, env) for t in f.src),
                           tuple(st(t, env) for t in f.dst))
        raise TypeError(f"not a formula: {f!r}")

    return go(phi, {k: term(v) for k, v in mapping.items()})


# --------------------------------------------------------- random formulas

_POOL = ("x", "y", "z", "u", "w")


def random_formula(rng, vocab: Vocabulary, depth: int, free: Iterable[str] = ("x", "y"),
                   so: bool = True, numerals: bool = True) -> Formula:
    """A random well-scoped formula of depth at most ``depth``.

    Every node kind can occur; variables come from a small pool so that
    shadowing happens.  ``rng`` is a ``numpy.random.Generator``.
    """

    def pick(seq):
        return seq[int(rng.integers(len(seq)))]

    def rand_term(scope):
        r = rng.random()
        if scope and r < 0.7:
            return Var(pick(sorted(scope)))
        if numerals and r > 0.95:
            return Num(0)
        return MIN if r < 0.85 else MAX

    def leaf(scope, rels):
        kind = int(rng.integers(5))
        if kind <= 1 and rels:
            name, arity = pick(rels)
            return Atom(name, tuple(rand_term(scope) for _ in range(arity)))
        cls = (Eq, Eq, Eq, Suc, Le)[kind]
        return cls(rand_term(scope), rand_term(scope))

    def go(d, scope, rels):
        if d <= 0 or rng.random() < 0.15:
            return leaf(scope, rels)
        kind = int(rng.integers(12 if so else 11))
        if kind == 0:
            return Not(go(d - 1, scope, rels))
        if kind <= 4:
            cls = (And, Or, Implies, Iff)[kind - 1]
            return cls(go(d - 1, scope, rels), go(d - 1, scope, rels))
        if kind <= 6:
            v = pick(_POOL)
            return (Forall, Exists)[kind - 5](v, go(d - 1, scope | {v}, rels))
        if kind <= 9:
            k = 1 if rng.random() < 0.7 else 2
            names = list(rng.permutation(_POOL))[:2 * k]
            pre, post = tuple(names[:k]), tuple(names[k:])
            body = go(d - 1, scope | set(pre) | set(post), rels)
            cls = DTC if kind == 9 else TC
            return cls(pre, post, body,
                       tuple(rand_term(scope) for _ in range(k)),
                       tuple(rand_term(scope) for _ in range(k)))
        if kind == 10:
            return leaf(scope, rels)
        name = pick([c for c in ("S", "Q", "W") if c not in vocab])
        inner = [r for r in rels if r[0] != name] + [(name, 1)]
        return ExistsRel(name, 1, go(d - 1, scope, inner))

    return go(depth, frozenset(free), list(vocab.relations))
