"""First-order interpretations (k-ary reductions) and projection checks.

An interpretation of arity ``k`` from vocabulary ``source`` to ``target``
gives, for each target relation ``R`` of arity ``a``, a formula over
``source`` with free variables among ``x1 .. x{k*a}``.  The output universe
is ``A^k`` in lexicographic order, so output element ``rank_lex(t, n)`` is
the ``k``-tuple ``t``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .evaluator import EvaluationError, relation
from .logic import (DTC, MAX, MIN, TC, And, Atom, Eq, Exists, ExistsRel,
                    Forall, Formula, FormulaError, Iff, Implies, Le, Max, Min,
                    Not, Num, Or, Suc, Var, check_formula, conj, disj, eq,
                    flatten, free_vars, fresh_name, is_numeric,
                    is_quantifier_free, iter_nodes, le, neq, parse,
                    substitute, suc, to_text)
from .structures import (Structure, StructureBatch, StructureError,
                         Vocabulary, decode_bits, encode_bits,
                         encoding_length, new_structure)


class InterpretationError(ValueError):
    pass


def xvars(m: int) -> list[str]:
    return [f"x{i}" for i in range(1, m + 1)]


@dataclass(frozen=True)
class Interpretation:
    k: int
    source: Vocabulary
    target: Vocabulary
    formulas: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(self.formulas))
        if self.k < 1:
            raise InterpretationError("arity k must be >= 1")
        if len(self.formulas) != len(self.target.relations):
            raise InterpretationError(
                f"{len(self.formulas)} formulas for {len(self.target.relations)} target relations")
        for (name, arity), phi in zip(self.target.relations, self.formulas):
            if any(isinstance(f, ExistsRel) for f in iter_nodes(phi)):
                raise InterpretationError(f"{name}: second-order quantifier not allowed")
            try:
                check_formula(phi, self.source, xvars(self.k * arity))
            except FormulaError as e:
                raise InterpretationError(f"{name}: {e}") from None

    def formula(self, name: str) -> Formula:
        return self.formulas[self.target.names.index(name)]

    def variables(self, name: str) -> list[str]:
        return xvars(self.k * self.target.arity(name))


# ------------------------------------------------------------------- apply

_CELLS = 1 << 25


def apply_batch(I: Interpretation, batch: StructureBatch) -> StructureBatch:
    if batch.vocab != I.source:
        raise InterpretationError(
            f"interpretation reads {I.source}, structure is over {batch.vocab}")
    n, B = batch.size, len(batch)
    N = n ** I.k
    tables = {}
    for (name, arity), phi in zip(I.target.relations, I.formulas):
        vars_ = xvars(I.k * arity)
        step = max(1, _CELLS // (N ** arity))
        parts = [relation(batch[lo:lo + step], phi, vars_)
                 for lo in range(0, B, step)]
        arr = np.concatenate(parts) if len(parts) > 1 else parts[0]
        tables[name] = np.ascontiguousarray(arr).reshape((B,) + (N,) * arity)
    return StructureBatch(I.target, N, tables)


def apply(I: Interpretation, A: Structure) -> Structure:
    """``I(A)``: universe ``A^k``; ``R`` holds on a tuple of ``k``-tuples
    iff ``A`` satisfies the formula at the flattened assignment."""
    if A.vocab != I.source:
        raise InterpretationError(
            f"interpretation reads {I.source}, structure is over {A.vocab}")
    return apply_batch(I, A.to_batch()).structure(0)


# ----------------------------------------------------------- projection form

@dataclass(frozen=True)
class Literal:
    rel: str
    args: tuple
    positive: bool

    def formula(self) -> Formula:
        a = Atom(self.rel, self.args)
        return a if self.positive else Not(a)


@dataclass(frozen=True)
class Case:
    guard: Formula
    payload: Literal | str  # "const1" or a literal

    def __str__(self):
        pay = self.payload if isinstance(self.payload, str) else to_text(self.payload.formula())
        return f"[{to_text(self.guard)}] -> {pay}"


@dataclass(frozen=True)
class ProjectionForm:
    """Per target relation, the guarded cases in source order.  A bit whose
    guards are all false is the constant 0."""
    cases: dict

    def __str__(self):
        lines = []
        for name, cs in self.cases.items():
            lines.append(f"{name}:")
            lines += [f"  {c}" for c in cs]
        return "\n".join(lines)


class ProjectionFormError(ValueError):
    def __init__(self, kind: str, relation: str, detail: str, witness=None):
        self.kind, self.relation, self.detail, self.witness = kind, relation, detail, witness
        msg = f"{relation}: {kind}: {detail}"
        if witness is not None:
            msg += f" (witness n={witness[0]}, {witness[1]})"
        super().__init__(msg)


def _literal(f: Formula, vocab: Vocabulary) -> Literal | None:
    if isinstance(f, Atom) and f.rel in vocab:
        return Literal(f.rel, f.args, True)
    if isinstance(f, Not) and isinstance(f.body, Atom) and f.body.rel in vocab:
        return Literal(f.body.rel, f.body.args, False)
    return None


def _input_atoms(f: Formula, vocab) -> list[str]:
    return [to_text(a) for a in iter_nodes(f) if isinstance(a, Atom) and a.rel in vocab]


def _split(phi: Formula, name: str, vocab: Vocabulary) -> list[Case]:
    const, cases = [], []
    for d in flatten(phi, Or):
        if is_numeric(d):
            const.append(d)
            continue
        parts = flatten(d, And)
        guard = [p for p in parts if is_numeric(p)]
        rest = [p for p in parts if not is_numeric(p)]
        lits = [_literal(p, vocab) for p in rest]
        if len(rest) == 1 and lits[0] is not None:
            cases.append(Case(conj(*guard), lits[0]))
        elif all(lit is not None for lit in lits):
            raise ProjectionFormError(
                "payload-not-literal", name,
                f"disjunct {to_text(d)} carries {len(rest)} input literals")
        else:
            bad = next(p for p, lit in zip(rest, lits) if lit is None)
            if len(rest) == 1:
                raise ProjectionFormError(
                    "payload-not-literal", name,
                    f"{to_text(bad)} is not an input atom or its negation")
            raise ProjectionFormError(
                "non-numeric-guard", name,
                f"guard mentions input atom {_input_atoms(bad, vocab)[0]}")
    out = [Case(disj(*const), "const1")] if const else []
    return out + cases


_EMPTY: dict = {}


def _blank(vocab: Vocabulary, n: int) -> Structure:
    key = (vocab, n)
    if key not in _EMPTY:
        _EMPTY[key] = new_structure(vocab, n)
    return _EMPTY[key]


@lru_cache(maxsize=None)
def _component_witness(f: Formula, vars_: tuple, vocab: Vocabulary, n: int):
    try:
        arr = relation(_blank(vocab, n), f, vars_)
    except EvaluationError:
        return None  # numeral beyond the universe: the guard is undefined at n
    hits = np.argwhere(arr)
    if not len(hits):
        return None
    return tuple(int(e) for e in hits[0])


def _conjunction_witness(parts: Sequence[Formula], vocab, n) -> dict | None:
    """Satisfying assignment of a conjunction of numeric formulas at size
    ``n``, found component by component over shared variables."""
    groups: list[tuple[set, list]] = []
    for p in parts:
        vs = set(free_vars(p))
        merged = [g for g in groups if g[0] & vs]
        for g in merged:
            groups.remove(g)
        new = (vs.union(*(g[0] for g in merged)), [p] + [q for g in merged for q in g[1]])
        groups.append(new)
    out = {}
    for vs, fs in groups:
        order = tuple(sorted(vs, key=_var_key))
        w = _component_witness(conj(*sorted(fs, key=to_text)), order, vocab, n)
        if w is None:
            return None
        out.update(zip(order, w))
    return out


def _var_key(v):
    m = re.fullmatch(r"x(\d+)", v)
    return (0, int(m.group(1))) if m else (1, v)


def _overlap(g1: Formula, g2: Formula, vocab, n_check: int):
    alts1 = [flatten(a, And) for a in flatten(g1, Or)]
    alts2 = [flatten(a, And) for a in flatten(g2, Or)]
    for n in range(1, n_check + 1):
        for a in alts1:
            for b in alts2:
                w = _conjunction_witness(a + b, vocab, n)
                if w is not None:
                    return n, dict(sorted(w.items(), key=lambda kv: _var_key(kv[0])))
    return None


def check_projection_form(I: Interpretation, n_check: int = 8) -> ProjectionForm:
    """Recognise ``alpha_1 | (alpha_2 & lit_2) | ... | (alpha_e & lit_e)``
    with numeric, pairwise exclusive guards.

    Exclusivity is decided by evaluation at every size ``1..n_check``.
    Raises :class:`ProjectionFormError` with kind ``non-numeric-guard``,
    ``payload-not-literal`` or ``overlap``.
    """
    if n_check < 1:
        raise ValueError("n_check must be >= 1")
    cases = {}
    for name, phi in zip(I.target.names, I.formulas):
        cs = _split(phi, name, I.source)
        for i in range(len(cs)):
            for j in range(i + 1, len(cs)):
                hit = _overlap(cs[i].guard, cs[j].guard, I.source, n_check)
                if hit is not None:
                    raise ProjectionFormError(
                        "overlap", name,
                        f"guards {to_text(cs[i].guard)} and {to_text(cs[j].guard)} both hold",
                        hit)
        cases[name] = tuple(cs)
    return ProjectionForm(cases)


def is_fop(I: Interpretation, n_check: int = 8) -> bool:
    try:
        check_projection_form(I, n_check)
    except ProjectionFormError:
        return False
    return True


def is_qfp(I: Interpretation, n_check: int = 8) -> bool:
    return is_fop(I, n_check) and all(is_quantifier_free(f) for f in I.formulas)


# --------------------------------------------------- dynamic projection test

CONST0, CONST1, COPY, NEGATE = "0", "1", "copy", "neg"


@dataclass
class SizeReport:
    n: int
    kinds: np.ndarray      # per output bit: 0 const0, 1 const1, 2 copy, 3 negation
    sources: np.ndarray    # input bit index for copy/negation, else -1
    inconsistencies: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.inconsistencies

    def classification(self, j: int) -> tuple[str, int]:
        return ((CONST0, CONST1, COPY, NEGATE)[int(self.kinds[j])], int(self.sources[j]))

    def summary(self) -> str:
        counts = np.bincount(self.kinds, minlength=4)
        return (f"n={self.n} bits={len(self.kinds)} const0={counts[0]} const1={counts[1]} "
                f"copy={counts[2]} neg={counts[3]} inconsistencies={len(self.inconsistencies)}")


@dataclass
class ProjectionReport:
    sizes: list[SizeReport]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.sizes)

    def __str__(self):
        lines = [s.summary() for s in self.sizes]
        for s in self.sizes:
            for inc in s.inconsistencies[:5]:
                lines.append(f"  n={inc['n']} bit={inc['bit']}: {inc['reason']} "
                             f"input={inc['input']}")
        return "\n".join(lines)


def _outputs(I, bits: np.ndarray, n: int) -> np.ndarray:
    return encode_bits(apply_batch(I, decode_bits(I.source, n, bits)))


def _bitstr(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def dynamic_projection_test(I: Interpretation, sizes: Iterable[int], r: int = 20,
                            seed=0, max_inconsistencies: int = 20) -> ProjectionReport:
    """Infer each output bit's dependence from single-bit flips of the
    all-zeros input, then test the inferred table on the all-ones input and
    ``r`` seeded random inputs."""
    rng = np.random.default_rng(seed)
    reports = []
    for n in sizes:
        L = encoding_length(I.source, n)
        zeros = np.zeros((1, L), dtype=bool)
        base = _outputs(I, zeros, n)[0]
        M = base.shape[0]
        changed = np.zeros(M, dtype=np.int32)
        src = np.full(M, -1, dtype=np.int64)
        second = np.full(M, -1, dtype=np.int64)
        chunk = max(1, _CELLS // max(M, 1))
        for lo in range(0, L, chunk):
            ts = np.arange(lo, min(L, lo + chunk))
            flips = np.zeros((len(ts), L), dtype=bool)
            flips[np.arange(len(ts)), ts] = True
            outs = _outputs(I, flips, n)
            for row, t in zip(outs, ts):
                idx = np.flatnonzero(row != base)
                fresh = idx[src[idx] < 0]
                src[fresh] = t
                again = idx[(src[idx] >= 0) & (src[idx] != t) & (second[idx] < 0)]
                second[again] = t
                changed[idx] += 1
        kinds = np.where(changed == 0, base.astype(np.int8),
                         np.where(base, 3, 2)).astype(np.int8)
        src = np.where(changed == 0, -1, src)
        rep = SizeReport(n, kinds, src)
        for j in np.flatnonzero(changed > 1)[:max_inconsistencies]:
            w = zeros[0].copy()
            rep.inconsistencies.append({
                "n": n, "bit": int(j), "input": _bitstr(w),
                "reason": f"flips of input bits {int(src[j])} and {int(second[j])} both change it"})
        tests = np.vstack([np.ones((1, L), dtype=bool), rng.random((r, L)) < 0.5])
        for lo in range(0, len(tests), chunk):
            ins = tests[lo:lo + chunk]
            outs = _outputs(I, ins, n)
            for w, out in zip(ins, outs):
                pred = np.where(kinds <= 1, kinds.astype(bool),
                                w[np.maximum(src, 0)] ^ (kinds == 3))
                bad = np.flatnonzero(pred != out)
                for j in bad[:max(0, max_inconsistencies - len(rep.inconsistencies))]:
                    rep.inconsistencies.append({
                        "n": n, "bit": int(j), "input": _bitstr(w),
                        "reason": f"classified {rep.classification(j)} but output is {int(out[j])}"})
        reports.append(rep)
    return ProjectionReport(reports)


# ---------------------------------------------------------------- compose

def _expand_term(t, k: int, block: dict) -> list:
    if isinstance(t, Var):
        return [Var(v) for v in block[t.name]]
    if isinstance(t, Min):
        return [MIN] * k
    if isinstance(t, Max):
        return [MAX] * k
    if isinstance(t, Num):
        if k == 1:
            return [t]
        if t.value == 0:
            return [MIN] * k
        raise InterpretationError(
            f"numeral {t.value} has no size-independent {k}-tuple expansion")
    raise TypeError(t)


def _lex_suc(s: list, t: list) -> Formula:
    k = len(s)
    alts = []
    for i in range(k):
        alts.append(conj(*[Eq(s[j], t[j]) for j in range(i)], Suc(s[i], t[i]),
                         *[conj(Eq(s[j], MAX), Eq(t[j], MIN)) for j in range(i + 1, k)]))
    return disj(*alts)


def _lex_le(s: list, t: list) -> Formula:
    k = len(s)
    alts = [conj(*[Eq(s[j], t[j]) for j in range(k)])]
    for i in range(k):
        alts.append(conj(*[Eq(s[j], t[j]) for j in range(i)],
                         Le(s[i], t[i]), Not(Eq(s[i], t[i]))))
    return disj(*alts)


def compose(I: Interpretation, J: Interpretation) -> Interpretation:
    """Interpretation with ``apply(compose(I, J), A) == apply(I, apply(J, A))``;
    arity ``I.k * J.k``.  Element ``(u_1..u_kI)`` of the double image, each
    ``u_i`` a ``J.k``-tuple, becomes the flat ``I.k * J.k``-tuple."""
    if J.target != I.source:
        raise InterpretationError(f"cannot compose: {J.target} vs {I.source}")
    kJ = J.k

    def fresh_block(v):
        return [fresh_name(v) for _ in range(kJ)]

    def go(f, block):
        ex = lambda t: _expand_term(t, kJ, block)
        if isinstance(f, Atom):
            args = [u for t in f.args for u in ex(t)]
            psi = J.formula(f.rel)
            return substitute(psi, dict(zip(J.variables(f.rel), args)))
        if isinstance(f, Eq):
            return conj(*[Eq(a, b) for a, b in zip(ex(f.left), ex(f.right))])
        if isinstance(f, Suc):
            return _lex_suc(ex(f.left), ex(f.right))
        if isinstance(f, Le):
            return _lex_le(ex(f.left), ex(f.right))
        if isinstance(f, Not):
            return Not(go(f.body, block))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(go(f.left, block), go(f.right, block))
        if isinstance(f, (Forall, Exists)):
            names = fresh_block(f.var)
            body = go(f.body, {**block, f.var: names})
            for v in reversed(names):
                body = type(f)(v, body)
            return body
        if isinstance(f, (TC, DTC)):
            inner = dict(block)
            pre, post = [], []
            for v in f.pre:
                inner[v] = fresh_block(v)
                pre += inner[v]
            for v in f.post:
                inner[v] = fresh_block(v)
                post += inner[v]
            return type(f)(tuple(pre), tuple(post), go(f.body, inner),
                           tuple(u for t in f.src for u in ex(t)),
                           tuple(u for t in f.dst for u in ex(t)))
        raise InterpretationError(f"cannot compose through {type(f).__name__}")

    formulas = []
    for (name, arity), phi in zip(I.target.relations, I.formulas):
        block = {}
        flat = iter(xvars(I.k * arity * kJ))
        for v in xvars(I.k * arity):
            block[v] = [next(flat) for _ in range(kJ)]
        formulas.append(go(phi, block))
    return Interpretation(I.k * kJ, J.source, I.target, tuple(formulas))


def identity(vocab: Vocabulary) -> Interpretation:
    """``k = 1`` interpretation copying every relation."""
    return Interpretation(1, vocab, vocab, tuple(
        Atom(name, tuple(Var(v) for v in xvars(a))) for name, a in vocab.relations))


# ------------------------------------------------------------- file format

_HEADER = re.compile(r"interp\s+k\s*=\s*(\d+)\s+from\s+(.*?)\s+to\s+(.*)\Z")


def format_interpretation(I: Interpretation) -> str:
    lines = [f"interp k={I.k} from {I.source} to {I.target}"]
    for name, phi in zip(I.target.names, I.formulas):
        lines.append(f"{name} := {to_text(phi)}")
    return "\n".join(lines) + "\n"


def parse_interpretation(text: str) -> Interpretation:
    """Header ``interp k=<k> from <vocab> to <vocab>`` then one
    ``R := formula`` line per target relation (``#`` starts a comment)."""
    header, defs = None, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            m = _HEADER.match(line)
            if not m:
                raise InterpretationError(f"line {lineno}: expected 'interp k=.. from .. to ..'")
            k = int(m.group(1))
            try:
                header = (k, Vocabulary.of(*m.group(2).split()), Vocabulary.of(*m.group(3).split()))
            except StructureError as e:
                raise InterpretationError(f"line {lineno}: {e}") from None
            continue
        name, sep, body = line.partition(":=")
        name = name.strip()
        if not sep or name not in header[2]:
            raise InterpretationError(f"line {lineno}: expected '<relation> := <formula>'")
        if name in defs:
            raise InterpretationError(f"line {lineno}: {name} defined twice")
        try:
            defs[name] = parse(body, header[1])
        except FormulaError as e:
            raise InterpretationError(f"line {lineno}: {e}") from None
    if header is None:
        raise InterpretationError("empty interpretation file")
    k, src, tgt = header
    missing = [r for r in tgt.names if r not in defs]
    if missing:
        raise InterpretationError(f"no definition for {missing}")
    return Interpretation(k, src, tgt, tuple(defs[r] for r in tgt.names))


def read_interpretation(path) -> Interpretation:
    with open(path, encoding="utf-8") as fh:
        return parse_interpretation(fh.read())
