"""Model checking for FO + TC + DTC + SO-exists over finite ordered structures.

Formulas are evaluated bottom-up as boolean arrays: the denotation of a
subformula with free variables ``v1..vm`` is an array of shape
``(B, n, ..., n)`` holding its truth value under every assignment, where
``B`` runs over a batch of structures (``B == 1`` for parts that do not
depend on the structure).  A second-order variable ``R/a`` is handled as an
extra axis of length ``2 ** (n ** a)`` that ranges over all candidate
tables, so ``exR`` is an ``any`` over that axis.

:func:`reference_eval` is a deliberately naive recursive evaluator that
shares no code with the array path; tests use it as an oracle.
"""

from __future__ import annotations

import os
import threading
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .logic import (ATOMIC, DTC, TC, And, Atom, Eq, Exists, ExistsRel, Forall,
                    Formula, Iff, Implies, Le, Max, Min, Not, Num, Or, Suc, Var,
                    conj, disj, flatten, free_vars, is_numeric)
from .structures import Structure, StructureBatch

DEFAULT_SOE_CAP = 20


class EvaluationError(ValueError):
    """Unbound variable, out-of-range numeral, or SO enumeration refused."""


def soe_cap() -> int:
    """Largest table (in cells) an ``exR`` may enumerate.

    Overridable through the ``DESCOMP_SOE_CAP`` environment variable.
    """
    raw = os.environ.get("DESCOMP_SOE_CAP")
    return int(raw) if raw else DEFAULT_SOE_CAP


@dataclass(frozen=True)
class _Rel:
    vars: tuple          # axis names after the batch axis
    arr: np.ndarray      # shape (b, *sizes), b in {1, B}


def _so_axis(name: str) -> str:
    return "@" + name


# Numeric subformulas depend only on the size; their denotations are cached
# across calls, keyed on (formula, n).
_NUMERIC_CACHE: dict = {}
_NUMERIC_CACHE_BYTES = 1 << 28
_numeric_lock = threading.Lock()
_numeric_bytes = [0]


# Scatter positions of sparse numeric guards, keyed on (guard, n, axis order).
_SPARSE_CACHE: dict = {}


def clear_cache() -> None:
    with _numeric_lock:
        _NUMERIC_CACHE.clear()
        _SPARSE_CACHE.clear()
        _numeric_bytes[0] = 0


class _Evaluator:
    def __init__(self, batch: StructureBatch, so_tables=None, cap=None):
        self.n = batch.size
        self.B = len(batch)
        self.tables = dict(batch.tables)
        self.vocab = batch.vocab
        self.cap = soe_cap() if cap is None else cap
        # SO variables given as free relations (constant across the batch)
        for name, table in (so_tables or {}).items():
            self.tables[name] = table[None]
        self.memo: dict = {}
        n = self.n
        idx = np.arange(n)
        self.numeric = {
            "=": (idx[:, None] == idx[None, :])[None],
            "suc": (idx[:, None] + 1 == idx[None, :])[None],
            "<=": (idx[:, None] <= idx[None, :])[None],
        }

    # -- helpers -------------------------------------------------------
    def size(self, var: str, scope) -> int:
        if var.startswith("@"):
            return 1 << (self.n ** scope[var[1:]])
        return self.n

    def const(self, t) -> int | None:
        if isinstance(t, Min):
            return 0
        if isinstance(t, Max):
            return self.n - 1
        if isinstance(t, Num):
            if not 0 <= t.value < self.n:
                raise EvaluationError(
                    f"numeral {t.value} is out of range for size {self.n}")
            return t.value
        return None

    def gather(self, table, axes, scope) -> _Rel:
        """Index ``table`` (shape ``(b, ...)``) along each axis by a term.

        ``axes`` gives, per table axis, a term or an axis-variable name.
        """
        out_vars = []
        for t in axes:
            name = t if isinstance(t, str) else (t.name if isinstance(t, Var) else None)
            if name is not None and name not in out_vars:
                out_vars.append(name)
        k = len(out_vars)
        b = table.shape[0]
        index = [np.arange(b).reshape((b,) + (1,) * k)]
        for t in axes:
            name = t if isinstance(t, str) else (t.name if isinstance(t, Var) else None)
            if name is None:
                index.append(np.full((1,) * (k + 1), self.const(t)))
            else:
                p = out_vars.index(name)
                shape = [1] * (k + 1)
                shape[p + 1] = self.size(name, scope)
                index.append(np.arange(shape[p + 1]).reshape(shape))
        return _Rel(tuple(out_vars), table[tuple(index)])

    def align(self, rel: _Rel, order, scope, full=False) -> np.ndarray:
        """View ``rel.arr`` with axes in ``order`` (missing ones size 1)."""
        present = [v for v in order if v in rel.vars]
        perm = [0] + [1 + rel.vars.index(v) for v in present]
        arr = rel.arr.transpose(perm)
        shape = (arr.shape[0],) + tuple(
            self.size(v, scope) if v in rel.vars else 1 for v in order)
        arr = arr.reshape(shape)
        if full:
            arr = np.broadcast_to(arr, (arr.shape[0],) + tuple(
                self.size(v, scope) for v in order))
        return arr

    def combine(self, a: _Rel, b: _Rel, op, scope) -> _Rel:
        order = tuple(dict.fromkeys(a.vars + b.vars))
        return _Rel(order, op(self.align(a, order, scope), self.align(b, order, scope)))

    # -- evaluation ----------------------------------------------------
    def denote(self, f: Formula, scope: Mapping[str, int]) -> _Rel:
        cacheable = not scope and is_numeric(f)
        if cacheable:
            key = (f, self.n)
            hit = _NUMERIC_CACHE.get(key)
            if hit is not None:
                return hit
        key = (f, tuple(sorted(scope.items())))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        rel = self._denote(f, scope)
        self.memo[key] = rel
        if cacheable:
            with _numeric_lock:
                if _numeric_bytes[0] + rel.arr.nbytes <= _NUMERIC_CACHE_BYTES:
                    rel.arr.flags.writeable = False
                    _NUMERIC_CACHE[(f, self.n)] = rel
                    _numeric_bytes[0] += rel.arr.nbytes
        return rel

    def _denote(self, f: Formula, scope) -> _Rel:
        if isinstance(f, Atom):
            if f.rel in scope:
                return self.gather(self.all_tables(scope[f.rel])[None],
                                   (_so_axis(f.rel),) + f.args, scope)
            if f.rel not in self.tables:
                raise EvaluationError(f"unknown relation {f.rel!r}")
            table = self.tables[f.rel]
            if table.ndim - 1 != len(f.args):
                raise EvaluationError(f"arity mismatch for {f.rel}")
            return self.gather(table, f.args, scope)
        if isinstance(f, Eq):
            return self.gather(self.numeric["="], (f.left, f.right), scope)
        if isinstance(f, Suc):
            return self.gather(self.numeric["suc"], (f.left, f.right), scope)
        if isinstance(f, Le):
            return self.gather(self.numeric["<="], (f.left, f.right), scope)
        if isinstance(f, Not):
            r = self.denote(f.body, scope)
            return _Rel(r.vars, ~r.arr)
        if isinstance(f, And):
            return self.combine(self.denote(f.left, scope), self.denote(f.right, scope),
                                np.logical_and, scope)
        if isinstance(f, Or):
            ds = flatten(f, Or)
            if len(ds) > 2:
                return self.wide_or(ds, scope)
            return self.combine(self.denote(f.left, scope), self.denote(f.right, scope),
                                np.logical_or, scope)
        if isinstance(f, Implies):
            return self.combine(self.denote(f.left, scope), self.denote(f.right, scope),
                                lambda a, b: ~a | b, scope)
        if isinstance(f, Iff):
            return self.combine(self.denote(f.left, scope), self.denote(f.right, scope),
                                np.equal, scope)
        if isinstance(f, (Exists, Forall)):
            r = self.denote(f.body, scope)
            if f.var not in r.vars:
                return r
            axis = 1 + r.vars.index(f.var)
            red = r.arr.any(axis=axis) if isinstance(f, Exists) else r.arr.all(axis=axis)
            return _Rel(tuple(v for v in r.vars if v != f.var), red)
        if isinstance(f, ExistsRel):
            cells = self.n ** f.arity
            if cells > self.cap:
                raise EvaluationError(
                    f"exR {f.name}/{f.arity} needs {cells} cells at size {self.n}; "
                    f"cap is {self.cap} (set DESCOMP_SOE_CAP to raise it)")
            inner = {**scope, f.name: f.arity}
            r = self.denote(f.body, inner)
            ax = _so_axis(f.name)
            if ax not in r.vars:
                return r
            return _Rel(tuple(v for v in r.vars if v != ax),
                        r.arr.any(axis=1 + r.vars.index(ax)))
        if isinstance(f, (TC, DTC)):
            return self.closure(f, scope)
        raise TypeError(f"not a formula: {f!r}")

    def wide_or(self, ds, scope) -> _Rel:
        """Disjunction of many formulas.

        Numeric disjuncts are merged into one (cacheable) formula.  A
        disjunct ``guard & rest`` whose numeric guard is sparse is written
        only at the guard's true cells, which keeps projections cheap.
        """
        numeric = [d for d in ds if is_numeric(d)]
        dense, guarded = [], []
        if len(numeric) == len(ds):
            dense = [self.denote(d, scope) for d in ds]
        elif numeric:
            dense.append(self.denote(disj(*numeric), scope))
        for d in ds:
            if is_numeric(d):
                continue
            cs = flatten(d, And)
            g = [c for c in cs if is_numeric(c)]
            r = [c for c in cs if not is_numeric(c)]
            if g and r:
                guarded.append((conj(*g), self.denote(conj(*g), scope),
                                self.denote(conj(*r), scope)))
            else:
                dense.append(self.denote(d, scope))
        rels = dense + [x for _, g, r in guarded for x in (g, r)]
        order = tuple(dict.fromkeys(v for rel in rels for v in rel.vars))
        B = max(rel.arr.shape[0] for rel in rels)
        sizes = tuple(self.size(v, scope) for v in order)
        out = np.zeros((B,) + sizes, dtype=bool)
        for rel in dense:
            out |= self.align(rel, order, scope)
        total = int(np.prod(sizes, dtype=np.int64))
        flat_out = out.reshape(B, -1)
        for gf, g, r in guarded:
            pos = self.scatter(gf, g, order, sizes, scope)
            if pos is None or len(pos[0]) * 4 > total:
                out |= self.align(g, order, scope) & self.align(r, order, scope)
                continue
            flat, coords = pos
            vals = r.arr[(slice(None),) + tuple(coords[order.index(v)] for v in r.vars)]
            flat_out[:, flat] |= vals
        return _Rel(order, out)

    def scatter(self, gf, g: _Rel, order, sizes, scope):
        """Flat positions (in ``order``) and per-axis coordinates of the
        cells where guard ``g`` holds, or ``None`` if ``g`` varies with the
        structure."""
        if g.arr.shape[0] != 1:
            return None
        key = (gf, self.n, order, sizes)
        hit = _SPARSE_CACHE.get(key) if not scope else None
        if hit is not None:
            return hit
        if not g.vars:
            # closed guard: all cells or none
            if g.arr.any():
                return None
            return np.zeros(0, dtype=np.int64), [np.zeros(0, dtype=np.int64)] * len(order)
        nz = np.nonzero(g.arr[0])
        extra = [i for i, v in enumerate(order) if v not in g.vars]
        m = int(np.prod([sizes[i] for i in extra], dtype=np.int64))
        k = len(nz[0])
        total = int(np.prod(sizes, dtype=np.int64))
        if k * m * 4 > total:
            return None
        coords = [None] * len(order)
        for v, a in zip(g.vars, nz):
            coords[order.index(v)] = np.repeat(a, m)
        if extra:
            grid = np.indices([sizes[i] for i in extra]).reshape(len(extra), -1)
            for j, i in enumerate(extra):
                coords[i] = np.tile(grid[j], k)
        flat = np.ravel_multi_index(coords, sizes)
        pos = (flat, coords)
        if not scope:
            _SPARSE_CACHE[key] = pos
        return pos

    def all_tables(self, arity: int) -> np.ndarray:
        cells = self.n ** arity
        codes = np.arange(1 << cells, dtype=np.int64)
        bits = (codes[:, None] >> np.arange(cells - 1, -1, -1)) & 1
        return bits.astype(bool).reshape((1 << cells,) + (self.n,) * arity)

    def closure(self, f, scope) -> _Rel:
        k = len(f.pre)
        body = self.denote(f.body, scope)
        bound = tuple(f.pre) + tuple(f.post)
        params = tuple(v for v in body.vars if v not in bound)
        order = params + bound
        arr = self.align(body, order, scope, full=True)
        b = arr.shape[0]
        psizes = arr.shape[1:1 + len(params)]
        N = self.n ** k
        M = np.ascontiguousarray(arr).reshape((b, -1, N, N)).copy()
        if isinstance(f, DTC):
            M &= (M.sum(axis=-1, keepdims=True) == 1)
        M |= np.eye(N, dtype=bool)
        for w in range(N):
            M |= M[..., :, w, None] & M[..., None, w, :]
        M = M.reshape((b,) + tuple(psizes) + (self.n,) * (2 * k))
        return self.gather(M, params + tuple(f.src) + tuple(f.dst), scope)


def _as_batch(A) -> StructureBatch:
    if isinstance(A, StructureBatch):
        return A
    if isinstance(A, Structure):
        return A.to_batch()
    raise TypeError(f"expected Structure or StructureBatch, got {type(A).__name__}")


def _so_env(env, n):
    out = {}
    for name, table in (env or {}).items():
        if isinstance(table, np.ndarray):
            out[name] = table.astype(bool)
            continue
        rows = [tuple(t) for t in table]
        arity = len(rows[0]) if rows else None
        if arity is None:
            raise EvaluationError(
                f"empty relation {name!r} needs an explicit array to fix its arity")
        arr = np.zeros((n,) * arity, dtype=bool)
        for t in rows:
            if len(t) != arity or not all(0 <= e < n for e in t):
                raise EvaluationError(f"bad tuple {t} for relation {name!r}")
            arr[t] = True
        out[name] = arr
    return out


def relation(A, phi: Formula, vars_: Sequence[str], so_env=None, cap=None) -> np.ndarray:
    """Truth table of ``phi`` over the variables ``vars_``.

    Returns shape ``(n,) * len(vars_)`` for a :class:`Structure`, or
    ``(B,) + (n,) * len(vars_)`` for a :class:`StructureBatch`.  Variables
    in ``vars_`` that ``phi`` does not mention are broadcast.
    """
    batch = _as_batch(A)
    vars_ = tuple(vars_)
    missing = [v for v in free_vars(phi) if v not in vars_]
    if missing:
        raise EvaluationError(f"unbound variable(s) {missing}")
    if len(set(vars_)) != len(vars_):
        raise EvaluationError("duplicate variables requested")
    ev = _Evaluator(batch, _so_env(so_env, batch.size), cap)
    rel = ev.denote(phi, {})
    arr = ev.align(rel, vars_, {}, full=True)
    arr = np.broadcast_to(arr, (len(batch),) + arr.shape[1:])
    return arr[0] if isinstance(A, Structure) else arr


def relations(A, queries: Sequence[tuple[Formula, Sequence[str]]], cap=None) -> list:
    """Several :func:`relation` calls on one structure or batch that share
    intermediate results (common subformulas are evaluated once)."""
    batch = _as_batch(A)
    ev = _Evaluator(batch, None, cap)
    out = []
    for phi, vars_ in queries:
        vars_ = tuple(vars_)
        missing = [v for v in free_vars(phi) if v not in vars_]
        if missing:
            raise EvaluationError(f"unbound variable(s) {missing}")
        arr = ev.align(ev.denote(phi, {}), vars_, {}, full=True)
        arr = np.broadcast_to(arr, (len(batch),) + arr.shape[1:])
        out.append(arr[0] if isinstance(A, Structure) else arr)
    return out


def eval_formula(A, phi: Formula, env: Mapping | None = None, cap=None):
    """Decide ``A |= phi[env]``.

    ``env`` maps first-order variables to elements and free relation
    variables to sets of tuples.  For a batch, returns one bool per member.
    """
    env = dict(env or {})
    fo = {k: v for k, v in env.items() if not isinstance(v, (set, frozenset, list, np.ndarray))}
    so = {k: v for k, v in env.items() if k not in fo}
    vars_ = free_vars(phi)
    batch = _as_batch(A)
    for v in vars_:
        if v not in fo:
            raise EvaluationError(f"unbound variable {v!r}")
        if not 0 <= int(fo[v]) < batch.size:
            raise EvaluationError(f"{v}={fo[v]} is outside the universe")
    table = relation(batch, phi, vars_, so, cap)
    out = table[(slice(None),) + tuple(int(fo[v]) for v in vars_)]
    return bool(out[0]) if isinstance(A, Structure) else out


def satisfying_assignments(A: Structure, phi: Formula, vars_: Sequence[str],
                           cap=None) -> set[tuple[int, ...]]:
    table = relation(A, phi, vars_, cap=cap)
    return {tuple(int(e) for e in t) for t in np.argwhere(table)}


def tc_closure(pairs: Iterable, n: int, k: int) -> set:
    """Reflexive transitive closure of a relation on ``k``-tuples over
    ``[0, n)``, by breadth-first search from every tuple."""
    succ: dict = {}
    for a, b in pairs:
        a, b = tuple(a), tuple(b)
        for t in (a, b):
            if len(t) != k or not all(0 <= e < n for e in t):
                raise EvaluationError(f"tuple {t} is not a {k}-tuple over [0,{n})")
        succ.setdefault(a, []).append(b)
    out = set()
    for s in product(range(n), repeat=k):
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in succ.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        out.update((s, t) for t in seen)
    return out


# --------------------------------------------------------- reference oracle

def reference_eval(A: Structure, phi: Formula, env: Mapping | None = None,
                   cap: int | None = None) -> bool:
    """Direct recursive Tarskian evaluation; exponential, no memoisation."""
    cap = soe_cap() if cap is None else cap
    n = A.size

    def val(t, fo):
        if isinstance(t, Var):
            if t.name not in fo:
                raise EvaluationError(f"unbound variable {t.name!r}")
            return fo[t.name]
        if isinstance(t, Min):
            return 0
        if isinstance(t, Max):
            return n - 1
        if t.value >= n:
            raise EvaluationError(f"numeral {t.value} is out of range for size {n}")
        return t.value

    def ev(f, fo, so):
        if isinstance(f, Atom):
            args = tuple(val(t, fo) for t in f.args)
            if f.rel in so:
                return args in so[f.rel]
            return args in A.tables[f.rel]
        if isinstance(f, Eq):
            return val(f.left, fo) == val(f.right, fo)
        if isinstance(f, Suc):
            return val(f.left, fo) + 1 == val(f.right, fo)
        if isinstance(f, Le):
            return val(f.left, fo) <= val(f.right, fo)
        if isinstance(f, Not):
            return not ev(f.body, fo, so)
        if isinstance(f, And):
            return ev(f.left, fo, so) and ev(f.right, fo, so)
        if isinstance(f, Or):
            return ev(f.left, fo, so) or ev(f.right, fo, so)
        if isinstance(f, Implies):
            return (not ev(f.left, fo, so)) or ev(f.right, fo, so)
        if isinstance(f, Iff):
            return ev(f.left, fo, so) == ev(f.right, fo, so)
        if isinstance(f, Exists):
            return any(ev(f.body, {**fo, f.var: e}, so) for e in range(n))
        if isinstance(f, Forall):
            return all(ev(f.body, {**fo, f.var: e}, so) for e in range(n))
        if isinstance(f, ExistsRel):
            cells = list(product(range(n), repeat=f.arity))
            if len(cells) > cap:
                raise EvaluationError(f"exR {f.name}/{f.arity} exceeds the cap")
            for bits in product((False, True), repeat=len(cells)):
                table = frozenset(c for c, b in zip(cells, bits) if b)
                if ev(f.body, fo, {**so, f.name: table}):
                    return True
            return False
        if isinstance(f, (TC, DTC)):
            k = len(f.pre)
            tuples = list(product(range(n), repeat=k))

            def edge(a, b):
                return ev(f.body, {**fo, **dict(zip(f.pre, a)), **dict(zip(f.post, b))}, so)

            pairs = []
            for a in tuples:
                outs = [b for b in tuples if edge(a, b)]
                if isinstance(f, DTC) and len(outs) != 1:
                    continue
                pairs.extend((a, b) for b in outs)
            s = tuple(val(t, fo) for t in f.src)
            d = tuple(val(t, fo) for t in f.dst)
            return (s, d) in tc_closure(pairs, n, k)
        raise TypeError(f"not a formula: {f!r}")

    env = dict(env or {})
    fo = {k: v for k, v in env.items() if isinstance(v, (int, np.integer))}
    so = {k: frozenset(map(tuple, v)) for k, v in env.items() if k not in fo}
    return ev(phi, fo, so)
