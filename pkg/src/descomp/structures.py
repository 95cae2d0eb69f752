"""Finite ordered structures over relational vocabularies.

The universe of a structure of size ``n`` is ``{0, ..., n-1}`` with the
integer order.  ``min`` is 0, ``max`` is ``n - 1`` and ``suc`` is the
successor relation; none of these is stored, they are derived on demand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

RESERVED = frozenset({"suc", "min", "max", "=", "<="})

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class StructureError(ValueError):
    """Raised for malformed vocabularies, structures and encodings."""


@dataclass(frozen=True)
class Vocabulary:
    relations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        rels = tuple((str(name), int(arity)) for name, arity in self.relations)
        object.__setattr__(self, "relations", rels)
        seen = set()
        for name, arity in rels:
            if not _NAME.match(name):
                raise StructureError(f"bad relation name {name!r}")
            if name in RESERVED:
                raise StructureError(f"relation name {name!r} is reserved")
            if name in seen:
                raise StructureError(f"duplicate relation {name!r}")
            if arity < 1:
                raise StructureError(f"relation {name!r} has arity {arity} < 1")
            seen.add(name)

    @classmethod
    def of(cls, *specs: str) -> "Vocabulary":
        """Build from ``"E/2"``-style specs: ``Vocabulary.of("P/2", "N/2")``."""
        rels = []
        for spec in specs:
            name, _, arity = spec.partition("/")
            if not arity.isdigit():
                raise StructureError(f"bad relation spec {spec!r}")
            rels.append((name, int(arity)))
        return cls(tuple(rels))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)

    def arity(self, name: str) -> int:
        for rel, arity in self.relations:
            if rel == name:
                return arity
        raise KeyError(name)

    def __contains__(self, name) -> bool:
        return any(rel == name for rel, _ in self.relations)

    def __str__(self) -> str:
        return " ".join(f"{name}/{arity}" for name, arity in self.relations)


GRAPH = Vocabulary((("E", 2),))


@dataclass(frozen=True)
class Structure:
    """An immutable finite ordered structure.

    ``tables`` maps every relation of ``vocab`` to a frozenset of tuples.
    """

    vocab: Vocabulary
    size: int
    tables: Mapping[str, frozenset] = field(compare=True)

    def __post_init__(self):
        n = self.size
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise StructureError(f"size must be a positive integer, got {n!r}")
        object.__setattr__(self, "size", int(n))
        extra = set(self.tables) - set(self.vocab.names)
        if extra:
            raise StructureError(f"unknown relation(s) {sorted(extra)}")
        canon = {}
        for name, arity in self.vocab.relations:
            rows = set()
            for t in self.tables.get(name, ()):
                t = tuple(int(e) for e in t)
                if len(t) != arity:
                    raise StructureError(
                        f"{name}{t}: arity mismatch, expected {arity}")
                for e in t:
                    if not 0 <= e < n:
                        raise StructureError(
                            f"{name}{t}: element {e} out of range [0,{n})")
                rows.add(t)
            canon[name] = frozenset(rows)
        object.__setattr__(self, "tables", _FrozenDict(canon))

    def __hash__(self):
        return hash((self.vocab, self.size, tuple(sorted(
            (k, hash(v)) for k, v in self.tables.items()))))

    def holds(self, name: str, *elems: int) -> bool:
        return tuple(elems) in self.tables[name]

    def array(self, name: str) -> np.ndarray:
        """Characteristic array of ``name`` with shape ``(n,) * arity``."""
        return self._arrays[name]

    @cached_property
    def _arrays(self) -> dict:
        out = {}
        for name, arity in self.vocab.relations:
            a = np.zeros((self.size,) * arity, dtype=bool)
            for t in self.tables[name]:
                a[t] = True
            a.flags.writeable = False
            out[name] = a
        return out

    def to_batch(self) -> "StructureBatch":
        return StructureBatch(self.vocab, self.size,
                              {k: v[None] for k, v in self._arrays.items()})


class _FrozenDict(dict):
    """dict that refuses mutation after construction."""

    def _blocked(self, *a, **k):
        raise TypeError("structure tables are immutable")

    __setitem__ = __delitem__ = clear = pop = popitem = update = setdefault = _blocked

    def __hash__(self):
        return hash(tuple(sorted(self.items())))


def new_structure(vocab: Vocabulary, n: int,
                  tables: Mapping[str, Iterable[Sequence[int]]] | None = None) -> Structure:
    return Structure(vocab, n, {k: frozenset(map(tuple, v))
                                for k, v in (tables or {}).items()})


def graph(n: int, edges: Iterable[tuple[int, int]] = ()) -> Structure:
    return new_structure(GRAPH, n, {"E": edges})


@dataclass(frozen=True)
class StructureBatch:
    """Several structures of one size and vocabulary stacked along axis 0.

    ``tables[name]`` has shape ``(B,) + (n,) * arity``.  Used by the
    vectorised evaluator for exhaustive sweeps.
    """

    vocab: Vocabulary
    size: int
    tables: Mapping[str, np.ndarray]

    def __post_init__(self):
        lens = {v.shape[0] for v in self.tables.values()}
        if len(lens) > 1:
            raise StructureError("batch tables disagree on batch length")
        for name, arity in self.vocab.relations:
            a = self.tables[name]
            if a.shape[1:] != (self.size,) * arity or a.dtype != bool:
                raise StructureError(f"batch table {name} has bad shape {a.shape}")

    def __len__(self) -> int:
        return next(iter(self.tables.values())).shape[0]

    @classmethod
    def from_structures(cls, structures: Sequence[Structure]) -> "StructureBatch":
        first = structures[0]
        for s in structures:
            if s.vocab != first.vocab or s.size != first.size:
                raise StructureError("batch members must share vocabulary and size")
        return cls(first.vocab, first.size,
                   {name: np.stack([s.array(name) for s in structures])
                    for name in first.vocab.names})

    def structure(self, i: int) -> Structure:
        return Structure(self.vocab, self.size,
                         {name: frozenset(map(tuple, np.argwhere(a[i]).tolist()))
                          for name, a in self.tables.items()})

    def __iter__(self) -> Iterator[Structure]:
        return (self.structure(i) for i in range(len(self)))

    def __getitem__(self, sl) -> "StructureBatch":
        if isinstance(sl, (int, np.integer)):
            sl = slice(sl, sl + 1)
        return StructureBatch(self.vocab, self.size,
                              {k: v[sl] for k, v in self.tables.items()})


# ----------------------------------------------------------------- encodings

def rank_lex(t: Sequence[int], n: int) -> int:
    """Base-``n`` value of ``t`` read left to right."""
    r = 0
    for e in t:
        if not 0 <= e < n:
            raise StructureError(f"element {e} out of range [0,{n})")
        r = r * n + e
    return r


def unrank_lex(i: int, k: int, n: int) -> tuple[int, ...]:
    if not 0 <= i < n ** k:
        raise StructureError(f"rank {i} out of range [0,{n ** k})")
    out = []
    for _ in range(k):
        i, e = divmod(i, n)
        out.append(e)
    return tuple(reversed(out))


def encoding_length(vocab: Vocabulary, n: int) -> int:
    return sum(n ** a for _, a in vocab.relations)


def encode_bits(A: Structure | StructureBatch) -> np.ndarray:
    """Bit vector(s) of the encoding; shape ``(L,)`` or ``(B, L)``."""
    if isinstance(A, StructureBatch):
        return np.concatenate([A.tables[name].reshape(len(A), -1)
                               for name in A.vocab.names], axis=1)
    return np.concatenate([A.array(name).ravel() for name in A.vocab.names])


def encode(A: Structure) -> str:
    """Concatenated characteristic vectors, tuples in lexicographic order."""
    return "".join("1" if b else "0" for b in encode_bits(A))


def decode_bits(vocab: Vocabulary, n: int, bits: np.ndarray) -> StructureBatch:
    """Inverse of :func:`encode_bits` for a ``(B, L)`` array."""
    bits = np.asarray(bits, dtype=bool)
    if bits.ndim == 1:
        bits = bits[None]
    L = encoding_length(vocab, n)
    if bits.shape[1] != L:
        raise StructureError(f"encoding has length {bits.shape[1]}, expected {L}")
    tables, off = {}, 0
    for name, a in vocab.relations:
        w = n ** a
        tables[name] = bits[:, off:off + w].reshape((len(bits),) + (n,) * a)
        off += w
    return StructureBatch(vocab, n, tables)


def decode(vocab: Vocabulary, n: int, bits: str) -> Structure:
    if set(bits) - {"0", "1"}:
        raise StructureError("encoding must consist of '0' and '1'")
    if len(bits) != encoding_length(vocab, n):
        raise StructureError(
            f"encoding has length {len(bits)}, expected {encoding_length(vocab, n)}")
    arr = np.frombuffer(bits.encode(), dtype=np.uint8) == ord("1")
    return decode_bits(vocab, n, arr).structure(0)


def all_structures(vocab: Vocabulary, n: int, chunk: int = 1 << 14) -> Iterator[StructureBatch]:
    """Every structure of size ``n`` in encoding order, in batches."""
    L = encoding_length(vocab, n)
    if L > 24:
        raise StructureError(f"2^{L} structures is too many to enumerate")
    total = 1 << L
    shifts = np.arange(L - 1, -1, -1, dtype=np.int64)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        yield decode_bits(vocab, n, (codes[:, None] >> shifts) & 1)


def all_tuples(n: int, k: int) -> Iterator[tuple[int, ...]]:
    return product(range(n), repeat=k)


# -------------------------------------------------------------- text format

def format_structure(A: Structure) -> str:
    lines = [f"vocab {A.vocab}", f"size {A.size}"]
    for name in A.vocab.names:
        rows = sorted(A.tables[name])
        if rows:
            lines.append(f"{name}: " + " ".join(
                "(" + ",".join(map(str, t)) + ")" for t in rows))
    return "\n".join(lines) + "\n"


_TUPLE = re.compile(r"\(\s*([0-9\s,]*)\)")


def parse_structure(text: str) -> Structure:
    vocab = size = None
    tables: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if vocab is None:
            head, *rest = line.split()
            if head != "vocab":
                raise StructureError(f"line {lineno}: expected 'vocab'")
            vocab = Vocabulary.of(*rest)
        elif size is None:
            head, *rest = line.split()
            if head != "size" or len(rest) != 1 or not rest[0].isdigit():
                raise StructureError(f"line {lineno}: expected 'size <n>'")
            size = int(rest[0])
        else:
            name, sep, body = line.partition(":")
            name = name.strip()
            if not sep or name not in vocab:
                raise StructureError(f"line {lineno}: unknown relation line {line!r}")
            if _TUPLE.sub("", body).strip():
                raise StructureError(f"line {lineno}: cannot parse tuples")
            rows = tables.setdefault(name, [])
            for m in _TUPLE.finditer(body):
                parts = [p for p in m.group(1).replace(" ", "").split(",") if p]
                rows.append(tuple(int(p) for p in parts))
    if vocab is None or size is None:
        raise StructureError("structure file needs 'vocab' and 'size' lines")
    return new_structure(vocab, size, tables)


def read_structure(path) -> Structure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())
