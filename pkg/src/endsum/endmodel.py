"""Labeled end spaces: a small grammar, a normal form, and the quotient
that identifies two ends.

An end space is written with four constructors:

``Pt(l)``
    a single end with label ``l``;
``Cantor(l)``
    a Cantor set of ends, all labeled ``l``;
``Seq(T, l)``
    countably many disjoint copies of ``T`` converging to one limit end ``l``;
``Union(parts)``
    a finite disjoint union.

A label records the genus class (zero or infinite) and the orientability of
an end.  Together the labels encode the nested triple
(non-orientable ends, infinite-genus ends, all ends).  The empty end space
(a compact surface) is represented by ``None``.

Expressions are immutable and hashable.  ``canonicalize`` rewrites an
expression into a normal form; two expressions with equal normal forms
denote homeomorphic labeled spaces.  The converse holds for finite end
sets and for the shallow sequence/Cantor shapes produced by chain and
binary automata; outside that class ``homeomorphic`` is sound only.
"""

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union as TUnion

from .errors import (
    InvalidExpression,
    InvalidLabel,
    SameEnd,
    Unaddressable,
    UnknownEnd,
)


class Genus(enum.Enum):
    ZERO = 0
    INFINITE = 1


@dataclass(frozen=True)
class EndLabel:
    genus: Genus
    orientable: bool

    def __post_init__(self):
        if not isinstance(self.genus, Genus):
            raise InvalidLabel(f"genus class must be a Genus, got {self.genus!r}")
        if self.genus is Genus.ZERO and not self.orientable:
            raise InvalidLabel("a genus zero end is always orientable")

    @property
    def bits(self):
        return (self.genus.value, 0 if self.orientable else 1)

    def __str__(self):
        g = "0" if self.genus is Genus.ZERO else "inf"
        return f"{g},{'or' if self.orientable else 'non'}"


PLANAR = EndLabel(Genus.ZERO, True)
INF_OR = EndLabel(Genus.INFINITE, True)
INF_NON = EndLabel(Genus.INFINITE, False)
ALL_LABELS = (PLANAR, INF_OR, INF_NON)


def validate_label(genus_class, orientable):
    """Build a label, raising ``InvalidLabel`` for a non-orientable planar end."""
    return EndLabel(Genus(genus_class) if not isinstance(genus_class, Genus) else genus_class,
                    bool(orientable))


def merge_label(a, b):
    """Label of the end obtained by joining ends ``a`` and ``b`` with a strip.

    The merged end is orientable iff both are, and has genus zero iff both do.
    """
    genus = Genus.ZERO if a.genus is b.genus is Genus.ZERO else Genus.INFINITE
    return EndLabel(genus, a.orientable and b.orientable)


# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Pt:
    label: EndLabel


@dataclass(frozen=True)
class Cantor:
    label: EndLabel


@dataclass(frozen=True)
class Seq:
    body: "Expr"
    limit: EndLabel

    def __post_init__(self):
        # infinite-genus and non-orientable ends form closed subsets, so the
        # limit must carry every property that accumulates on it
        for lab in labels(self.body):
            if lab.genus is Genus.INFINITE and self.limit.genus is Genus.ZERO:
                raise InvalidExpression(
                    f"limit {self.limit} is genus zero but the body has infinite-genus ends")
            if not lab.orientable and self.limit.orientable:
                raise InvalidExpression(
                    f"limit {self.limit} is orientable but the body has non-orientable ends")


@dataclass(frozen=True)
class Union:
    parts: Tuple["Expr", ...]

    def __post_init__(self):
        if not isinstance(self.parts, tuple):
            object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise InvalidExpression("a union needs at least one part")


Expr = TUnion[Pt, Cantor, Seq, Union]


def union(*parts):
    return Union(tuple(parts))


@lru_cache(maxsize=None)
def labels(e):
    """All labels occurring in ``e`` (limits included)."""
    if e is None:
        return frozenset()
    if isinstance(e, (Pt, Cantor)):
        return frozenset([e.label])
    if isinstance(e, Seq):
        return labels(e.body) | {e.limit}
    if isinstance(e, Union):
        out = frozenset()
        for p in e.parts:
            out |= labels(p)
        return out
    raise InvalidExpression(f"not an end-space expression: {e!r}")


def validate(e):
    """Check an expression tree; constructors already enforce most invariants."""
    if e is None:
        return e
    if isinstance(e, (Pt, Cantor)):
        if not isinstance(e.label, EndLabel):
            raise InvalidExpression(f"bad label {e.label!r}")
    elif isinstance(e, Seq):
        validate(e.body)
    elif isinstance(e, Union):
        for p in e.parts:
            validate(p)
    else:
        raise InvalidExpression(f"not an end-space expression: {e!r}")
    return e


_TAGS = {Pt: 0, Cantor: 1, Seq: 2, Union: 3}


@lru_cache(maxsize=None)
def sort_key(e):
    """Total order: constructor tag, then label bits, then children."""
    if isinstance(e, (Pt, Cantor)):
        return (_TAGS[type(e)], e.label.bits)
    if isinstance(e, Seq):
        return (2, e.limit.bits, sort_key(e.body))
    return (3, (), tuple(sort_key(p) for p in e.parts))


def _parts(e):
    return e.parts if isinstance(e, Union) else (e,)


# ---------------------------------------------------------------------------
# normal form


def canonicalize(e):
    """Rewrite ``e`` to its normal form (idempotent).

    Rules, applied bottom-up to a fixpoint: nested unions are flattened and
    sorted; ``Cantor(l) + Cantor(l) -> Cantor(l)``; ``Seq(Cantor(l), l) ->
    Cantor(l)``; repeated parts of a sequence body collapse
    (``Seq(T + T, l) -> Seq(T, l)``); a finite extra copy of a body part
    next to a sequence is absorbed by an index shift
    (``T + Seq(T, l) -> Seq(T, l)``); singleton unions are unwrapped.
    """
    if e is None:
        return None
    return _canon(e)


@lru_cache(maxsize=None)
def _canon(e):
    if isinstance(e, (Pt, Cantor)):
        return e
    if isinstance(e, Seq):
        return _canon_seq(_canon(e.body), e.limit)
    if isinstance(e, Union):
        return _canon_union([_canon(p) for p in e.parts])
    raise InvalidExpression(f"not an end-space expression: {e!r}")


def _canon_seq(body, limit):
    if isinstance(body, Union):
        distinct = sorted(set(body.parts), key=sort_key)
        if len(distinct) != len(body.parts):
            body = _canon_union(distinct)
    if body == Cantor(limit):
        return body
    return Seq(body, limit)


def _absorbs(seq, x):
    """Whether one extra copy of ``x`` disappears into ``seq`` by index shift."""
    return any(part == x or _canon_union([x, part]) == part for part in _parts(seq.body))


def _canon_union(parts):
    flat = []
    for p in parts:
        flat.extend(_parts(p))
    changed = True
    while changed:
        changed = False
        seen_cantor = set()
        kept = []
        for p in flat:
            if isinstance(p, Cantor):
                if p.label in seen_cantor:
                    changed = True
                    continue
                seen_cantor.add(p.label)
            kept.append(p)
        flat = kept
        for i, x in enumerate(flat):
            if any(j != i and isinstance(s, Seq) and _absorbs(s, x)
                   for j, s in enumerate(flat)):
                del flat[i]
                changed = True
                break
    flat.sort(key=sort_key)
    if len(flat) == 1:
        return flat[0]
    return Union(tuple(flat))


def homeomorphic(e1, e2):
    """Decide homeomorphism of labeled end spaces by comparing normal forms."""
    return canonicalize(e1) == canonicalize(e2)


# ---------------------------------------------------------------------------
# counting


class CountKind(enum.Enum):
    FINITE = "finite"
    COUNTABLE = "countably-infinite"
    CONTINUUM = "continuum"


@dataclass(frozen=True)
class EndCount:
    kind: CountKind
    n: Optional[int] = None

    def __str__(self):
        return str(self.n) if self.kind is CountKind.FINITE else self.kind.value


def Finite(n):
    return EndCount(CountKind.FINITE, n)


COUNTABLE = EndCount(CountKind.COUNTABLE)
CONTINUUM = EndCount(CountKind.CONTINUUM)


def count_ends(e):
    if e is None:
        return Finite(0)
    n, has_seq, has_cantor = _count(e)
    if has_cantor:
        return CONTINUUM
    if has_seq:
        return COUNTABLE
    return Finite(n)


def _count(e):
    if isinstance(e, Pt):
        return 1, False, False
    if isinstance(e, Cantor):
        return 0, False, True
    if isinstance(e, Seq):
        _, _, c = _count(e.body)
        return 0, True, c
    total, s, c = 0, False, False
    for p in e.parts:
        n, ps, pc = _count(p)
        total, s, c = total + n, s or ps, c or pc
    return total, s, c


# ---------------------------------------------------------------------------
# addressing and the quotient


def resolve(e, path):
    """Return the node a path points at, checking that it names one end.

    Child indices descend into union parts; index 0 descends into a
    sequence body, meaning its first copy.  A path ending on a ``Pt`` names
    that end and a path ending on a ``Seq`` names its limit.
    """
    node = e
    if node is None:
        raise UnknownEnd("the end space is empty")
    for depth, i in enumerate(path):
        if isinstance(node, Cantor):
            raise Unaddressable(f"path {list(path)} enters a Cantor block; its ends have no finite name")
        if isinstance(node, Union) and 0 <= i < len(node.parts):
            node = node.parts[i]
        elif isinstance(node, Seq) and i == 0:
            node = node.body
        else:
            raise UnknownEnd(f"path {list(path)} has no child {i} at depth {depth}")
    if isinstance(node, Cantor):
        raise Unaddressable("ends inside a Cantor block have no finite name")
    if isinstance(node, Union):
        raise UnknownEnd(f"path {list(path)} names a union of several ends, not one end")
    return node


def end_label(e, path):
    node = resolve(e, path)
    return node.label if isinstance(node, Pt) else node.limit


def _expose(e, paths):
    """Unroll every sequence whose body a path enters.

    ``Seq(T, l)`` becomes ``Union(T, Seq(T, l))`` so the first copy is an
    ordinary union part; paths are rewritten to match.
    """
    if not any(p is not None and p for p in paths):
        return e, paths
    if isinstance(e, Seq) and any(p for p in paths if p is not None):
        inner = [p[1:] if p else None for p in paths]
        body, inner = _expose(e.body, inner)
        new_paths = []
        for p, q in zip(paths, inner):
            if p is None:
                new_paths.append(None)
            elif p:
                new_paths.append((0,) + q)
            else:
                new_paths.append((1,))
        return Union((body, e)), new_paths
    if isinstance(e, Union):
        parts = list(e.parts)
        new_paths = list(paths)
        for i in range(len(parts)):
            sub = [p[1:] if p and p[0] == i else None for p in paths]
            if all(s is None for s in sub):
                continue
            parts[i], sub = _expose(parts[i], sub)
            for k, s in enumerate(sub):
                if s is not None:
                    new_paths[k] = (i,) + s
        return Union(tuple(parts)), new_paths
    return e, paths


def _replace(e, path, fn):
    if not path:
        return fn(e)
    i = path[0]
    parts = list(e.parts)
    parts[i] = _replace(parts[i], path[1:], fn)
    return Union(tuple(parts))


_GONE = object()


def _sweep(e):
    if isinstance(e, Union):
        parts = [q for q in (_sweep(p) for p in e.parts) if q is not _GONE]
        if not parts:
            return _GONE
        return parts[0] if len(parts) == 1 else Union(tuple(parts))
    return e


def quotient_ends(e, a, b, merged):
    """Identify the ends at addresses ``a`` and ``b`` into one end labeled ``merged``.

    Point + point: the two points become one.  Point + sequence limit: the
    point is absorbed and the limit relabeled.  Limit + limit: the two
    sequences interleave into ``Seq(T1 + T2, merged)``.  The result is in
    normal form.
    """
    a, b = tuple(a), tuple(b)
    if a == b:
        raise SameEnd()
    resolve(e, a)
    resolve(e, b)
    e2, (a2, b2) = _expose(e, [a, b])
    node_a, node_b = resolve(e2, a2), resolve(e2, b2)
    if isinstance(node_a, Pt) and isinstance(node_b, Seq):
        a2, b2, node_a, node_b = b2, a2, node_b, node_a
    if isinstance(node_a, Pt):
        kept = Pt(merged)
    elif isinstance(node_b, Pt):
        kept = Seq(node_a.body, merged)
    else:
        kept = Seq(Union((node_a.body, node_b.body)), merged)
    out = _replace(_replace(e2, b2, lambda _: _GONE), a2, lambda _: kept)
    return canonicalize(_sweep(out))


# ---------------------------------------------------------------------------
# text and JSON forms

_TOKEN = re.compile(r"\s*(pt|cantor|seq|union|none|inf|or|non|0|[(),;])")


def format_expr(e):
    if e is None:
        return "none"
    if isinstance(e, Pt):
        return f"pt({e.label})"
    if isinstance(e, Cantor):
        return f"cantor({e.label})"
    if isinstance(e, Seq):
        return f"seq({format_expr(e.body)}; {e.limit})"
    return "union(" + ", ".join(format_expr(p) for p in e.parts) + ")"


def parse_expr(text):
    """Parse the textual form, e.g. ``union(pt(0,or), seq(pt(inf,or); inf,or))``."""
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InvalidExpression(f"unexpected input at offset {pos}: {text[pos:pos + 12]!r}")
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    stream = iter(tokens + [("<eof>", len(text))])
    cur = [next(stream)]

    def take(*expected):
        tok, at = cur[0]
        if expected and tok not in expected:
            raise InvalidExpression(f"expected {' or '.join(expected)} at offset {at}, got {tok!r}")
        cur[0] = next(stream, ("<eof>", len(text)))
        return tok

    def label():
        g = take("0", "inf")
        take(",")
        o = take("or", "non")
        return EndLabel(Genus.ZERO if g == "0" else Genus.INFINITE, o == "or")

    def expr():
        head = take("pt", "cantor", "seq", "union", "none")
        if head == "none":
            return None
        take("(")
        if head in ("pt", "cantor"):
            lab = label()
            take(")")
            return Pt(lab) if head == "pt" else Cantor(lab)
        if head == "seq":
            body = expr()
            take(";")
            lab = label()
            take(")")
            return Seq(body, lab)
        parts = [expr()]
        while cur[0][0] == ",":
            take(",")
            parts.append(expr())
        take(")")
        return Union(tuple(parts))

    out = expr()
    take("<eof>")
    return out


def label_to_json(lab):
    return {"genus": "0" if lab.genus is Genus.ZERO else "inf", "orientable": lab.orientable}


def label_from_json(obj):
    return EndLabel(Genus.ZERO if obj["genus"] == "0" else Genus.INFINITE, obj["orientable"])


def expr_to_json(e):
    if e is None:
        return None
    if isinstance(e, (Pt, Cantor)):
        return {"kind": "pt" if isinstance(e, Pt) else "cantor", "label": label_to_json(e.label)}
    if isinstance(e, Seq):
        return {"kind": "seq", "body": expr_to_json(e.body), "limit": label_to_json(e.limit)}
    return {"kind": "union", "parts": [expr_to_json(p) for p in e.parts]}


def expr_from_json(obj):
    if obj is None:
        return None
    kind = obj["kind"]
    if kind == "pt":
        return Pt(label_from_json(obj["label"]))
    if kind == "cantor":
        return Cantor(label_from_json(obj["label"]))
    if kind == "seq":
        return Seq(expr_from_json(obj["body"]), label_from_json(obj["limit"]))
    return Union(tuple(expr_from_json(p) for p in obj["parts"]))
