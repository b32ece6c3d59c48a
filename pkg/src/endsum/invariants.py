"""Classification invariants of presented surfaces.

For every component we compute the tuple that determines a connected
surface with compact boundary up to homeomorphism: orientability, genus
(possibly infinite), parity when the surface is orientable outside a
compact set, the number of boundary circles, and the labeled end space.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple

import networkx as nx

from . import endmodel as em
from .errors import NegativeGenus, Unsupported
from .surface import validate_descriptor


def genus_compact(pi0, b, chi):
    """Doubled genus ``2*pi0 - b - chi`` of a compact surface."""
    doubled = 2 * pi0 - b - chi
    if doubled < 0:
        raise NegativeGenus(f"(pi0={pi0}, b={b}, chi={chi}) gives negative genus; not a surface")
    return doubled


@dataclass(frozen=True)
class GenusValue:
    """Doubled genus, or ``None`` for infinite genus."""

    doubled: Optional[int]

    @property
    def finite(self):
        return self.doubled is not None

    def __add__(self, other):
        if not (self.finite and other.finite):
            return INFINITE_GENUS
        return GenusValue(self.doubled + other.doubled)

    def __str__(self):
        if not self.finite:
            return "infinite"
        return str(self.doubled // 2) if self.doubled % 2 == 0 else f"{self.doubled}/2"


INFINITE_GENUS = GenusValue(None)


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1

    def __str__(self):
        return self.name.lower()


@dataclass(frozen=True)
class Occurrence:
    """How often a block appears in an unfolding; ``count is None`` means infinitely often."""

    count: Optional[int]

    @property
    def infinite(self):
        return self.count is None


# ---------------------------------------------------------------------------
# automaton analysis


def _graph(a):
    g = nx.DiGraph()
    table = a.table
    reach = a.reachable()
    g.add_nodes_from(reach)
    for v in reach:
        for c in table[v].children:
            g.add_edge(v, c)
    return g


def _cyclic_nodes(g):
    out = set()
    for scc in nx.strongly_connected_components(g):
        if len(scc) > 1 or any(g.has_edge(v, v) for v in scc):
            out |= scc
    return out


def occurrence_counts(a):
    """Occurrence of every reachable node of the unfolding."""
    g = _graph(a)
    table = a.table
    pumped = set()
    for v in _cyclic_nodes(g):
        pumped.add(v)
        pumped |= nx.descendants(g, v)
    counts = {v: 0 for v in g if v not in pumped}
    if a.start not in pumped:
        counts[a.start] = 1
    finite = g.subgraph(counts)
    for v in nx.topological_sort(finite):
        for c in table[v].children:
            if c in counts:
                counts[c] += counts[v]
    out = {v: Occurrence(None) for v in pumped}
    out.update({v: Occurrence(n) for v, n in counts.items()})
    return out


def occurrence_class(a, node):
    """Finite count of ``node`` in the unfolding, or infinite if a cycle pumps it."""
    if node not in a.table:
        raise KeyError(node)
    return occurrence_counts(a).get(node, Occurrence(0))


def _scc_label(g, table, scc):
    below = set(scc)
    for v in scc:
        below |= nx.descendants(g, v)
    genus = em.Genus.INFINITE if any(table[v].doubled_genus > 0 for v in below) else em.Genus.ZERO
    return em.EndLabel(genus, all(table[v].orientable for v in below))


def ends_of_automaton(a):
    """Labeled end space of the unfolding of ``a`` (``None`` if every branch is capped).

    An end is an infinite path of the unfolding; it eventually stays in one
    cyclic strongly connected component, and its label comes from what is
    reachable from that component.  A component that is a simple cycle
    yields one end per entry, approached by the side emissions of each lap
    (a point, or a convergent sequence).  A component in which some node
    has two slots back into it yields a Cantor set; this is closed-form only
    when the side emissions add no ends of a different kind, otherwise
    ``Unsupported`` is raised.
    """
    g = _graph(a)
    table = a.table
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    value = {}
    for s in reversed(list(nx.topological_sort(cond))):
        scc = cond.nodes[s]["members"]
        if len(scc) == 1 and not any(g.has_edge(v, v) for v in scc):
            (v,) = scc
            parts = [value[members[c]] for c in table[v].children]
            parts = [p for p in parts if p is not None]
            value[s] = None if not parts else parts[0] if len(parts) == 1 else em.Union(tuple(parts))
            continue
        label = _scc_label(g, table, scc)
        inner = {v: sum(1 for c in table[v].children if c in scc) for v in scc}
        side = [value[members[c]] for v in sorted(scc) for c in table[v].children if c not in scc]
        side = [p for p in side if p is not None]
        body = em.canonicalize(em.Union(tuple(side))) if side else None
        if max(inner.values()) > 1:
            if body is None or body == em.Cantor(label):
                value[s] = em.Cantor(label)
            else:
                raise Unsupported(
                    f"branching cycle through {sorted(scc)} emits ends "
                    f"{em.format_expr(body)} that accumulate on its Cantor set")
        else:
            value[s] = em.Pt(label) if body is None else em.Seq(body, label)
    return em.canonicalize(value[members[a.start]])


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ClassInvariant:
    orientable: bool
    genus: GenusValue
    parity: Optional[Parity]
    boundary_count: int
    ends: Optional[em.Expr]
    connected: bool = True
    name: str = field(default="c", compare=False)
    anchor_ends: Tuple[Tuple[str, Optional[em.Expr]], ...] = field(default=(), compare=False)

    def __post_init__(self):
        labels = em.labels(self.ends)
        nonorientable_end = any(not lab.orientable for lab in labels)
        infinite_end = any(lab.genus is em.Genus.INFINITE for lab in labels)
        if (self.parity is None) != nonorientable_end:
            raise ValueError("parity is defined exactly when every end is orientable")
        if self.genus.finite:
            if infinite_end:
                raise ValueError("finite genus but an infinite-genus end")
            if self.parity is not None and self.parity.value != self.genus.doubled % 2:
                raise ValueError("parity disagrees with the doubled genus")
            if self.orientable and self.genus.doubled % 2:
                raise ValueError("orientable surface with half-integer genus")
        if self.orientable and (nonorientable_end or self.parity is Parity.ODD):
            raise ValueError("orientable surface with non-orientable data")

    def key(self):
        """Hashable tuple of the classifying fields."""
        return (self.orientable, self.genus.doubled if self.genus.finite else -1,
                -1 if self.parity is None else self.parity.value,
                self.boundary_count, em.sort_key(self.ends) if self.ends is not None else ())

    def anchor_expr(self, anchor):
        for k, e in self.anchor_ends:
            if k == anchor:
                return e
        raise KeyError(anchor)


def classify_component(c):
    core = c.core
    orientable = core.orientable
    infinite_genus = False
    total = core.doubled_genus
    parity_defined = True
    anchor_ends = []
    for name, a in c.anchors:
        occ = occurrence_counts(a)
        table = a.table
        for v, o in occ.items():
            b = table[v]
            orientable = orientable and b.orientable
            if o.infinite:
                if b.doubled_genus > 0:
                    infinite_genus = True
                if not b.orientable:
                    parity_defined = False
            else:
                total += o.count * b.doubled_genus
        anchor_ends.append((name, ends_of_automaton(a)))
    parts = [e for _, e in anchor_ends if e is not None]
    ends = em.canonicalize(em.Union(tuple(parts))) if parts else None
    return ClassInvariant(
        orientable=orientable,
        genus=INFINITE_GENUS if infinite_genus else GenusValue(total),
        parity=Parity(total % 2) if parity_defined else None,
        boundary_count=c.boundary_count,
        ends=ends,
        name=c.name,
        anchor_ends=tuple(anchor_ends),
    )


def classify(d):
    """Classification tuple of every component of ``d``."""
    validate_descriptor(d)
    return [classify_component(c) for c in d.components]


def invariant_to_json(inv):
    genus = {"finite": True, "doubled": inv.genus.doubled} if inv.genus.finite else {"infinite": True}
    return {
        "orientable": inv.orientable,
        "genus": genus,
        "parity": None if inv.parity is None else inv.parity.name.lower(),
        "boundary": inv.boundary_count,
        "ends": em.expr_to_json(inv.ends),
        "connected": inv.connected,
    }


def describe(inv):
    """One-line human summary of a component invariant."""
    par = "undefined" if inv.parity is None else inv.parity.name.lower()
    return (f"{'orientable' if inv.orientable else 'non-orientable'}, genus {inv.genus}, "
            f"parity {par}, boundary {inv.boundary_count}, "
            f"ends {em.format_expr(inv.ends)} [{em.count_ends(inv.ends)}]")
