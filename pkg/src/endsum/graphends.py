"""Ends of locally finite trees presented by finite digraphs.

A presentation is a finite digraph with ordered child lists and a root;
its unfolding is the rooted tree whose node at depth ``k`` is a walk of
length ``k`` from the root.  Balls of the unfolding form a compact
exhaustion, and an end is a nested choice of unbounded complementary
components.  A complementary component of the depth-``m`` ball hangs off
one depth-``m + 1`` node and is unbounded exactly when that node can reach
a cycle of the presentation.

This module knows nothing about genus or orientability and serves as an
independent check on the end spaces computed from surface automata.
"""

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx


@dataclass(frozen=True)
class GraphPresentation:
    children: Dict[str, Tuple[str, ...]]
    root: str

    def __post_init__(self):
        if self.root not in self.children:
            raise ValueError(f"root {self.root!r} is not a node")
        for v, cs in self.children.items():
            for c in cs:
                if c not in self.children:
                    raise ValueError(f"edge {v!r} -> {c!r} leaves the graph")

    @classmethod
    def from_edges(cls, edges, root, nodes=()):
        children = {v: [] for v in nodes}
        children.setdefault(root, [])
        for u, v in edges:
            children.setdefault(u, []).append(v)
            children.setdefault(v, [])
        return cls({k: tuple(v) for k, v in children.items()}, root)

    @classmethod
    def from_automaton(cls, a):
        return cls({b.name: tuple(b.children) for b in a.nodes}, a.start)


def _reaches(g, src):
    seen = set()
    todo = deque(g.children[src])
    while todo:
        v = todo.popleft()
        if v in seen:
            continue
        seen.add(v)
        todo.extend(g.children[v])
    return seen


def pumpable(g):
    """Nodes from which a cycle is reachable (their subtrees are infinite)."""
    reach = {v: _reaches(g, v) for v in g.children}
    on_cycle = {v for v in g.children if v in reach[v]}
    return {v for v in g.children if v in on_cycle or reach[v] & on_cycle}


def branching_in_cycle(g):
    """Whether some node reachable from the root has two child slots that both lead back to it."""
    live = _reaches(g, g.root) | {g.root}
    for v in live:
        back = [c for c in g.children[v] if c == v or v in _reaches(g, c)]
        if len(back) >= 2:
            return True
    return False


def ball(g, m):
    """The depth-``m`` ball of the unfolding, as an undirected tree.

    Nodes are tuples of child-slot indices from the root; each node carries
    its presentation state in the ``state`` attribute.
    """
    if m < 0:
        raise ValueError("radius must be non-negative")
    t = nx.Graph()
    t.add_node((), state=g.root)
    frontier = [((), g.root)]
    for _ in range(m):
        nxt = []
        for addr, v in frontier:
            for i, c in enumerate(g.children[v]):
                child = addr + (i,)
                t.add_node(child, state=c)
                t.add_edge(addr, child)
                nxt.append((child, c))
        frontier = nxt
    return t


def _layer_counts(g, depth):
    layer = {g.root: 1}
    for _ in range(depth):
        nxt = {}
        for v, n in layer.items():
            for c in g.children[v]:
                nxt[c] = nxt.get(c, 0) + n
        layer = nxt
    return layer


def complement_components(g, m):
    """Number of unbounded components of the unfolding minus the depth-``m`` ball."""
    if m < 0:
        raise ValueError("radius must be non-negative")
    live = pumpable(g)
    return sum(n for v, n in _layer_counts(g, m + 1).items() if v in live)


@dataclass(frozen=True)
class Census:
    kind: str  # "finite", "cantor-like" or "mixed"
    n: Optional[int]
    counts: Tuple[int, ...]


def end_census(g, m_max=None):
    """Classify the end count from the sequence of unbounded-component counts.

    ``finite``: no branching inside a cycle and the counts are constant from
    depth ``|nodes|`` on.  ``cantor-like``: branching inside a reachable
    cycle, with growing counts.  ``mixed``: anything else, which for these
    presentations means unbounded linear growth (a convergent sequence of ends).
    """
    if m_max is None:
        m_max = 2 * len(g.children) + 4
    if m_max < 2:
        raise ValueError("census horizon must be at least 2")
    counts = tuple(complement_components(g, m) for m in range(m_max + 1))
    settle = min(len(g.children), m_max)
    if branching_in_cycle(g) and counts[-1] > counts[settle]:
        return Census("cantor-like", None, counts)
    if not branching_in_cycle(g) and len(set(counts[settle:])) == 1:
        return Census("finite", counts[-1], counts)
    return Census("mixed", None, counts)
