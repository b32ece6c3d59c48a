"""Finite presentations of noncompact surfaces with compact boundary.

A component is a compact *core* piece plus one block automaton per anchor
circle of the core.  Each automaton unfolds into a rooted tree of compact
blocks: a block has one entry circle and one exit circle per child slot,
and every child slot is filled by a fresh copy of the named block.  A block
with no children caps its branch.  All boundary circles of the surface sit
on the core, so the boundary is compact by construction.

Genus is stored doubled (``2g`` for orientable pieces, the cross-cap count
for non-orientable ones) so half-integers stay exact.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

from .errors import (
    CircleMismatch,
    DanglingNode,
    DuplicateName,
    EmptyDescriptor,
    NegativeValue,
    NonorientableSphere,
    OddOrientableGenus,
)


def piece_chi(doubled_genus, circles):
    """Euler characteristic of a compact connected piece.

    ``2 - 2g - b`` for an orientable piece and ``2 - k - b`` for a piece with
    ``k`` cross-caps, both of which read ``2 - doubled_genus - circles``.
    """
    return 2 - doubled_genus - circles


@dataclass(frozen=True)
class CompactPiece:
    doubled_genus: int
    orientable: bool
    circles: int

    @property
    def chi(self):
        return piece_chi(self.doubled_genus, self.circles)


@dataclass(frozen=True)
class Block:
    name: str
    doubled_genus: int
    orientable: bool
    children: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    @property
    def circles(self):
        return 1 + len(self.children)

    @property
    def chi(self):
        return piece_chi(self.doubled_genus, self.circles)


@dataclass(frozen=True)
class BlockAutomaton:
    nodes: Tuple[Block, ...]
    start: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))

    @property
    def table(self) -> Dict[str, Block]:
        return {b.name: b for b in self.nodes}

    def __getitem__(self, name):
        for b in self.nodes:
            if b.name == name:
                return b
        raise KeyError(name)

    def reachable(self):
        """Node names reachable from the start, in discovery order."""
        table = self.table
        seen, order, stack = set(), [], [self.start]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            order.append(v)
            stack.extend(reversed(table[v].children))
        return order


@dataclass(frozen=True)
class Component:
    core: CompactPiece
    boundary_count: int
    anchors: Tuple[Tuple[str, BlockAutomaton], ...] = ()
    name: str = "c"

    def __post_init__(self):
        anchors = self.anchors
        if isinstance(anchors, dict):
            anchors = anchors.items()
        object.__setattr__(self, "anchors", tuple((str(k), v) for k, v in anchors))

    @property
    def anchor_names(self):
        return [k for k, _ in self.anchors]

    def anchor(self, name):
        for k, a in self.anchors:
            if k == name:
                return a
        raise KeyError(name)


@dataclass(frozen=True)
class SurfaceDescriptor:
    components: Tuple[Component, ...]
    name: str = "M"

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def component(self, name):
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def boundary_count(self):
        return sum(c.boundary_count for c in self.components)


@dataclass(frozen=True)
class CompactInvariant:
    """``(pi0, b, chi)`` of a compact surface; the genus is derived."""

    pi0: int
    b: int
    chi: int

    @property
    def doubled_genus(self):
        return 2 * self.pi0 - self.b - self.chi

    @property
    def genus(self):
        return self.doubled_genus / 2

    def __add__(self, other):
        return CompactInvariant(self.pi0 + other.pi0, self.b + other.b, self.chi + other.chi)


# ---------------------------------------------------------------------------
# validation


def _check_piece(where, d, orientable):
    if d < 0:
        raise NegativeValue(f"{where}: doubled genus {d} is negative")
    if orientable and d % 2:
        raise OddOrientableGenus(f"{where}: orientable piece with odd doubled genus {d}")
    if not orientable and d == 0:
        raise NonorientableSphere(f"{where}: a non-orientable piece needs at least one cross-cap")


def validate_automaton(a, where="automaton"):
    names = [b.name for b in a.nodes]
    if len(set(names)) != len(names):
        raise DuplicateName(f"{where}: repeated node name")
    if a.start not in names:
        raise DanglingNode(f"{where}: start node {a.start!r} does not exist")
    for b in a.nodes:
        _check_piece(f"{where}, node {b.name!r}", b.doubled_genus, b.orientable)
        for c in b.children:
            if c not in names:
                raise DanglingNode(f"{where}, node {b.name!r}: child {c!r} does not exist")
    return a


def validate_descriptor(d):
    """Check every structural invariant, raising one named error per violation."""
    if not d.components:
        raise EmptyDescriptor("a descriptor needs at least one component")
    cnames = [c.name for c in d.components]
    if len(set(cnames)) != len(cnames):
        raise DuplicateName(f"repeated component name in {cnames}")
    for c in d.components:
        where = f"component {c.name!r}"
        _check_piece(f"{where}, core", c.core.doubled_genus, c.core.orientable)
        if c.boundary_count < 0 or c.core.circles < 0:
            raise NegativeValue(f"{where}: negative circle count")
        if len(set(c.anchor_names)) != len(c.anchors):
            raise DuplicateName(f"{where}: repeated anchor name")
        if c.core.circles != c.boundary_count + len(c.anchors):
            raise CircleMismatch(
                f"{where}: core has {c.core.circles} circles but "
                f"{c.boundary_count} boundary + {len(c.anchors)} anchors")
        for name, a in c.anchors:
            validate_automaton(a, f"{where}, anchor {name!r}")
    return d


# ---------------------------------------------------------------------------
# compact exhaustion


def depth_counts(a, m):
    """Occurrence counts per node at depths ``1..m`` of the unfolding.

    Returns a list whose entry ``k - 1`` maps node name to the number of
    copies of that node at depth ``k``; the start block sits at depth 1.
    """
    table = a.table
    layer = {a.start: 1}
    out = []
    for _ in range(m):
        out.append(layer)
        nxt = {}
        for v, n in layer.items():
            for c in table[v].children:
                nxt[c] = nxt.get(c, 0) + n
        layer = nxt
    return out


@dataclass(frozen=True)
class AnchorStage:
    """Contribution of one anchor's blocks to a stage ``K_m``."""

    chi: int
    frontier: int
    doubled_genus: int
    orientable: bool


def anchor_stage(a, m):
    if m == 0:
        return AnchorStage(0, 1, 0, True)
    table = a.table
    layers = depth_counts(a, m)
    chi = sum(n * table[v].chi for layer in layers for v, n in layer.items())
    dg = sum(n * table[v].doubled_genus for layer in layers for v, n in layer.items())
    ori = all(table[v].orientable for layer in layers for v in layer)
    frontier = sum(n * len(table[v].children) for v, n in layers[-1].items())
    return AnchorStage(chi, frontier, dg, ori)


def component_stage(c, m):
    """``(pi0, b, chi)`` of the stage ``K_m`` of one component."""
    chi = c.core.chi
    b = c.boundary_count
    for _, a in c.anchors:
        st = anchor_stage(a, m)
        chi += st.chi
        b += st.frontier
    return CompactInvariant(1, b, chi)


def exhaustion_invariants(d, m):
    """Per-component invariants of ``K_m``: the core plus every block of depth at most ``m``."""
    if m < 0:
        raise ValueError("stage index must be non-negative")
    return [component_stage(c, m) for c in d.components]


def total_stage(d, m):
    out = CompactInvariant(0, 0, 0)
    for inv in exhaustion_invariants(d, m):
        out = out + inv
    return out
