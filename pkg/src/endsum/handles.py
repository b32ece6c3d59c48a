"""Attaching a 1-handle at infinity to two distinct ends.

Three independent routes to the resulting surface ``N``:

* ``predict_handle_invariants`` transports the classification tuple of ``M``
  through closed-form rules (genus, parity, orientability, boundary, and the
  quotient of the end space identifying the two ends);
* ``attach_handle_combinatorial`` builds a descriptor of ``N`` directly when
  both ends are presented by chains, by gluing a strip between the two
  chains stage by stage;
* ``exhaustion_oracle`` applies the strip's bookkeeping to a compact
  exhaustion of ``M`` (one boundary circle and one unit of Euler
  characteristic lost per stage, and one component fewer for an end sum).

``isomorphic`` decides homeomorphism of presented surfaces from their
classification tuples.
"""

import random
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

from . import endmodel as em
from .errors import NonlinearEnd, SameEnd, UnknownEnd
from .invariants import (
    GenusValue,
    INFINITE_GENUS,
    ClassInvariant,
    Parity,
    classify,
)
from .surface import (
    Block,
    BlockAutomaton,
    CompactInvariant,
    CompactPiece,
    Component,
    SurfaceDescriptor,
    component_stage,
    validate_descriptor,
)


@dataclass(frozen=True)
class EndRef:
    """An end of a presented surface: component, anchor, and address inside the anchor's end space."""

    component: str
    anchor: str
    path: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))

    def __str__(self):
        tail = "".join(f"/{i}" for i in self.path)
        return f"{self.component}.{self.anchor}{tail}"

    @classmethod
    def parse(cls, text):
        """Parse ``C.A`` or ``C.A/i/j``."""
        head, *rest = text.split("/")
        if "." not in head:
            raise UnknownEnd(f"end reference {text!r} must look like COMPONENT.ANCHOR[/i/j...]")
        comp, anchor = head.split(".", 1)
        try:
            path = tuple(int(x) for x in rest)
        except ValueError:
            raise UnknownEnd(f"bad path in end reference {text!r}") from None
        return cls(comp, anchor, path)


@dataclass(frozen=True)
class HandleSpec:
    end_a: EndRef
    end_b: EndRef
    oriented: bool = True

    @property
    def same_component(self):
        return self.end_a.component == self.end_b.component


@dataclass(frozen=True)
class ExhaustionStep:
    """Footprint of the strip ``R_m`` on a compact exhaustion stage."""

    chi_strip: int = 1
    chi_overlap: int = 2
    b_delta: int = -1
    chi_delta: int = -1


STEP = ExhaustionStep()


def _check_distinct(h):
    if h.end_a == h.end_b:
        raise SameEnd()


def _anchor_names(h, a_names, b_names):
    """Names for the anchors of the merged component; collisions get a component prefix."""
    ca, cb = h.end_a.component, h.end_b.component
    if ca == cb:
        rename = {(ca, n): n for n in a_names}
    else:
        clash = set(a_names) & set(b_names)
        rename = {(ca, n): (f"{ca}.{n}" if n in clash else n) for n in a_names}
        rename.update({(cb, n): (f"{cb}.{n}" if n in clash else n) for n in b_names})
    ea, eb = rename[(ca, h.end_a.anchor)], rename[(cb, h.end_b.anchor)]
    merged = ea if ea == eb else f"{ea}+{eb}"
    return rename, merged


def merged_component_name(h):
    ca, cb = h.end_a.component, h.end_b.component
    return ca if ca == cb else f"{ca}+{cb}"


# ---------------------------------------------------------------------------
# closed-form prediction


def _lookup(invs, ref):
    for inv in invs:
        if inv.name == ref.component:
            try:
                expr = inv.anchor_expr(ref.anchor)
            except KeyError:
                raise UnknownEnd(f"component {ref.component!r} has no anchor {ref.anchor!r}") from None
            em.resolve(expr, ref.path)
            return inv, expr
    raise UnknownEnd(f"no component named {ref.component!r}")


def predict_handle_invariants(invs, h):
    """Classification of ``N`` from the classification of ``M`` alone."""
    _check_distinct(h)
    ia, ea = _lookup(invs, h.end_a)
    ib, eb = _lookup(invs, h.end_b)
    merged_label = em.merge_label(em.end_label(ea, h.end_a.path), em.end_label(eb, h.end_b.path))
    same = ia is ib
    comps = [ia] if same else [ia, ib]
    rename, merged_name = _anchor_names(h, [k for k, _ in ia.anchor_ends], [k for k, _ in ib.anchor_ends])

    parts, where = [], {}
    for inv in comps:
        for k, e in inv.anchor_ends:
            if e is not None:
                where[(inv.name, k)] = len(parts)
                parts.append(e)
    pa = (where[(ia.name, h.end_a.anchor)],) + h.end_a.path
    pb = (where[(ib.name, h.end_b.anchor)],) + h.end_b.path
    ends = em.quotient_ends(em.Union(tuple(parts)), pa, pb, merged_label)

    if h.end_a.anchor == h.end_b.anchor and same:
        local = em.quotient_ends(em.Union((ea,)), (0,) + h.end_a.path, (0,) + h.end_b.path, merged_label)
    else:
        local = em.quotient_ends(em.Union((ea, eb)), (0,) + h.end_a.path, (1,) + h.end_b.path,
                                 merged_label)
    anchor_ends = []
    for inv in comps:
        for k, e in inv.anchor_ends:
            if (inv.name, k) in ((ia.name, h.end_a.anchor), (ib.name, h.end_b.anchor)):
                if not any(n == merged_name for n, _ in anchor_ends):
                    anchor_ends.append((merged_name, local))
            else:
                anchor_ends.append((rename[(inv.name, k)], e))

    if same:
        out = ClassInvariant(
            orientable=ia.orientable and h.oriented,
            genus=ia.genus + GenusValue(2),
            parity=ia.parity,
            boundary_count=ia.boundary_count,
            ends=ends,
            name=ia.name,
            anchor_ends=tuple(anchor_ends),
        )
    else:
        both = ia.parity is not None and ib.parity is not None
        out = ClassInvariant(
            orientable=ia.orientable and ib.orientable,
            genus=ia.genus + ib.genus,
            parity=Parity((ia.parity.value + ib.parity.value) % 2) if both else None,
            boundary_count=ia.boundary_count + ib.boundary_count,
            ends=ends,
            name=merged_component_name(h),
            anchor_ends=tuple(anchor_ends),
        )
    result = []
    for inv in invs:
        if inv is ia:
            result.append(out)
        elif inv is not ib:
            result.append(inv)
    return result


# ---------------------------------------------------------------------------
# combinatorial construction


def chain_of(a):
    """Node sequence of a chain automaton and the index its last node loops back to.

    Raises ``NonlinearEnd`` if some reachable block has two children and
    ``UnknownEnd`` if the chain is capped (no end).
    """
    table = a.table
    seq, index = [], {}
    v = a.start
    while v not in index:
        index[v] = len(seq)
        seq.append(v)
        kids = table[v].children
        if len(kids) > 1:
            raise NonlinearEnd(f"block {v!r} branches; the chain construction needs a linear end")
        if not kids:
            raise UnknownEnd("the chain is capped and has no end")
        v = kids[0]
    return seq, index[v]


def _product_chain(a, b):
    """Synchronized product of two chains: the band between consecutive stages."""
    seq_a, loop_a = chain_of(a)
    seq_b, loop_b = chain_of(b)
    ta, tb = a.table, b.table
    step_a = lambda i: i + 1 if i + 1 < len(seq_a) else loop_a
    step_b = lambda j: j + 1 if j + 1 < len(seq_b) else loop_b
    pairs, seen = [], {}
    pos = (0, 0)
    while pos not in seen:
        seen[pos] = len(pairs)
        pairs.append(pos)
        pos = (step_a(pos[0]), step_b(pos[1]))
    nodes = []
    for k, (i, j) in enumerate(pairs):
        x, y = ta[seq_a[i]], tb[seq_b[j]]
        nxt = k + 1 if k + 1 < len(pairs) else seen[pos]
        nodes.append(Block(f"m{k}", x.doubled_genus + y.doubled_genus,
                           x.orientable and y.orientable, (f"m{nxt}",)))
    return BlockAutomaton(tuple(nodes), "m0")


def _component_orientable(c):
    if not c.core.orientable:
        return False
    for _, a in c.anchors:
        table = a.table
        if not all(table[v].orientable for v in a.reachable()):
            return False
    return True


def attach_handle_combinatorial(d, h):
    """Descriptor of ``N`` built by gluing a strip between two chain ends.

    The strip together with the cores forms the new core (one boundary
    circle fewer, Euler characteristic one lower); beyond the core, the two
    chains and the strip's pieces between consecutive stages form a single
    merged chain whose blocks carry the summed genus.
    """
    validate_descriptor(d)
    _check_distinct(h)
    try:
        ca, cb = d.component(h.end_a.component), d.component(h.end_b.component)
        aa, ab = ca.anchor(h.end_a.anchor), cb.anchor(h.end_b.anchor)
    except KeyError as exc:
        raise UnknownEnd(f"unknown component or anchor {exc}") from None
    if h.end_a.anchor == h.end_b.anchor and ca is cb:
        raise NonlinearEnd("two ends of one anchor: that anchor is not a chain")
    chain_of(aa)
    chain_of(ab)
    for ref in (h.end_a, h.end_b):
        if ref.path:
            raise UnknownEnd(f"a chain has a single end; path {list(ref.path)} does not apply")

    same = ca is cb
    rename, merged_name = _anchor_names(h, ca.anchor_names, cb.anchor_names)
    anchors = []
    for c in ([ca] if same else [ca, cb]):
        for k, a in c.anchors:
            if (c.name, k) in ((ca.name, h.end_a.anchor), (cb.name, h.end_b.anchor)):
                if not any(n == merged_name for n, _ in anchors):
                    anchors.append((merged_name, _product_chain(aa, ab)))
            else:
                anchors.append((rename[(c.name, k)], a))
    if same:
        core = CompactPiece(
            ca.core.doubled_genus + 2,
            _component_orientable(ca) and h.oriented,
            ca.core.circles - 1,
        )
        boundary = ca.boundary_count
    else:
        core = CompactPiece(
            ca.core.doubled_genus + cb.core.doubled_genus,
            ca.core.orientable and cb.core.orientable,
            ca.core.circles + cb.core.circles - 1,
        )
        boundary = ca.boundary_count + cb.boundary_count
    merged = Component(core, boundary, tuple(anchors), merged_component_name(h))
    comps = []
    for c in d.components:
        if c is ca:
            comps.append(merged)
        elif c is not cb:
            comps.append(c)
    return validate_descriptor(SurfaceDescriptor(tuple(comps), d.name))


# ---------------------------------------------------------------------------
# exhaustion ledger


@dataclass(frozen=True)
class OracleRun:
    start: int
    stages: Tuple[Tuple[int, CompactInvariant], ...]
    window: int

    def genus(self):
        """Stabilized doubled genus of ``L_m``, or infinite if it keeps growing."""
        tail = [inv.doubled_genus for _, inv in self.stages[-self.window:]]
        return GenusValue(tail[-1]) if len(set(tail)) == 1 else INFINITE_GENUS

    def parity(self):
        """Stabilized ``2g(L_m) mod 2``; ``None`` if it does not settle."""
        tail = {inv.doubled_genus % 2 for _, inv in self.stages[-self.window:]}
        return Parity(tail.pop()) if len(tail) == 1 else None


def _anchor_size(c):
    return max([len(a.reachable()) for _, a in c.anchors] or [1])


def exhaustion_oracle(d, h, m_max=None):
    """``(pi0, b, chi)`` of the stages ``L_m = K_m + R_m`` of ``N``.

    Stages before the two ends occupy distinct frontier circles are
    skipped.  Ends on different anchors are separated from the start; for
    two ends of one anchor a conservative separation depth is used.
    """
    validate_descriptor(d)
    _check_distinct(h)
    try:
        ca, cb = d.component(h.end_a.component), d.component(h.end_b.component)
        ca.anchor(h.end_a.anchor)
        cb.anchor(h.end_b.anchor)
    except KeyError as exc:
        raise UnknownEnd(f"unknown component or anchor {exc}") from None
    same = ca is cb
    size = max(_anchor_size(ca), _anchor_size(cb))
    start = 0
    if same and h.end_a.anchor == h.end_b.anchor:
        start = size * (len(h.end_a.path) + len(h.end_b.path) + 2)
    window = 2 * size + 1
    if m_max is None:
        m_max = max(20, start + 3 * size + 2)
    stages = []
    for m in range(start, m_max + 1):
        k = component_stage(ca, m)
        if not same:
            k = k + component_stage(cb, m)
        stages.append((m, CompactInvariant(k.pi0 - (0 if same else 1),
                                           k.b + STEP.b_delta, k.chi + STEP.chi_delta)))
    return OracleRun(start, tuple(stages), min(window, len(stages)))


# ---------------------------------------------------------------------------
# isomorphism


FIELDS = ("orientable", "genus", "parity", "boundary_count", "ends")


@dataclass(frozen=True)
class IsoResult:
    isomorphic: bool
    pairs: Tuple[Tuple[str, str], ...] = ()
    reason: Optional[str] = None
    field: Optional[str] = None

    def __bool__(self):
        return self.isomorphic


def _first_difference(x, y):
    for f in FIELDS:
        u, v = getattr(x, f), getattr(y, f)
        if f == "ends":
            if not em.homeomorphic(u, v):
                return f, f"end spaces {em.format_expr(u)} vs {em.format_expr(v)}"
        elif u != v:
            return f, f"{f}: {u} vs {v}"
    return None, None


def isomorphic_invariants(inv1, inv2):
    if len(inv1) != len(inv2):
        return IsoResult(False, reason=f"component count {len(inv1)} vs {len(inv2)}",
                         field="components")
    s1 = sorted(inv1, key=ClassInvariant.key)
    s2 = sorted(inv2, key=ClassInvariant.key)
    pairs = []
    for x, y in zip(s1, s2):
        f, why = _first_difference(x, y)
        if f is not None:
            return IsoResult(False, reason=f"{x.name} vs {y.name}: {why}", field=f)
        pairs.append((x.name, y.name))
    return IsoResult(True, tuple(pairs))


def isomorphic(d1, d2):
    """Homeomorphism of presented surfaces, with matched components or the first difference."""
    return isomorphic_invariants(classify(d1), classify(d2))


# ---------------------------------------------------------------------------
# presentation changes


def _map_anchor(d, comp, anchor, fn):
    comps = []
    for c in d.components:
        if c.name == comp:
            c = replace(c, anchors=tuple((k, fn(a) if k == anchor else a) for k, a in c.anchors))
        comps.append(c)
    return SurfaceDescriptor(tuple(comps), d.name)


def _prune(a):
    keep = set(a.reachable())
    return BlockAutomaton(tuple(b for b in a.nodes if b.name in keep), a.start)


def _fresh(a, base):
    names = {b.name for b in a.nodes}
    k = 0
    while f"{base}'{k}" in names:
        k += 1
    return f"{base}'{k}"


@dataclass(frozen=True)
class Rotate:
    """Unroll ``k`` blocks along first child slots, shifting where the loop begins."""

    component: str
    anchor: str
    k: int = 1

    def __call__(self, d):
        return _map_anchor(d, self.component, self.anchor, self._rotate)

    def _rotate(self, a):
        path = []
        v = a.start
        table = a.table
        for _ in range(self.k):
            path.append(v)
            kids = table[v].children
            if not kids:
                break
            v = kids[0]
        nodes = list(a.nodes)
        names = {b.name for b in nodes}
        copies = []
        for v in path:
            n, i = f"{v}~", 0
            while f"{n}{i}" in names:
                i += 1
            names.add(f"{n}{i}")
            copies.append(f"{n}{i}")
        for idx, v in enumerate(path):
            b = table[v]
            kids = list(b.children)
            if idx + 1 < len(path):
                kids[0] = copies[idx + 1]
            nodes.append(Block(copies[idx], b.doubled_genus, b.orientable, tuple(kids)))
        return _prune(BlockAutomaton(tuple(nodes), copies[0] if copies else a.start))

    def __str__(self):
        return f"rotate {self.component}.{self.anchor} by {self.k}"


@dataclass(frozen=True)
class Subdivide:
    """Split one block into two glued along a circle, partitioning its genus."""

    component: str
    anchor: str
    node: str
    first_doubled: int = 0

    def __call__(self, d):
        return _map_anchor(d, self.component, self.anchor, self._split)

    def _split(self, a):
        b = a[self.node]
        d1 = self.first_doubled
        d2 = b.doubled_genus - d1
        if b.orientable:
            o1 = o2 = True
        else:
            d1 = max(d1, 1)
            d2 = b.doubled_genus - d1
            o1, o2 = False, d2 % 2 == 0
        if d2 < 0 or (o1 and d1 % 2):
            raise ValueError(f"cannot split doubled genus {b.doubled_genus} as {d1} + {d2}")
        second = _fresh(a, b.name)
        nodes = []
        for x in a.nodes:
            if x.name == b.name:
                nodes.append(Block(b.name, d1, o1, (second,)))
                nodes.append(Block(second, d2, o2, b.children))
            else:
                nodes.append(x)
        return BlockAutomaton(tuple(nodes), a.start)

    def __str__(self):
        return f"subdivide {self.component}.{self.anchor}:{self.node} at {self.first_doubled}"


@dataclass(frozen=True)
class Offset:
    """Move the first block of an anchor into the core (a shifted exhaustion)."""

    component: str
    anchor: str

    def __call__(self, d):
        comps = []
        for c in d.components:
            if c.name == self.component:
                a = c.anchor(self.anchor)
                first = a[a.start]
                if len(first.children) != 1:
                    raise ValueError("offset needs a start block with exactly one child")
                core = CompactPiece(c.core.doubled_genus + first.doubled_genus,
                                    c.core.orientable and first.orientable, c.core.circles)
                moved = _prune(BlockAutomaton(a.nodes, first.children[0]))
                c = replace(c, core=core, anchors=tuple(
                    (k, moved if k == self.anchor else x) for k, x in c.anchors))
            comps.append(c)
        return SurfaceDescriptor(tuple(comps), d.name)

    def __str__(self):
        return f"offset {self.component}.{self.anchor}"


def standard_transforms(d):
    """One rotation, subdivision and offset per anchor where applicable."""
    out = []
    for c in d.components:
        for k, a in c.anchors:
            out.append(Rotate(c.name, k, 1))
            first = a[a.start]
            out.append(Subdivide(c.name, k, a.start, 0 if first.orientable else 1))
            if len(first.children) == 1:
                out.append(Offset(c.name, k))
    return out


def random_transforms(d, rng, count=3):
    pool = []
    for c in d.components:
        for k, a in c.anchors:
            reach = a.reachable()
            pool.append(lambda c=c, k=k: Rotate(c.name, k, rng.randint(1, 4)))

            def sub(c=c, k=k, a=a, reach=reach):
                v = a[rng.choice(reach)]
                if v.orientable:
                    d1 = 2 * rng.randint(0, v.doubled_genus // 2)
                else:
                    d1 = rng.randint(1, v.doubled_genus)
                return Subdivide(c.name, k, v.name, d1)

            pool.append(sub)
            if len(a[a.start].children) == 1:
                pool.append(lambda c=c, k=k: Offset(c.name, k))
    return [rng.choice(pool)() for _ in range(count)] if pool else []


# ---------------------------------------------------------------------------
# verification


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    checks: List[Check] = field(default_factory=list)
    orientation_matters: Optional[bool] = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def lines(self):
        return [f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else "")
                for c in self.checks]


def _same_prediction(p, q):
    return len(p) == len(q) and all(x == y for x, y in zip(
        sorted(p, key=ClassInvariant.key), sorted(q, key=ClassInvariant.key)))


def _linear(d, h):
    try:
        for ref in (h.end_a, h.end_b):
            chain_of(d.component(ref.component).anchor(ref.anchor))
    except (NonlinearEnd, UnknownEnd, KeyError):
        return False
    return not (h.same_component and h.end_a.anchor == h.end_b.anchor)


def check_oracles(d, h, report, tag=""):
    """Compare the prediction with the construction (if any) and the exhaustion ledger."""
    predicted = predict_handle_invariants(classify(d), h)
    if _linear(d, h):
        built = classify(attach_handle_combinatorial(d, h))
        report.add(f"{tag}construction matches prediction",
                   isomorphic_invariants(built, predicted).isomorphic and _same_prediction(built, predicted))
    run = exhaustion_oracle(d, h)
    target = next(p for p in predicted if p.name == merged_component_name(h))
    report.add(f"{tag}exhaustion genus limit", run.genus() == target.genus,
               f"ledger {run.genus()}, predicted {target.genus}")
    if target.parity is not None:
        report.add(f"{tag}exhaustion parity limit", run.parity() == target.parity,
                   f"ledger {run.parity()}, predicted {target.parity}")
    return predicted


def verify_presentation_invariance(d, h, transforms=None):
    """Attach the same handle to re-presented copies of ``M`` and compare the results."""
    if transforms is None:
        transforms = standard_transforms(d)
    report = Report()
    base = check_oracles(d, h, report)
    linear = _linear(d, h)
    built = attach_handle_combinatorial(d, h) if linear else None
    for t in transforms:
        try:
            d2 = t(d)
        except ValueError as exc:
            report.add(f"{t}: skipped", True, str(exc))
            continue
        pred2 = check_oracles(d2, h, report, tag=f"{t}: ")
        report.add(f"{t}: prediction unchanged", _same_prediction(base, pred2))
        if linear:
            res = isomorphic(built, attach_handle_combinatorial(d2, h))
            report.add(f"{t}: constructions isomorphic", res.isomorphic, res.reason or "")

    flipped = replace(h, oriented=not h.oriented)
    irrelevant = (not h.same_component) or not classify(d)[
        [c.name for c in d.components].index(h.end_a.component)].orientable
    if linear:
        res = isomorphic(built, attach_handle_combinatorial(d, flipped))
        same = res.isomorphic
    else:
        same = _same_prediction(base, predict_handle_invariants(classify(d), flipped))
    report.orientation_matters = not same
    report.add("handle orientation matters exactly when both ends lie in one orientable component",
               same == irrelevant,
               f"{'isomorphic' if same else 'NOT isomorphic'} after flipping the handle")
    return report


class _Fixed:
    """A precomputed re-presentation, named after the moves that produced it."""

    def __init__(self, result, label):
        self.result, self.label = result, label

    def __call__(self, _):
        return self.result

    def __str__(self):
        return self.label


def verify_random(d, h, trials=10, seed=0):
    """Presentation-invariance checks under random compositions of transforms."""
    rng = random.Random(seed)
    report = Report()
    for trial in range(trials):
        x, moves = d, []
        for _ in range(rng.randint(1, 3)):
            (t,) = random_transforms(x, rng, 1)
            try:
                x = t(x)
            except ValueError:
                continue
            moves.append(str(t))
        label = f"trial {trial} [" + "; ".join(moves) + "]"
        sub = verify_presentation_invariance(d, h, [_Fixed(x, label)])
        report.checks.extend(sub.checks)
        report.orientation_matters = sub.orientation_matters
    return report
