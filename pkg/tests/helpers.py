"""Random generators and independent oracles shared by the test modules."""

import random
from collections import Counter
from pathlib import Path

from endsum import endmodel as em
from endsum.dsl import parse_dsl
from endsum.surface import Block, BlockAutomaton, CompactPiece, Component, SurfaceDescriptor

FIXTURES = Path(__file__).parent / "fixtures"
LABELS = em.ALL_LABELS


def fixture(name):
    return parse_dsl((FIXTURES / f"{name}.surf").read_text()).surface()


def fixture_names():
    return sorted(p.stem for p in FIXTURES.glob("*.surf"))


# ---------------------------------------------------------------------------
# expressions


def _dominating(rng, labs):
    need_inf = any(l.genus is em.Genus.INFINITE for l in labs)
    need_non = any(not l.orientable for l in labs)
    ok = [l for l in LABELS
          if (l.genus is em.Genus.INFINITE or not need_inf) and (not l.orientable or not need_non)]
    return rng.choice(ok)


def random_expr(rng, depth=3):
    if depth == 0:
        kind = rng.choice(["pt", "pt", "cantor"])
    else:
        kind = rng.choice(["pt", "cantor", "seq", "seq", "union", "union"])
    if kind == "pt":
        return em.Pt(rng.choice(LABELS))
    if kind == "cantor":
        return em.Cantor(rng.choice(LABELS))
    if kind == "seq":
        body = random_expr(rng, depth - 1)
        return em.Seq(body, _dominating(rng, em.labels(body)))
    return em.Union(tuple(random_expr(rng, depth - 1) for _ in range(rng.randint(2, 3))))


def rewrite(rng, e):
    """A homeomorphic variant of ``e`` built from elementary moves."""
    if isinstance(e, em.Union):
        parts = [rewrite(rng, p) for p in e.parts]
        rng.shuffle(parts)
        if rng.random() < 0.2:
            cantors = [p for p in parts if isinstance(p, em.Cantor)]
            if cantors:
                parts.append(rng.choice(cantors))
        return em.Union(tuple(parts))
    if isinstance(e, em.Seq):
        body = rewrite(rng, e.body)
        move = rng.random()
        if move < 0.3:
            return em.Union((body, em.Seq(e.body, e.limit)))
        if move < 0.5:
            return em.Seq(em.Union((body, rewrite(rng, e.body))), e.limit)
        return em.Seq(body, e.limit)
    if isinstance(e, em.Cantor) and rng.random() < 0.3:
        return em.Union((e, e))
    if isinstance(e, em.Cantor) and rng.random() < 0.3:
        return em.Seq(e, e.label)
    return e


def _isolated(e):
    """Label counts of isolated points, capped at 3 (3 meaning 'three or more')."""
    if e is None or isinstance(e, em.Cantor):
        return Counter()
    if isinstance(e, em.Pt):
        return Counter([e.label])
    if isinstance(e, em.Seq):
        return Counter({l: 3 for l in _isolated(e.body)})
    out = Counter()
    for p in e.parts:
        out.update(_isolated(p))
    return Counter({l: min(n, 3) for l, n in out.items()})


def _derived(e):
    if e is None or isinstance(e, em.Pt):
        return None
    if isinstance(e, em.Cantor):
        return e
    if isinstance(e, em.Seq):
        inner = _derived(e.body)
        return em.Pt(e.limit) if inner is None else em.Seq(inner, e.limit)
    parts = [q for q in (_derived(p) for p in e.parts) if q is not None]
    return em.Union(tuple(parts)) if parts else None


def signature(e, rounds=5):
    """Cantor-Bendixson style invariant computed without any normal form.

    Labeled isolated-point counts of the first derived sets, then the labels
    left in the last derived set (the perfect kernel for these depths).
    """
    sig = []
    for _ in range(rounds):
        sig.append(frozenset(_isolated(e).items()))
        e = _derived(e)
    sig.append(frozenset(em.labels(e)))
    return tuple(sig)


# ---------------------------------------------------------------------------
# automata and descriptors


def random_block_params(rng, allow_nonorientable=True):
    if allow_nonorientable and rng.random() < 0.25:
        return rng.choice([1, 1, 2, 3]), False
    return rng.choice([0, 0, 0, 2]), True


def random_automaton(rng, n_max=4, allow_nonorientable=True, fanout=2):
    n = rng.randint(1, n_max)
    names = [f"n{i}" for i in range(n)]
    nodes = []
    for v in names:
        d, o = random_block_params(rng, allow_nonorientable)
        kids = tuple(rng.choice(names) for _ in range(rng.choice([0] + [1] * 3 + list(range(1, fanout + 1)))))
        nodes.append(Block(v, d, o, kids))
    return BlockAutomaton(tuple(nodes), "n0")


def finite_automaton(rng, allow_nonorientable=True):
    """An automaton with finitely many ends: a branching DAG whose leaves are caps or closed loops."""
    nodes = []

    def make(depth):
        name = f"v{len(nodes)}"
        d, o = random_block_params(rng, allow_nonorientable)
        nodes.append(None)
        idx = len(nodes) - 1
        kind = rng.choice(["loop", "loop", "cap", "branch"] if depth > 0 else ["loop", "cap"])
        if kind == "cap":
            nodes[idx] = Block(name, d, o, ())
        elif kind == "loop":
            if rng.random() < 0.5:
                nodes[idx] = Block(name, d, o, (name,))
            else:
                other = f"v{len(nodes)}"
                d2, o2 = random_block_params(rng, allow_nonorientable)
                nodes.append(Block(other, d2, o2, (name,)))
                nodes[idx] = Block(name, d, o, (other,))
        else:
            kids = tuple(make(depth - 1) for _ in range(rng.randint(1, 3)))
            nodes[idx] = Block(name, d, o, kids)
        return name

    start = make(2)
    return BlockAutomaton(tuple(nodes), start)


def linear_automaton(rng, allow_nonorientable=True):
    prefix, period = rng.randint(0, 3), rng.randint(1, 3)
    names = [f"l{i}" for i in range(prefix + period)]
    nodes = []
    for i, v in enumerate(names):
        d, o = random_block_params(rng, allow_nonorientable)
        nxt = names[i + 1] if i + 1 < len(names) else names[prefix]
        nodes.append(Block(v, d, o, (nxt,)))
    return BlockAutomaton(tuple(nodes), names[0])


def random_component(rng, name, make_anchor, n_anchors=None, allow_nonorientable=True):
    k = n_anchors if n_anchors is not None else rng.randint(1, 3)
    b = rng.randint(0, 2)
    d, o = random_block_params(rng, allow_nonorientable)
    anchors = tuple((f"a{i + 1}", make_anchor(rng)) for i in range(k))
    return Component(CompactPiece(d, o, b + k), b, anchors, name)


def random_descriptor(rng, make_anchor=random_automaton, max_components=2, allow_nonorientable=True):
    n = rng.randint(1, max_components)
    names = ["c"] + [f"c{i + 1}" for i in range(1, n)]
    return SurfaceDescriptor(tuple(
        random_component(rng, nm, make_anchor, allow_nonorientable=allow_nonorientable) for nm in names))


def point_addresses(e, prefix=()):
    """Addresses of every isolated point and every sequence limit reachable without entering a body."""
    if e is None or isinstance(e, em.Cantor):
        return []
    if isinstance(e, (em.Pt, em.Seq)):
        return [prefix]
    out = []
    for i, p in enumerate(e.parts):
        out.extend(point_addresses(p, prefix + (i,)))
    return out


# ---------------------------------------------------------------------------
# brute-force label oracle


def _reach(table, v):
    seen, todo = {v}, [v]
    while todo:
        for c in table[todo.pop()].children:
            if c not in seen:
                seen.add(c)
                todo.append(c)
    return seen


def brute_force_end_labels(a, depth=None):
    """Labels of the ends of a finite-end automaton, read off a deep level of its unfolding.

    Every live node deep enough sits on a closed loop it never leaves, so
    each one is exactly one end; its label is read from what its state reaches.
    """
    table = a.table
    if depth is None:
        depth = 2 * len(table) + 2
    live = {v for v in table if any(v in _reach(table, c) for c in _reach(table, v))}
    layer = Counter({a.start: 1})
    for _ in range(depth):
        nxt = Counter()
        for v, n in layer.items():
            for c in table[v].children:
                nxt[c] += n
        layer = nxt
    out = Counter()
    for v, n in layer.items():
        if v not in live:
            continue
        below = _reach(table, v)
        genus = em.Genus.INFINITE if any(table[w].doubled_genus > 0 for w in below) else em.Genus.ZERO
        out[em.EndLabel(genus, all(table[w].orientable for w in below))] += n
    return out


def expr_point_labels(e):
    """Label multiset of a finite end space."""
    if e is None:
        return Counter()
    if isinstance(e, em.Pt):
        return Counter([e.label])
    assert isinstance(e, em.Union), e
    out = Counter()
    for p in e.parts:
        out.update(expr_point_labels(p))
    return out


def seeded(seed):
    return random.Random(seed)
