"""Acceptance criteria, one test and one printed PASS/FAIL line each."""

import itertools
import random
import time

import pytest

from endsum import endmodel as em
from endsum.errors import InvalidLabel, NonlinearEnd, SameEnd, UnknownEnd, Unsupported
from endsum.graphends import GraphPresentation, end_census
from endsum.handles import (
    EndRef,
    HandleSpec,
    attach_handle_combinatorial,
    chain_of,
    exhaustion_oracle,
    isomorphic,
    isomorphic_invariants,
    merged_component_name,
    predict_handle_invariants,
    verify_presentation_invariance,
)
from endsum.invariants import GenusValue, Parity, classify, ends_of_automaton, genus_compact
from endsum.surface import SurfaceDescriptor
from endsum.cli import main

from helpers import (
    FIXTURES,
    finite_automaton,
    fixture,
    fixture_names,
    linear_automaton,
    point_addresses,
    random_automaton,
    random_component,
    random_expr,
    rewrite,
    signature,
)

# time budgets in seconds
GENUS_BUDGET = 1e-3
END_COUNT_BUDGET = 10.0
ORACLE_BUDGET = 30.0
GRAPH_BUDGET = 10.0
ALGEBRA_BUDGET = 10.0
LEDGER_HORIZON = 20


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail=""):
        with capsys.disabled():
            print(f"\n{tag}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else ""))
        assert ok, detail
    return emit


def H(a, b, oriented=True):
    return HandleSpec(EndRef.parse(a), EndRef.parse(b), oriented)


def _strip(invs):
    return sorted(i.key() for i in invs)


def test_ac1_genus_formula(report):
    # (pi0, b, chi) -> doubled genus
    table = {
        "sphere": ((1, 0, 2), 0),
        "torus": ((1, 0, 0), 2),
        "projective plane": ((1, 0, 1), 1),
        "Klein bottle": ((1, 0, 0), 2),
        "disk": ((1, 1, 1), 0),
        "Mobius band": ((1, 1, 0), 1),
    }
    bad, slowest = [], 0.0
    for name, (args, want) in table.items():
        t = time.perf_counter()
        got = genus_compact(*args)
        slowest = max(slowest, time.perf_counter() - t)
        if got != want:
            bad.append(f"{name}: {got / 2} != {want / 2}")
    report("AC1 genus table", not bad and slowest < GENUS_BUDGET,
           "; ".join(bad) or f"slowest {slowest * 1e6:.1f} us")


def test_ac2_plane_sum(report):
    d = fixture("two_planes")
    h = H("p.a1", "q.a1")
    predicted = predict_handle_invariants(classify(d), h)
    plane = classify(fixture("plane"))
    same = _strip(predicted) == _strip(plane)
    iso = isomorphic(attach_handle_combinatorial(d, h), fixture("plane")).isomorphic
    report("AC2 plane # plane = plane", same and iso, f"invariants equal={same}, isomorphic={iso}")


def test_ac3_annulus(report):
    d = fixture("annulus")
    (n,) = predict_handle_invariants(classify(d), H("c.a1", "c.a2"))
    (n2,) = predict_handle_invariants(classify(d), H("c.a1", "c.a2", oriented=False))
    torus = (n.orientable, n.genus, n.boundary_count, n.ends) == (True, GenusValue(2), 0, em.Pt(em.PLANAR))
    klein = (n2.orientable, n2.genus, n2.parity, n2.boundary_count, n2.ends) == \
        (False, GenusValue(2), Parity.EVEN, 0, em.Pt(em.PLANAR))
    built = attach_handle_combinatorial(d, H("c.a1", "c.a2"))
    built2 = attach_handle_combinatorial(d, H("c.a1", "c.a2", oriented=False))
    agree = isomorphic(built, fixture("punctured_torus")).isomorphic and \
        isomorphic(built2, fixture("punctured_klein")).isomorphic
    distinct = not isomorphic(built, built2).isomorphic
    report("AC3 annulus + handle", torus and klein and agree and distinct,
           f"torus={torus} klein={klein} constructions={agree} not-isomorphic={distinct}")


def _finite_case(rng):
    comps = []
    for name in ["c", "d"][:rng.randint(1, 2)]:
        comps.append(random_component(rng, name, finite_automaton, rng.randint(1, 3)))
    d = SurfaceDescriptor(tuple(comps))
    invs = classify(d)
    ends = [EndRef(inv.name, k, p) for inv in invs for k, e in inv.anchor_ends for p in point_addresses(e)]
    return d, invs, ends


def test_ac4_end_count_law(report):
    rng = random.Random(2024)
    t0 = time.perf_counter()
    done, bad = 0, []
    while done < 1000:
        d, invs, ends = _finite_case(rng)
        if len(ends) < 2:
            continue
        a, b = rng.sample(ends, 2)
        before = sum(em.count_ends(i.ends).n for i in invs)
        after = predict_handle_invariants(invs, HandleSpec(a, b, rng.random() < 0.5))
        counts = [em.count_ends(i.ends) for i in after]
        if any(c.kind is not em.CountKind.FINITE for c in counts) or sum(c.n for c in counts) != before - 1:
            bad.append((a, b))
        done += 1
    elapsed = time.perf_counter() - t0
    report("AC4 end count drops by one", not bad and elapsed < END_COUNT_BUDGET,
           f"{done} cases, {len(bad)} failures, {elapsed:.2f}s")


def _linear_case(rng):
    def anchor(r):
        return linear_automaton(r) if r.random() < 0.85 else random_automaton(r, 3)

    comps = [random_component(rng, "c", anchor, rng.randint(1, 3))]
    if rng.random() < 0.5:
        comps.append(random_component(rng, "d", anchor, rng.randint(1, 2)))
    d = SurfaceDescriptor(tuple(comps))
    ends = []
    for c in comps:
        for k, a in c.anchors:
            try:
                chain_of(a)
                ends.append(EndRef(c.name, k))
            except (NonlinearEnd, UnknownEnd):
                pass
    return d, ends


def test_ac5_oracle_equivalence(report):
    rng = random.Random(7)
    t0 = time.perf_counter()
    done, bad = 0, []
    while done < 150:
        d, ends = _linear_case(rng)
        if len(ends) < 2:
            continue
        a, b = rng.sample(ends, 2)
        h = HandleSpec(a, b, rng.random() < 0.5)
        try:
            predicted = predict_handle_invariants(classify(d), h)
        except Unsupported:
            continue
        done += 1
        built = classify(attach_handle_combinatorial(d, h))
        fields = all(x == y and em.homeomorphic(x.ends, y.ends)
                     for x, y in zip(sorted(built, key=lambda i: i.key()), sorted(predicted, key=lambda i: i.key())))
        fields = fields and len(built) == len(predicted) and isomorphic_invariants(built, predicted).isomorphic
        run = exhaustion_oracle(d, h, m_max=LEDGER_HORIZON)
        target = next(p for p in predicted if p.name == merged_component_name(h))
        ledger = run.genus() == target.genus and (target.parity is None or run.parity() == target.parity)
        if not (fields and ledger):
            bad.append((str(h.end_a), str(h.end_b), fields, ledger))
    elapsed = time.perf_counter() - t0
    report("AC5 construction = prediction = ledger", not bad and elapsed < ORACLE_BUDGET,
           f"{done} cases, {len(bad)} failures, {elapsed:.2f}s")


SUMS = [
    ("two_planes", "p.a1", "q.a1", True),
    ("two_loch_ness", "p.a1", "q.a1", True),
    ("loch_ness_plane", "p.a1", "q.a1", True),
    ("loch_ness_plane", "p.a1", "q.a1", False),
    ("annulus", "c.a1", "c.a2", True),
    ("annulus", "c.a1", "c.a2", False),
    ("disk_with_ends", "c.seq", "c.seq/0", True),
]


def test_ac6_presentation_invariance(report):
    failures = []
    for name, a, b, oriented in SUMS:
        rep = verify_presentation_invariance(fixture(name), H(a, b, oriented))
        if not rep.passed:
            failures += [f"{name}: {c.name}" for c in rep.checks if not c.passed]
    report("AC6 presentation invariance", not failures, "; ".join(failures) or f"{len(SUMS)} attachments")


KIND = {em.CountKind.FINITE: "finite", em.CountKind.COUNTABLE: "mixed", em.CountKind.CONTINUUM: "cantor-like"}


def test_ac7_graph_ends(report):
    t0 = time.perf_counter()
    line = GraphPresentation.from_edges([("o", "l"), ("o", "r"), ("l", "l"), ("r", "r")], "o")
    ray = GraphPresentation.from_edges([("o", "o")], "o")
    pants = GraphPresentation.from_edges([("o", "x"), ("o", "y"), ("o", "z"),
                                          ("x", "x"), ("y", "y"), ("z", "z")], "o")
    binary = GraphPresentation({"b": ("b", "b")}, "b")
    named = (end_census(line).n, end_census(ray).n, end_census(pants).n) == (2, 1, 3)
    bc = end_census(binary)
    tree = bc.kind == "cantor-like" and bc.counts[:3] == (2, 4, 8)
    rng = random.Random(99)
    checked = skipped = 0
    bad = []
    for _ in range(200):
        a = random_automaton(rng)
        try:
            e = ends_of_automaton(a)
        except Unsupported:
            skipped += 1
            continue
        checked += 1
        c = end_census(GraphPresentation.from_automaton(a))
        n = em.count_ends(e)
        if c.kind != KIND[n.kind] or (c.kind == "finite" and c.n != n.n):
            bad.append(a)
    elapsed = time.perf_counter() - t0
    report("AC7 graph ends", named and tree and not bad and elapsed < GRAPH_BUDGET,
           f"named={named} binary={bc.counts[:4]} agree {checked - len(bad)}/{checked}"
           f" (skipped {skipped}), {elapsed:.2f}s")


MERGE_TABLE = {
    # (genus_a, orientable_a, genus_b, orientable_b) -> merged
    (0, True, 0, True): (0, True),
    (0, True, 1, True): (1, True),
    (0, True, 1, False): (1, False),
    (1, True, 0, True): (1, True),
    (1, True, 1, True): (1, True),
    (1, True, 1, False): (1, False),
    (1, False, 0, True): (1, False),
    (1, False, 1, True): (1, False),
    (1, False, 1, False): (1, False),
}


def _label(g, o):
    return em.EndLabel(em.Genus.INFINITE if g else em.Genus.ZERO, o)


def test_ac8_end_algebra(report):
    t0 = time.perf_counter()
    rng = random.Random(3)
    corpus = [random_expr(rng, rng.randint(0, 3)) for _ in range(10000)]
    idem = all(em.canonicalize(em.canonicalize(e)) == em.canonicalize(e) for e in corpus)
    refl = all(em.homeomorphic(e, e) for e in corpus)
    sym = trans = sound = True
    for e in corpus[:3000]:
        v1 = rewrite(rng, e)
        v2 = rewrite(rng, v1)
        f = corpus[rng.randrange(len(corpus))]
        sym = sym and em.homeomorphic(e, f) == em.homeomorphic(f, e) and em.homeomorphic(v1, e)
        if em.homeomorphic(e, v1) and em.homeomorphic(v1, v2):
            trans = trans and em.homeomorphic(e, v2)
        if em.homeomorphic(e, f):
            sound = sound and signature(e) == signature(f)
    truth = True
    for g1, o1, g2, o2 in itertools.product([0, 1], [True, False], [0, 1], [True, False]):
        try:
            a, b = _label(g1, o1), _label(g2, o2)
        except InvalidLabel:
            truth = truth and ((g1, o1) == (0, False) or (g2, o2) == (0, False))
            continue
        want = _label(*MERGE_TABLE[(g1, o1, g2, o2)])
        got = em.quotient_ends(em.union(em.Pt(a), em.Pt(b)), (0,), (1,), em.merge_label(a, b))
        truth = truth and got == em.Pt(want)
    elapsed = time.perf_counter() - t0
    ok = idem and refl and sym and trans and sound and truth and elapsed < ALGEBRA_BUDGET
    report("AC8 end-model algebra", ok,
           f"idempotent={idem} reflexive={refl} symmetric={sym} transitive={trans} sound={sound} "
           f"merge-table={truth}, {len(corpus)} expressions, {elapsed:.2f}s")


def test_ac9_same_end_guard(report, capsys):
    misses = []
    for name in fixture_names():
        d = fixture(name)
        for c in d.components:
            for k, _ in c.anchors:
                ref = EndRef(c.name, k)
                h = HandleSpec(ref, ref)
                for fn in (lambda: predict_handle_invariants(classify(d), h),
                           lambda: attach_handle_combinatorial(d, h),
                           lambda: exhaustion_oracle(d, h)):
                    try:
                        fn()
                        misses.append(f"{name}:{ref}")
                    except SameEnd:
                        pass
                code = main(["endsum", str(FIXTURES / f"{name}.surf"), "--end", str(ref), "--end", str(ref)])
                err = capsys.readouterr().err
                if code != 2 or "distinct-ends" not in err:
                    misses.append(f"{name}:{ref} cli")
    report("AC9 distinct-ends guard", not misses, "; ".join(misses) or "all fixtures refused")
