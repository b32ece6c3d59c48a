"""Text format for surface descriptors.

::

    surface M {
      component c {
        core { genus2 0; orientable true; boundary 0; anchors [a1]; }
        chain a1 {
          node n { genus2 0; orientable true; children [n]; }
          start n;
        }
      }
    }

The component name is optional (default ``c``, ``c2``, ``c3``...).  ``#``
starts a comment that runs to the end of the line.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .errors import EndSumError
from .surface import Block, BlockAutomaton, CompactPiece, Component, SurfaceDescriptor

_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<tok>[A-Za-z_][A-Za-z0-9_'~.+-]*|-?\d+|[{}\[\];,])")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_'~.+-]*\Z")
KEYWORDS = {"surface", "component", "core", "chain", "node", "start", "genus2", "orientable",
            "boundary", "anchors", "children", "true", "false"}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    rule: str
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: [{self.rule}] {self.message}"


class DslError(EndSumError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass
class DescriptorDocument:
    surfaces: List[SurfaceDescriptor]
    spans: Dict[Tuple[str, ...], Span] = field(default_factory=dict, compare=False)

    def surface(self, name=None):
        if name is None:
            return self.surfaces[0]
        for s in self.surfaces:
            if s.name == name:
                return s
        raise KeyError(name)


def _tokenize(text):
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslError([Diagnostic(line, pos - start + 1, "token", f"unexpected character {text[pos]!r}")])
        if m.group("tok"):
            out.append((m.group("tok"), line, pos - start + 1))
        chunk = m.group(0)
        nl = chunk.count("\n")
        if nl:
            line += nl
            start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    out.append(("<eof>", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.spans = {}

    @property
    def here(self):
        return self.toks[self.i]

    def fail(self, rule, message, tok=None):
        _, line, col = tok or self.here
        raise DslError([Diagnostic(line, col, rule, message)])

    def expect(self, value, rule):
        tok = self.here
        if tok[0] != value:
            self.fail(rule, f"expected {value!r}, found {tok[0]!r}")
        self.i += 1
        return tok

    def name(self, rule):
        tok = self.here
        if not _NAME.match(tok[0]) or tok[0] in KEYWORDS:
            self.fail(rule, f"expected a name, found {tok[0]!r}")
        self.i += 1
        return tok

    def integer(self, rule):
        tok = self.here
        if not re.fullmatch(r"-?\d+", tok[0]):
            self.fail(rule, f"expected an integer, found {tok[0]!r}")
        self.i += 1
        return int(tok[0])

    def boolean(self, rule):
        tok = self.here
        if tok[0] not in ("true", "false"):
            self.fail(rule, f"expected true or false, found {tok[0]!r}")
        self.i += 1
        return tok[0] == "true"

    def field(self, key, kind, rule):
        self.expect(key, rule)
        value = kind(rule)
        self.expect(";", rule)
        return value

    def names(self, rule):
        self.expect("[", rule)
        out = []
        while self.here[0] != "]":
            out.append(self.name(rule))
            if self.here[0] == ",":
                self.i += 1
        self.expect("]", rule)
        return out

    def document(self):
        surfaces = []
        while self.here[0] != "<eof>":
            surfaces.append(self.surface())
        if not surfaces:
            self.fail("doc", "expected at least one surface")
        names = [s.name for s in surfaces]
        for n in names:
            if names.count(n) > 1:
                self.fail("doc", f"surface name {n!r} is repeated")
        return DescriptorDocument(surfaces, self.spans)

    def surface(self):
        self.expect("surface", "surface")
        tok = self.name("surface")
        self.expect("{", "surface")
        comps = []
        while self.here[0] == "component":
            comps.append(self.component(tok[0], len(comps)))
        if not comps:
            self.fail("surface", "expected 'component'")
        self.expect("}", "surface")
        self.spans[(tok[0],)] = Span(tok[1], tok[2])
        return SurfaceDescriptor(tuple(comps), tok[0])

    def component(self, surf, index):
        ctok = self.expect("component", "component")
        cname = "c" if index == 0 else f"c{index + 1}"
        if self.here[0] != "{":
            ntok = self.name("component")
            if "." in ntok[0]:
                self.fail("component", f"component name {ntok[0]!r} may not contain '.'", ntok)
            cname = ntok[0]
        self.spans[(surf, cname)] = Span(ctok[1], ctok[2])
        self.expect("{", "component")
        self.expect("core", "core")
        self.expect("{", "core")
        d = self.field("genus2", self.integer, "core")
        o = self.field("orientable", self.boolean, "core")
        b = self.field("boundary", self.integer, "core")
        self.expect("anchors", "core")
        anchors = self.names("core")
        self.expect(";", "core")
        self.expect("}", "core")
        chains = {}
        while self.here[0] == "chain":
            tok, a = self.chain(surf, cname)
            if tok[0] in chains:
                self.fail("chain", f"chain {tok[0]!r} is defined twice", tok)
            chains[tok[0]] = (tok, a)
        self.expect("}", "component")
        declared = {t[0] for t in anchors}
        for t in anchors:
            if t[0] not in chains:
                self.fail("component", f"anchor {t[0]!r} has no chain", t)
        for n, (t, _) in chains.items():
            if n not in declared:
                self.fail("component", f"chain {n!r} is not a declared anchor", t)
        core = CompactPiece(d, o, b + len(anchors))
        return Component(core, b, tuple((t[0], chains[t[0]][1]) for t in anchors), cname)

    def chain(self, surf, cname):
        self.expect("chain", "chain")
        tok = self.name("chain")
        self.expect("{", "chain")
        nodes, refs = [], []
        while self.here[0] == "node":
            ntok = self.expect("node", "node")
            n = self.name("node")
            self.spans[(surf, cname, tok[0], n[0])] = Span(ntok[1], ntok[2])
            self.expect("{", "node")
            d = self.field("genus2", self.integer, "node")
            o = self.field("orientable", self.boolean, "node")
            self.expect("children", "node")
            kids = self.names("node")
            self.expect(";", "node")
            self.expect("}", "node")
            refs.extend(kids)
            nodes.append(Block(n[0], d, o, tuple(k[0] for k in kids)))
        if not nodes:
            self.fail("chain", "expected 'node'")
        self.expect("start", "chain")
        start = self.name("chain")
        self.expect(";", "chain")
        self.expect("}", "chain")
        known = {b.name for b in nodes}
        for k in refs + [start]:
            if k[0] not in known:
                self.fail("chain", f"unknown node {k[0]!r} in chain {tok[0]!r}", k)
        return tok, BlockAutomaton(tuple(nodes), start[0])


def parse_dsl(text):
    """Parse a document; raises ``DslError`` carrying line/column diagnostics."""
    return _Parser(text).document()


def _bool(x):
    return "true" if x else "false"


def print_surface(s):
    lines = [f"surface {s.name} {{"]
    for c in s.components:
        lines.append(f"  component {c.name} {{")
        lines.append(f"    core {{ genus2 {c.core.doubled_genus}; orientable {_bool(c.core.orientable)}; "
                     f"boundary {c.boundary_count}; anchors [{' '.join(c.anchor_names)}]; }}")
        for name, a in c.anchors:
            lines.append(f"    chain {name} {{")
            for b in a.nodes:
                lines.append(f"      node {b.name} {{ genus2 {b.doubled_genus}; "
                             f"orientable {_bool(b.orientable)}; children [{' '.join(b.children)}]; }}")
            lines.append(f"      start {a.start};")
            lines.append("    }")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_document(doc):
    return "\n".join(print_surface(s) for s in doc.surfaces)
