"""Finite groupoid models, local bisections, and atlas extraction.

A model lists objects and arrows with source, target, unit, inverse and a
composition table.  Topology is carried by two relations: ``edges`` join
objects that are adjacent, ``links`` join arrows lying on one sheet over an
edge.  A bisection is continuous when it sends adjacent objects to linked
arrows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .atlas import Atlas, verify_atlas
from .bimodule import Bimodule, classify
from .errors import (EvaluationNotBijective, NotTranslationSubset, OrbatlasError,
                     PosetViolation)
from .group_core import make_group
from .reports import Report
from .satake import CANDIDATE_BOUND, build_layer, make_chart
from .unionfind import UnionFind


@dataclass(eq=False)
class FiniteGroupoidModel:
    objects: tuple
    arrows: tuple
    src: tuple
    tgt: tuple
    unit: tuple
    inv: tuple
    comp: dict                      # (g2, g1) -> g2 after g1, defined when tgt[g1] == src[g2]
    edges: frozenset = frozenset()  # frozenset({a, b}) of object ids
    links: frozenset = frozenset()  # frozenset({g, h}) of arrow ids
    quotient: tuple = None          # quotient point name per object
    name: str = ""
    _hom: dict = field(default=None, repr=False)

    def __post_init__(self):
        self._hom = {}
        for g in range(len(self.arrows)):
            self._hom.setdefault((self.src[g], self.tgt[g]), []).append(g)
        if self.quotient is None:
            uf = UnionFind(len(self.objects))
            for g in range(len(self.arrows)):
                uf.union(self.src[g], self.tgt[g])
            self.quotient = tuple(self.objects[uf.find(x)] for x in range(len(self.objects)))

    def hom(self, x, y):
        return self._hom.get((x, y), [])

    def loops(self, x):
        return self.hom(x, x)

    def mul(self, g2, g1):
        return self.comp[(g2, g1)]

    def adjacent(self, a, b):
        return a == b or frozenset((a, b)) in self.edges

    def linked(self, g, h):
        return g == h or frozenset((g, h)) in self.links

    def object_index(self, name):
        return self.objects.index(name)

    def quotient_points(self):
        return sorted(set(self.quotient))


def make_model(objects, arrows, units, inverse, compose, edges=(), links=(), quotient=None, name=""):
    """Build a model from names.

    arrows: [(name, source, target)]; units: {object: arrow}; inverse: {arrow: arrow};
    compose: [(g2, g1, g)] meaning g2 after g1 is g; edges/links: name pairs;
    quotient: optional {object: point}.
    """
    oidx = {o: k for k, o in enumerate(objects)}
    anames = [a[0] for a in arrows]
    aidx = {a: k for k, a in enumerate(anames)}
    src = tuple(oidx[a[1]] for a in arrows)
    tgt = tuple(oidx[a[2]] for a in arrows)
    unit = tuple(aidx[units[o]] for o in objects)
    inv = tuple(aidx[inverse[a]] for a in anames)
    comp = {(aidx[g2], aidx[g1]): aidx[g] for g2, g1, g in compose}
    e = frozenset(frozenset((oidx[a], oidx[b])) for a, b in edges if a != b)
    ln = frozenset(frozenset((aidx[a], aidx[b])) for a, b in links if a != b)
    q = tuple(quotient[o] for o in objects) if quotient else None
    return FiniteGroupoidModel(tuple(objects), tuple(anames), src, tgt, unit, inv, comp, e, ln, q, name)


def validate_groupoid(model) -> Report:
    rep = Report(f"groupoid model {model.name}".strip())
    m, n = model, len(model.arrows)
    names = m.arrows

    def first(gen):
        return next(gen, None)

    bad = first(x for x in range(len(m.objects)) if m.src[m.unit[x]] != x or m.tgt[m.unit[x]] != x)
    rep.add("model.laws", bad is None, "units are loops at their object", None if bad is None else m.objects[bad])
    bad = first((names[g2], names[g1]) for g1 in range(n) for g2 in range(n)
                if ((g2, g1) in m.comp) != (m.tgt[g1] == m.src[g2]))
    rep.add("model.laws", bad is None, "composition is defined exactly on composable pairs", bad)
    if bad is not None:
        return rep
    bad = first((names[g2], names[g1]) for (g2, g1), g in m.comp.items()
                if m.src[g] != m.src[g1] or m.tgt[g] != m.tgt[g2])
    rep.add("model.laws", bad is None, "composites have the right source and target", bad)
    bad = first(names[g] for g in range(n)
                if m.mul(g, m.unit[m.src[g]]) != g or m.mul(m.unit[m.tgt[g]], g) != g)
    rep.add("model.laws", bad is None, "units are two-sided identities", bad)
    bad = first(names[g] for g in range(n)
                if m.src[m.inv[g]] != m.tgt[g] or m.mul(m.inv[g], g) != m.unit[m.src[g]]
                or m.mul(g, m.inv[g]) != m.unit[m.tgt[g]])
    rep.add("model.laws", bad is None, "inverses", bad)
    bad = first((names[g3], names[g2], names[g1]) for (g2, g1), g21 in m.comp.items()
                for g3 in range(n) if m.src[g3] == m.tgt[g2]
                if m.mul(g3, g21) != m.mul(m.mul(g3, g2), g1))
    rep.add("model.laws", bad is None, "associativity", bad)

    # continuity of the structure maps along declared links
    bad = first((names[g], names[h]) for g, h in map(sorted, m.links)
                if not (m.adjacent(m.src[g], m.src[h]) and m.adjacent(m.tgt[g], m.tgt[h])))
    rep.add("model.continuity", bad is None, "linked arrows sit over adjacent objects", bad)
    bad = first(tuple(m.objects[x] for x in sorted(e)) for e in m.edges
                if not m.linked(*(m.unit[x] for x in e)))
    rep.add("model.continuity", bad is None, "units are linked along edges", bad)
    bad = first((names[g], names[h]) for g, h in map(sorted, m.links) if not m.linked(m.inv[g], m.inv[h]))
    rep.add("model.continuity", bad is None, "inversion preserves links", bad)
    partners = {}
    for g, h in map(sorted, m.links):
        partners.setdefault(g, set()).add(h)
        partners.setdefault(h, set()).add(g)
    bad = None
    for (g2, g1), g in m.comp.items():
        for h1 in partners.get(g1, set()) | {g1}:
            for h2 in partners.get(g2, set()) | {g2}:
                if (h1, h2) == (g1, g2) or (h2, h1) not in m.comp:
                    continue
                if not m.linked(g, m.mul(h2, h1)):
                    bad = bad or (names[g2], names[g1], names[h2], names[h1])
    rep.add("model.continuity", bad is None, "composition preserves links", bad)
    return rep


# --- isotropy, inertia, fibers ---------------------------------------------------------

def model_isotropy(model, x):
    loops = sorted(model.loops(x), key=lambda g: (g != model.unit[x], g))
    pos = {g: k for k, g in enumerate(loops)}
    table = [[pos[model.mul(a, b)] for b in loops] for a in loops]
    return make_group(table, [model.arrows[g] for g in loops])


@dataclass
class Inertia:
    count: int
    component: dict         # loop arrow id -> component id
    representatives: list   # least loop per component


def model_inertia(model) -> Inertia:
    """Components of the loop space, glued along links and by conjugation."""
    loops = [g for g in range(len(model.arrows)) if model.src[g] == model.tgt[g]]
    pos = {g: k for k, g in enumerate(loops)}
    uf = UnionFind(len(loops))
    for pair in model.links:
        g, h = sorted(pair)
        if g in pos and h in pos:
            uf.union(pos[g], pos[h])
    for h in range(len(model.arrows)):
        for g in model.loops(model.src[h]):
            uf.union(pos[g], pos[model.mul(model.mul(h, g), model.inv[h])])
    ids, reps = uf.classes()
    return Inertia(len(reps), {g: ids[pos[g]] for g in loops}, [loops[r] for r in reps])


def isotropy_fiber_check(model) -> Report:
    """Conjugation by each arrow is an isomorphism between isotropy groups."""
    rep = Report("isotropy along arrows")
    bad = None
    for h in range(len(model.arrows)):
        x, y = model.src[h], model.tgt[h]
        conj = {g: model.mul(model.mul(h, g), model.inv[h]) for g in model.loops(x)}
        ok = sorted(conj.values()) == sorted(model.loops(y)) and all(
            conj[model.mul(a, b)] == model.mul(conj[a], conj[b]) for a in conj for b in conj)
        if not ok:
            bad = bad or model.arrows[h]
    rep.add("groupoid.isotropy_fiber_iso", bad is None, "conjugation by every arrow", bad)
    return rep


def fiber_sizes(model) -> dict:
    """(source name, target name) -> number of arrows, for every object pair."""
    return {(model.objects[x], model.objects[y]): len(model.hom(x, y))
            for x in range(len(model.objects)) for y in range(len(model.objects))}


# --- bisections ---------------------------------------------------------------------------

def _sections(model, dom, allowed_target):
    """Continuous sections of s over dom whose target map is injective into allowed_target."""
    opts = [[g for g in range(len(model.arrows)) if model.src[g] == u and model.tgt[g] in allowed_target]
            for u in dom]
    out, cur, used = [], [], set()
    steps = [0]

    def extend(k):
        steps[0] += 1
        if steps[0] > CANDIDATE_BOUND:
            raise OrbatlasError("bisection search exceeds the candidate bound; use smaller subsets")
        if k == len(dom):
            out.append(tuple(cur))
            return
        for g in opts[k]:
            if model.tgt[g] in used:
                continue
            if any(model.adjacent(dom[k], dom[p]) and not model.linked(g, cur[p]) for p in range(k)):
                continue
            cur.append(g)
            used.add(model.tgt[g])
            extend(k + 1)
            cur.pop()
            used.discard(model.tgt[g])

    extend(0)
    return sorted(out)


def _compose_sections(model, outer_dom_pos, outer, inner):
    """(outer . inner)(u) = outer(t inner(u)) inner(u)."""
    return tuple(model.mul(outer[outer_dom_pos[model.tgt[g]]], g) for g in inner)


def _section_label(model, sec):
    return "|".join(model.arrows[g] for g in sec)


@dataclass(eq=False)
class BisectionGroup:
    domain: tuple       # object ids
    sections: list      # per group element, a tuple of arrow ids aligned with domain
    group: object
    action: list        # per group element, permutation of domain positions


def bisection_group(model, dom) -> BisectionGroup:
    dom = tuple(sorted(dom))
    pos = {u: k for k, u in enumerate(dom)}
    secs = _sections(model, dom, set(dom))
    ident = tuple(model.unit[u] for u in dom)
    if ident not in secs:
        raise NotTranslationSubset("identity bisection is not continuous", witness=[model.objects[u] for u in dom])
    secs = [ident] + [s for s in secs if s != ident]
    idx = {s: k for k, s in enumerate(secs)}
    table = []
    for a in secs:
        row = []
        for b in secs:
            c = _compose_sections(model, pos, a, b)
            if c not in idx:
                raise NotTranslationSubset("bisections are not closed under composition",
                                           witness=(_section_label(model, a), _section_label(model, b)))
            row.append(idx[c])
        table.append(row)
    group = make_group(table, [_section_label(model, s) for s in secs])

    # evaluation (sigma, u) -> sigma(u) must be a bijection onto arrows inside dom
    hit = {}
    for k, s in enumerate(secs):
        for u, g in zip(dom, s):
            if g in hit:
                raise NotTranslationSubset("an arrow is the value of two bisections", witness=model.arrows[g])
            hit[g] = k
    for u in dom:
        for v in dom:
            for g in model.hom(u, v):
                if g not in hit:
                    raise NotTranslationSubset("an arrow inside the subset lies on no bisection",
                                               witness=model.arrows[g])
    action = [tuple(pos[model.tgt[g]] for g in s) for s in secs]
    return BisectionGroup(dom, secs, group, action)


def local_bisections(model, U: BisectionGroup, V: BisectionGroup) -> Bimodule:
    """The module of continuous local bisections from U into V: left G_V, right G_U."""
    qU = {model.quotient[u] for u in U.domain}
    qV = {model.quotient[v] for v in V.domain}
    if not qU <= qV:
        raise EvaluationNotBijective("quotient of the source subset is not inside the target's",
                                     witness=sorted(qU - qV))
    secs = _sections(model, U.domain, set(V.domain))
    idx = {s: k for k, s in enumerate(secs)}
    upos = {u: k for k, u in enumerate(U.domain)}
    vpos = {v: k for k, v in enumerate(V.domain)}
    left, right = [], []
    for tau in V.sections:
        row = []
        for s in secs:
            c = _compose_sections(model, vpos, tau, s)
            if c not in idx:
                raise EvaluationNotBijective("left composite is not a local bisection",
                                             witness=(_section_label(model, tau), _section_label(model, s)))
            row.append(idx[c])
        left.append(tuple(row))
    for s in secs:
        row = []
        for g in U.sections:
            c = _compose_sections(model, upos, s, g)
            if c not in idx:
                raise EvaluationNotBijective("right composite is not a local bisection",
                                             witness=(_section_label(model, s), _section_label(model, g)))
            row.append(idx[c])
        right.append(tuple(row))

    hit = {}
    for k, s in enumerate(secs):
        for g in s:
            if g in hit:
                raise EvaluationNotBijective("an arrow is the value of two local bisections",
                                             witness=model.arrows[g])
            hit[g] = k
    for u in U.domain:
        for v in V.domain:
            for g in model.hom(u, v):
                if g not in hit:
                    raise EvaluationNotBijective(
                        f"arrow {model.arrows[g]} lies on no local bisection; shrink the subset around "
                        f"{model.objects[u]}", witness=model.arrows[g])
    return Bimodule(V.group, U.group, tuple(left), tuple(right),
                    tuple(_section_label(model, s) for s in secs)), secs


def extraction_checks(model, U, V, module, secs) -> Report:
    rep = Report("local bisections")
    tag = f"{[model.objects[u] for u in U.domain]}->{[model.objects[v] for v in V.domain]}"
    rep.add("model.evaluation_bijective", True, tag)
    cls = classify(module)
    rep.add("model.left_torsor", cls.nonempty and cls.left_free and cls.left_transitive, tag,
            None if cls.ok else (tag,) + tuple(cls.first_failure()))
    # target-side view: inverted bisections hit every arrow from V into U exactly once
    seen = sorted(model.inv[g] for s in secs for g in s)
    want = sorted(g for v in V.domain for u in U.domain for g in model.hom(v, u))
    rep.add("model.target_decomposition", seen == want, tag)
    return rep


def bisection_orbit_check(model, B: BisectionGroup) -> Report:
    rep = Report("bisection orbits")
    pos = {u: k for k, u in enumerate(B.domain)}
    ok = True
    for u in B.domain:
        via_group = {B.domain[a[pos[u]]] for a in B.action}
        via_arrows = {model.tgt[g] for g in range(len(model.arrows))
                      if model.src[g] == u and model.tgt[g] in pos}
        ok = ok and via_group == via_arrows
    rep.add("model.bisection_orbits", ok, str([model.objects[u] for u in B.domain]))
    return rep


# --- atlas extraction -----------------------------------------------------------------------

def atlas_from_groupoid(model, cover, report=None) -> Atlas:
    """cover: {chart name: [object names]}, in chart order."""
    return extract_with_bisections(model, cover, report)[0]


def extract_with_bisections(model, cover, report=None):
    """(atlas, bisection group per chart, local bisections per arrow)."""
    rep = report if report is not None else Report("extraction")
    names = list(cover)
    doms = []
    for name in names:
        try:
            doms.append(tuple(sorted(model.object_index(o) for o in cover[name])))
        except ValueError as exc:
            raise OrbatlasError(f"cover chart {name} names an unknown object: {exc}") from None
    covered = set().union(*map(set, doms)) if doms else set()
    missing = [model.objects[x] for x in range(len(model.objects)) if x not in covered]
    rep.add("model.cover_objects", not missing, "cover reaches every object", missing or None)

    points = model.quotient_points()
    qidx = {q: k for k, q in enumerate(points)}
    groups = []
    for dom in doms:
        B = bisection_group(model, dom)
        rep.add("model.translation_subset", True, str([model.objects[u] for u in dom]))
        rep.extend(bisection_orbit_check(model, B))
        groups.append(B)
    supports = [frozenset(model.quotient[u] for u in d) for d in doms]
    for a in range(len(doms)):
        for b in range(a + 1, len(doms)):
            if supports[a] == supports[b]:
                raise PosetViolation(f"cover charts {names[a]} and {names[b]} have the same quotient",
                                     witness=(names[a], names[b]))
    for a in range(len(doms)):
        for b in range(a + 1, len(doms)):
            for q in sorted(supports[a] & supports[b]):
                ok = any(q in supports[w] and supports[w] <= supports[a] & supports[b] for w in range(len(doms)))
                rep.add("model.cover_local_compatibility", ok, f"{names[a]} and {names[b]} at {q}",
                        None if ok else (names[a], names[b], q))

    charts = [make_chart(name, [model.objects[u] for u in B.domain], B.group, B.action,
                         [qidx[model.quotient[u]] for u in B.domain])
              for name, B in zip(names, groups)]

    n = len(charts)
    arrows = [(j, i) for i in range(n) for j in range(n) if supports[i] <= supports[j]]
    abst, secs, con = {}, {}, {}
    for (j, i) in arrows:
        module, ss = local_bisections(model, groups[i], groups[j])
        rep.extend(extraction_checks(model, groups[i], groups[j], module, ss))
        abst[(j, i)], secs[(j, i)] = module, ss
        vpos = {v: k for k, v in enumerate(groups[j].domain)}
        con[(j, i)] = sorted({tuple(vpos[model.tgt[g]] for g in s) for s in ss})
    layer = build_layer(points, charts, con)

    realization = {}
    for (j, i) in arrows:
        vpos = {v: k for k, v in enumerate(groups[j].domain)}
        realization[(j, i)] = tuple(layer.con_index(j, i, tuple(vpos[model.tgt[g]] for g in s)) for s in secs[(j, i)])
    comp_cells = {}
    for (j, i) in arrows:
        for k in layer.above(j):
            idx = {s: p for p, s in enumerate(secs[(k, i)])}
            vpos = {v: p for p, v in enumerate(groups[j].domain)}
            comp_cells[(k, j, i)] = tuple(
                tuple(idx[_compose_sections(model, vpos, nu, lam)] for lam in secs[(j, i)])
                for nu in secs[(k, j)])
    unit = {}
    for i, B in enumerate(groups):
        idx = {s: p for p, s in enumerate(secs[(i, i)])}
        unit[i] = tuple(idx[s] for s in B.sections)
    return Atlas(layer, abst, comp_cells, unit, realization), groups, secs


def extract_and_verify(model, cover):
    rep = Report("extraction")
    atlas = atlas_from_groupoid(model, cover, rep)
    rep.extend(verify_atlas(atlas))
    return atlas, rep


def roundtrip_check(atlas):
    """Atlas -> groupoid -> atlas on the chart cover -> groupoid; compare invariants.

    Returns (report, invariants before, invariants after).
    """
    from .fractions import build_groupoid, compare_invariants, morita_invariants, to_model

    rep = Report("roundtrip")
    gpd = build_groupoid(atlas, rep)
    model = to_model(gpd)
    cover = {c.name: [f"{c.name}:{s}" for s in c.samples] for c in atlas.charts}
    again = atlas_from_groupoid(model, cover, rep)
    rep.extend(verify_atlas(again))
    before, after = morita_invariants(gpd), morita_invariants(build_groupoid(again, rep))
    verdict, name, a, b = compare_invariants(before, after)
    rep.add("roundtrip.invariants_equal", verdict == "equal",
            "invariants before and after", None if verdict == "equal" else (name, a, b))
    return rep, before, after


# --- example models ----------------------------------------------------------------------

CIRCLE_POINTS = ("q1", "q2", "q3", "q4")
CIRCLE_EDGES = (("q1", "q4"), ("q4", "q2"), ("q2", "q3"), ("q3", "q1"))


def z3_circle_model(twisted=False):
    """Constant Z/3 isotropy over a 4-point circle.

    Untwisted: three parallel sheets of loops.  Twisted: the two non-identity
    sheets swap once going around, so only two sheets exist globally.
    """
    names = ("X", "Y0", "Y1") if twisted else ("0", "1", "2")
    arrows, compose, units, inverse = [], [], {}, {}
    for q in CIRCLE_POINTS:
        for k in range(3):
            arrows.append((f"{names[k]}@{q}", q, q))
            inverse[f"{names[k]}@{q}"] = f"{names[-k % 3]}@{q}"
            for l in range(3):
                compose.append((f"{names[k]}@{q}", f"{names[l]}@{q}", f"{names[(k + l) % 3]}@{q}"))
        units[q] = f"{names[0]}@{q}"
    links = []
    for a, b in CIRCLE_EDGES:
        swap = twisted and {a, b} == {"q2", "q3"}
        for k in range(3):
            kb = (-k) % 3 if swap else k
            links.append((f"{names[k]}@{a}", f"{names[kb]}@{b}"))
    return make_model(CIRCLE_POINTS, arrows, units, inverse, compose, CIRCLE_EDGES, links,
                      name="H" if twisted else "G")


CIRCLE_COVER = {"U1": ["q1", "q3", "q4"], "U2": ["q2", "q3", "q4"], "U3": ["q3"], "U4": ["q4"]}
FINE_CIRCLE_COVER = {"F1": ["q1"], "F2": ["q2"], "F3": ["q3"], "F4": ["q4"],
                     "F13": ["q1", "q3"], "F14": ["q1", "q4"], "F23": ["q2", "q3"], "F24": ["q2", "q4"]}


def trivial_model(objects=("p",)):
    """Only identity arrows."""
    arrows = [(f"1@{o}", o, o) for o in objects]
    return make_model(objects, arrows, {o: f"1@{o}" for o in objects}, {a[0]: a[0] for a in arrows},
                      [(a[0], a[0], a[0]) for a in arrows], name="trivial")
