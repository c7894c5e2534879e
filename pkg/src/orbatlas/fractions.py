"""The embedding category of an atlas and its groupoid of fractions.

Objects are chart samples ``(i, x)``.  Arrows of the category are pairs
``(j, i, lam, x)``; arrows of the groupoid are classes of spans
``(i, j, lam, x, k, nu)`` with source ``(j, realization(lam)(x))`` and target
``(k, realization(nu)(x))``.  Two spans are identified when they restrict to a
common span on a smaller chart; the classes are computed by union-find over
single restriction steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .atlas import strong_compat_witnesses
from .errors import LawViolation, NotComposable
from .group_core import iso_label
from .groupoid_model import (fiber_sizes, isotropy_fiber_check, make_model,
                             model_inertia, model_isotropy)
from .reports import Report
from .unionfind import UnionFind


def _objects(atlas):
    return [(i, x) for i, c in enumerate(atlas.charts) for x in range(c.size)]


def object_name(atlas, obj):
    i, x = obj
    c = atlas.charts[i]
    return f"{c.name}:{c.samples[x]}"


# --- embedding category ------------------------------------------------------------------

@dataclass(eq=False)
class AtlasCategory:
    atlas: object
    objects: list
    arrows: list        # (j, i, lam, x)

    def src(self, a):
        j, i, lam, x = a
        return (i, x)

    def tgt(self, a):
        j, i, lam, x = a
        return (j, self.atlas.realization_map(j, i, lam)[x])

    def unit(self, obj):
        i, x = obj
        return (i, i, self.atlas.unit_elt(i), x)

    def compose(self, b, a):
        """b after a."""
        if self.tgt(a) != self.src(b):
            raise NotComposable("target and source differ", witness=(b, a))
        k, j, lam2, _ = b
        _, i, lam1, x = a
        return (k, i, self.atlas.compose(k, j, i, lam2, lam1), x)


def build_category(atlas) -> AtlasCategory:
    arrows = [(j, i, lam, x) for (j, i) in atlas.arrows
              for lam in atlas.abst[(j, i)].carrier for x in range(atlas.charts[i].size)]
    cat = AtlasCategory(atlas, _objects(atlas), arrows)
    rep = category_laws(cat)
    if not rep.ok:
        raise LawViolation("embedding category laws fail", witness=rep.failures()[0].witness)
    return cat


def category_laws(cat) -> Report:
    rep = Report("embedding category")
    bad = next((o for o in cat.objects if cat.src(cat.unit(o)) != o or cat.tgt(cat.unit(o)) != o), None)
    rep.add("category.laws", bad is None, "units are endo-arrows", bad)
    bad = next((a for a in cat.arrows
                if cat.compose(cat.unit(cat.tgt(a)), a) != a or cat.compose(a, cat.unit(cat.src(a))) != a), None)
    rep.add("category.laws", bad is None, "unit laws", bad)
    outgoing = {}
    for a in cat.arrows:
        outgoing.setdefault(cat.src(a), []).append(a)
    bad = None
    for a in cat.arrows:
        for b in outgoing.get(cat.tgt(a), ()):
            ba = cat.compose(b, a)
            for c in outgoing.get(cat.tgt(b), ()):
                if cat.compose(c, ba) != cat.compose(cat.compose(c, b), a):
                    bad = bad or (c, b, a)
    rep.add("category.laws", bad is None, "associativity", bad)
    return rep


def check_ore(cat) -> Report:
    """Every cospan of arrows completes to a commuting square."""
    rep = Report("Ore condition")
    atlas = cat.atlas
    incoming = {}
    for a in cat.arrows:
        incoming.setdefault(cat.tgt(a), []).append(a)
    for obj in sorted(incoming):
        bad = None
        for (k, i, lam, x) in incoming[obj]:
            for (_, j, xi, y) in incoming[obj]:
                if not strong_compat_witnesses(atlas, k, i, lam, x, j, xi, y):
                    bad = bad or (object_name(atlas, obj), (i, lam, x), (j, xi, y))
        rep.add("category.ore", bad is None, object_name(atlas, obj), bad)
    return rep


def check_weak_cancellation(cat) -> Report:
    """Parallel f, g with h f = h g are equalized by some arrow into their source."""
    rep = Report("weak cancellability")
    atlas = cat.atlas
    res = atlas.restrictions()
    for (k, j, i) in atlas.triples():
        for l in atlas.layer.above(k):
            bad = None
            outer = atlas.abst[(l, k)]
            mods = atlas.abst[(k, j)]
            for z in range(atlas.charts[j].size):
                for f in mods.carrier:
                    for g in mods.carrier:
                        if f == g or atlas.realization_map(k, j, f)[z] != atlas.realization_map(k, j, g)[z]:
                            continue
                        for h in outer.carrier:
                            if atlas.compose(l, k, j, h, f) != atlas.compose(l, k, j, h, g):
                                continue
                            if not any(atlas.compose(k, j, m, f, kap) == atlas.compose(k, j, m, g, kap)
                                       for (m, y, kap) in res.get((j, z), ())):
                                bad = bad or (atlas.charts[j].samples[z], f, g, h)
            tag = "->".join(atlas.charts[c].name for c in (j, k, l))
            rep.add("category.weak_cancellation", bad is None, tag, bad)
    return rep


# --- groupoid of fractions -------------------------------------------------------------

@dataclass(eq=False)
class FractionsGroupoid:
    atlas: object
    objects: list           # (i, x)
    spans: list             # (i, j, lam, x, k, nu)
    span_class: list        # class id per span
    reps: list              # least span id per class
    src: list               # object id per class
    tgt: list
    unit: list              # class per object
    inv: list
    span_index: dict = field(default_factory=dict)
    comp: dict = field(default_factory=dict)    # (c2, c1) -> c
    _members: dict = field(default=None, repr=False)

    @property
    def size(self):
        return len(self.reps)

    def members(self, c):
        if self._members is None:
            self._members = {}
            for s, k in enumerate(self.span_class):
                self._members.setdefault(k, []).append(s)
        return self._members[c]

    def label(self, c):
        i, j, lam, x, k, nu = self.spans[self.reps[c]]
        a = self.atlas
        return (f"{a.charts[j].name}<{a.abst[(j, i)].label(lam)}|{a.charts[i].name}:{a.charts[i].samples[x]}"
                f"|{a.abst[(k, i)].label(nu)}>{a.charts[k].name}")


def enumerate_spans(atlas):
    spans = []
    for i, c in enumerate(atlas.charts):
        ups = atlas.layer.above(i)
        for j in ups:
            for lam in atlas.abst[(j, i)].carrier:
                for x in range(c.size):
                    for k in ups:
                        for nu in atlas.abst[(k, i)].carrier:
                            spans.append((i, j, lam, x, k, nu))
    return spans


def restriction_edges(atlas, spans, sid):
    """Pairs (span, its restriction along one embedding into its base chart)."""
    res = atlas.restrictions()
    for s, (i, j, lam, x, k, nu) in enumerate(spans):
        for (l, y, kap) in res.get((i, x), ()):
            r = (l, j, atlas.compose(j, i, l, lam, kap), y, k, atlas.compose(k, i, l, nu, kap))
            yield s, sid[r]


def span_ends(atlas, span):
    i, j, lam, x, k, nu = span
    return (j, atlas.realization_map(j, i, lam)[x]), (k, atlas.realization_map(k, i, nu)[x])


def build_groupoid(atlas, report=None) -> FractionsGroupoid:
    rep = report if report is not None else Report("groupoid of fractions")
    objects = _objects(atlas)
    oid = {o: n for n, o in enumerate(objects)}
    spans = enumerate_spans(atlas)
    sid = {s: n for n, s in enumerate(spans)}
    uf = UnionFind(len(spans))
    for a, b in restriction_edges(atlas, spans, sid):
        uf.union(a, b)
    ids, reps = uf.classes()

    src, tgt = [None] * len(reps), [None] * len(reps)
    bad = None
    for s, span in enumerate(spans):
        a, b = span_ends(atlas, span)
        c = ids[s]
        if src[c] is None:
            src[c], tgt[c] = oid[a], oid[b]
        elif (src[c], tgt[c]) != (oid[a], oid[b]):
            bad = bad or (span, objects[src[c]], objects[tgt[c]])
    rep.add("groupoid.span_relation", bad is None, "source and target constant on classes", bad)

    unit = [ids[sid[(i, i, atlas.unit_elt(i), x, i, atlas.unit_elt(i))]] for (i, x) in objects]
    inv = []
    for r in reps:
        i, j, lam, x, k, nu = spans[r]
        inv.append(ids[sid[(i, k, nu, x, j, lam)]])
    gpd = FractionsGroupoid(atlas, objects, spans, ids, reps, src, tgt, unit, inv, sid)

    outgoing = {}
    for c in range(gpd.size):
        outgoing.setdefault(src[c], []).append(c)
    for c1 in range(gpd.size):
        for c2 in outgoing.get(tgt[c1], ()):
            gpd.comp[(c2, c1)] = _compose_spans(gpd, reps[c2], reps[c1])[0]
    return gpd


def _compose_spans(gpd, s2, s1, every=False):
    """Classes of s2 after s1, over the least witness or over every witness."""
    atlas = gpd.atlas
    i1, j1, lam1, x1, j0, nu1 = gpd.spans[s1]
    i2, j0b, lam2, x2, j2, nu2 = gpd.spans[s2]
    if j0 != j0b or atlas.realization_map(j0, i1, nu1)[x1] != atlas.realization_map(j0, i2, lam2)[x2]:
        raise NotComposable("spans do not meet", witness=(s2, s1))
    wits = strong_compat_witnesses(atlas, j0, i1, nu1, x1, i2, lam2, x2)
    if not wits:
        raise NotComposable("no strong compatibility witness", witness=(s2, s1))
    if not every:
        wits = [min(wits)]
    sid = gpd.span_index
    out = set()
    for (k, y, k1, k2) in wits:
        span = (k, j1, atlas.compose(j1, i1, k, lam1, k1), y, j2, atlas.compose(j2, i2, k, nu2, k2))
        out.add(gpd.span_class[sid[span]])
    return sorted(out)


def compose(gpd, c2, c1):
    if gpd.tgt[c1] != gpd.src[c2]:
        raise NotComposable("target of the first arrow is not the source of the second", witness=(c2, c1))
    return gpd.comp[(c2, c1)]


def groupoid_checks(gpd) -> Report:
    rep = Report("groupoid of fractions")
    n = gpd.size
    bad = next((c for c in range(n) if compose(gpd, c, gpd.unit[gpd.src[c]]) != c
                or compose(gpd, gpd.unit[gpd.tgt[c]], c) != c), None)
    rep.add("groupoid.laws", bad is None, "unit laws", None if bad is None else gpd.label(bad))
    bad = next((c for c in range(n) if compose(gpd, gpd.inv[c], c) != gpd.unit[gpd.src[c]]
                or compose(gpd, c, gpd.inv[c]) != gpd.unit[gpd.tgt[c]]), None)
    rep.add("groupoid.laws", bad is None, "inverse laws", None if bad is None else gpd.label(bad))
    bad = None
    for (c2, c1), c21 in gpd.comp.items():
        for c3 in range(n):
            if gpd.src[c3] == gpd.tgt[c2] and compose(gpd, c3, c21) != compose(gpd, compose(gpd, c3, c2), c1):
                bad = bad or (gpd.label(c3), gpd.label(c2), gpd.label(c1))
    rep.add("groupoid.laws", bad is None, "associativity", bad)
    return rep


def witness_independence_check(gpd) -> Report:
    """Compose every pair of representatives with every witness; one class must result."""
    rep = Report("composition witnesses")
    bad = None
    for (c2, c1), c in gpd.comp.items():
        for s1 in gpd.members(c1):
            for s2 in gpd.members(c2):
                got = _compose_spans(gpd, s2, s1, every=True)
                if got != [c]:
                    bad = bad or (gpd.label(c2), gpd.label(c1), [gpd.label(g) for g in got])
    rep.add("groupoid.composition_witness_independent", bad is None, f"{len(gpd.comp)} composable pairs", bad)
    return rep


def brute_force_classes(atlas, spans):
    """Oracle: the span relation read literally, closed transitively by repeated merging."""
    res = atlas.restrictions()
    n = len(spans)
    restr = []
    for (i, j, lam, x, k, nu) in spans:
        restr.append({(l, y, atlas.compose(j, i, l, lam, kap), atlas.compose(k, i, l, nu, kap))
                      for (l, y, kap) in res.get((i, x), ())})
    label = list(range(n))
    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in range(a + 1, n):
                sa, sb = spans[a], spans[b]
                if label[a] != label[b] and sa[1] == sb[1] and sa[4] == sb[4] and restr[a] & restr[b]:
                    lo, hi = sorted((label[a], label[b]))
                    label = [lo if v == hi else v for v in label]
                    changed = True
    return label


# --- finite models, isotropy, inertia ----------------------------------------------------

def to_model(gpd):
    """The groupoid as a finite model.

    Objects of one chart are pairwise adjacent; classes with representatives
    on one span piece at different points are linked.
    """
    atlas = gpd.atlas
    objs = [object_name(atlas, o) for o in gpd.objects]
    arrows = [(gpd.label(c), objs[gpd.src[c]], objs[gpd.tgt[c]]) for c in range(gpd.size)]
    names = [a[0] for a in arrows]
    units = {objs[o]: names[gpd.unit[o]] for o in range(len(objs))}
    inverse = {names[c]: names[gpd.inv[c]] for c in range(gpd.size)}
    compose_rows = [(names[c2], names[c1], names[c]) for (c2, c1), c in sorted(gpd.comp.items())]
    edges = [(objs[a], objs[b]) for a in range(len(objs)) for b in range(a + 1, len(objs))
             if gpd.objects[a][0] == gpd.objects[b][0]]
    pieces = {}
    for s, (i, j, lam, x, k, nu) in enumerate(gpd.spans):
        pieces.setdefault((i, j, lam, k, nu), set()).add(gpd.span_class[s])
    links = set()
    for cls in pieces.values():
        cls = sorted(cls)
        for a in range(len(cls)):
            for b in range(a + 1, len(cls)):
                links.add((names[cls[a]], names[cls[b]]))
    quotient = {objs[o]: atlas.layer.quotient.points[atlas.charts[i].proj[x]]
                for o, (i, x) in enumerate(gpd.objects)}
    return make_model(objs, arrows, units, inverse, compose_rows, edges, sorted(links), quotient,
                      name="fractions")


def isotropy(gpd, obj):
    """Isotropy group at an object given as (chart, sample) ids or an object id."""
    model = gpd if not isinstance(gpd, FractionsGroupoid) else to_model(gpd)
    x = obj if isinstance(obj, int) else gpd.objects.index(tuple(obj))
    return model_isotropy(model, x)


def inertia_components(gpd):
    model = to_model(gpd) if isinstance(gpd, FractionsGroupoid) else gpd
    return model_inertia(model)


def properness_report(gpd) -> dict:
    model = to_model(gpd) if isinstance(gpd, FractionsGroupoid) else gpd
    return fiber_sizes(model)


@dataclass(frozen=True)
class MoritaInvariants:
    quotient_points: int
    isotropy_labels: tuple      # per quotient point (sorted by name): sorted labels over its objects
    inertia_components: int

    def record(self):
        return {"quotient_points": self.quotient_points,
                "isotropy_labels": [list(x) for x in self.isotropy_labels],
                "inertia_components": self.inertia_components}


def morita_invariants(gpd) -> MoritaInvariants:
    """Invariants of a fractions groupoid or a finite model."""
    model = to_model(gpd) if isinstance(gpd, FractionsGroupoid) else gpd
    by_point = {}
    for x in range(len(model.objects)):
        by_point.setdefault(model.quotient[x], set()).add(iso_label(model_isotropy(model, x)))
    labels = tuple(tuple(sorted(by_point[q])) for q in sorted(by_point))
    return MoritaInvariants(len(by_point), labels, model_inertia(model).count)


def compare_invariants(a: MoritaInvariants, b: MoritaInvariants):
    """(verdict, field, left value, right value); verdict is 'equal' or 'differ'."""
    for name in ("quotient_points", "isotropy_labels", "inertia_components"):
        va, vb = getattr(a, name), getattr(b, name)
        if name == "isotropy_labels":
            va, vb = sorted(va), sorted(vb)
        if va != vb:
            return "differ", name, va, vb
    return "equal", None, None, None


def groupoid_report(atlas):
    """Everything the groupoid command runs; returns (report, groupoid, model)."""
    rep = Report("groupoid of fractions")
    cat = build_category(atlas)
    rep.extend(category_laws(cat))
    rep.extend(check_ore(cat))
    rep.extend(check_weak_cancellation(cat))
    gpd = build_groupoid(atlas, rep)
    rep.extend(groupoid_checks(gpd))
    rep.extend(witness_independence_check(gpd))
    model = to_model(gpd)
    rep.extend(isotropy_fiber_check(model))
    rep.add("groupoid.inertia_piece_axiom", True,
            "modeling axiom: loops on one span piece are joined in one inertia component")
    rep.add("groupoid.hausdorff", True, "no finite content; not checked")
    rep.info.update({
        "objects": len(gpd.objects),
        "spans": len(gpd.spans),
        "arrow_classes": gpd.size,
        "category_arrows": len(cat.arrows),
    })
    return rep, gpd, model
