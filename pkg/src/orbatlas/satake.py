"""Charts on finite sample sets, the support poset, and concrete embeddings.

A chart is a finite group acting (possibly with a kernel) on a finite set of
sample points, together with a projection onto a subset of a global finite
quotient.  Topology is replaced by declared flags; the embedding lemmas a
smooth model would guarantee are checked here as axioms of the finite model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .bimodule import Bimodule, classify, extract_hom, tensor_product, pair_map_on_classes
from .errors import OrbatlasError, PosetViolation
from .group_core import enumerate_homs, make_action, reduced_image
from .reports import Report

CANDIDATE_BOUND = 200_000


@dataclass(frozen=True, eq=False)
class Chart:
    name: str
    samples: tuple
    group: object
    action: object
    proj: tuple                 # quotient point id per sample
    connected: bool = True
    simply_connected: bool = True
    dimension: int = 0
    declared_support: frozenset = None
    reduced: object = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "reduced", reduced_image(self.action))

    @property
    def support(self):
        return frozenset(self.proj)

    @property
    def size(self):
        return len(self.samples)

    def reduce(self, g):
        return self.reduced.quotient.map[g]

    def perm(self, r):
        """Permutation of the samples for reduced element r."""
        return self.reduced.action.act[r]


def make_chart(name, samples, group, action_table, proj, **flags) -> Chart:
    action = make_action(group, len(samples), action_table)
    return Chart(name, tuple(samples), group, action, tuple(proj), **flags)


def validate_chart(chart, quotient_names=None) -> Report:
    rep = Report(f"chart {chart.name}")
    act, proj = chart.action, chart.proj
    bad = next(((g, x) for g in chart.group.elements for x in range(chart.size)
                if proj[act.act[g][x]] != proj[x]), None)
    rep.add("chart.projection_invariant", bad is None, "pi(g.x) = pi(x)", bad)

    fibers = {}
    for x, q in enumerate(proj):
        fibers.setdefault(q, set()).add(x)
    bad = None
    for q, fib in sorted(fibers.items()):
        orbit = set(act.orbit(min(fib)))
        if orbit != fib:
            name = quotient_names[q] if quotient_names else q
            bad = (name, sorted(chart.samples[x] for x in fib), sorted(chart.samples[x] for x in orbit))
            break
    rep.add("chart.fibers_are_orbits", bad is None, "fibers of pi are reduced-group orbits", bad)

    if chart.declared_support is not None:
        rep.add("chart.projection_onto_support", chart.declared_support == chart.support,
                "image of pi equals the declared support",
                sorted(chart.declared_support ^ chart.support) or None)
    else:
        rep.add("chart.projection_onto_support", True, "support is the image of pi")

    perms = chart.reduced.action.act
    rep.add("chart.reduced_effective", len(set(perms)) == len(perms),
            "distinct reduced elements act differently")
    return rep


@dataclass(frozen=True, eq=False)
class QuotientModel:
    points: tuple
    supports: tuple          # frozenset of point ids per chart

    def leq(self, i, j):
        return self.supports[i] <= self.supports[j]


def build_poset(model) -> list:
    """All (j, i) with Q_i inside Q_j, identities included, sorted."""
    seen = {}
    for i, s in enumerate(model.supports):
        if s in seen:
            raise PosetViolation(f"charts {seen[s]} and {i} have the same support", witness=(seen[s], i))
        seen[s] = i
    n = len(model.supports)
    return [(j, i) for i in range(n) for j in range(n) if model.supports[i] <= model.supports[j]]


# --- concrete embeddings -------------------------------------------------------------

def compose_maps(f, g):
    """f after g."""
    return tuple(f[x] for x in g)


def derive_embeddings(src, tgt, same=False) -> list:
    """Concrete embeddings src -> tgt.

    A chart's embeddings into itself are its own symmetries.  Between distinct
    charts these are the injective, projection-compatible maps that are
    equivariant for some injective hom of reduced groups.
    """
    if same:
        return sorted(tgt.perm(r) for r in tgt.reduced.group.elements)
    options = [[y for y in range(tgt.size) if tgt.proj[y] == src.proj[x]] for x in range(src.size)]
    count = 1
    for o in options:
        count *= len(o)
    if count > CANDIDATE_BOUND:
        raise OrbatlasError(f"{count} candidate maps {src.name} -> {tgt.name}; declare embeddings explicitly")
    Gs, Gt = src.reduced, tgt.reduced
    homs = enumerate_homs(Gs.group, Gt.group, injective=True)
    out = []
    for f in product(*options):
        if len(set(f)) != len(f):
            continue
        for phi in homs:
            if all(f[Gs.action.act[r][x]] == Gt.action.act[phi.map[r]][f[x]]
                   for r in Gs.group.elements for x in range(src.size)):
                out.append(tuple(f))
                break
    return sorted(out)


@dataclass(eq=False)
class SatakeLayer:
    quotient: QuotientModel
    charts: tuple
    arrows: tuple
    con: dict                           # (j, i) -> sorted tuple of maps
    declared: frozenset = frozenset()   # arrows whose embeddings were declared
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        self._index = {a: {f: k for k, f in enumerate(fs)} for a, fs in self.con.items()}

    def leq(self, i, j):
        return self.quotient.leq(i, j)

    def con_index(self, j, i, f):
        return self._index[(j, i)].get(tuple(f))

    def below(self, i):
        return [l for (a, l) in self.arrows if a == i]

    def above(self, i):
        return [j for (j, a) in self.arrows if a == i]

    def chart_index(self, name):
        return next(k for k, c in enumerate(self.charts) if c.name == name)


def build_layer(points, charts, declared=None) -> SatakeLayer:
    """declared: optional {(j, i): [map, ...]} overriding derived embedding sets."""
    charts = tuple(charts)
    model = QuotientModel(tuple(points), tuple(c.support for c in charts))
    arrows = tuple(build_poset(model))
    declared = declared or {}
    con = {}
    for (j, i) in arrows:
        if (j, i) in declared:
            con[(j, i)] = tuple(sorted(set(tuple(f) for f in declared[(j, i)])))
        else:
            con[(j, i)] = tuple(derive_embeddings(charts[i], charts[j], same=(i == j)))
    return SatakeLayer(model, charts, arrows, con, frozenset(declared))


def maps_module(maps, src, tgt):
    """(bimodule over the reduced groups or None, classify report, closure witness).

    ``maps`` is a sorted list of sample maps src -> tgt; the actions are
    composition with chart symmetries.
    """
    index = {f: k for k, f in enumerate(maps)}
    Rt, Rs = tgt.reduced, src.reduced
    left, right = [], []
    for r in Rt.group.elements:
        row = []
        for f in maps:
            k = index.get(compose_maps(tgt.perm(r), f))
            if k is None:
                return None, None, ("left", r, f)
            row.append(k)
        left.append(tuple(row))
    for f in maps:
        row = []
        for r in Rs.group.elements:
            k = index.get(compose_maps(f, src.perm(r)))
            if k is None:
                return None, None, ("right", f, r)
            row.append(k)
        right.append(tuple(row))
    B = Bimodule(Rt.group, Rs.group, tuple(left), tuple(right), tuple(str(f) for f in maps))
    return B, classify(B), None


def con_module(layer, arrow):
    """maps_module for the concrete embeddings of one poset arrow."""
    j, i = arrow
    return maps_module(list(layer.con[arrow]), layer.charts[i], layer.charts[j])


def images_meet(f, g):
    return not set(f).isdisjoint(g)


def validate_satake(layer) -> Report:
    rep = Report("concrete layer")
    Q, charts, con = layer.quotient, layer.charts, layer.con
    n = len(charts)
    names = Q.points
    rep.add("satake.poset", True, "supports are pairwise distinct")

    # local compatibility of supports
    for u in range(n):
        for v in range(u + 1, n):
            for q in sorted(Q.supports[u] & Q.supports[v]):
                ok = any(q in Q.supports[w] and Q.supports[w] <= Q.supports[u] & Q.supports[v]
                         for w in range(n))
                rep.add("satake.local_compatibility", ok, f"{charts[u].name} and {charts[v].name} at {names[q]}",
                        None if ok else (charts[u].name, charts[v].name, names[q]))

    modules = {}
    for arrow in layer.arrows:
        j, i = arrow
        tag = f"{charts[i].name}->{charts[j].name}"
        ci, cj = charts[i], charts[j]
        for f in con[arrow]:
            ok = len(set(f)) == len(f) and all(cj.proj[f[x]] == ci.proj[x] for x in range(ci.size))
            rep.add("satake.con_projection", ok, tag, None if ok else (tag, list(f)))
        B, cls, closure = con_module(layer, arrow)
        if B is None:
            rep.fail("satake.con_atlas_bimodule", f"{tag}: not closed under the {closure[0]} action",
                     (tag, closure[0], closure[1], list(closure[2])))
            continue
        first = cls.first_failure()
        rep.add("satake.con_atlas_bimodule", cls.ok, tag, None if cls.ok else (tag,) + tuple(first))
        modules[arrow] = B
        if cls.torsor:
            Ri, Rj = charts[i].reduced, charts[j].reduced
            for k, f in enumerate(con[arrow]):
                psi = extract_hom(B, k)
                bad = next(((r, x) for r in Ri.group.elements for x in range(charts[i].size)
                            if f[Ri.action.act[r][x]] != Rj.action.act[psi.map[r]][f[x]]), None)
                rep.add("satake.con_equivariant", bad is None, tag,
                        None if bad is None else (tag, list(f), bad))

        # overlap property
        for a, f in enumerate(con[arrow]):
            for g in con[arrow][a + 1:]:
                if images_meet(f, g):
                    ok = any(compose_maps(g, ci.perm(r)) == f for r in ci.reduced.group.elements)
                    rep.add("satake.overlap", ok, tag, None if ok else (tag, list(f), list(g)))

    # composition cells, factorization
    for (j, i) in layer.arrows:
        for k in layer.above(j):
            tag = f"{charts[i].name}->{charts[j].name}->{charts[k].name}"
            inner, outer, full = con[(j, i)], con[(k, j)], con[(k, i)]
            bad = next(((list(nu), list(lam)) for nu in outer for lam in inner
                        if layer.con_index(k, i, compose_maps(nu, lam)) is None), None)
            if bad is not None:
                rep.fail("satake.con_composition", f"{tag}: composite is not a concrete embedding", (tag,) + bad)
            elif (k, j) in modules and (j, i) in modules:
                tp = tensor_product(modules[(k, j)], modules[(j, i)])
                cmap, unbalanced = pair_map_on_classes(
                    tp, lambda y, x: layer.con_index(k, i, compose_maps(outer[y], inner[x])))
                ok = unbalanced is None and sorted(cmap) == list(range(len(full)))
                rep.add("satake.con_composition", ok, tag, None if ok else (tag, unbalanced))
            for lk in full:
                for lkj in outer:
                    if images_meet(lk, lkj):
                        ok = any(compose_maps(lkj, lji) == lk for lji in inner)
                        rep.add("satake.factorization", ok, tag,
                                None if ok else (tag, list(lk), list(lkj)))
    _check_strong_compatibility(layer, rep)
    return rep


def _check_strong_compatibility(layer, rep):
    charts, con, Q = layer.charts, layer.con, layer.quotient
    n = len(charts)
    for c3 in range(n):
        below = layer.below(c3)
        for a in below:
            for b in below:
                if b < a:
                    continue
                lowers = [w for w in range(n) if layer.leq(w, a) and layer.leq(w, b)]
                for f31 in con[(c3, a)]:
                    for f32 in con[(c3, b)]:
                        for x1 in range(charts[a].size):
                            for x2 in range(charts[b].size):
                                if f31[x1] != f32[x2]:
                                    continue
                                ok = any(
                                    f14[y] == x1 and f24[y] == x2 and compose_maps(f31, f14) == compose_maps(f32, f24)
                                    for w in lowers for f14 in con[(a, w)] for f24 in con[(b, w)]
                                    for y in range(charts[w].size))
                                tag = f"{charts[a].name},{charts[b].name}->{charts[c3].name}"
                                rep.add("satake.strong_compatibility", ok, tag,
                                        None if ok else (tag, list(f31), charts[a].samples[x1],
                                                         list(f32), charts[b].samples[x2]))
