"""Atlases: abstract embedding modules over a concrete chart layer.

For every support inclusion i <= j the atlas stores a bimodule
``abst[(j, i)]`` (left G_j, right G_i), for every chain i <= j <= k a
composition table ``comp_cells[(k, j, i)][nu][lam]``, unit cells ``unit[i][g]``,
and ``realization[(j, i)][lam]``: the index of the concrete embedding underlying an
abstract one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bimodule import (Bimodule, check_bimodule_map, classify, hom_to_bimodule,
                       induced_hom, law_failures, pair_map_on_classes,
                       tensor_product, trivial_bimodule)
from .errors import (KernelIsoFailure, NoOverlap, NonUnique, NoSolution,
                     NoWitness, OrbatlasError)
from .group_core import kernel
from .reports import Report
from .satake import compose_maps


@dataclass(eq=False)
class Atlas:
    layer: object
    abst: dict
    comp_cells: dict
    unit: dict
    realization: dict
    _restrictions: dict = field(default=None, repr=False)

    @property
    def charts(self):
        return self.layer.charts

    @property
    def arrows(self):
        return self.layer.arrows

    def compose(self, k, j, i, nu, lam):
        return self.comp_cells[(k, j, i)][nu][lam]

    def unit_elt(self, i):
        c = self.charts[i]
        return self.unit[i][c.group.identity]

    def realization_map(self, j, i, lam):
        return self.layer.con[(j, i)][self.realization[(j, i)][lam]]

    def triples(self):
        """Composable (k, j, i), i <= j <= k, sorted."""
        return [(k, j, i) for (j, i) in self.arrows for k in self.layer.above(j)]

    def chains4(self):
        return [(l, k, j, i) for (k, j, i) in self.triples() for l in self.layer.above(k)]

    def restrictions(self):
        """(i, x) -> [(l, y, kappa)] with kappa in Abst(i, l) carrying y to x."""
        if self._restrictions is None:
            out = {}
            for (i, l) in self.arrows:
                for kappa in self.abst[(i, l)].carrier:
                    f = self.realization_map(i, l, kappa)
                    for y, x in enumerate(f):
                        out.setdefault((i, x), []).append((l, y, kappa))
            self._restrictions = out
        return self._restrictions


# --- construction with implied cells ------------------------------------------------

def complete_atlas(layer, abst=None, comp_cells=None, unit=None, realization=None) -> Atlas:
    """Fill in every cell the data leaves implicit.

    Missing self-modules default to the chart group acting on itself with the
    identity unit cell; composition with such a module is the module action.
    A missing realization table is allowed when the concrete side is a singleton or
    the module is a default self-module.
    """
    abst, comp_cells = dict(abst or {}), dict(comp_cells or {})
    unit, realization = dict(unit or {}), dict(realization or {})
    charts = layer.charts
    default_self = set()
    for i, c in enumerate(charts):
        if (i, i) not in abst:
            abst[(i, i)] = trivial_bimodule(c.group)
            default_self.add(i)
            unit.setdefault(i, tuple(c.group.elements))
            if (i, i) not in realization:
                realization[(i, i)] = tuple(layer.con_index(i, i, c.perm(c.reduce(g))) for g in c.group.elements)
        elif i not in unit:
            raise OrbatlasError(f"chart {c.name} declares its self-module without a unit cell")
    for arrow in layer.arrows:
        if arrow not in abst:
            j, i = arrow
            raise OrbatlasError(f"no abstract embedding module for {charts[i].name}->{charts[j].name}")
        if arrow not in realization:
            if len(layer.con[arrow]) == 1:
                realization[arrow] = (0,) * abst[arrow].size
            else:
                j, i = arrow
                raise OrbatlasError(f"no realization table for {charts[i].name}->{charts[j].name}")
    for (j, i) in layer.arrows:
        for k in layer.above(j):
            if (k, j, i) in comp_cells:
                continue
            outer, inner = abst[(k, j)], abst[(j, i)]
            if j == i and i in default_self:
                comp_cells[(k, j, i)] = tuple(tuple(outer.right[nu][g] for g in inner.carrier) for nu in outer.carrier)
            elif k == j and j in default_self:
                comp_cells[(k, j, i)] = tuple(tuple(inner.left[h][lam] for lam in inner.carrier) for h in outer.carrier)
            else:
                raise OrbatlasError(f"no composition cell for "
                                    f"{charts[i].name}->{charts[j].name}->{charts[k].name}")
    return Atlas(layer, abst, comp_cells, unit, realization)


def canonical_atlas(layer) -> Atlas:
    """Effective charts only: abstract embeddings are the concrete ones."""
    from .satake import con_module
    abst, realization = {}, {}
    for c in layer.charts:
        if len(kernel(c.reduced.quotient)) != 1:
            raise OrbatlasError(f"chart {c.name} is not effective")
    for arrow in layer.arrows:
        j, i = arrow
        B, cls, closure = con_module(layer, arrow)
        if B is None:
            raise OrbatlasError("concrete embeddings are not closed under the chart actions", witness=closure)
        ci, cj = layer.charts[i], layer.charts[j]
        left = tuple(B.left[cj.reduce(h)] for h in cj.group.elements)
        right = tuple(tuple(row[ci.reduce(g)] for g in ci.group.elements) for row in B.right)
        abst[arrow] = Bimodule(cj.group, ci.group, left, right, B.labels)
        realization[arrow] = tuple(range(B.size))
    comp_cells = {}
    for (j, i) in layer.arrows:
        for k in layer.above(j):
            inner, outer = layer.con[(j, i)], layer.con[(k, j)]
            comp_cells[(k, j, i)] = tuple(tuple(layer.con_index(k, i, compose_maps(nu, lam)) for lam in inner)
                                     for nu in outer)
    unit = {i: tuple(layer.con_index(i, i, c.perm(c.reduce(g))) for g in c.group.elements)
            for i, c in enumerate(layer.charts)}
    return Atlas(layer, abst, comp_cells, unit, realization)


# --- verification ------------------------------------------------------------------------

def _tag(atlas, *ids):
    return "->".join(atlas.charts[c].name for c in reversed(ids))


def _table_ok(table, rows, cols, size):
    try:
        return (len(table) == rows and all(len(r) == cols for r in table)
                and all(0 <= v < size for r in table for v in r))
    except TypeError:
        return False


def verify_atlas(atlas) -> Report:
    rep = Report("atlas")
    charts, layer = atlas.charts, atlas.layer
    good = set()
    for arrow in atlas.arrows:
        j, i = arrow
        B = atlas.abst[arrow]
        tag = _tag(atlas, j, i)
        bad = law_failures(B)
        rep.add("atlas.abst_bimodule_laws", not bad, tag, None if not bad else (tag,) + bad[0])
        if bad:
            continue
        cls = classify(B)
        rep.add("atlas.abst_atlas_bimodule", cls.ok, tag, None if cls.ok else (tag,) + cls.first_failure())
        if cls.ok:
            good.add(arrow)

    _check_units(atlas, rep, good)
    _check_comp_cells(atlas, rep, good)
    _check_realization(atlas, rep, good)
    return rep


def _check_units(atlas, rep, good):
    for i, c in enumerate(atlas.charts):
        B, G, u = atlas.abst[(i, i)], c.group, atlas.unit[i]
        if (i, i) not in good or not _table_ok([u], 1, G.order, B.size):
            rep.fail("atlas.unit_iso", c.name, (c.name, "unit cell malformed or module invalid"))
            continue
        bij = sorted(u) == list(B.carrier)
        bad = next(((h, g, g2) for h in G.elements for g in G.elements for g2 in G.elements
                    if u[G.mul(G.mul(h, g), g2)] != B.right[B.left[h][u[g]]][g2]), None)
        rep.add("atlas.unit_iso", bij and bad is None, c.name,
                None if bij and bad is None else (c.name, "not bijective" if not bij else bad))


def _check_comp_cells(atlas, rep, good):
    charts = atlas.charts
    cells_ok = set()
    for (k, j, i) in atlas.triples():
        tag = _tag(atlas, k, j, i)
        if not {(k, j), (j, i), (k, i)} <= good:
            rep.fail("atlas.cells_balanced", f"{tag}: skipped, a module is invalid", tag)
            continue
        outer, inner, full = atlas.abst[(k, j)], atlas.abst[(j, i)], atlas.abst[(k, i)]
        t = atlas.comp_cells.get((k, j, i))
        if not _table_ok(t, outer.size, inner.size, full.size):
            rep.fail("atlas.cells_balanced", f"{tag}: table malformed", tag)
            continue
        Gi, Gj, Gk = charts[i].group, charts[j].group, charts[k].group
        bad = next(((nu, h, lam) for nu in outer.carrier for h in Gj.elements for lam in inner.carrier
                    if t[outer.right[nu][h]][lam] != t[nu][inner.left[h][lam]]), None)
        rep.add("atlas.cells_balanced", bad is None, tag, None if bad is None else (tag, bad))
        bad2 = next((("left", h, nu, lam) for h in Gk.elements for nu in outer.carrier for lam in inner.carrier
                     if t[outer.left[h][nu]][lam] != full.left[h][t[nu][lam]]), None)
        if bad2 is None:
            bad2 = next((("right", nu, lam, g) for nu in outer.carrier for lam in inner.carrier for g in Gi.elements
                         if t[nu][inner.right[lam][g]] != full.right[t[nu][lam]][g]), None)
        rep.add("atlas.cells_equivariant", bad2 is None, tag, None if bad2 is None else (tag, bad2))
        if bad is None:
            tp = tensor_product(outer, inner)
            cmap, _ = pair_map_on_classes(tp, lambda y, x: t[y][x])
            ok = sorted(cmap) == list(full.carrier)
            rep.add("atlas.cells_bijective", ok, tag, None if ok else (tag, cmap))
            if ok and bad2 is None:
                cells_ok.add((k, j, i))

    for (l, k, j, i) in atlas.chains4():
        need = {(l, k, j), (k, j, i), (l, k, i), (l, j, i)}
        tag = _tag(atlas, l, k, j, i)
        if not need <= cells_ok:
            rep.fail("atlas.pentagon", f"{tag}: skipped, a composition cell is invalid", tag)
            continue
        bad = next(((a, b, c) for a in atlas.abst[(l, k)].carrier for b in atlas.abst[(k, j)].carrier
                    for c in atlas.abst[(j, i)].carrier
                    if atlas.compose(l, k, i, a, atlas.compose(k, j, i, b, c))
                    != atlas.compose(l, j, i, atlas.compose(l, k, j, a, b), c)), None)
        rep.add("atlas.pentagon", bad is None, tag, None if bad is None else (tag, bad))

    for (j, i) in atlas.arrows:
        if (j, i, i) not in cells_ok or (j, j, i) not in cells_ok or (j, i) not in good:
            continue
        tag = _tag(atlas, j, i)
        ei, ej = atlas.unit_elt(i), atlas.unit_elt(j)
        bad = next((lam for lam in atlas.abst[(j, i)].carrier
                    if atlas.compose(j, i, i, lam, ei) != lam or atlas.compose(j, j, i, ej, lam) != lam), None)
        rep.add("atlas.unit_coherence", bad is None, tag, None if bad is None else (tag, bad))


def _check_realization(atlas, rep, good):
    charts, layer = atlas.charts, atlas.layer
    realization_ok = set()
    for arrow in atlas.arrows:
        j, i = arrow
        tag = _tag(atlas, j, i)
        B, con = atlas.abst[arrow], layer.con[arrow]
        t = atlas.realization.get(arrow)
        if arrow not in good or not _table_ok([t], 1, B.size, len(con)):
            rep.fail("atlas.realization_surjective", f"{tag}: skipped, module or table invalid", tag)
            continue
        ci, cj = charts[i], charts[j]
        missing = sorted(set(range(len(con))) - set(t))
        rep.add("atlas.realization_surjective", not missing, tag, (tag, [list(con[m]) for m in missing]) if missing else None)
        bad = next((("right", lam, g) for lam in B.carrier for g in ci.group.elements
                    if con[t[B.right[lam][g]]] != compose_maps(con[t[lam]], ci.perm(ci.reduce(g)))), None)
        if bad is None:
            bad = next((("left", h, lam) for h in cj.group.elements for lam in B.carrier
                        if con[t[B.left[h][lam]]] != compose_maps(cj.perm(cj.reduce(h)), con[t[lam]])), None)
        rep.add("atlas.realization_equivariant", bad is None, tag, None if bad is None else (tag, bad))
        orbit_of = {}
        for lam in B.carrier:
            orbit_of.setdefault(t[lam], set()).add(lam)
        bad3 = None
        for fiber in orbit_of.values():
            lam = min(fiber)
            orb = {B.right[lam][g] for g in ci.group.elements}
            if not fiber <= orb:
                bad3 = (tag, lam, min(fiber - orb))
                break
        rep.add("atlas.realization_kernel_transitive", bad3 is None, tag, bad3)
        if bad is None and not missing:
            realization_ok.add(arrow)
            _check_reduction_cell(atlas, arrow, rep)
            _check_kernel_iso(atlas, arrow, rep)

    for i, c in enumerate(charts):
        if (i, i) in realization_ok:
            ok = atlas.realization_map(i, i, atlas.unit_elt(i)) == tuple(range(c.size))
            rep.add("atlas.realization_unit", ok, c.name, None if ok else c.name)
    for (k, j, i) in atlas.triples():
        if not {(k, j), (j, i), (k, i)} <= realization_ok:
            continue
        tag = _tag(atlas, k, j, i)
        t = atlas.comp_cells.get((k, j, i))
        if not _table_ok(t, atlas.abst[(k, j)].size, atlas.abst[(j, i)].size, atlas.abst[(k, i)].size):
            continue
        bad = next(((nu, lam) for nu in atlas.abst[(k, j)].carrier for lam in atlas.abst[(j, i)].carrier
                    if atlas.realization_map(k, i, t[nu][lam])
                    != compose_maps(atlas.realization_map(k, j, nu), atlas.realization_map(j, i, lam))), None)
        rep.add("atlas.realization_composition", bad is None, tag, None if bad is None else (tag, bad))


def _check_reduction_cell(atlas, arrow, rep):
    """Materialize the comparison cell between the two tensor composites and check it."""
    j, i = arrow
    ci, cj = atlas.charts[i], atlas.charts[j]
    B, con = atlas.abst[arrow], atlas.layer.con[arrow]
    from .satake import con_module
    C, _, _ = con_module(atlas.layer, arrow)
    tag = _tag(atlas, j, i)
    if C is None:
        rep.fail("atlas.reduction_cell", f"{tag}: concrete module not closed", tag)
        return
    src = tensor_product(hom_to_bimodule(cj.reduced.quotient), B)       # G_i -|-> G_j^red
    tgt = tensor_product(C, hom_to_bimodule(ci.reduced.quotient))       # G_i -|-> G_j^red
    pre = {}
    for h in cj.group.elements:
        pre.setdefault(cj.reduce(h), h)
    e_red = ci.reduced.group.identity
    t = atlas.realization[arrow]

    def cell(r, lam):
        return tgt.cls(t[B.left[pre[r]][lam]], e_red)

    cmap, unbalanced = pair_map_on_classes(src, cell)
    if unbalanced is not None:
        rep.fail("atlas.reduction_cell", f"{tag}: not well defined", (tag, unbalanced))
        return
    eq = check_bimodule_map(cmap, src.module, tgt.module)
    surj = sorted(set(cmap)) == list(tgt.module.carrier)
    rep.add("atlas.reduction_cell", eq.ok and surj, tag, None if eq.ok and surj else (tag, "equivariance" if not eq.ok else "surjectivity"))


def _check_kernel_iso(atlas, arrow, rep):
    j, i = arrow
    tag = _tag(atlas, j, i)
    for lam in atlas.abst[arrow].carrier:
        try:
            embedding_hom(atlas, j, i, lam)
        except (KernelIsoFailure, OrbatlasError) as exc:
            rep.fail("atlas.kernel_iso", f"{tag}: {exc}", (tag, lam))
            return
    rep.add("atlas.kernel_iso", True, tag)


# --- derived operations -----------------------------------------------------------------

def realization(atlas, j, i, lam):
    return atlas.realization_map(j, i, lam)


def embedding_hom(atlas, j, i, lam):
    """Induced hom G_i -> G_j at lam, checked to match the chart kernels."""
    hom = induced_hom(atlas.abst[(j, i)], lam)
    ci, cj = atlas.charts[i], atlas.charts[j]
    ki, kj = kernel(ci.reduced.quotient), kernel(cj.reduced.quotient)
    if sorted(hom.map[g] for g in ki) != sorted(kj):
        raise KernelIsoFailure("induced hom does not carry kernel onto kernel",
                               witness=(ci.name, cj.name, lam))
    return hom


def left_cancel_check(atlas) -> Report:
    rep = Report("left cancellation")
    for (k, j, i) in atlas.triples():
        bad = None
        for lam in atlas.abst[(k, j)].carrier:
            seen = {}
            for mu in atlas.abst[(j, i)].carrier:
                v = atlas.compose(k, j, i, lam, mu)
                if v in seen:
                    bad = (lam, seen[v], mu)
                    break
                seen[v] = mu
            if bad:
                break
        tag = _tag(atlas, k, j, i)
        rep.add("atlas.left_cancel", bad is None, tag, None if bad is None else (tag, bad))
    return rep


def right_cancel_check(atlas) -> Report:
    rep = Report("right cancellation")
    for (k, j, i) in atlas.triples():
        bad = None
        for mu in atlas.abst[(j, i)].carrier:
            seen = {}
            for lam in atlas.abst[(k, j)].carrier:
                v = atlas.compose(k, j, i, lam, mu)
                if v in seen:
                    bad = (seen[v], lam, mu)
                    break
                seen[v] = lam
            if bad:
                break
        tag = _tag(atlas, k, j, i)
        rep.add("atlas.right_cancel", bad is None, tag, None if bad is None else (tag, bad))
    return rep


def interpolate(atlas, k, j, i, nu, lam):
    """The unique element of Abst(j, i) whose composite with nu is lam."""
    if (j, i) not in atlas.abst:
        raise NoOverlap(f"{atlas.charts[i].name} is not below {atlas.charts[j].name}")
    if set(atlas.realization_map(k, i, lam)).isdisjoint(atlas.realization_map(k, j, nu)):
        raise NoOverlap("images do not meet", witness=(nu, lam))
    sols = [kap for kap in atlas.abst[(j, i)].carrier if atlas.compose(k, j, i, nu, kap) == lam]
    if not sols:
        raise NoSolution("no interpolating embedding", witness=(_tag(atlas, k, j, i), nu, lam))
    if len(sols) > 1:
        raise NonUnique("several interpolating embeddings", witness=(_tag(atlas, k, j, i), nu, lam, sols))
    return sols[0]


def interpolation_check(atlas) -> Report:
    rep = Report("interpolation")
    for (k, j, i) in atlas.triples():
        tag = _tag(atlas, k, j, i)
        for nu in atlas.abst[(k, j)].carrier:
            for lam in atlas.abst[(k, i)].carrier:
                try:
                    interpolate(atlas, k, j, i, nu, lam)
                except NoOverlap:
                    continue
                except (NoSolution, NonUnique) as exc:
                    rep.fail("atlas.interpolation", f"{tag}: {exc}", exc.witness)
                    continue
                rep.add("atlas.interpolation", True, tag)
    return rep


def strong_compat_witnesses(atlas, c3, c1, l31, x1, c2, l32, x2):
    """Every (l, y, k14, k24) joining (l31 at x1) and (l32 at x2)."""
    res = atlas.restrictions()
    second = {}
    for (l, y, k24) in res.get((c2, x2), ()):
        second.setdefault((l, y), []).append(k24)
    out = []
    for (l, y, k14) in res.get((c1, x1), ()):
        for k24 in second.get((l, y), ()):
            if atlas.compose(c3, c1, l, l31, k14) == atlas.compose(c3, c2, l, l32, k24):
                out.append((l, y, k14, k24))
    return out


def strong_compat_witness(atlas, c3, c1, l31, x1, c2, l32, x2):
    if atlas.realization_map(c3, c1, l31)[x1] != atlas.realization_map(c3, c2, l32)[x2]:
        raise NoOverlap("the two embeddings do not meet at the given points")
    found = strong_compat_witnesses(atlas, c3, c1, l31, x1, c2, l32, x2)
    if not found:
        raise NoWitness("no common restriction", witness=(c3, c1, l31, x1, c2, l32, x2))
    return min(found)


def strong_compat_check(atlas) -> Report:
    rep = Report("strong compatibility")
    charts = atlas.charts
    for c3 in range(len(charts)):
        below = atlas.layer.below(c3)
        for c1 in below:
            for c2 in below:
                tag = f"{charts[c1].name},{charts[c2].name}->{charts[c3].name}"
                bad = None
                for l31 in atlas.abst[(c3, c1)].carrier:
                    f31 = atlas.realization_map(c3, c1, l31)
                    for l32 in atlas.abst[(c3, c2)].carrier:
                        f32 = atlas.realization_map(c3, c2, l32)
                        for x1 in range(charts[c1].size):
                            for x2 in range(charts[c2].size):
                                if f31[x1] == f32[x2] and not strong_compat_witnesses(
                                        atlas, c3, c1, l31, x1, c2, l32, x2):
                                    bad = bad or (tag, l31, charts[c1].samples[x1], l32, charts[c2].samples[x2])
                rep.add("atlas.strong_compat_witness", bad is None, tag, bad)
    return rep


def theorem_checks(atlas) -> Report:
    rep = Report("derived lemmas")
    for chk in (left_cancel_check, right_cancel_check, interpolation_check, strong_compat_check):
        rep.extend(chk(atlas))
    return rep


# --- isomorphism of atlases ---------------------------------------------------------------

@dataclass
class AtlasIsomorphism:
    charts: list        # chart of B per chart of A
    samples: list       # per chart of A, sample map into the matched chart
    groups: list        # GroupHom per chart of A
    modules: dict       # arrow of A -> carrier map


def find_atlas_isomorphism(A, B, bound=16):
    """An isomorphism of atlases matching charts by support and samples by name.

    Group isomorphisms must intertwine the chart actions; module maps must be
    equivariant along them and respect realization, unit and composition cells.
    """
    from itertools import product
    from .bimodule import iter_isomorphisms, transport
    from .group_core import isomorphisms

    qa, qb = A.layer.quotient.points, B.layer.quotient.points
    if sorted(qa) != sorted(qb) or len(A.charts) != len(B.charts):
        return None
    supp_b = {frozenset(qb[q] for q in c.support): k for k, c in enumerate(B.charts)}
    cmap, smaps = [], []
    for c in A.charts:
        k = supp_b.get(frozenset(qa[q] for q in c.support))
        if k is None:
            return None
        d = B.charts[k]
        idx = {s: p for p, s in enumerate(d.samples)}
        if set(idx) != set(c.samples):
            return None
        cmap.append(k)
        smaps.append(tuple(idx[s] for s in c.samples))

    choices = []
    for i, c in enumerate(A.charts):
        d, sm = B.charts[cmap[i]], smaps[i]
        ok = [phi for phi in isomorphisms(c.group, d.group)
              if all(d.action.act[phi.map[g]][sm[x]] == sm[c.action.act[g][x]]
                     for g in c.group.elements for x in range(c.size))]
        if not ok:
            return None
        choices.append(ok)

    arrows = list(A.arrows)
    for phis in product(*choices):
        cands = {}
        for (j, i) in arrows:
            target = B.abst[(cmap[j], cmap[i])]
            moved = transport(A.abst[(j, i)], phis[j], phis[i])
            good = []
            for f in iter_isomorphisms(moved, target, bound):
                if all(tuple(smaps[j][y] for y in A.realization_map(j, i, m))
                       == tuple(B.realization_map(cmap[j], cmap[i], f[m])[smaps[i][x]] for x in range(A.charts[i].size))
                       for m in A.abst[(j, i)].carrier):
                    good.append(f)
            if not good:
                break
            cands[(j, i)] = good
        else:
            found = _match_cells(A, B, cmap, phis, arrows, cands)
            if found is not None:
                return AtlasIsomorphism(cmap, smaps, list(phis), found)
    return None


def _match_cells(A, B, cmap, phis, arrows, cands):
    chosen = {}

    def consistent():
        for (k, j, i) in A.triples():
            if (k, j) in chosen and (j, i) in chosen and (k, i) in chosen:
                fo, fi, ff = chosen[(k, j)], chosen[(j, i)], chosen[(k, i)]
                for nu in A.abst[(k, j)].carrier:
                    for lam in A.abst[(j, i)].carrier:
                        if ff[A.compose(k, j, i, nu, lam)] != B.compose(cmap[k], cmap[j], cmap[i], fo[nu], fi[lam]):
                            return False
        for i in range(len(A.charts)):
            if (i, i) in chosen:
                f, G = chosen[(i, i)], A.charts[i].group
                if any(f[A.unit[i][g]] != B.unit[cmap[i]][phis[i].map[g]] for g in G.elements):
                    return False
        return True

    def search(k):
        if k == len(arrows):
            return dict(chosen)
        for f in cands[arrows[k]]:
            chosen[arrows[k]] = f
            if consistent():
                res = search(k + 1)
                if res is not None:
                    return res
            del chosen[arrows[k]]
        return None

    return search(0)
