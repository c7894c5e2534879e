"""Refinements of atlases and the bi-principal bundles they induce.

A refinement of a coarse atlas V by a fine atlas U gives, for every fine chart
i whose support sits inside a coarse chart j, a module ``modules[(j, i)]``
(left G_j of V, right G_i of U) of abstract cross-embeddings.  Each element
has a concrete sample map ``con[(j, i)][realization[(j, i)][lam]]``.  Mixed cells
attach embeddings of U on the right and embeddings of V on the left:

    fine_cells[(j, i, i2)][lam][nu]        lam in (j, i), nu in Abst_U(i, i2)
    coarse_cells[(j2, j, i)][theta][lam]   theta in Abst_V(j2, j), lam in (j, i)

Two refinements out of one fine atlas give a bundle: classes of pieces
``(i, j, lam, x, k, mu)`` on which G(V) acts on the right and G(W) on the left.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .atlas import find_atlas_isomorphism
from .bimodule import (Bimodule, classify, law_failures, pair_map_on_classes,
                       tensor_product)
from .errors import OrbatlasError, RefinementError
from .fractions import (build_groupoid, compare_invariants, morita_invariants,
                        object_name)
from .group_core import identity_hom
from .groupoid_model import (_compose_sections, extract_with_bisections,
                             extraction_checks, local_bisections)
from .reports import Report
from .satake import Chart, compose_maps, con_module, derive_embeddings, maps_module
from .unionfind import UnionFind

__all__ = [
    "RefinementData", "verify_refinement", "identity_refinement", "refinement_from_isomorphism",
    "refinement_from_groupoid", "compose_refinements", "cross_embeddings", "containments",
    "MoritaBundle", "build_morita_bundle", "check_biprincipality",
    "morita_invariants", "compare_invariants",
]


@dataclass(eq=False)
class RefinementData:
    fine: object
    coarse: object
    modules: dict           # (j, i) -> Bimodule, left G_j coarse, right G_i fine
    con: dict               # (j, i) -> sorted tuple of sample maps fine -> coarse
    realization: dict             # (j, i) -> con index per module element
    fine_cells: dict = field(default_factory=dict)
    coarse_cells: dict = field(default_factory=dict)
    name: str = ""

    def pairs(self):
        return sorted(self.modules)

    def realization_map(self, j, i, lam):
        return self.con[(j, i)][self.realization[(j, i)][lam]]

    def fine_compose(self, j, i, i2, lam, nu):
        return self.fine_cells[(j, i, i2)][lam][nu]

    def coarse_compose(self, j2, j, i, theta, lam):
        return self.coarse_cells[(j2, j, i)][theta][lam]

    def fine_triples(self):
        return [(j, i, i2) for (j, i) in self.pairs() for i2 in self.fine.layer.below(i)
                if (j, i2) in self.modules]

    def coarse_triples(self):
        return [(j2, j, i) for (j, i) in self.pairs() for j2 in self.coarse.layer.above(j)
                if (j2, i) in self.modules]

    def tag(self, j, i):
        return f"{self.fine.charts[i].name}=>{self.coarse.charts[j].name}"


def _supports(atlas):
    pts = atlas.layer.quotient.points
    return [frozenset(pts[q] for q in c.support) for c in atlas.charts]


def containments(fine, coarse):
    """All (j, i) with the support of fine chart i inside coarse chart j."""
    fs, cs = _supports(fine), _supports(coarse)
    return [(j, i) for i in range(len(fs)) for j in range(len(cs)) if fs[i] <= cs[j]]


def cross_embeddings(fine, coarse, j, i):
    """Derived concrete embeddings of fine chart i into coarse chart j."""
    src, tgt = fine.charts[i], coarse.charts[j]
    qidx = {q: k for k, q in enumerate(coarse.layer.quotient.points)}
    pts = fine.layer.quotient.points
    moved = Chart(src.name, src.samples, src.group, src.action, tuple(qidx[pts[p]] for p in src.proj))
    return derive_embeddings(moved, tgt)


def _index_maps(maps):
    con = tuple(sorted(set(maps)))
    idx = {f: k for k, f in enumerate(con)}
    return con, tuple(idx[f] for f in maps)


def _shape_ok(table, rows, cols, size):
    try:
        return (len(table) == rows and all(len(r) == cols for r in table)
                and all(isinstance(v, int) and 0 <= v < size for r in table for v in r))
    except TypeError:
        return False


# --- verification ---------------------------------------------------------------------

def verify_refinement(R) -> Report:
    rep = Report(f"refinement {R.name}".strip())
    U, V = R.fine, R.coarse
    pu, pv = sorted(U.layer.quotient.points), sorted(V.layer.quotient.points)
    rep.add("refinement.quotient_match", pu == pv, "quotient points", None if pu == pv else (pu, pv))
    if pu != pv:
        return rep
    fs, cs = _supports(U), _supports(V)
    want = containments(U, V)

    for i, c in enumerate(U.charts):
        if not any(fs[i] <= s for s in cs):
            rep.fail("refinement.supports", f"{c.name} lies in no coarse chart", c.name)
    for (j, i) in want:
        tag = R.tag(j, i)
        if (j, i) not in R.modules:
            rep.fail("refinement.supports", f"{tag}: no module", tag)
        else:
            n = len(R.con.get((j, i), ()))
            rep.add("refinement.supports", n > 0, tag, None if n else (tag, "no concrete embeddings"))
            try:
                derived = set(cross_embeddings(U, V, j, i))
            except OrbatlasError as exc:
                rep.fail("refinement.supports", f"{tag}: {exc}", tag)
                continue
            stray = [f for f in R.con.get((j, i), ()) if f not in derived]
            rep.add("refinement.supports", not stray, f"{tag}: concrete maps are embeddings",
                    None if not stray else (tag, list(stray[0])))
    for (j, i) in sorted(set(R.modules) - set(want)):
        rep.fail("refinement.supports", f"{R.tag(j, i)}: module over a non-inclusion", R.tag(j, i))

    for i in range(len(fs)):
        for j in range(len(cs)):
            for q in sorted(fs[i] & cs[j]):
                ok = any(q in fs[w] and fs[w] <= fs[i] & cs[j] for w in range(len(fs)))
                where = f"{U.charts[i].name} and {V.charts[j].name} at {q}"
                rep.add("refinement.cover_condition", ok, where,
                        None if ok else (U.charts[i].name, V.charts[j].name, q))

    good = set()
    for (j, i) in R.pairs():
        if (j, i) not in want:
            continue
        tag, B = R.tag(j, i), R.modules[(j, i)]
        if B.left_group != V.charts[j].group or B.right_group != U.charts[i].group:
            rep.fail("refinement.module_atlas_bimodule", f"{tag}: groups differ from the chart groups", tag)
            continue
        bad = law_failures(B)
        if bad:
            rep.fail("refinement.module_atlas_bimodule", tag, (tag,) + tuple(bad[0]))
            continue
        cls = classify(B)
        rep.add("refinement.module_atlas_bimodule", cls.ok, tag, None if cls.ok else (tag,) + tuple(cls.first_failure()))
        if cls.ok:
            good.add((j, i))

    realization_ok = _check_realization(R, rep, good)
    fine_ok, coarse_ok = _check_cells(R, rep, good)
    _check_concrete(R, rep)
    _check_squares(R, rep, realization_ok, fine_ok, coarse_ok)
    _check_pentagons(R, rep, fine_ok, coarse_ok)
    _check_units(R, rep, fine_ok, coarse_ok)
    return rep


def _check_realization(R, rep, good):
    U, V = R.fine, R.coarse
    ok_pairs = set()
    for (j, i) in sorted(good):
        tag, B = R.tag(j, i), R.modules[(j, i)]
        con, t = R.con.get((j, i), ()), R.realization.get((j, i))
        if not con or not _shape_ok([t], 1, B.size, len(con)):
            rep.fail("refinement.realization_surjective", f"{tag}: realization table malformed", tag)
            continue
        ci, cj = U.charts[i], V.charts[j]
        missing = sorted(set(range(len(con))) - set(t))
        rep.add("refinement.realization_surjective", not missing, tag,
                (tag, [list(con[m]) for m in missing]) if missing else None)
        bad = next((("right", lam, g) for lam in B.carrier for g in ci.group.elements
                    if con[t[B.right[lam][g]]] != compose_maps(con[t[lam]], ci.perm(ci.reduce(g)))), None)
        if bad is None:
            bad = next((("left", h, lam) for h in cj.group.elements for lam in B.carrier
                        if con[t[B.left[h][lam]]] != compose_maps(cj.perm(cj.reduce(h)), con[t[lam]])), None)
        rep.add("refinement.realization_equivariant", bad is None, tag, None if bad is None else (tag, bad))
        fibers = {}
        for lam in B.carrier:
            fibers.setdefault(t[lam], set()).add(lam)
        bad3 = None
        for fiber in fibers.values():
            lam = min(fiber)
            orb = {B.right[lam][g] for g in ci.group.elements}
            if not fiber <= orb:
                bad3 = (tag, lam, min(fiber - orb))
                break
        rep.add("refinement.realization_kernel_transitive", bad3 is None, tag, bad3)
        if bad is None and not missing:
            ok_pairs.add((j, i))
    return ok_pairs


def _cell(rep, key, tag, t, outer, inner, full, mid):
    """Balanced, equivariant, bijective on tensor classes.

    Returns (table well formed, all laws hold).
    """
    if not _shape_ok(t, outer.size, inner.size, full.size):
        rep.fail(key, f"{tag}: table malformed", tag)
        return False, False
    bad = next(((a, g, b) for a in outer.carrier for g in mid.elements for b in inner.carrier
                if t[outer.right[a][g]][b] != t[a][inner.left[g][b]]), None)
    if bad is None:
        bad = next((("left", h, a, b) for h in outer.left_group.elements for a in outer.carrier
                    for b in inner.carrier if t[outer.left[h][a]][b] != full.left[h][t[a][b]]), None)
    if bad is None:
        bad = next((("right", a, b, g) for a in outer.carrier for b in inner.carrier
                    for g in inner.right_group.elements if t[a][inner.right[b][g]] != full.right[t[a][b]][g]), None)
    if bad is None:
        cmap, _ = pair_map_on_classes(tensor_product(outer, inner), lambda y, x: t[y][x])
        if sorted(cmap) != list(full.carrier):
            bad = ("not bijective on classes", cmap)
    rep.add(key, bad is None, tag, None if bad is None else (tag, bad))
    return True, bad is None


def _check_cells(R, rep, good):
    U, V = R.fine, R.coarse
    fine_ok, coarse_ok = set(), set()    # well-formed tables; laws are reported separately
    for (j, i, i2) in R.fine_triples():
        tag = f"{U.charts[i2].name}->{R.tag(j, i)}"
        if not {(j, i), (j, i2)} <= good:
            rep.fail("refinement.fine_cell", f"{tag}: skipped, a module is invalid", tag)
            continue
        if _cell(rep, "refinement.fine_cell", tag, R.fine_cells.get((j, i, i2)), R.modules[(j, i)],
                 U.abst[(i, i2)], R.modules[(j, i2)], U.charts[i].group)[0]:
            fine_ok.add((j, i, i2))
    for (j2, j, i) in R.coarse_triples():
        tag = f"{R.tag(j, i)}->{V.charts[j2].name}"
        if not {(j, i), (j2, i)} <= good:
            rep.fail("refinement.coarse_cell", f"{tag}: skipped, a module is invalid", tag)
            continue
        if _cell(rep, "refinement.coarse_cell", tag, R.coarse_cells.get((j2, j, i)), V.abst[(j2, j)],
                 R.modules[(j, i)], R.modules[(j2, i)], V.charts[j].group)[0]:
            coarse_ok.add((j2, j, i))
    return fine_ok, coarse_ok


def _concrete(rep, tag, outer_maps, inner_maps, full_maps, outer, inner):
    """Composites of concrete maps land in full_maps, bijectively on tensor classes."""
    index = {f: k for k, f in enumerate(full_maps)}
    bad = next(((f, g) for f in outer_maps for g in inner_maps if compose_maps(f, g) not in index), None)
    if bad is None and (outer is None or inner is None):
        bad = "concrete maps are not closed under chart symmetries"
    if bad is None:
        cmap, _ = pair_map_on_classes(tensor_product(outer, inner),
                                      lambda y, x: index[compose_maps(outer_maps[y], inner_maps[x])])
        if sorted(cmap) != list(range(len(full_maps))):
            bad = ("not bijective on classes", cmap)
    rep.add("refinement.concrete_cells", bad is None, tag, None if bad is None else (tag, bad))


def _check_concrete(R, rep):
    U, V = R.fine, R.coarse
    cross = {}
    for (j, i) in R.pairs():
        if R.con.get((j, i)):
            cross[(j, i)] = maps_module(list(R.con[(j, i)]), U.charts[i], V.charts[j])[0]
    for (j, i, i2) in R.fine_triples():
        if (j, i) in cross and (j, i2) in cross:
            _concrete(rep, f"{U.charts[i2].name}->{R.tag(j, i)}", R.con[(j, i)], U.layer.con[(i, i2)],
                      R.con[(j, i2)], cross[(j, i)], con_module(U.layer, (i, i2))[0])
    for (j2, j, i) in R.coarse_triples():
        if (j, i) in cross and (j2, i) in cross:
            _concrete(rep, f"{R.tag(j, i)}->{V.charts[j2].name}", V.layer.con[(j2, j)], R.con[(j, i)],
                      R.con[(j2, i)], con_module(V.layer, (j2, j))[0], cross[(j, i)])


def _check_squares(R, rep, realization_ok, fine_ok, coarse_ok):
    U, V = R.fine, R.coarse
    for (j, i, i2) in sorted(fine_ok):
        if not {(j, i), (j, i2)} <= realization_ok:
            continue
        tag = f"{U.charts[i2].name}->{R.tag(j, i)}"
        bad = next(((lam, nu) for lam in R.modules[(j, i)].carrier for nu in U.abst[(i, i2)].carrier
                    if R.realization_map(j, i2, R.fine_compose(j, i, i2, lam, nu))
                    != compose_maps(R.realization_map(j, i, lam), U.realization_map(i, i2, nu))), None)
        rep.add("refinement.realization_square_fine", bad is None, tag, None if bad is None else (tag, bad))
    for (j2, j, i) in sorted(coarse_ok):
        if not {(j, i), (j2, i)} <= realization_ok:
            continue
        tag = f"{R.tag(j, i)}->{V.charts[j2].name}"
        bad = next(((th, lam) for th in V.abst[(j2, j)].carrier for lam in R.modules[(j, i)].carrier
                    if R.realization_map(j2, i, R.coarse_compose(j2, j, i, th, lam))
                    != compose_maps(V.realization_map(j2, j, th), R.realization_map(j, i, lam))), None)
        rep.add("refinement.realization_square_coarse", bad is None, tag, None if bad is None else (tag, bad))


def _check_pentagons(R, rep, fine_ok, coarse_ok):
    U, V = R.fine, R.coarse
    for (j, i, i2) in sorted(fine_ok):
        for i3 in U.layer.below(i2):
            if not {(j, i2, i3), (j, i, i3)} <= fine_ok:
                continue
            tag = f"{U.charts[i3].name}->{U.charts[i2].name}->{R.tag(j, i)}"
            bad = next(((lam, nu, nu2) for lam in R.modules[(j, i)].carrier for nu in U.abst[(i, i2)].carrier
                        for nu2 in U.abst[(i2, i3)].carrier
                        if R.fine_compose(j, i, i3, lam, U.compose(i, i2, i3, nu, nu2))
                        != R.fine_compose(j, i2, i3, R.fine_compose(j, i, i2, lam, nu), nu2)), None)
            rep.add("refinement.pentagon_fine", bad is None, tag, None if bad is None else (tag, bad))
    for (j2, j, i) in sorted(coarse_ok):
        for i2 in U.layer.below(i):
            if not ({(j, i, i2), (j2, i, i2)} <= fine_ok and (j2, j, i2) in coarse_ok):
                continue
            tag = f"{U.charts[i2].name}->{R.tag(j, i)}->{V.charts[j2].name}"
            bad = next(((th, lam, nu) for th in V.abst[(j2, j)].carrier for lam in R.modules[(j, i)].carrier
                        for nu in U.abst[(i, i2)].carrier
                        if R.coarse_compose(j2, j, i2, th, R.fine_compose(j, i, i2, lam, nu))
                        != R.fine_compose(j2, i, i2, R.coarse_compose(j2, j, i, th, lam), nu)), None)
            rep.add("refinement.pentagon_mixed", bad is None, tag, None if bad is None else (tag, bad))
        for j3 in V.layer.above(j2):
            if not {(j3, j2, i), (j3, j, i)} <= coarse_ok:
                continue
            tag = f"{R.tag(j, i)}->{V.charts[j2].name}->{V.charts[j3].name}"
            bad = next(((th2, th, lam) for th2 in V.abst[(j3, j2)].carrier for th in V.abst[(j2, j)].carrier
                        for lam in R.modules[(j, i)].carrier
                        if R.coarse_compose(j3, j2, i, th2, R.coarse_compose(j2, j, i, th, lam))
                        != R.coarse_compose(j3, j, i, V.compose(j3, j2, j, th2, th), lam)), None)
            rep.add("refinement.pentagon_coarse", bad is None, tag, None if bad is None else (tag, bad))


def _check_units(R, rep, fine_ok, coarse_ok):
    U, V = R.fine, R.coarse
    for (j, i) in R.pairs():
        B = R.modules[(j, i)]
        if (j, i, i) in fine_ok:
            G = U.charts[i].group
            bad = next(((lam, g) for lam in B.carrier for g in G.elements
                        if R.fine_compose(j, i, i, lam, U.unit[i][g]) != B.right[lam][g]), None)
            rep.add("refinement.unit_fine", bad is None, R.tag(j, i), None if bad is None else (R.tag(j, i), bad))
        if (j, j, i) in coarse_ok:
            H = V.charts[j].group
            bad = next(((h, lam) for h in H.elements for lam in B.carrier
                        if R.coarse_compose(j, j, i, V.unit[j][h], lam) != B.left[h][lam]), None)
            rep.add("refinement.unit_coarse", bad is None, R.tag(j, i), None if bad is None else (R.tag(j, i), bad))


# --- constructions --------------------------------------------------------------------------

def _identity_iso(atlas):
    from .atlas import AtlasIsomorphism
    return AtlasIsomorphism(list(range(len(atlas.charts))),
                            [tuple(range(c.size)) for c in atlas.charts],
                            [identity_hom(c.group) for c in atlas.charts],
                            {a: tuple(atlas.abst[a].carrier) for a in atlas.arrows})


def identity_refinement(atlas) -> RefinementData:
    """The atlas refining itself: modules are its embedding modules, cells its composition."""
    return refinement_from_isomorphism(atlas, atlas, _identity_iso(atlas), name="identity")


def refinement_from_isomorphism(fine, coarse, iso=None, name="isomorphism") -> RefinementData:
    """Refinement along an atlas isomorphism fine -> coarse.

    Modules are the coarse embedding modules with the fine group acting on the
    right through the chart isomorphism.
    """
    if iso is None:
        iso = find_atlas_isomorphism(fine, coarse)
        if iso is None:
            raise RefinementError("atlases are not isomorphic")
    U, V = fine, coarse
    modules, con, realization = {}, {}, {}
    for (j, i) in containments(U, V):
        ci, phi, sm = iso.charts[i], iso.groups[i], iso.samples[i]
        base = V.abst[(j, ci)]
        right = tuple(tuple(base.right[lam][phi.map[g]] for g in U.charts[i].group.elements)
                      for lam in base.carrier)
        modules[(j, i)] = Bimodule(base.left_group, U.charts[i].group, base.left, right, base.labels)
        maps = [tuple(V.realization_map(j, ci, lam)[sm[x]] for x in range(U.charts[i].size)) for lam in base.carrier]
        con[(j, i)], realization[(j, i)] = _index_maps(maps)
    R = RefinementData(U, V, modules, con, realization, name=name)
    for (j, i, i2) in R.fine_triples():
        psi, ci, ci2 = iso.modules[(i, i2)], iso.charts[i], iso.charts[i2]
        R.fine_cells[(j, i, i2)] = tuple(
            tuple(V.compose(j, ci, ci2, lam, psi[nu]) for nu in U.abst[(i, i2)].carrier)
            for lam in modules[(j, i)].carrier)
    for (j2, j, i) in R.coarse_triples():
        R.coarse_cells[(j2, j, i)] = tuple(
            tuple(V.compose(j2, j, iso.charts[i], th, lam) for lam in modules[(j, i)].carrier)
            for th in V.abst[(j2, j)].carrier)
    return R


def refinement_from_groupoid(model, fine_cover, coarse_cover, report=None) -> RefinementData:
    """Atlases on two covers of one model; modules are local bisections fine -> coarse."""
    rep = report if report is not None else Report("refinement extraction")
    U, gu, su = extract_with_bisections(model, fine_cover, rep)
    V, gv, sv = extract_with_bisections(model, coarse_cover, rep)
    modules, con, realization, secs = {}, {}, {}, {}
    for (j, i) in containments(U, V):
        module, ss = local_bisections(model, gu[i], gv[j])
        rep.extend(extraction_checks(model, gu[i], gv[j], module, ss))
        modules[(j, i)], secs[(j, i)] = module, ss
        vpos = {v: k for k, v in enumerate(gv[j].domain)}
        con[(j, i)], realization[(j, i)] = _index_maps([tuple(vpos[model.tgt[g]] for g in s) for s in ss])
    R = RefinementData(U, V, modules, con, realization, name=f"{model.name or 'model'} fine->coarse")
    for (j, i, i2) in R.fine_triples():
        idx = {s: p for p, s in enumerate(secs[(j, i2)])}
        upos = {u: p for p, u in enumerate(gu[i].domain)}
        R.fine_cells[(j, i, i2)] = tuple(
            tuple(idx[_compose_sections(model, upos, lam, nu)] for nu in su[(i, i2)])
            for lam in secs[(j, i)])
    for (j2, j, i) in R.coarse_triples():
        idx = {s: p for p, s in enumerate(secs[(j2, i)])}
        vpos = {v: p for p, v in enumerate(gv[j].domain)}
        R.coarse_cells[(j2, j, i)] = tuple(
            tuple(idx[_compose_sections(model, vpos, th, lam)] for lam in secs[(j, i)])
            for th in sv[(j2, j)])
    return R


def _same_atlas(A, B):
    if A is B:
        return True
    from .documents import atlas_to_document
    return atlas_to_document(A) == atlas_to_document(B)


def _descend(classes, members, fn, what):
    """Evaluate fn on every member of every class; it must be constant per class."""
    out = []
    for c in range(len(classes)):
        vals = {fn(m) for m in members[c]}
        if len(vals) != 1:
            raise RefinementError(f"{what} depends on the representative", witness=(classes[c], sorted(vals)))
        out.append(vals.pop())
    return out


def compose_refinements(first, second) -> RefinementData:
    """U refines V (first) and V refines W (second) give U refines W.

    The composite module over (k, i) glues theta x lam over every middle chart
    j between them, identifying (theta, eta.lam2) with (theta.eta, lam2) for
    embeddings eta of the middle atlas.
    """
    if not _same_atlas(first.coarse, second.fine):
        raise RefinementError("the middle atlases of the two refinements differ")
    U, V, W = first.fine, first.coarse, second.coarse
    modules, con, realization, lookup = {}, {}, {}, {}
    for (k, i) in containments(U, W):
        mids = [j for j in range(len(V.charts)) if (j, i) in first.modules and (k, j) in second.modules]
        elems = [(j, th, lam) for j in mids for th in second.modules[(k, j)].carrier
                 for lam in first.modules[(j, i)].carrier]
        if not elems:
            raise RefinementError(f"no middle chart between {U.charts[i].name} and {W.charts[k].name}",
                                  witness=(U.charts[i].name, W.charts[k].name))
        eid = {e: n for n, e in enumerate(elems)}
        uf = UnionFind(len(elems))
        for j in mids:
            for j2 in V.layer.below(j):
                if j2 not in mids:
                    continue
                for th in second.modules[(k, j)].carrier:
                    for eta in V.abst[(j, j2)].carrier:
                        for lam2 in first.modules[(j2, i)].carrier:
                            uf.union(eid[(j, th, first.coarse_compose(j, j2, i, eta, lam2))],
                                     eid[(j2, second.fine_compose(k, j, j2, th, eta), lam2)])
        ids, reps = uf.classes()
        members = [[] for _ in reps]
        for n, e in enumerate(elems):
            members[ids[n]].append(e)
        cls = {e: ids[n] for n, e in enumerate(elems)}
        classes = [elems[r] for r in reps]
        where = f"composite module {U.charts[i].name}=>{W.charts[k].name}"
        left = tuple(tuple(_descend(classes, members,
                                    lambda e, h=h: cls[(e[0], second.modules[(k, e[0])].left[h][e[1]], e[2])],
                                    where + " left action"))
                     for h in W.charts[k].group.elements)
        right = tuple(zip(*[_descend(classes, members,
                                     lambda e, g=g: cls[(e[0], e[1], first.modules[(e[0], i)].right[e[2]][g])],
                                     where + " right action")
                            for g in U.charts[i].group.elements]))
        labels = tuple(f"{second.modules[(k, j)].label(th)}*{first.modules[(j, i)].label(lam)}"
                       for (j, th, lam) in classes)
        modules[(k, i)] = Bimodule(W.charts[k].group, U.charts[i].group, left, right, labels)
        maps = _descend(classes, members,
                        lambda e: compose_maps(second.realization_map(k, e[0], e[1]), first.realization_map(e[0], i, e[2])),
                        where + " concrete map")
        con[(k, i)], realization[(k, i)] = _index_maps(maps)
        lookup[(k, i)] = (classes, members, cls)

    R = RefinementData(U, W, modules, con, realization, name=f"{second.name} after {first.name}".strip())
    for (k, i, i2) in R.fine_triples():
        classes, members, _ = lookup[(k, i)]
        target = lookup[(k, i2)][2]
        R.fine_cells[(k, i, i2)] = tuple(
            tuple(_descend(classes, members,
                           lambda e, nu=nu: target[(e[0], e[1], first.fine_compose(e[0], i, i2, e[2], nu))],
                           "composite fine cell"))
            for nu in U.abst[(i, i2)].carrier)
        R.fine_cells[(k, i, i2)] = tuple(zip(*R.fine_cells[(k, i, i2)]))
    for (k2, k, i) in R.coarse_triples():
        classes, members, _ = lookup[(k, i)]
        target = lookup[(k2, i)][2]
        R.coarse_cells[(k2, k, i)] = tuple(
            tuple(_descend(classes, members,
                           lambda e, ps=ps: target[(e[0], second.coarse_compose(k2, k, e[0], ps, e[1]), e[2])],
                           "composite coarse cell"))
            for ps in W.abst[(k2, k)].carrier)
    return R


# --- the bundle of a common refinement ----------------------------------------------------------

@dataclass(eq=False)
class MoritaBundle:
    right_ref: RefinementData   # fine -> V; G(V) acts on the right, anchor tau
    left_ref: RefinementData    # fine -> W; G(W) acts on the left, anchor eps
    gv: object                  # groupoid of fractions of V
    gw: object
    pieces: list                # (i, j, lam, x, k, mu)
    piece_class: list
    reps: list
    tau: list                   # V object id per class
    eps: list                   # W object id per class
    ract: dict                  # (m, g) -> m g, for tgt(g) == tau(m)
    lact: dict                  # (h, m) -> h m, for src(h) == eps(m)
    issues: list = field(default_factory=list)
    _members: dict = field(default=None, repr=False)

    @property
    def size(self):
        return len(self.reps)

    def members(self, m):
        if self._members is None:
            self._members = {}
            for p, c in enumerate(self.piece_class):
                self._members.setdefault(c, []).append(p)
        return self._members[m]

    def label(self, m):
        i, j, lam, x, k, mu = self.pieces[self.reps[m]]
        RV, RW = self.right_ref, self.left_ref
        return (f"[{RV.modules[(j, i)].label(lam)}|{object_name(RV.fine, (i, x))}"
                f"|{RW.modules[(k, i)].label(mu)}]")


def build_morita_bundle(ref_v, ref_w) -> MoritaBundle:
    """Bundle of two refinements out of one fine atlas: right G(V), left G(W)."""
    if not _same_atlas(ref_v.fine, ref_w.fine):
        raise RefinementError("the two refinements do not share the fine atlas")
    U, V, W = ref_v.fine, ref_v.coarse, ref_w.coarse
    for X in (V, W):
        if sorted(X.layer.quotient.points) != sorted(U.layer.quotient.points):
            raise RefinementError("quotient models differ",
                                  witness=(sorted(U.layer.quotient.points), sorted(X.layer.quotient.points)))
    pieces = []
    for i, c in enumerate(U.charts):
        js = [j for j in range(len(V.charts)) if (j, i) in ref_v.modules]
        ks = [k for k in range(len(W.charts)) if (k, i) in ref_w.modules]
        for j in js:
            for lam in ref_v.modules[(j, i)].carrier:
                for x in range(c.size):
                    for k in ks:
                        for mu in ref_w.modules[(k, i)].carrier:
                            pieces.append((i, j, lam, x, k, mu))
    pid = {p: n for n, p in enumerate(pieces)}
    uf = UnionFind(len(pieces))
    res = U.restrictions()
    for n, (i, j, lam, x, k, mu) in enumerate(pieces):
        for (l, y, kap) in res.get((i, x), ()):
            r = (l, j, ref_v.fine_compose(j, i, l, lam, kap), y, k, ref_w.fine_compose(k, i, l, mu, kap))
            if r in pid:
                uf.union(n, pid[r])
    ids, reps = uf.classes()

    gv, gw = build_groupoid(V), build_groupoid(W)
    vid = {o: n for n, o in enumerate(gv.objects)}
    wid = {o: n for n, o in enumerate(gw.objects)}
    tau, eps = [None] * len(reps), [None] * len(reps)
    issues = []
    for n, p in enumerate(pieces):
        t, e = _anchors(ref_v, ref_w, p)
        c = ids[n]
        if tau[c] is None:
            tau[c], eps[c] = vid[t], wid[e]
        elif (tau[c], eps[c]) != (vid[t], wid[e]):
            issues.append(("anchor", p))
    bundle = MoritaBundle(ref_v, ref_w, gv, gw, pieces, ids, reps, tau, eps, {}, {}, issues)

    for m in range(bundle.size):
        p = pieces[reps[m]]
        for g in range(gv.size):
            if gv.tgt[g] == tau[m]:
                got = _right_results(bundle, p, gv.spans[gv.reps[g]], pid, first=True)
                bundle.ract[(m, g)] = got[0] if got else None
        for h in range(gw.size):
            if gw.src[h] == eps[m]:
                got = _left_results(bundle, p, gw.spans[gw.reps[h]], pid, first=True)
                bundle.lact[(h, m)] = got[0] if got else None
    return bundle


def _anchors(ref_v, ref_w, piece):
    i, j, lam, x, k, mu = piece
    return (j, ref_v.realization_map(j, i, lam)[x]), (k, ref_w.realization_map(k, i, mu)[x])


def _right_results(bundle, piece, span, pid, first=False):
    """Classes of piece . span over the witnesses (i2, z, nu, lam2)."""
    RV, RW = bundle.right_ref, bundle.left_ref
    i, j, lam, x, k, mu = piece
    j2, ja, th1, y, jb, th2 = span
    out = set()
    for (i2, z, nu) in sorted(RV.fine.restrictions().get((i, x), ())):
        if (j2, i2) not in RV.modules:
            continue
        target = RV.fine_compose(j, i, i2, lam, nu)
        for lam2 in RV.modules[(j2, i2)].carrier:
            if RV.realization_map(j2, i2, lam2)[z] == y and RV.coarse_compose(jb, j2, i2, th2, lam2) == target:
                r = (i2, ja, RV.coarse_compose(ja, j2, i2, th1, lam2), z, k, RW.fine_compose(k, i, i2, mu, nu))
                out.add(bundle.piece_class[pid[r]])
                if first:
                    return sorted(out)
    return sorted(out)


def _left_results(bundle, piece, span, pid, first=False):
    """Classes of span . piece over the witnesses (i2, z, nu, mu2)."""
    RV, RW = bundle.right_ref, bundle.left_ref
    i, j, lam, x, k, mu = piece
    k2, ka, ps1, w, kb, ps2 = span
    out = set()
    for (i2, z, nu) in sorted(RW.fine.restrictions().get((i, x), ())):
        if (k2, i2) not in RW.modules:
            continue
        target = RW.fine_compose(k, i, i2, mu, nu)
        for mu2 in RW.modules[(k2, i2)].carrier:
            if RW.realization_map(k2, i2, mu2)[z] == w and RW.coarse_compose(ka, k2, i2, ps1, mu2) == target:
                r = (i2, j, RV.fine_compose(j, i, i2, lam, nu), z, kb, RW.coarse_compose(kb, k2, i2, ps2, mu2))
                out.add(bundle.piece_class[pid[r]])
                if first:
                    return sorted(out)
    return sorted(out)


def check_biprincipality(bundle) -> Report:
    rep = Report("morita bundle")
    gv, gw, n = bundle.gv, bundle.gw, bundle.size
    rep.add("bundle.anchor_surjective", not bundle.issues, "anchors constant on classes",
            bundle.issues[0] if bundle.issues else None)
    for side, anchor, gpd in (("right anchor", bundle.tau, gv), ("left anchor", bundle.eps, gw)):
        missing = sorted(set(range(len(gpd.objects))) - set(anchor))
        rep.add("bundle.anchor_surjective", not missing, side,
                None if not missing else (side, object_name(gpd.atlas, gpd.objects[missing[0]])))

    pid = {p: k for k, p in enumerate(bundle.pieces)}
    bad = next(((bundle.label(m), gv.label(g)) for (m, g), r in bundle.ract.items() if r is None), None)
    bad = bad or next(((gw.label(h), bundle.label(m)) for (h, m), r in bundle.lact.items() if r is None), None)
    rep.add("bundle.action_laws", bad is None, "every composable pair has a witness", bad)
    if bad is not None:
        return rep

    bad = None
    for (m, g), r in bundle.ract.items():
        for p in bundle.members(m):
            for s in gv.members(g):
                got = _right_results(bundle, bundle.pieces[p], gv.spans[s], pid)
                if got != [r]:
                    bad = bad or ("right", bundle.label(m), gv.label(g), got)
    for (h, m), r in bundle.lact.items():
        for p in bundle.members(m):
            for s in gw.members(h):
                got = _left_results(bundle, bundle.pieces[p], gw.spans[s], pid)
                if got != [r]:
                    bad = bad or ("left", gw.label(h), bundle.label(m), got)
    rep.add("bundle.action_laws", bad is None, "actions independent of representatives and witnesses", bad)

    ract, lact = bundle.ract, bundle.lact
    bad = next((bundle.label(m) for m in range(n)
                if ract[(m, gv.unit[bundle.tau[m]])] != m or lact[(gw.unit[bundle.eps[m]], m)] != m), None)
    rep.add("bundle.action_laws", bad is None, "units act trivially", bad)
    bad = None
    for (m, g), mg in ract.items():
        if bundle.tau[mg] != gv.src[g]:
            bad = bad or ("right anchor", bundle.label(m), gv.label(g))
            continue
        for g2 in range(gv.size):
            if gv.tgt[g2] == gv.src[g] and ract[(mg, g2)] != ract[(m, gv.comp[(g, g2)])]:
                bad = bad or ("right", bundle.label(m), gv.label(g), gv.label(g2))
    for (h, m), hm in lact.items():
        if bundle.eps[hm] != gw.tgt[h]:
            bad = bad or ("left anchor", gw.label(h), bundle.label(m))
            continue
        for h2 in range(gw.size):
            if gw.src[h2] == gw.tgt[h] and lact[(h2, hm)] != lact[(gw.comp[(h2, h)], m)]:
                bad = bad or ("left", gw.label(h2), gw.label(h), bundle.label(m))
    rep.add("bundle.action_laws", bad is None, "associativity", bad)
    if bad is not None:
        return rep

    bad = None
    for (m, g), mg in ract.items():
        if bundle.eps[mg] != bundle.eps[m]:
            bad = bad or ("right action moves the left anchor", bundle.label(m), gv.label(g))
            continue
        for h in range(gw.size):
            if gw.src[h] == bundle.eps[m]:
                hm = lact[(h, m)]
                if bundle.tau[hm] != bundle.tau[m] or lact[(h, mg)] != ract[(hm, g)]:
                    bad = bad or (gw.label(h), bundle.label(m), gv.label(g))
    rep.add("bundle.actions_commute", bad is None, "h(mg) = (hm)g", bad)

    image = {}
    for (m, g), mg in ract.items():
        image.setdefault((m, mg), []).append(g)
    want = {(a, b) for a in range(n) for b in range(n) if bundle.eps[a] == bundle.eps[b]}
    dup = next(((bundle.label(a), bundle.label(b)) for (a, b), gs in image.items() if len(gs) > 1), None)
    miss = next(((bundle.label(a), bundle.label(b)) for (a, b) in sorted(want - set(image))), None)
    rep.add("bundle.principal_right", dup is None and miss is None, f"{len(image)} of {len(want)} pairs",
            None if dup is None and miss is None else {"repeated": dup, "missed": miss})

    image = {}
    for (h, m), hm in lact.items():
        image.setdefault((hm, m), []).append(h)
    want = {(a, b) for a in range(n) for b in range(n) if bundle.tau[a] == bundle.tau[b]}
    dup = next(((bundle.label(a), bundle.label(b)) for (a, b), hs in image.items() if len(hs) > 1), None)
    miss = next(((bundle.label(a), bundle.label(b)) for (a, b) in sorted(want - set(image))), None)
    rep.add("bundle.principal_left", dup is None and miss is None, f"{len(image)} of {len(want)} pairs",
            None if dup is None and miss is None else {"repeated": dup, "missed": miss})
    rep.info.update({"bundle_classes": n, "pieces": len(bundle.pieces)})
    return rep
