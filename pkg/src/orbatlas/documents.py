"""JSON input documents: parsing, schema validation, name resolution, dumping."""

from __future__ import annotations

import copy
import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from . import group_core as gc
from .atlas import complete_atlas
from .bimodule import Bimodule
from .errors import DocumentError, OrbatlasError
from .satake import build_layer, make_chart

FORMAT = "orbatlas/1"


@lru_cache(maxsize=2)
def schema(strict=True):
    raw = json.loads(resources.files("orbatlas").joinpath("schema/document.schema.json").read_text())
    if strict:
        return raw

    def relax(node):
        if isinstance(node, dict):
            if node.get("additionalProperties") is False:
                node["additionalProperties"] = True
            for v in node.values():
                relax(v)
        elif isinstance(node, list):
            for v in node:
                relax(v)

    raw = copy.deepcopy(raw)
    relax(raw)
    return raw


def parse_text(text, strict=True, kind=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, location=(exc.lineno, exc.colno)) from None
    validator = jsonschema.Draft202012Validator(schema(strict))
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        path = "/" + "/".join(str(p) for p in err.absolute_path)
        raise DocumentError(err.message, location=path)
    if kind is not None and doc["kind"] != kind:
        raise DocumentError(f"expected a {kind} document, got {doc['kind']}", location="/kind")
    return doc


def load_document(path, strict=True, kind=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None
    return parse_text(text, strict, kind)


# --- groups and actions --------------------------------------------------------------

def build_group(spec):
    if isinstance(spec, dict):
        return gc.make_group(spec["table"], spec.get("labels"))
    kind, _, arg = spec.partition(":")
    makers = {"trivial": gc.trivial_group, "klein4": gc.klein4, "quaternion": gc.quaternion}
    if kind in makers:
        return makers[kind]()
    return {"cyclic": gc.cyclic, "symmetric": gc.symmetric, "dihedral": gc.dihedral}[kind](int(arg))


def group_labels(G):
    return [G.label(g) for g in G.elements]


def _lookup(table, key, what, where):
    try:
        return table[key]
    except KeyError:
        raise DocumentError(f"unknown {what} {key!r}", location=where) from None


def action_table(G, points, spec, where, side="left"):
    """Per group element, the image of each point (as a list of point ids).

    Listed elements are taken verbatim; the rest are filled in by closure over
    the listed ones.  Inconsistent data is left for the verifiers to report.
    """
    n = len(points)
    pidx = {p: k for k, p in enumerate(points)}
    gidx = {G.label(g): g for g in G.elements}
    rows = [None] * G.order
    rows[G.identity] = tuple(range(n))
    gens = []
    if spec != "trivial":
        for label, mapping in spec.items():
            g = _lookup(gidx, label, "group element", where)
            missing = [p for p in points if p not in mapping]
            if missing:
                raise DocumentError(f"action of {label} misses {missing[0]!r}", location=where)
            rows[g] = tuple(_lookup(pidx, mapping[p], "point", where) for p in points)
            gens.append(g)
    else:
        rows = [tuple(range(n))] * G.order
    queue = [g for g in G.elements if rows[g] is not None]
    for g in queue:
        for s in gens:
            gs = G.mul(g, s)
            if rows[gs] is None:
                if side == "left":     # (g s).p = g.(s.p)
                    rows[gs] = tuple(rows[g][rows[s][p]] for p in range(n))
                else:                  # p.(g s) = (p.g).s
                    rows[gs] = tuple(rows[s][rows[g][p]] for p in range(n))
                queue.append(gs)
    if any(r is None for r in rows):
        raise DocumentError("listed group elements do not generate the group", location=where)
    return rows


def _mapping_to_tuple(mapping, src_names, tgt_index, where):
    missing = [p for p in src_names if p not in mapping]
    if missing:
        raise DocumentError(f"map misses {missing[0]!r}", location=where)
    return tuple(_lookup(tgt_index, mapping[p], "sample", where) for p in src_names)


# --- atlases ------------------------------------------------------------------------------

def atlas_from_document(doc):
    groups = {}
    for name, spec in doc["groups"].items():
        groups[name] = build_group(spec)
    qidx = {q: k for k, q in enumerate(doc["quotient"])}
    if len(qidx) != len(doc["quotient"]):
        raise DocumentError("duplicate quotient point", location="/quotient")

    charts, cidx = [], {}
    for n, cd in enumerate(doc["charts"]):
        where = f"/charts/{n}"
        G = _lookup(groups, cd["group"], "group", where + "/group")
        samples = cd["samples"]
        if len(set(samples)) != len(samples):
            raise DocumentError("duplicate sample", location=where + "/samples")
        proj_spec = cd.get("projection", "identity")
        if proj_spec == "identity":
            proj = [_lookup(qidx, s, "quotient point", where + "/projection") for s in samples]
        else:
            proj = [_lookup(qidx, proj_spec.get(s), "quotient point", where + "/projection") for s in samples]
        act = action_table(G, samples, cd.get("action", "trivial"), where + "/action")
        support = cd.get("support")
        declared = frozenset(_lookup(qidx, q, "quotient point", where) for q in support) if support else None
        if cd["name"] in cidx:
            raise DocumentError("duplicate chart name", location=where + "/name")
        cidx[cd["name"]] = n
        charts.append(make_chart(cd["name"], samples, G, act, proj,
                                 connected=cd.get("connected", True),
                                 simply_connected=cd.get("simply_connected", True),
                                 dimension=cd.get("dimension", 0), declared_support=declared))
    sidx = [{s: k for k, s in enumerate(c.samples)} for c in charts]

    declared = {}
    for n, ed in enumerate(doc.get("embeddings", [])):
        where = f"/embeddings/{n}"
        i = _lookup(cidx, ed["source"], "chart", where)
        j = _lookup(cidx, ed["target"], "chart", where)
        declared[(j, i)] = [_mapping_to_tuple(m, charts[i].samples, sidx[j], where) for m in ed["maps"]]
    layer = build_layer(doc["quotient"], charts, declared)
    for (j, i) in declared:
        if (j, i) not in layer.con:
            raise DocumentError("declared embeddings for charts whose supports are not nested",
                                location="/embeddings")

    abst, realization, eidx = {}, {}, {}
    for n, md in enumerate(doc.get("modules", [])):
        where = f"/modules/{n}"
        i = _lookup(cidx, md["source"], "chart", where)
        j = _lookup(cidx, md["target"], "chart", where)
        if (j, i) not in layer.con:
            raise DocumentError(f"{md['source']} is not below {md['target']}", location=where)
        if (j, i) in abst:
            raise DocumentError("duplicate module", location=where)
        elems = md["elements"]
        if len(set(elems)) != len(elems):
            raise DocumentError("duplicate module element", location=where + "/elements")
        Gi, Gj = charts[i].group, charts[j].group
        left = action_table(Gj, elems, md["left"], where + "/left", "left")
        right_rows = action_table(Gi, elems, md["right"], where + "/right", "right")
        right = tuple(tuple(right_rows[g][m] for g in Gi.elements) for m in range(len(elems)))
        abst[(j, i)] = Bimodule(Gj, Gi, tuple(left), right, tuple(elems))
        eidx[(j, i)] = {e: k for k, e in enumerate(elems)}
        if "realization" in md:
            row = []
            for e in elems:
                f = _mapping_to_tuple(_lookup(md["realization"], e, "module element", where + "/realization"),
                                      charts[i].samples, sidx[j], where + "/realization")
                k = layer.con_index(j, i, f)
                if k is None:
                    raise OrbatlasError(f"realization of {e!r} in {md['source']}->{md['target']} is not a concrete embedding",
                                        witness=(md["source"], md["target"], e))
                row.append(k)
            realization[(j, i)] = tuple(row)

    unit = {}
    for n, ud in enumerate(doc.get("units", [])):
        where = f"/units/{n}"
        i = _lookup(cidx, ud["chart"], "chart", where)
        if (i, i) not in eidx:
            raise DocumentError("unit cell for a chart without a declared self-module", location=where)
        G = charts[i].group
        unit[i] = tuple(_lookup(eidx[(i, i)], _lookup(ud["map"], G.label(g), "group element", where),
                                "module element", where) for g in G.elements)

    comp_cells = {}
    for n, cd in enumerate(doc.get("cells", [])):
        where = f"/cells/{n}"
        i, j, k = (_lookup(cidx, c, "chart", where) for c in cd["chain"])
        for a in ((j, i), (k, j), (k, i)):
            if a not in abst:
                raise DocumentError("composition cell needs declared modules on every arrow", location=where)
        table = [[None] * abst[(j, i)].size for _ in range(abst[(k, j)].size)]
        for nu, lam, res in cd["table"]:
            table[_lookup(eidx[(k, j)], nu, "module element", where)][_lookup(eidx[(j, i)], lam, "module element", where)] = \
                _lookup(eidx[(k, i)], res, "module element", where)
        if any(v is None for row in table for v in row):
            raise DocumentError("composition cell is incomplete", location=where)
        comp_cells[(k, j, i)] = tuple(tuple(r) for r in table)

    try:
        return complete_atlas(layer, abst, comp_cells, unit, realization)
    except OrbatlasError as exc:
        raise DocumentError(str(exc)) from None


def load_atlas(path, strict=True):
    return atlas_from_document(load_document(path, strict, kind="atlas"))


def _group_doc(G):
    return {"table": [list(r) for r in G.table], "labels": group_labels(G)}


def _action_doc(G, points, rows, side="left"):
    """Full action table keyed by element label; 'trivial' when it is."""
    if all(tuple(r) == tuple(range(len(points))) for r in rows):
        return "trivial"
    return {G.label(g): {points[p]: points[rows[g][p]] for p in range(len(points))}
            for g in G.elements if g != G.identity}


def atlas_to_document(atlas, name="", description=""):
    """A fully explicit document: every module, unit, cell and embedding set."""
    charts, layer = atlas.charts, atlas.layer
    doc = {"format": FORMAT, "kind": "atlas"}
    if name:
        doc["name"] = name
    if description:
        doc["description"] = description
    doc["groups"] = {f"G_{c.name}": _group_doc(c.group) for c in charts}
    doc["quotient"] = list(layer.quotient.points)
    doc["charts"] = []
    for c in charts:
        doc["charts"].append({
            "name": c.name, "group": f"G_{c.name}", "samples": list(c.samples),
            "projection": {s: layer.quotient.points[c.proj[k]] for k, s in enumerate(c.samples)},
            "action": _action_doc(c.group, c.samples, c.action.act),
            "connected": c.connected, "simply_connected": c.simply_connected, "dimension": c.dimension,
        })
    doc["embeddings"] = []
    doc["modules"] = []
    for (j, i) in atlas.arrows:
        ci, cj = charts[i], charts[j]
        doc["embeddings"].append({"source": ci.name, "target": cj.name,
                                  "maps": [{ci.samples[x]: cj.samples[y] for x, y in enumerate(f)}
                                           for f in layer.con[(j, i)]]})
        B = atlas.abst[(j, i)]
        elems = [B.label(m) for m in B.carrier]
        right_rows = [tuple(B.right[m][g] for m in B.carrier) for g in ci.group.elements]
        doc["modules"].append({
            "source": ci.name, "target": cj.name, "elements": elems,
            "left": _action_doc(cj.group, elems, B.left),
            "right": _action_doc(ci.group, elems, right_rows),
            "realization": {elems[m]: {ci.samples[x]: cj.samples[y] for x, y in enumerate(atlas.realization_map(j, i, m))}
                      for m in B.carrier},
        })
    doc["units"] = []
    for i, c in enumerate(charts):
        B = atlas.abst[(i, i)]
        doc["units"].append({"chart": c.name,
                             "map": {c.group.label(g): B.label(atlas.unit[i][g]) for g in c.group.elements}})
    doc["cells"] = []
    for (k, j, i) in atlas.triples():
        outer, inner, full = atlas.abst[(k, j)], atlas.abst[(j, i)], atlas.abst[(k, i)]
        doc["cells"].append({"chain": [charts[i].name, charts[j].name, charts[k].name],
                             "table": [[outer.label(nu), inner.label(lam), full.label(atlas.compose(k, j, i, nu, lam))]
                                       for nu in outer.carrier for lam in inner.carrier]})
    return doc


def dump(doc):
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


# --- groupoid models -------------------------------------------------------------------------

def groupoid_from_document(doc):
    """(model, covers); covers maps a cover name to {chart name: [object, ...]}."""
    from .groupoid_model import make_model

    objects = doc["objects"]
    if len(set(objects)) != len(objects):
        raise DocumentError("duplicate object", location="/objects")
    known = set(objects)
    arrows, names = [], set()
    for n, ad in enumerate(doc["arrows"]):
        where = f"/arrows/{n}"
        if ad["name"] in names:
            raise DocumentError("duplicate arrow name", location=where)
        for end in ("source", "target"):
            if ad[end] not in known:
                raise DocumentError(f"unknown object {ad[end]!r}", location=f"{where}/{end}")
        names.add(ad["name"])
        arrows.append((ad["name"], ad["source"], ad["target"]))

    def arrow(a, where):
        if a not in names:
            raise DocumentError(f"unknown arrow {a!r}", location=where)
        return a

    units = {}
    for o in objects:
        if o not in doc["units"]:
            raise DocumentError(f"object {o!r} has no unit", location="/units")
        units[o] = arrow(doc["units"][o], "/units")
    inverse = {}
    for a in sorted(names):
        if a not in doc["inverse"]:
            raise DocumentError(f"arrow {a!r} has no inverse", location="/inverse")
        inverse[a] = arrow(doc["inverse"][a], "/inverse")
    compose = [tuple(arrow(a, f"/compose/{n}") for a in row) for n, row in enumerate(doc["compose"])]
    for n, (a, b) in enumerate(doc.get("edges", [])):
        if a not in known or b not in known:
            raise DocumentError("edge names an unknown object", location=f"/edges/{n}")
    links = [tuple(arrow(a, f"/links/{n}") for a in row) for n, row in enumerate(doc.get("links", []))]
    quotient = doc.get("quotient")
    if quotient is not None:
        missing = [o for o in objects if o not in quotient]
        if missing:
            raise DocumentError(f"object {missing[0]!r} has no quotient point", location="/quotient")
    covers = doc.get("covers", {})
    for cname, cover in covers.items():
        for chart, objs in cover.items():
            bad = [o for o in objs if o not in known]
            if bad:
                raise DocumentError(f"cover {cname} chart {chart} names unknown object {bad[0]!r}",
                                    location=f"/covers/{cname}/{chart}")
    model = make_model(objects, arrows, units, inverse, compose, doc.get("edges", []), links,
                       quotient, doc.get("name", ""))
    return model, covers


def load_groupoid(path, strict=True):
    return groupoid_from_document(load_document(path, strict, kind="groupoid"))


def groupoid_to_document(model, covers=None, name="", description=""):
    doc = {"format": FORMAT, "kind": "groupoid"}
    if name or model.name:
        doc["name"] = name or model.name
    if description:
        doc["description"] = description
    A = model.arrows
    doc["objects"] = list(model.objects)
    doc["arrows"] = [{"name": a, "source": model.objects[model.src[g]], "target": model.objects[model.tgt[g]]}
                     for g, a in enumerate(A)]
    doc["units"] = {o: A[model.unit[x]] for x, o in enumerate(model.objects)}
    doc["inverse"] = {a: A[model.inv[g]] for g, a in enumerate(A)}
    doc["compose"] = [[A[g2], A[g1], A[g]] for (g2, g1), g in sorted(model.comp.items())]
    doc["edges"] = sorted(sorted(model.objects[x] for x in e) for e in model.edges)
    doc["links"] = sorted(sorted(A[g] for g in ln) for ln in model.links)
    doc["quotient"] = {o: model.quotient[x] for x, o in enumerate(model.objects)}
    if covers:
        doc["covers"] = {k: {c: list(objs) for c, objs in v.items()} for k, v in covers.items()}
    return doc


# --- refinements -------------------------------------------------------------------------------

def _resolve(base, ref):
    p = Path(ref)
    return p if p.is_absolute() else Path(base).parent / p


def load_refinement(path, strict=True, _seen=None):
    """Load and construct the refinement a document describes.

    Referenced documents are resolved relative to this one.  Returns a
    RefinementData; construction problems raise RefinementError or
    DocumentError.
    """
    from . import equivalence as eqv
    from .errors import RefinementError

    path = Path(path)
    seen = set(_seen or ())
    key = path.resolve()
    if key in seen:
        raise DocumentError("refinement documents refer to each other in a cycle", location=str(path))
    seen.add(key)
    doc = load_document(path, strict, kind="refinement")
    how = doc["construction"]
    name = doc.get("name", path.stem)

    if how == "groupoid":
        model, covers = load_groupoid(_resolve(path, doc["groupoid"]), strict)
        for c in ("fine_cover", "coarse_cover"):
            if doc[c] not in covers:
                raise DocumentError(f"groupoid document has no cover {doc[c]!r}", location=f"/{c}")
        R = eqv.refinement_from_groupoid(model, covers[doc["fine_cover"]], covers[doc["coarse_cover"]])
    elif how == "compose":
        steps = [load_refinement(_resolve(path, s), strict, seen) for s in doc["steps"]]
        R = steps[0]
        for nxt in steps[1:]:
            R = eqv.compose_refinements(R, nxt)
    else:
        fine = load_atlas(_resolve(path, doc["fine"]), strict)
        coarse = load_atlas(_resolve(path, doc["coarse"]), strict)
        if how == "identity":
            if atlas_to_document(fine) != atlas_to_document(coarse):
                raise RefinementError("identity refinement needs the same atlas on both sides")
            R = eqv.identity_refinement(fine)
        elif how == "isomorphism":
            R = eqv.refinement_from_isomorphism(fine, coarse)
        else:
            R = refinement_from_document(doc, fine, coarse)
    R.name = name
    return R


def refinement_from_document(doc, fine, coarse):
    """Explicit refinement tables over already loaded atlases."""
    from .equivalence import RefinementData, cross_embeddings

    fidx = {c.name: k for k, c in enumerate(fine.charts)}
    cidx = {c.name: k for k, c in enumerate(coarse.charts)}
    modules, con, realization, eidx = {}, {}, {}, {}
    for n, md in enumerate(doc["modules"]):
        where = f"/modules/{n}"
        i = _lookup(fidx, md["fine"], "fine chart", where)
        j = _lookup(cidx, md["coarse"], "coarse chart", where)
        if (j, i) in modules:
            raise DocumentError("duplicate module", location=where)
        elems = md["elements"]
        if len(set(elems)) != len(elems):
            raise DocumentError("duplicate module element", location=where + "/elements")
        ci, cj = fine.charts[i], coarse.charts[j]
        left = action_table(cj.group, elems, md["left"], where + "/left", "left")
        right_rows = action_table(ci.group, elems, md["right"], where + "/right", "right")
        right = tuple(tuple(right_rows[g][m] for g in ci.group.elements) for m in range(len(elems)))
        modules[(j, i)] = Bimodule(cj.group, ci.group, tuple(left), right, tuple(elems))
        eidx[(j, i)] = {e: k for k, e in enumerate(elems)}
        sidx = {s: k for k, s in enumerate(cj.samples)}
        if "realization" in md:
            maps = [_mapping_to_tuple(_lookup(md["realization"], e, "module element", where + "/realization"),
                                      ci.samples, sidx, where + "/realization") for e in elems]
        else:
            derived = cross_embeddings(fine, coarse, j, i)
            if len(derived) != 1:
                raise DocumentError(f"{len(derived)} concrete embeddings {md['fine']}->{md['coarse']}; give realization",
                                    location=where)
            maps = derived * len(elems)
        con[(j, i)] = tuple(sorted(set(maps)))
        realization[(j, i)] = tuple(con[(j, i)].index(f) for f in maps)

    R = RefinementData(fine, coarse, modules, con, realization)

    def labels(B):
        return {B.label(m): m for m in B.carrier}

    for n, cd in enumerate(doc.get("fine_cells", [])):
        where = f"/fine_cells/{n}"
        i2 = _lookup(fidx, cd["chain"][0], "fine chart", where)
        i = _lookup(fidx, cd["chain"][1], "fine chart", where)
        j = _lookup(cidx, cd["chain"][2], "coarse chart", where)
        if (i, i2) not in fine.abst or (j, i) not in modules or (j, i2) not in modules:
            raise DocumentError("mixed cell over a chain without modules", location=where)
        R.fine_cells[(j, i, i2)] = _cell_table(cd["table"], eidx[(j, i)], labels(fine.abst[(i, i2)]),
                                               eidx[(j, i2)], where)
    for n, cd in enumerate(doc.get("coarse_cells", [])):
        where = f"/coarse_cells/{n}"
        i = _lookup(fidx, cd["chain"][0], "fine chart", where)
        j = _lookup(cidx, cd["chain"][1], "coarse chart", where)
        j2 = _lookup(cidx, cd["chain"][2], "coarse chart", where)
        if (j2, j) not in coarse.abst or (j, i) not in modules or (j2, i) not in modules:
            raise DocumentError("mixed cell over a chain without modules", location=where)
        R.coarse_cells[(j2, j, i)] = _cell_table(cd["table"], labels(coarse.abst[(j2, j)]), eidx[(j, i)],
                                                 eidx[(j2, i)], where)

    # cells along identity embeddings default to the module actions through the unit cells
    for (j, i, i2) in R.fine_triples():
        if (j, i, i2) not in R.fine_cells and i2 == i:
            B, u = modules[(j, i)], fine.unit[i]
            back = {u[g]: g for g in fine.charts[i].group.elements}
            if len(back) == len(u):
                R.fine_cells[(j, i, i)] = tuple(tuple(B.right[lam][back[nu]] for nu in fine.abst[(i, i)].carrier)
                                                for lam in B.carrier)
    for (j2, j, i) in R.coarse_triples():
        if (j2, j, i) not in R.coarse_cells and j2 == j:
            B, u = modules[(j, i)], coarse.unit[j]
            back = {u[h]: h for h in coarse.charts[j].group.elements}
            if len(back) == len(u):
                R.coarse_cells[(j, j, i)] = tuple(tuple(B.left[back[th]][lam] for lam in B.carrier)
                                                  for th in coarse.abst[(j, j)].carrier)
    return R


def _cell_table(rows, outer, inner, full, where):
    table = [[None] * len(inner) for _ in range(len(outer))]
    for x, y, r in rows:
        table[_lookup(outer, x, "element", where)][_lookup(inner, y, "element", where)] = \
            _lookup(full, r, "element", where)
    if any(v is None for row in table for v in row):
        raise DocumentError("mixed cell is incomplete", location=where)
    return tuple(tuple(r) for r in table)


def refinement_to_document(R, fine_ref, coarse_ref, name="", description=""):
    """Explicit document for R; fine_ref and coarse_ref are the atlas paths to write in."""
    U, V = R.fine, R.coarse
    doc = {"format": FORMAT, "kind": "refinement"}
    if name:
        doc["name"] = name
    if description:
        doc["description"] = description
    doc.update({"construction": "explicit", "fine": str(fine_ref), "coarse": str(coarse_ref)})
    doc["modules"] = []
    for (j, i) in R.pairs():
        ci, cj, B = U.charts[i], V.charts[j], R.modules[(j, i)]
        elems = [B.label(m) for m in B.carrier]
        right_rows = [tuple(B.right[m][g] for m in B.carrier) for g in ci.group.elements]
        doc["modules"].append({
            "fine": ci.name, "coarse": cj.name, "elements": elems,
            "left": _action_doc(cj.group, elems, B.left),
            "right": _action_doc(ci.group, elems, right_rows),
            "realization": {elems[m]: {ci.samples[x]: cj.samples[y] for x, y in enumerate(R.realization_map(j, i, m))}
                      for m in B.carrier},
        })
    doc["fine_cells"] = []
    for (j, i, i2) in R.fine_triples():
        outer, inner, full = R.modules[(j, i)], U.abst[(i, i2)], R.modules[(j, i2)]
        doc["fine_cells"].append({"chain": [U.charts[i2].name, U.charts[i].name, V.charts[j].name],
                                  "table": [[outer.label(a), inner.label(b), full.label(R.fine_compose(j, i, i2, a, b))]
                                            for a in outer.carrier for b in inner.carrier]})
    doc["coarse_cells"] = []
    for (j2, j, i) in R.coarse_triples():
        outer, inner, full = V.abst[(j2, j)], R.modules[(j, i)], R.modules[(j2, i)]
        doc["coarse_cells"].append({"chain": [U.charts[i].name, V.charts[j].name, V.charts[j2].name],
                                    "table": [[outer.label(a), inner.label(b),
                                               full.label(R.coarse_compose(j2, j, i, a, b))]
                                              for a in outer.carrier for b in inner.carrier]})
    return doc
