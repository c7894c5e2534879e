"""Regenerate the derived fixture documents under src/orbatlas/fixtures.

eq_a.json, eq_b.json and eq_a_mutated.json are hand-written and left alone.
Run from the repository root: python3 tools/make_fixtures.py
"""

from pathlib import Path

from orbatlas import group_core as gc
from orbatlas.atlas import canonical_atlas, complete_atlas
from orbatlas.documents import (atlas_to_document, dump, groupoid_to_document, load_atlas,
                                refinement_to_document)
from orbatlas.equivalence import identity_refinement
from orbatlas.groupoid_model import (CIRCLE_COVER, FINE_CIRCLE_COVER, atlas_from_groupoid,
                                     trivial_model, z3_circle_model)
from orbatlas.satake import build_layer, make_chart

OUT = Path(__file__).resolve().parent.parent / "src" / "orbatlas" / "fixtures"


def write(name, doc):
    (OUT / name).write_text(dump(doc), encoding="utf-8")
    print("wrote", name)


def atlas_doc(name, description, points, charts):
    layer = build_layer(points, charts)
    return atlas_to_document(canonical_atlas(layer), name, description)


def refinement_doc(name, description, **fields):
    doc = {"format": "orbatlas/1", "kind": "refinement", "name": name, "description": description}
    doc.update(fields)
    return doc


def main():
    z3 = gc.cyclic(3)
    rot = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]

    write("single_trivial.json", atlas_doc(
        "single-trivial", "one chart, one sample, trivial group",
        ["p"], [make_chart("P", ["p"], gc.trivial_group(), [[0]], [0])]))
    write("regular_z3.json", atlas_doc(
        "regular-z3", "Z/3 acting regularly on three samples over one point",
        ["q0"], [make_chart("R", ["a", "b", "c"], z3, rot, [0, 0, 0])]))

    # the Klein group acting trivially: an ineffective single chart
    K = gc.klein4()
    layer = build_layer(["p"], [make_chart("K", ["p"], K, [[0]] * 4, [0])])
    write("klein_point.json", atlas_to_document(complete_atlas(layer), "klein-point",
                                                "Z/2+Z/2 acting trivially on one sample"))

    # a one-sample chart over q0 embedding three ways into a regular Z/3 chart
    A = make_chart("A", ["a", "b", "c", "d"], z3, [r + [3] for r in rot], [0, 0, 0, 1])
    B = make_chart("B", ["s"], gc.trivial_group(), [[0]], [0])
    write("torsor_pair.json", atlas_doc(
        "torsor-pair", "chart B over q0 embeds into the regular Z/3 chart A in three ways",
        ["q0", "q1"], [A, B]))

    for twisted, stem in ((False, "G"), (True, "H")):
        model = z3_circle_model(twisted)
        write(f"groupoid_{stem}.json", groupoid_to_document(
            model, {"coarse": CIRCLE_COVER, "fine": FINE_CIRCLE_COVER},
            description="constant Z/3 isotropy over a four point circle"
                        + (", sheets swapped across q2-q3" if twisted else "")))
    write("groupoid_trivial.json", groupoid_to_document(
        trivial_model(("p",)), {"single": {"P": ["p"]}}, description="identity arrows only"))

    G = z3_circle_model(False)
    write("G_coarse_atlas.json", atlas_to_document(atlas_from_groupoid(G, CIRCLE_COVER), "G-coarse",
                                                   "atlas extracted from groupoid G on the four chart cover"))
    write("G_fine_atlas.json", atlas_to_document(atlas_from_groupoid(G, FINE_CIRCLE_COVER), "G-fine",
                                                 "atlas extracted from groupoid G on the eight chart cover"))

    for stem in ("eq_a", "eq_b"):
        write(f"identity_{stem}.json", refinement_doc(
            f"identity-{stem}", f"{stem} refines itself", construction="identity",
            fine=f"{stem}.json", coarse=f"{stem}.json"))
    write("refine_G_fine.json", refinement_doc(
        "G-fine-to-coarse", "eight chart cover of G refines the four chart cover",
        construction="groupoid", groupoid="groupoid_G.json", fine_cover="fine", coarse_cover="coarse"))
    write("refine_H_fine.json", refinement_doc(
        "H-fine-to-coarse", "eight chart cover of H refines the four chart cover",
        construction="groupoid", groupoid="groupoid_H.json", fine_cover="fine", coarse_cover="coarse"))
    write("identity_G_coarse.json", refinement_doc(
        "identity-G-coarse", "the extracted coarse atlas of G refines itself", construction="identity",
        fine="G_coarse_atlas.json", coarse="G_coarse_atlas.json"))
    write("compose_G.json", refinement_doc(
        "G-compose", "fine cover to coarse cover, then the identity on the coarse atlas",
        construction="compose", steps=["refine_G_fine.json", "identity_G_coarse.json"]))
    write("iso_eq_a_G.json", refinement_doc(
        "eq_a-to-G", "eq_a refines the atlas extracted from G through an atlas isomorphism",
        construction="isomorphism", fine="eq_a.json", coarse="G_coarse_atlas.json"))

    eq_a = load_atlas(OUT / "eq_a.json")
    R = identity_refinement(eq_a)
    write("explicit_eq_a.json", refinement_to_document(
        R, "eq_a.json", "eq_a.json", "explicit-eq_a", "identity refinement of eq_a written out in full"))
    doc = refinement_to_document(R, "eq_a.json", "eq_a.json", "corrupted-pentagon",
                                 "explicit identity refinement of eq_a with two entries of one mixed cell swapped")
    cell = next(c for c in doc["fine_cells"] if c["chain"] == ["U3", "U1", "U1"])
    cell["table"][0][2], cell["table"][1][2] = cell["table"][1][2], cell["table"][0][2]
    write("corrupted_pentagon.json", doc)


if __name__ == "__main__":
    main()
