import dataclasses

import pytest

from helpers import atlas, fx
from orbatlas.documents import load_refinement, refinement_from_document, refinement_to_document
from orbatlas.equivalence import (build_morita_bundle, check_biprincipality, compose_refinements,
                                  cross_embeddings, identity_refinement, refinement_from_groupoid,
                                  refinement_from_isomorphism, verify_refinement)
from orbatlas.errors import RefinementError
from orbatlas.fractions import build_groupoid, morita_invariants
from orbatlas.groupoid_model import CIRCLE_COVER, FINE_CIRCLE_COVER, z3_circle_model


def bundle_size_oracle(coarse, fine, isotropy=3):
    """Arrow count between the two sample sets when every arrow is a loop of a fixed isotropy."""
    def over(a):
        counts = {}
        for c in a.charts:
            for q in c.proj:
                name = a.layer.quotient.points[q]
                counts[name] = counts.get(name, 0) + 1
        return counts
    cv, cu = over(coarse), over(fine)
    return sum(cv[q] * cu.get(q, 0) for q in cv) * isotropy


@pytest.fixture(scope="module")
def g_refinement():
    return refinement_from_groupoid(z3_circle_model(False), FINE_CIRCLE_COVER, CIRCLE_COVER)


@pytest.mark.parametrize("stem", ("eq_a", "eq_b", "single_trivial", "regular_z3", "klein_point",
                                  "torsor_pair", "G_fine_atlas"))
def test_identity_refinements_verify(stem):
    rep = verify_refinement(identity_refinement(atlas(stem)))
    assert rep.ok, rep.failed_keys()


@pytest.mark.parametrize("stem", ("eq_a", "eq_b"))
def test_identity_bundle_size_and_principality(stem):
    a = atlas(stem)
    bundle = build_morita_bundle(identity_refinement(a), identity_refinement(a))
    assert bundle.size == bundle_size_oracle(a, a) == build_groupoid(a).size == 60
    assert check_biprincipality(bundle).ok


@pytest.mark.parametrize("twisted", (False, True))
def test_groupoid_refinement(twisted):
    R = refinement_from_groupoid(z3_circle_model(twisted), FINE_CIRCLE_COVER, CIRCLE_COVER)
    rep = verify_refinement(R)
    assert rep.ok, rep.failed_keys()
    bundle = build_morita_bundle(R, identity_refinement(R.fine))
    assert bundle.size == bundle_size_oracle(R.coarse, R.fine) == 72
    assert check_biprincipality(bundle).ok
    assert morita_invariants(bundle.gv) == morita_invariants(bundle.gw)
    assert morita_invariants(bundle.gv).inertia_components == (2 if twisted else 3)


def test_composition_both_orders(g_refinement):
    R = g_refinement
    for first, second in ((R, identity_refinement(R.coarse)), (identity_refinement(R.fine), R)):
        C = compose_refinements(first, second)
        assert verify_refinement(C).ok
        assert sorted(C.modules) == sorted(R.modules)
        for key, B in C.modules.items():
            assert B.size == R.modules[key].size


def test_composition_needs_matching_middle_atlases(g_refinement):
    with pytest.raises(RefinementError):
        compose_refinements(g_refinement, identity_refinement(atlas("eq_a")))


def test_isomorphism_refinement():
    R = refinement_from_isomorphism(atlas("eq_a"), atlas("G_coarse_atlas"))
    assert verify_refinement(R).ok
    assert check_biprincipality(build_morita_bundle(R, identity_refinement(atlas("eq_a")))).ok
    with pytest.raises(RefinementError):
        refinement_from_isomorphism(atlas("eq_a"), atlas("eq_b"))


def test_corrupted_pentagon_fixture():
    rep = verify_refinement(load_refinement(fx("corrupted_pentagon.json")))
    assert rep.failed_keys() == ["refinement.fine_cell", "refinement.pentagon_fine", "refinement.pentagon_mixed"]


def test_single_coarse_cell_entry_is_detected():
    R = identity_refinement(atlas("eq_b"))
    key = (0, 0, 2)     # U3 inside U1, then U1 into itself
    rows = [list(r) for r in R.coarse_cells[key]]
    rows[0][0], rows[1][0] = rows[1][0], rows[0][0]
    cells = dict(R.coarse_cells)
    cells[key] = tuple(map(tuple, rows))
    rep = verify_refinement(dataclasses.replace(R, coarse_cells=cells))
    assert "refinement.coarse_cell" in rep.failed_keys()


def test_realization_corruption_is_detected():
    R = refinement_from_isomorphism(atlas("torsor_pair"), atlas("torsor_pair"))
    realization = dict(R.realization)
    realization[(0, 1)] = (1, 0, 2)
    rep = verify_refinement(dataclasses.replace(R, realization=realization))
    assert "refinement.realization_equivariant" in rep.failed_keys()


def test_deleting_a_module_breaks_the_bundle():
    a = atlas("eq_a")
    R = identity_refinement(a)
    modules = dict(R.modules)
    del modules[(0, 0)]
    broken = dataclasses.replace(R, modules=modules)
    assert "refinement.supports" in verify_refinement(broken).failed_keys()
    rep = check_biprincipality(build_morita_bundle(broken, identity_refinement(a)))
    assert "bundle.anchor_surjective" in rep.failed_keys()


def test_bundle_needs_shared_fine_atlas_and_quotient():
    with pytest.raises(RefinementError):
        build_morita_bundle(identity_refinement(atlas("eq_a")), identity_refinement(atlas("eq_b")))
    with pytest.raises(RefinementError):
        build_morita_bundle(identity_refinement(atlas("eq_a")), identity_refinement(atlas("torsor_pair")))


def test_mismatched_quotients_fail_verification():
    R = identity_refinement(atlas("eq_a"))
    rep = verify_refinement(dataclasses.replace(R, coarse=atlas("torsor_pair")))
    assert rep.failed_keys() == ["refinement.quotient_match"]


def test_cross_embeddings_of_identity_refinement():
    a = atlas("eq_a")
    for (j, i) in a.arrows:
        assert tuple(cross_embeddings(a, a, j, i)) == a.layer.con[(j, i)]


def test_explicit_document_roundtrip():
    R = identity_refinement(atlas("eq_a"))
    doc = refinement_to_document(R, "eq_a.json", "eq_a.json", "explicit")
    back = refinement_from_document(doc, atlas("eq_a"), atlas("eq_a"))
    assert verify_refinement(back).ok
    assert back.fine_cells == R.fine_cells and back.coarse_cells == R.coarse_cells


@pytest.mark.parametrize("name", ("identity_eq_a.json", "identity_eq_b.json", "refine_G_fine.json",
                                  "refine_H_fine.json", "identity_G_coarse.json", "compose_G.json",
                                  "iso_eq_a_G.json", "explicit_eq_a.json"))
def test_refinement_fixtures_verify(name):
    rep = verify_refinement(load_refinement(fx(name)))
    assert rep.ok, rep.failed_keys()
