import dataclasses

import pytest

from helpers import atlas, fx
from orbatlas.atlas import find_atlas_isomorphism, verify_atlas
from orbatlas.documents import groupoid_from_document, groupoid_to_document, load_groupoid
from orbatlas.errors import EvaluationNotBijective, NotTranslationSubset, PosetViolation
from orbatlas.group_core import iso_label
from orbatlas.groupoid_model import (CIRCLE_COVER, FINE_CIRCLE_COVER, atlas_from_groupoid, bisection_group,
                                     extract_and_verify, local_bisections, model_inertia, model_isotropy,
                                     roundtrip_check, trivial_model, validate_groupoid, z3_circle_model)


def inertia_oracle(model):
    """Components of the loop graph: an edge for each link and each conjugation, found by search."""
    loops = [g for g in range(len(model.arrows)) if model.src[g] == model.tgt[g]]
    nbrs = {g: set() for g in loops}
    for pair in model.links:
        g, h = tuple(pair)
        if g in nbrs and h in nbrs:
            nbrs[g].add(h)
            nbrs[h].add(g)
    for h in range(len(model.arrows)):
        for g in model.loops(model.src[h]):
            c = model.mul(model.mul(h, g), model.inv[h])
            nbrs[g].add(c)
            nbrs[c].add(g)
    seen, count = set(), 0
    for g in loops:
        if g in seen:
            continue
        count += 1
        todo = [g]
        seen.add(g)
        while todo:
            for n in nbrs[todo.pop()]:
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
    return count


@pytest.mark.parametrize("twisted, inertia", [(False, 3), (True, 2)])
def test_circle_models(twisted, inertia):
    m = z3_circle_model(twisted)
    assert validate_groupoid(m).ok
    assert model_inertia(m).count == inertia == inertia_oracle(m)
    for x in range(len(m.objects)):
        assert iso_label(model_isotropy(m, x)) == "C3"


def test_trivial_model_extracts_a_single_point_atlas():
    m = trivial_model(("p",))
    a, rep = extract_and_verify(m, {"P": ["p"]})
    assert rep.ok
    assert find_atlas_isomorphism(a, atlas("single_trivial")) is not None


def test_breaking_a_unit_link_breaks_continuity():
    m = z3_circle_model(False)
    unit_links = {pair for pair in m.links if all(g in m.unit for g in pair)}
    broken = dataclasses.replace(m, links=m.links - {min(unit_links, key=sorted)})
    assert "model.continuity" in validate_groupoid(broken).failed_keys()


def test_breaking_composition_breaks_the_laws():
    m = z3_circle_model(False)
    comp = dict(m.comp)
    key = next(k for k in comp if m.unit[m.src[k[1]]] not in k)
    g2, g1 = key
    comp[key] = m.unit[m.src[g1]]
    assert "model.laws" in validate_groupoid(dataclasses.replace(m, comp=comp)).failed_keys()


def test_whole_circle_is_a_translation_subset_only_without_the_twist():
    whole = {"C": ["q1", "q2", "q3", "q4"]}
    a, rep = extract_and_verify(z3_circle_model(False), whole)
    assert rep.ok and a.charts[0].group.order == 3
    with pytest.raises(NotTranslationSubset):
        atlas_from_groupoid(z3_circle_model(True), whole)


def test_disconnected_subsets_are_rejected():
    # q1 and q2 are not adjacent, so sections over both double count every arrow
    with pytest.raises(NotTranslationSubset):
        bisection_group(z3_circle_model(False), (0, 1))


def test_local_bisections_need_nested_quotients():
    G = z3_circle_model(False)
    with pytest.raises(EvaluationNotBijective):
        local_bisections(G, bisection_group(G, (0,)), bisection_group(G, (1,)))


def test_cover_problems():
    G = z3_circle_model(False)
    _, rep = extract_and_verify(G, {"U1": ["q1", "q3", "q4"], "U3": ["q3"]})
    assert rep.failed_keys() == ["model.cover_objects"]
    with pytest.raises(PosetViolation):
        atlas_from_groupoid(G, {"A": ["q3"], "B": ["q3"], "C": ["q1", "q2", "q3", "q4"]})


@pytest.mark.parametrize("twisted", (False, True))
def test_fine_cover_extraction_verifies(twisted):
    a, rep = extract_and_verify(z3_circle_model(twisted), FINE_CIRCLE_COVER)
    assert rep.ok, rep.failed_keys()
    assert len(a.charts) == 8


@pytest.mark.parametrize("stem", ("eq_a", "eq_b", "torsor_pair", "klein_point", "regular_z3"))
def test_roundtrip(stem):
    rep, before, after = roundtrip_check(atlas(stem))
    assert rep.ok, rep.failed_keys()
    assert before == after


@pytest.mark.parametrize("name", ("groupoid_G.json", "groupoid_H.json", "groupoid_trivial.json"))
def test_groupoid_documents_roundtrip(name):
    model, covers = load_groupoid(fx(name))
    assert validate_groupoid(model).ok
    doc = groupoid_to_document(model, covers, name="again")
    model2, covers2 = groupoid_from_document(doc)
    assert covers2 == covers
    assert model2.arrows == model.arrows and model2.comp == model.comp and model2.links == model.links


def test_documented_models_match_the_builders():
    G, covers = load_groupoid(fx("groupoid_G.json"))
    assert covers["coarse"] == CIRCLE_COVER
    a = atlas_from_groupoid(G, covers["coarse"])
    assert verify_atlas(a).ok
    assert find_atlas_isomorphism(a, atlas("eq_a")) is not None
