import pytest

from helpers import atlas, fx, with_cells
from orbatlas.atlas import (Atlas, canonical_atlas, complete_atlas, find_atlas_isomorphism, interpolate,
                            strong_compat_witness, theorem_checks, verify_atlas)
from orbatlas.documents import load_atlas
from orbatlas.errors import NoOverlap, OrbatlasError
from orbatlas.group_core import cyclic, klein4
from orbatlas.satake import build_layer, make_chart

ATLASES = ("eq_a", "eq_b", "single_trivial", "regular_z3", "klein_point", "torsor_pair",
           "G_coarse_atlas", "G_fine_atlas")


@pytest.mark.parametrize("stem", ATLASES)
def test_fixture_atlases_verify(stem):
    rep = verify_atlas(atlas(stem))
    assert rep.ok, rep.failed_keys()
    thm = theorem_checks(atlas(stem))
    assert thm.ok, thm.failed_keys()


def test_mutated_fixture_fails_with_named_keys():
    rep = verify_atlas(load_atlas(fx("eq_a_mutated.json")))
    assert "atlas.abst_bimodule_laws" in rep.failed_keys()
    assert "atlas.pentagon" in rep.failed_keys()


def test_single_composition_entry_breaks_the_pentagon():
    for key, nu, lam, v in (((0, 0, 2), 0, 0, 1), ((0, 2, 2), 1, 0, 2), ((1, 1, 3), 2, 0, 0)):
        bad = with_cells(atlas("eq_b"), key, nu, lam, v)
        keys = verify_atlas(bad).failed_keys()
        assert "atlas.pentagon" in keys and "atlas.cells_equivariant" in keys


def test_unit_cell_corruption():
    a = atlas("eq_a")
    unit = dict(a.unit)
    unit[0] = (1, 2, 0)
    keys = verify_atlas(Atlas(a.layer, a.abst, a.comp_cells, unit, a.realization)).failed_keys()
    assert keys == ["atlas.unit_coherence"]


def test_realization_corruption():
    a = atlas("torsor_pair")
    realization = dict(a.realization)
    realization[(0, 1)] = (1, 0, 2)
    keys = verify_atlas(Atlas(a.layer, a.abst, a.comp_cells, a.unit, realization)).failed_keys()
    assert keys == ["atlas.realization_equivariant"]
    realization[(0, 1)] = (0, 0, 0)
    keys = verify_atlas(Atlas(a.layer, a.abst, a.comp_cells, a.unit, realization)).failed_keys()
    assert "atlas.realization_surjective" in keys


def test_interpolation_is_unique_and_inverts_composition():
    a = atlas("eq_a")
    for (k, j, i) in a.triples():
        for nu in a.abst[(k, j)].carrier:
            for kap in a.abst[(j, i)].carrier:
                lam = a.compose(k, j, i, nu, kap)
                assert interpolate(a, k, j, i, nu, lam) == kap


def test_interpolation_needs_meeting_images():
    a = atlas("eq_a")
    # U3 = {q3} and U4 = {q4} sit in U1 at different samples
    with pytest.raises(NoOverlap):
        interpolate(a, 0, 3, 2, 0, 0)


def test_strong_compat_witness_for_the_two_points_inside_u1():
    a = atlas("eq_a")
    # U3 into U1 and U1 into itself meet at q3
    w = strong_compat_witness(a, 0, 2, 0, 0, 0, 0, 1)
    l, y, k14, k24 = w
    assert a.charts[l].name == "U3"
    assert a.compose(0, 2, l, 0, k14) == a.compose(0, 0, l, 0, k24)
    with pytest.raises(NoOverlap):
        strong_compat_witness(a, 0, 2, 0, 0, 3, 0, 0)


def test_fixtures_are_not_isomorphic_to_each_other():
    assert find_atlas_isomorphism(atlas("eq_a"), atlas("eq_a")) is not None
    assert find_atlas_isomorphism(atlas("eq_b"), atlas("eq_b")) is not None
    assert find_atlas_isomorphism(atlas("eq_a"), atlas("eq_b")) is None
    assert find_atlas_isomorphism(atlas("eq_a"), atlas("G_coarse_atlas")) is not None


def test_canonical_atlas_requires_effective_charts():
    K = klein4()
    layer = build_layer(["p"], [make_chart("K", ["p"], K, [[0]] * 4, [0])])
    with pytest.raises(OrbatlasError):
        canonical_atlas(layer)
    completed = complete_atlas(layer)
    assert verify_atlas(completed).ok
    assert completed.abst[(0, 0)].size == 4


def test_canonical_atlas_of_effective_layer():
    Z3 = cyclic(3)
    rot = [[0, 1, 2, 3], [1, 2, 0, 3], [2, 0, 1, 3]]
    A = make_chart("A", ["a", "b", "c", "d"], Z3, rot, [0, 0, 0, 1])
    B = make_chart("B", ["s"], cyclic(1), [[0]], [0])
    can = canonical_atlas(build_layer(["q0", "q1"], [A, B]))
    assert verify_atlas(can).ok and theorem_checks(can).ok
    assert can.abst[(0, 1)].size == 3


def test_complete_atlas_demands_missing_cells():
    a = atlas("eq_a")
    abst = {k: v for k, v in a.abst.items() if k != (0, 2)}
    with pytest.raises(OrbatlasError):
        complete_atlas(a.layer, abst, a.comp_cells, a.unit, a.realization)
