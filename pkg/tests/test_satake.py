from itertools import product

import pytest

from helpers import atlas, with_con
from orbatlas.errors import NotAction, PosetViolation
from orbatlas.group_core import cyclic, enumerate_homs, klein4, symmetric, trivial_group
from orbatlas.satake import (build_layer, build_poset, con_module, derive_embeddings, make_chart, maps_module,
                             QuotientModel, validate_chart, validate_satake)

ATLASES = ("eq_a", "eq_b", "single_trivial", "regular_z3", "klein_point", "torsor_pair",
           "G_coarse_atlas", "G_fine_atlas")


def brute_embeddings(src, tgt):
    """Every injective projection-compatible map equivariant for some reduced-group hom."""
    Rs, Rt = src.reduced, tgt.reduced
    homs = [h for h in enumerate_homs(Rs.group, Rt.group) if h.is_injective()]
    out = []
    for f in product(range(tgt.size), repeat=src.size):
        if len(set(f)) < len(f) or any(tgt.proj[f[x]] != src.proj[x] for x in range(src.size)):
            continue
        if any(all(f[Rs.action.act[r][x]] == Rt.action.act[h.map[r]][f[x]]
                   for r in Rs.group.elements for x in range(src.size)) for h in homs):
            out.append(f)
    return sorted(out)


@pytest.mark.parametrize("stem", ATLASES)
def test_fixture_layers_validate(stem):
    a = atlas(stem)
    for c in a.charts:
        assert validate_chart(c, a.layer.quotient.points).ok
    rep = validate_satake(a.layer)
    assert rep.ok, rep.failed_keys()


@pytest.mark.parametrize("stem", ATLASES)
def test_derived_embeddings_match_brute_force(stem):
    a = atlas(stem)
    for (j, i) in a.arrows:
        if i != j:
            assert a.layer.con[(j, i)] == tuple(brute_embeddings(a.charts[i], a.charts[j]))


def test_embeddings_of_a_point_into_a_regular_chart():
    a = atlas("torsor_pair")
    A, B = a.charts
    assert derive_embeddings(B, A) == [(0,), (1,), (2,)]
    Bm, cls, _ = con_module(a.layer, (0, 1))
    assert cls.ok and Bm.size == 3


def test_chart_checks_catch_bad_projections():
    Z2 = cyclic(2)
    swap = [[0, 1], [1, 0]]
    bad_proj = make_chart("X", ["a", "b"], Z2, swap, [0, 1])
    assert "chart.projection_invariant" in validate_chart(bad_proj).failed_keys()
    # two samples over one point but the group fixes both
    split = make_chart("Y", ["a", "b"], Z2, [[0, 1], [0, 1]], [0, 0])
    assert "chart.fibers_are_orbits" in validate_chart(split).failed_keys()
    declared = make_chart("Z", ["a"], Z2, [[0], [0]], [0], declared_support=frozenset({0, 1}))
    assert "chart.projection_onto_support" in validate_chart(declared).failed_keys()
    with pytest.raises(NotAction):
        make_chart("W", ["a", "b"], Z2, [[1, 0], [1, 0]], [0, 0])


def test_ineffective_chart_reduces():
    c = make_chart("K", ["p", "q"], klein4(), [[0, 1], [1, 0], [0, 1], [1, 0]], [0, 0])
    assert c.reduced.group.order == 2
    assert validate_chart(c).ok


def test_duplicate_supports_are_rejected():
    Z1 = trivial_group()
    charts = [make_chart("P", ["p"], Z1, [[0]], [0]), make_chart("P2", ["p"], Z1, [[0]], [0])]
    with pytest.raises(PosetViolation):
        build_layer(["p"], charts)
    with pytest.raises(PosetViolation):
        build_poset(QuotientModel(("p",), (frozenset({0}), frozenset({0}))))


def test_local_compatibility_failure():
    Z1 = trivial_group()
    X = make_chart("X", ["p", "q"], Z1, [[0, 1]], [0, 1])
    Y = make_chart("Y", ["q", "r"], Z1, [[0, 1]], [1, 2])
    rep = validate_satake(build_layer(["p", "q", "r"], [X, Y]))
    assert rep.failed_keys() == ["satake.local_compatibility"]
    Q = make_chart("Q", ["q"], Z1, [[0]], [1])
    assert validate_satake(build_layer(["p", "q", "r"], [X, Y, Q])).ok


def test_corrupted_embedding_is_caught():
    a = with_con(atlas("eq_a"), (0, 2), [(2,)])
    keys = validate_satake(a.layer).failed_keys()
    assert "satake.con_projection" in keys and "satake.strong_compatibility" in keys


def test_declared_embeddings_not_closed_under_symmetries():
    Z3 = cyclic(3)
    rot = [[0, 1, 2, 3], [1, 2, 0, 3], [2, 0, 1, 3]]
    A = make_chart("A", ["a", "b", "c", "d"], Z3, rot, [0, 0, 0, 1])
    P = make_chart("P", ["s"], trivial_group(), [[0]], [0])
    layer = build_layer(["q", "r"], [A, P], declared={(0, 1): [(0,)]})
    rep = validate_satake(layer)
    assert "satake.con_atlas_bimodule" in rep.failed_keys()
    B, cls, witness = maps_module([(0,)], P, A)
    assert B is None and witness[0] == "left"


def test_symmetric_chart_self_embeddings():
    S3 = symmetric(3)
    # S3 acting on three samples through the permutation closure order
    from orbatlas.group_core import permutation_group
    gens = [(1, 0, 2), (1, 2, 0)]
    G = permutation_group(gens, 3)
    elems = [(0, 1, 2)]
    for p in elems:
        for g in gens:
            q = tuple(g[p[i]] for i in range(3))
            if q not in elems:
                elems.append(q)
    c = make_chart("S", ["a", "b", "c"], G, elems, [0, 0, 0])
    assert G.order == S3.order
    assert len(derive_embeddings(c, c, same=True)) == 6
    layer = build_layer(["q"], [c])
    assert validate_satake(layer).ok
