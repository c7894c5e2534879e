import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbatlas.errors import GroupError, NoIdentity, NoInverse, NotAction, NotAssociative, NotHomomorphism
from orbatlas.group_core import (brute_force_automorphisms, conjugate_hom, cyclic, dihedral, direct_product,
                                 enumerate_automorphisms, enumerate_homs, identity_hom, is_normal, isomorphisms,
                                 iso_label, kernel, klein4, make_action, make_group, make_hom, permutation_group,
                                 quaternion, reduced_image, small_groups, symmetric, trivial_action)

GROUPS = small_groups(8)
group_st = st.sampled_from(GROUPS)


def test_small_groups_are_pairwise_non_isomorphic():
    labels = [iso_label(G) for G in GROUPS]
    assert len(GROUPS) == 14
    assert len(set(labels)) == 14
    for a in range(len(GROUPS)):
        for b in range(a + 1, len(GROUPS)):
            assert not isomorphisms(GROUPS[a], GROUPS[b])


@pytest.mark.parametrize("G", GROUPS, ids=iso_label)
def test_group_axioms(G):
    e = G.identity
    for a in G.elements:
        assert G.mul(a, e) == a == G.mul(e, a)
        assert G.mul(a, G.inv(a)) == e
        for b in G.elements:
            for c in G.elements:
                assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))


def test_make_group_rejects_broken_tables():
    with pytest.raises(NoIdentity):
        make_group([[1, 0], [0, 0]])
    with pytest.raises(NoInverse):
        make_group([[0, 1, 2], [1, 1, 1], [2, 1, 2]])
    # a Latin square with identity 0 that is not associative
    bad = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(NotAssociative):
        make_group(bad)
    with pytest.raises(GroupError):
        make_group([])
    with pytest.raises(GroupError):
        make_group([[0, 5], [1, 0]])


@pytest.mark.parametrize("G, count", [(cyclic(1), 1), (cyclic(2), 1), (cyclic(3), 2), (klein4(), 6),
                                      (cyclic(5), 4), (cyclic(6), 2), (symmetric(3), 6)])
def test_automorphisms_match_brute_force(G, count):
    fast = sorted(h.map for h in enumerate_automorphisms(G))
    assert fast == sorted(h.map for h in brute_force_automorphisms(G))
    assert len(fast) == count


@pytest.mark.parametrize("G, count", [(cyclic(8), 4), (quaternion(), 24), (dihedral(4), 8),
                                      (direct_product(klein4(), cyclic(2)), 168),
                                      (direct_product(cyclic(2), cyclic(4)), 8)])
def test_automorphism_counts_order_eight(G, count):
    assert len(enumerate_automorphisms(G)) == count


@settings(max_examples=40, deadline=None)
@given(group_st, group_st)
def test_enumerated_homs_are_all_the_homs(G, H):
    homs = {h.map for h in enumerate_homs(G, H)}
    for m in homs:
        make_hom(G, H, m)
    assert tuple(H.identity for _ in G.elements) in homs
    if G.order * H.order <= 16:
        # brute force over all maps
        from itertools import product
        every = {m for m in product(H.elements, repeat=G.order)
                 if all(m[G.mul(a, b)] == H.mul(m[a], m[b]) for a in G.elements for b in G.elements)}
        assert every == homs


@settings(max_examples=40, deadline=None)
@given(group_st, st.data())
def test_conjugate_hom_is_a_hom_with_normal_kernel(G, data):
    H = data.draw(group_st)
    homs = enumerate_homs(G, H)
    phi = data.draw(st.sampled_from(homs))
    h = data.draw(st.sampled_from(list(H.elements)))
    psi = conjugate_hom(phi, h)
    make_hom(G, H, psi.map)
    assert is_normal(G, kernel(phi))
    assert sorted(kernel(psi)) == sorted(kernel(phi))


def test_make_hom_rejects_non_homs():
    with pytest.raises(NotHomomorphism):
        make_hom(cyclic(2), cyclic(2), [1, 0])
    with pytest.raises(NotHomomorphism):
        make_hom(cyclic(2), cyclic(2), [0])


def test_identity_hom_composes():
    G = symmetric(3)
    phi = isomorphisms(G, G)[3]
    assert identity_hom(G).then(phi).map == phi.map


@pytest.mark.parametrize("G", GROUPS, ids=iso_label)
def test_regular_action_is_faithful_and_transitive(G):
    act = make_action(G, G.order, [[G.mul(g, x) for x in G.elements] for g in G.elements])
    assert act.orbits() == [list(G.elements)]
    assert all(act.stabilizer(p) == [G.identity] for p in G.elements)
    red = reduced_image(act)
    assert red.group.order == G.order and red.quotient.is_injective()


def _closure_order(gens, degree):
    # same breadth-first order permutation_group uses, so index k is element k
    elems, seen = [tuple(range(degree))], {tuple(range(degree))}
    for p in elems:
        for g in gens:
            q = tuple(g[p[i]] for i in range(degree))
            if q not in seen:
                seen.add(q)
                elems.append(q)
    return elems


def test_orbit_stabilizer_for_permutation_groups():
    for gens, degree in (([(1, 0, 2, 3), (1, 2, 3, 0)], 4), ([(1, 2, 0, 3, 4), (0, 1, 2, 4, 3)], 5)):
        G = permutation_group(gens, degree)
        act = make_action(G, degree, _closure_order(gens, degree))
        for p in range(degree):
            assert len(act.orbit(p)) * len(act.stabilizer(p)) == G.order


def test_make_action_rejects_non_actions():
    Z2 = cyclic(2)
    with pytest.raises(NotAction):
        make_action(Z2, 2, [[1, 0], [1, 0]])
    with pytest.raises(NotAction):
        make_action(Z2, 3, [[0, 1, 2], [1, 2, 0]])
    with pytest.raises(NotAction):
        make_action(Z2, 2, [[0, 1]])


def test_reduced_image_of_ineffective_action():
    K = klein4()
    # a acts as the swap, b acts trivially
    act = make_action(K, 2, [[0, 1], [1, 0], [0, 1], [1, 0]])
    red = reduced_image(act)
    assert red.group.order == 2
    assert sorted(kernel(red.quotient)) == [0, 2]
    triv = reduced_image(trivial_action(K, 3))
    assert triv.group.order == 1


def test_iso_labels():
    assert iso_label(cyclic(3)) == "C3"
    assert iso_label(klein4()) == "C2xC2"
    assert iso_label(symmetric(3)) == "S3"
    assert iso_label(quaternion()) == "Q8"
    assert iso_label(cyclic(1)) == "1"
