import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import conjugate_by_hand, fixture_modules, orbit_tensor_size
from orbatlas.bimodule import (associator, check_bimodule_map, classify, disjoint_union, find_isomorphism,
                               hom_to_bimodule, induced_hom, iter_isomorphisms, law_failures, left_unitor,
                               make_bimodule, permuted, random_atlas_bimodule, random_bimodule,
                               random_relabel, random_torsor_pair, right_unitor, tensor,
                               transport, trivial_bimodule)
from orbatlas.errors import MiddleGroupMismatch, NotAtlasBimodule, NotBimodule, SizeBoundExceeded
from orbatlas.group_core import (conjugate_hom, cyclic, enumerate_homs, isomorphisms, klein4, small_groups,
                                 symmetric, trivial_group)

GROUPS = small_groups(8)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_hom_module_is_an_atlas_bimodule_exactly_when_injective():
    for G in GROUPS[:6]:
        for H in GROUPS[:6]:
            for phi in enumerate_homs(G, H):
                B = hom_to_bimodule(phi)
                assert not law_failures(B)
                assert classify(B).ok == phi.is_injective()


def test_make_bimodule_rejects_incompatible_actions():
    Z2 = cyclic(2)
    with pytest.raises(NotBimodule):
        # two carrier elements on the left, one on the right
        make_bimodule(Z2, Z2, [[0, 1], [1, 0]], [[0, 0]])
    with pytest.raises(NotBimodule):
        # left swaps, right fixes 0 but moves 1: the two actions do not commute
        make_bimodule(Z2, Z2, [[0, 1, 2], [1, 0, 2]], [[0, 0], [1, 2], [2, 1]])
    B = make_bimodule(Z2, Z2, [[0, 1], [1, 0]], [[0, 1], [1, 0]])
    assert classify(B).ok


def test_classify_reports_each_failure():
    Z2, Z3 = cyclic(2), cyclic(3)
    empty = make_bimodule(Z2, Z2, [[], []], [])
    assert classify(empty).first_failure()[0] == "nonempty"
    fixed = make_bimodule(Z2, trivial_group(), [[0], [0]], [[0]])
    assert classify(fixed).first_failure()[0] == "left_free"
    two = disjoint_union(trivial_bimodule(Z3), trivial_bimodule(Z3))
    assert classify(two).first_failure()[0] == "left_transitive"
    # right action through the zero hom is not free
    zero = hom_to_bimodule(enumerate_homs(Z2, Z3)[0])
    assert classify(zero).first_failure()[0] == "right_free"
    with pytest.raises(NotAtlasBimodule):
        induced_hom(zero, 0)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_induced_hom_conjugacy(seed):
    rng = random.Random(seed)
    B = None
    while B is None:
        H, G = rng.choice(GROUPS), rng.choice(GROUPS)
        B = random_atlas_bimodule(rng, H, G)
    for m in B.carrier:
        lam = induced_hom(B, m)
        assert lam.is_injective()
        for h in H.elements:
            assert induced_hom(B, B.left[h][m]).map == conjugate_by_hand(H, lam.map, h)
            assert conjugate_hom(lam, h).map == conjugate_by_hand(H, lam.map, h)


@pytest.mark.parametrize("tag, B", fixture_modules(), ids=lambda x: x if isinstance(x, str) else "")
def test_fixture_modules_are_atlas_bimodules(tag, B):
    assert classify(B).ok, tag


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_tensor_matches_orbit_oracle(seed):
    rng = random.Random(seed)
    N, M = random_torsor_pair(rng, GROUPS)
    T = tensor(N, M)
    assert not law_failures(T)
    assert T.size == orbit_tensor_size(N, M) == N.size * M.size // M.left_group.order


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_tensor_of_arbitrary_modules_matches_oracle(seed):
    rng = random.Random(seed)
    G, H, K = (rng.choice(GROUPS[:6]) for _ in range(3))
    N, M = random_bimodule(rng, K, H), random_bimodule(rng, H, G)
    assert tensor(N, M).size == orbit_tensor_size(N, M)


def test_tensor_of_hom_modules_is_the_composite():
    S3, Z2, Z3 = symmetric(3), cyclic(2), cyclic(3)
    for phi in enumerate_homs(Z2, S3, injective=True):
        for psi in enumerate_homs(S3, S3, injective=True):
            T = tensor(hom_to_bimodule(psi), hom_to_bimodule(phi))
            assert find_isomorphism(T, hom_to_bimodule(phi.then(psi))) is not None
    with pytest.raises(MiddleGroupMismatch):
        tensor(trivial_bimodule(Z2), trivial_bimodule(Z3))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_unitors_and_associator_are_isomorphisms(seed):
    rng = random.Random(seed)
    small = GROUPS[:7]
    G, H, K, L = (rng.choice(small) for _ in range(4))
    M, N, P = random_bimodule(rng, H, G, 1), random_bimodule(rng, K, H, 1), random_bimodule(rng, L, K, 1)
    for f in (left_unitor(M), right_unitor(M), associator(P, N, M)):
        assert f.is_bijective()
        assert check_bimodule_map(f, f.source, f.target).ok


def test_isomorphism_search_finds_relabelings():
    rng = random.Random(3)
    for H, G in ((klein4(), cyclic(2)), (symmetric(3), cyclic(3)), (cyclic(4), cyclic(2))):
        B = random_atlas_bimodule(rng, H, G, pieces=2)
        C = random_relabel(rng, B)
        f = find_isomorphism(B, C)
        assert f is not None and check_bimodule_map(f, B, C).ok
        autos = list(iter_isomorphisms(B, B))
        assert tuple(B.carrier) in autos


def test_isomorphism_search_bound():
    B = trivial_bimodule(cyclic(8))
    B2 = disjoint_union(disjoint_union(B, B), B)
    with pytest.raises(SizeBoundExceeded):
        find_isomorphism(B2, B2, bound=16)


def test_non_conjugate_homs_give_non_isomorphic_modules():
    # the three embeddings Z2 -> Klein have different images
    K, Z2 = klein4(), cyclic(2)
    homs = enumerate_homs(Z2, K, injective=True)
    mods = [hom_to_bimodule(h) for h in homs]
    assert len(homs) == 3
    for a in range(3):
        for b in range(3):
            assert (find_isomorphism(mods[a], mods[b]) is not None) == (a == b)


def test_transport_and_permuted_keep_laws():
    S3 = symmetric(3)
    B = trivial_bimodule(S3)
    auts = isomorphisms(S3, S3)
    for a in auts:
        T = transport(B, a, a)
        assert not law_failures(T) and classify(T).ok
    P = permuted(B, [5, 4, 3, 2, 1, 0])
    assert find_isomorphism(B, P) is not None
