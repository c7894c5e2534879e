"""Finite groups as Cayley tables over dense ids, homomorphisms, actions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations, product

from .errors import (GroupError, NoIdentity, NoInverse, NotAction,
                     NotAssociative, NotHomomorphism, OrderBoundExceeded)


@dataclass(frozen=True)
class FiniteGroup:
    table: tuple
    identity: int
    inverses: tuple
    labels: tuple = field(default=None, compare=False, repr=False)

    @property
    def order(self):
        return len(self.table)

    @property
    def elements(self):
        return range(len(self.table))

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self.inverses[a]

    def label(self, a):
        return self.labels[a] if self.labels else str(a)

    def element_order(self, g):
        k, x = 1, g
        while x != self.identity:
            x = self.table[x][g]
            k += 1
        return k

    def is_abelian(self):
        t = self.table
        return all(t[a][b] == t[b][a] for a in self.elements for b in self.elements)

    def power(self, g, k):
        x = self.identity
        for _ in range(k % self.element_order(g)):
            x = self.table[x][g]
        return x


def make_group(table, labels=None) -> FiniteGroup:
    n = len(table)
    if n == 0:
        raise GroupError("a group needs at least one element")
    rows = tuple(tuple(int(v) for v in row) for row in table)
    for a, row in enumerate(rows):
        if len(row) != n:
            raise GroupError(f"row {a} has length {len(row)}, expected {n}", witness=a)
        for b, v in enumerate(row):
            if not 0 <= v < n:
                raise GroupError(f"entry {a}*{b}={v} out of range", witness=(a, b))

    identity = next((e for e in range(n)
                     if all(rows[e][g] == g and rows[g][e] == g for g in range(n))), None)
    if identity is None:
        raise NoIdentity("no two-sided identity element")

    inverses = []
    for g in range(n):
        h = next((h for h in range(n) if rows[g][h] == identity and rows[h][g] == identity), None)
        if h is None:
            raise NoInverse(f"element {g} has no two-sided inverse", witness=g)
        inverses.append(h)

    for a in range(n):
        ra = rows[a]
        for b in range(n):
            ab = ra[b]
            for c in range(n):
                if rows[ab][c] != ra[rows[b][c]]:
                    raise NotAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})", witness=(a, b, c))

    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise GroupError("labels must be distinct and one per element")
    return FiniteGroup(rows, identity, tuple(inverses), labels)


# --- standard groups -------------------------------------------------------

def cyclic(n) -> FiniteGroup:
    return make_group([[(a + b) % n for b in range(n)] for a in range(n)],
                      labels=[str(a) for a in range(n)])


def trivial_group() -> FiniteGroup:
    return cyclic(1)


def direct_product(G, H) -> FiniteGroup:
    pairs = list(product(G.elements, H.elements))
    index = {p: k for k, p in enumerate(pairs)}
    table = [[index[(G.mul(a, c), H.mul(b, d))] for (c, d) in pairs] for (a, b) in pairs]
    labels = [f"({G.label(a)},{H.label(b)})" for a, b in pairs]
    return make_group(table, labels)


def klein4() -> FiniteGroup:
    return make_group([[a ^ b for b in range(4)] for a in range(4)],
                      labels=["e", "a", "b", "ab"])


def permutation_group(generators, degree=None) -> FiniteGroup:
    """Closure of a set of permutations (tuples); the identity gets id 0."""
    generators = [tuple(g) for g in generators]
    degree = degree if degree is not None else len(generators[0])
    ident = tuple(range(degree))
    elems, seen = [ident], {ident}
    k = 0
    while k < len(elems):
        p = elems[k]
        for g in generators:
            q = tuple(g[p[i]] for i in range(degree))
            if q not in seen:
                seen.add(q)
                elems.append(q)
        k += 1
    index = {p: i for i, p in enumerate(elems)}
    # composition convention: (p*q)(i) = p(q(i))
    table = [[index[tuple(p[q[i]] for i in range(degree))] for q in elems] for p in elems]
    return make_group(table)


def symmetric(n) -> FiniteGroup:
    if n < 2:
        return trivial_group()
    gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
    return permutation_group(gens, n)


def dihedral(n) -> FiniteGroup:
    """Symmetries of a regular n-gon (order 2n)."""
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return permutation_group([rot, ref], n)


def quaternion() -> FiniteGroup:
    # regular representation of Q8 on {±1, ±i, ±j, ±k}
    names = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
    unit = {("1", x): x for x in "1ijk"}
    unit.update({(x, "1"): x for x in "1ijk"})
    unit.update({("i", "i"): "-1", ("j", "j"): "-1", ("k", "k"): "-1",
                 ("i", "j"): "k", ("j", "k"): "i", ("k", "i"): "j",
                 ("j", "i"): "-k", ("k", "j"): "-i", ("i", "k"): "-j"})

    def mul(a, b):
        sign = (a.startswith("-")) ^ (b.startswith("-"))
        r = unit[(a.lstrip("-"), b.lstrip("-"))]
        if sign:
            r = r[1:] if r.startswith("-") else "-" + r
        return r

    idx = {x: k for k, x in enumerate(names)}
    return make_group([[idx[mul(a, b)] for b in names] for a in names], names)


def small_groups(max_order=8):
    """One representative of each isomorphism type up to order 8."""
    groups = [cyclic(n) for n in range(1, max_order + 1)]
    extra = [(4, klein4), (6, lambda: symmetric(3)), (8, lambda: direct_product(cyclic(2), cyclic(4))),
             (8, lambda: direct_product(klein4(), cyclic(2))), (8, lambda: dihedral(4)), (8, quaternion)]
    groups += [make() for n, make in extra if n <= max_order]
    return groups


# --- homomorphisms -----------------------------------------------------------

@dataclass(frozen=True)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    map: tuple

    def __call__(self, g):
        return self.map[g]

    def is_injective(self):
        return len(set(self.map)) == len(self.map)

    def is_surjective(self):
        return len(set(self.map)) == self.target.order

    def then(self, other: GroupHom) -> GroupHom:
        return GroupHom(self.source, other.target, tuple(other.map[x] for x in self.map))


def make_hom(src, tgt, mapping) -> GroupHom:
    mapping = tuple(int(v) for v in mapping)
    if len(mapping) != src.order or any(not 0 <= v < tgt.order for v in mapping):
        raise NotHomomorphism("map is not total on the source group")
    for a in src.elements:
        for b in src.elements:
            if mapping[src.mul(a, b)] != tgt.mul(mapping[a], mapping[b]):
                raise NotHomomorphism(f"f({a}*{b}) != f({a})*f({b})", witness=(a, b))
    return GroupHom(src, tgt, mapping)


def identity_hom(G) -> GroupHom:
    return GroupHom(G, G, tuple(G.elements))


def kernel(hom) -> list:
    e = hom.target.identity
    return [g for g in hom.source.elements if hom.map[g] == e]


def image(hom) -> list:
    return sorted(set(hom.map))


def is_subgroup(G, elems) -> bool:
    s = set(elems)
    return G.identity in s and all(G.mul(a, G.inv(b)) in s for a in s for b in s)


def is_normal(G, elems) -> bool:
    s = set(elems)
    return all(G.mul(G.mul(g, n), G.inv(g)) in s for g in G.elements for n in s)


def conjugate_hom(hom, h) -> GroupHom:
    """g -> h * hom(g) * h^-1"""
    H = hom.target
    hi = H.inv(h)
    return GroupHom(hom.source, H, tuple(H.mul(H.mul(h, x), hi) for x in hom.map))


def subgroup_closure(G, gens):
    elems, seen = [G.identity], {G.identity}
    k = 0
    while k < len(elems):
        for s in gens:
            y = G.mul(elems[k], s)
            if y not in seen:
                seen.add(y)
                elems.append(y)
        k += 1
    return seen


def generating_set(G) -> list:
    gens, span = [], {G.identity}
    # prefer high-order elements so the set stays short
    for g in sorted(G.elements, key=lambda x: (-G.element_order(x), x)):
        if g not in span:
            gens.append(g)
            span = subgroup_closure(G, gens)
    return gens


def _extend(G, H, gens, images):
    value = [None] * G.order
    value[G.identity] = H.identity
    queue = [G.identity]
    for x in queue:
        for s, hs in zip(gens, images):
            y, v = G.mul(x, s), H.mul(value[x], hs)
            if value[y] is None:
                value[y] = v
                queue.append(y)
            elif value[y] != v:
                return None
    return tuple(value)


def enumerate_homs(G, H, injective=False):
    """All homomorphisms G -> H, determined by images of a generating set."""
    gens = generating_set(G)
    choices = [[h for h in H.elements if G.element_order(s) % H.element_order(h) == 0]
               for s in gens]
    out = []
    for images in product(*choices):
        m = _extend(G, H, gens, images)
        if m is not None and (not injective or len(set(m)) == len(m)):
            out.append(GroupHom(G, H, m))
    return out


def isomorphisms(G, H) -> list:
    if G.order != H.order:
        return []
    return enumerate_homs(G, H, injective=True)


def enumerate_automorphisms(G, bound=64) -> list:
    if G.order > bound:
        raise OrderBoundExceeded(f"order {G.order} exceeds bound {bound}")
    return isomorphisms(G, G)


def brute_force_automorphisms(G) -> list:
    """Reference enumeration over every bijection; only for tiny groups."""
    out = []
    for p in permutations(G.elements):
        if all(p[G.mul(a, b)] == G.mul(p[a], p[b]) for a in G.elements for b in G.elements):
            out.append(GroupHom(G, G, tuple(p)))
    return out


_NAMED = {
    (1, (1,), True): "1",
    (4, (1, 2, 2, 2), True): "C2xC2",
    (6, (1, 2, 2, 2, 3, 3), False): "S3",
    (8, (1, 2, 2, 2, 4, 4, 4, 4), True): "C4xC2",
    (8, (1, 2, 2, 2, 2, 2, 2, 2), True): "C2xC2xC2",
    (8, (1, 2, 2, 2, 2, 2, 4, 4), False): "D4",
    (8, (1, 2, 4, 4, 4, 4, 4, 4), False): "Q8",
}


def iso_label(G) -> str:
    """Isomorphism-class label; exact for order <= 8, a signature beyond."""
    orders = tuple(sorted(G.element_order(g) for g in G.elements))
    if orders[-1] == G.order and G.order > 1:
        return f"C{G.order}"
    key = (G.order, orders, G.is_abelian())
    if key in _NAMED:
        return _NAMED[key]
    hist = ",".join(f"{o}^{c}" for o, c in sorted(Counter(orders).items()))
    return f"G{G.order}[{hist}]{'ab' if key[2] else ''}"


# --- actions -------------------------------------------------------------------

@dataclass(frozen=True)
class GroupAction:
    group: FiniteGroup
    set_size: int
    act: tuple          # act[g][p]

    def __call__(self, g, p):
        return self.act[g][p]

    def orbit(self, p):
        return sorted({self.act[g][p] for g in self.group.elements})

    def orbits(self):
        seen, out = set(), []
        for p in range(self.set_size):
            if p not in seen:
                o = self.orbit(p)
                seen.update(o)
                out.append(o)
        return out

    def stabilizer(self, p):
        return [g for g in self.group.elements if self.act[g][p] == p]


def make_action(G, set_size, act) -> GroupAction:
    act = tuple(tuple(int(v) for v in row) for row in act)
    if len(act) != G.order or any(len(r) != set_size for r in act):
        raise NotAction("action table has the wrong shape")
    for g in G.elements:
        for p in range(set_size):
            if not 0 <= act[g][p] < set_size:
                raise NotAction(f"{g}.{p} out of range", witness=(g, p))
    for p in range(set_size):
        if act[G.identity][p] != p:
            raise NotAction(f"identity moves point {p}", witness=(G.identity, p))
    for g in G.elements:
        for h in G.elements:
            gh = G.mul(g, h)
            for p in range(set_size):
                if act[gh][p] != act[g][act[h][p]]:
                    raise NotAction(f"({g}*{h}).{p} != {g}.({h}.{p})", witness=(g, h, p))
    return GroupAction(G, set_size, act)


def trivial_action(G, set_size) -> GroupAction:
    return GroupAction(G, set_size, tuple(tuple(range(set_size)) for _ in G.elements))


@dataclass(frozen=True)
class ReducedImage:
    group: FiniteGroup       # image of G as a permutation group
    quotient: GroupHom       # G -> image
    action: GroupAction      # faithful action of the image on the same set


def reduced_image(action) -> ReducedImage:
    G = action.group
    perms, index = [], {}
    # identity first so the reduced identity has id 0
    for g in [G.identity] + [g for g in G.elements if g != G.identity]:
        p = action.act[g]
        if p not in index:
            index[p] = len(perms)
            perms.append(p)
    n = action.set_size
    table = [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    red = make_group(table)
    quotient = GroupHom(G, red, tuple(index[action.act[g]] for g in G.elements))
    return ReducedImage(red, quotient, GroupAction(red, n, tuple(perms)))
