"""Group bimodules: sets with commuting left and right actions.

A bimodule ``B`` from G to H (drawn G -|-> H) carries a left H action and a
right G action.  ``B.left[h][m]`` is h.m and ``B.right[m][g]`` is m.g.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (MiddleGroupMismatch, NonInjective, NotAtlasBimodule,
                     NotBimodule, NotTorsor, SizeBoundExceeded, BimoduleError)
from .group_core import GroupHom, enumerate_homs, identity_hom, make_hom
from .reports import Report
from .unionfind import UnionFind


@dataclass(frozen=True, eq=False)
class Bimodule:
    left_group: object
    right_group: object
    left: tuple
    right: tuple
    labels: tuple = None

    @property
    def size(self):
        return len(self.right)

    @property
    def carrier(self):
        return range(len(self.right))

    def lact(self, h, m):
        return self.left[h][m]

    def ract(self, m, g):
        return self.right[m][g]

    def label(self, m):
        return self.labels[m] if self.labels else str(m)


def law_failures(B) -> list:
    """(law, witness) pairs; empty for a valid bimodule.  Never raises."""
    H, G, n = B.left_group, B.right_group, B.size
    L, R = B.left, B.right
    out = []
    m = next((m for m in range(n) if L[H.identity][m] != m), None)
    if m is not None:
        out.append(("left_unit", m))
    else:
        bad = next(((a, b, m) for a in H.elements for b in H.elements for m in range(n)
                    if L[H.mul(a, b)][m] != L[a][L[b][m]]), None)
        if bad:
            out.append(("left_associative", bad))
    m = next((m for m in range(n) if R[m][G.identity] != m), None)
    if m is not None:
        out.append(("right_unit", m))
    else:
        bad = next(((m, a, b) for a in G.elements for b in G.elements for m in range(n)
                    if R[m][G.mul(a, b)] != R[R[m][a]][b]), None)
        if bad:
            out.append(("right_associative", bad))
    if not out:
        bad = next(((h, m, g) for h in H.elements for m in range(n) for g in G.elements
                    if R[L[h][m]][g] != L[h][R[m][g]]), None)
        if bad:
            out.append(("compatible", bad))
    return out


def make_bimodule(H, G, left, right, labels=None, check=True) -> Bimodule:
    left = tuple(tuple(int(v) for v in row) for row in left)
    right = tuple(tuple(int(v) for v in row) for row in right)
    n = len(right)
    if len(left) != H.order or any(len(r) != n for r in left) or any(len(r) != G.order for r in right):
        raise NotBimodule("action tables have the wrong shape")
    if any(not 0 <= v < n for row in left + right for v in row):
        raise NotBimodule("action table entry out of range")
    B = Bimodule(H, G, left, right, tuple(labels) if labels is not None else None)
    if check:
        bad = law_failures(B)
        if bad:
            raise NotBimodule(f"bimodule law {bad[0][0]} fails", witness=bad[0][1])
    return B


def hom_to_bimodule(phi: GroupHom) -> Bimodule:
    """Carrier H, left multiplication, right action h.g = h phi(g)."""
    G, H = phi.source, phi.target
    left = tuple(tuple(H.mul(k, h) for h in H.elements) for k in H.elements)
    right = tuple(tuple(H.mul(h, phi.map[g]) for g in G.elements) for h in H.elements)
    return Bimodule(H, G, left, right, H.labels)


def trivial_bimodule(G) -> Bimodule:
    return hom_to_bimodule(identity_hom(G))


def permuted(B, perm) -> Bimodule:
    """Relabel the carrier: element m becomes perm[m]."""
    inv = [0] * len(perm)
    for m, p in enumerate(perm):
        inv[p] = m
    left = tuple(tuple(perm[row[inv[p]]] for p in B.carrier) for row in B.left)
    right = tuple(tuple(perm[x] for x in B.right[inv[p]]) for p in B.carrier)
    labels = tuple(B.labels[inv[p]] for p in B.carrier) if B.labels else None
    return Bimodule(B.left_group, B.right_group, left, right, labels)


def disjoint_union(A, B) -> Bimodule:
    if A.left_group != B.left_group or A.right_group != B.right_group:
        raise BimoduleError("outer groups differ")
    k = A.size
    left = tuple(ra + tuple(x + k for x in rb) for ra, rb in zip(A.left, B.left))
    right = A.right + tuple(tuple(x + k for x in row) for row in B.right)
    return Bimodule(A.left_group, A.right_group, left, right)


def transport(B, left_iso: GroupHom, right_iso: GroupHom) -> Bimodule:
    """The same carrier viewed over isomorphic groups."""
    H2, G2 = left_iso.target, right_iso.target
    lpre = {left_iso.map[h]: h for h in B.left_group.elements}
    rpre = {right_iso.map[g]: g for g in B.right_group.elements}
    left = tuple(B.left[lpre[h]] for h in H2.elements)
    right = tuple(tuple(row[rpre[g]] for g in G2.elements) for row in B.right)
    return Bimodule(H2, G2, left, right, B.labels)


# --- classification ------------------------------------------------------------

@dataclass
class AtlasBimoduleReport:
    nonempty: bool
    left_free: bool
    left_transitive: bool
    right_free: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.nonempty and self.left_free and self.left_transitive and self.right_free

    @property
    def torsor(self):
        return self.nonempty and self.left_free and self.left_transitive

    def first_failure(self):
        for flag in ("nonempty", "left_free", "left_transitive", "right_free"):
            if not getattr(self, flag):
                return flag, self.witnesses.get(flag)
        return None


def classify(B) -> AtlasBimoduleReport:
    H, G = B.left_group, B.right_group
    w = {}
    nonempty = B.size > 0
    if not nonempty:
        w["nonempty"] = "empty carrier"
    left_free = True
    for h in H.elements:
        if h == H.identity:
            continue
        m = next((m for m in B.carrier if B.left[h][m] == m), None)
        if m is not None:
            left_free, w["left_free"] = False, (h, m)
            break
    left_transitive = True
    if nonempty:
        orbit = {B.left[h][0] for h in H.elements}
        missing = next((m for m in B.carrier if m not in orbit), None)
        if missing is not None:
            left_transitive, w["left_transitive"] = False, (0, missing)
    right_free = True
    for g in G.elements:
        if g == G.identity:
            continue
        m = next((m for m in B.carrier if B.right[m][g] == m), None)
        if m is not None:
            right_free, w["right_free"] = False, (m, g)
            break
    return AtlasBimoduleReport(nonempty, left_free, left_transitive, right_free, w)


def extract_hom(B, base) -> GroupHom:
    """psi with base.g = psi(g).base; needs a free transitive left action."""
    rep = classify(B)
    if not rep.torsor:
        raise NotTorsor(f"left action is not a torsor: {rep.first_failure()[0]}",
                        witness=rep.first_failure())
    H = B.left_group
    who = {B.left[h][base]: h for h in H.elements}
    return make_hom(B.right_group, H, [who[B.right[base][g]] for g in B.right_group.elements])


def induced_hom(B, m) -> GroupHom:
    rep = classify(B)
    if not rep.ok:
        raise NotAtlasBimodule(f"not an atlas bimodule: {rep.first_failure()[0]}",
                               witness=rep.first_failure())
    hom = extract_hom(B, m)
    if not hom.is_injective():
        raise NonInjective("induced hom of an atlas bimodule is not injective", witness=m)
    return hom


# --- tensor products -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TensorProduct:
    module: Bimodule
    class_of: tuple      # class_of[y][x]
    reps: tuple          # least (y, x) per class

    def cls(self, y, x):
        return self.class_of[y][x]


def tensor_product(N, M) -> TensorProduct:
    """N (H -|-> K) composed after M (G -|-> H): pairs (y, x) with (y.h, x) ~ (y, h.x)."""
    if N.right_group != M.left_group:
        raise MiddleGroupMismatch("right group of the outer module differs from left group of the inner one")
    H, nm = M.left_group, M.size
    uf = UnionFind(N.size * nm)
    for y in N.carrier:
        for h in H.elements:
            yh = N.right[y][h]
            for x in M.carrier:
                uf.union(yh * nm + x, y * nm + M.left[h][x])
    ids, roots = uf.classes()
    reps = tuple(divmod(r, nm) for r in roots)
    class_of = tuple(tuple(ids[y * nm + x] for x in M.carrier) for y in N.carrier)
    K, G = N.left_group, M.right_group
    left = tuple(tuple(class_of[N.left[k][y]][x] for (y, x) in reps) for k in K.elements)
    right = tuple(tuple(class_of[y][M.right[x][g]] for g in G.elements) for (y, x) in reps)
    labels = tuple(f"{N.label(y)}*{M.label(x)}" for (y, x) in reps)
    return TensorProduct(Bimodule(K, G, left, right, labels), class_of, reps)


def tensor(N, M) -> Bimodule:
    return tensor_product(N, M).module


def pair_map_on_classes(tp: TensorProduct, f):
    """Push a balanced pairwise function through the tensor classes.

    Returns (map per class, first unbalanced witness or None).
    """
    out = [None] * tp.module.size
    bad = None
    for y, row in enumerate(tp.class_of):
        for x, c in enumerate(row):
            v = f(y, x)
            if out[c] is None:
                out[c] = v
            elif out[c] != v and bad is None:
                bad = (tp.reps[c], (y, x))
    return out, bad


# --- bimodule maps ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BimoduleMap:
    source: Bimodule
    target: Bimodule
    map: tuple

    def __call__(self, m):
        return self.map[m]

    def is_bijective(self):
        return sorted(self.map) == list(self.target.carrier)


def check_bimodule_map(f, M, N) -> Report:
    rep = Report("bimodule map")
    if M.left_group != N.left_group or M.right_group != N.right_group:
        rep.fail("atlas.cells_equivariant", "outer groups differ")
        return rep
    fm = f.map if isinstance(f, BimoduleMap) else tuple(f)
    bad = None
    for h in M.left_group.elements:
        for m in M.carrier:
            for g in M.right_group.elements:
                if fm[M.right[M.left[h][m]][g]] != N.right[N.left[h][fm[m]]][g]:
                    bad = (h, m, g)
                    break
            if bad:
                break
        if bad:
            break
    rep.add("atlas.cells_equivariant", bad is None, "f(h.m.g) = h.f(m).g", bad)
    return rep


def _biorbits(M):
    seen, out = set(), []
    for m in M.carrier:
        if m not in seen:
            orb = {M.right[M.left[h][m]][g] for h in M.left_group.elements for g in M.right_group.elements}
            seen |= orb
            out.append(m)
    return out


def iter_isomorphisms(M, N, bound=16):
    """Every equivariant bijection M -> N, by orbit-wise propagation."""
    if max(M.size, N.size) > bound:
        raise SizeBoundExceeded(f"carrier size exceeds {bound}")
    if M.left_group != N.left_group or M.right_group != N.right_group:
        raise BimoduleError("outer groups differ")
    if M.size != N.size:
        return
    H, G = M.left_group, M.right_group
    seeds = _biorbits(M)

    def extend(f, used, k):
        if k == len(seeds):
            yield tuple(f)
            return
        m = seeds[k]
        for n in N.carrier:
            if n in used:
                continue
            g2, u2, ok = list(f), set(used), True
            for h in H.elements:
                for g in G.elements:
                    a, b = M.right[M.left[h][m]][g], N.right[N.left[h][n]][g]
                    if g2[a] is None:
                        if b in u2:
                            ok = False
                            break
                        g2[a] = b
                        u2.add(b)
                    elif g2[a] != b:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                yield from extend(g2, u2, k + 1)

    yield from extend([None] * M.size, set(), 0)


def find_isomorphism(M, N, bound=16):
    return next(iter_isomorphisms(M, N, bound), None)


# --- structure isomorphisms, built on demand ----------------------------------------

def left_unitor(M) -> BimoduleMap:
    """[h, x] -> h.x from (trivial H) (x) M onto M."""
    tp = tensor_product(trivial_bimodule(M.left_group), M)
    return BimoduleMap(tp.module, M, tuple(M.left[h][x] for (h, x) in tp.reps))


def right_unitor(M) -> BimoduleMap:
    """[x, g] -> x.g from M (x) (trivial G) onto M."""
    tp = tensor_product(M, trivial_bimodule(M.right_group))
    return BimoduleMap(tp.module, M, tuple(M.right[x][g] for (x, g) in tp.reps))


def associator(P, N, M) -> BimoduleMap:
    """[[p, n], m] -> [p, [n, m]]."""
    pn = tensor_product(P, N)
    outer_l = tensor_product(pn.module, M)
    nm = tensor_product(N, M)
    outer_r = tensor_product(P, nm.module)
    image = []
    for (c, m) in outer_l.reps:
        p, n = pn.reps[c]
        image.append(outer_r.cls(p, nm.cls(n, m)))
    return BimoduleMap(outer_l.module, outer_r.module, tuple(image))


# --- seeded random modules for property suites ------------------------------------------

def random_relabel(rng, B) -> Bimodule:
    perm = list(B.carrier)
    rng.shuffle(perm)
    return permuted(B, perm)


def random_atlas_bimodule(rng, H, G, pieces=1):
    """Relabelled hom modules for random injective homs G -> H, or None if there are none.

    One piece gives an atlas bimodule; more pieces keep the right action free.
    """
    homs = enumerate_homs(G, H, injective=True)
    if not homs:
        return None
    B = hom_to_bimodule(rng.choice(homs))
    for _ in range(pieces - 1):
        B = disjoint_union(B, hom_to_bimodule(rng.choice(homs)))
    return random_relabel(rng, B)


def random_bimodule(rng, H, G, max_pieces=2) -> Bimodule:
    """Disjoint union of hom modules for arbitrary random homs G -> H."""
    homs = enumerate_homs(G, H)
    B = hom_to_bimodule(rng.choice(homs))
    for _ in range(rng.randrange(max_pieces)):
        B = disjoint_union(B, hom_to_bimodule(rng.choice(homs)))
    return random_relabel(rng, B)


def random_torsor_pair(rng, groups):
    """(N, M) composable, N with a free right action; M arbitrary."""
    while True:
        K, H, G = rng.choice(groups), rng.choice(groups), rng.choice(groups)
        N = random_atlas_bimodule(rng, K, H, pieces=rng.randint(1, 2))
        if N is not None:
            return N, random_bimodule(rng, H, G)
