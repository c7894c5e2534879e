"""Shared loaders, mutators and brute-force oracles for the test suite."""

import dataclasses
import io
import json
from functools import lru_cache
from pathlib import Path

import orbatlas
from orbatlas.atlas import Atlas
from orbatlas.cli import main
from orbatlas.documents import load_atlas

FIXTURES = Path(orbatlas.__file__).resolve().parent / "fixtures"


def fx(name):
    return str(FIXTURES / name)


@lru_cache(maxsize=None)
def atlas(stem):
    return load_atlas(FIXTURES / f"{stem}.json")


def with_cells(a, key, nu, lam, value):
    """Copy of an atlas with one composition cell entry replaced."""
    comp_cells = dict(a.comp_cells)
    rows = [list(r) for r in comp_cells[key]]
    rows[nu][lam] = value
    comp_cells[key] = tuple(tuple(r) for r in rows)
    return Atlas(a.layer, a.abst, comp_cells, a.unit, a.realization)


def with_con(a, arrow, maps):
    """Copy of an atlas whose concrete embeddings along one arrow are replaced."""
    con = dict(a.layer.con)
    con[arrow] = tuple(maps)
    return Atlas(dataclasses.replace(a.layer, con=con), a.abst, a.comp_cells, a.unit, a.realization)


def run_cli(*argv):
    """(exit code, stdout, stderr) of the command line entry point."""
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def machine_records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


# --- oracles ------------------------------------------------------------------------------

def orbit_tensor_size(N, M):
    """Count classes of N x M under (y.h, x) ~ (y, h.x) by explicit orbit search."""
    H = M.left_group
    seen, classes = set(), 0
    for start in ((y, x) for y in N.carrier for x in M.carrier):
        if start in seen:
            continue
        classes += 1
        stack = [start]
        seen.add(start)
        while stack:
            y, x = stack.pop()
            for h in H.elements:
                hi = H.inv(h)
                # (y, x) = (y'.h, x) ~ (y', h.x) with y' = y.h^-1, and the reverse move
                for nxt in ((N.right[y][hi], M.left[h][x]), (N.right[y][h], M.left[hi][x])):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
    return classes


def conjugate_by_hand(G, hom_map, h):
    """g -> h hom(g) h^-1 computed from the multiplication table."""
    return tuple(G.mul(G.mul(h, v), G.inv(h)) for v in hom_map)


def fixture_modules():
    """Every module of every atlas fixture, tagged by fixture and arrow."""
    out = []
    for stem in ("eq_a", "eq_b", "single_trivial", "regular_z3", "klein_point", "torsor_pair",
                 "G_coarse_atlas", "G_fine_atlas"):
        a = atlas(stem)
        for arrow in a.arrows:
            out.append((f"{stem}:{arrow}", a.abst[arrow]))
    return out
