"""Command line: validate, groupoid, from-groupoid, compare, refinement, roundtrip, properties, keys.

Exit codes: 0 every check passed, 2 a check failed, 3 the input could not be
read or a reference did not resolve, 4 an internal invariant was violated.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import __version__
from .atlas import find_atlas_isomorphism, theorem_checks, verify_atlas
from .bimodule import (classify, induced_hom, random_atlas_bimodule, random_torsor_pair,
                       tensor)
from .documents import (atlas_from_document, atlas_to_document, dump, groupoid_from_document,
                        load_atlas, load_document, load_groupoid, load_refinement)
from .equivalence import (build_morita_bundle, check_biprincipality, identity_refinement,
                          verify_refinement)
from .errors import (BimoduleError, DocumentError, EvaluationNotBijective, GroupError,
                     InvariantBreach, NotAction, NotComposable, NotTranslationSubset,
                     OrbatlasError, PosetViolation, RefinementError)
from .fractions import (build_groupoid, compare_invariants, groupoid_report, morita_invariants)
from .group_core import conjugate_hom, iso_label, small_groups
from .groupoid_model import (extract_and_verify, model_inertia, model_isotropy, roundtrip_check,
                             validate_groupoid)
from .reports import REPORT_SCHEMA, Report, key_table
from .satake import validate_chart, validate_satake

EXIT_PASS, EXIT_FAIL, EXIT_DOCUMENT, EXIT_BREACH = 0, 2, 3, 4

# construction errors that mean "the data fails a law", most specific first
LOAD_KEYS = (
    (NotAction, "chart.action_laws"),
    (GroupError, "group.laws"),
    (BimoduleError, "bimodule.laws"),
    (PosetViolation, "satake.poset"),
    (NotTranslationSubset, "model.translation_subset"),
    (EvaluationNotBijective, "model.evaluation_bijective"),
    (RefinementError, "refinement.supports"),
    (NotComposable, "groupoid.laws"),
)

FIELD_NAMES = {"quotient_points": "quotient points", "isotropy_labels": "isotropy",
               "inertia_components": "inertia"}


def failure_report(exc, title):
    key = next((k for cls, k in LOAD_KEYS if isinstance(exc, cls)), "document.construction")
    rep = Report(title)
    rep.fail(key, str(exc), exc.witness)
    return rep


# --- summaries ------------------------------------------------------------------------------

def isotropy_summary(model):
    """quotient point -> {"order", "label"} (lists when objects over one point disagree)."""
    by_point = {}
    for x in range(len(model.objects)):
        G = model_isotropy(model, x)
        by_point.setdefault(model.quotient[x], set()).add((G.order, iso_label(G)))
    out = {}
    for q in sorted(by_point):
        kinds = sorted(by_point[q])
        if len(kinds) == 1:
            out[q] = {"order": kinds[0][0], "label": kinds[0][1]}
        else:
            out[q] = {"order": [k[0] for k in kinds], "label": [k[1] for k in kinds]}
    return out


def _labels(per_point):
    return "[" + ", ".join("/".join(x) for x in per_point) + "]"


def invariants_line(name, inv):
    return (f"{name}: quotient points {inv.quotient_points}, isotropy {_labels(inv.isotropy_labels)}, "
            f"inertia {inv.inertia_components}")


# --- commands -----------------------------------------------------------------------------------

def _checked_atlas(path, strict, rep):
    """Load an atlas and verify it into rep; returns the atlas when it verified."""
    atlas = load_atlas(path, strict)
    rep.extend(verify_atlas(atlas))
    return atlas if rep.ok else None


def cmd_validate(args):
    doc = load_document(args.path, args.strict)
    rep = Report(f"validate {args.path}")
    if doc["kind"] == "atlas":
        atlas = atlas_from_document(doc)
        names = atlas.layer.quotient.points
        for c in atlas.charts:
            rep.extend(validate_chart(c, names))
        rep.extend(validate_satake(atlas.layer))
        rep.extend(verify_atlas(atlas))
        if rep.ok:
            rep.extend(theorem_checks(atlas))
        rep.info.update({"charts": len(atlas.charts), "arrows": len(atlas.arrows)})
    elif doc["kind"] == "groupoid":
        model, covers = groupoid_from_document(doc)
        rep.extend(validate_groupoid(model))
        if rep.ok:
            for name, cover in covers.items():
                rep.extend(extract_and_verify(model, cover)[1])
        rep.info.update({"objects": len(model.objects), "arrows": len(model.arrows), "covers": sorted(covers)})
    else:
        rep.extend(verify_refinement(load_refinement(args.path, args.strict)))
    return rep, []


def cmd_groupoid(args):
    rep = Report(f"groupoid {args.path}")
    atlas = _checked_atlas(args.path, args.strict, rep)
    if atlas is None:
        return rep, []
    grep, gpd, model = groupoid_report(atlas)
    rep.extend(grep)
    rep.info.update({
        "quotient_points": len(model.quotient_points()),
        "isotropy": isotropy_summary(model),
        "inertia_components": model_inertia(model).count,
    })
    return rep, []


def _pick_cover(args, covers):
    if args.chart:
        cover = {}
        for spec in args.chart:
            name, _, objs = spec.partition("=")
            if not name or not objs:
                raise DocumentError(f"--chart expects NAME=obj,obj,... got {spec!r}")
            cover[name] = [o for o in objs.split(",") if o]
        return "cli", cover
    if args.cover:
        if args.cover not in covers:
            raise DocumentError(f"no cover named {args.cover!r}; available: {sorted(covers)}")
        return args.cover, covers[args.cover]
    if len(covers) == 1:
        return next(iter(covers.items()))
    raise DocumentError(f"choose a cover with --cover ({sorted(covers)}) or give --chart")


def cmd_from_groupoid(args):
    model, covers = load_groupoid(args.path, args.strict)
    rep = Report(f"from-groupoid {args.path}")
    rep.extend(validate_groupoid(model))
    if not rep.ok:
        return rep, []
    cname, cover = _pick_cover(args, covers)
    atlas, erep = extract_and_verify(model, cover)
    rep.extend(erep)
    if args.match:
        other = load_atlas(args.match, args.strict)
        iso = find_atlas_isomorphism(atlas, other)
        rep.add("extraction.isomorphic", iso is not None, f"against {args.match}",
                None if iso else args.match)
    doc = atlas_to_document(atlas, f"{model.name or 'model'}-{cname}",
                            f"extracted from {args.path} on cover {cname}")
    rep.info.update({"cover": cname, "charts": len(atlas.charts)})
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dump(doc))
        return rep, []
    return rep, [dump(doc).rstrip("\n")]


def _invariants_of(path, strict):
    doc = load_document(path, strict)
    rep = Report(f"load {path}")
    if doc["kind"] == "atlas":
        atlas = atlas_from_document(doc)
        rep.extend(verify_atlas(atlas))
        return rep, (morita_invariants(build_groupoid(atlas)) if rep.ok else None)
    if doc["kind"] == "groupoid":
        model, _ = groupoid_from_document(doc)
        rep.extend(validate_groupoid(model))
        return rep, (morita_invariants(model) if rep.ok else None)
    raise DocumentError("compare takes atlas or groupoid documents", location="/kind")


def cmd_compare(args):
    rep = Report(f"compare {args.left} {args.right}")
    invs = []
    for path in (args.left, args.right):
        r, inv = _invariants_of(path, args.strict)
        rep.extend(r)
        invs.append(inv)
    if not rep.ok:
        return rep, []
    a, b = invs
    verdict, name, va, vb = compare_invariants(a, b)
    if args.format == "machine":
        lines = [json.dumps({"schema": REPORT_SCHEMA, "kind": "invariants", "source": p, **inv.record()},
                            sort_keys=True) for p, inv in ((args.left, a), (args.right, b))]
        lines.append(json.dumps({"schema": REPORT_SCHEMA, "kind": "verdict", "verdict": verdict, "field": name,
                                 "left": va, "right": vb}, sort_keys=True))
    else:
        lines = [invariants_line(args.left, a), invariants_line(args.right, b)]
        if name == "isotropy_labels":
            va, vb = _labels(va), _labels(vb)
        lines.append("equal" if verdict == "equal" else f"differ: {FIELD_NAMES[name]} {va} vs {vb}")
    return None, lines


def cmd_refinement(args):
    R = load_refinement(args.path, args.strict)
    rep = Report(f"refinement {args.path}")
    rep.extend(verify_refinement(R))
    if not rep.ok or args.no_bundle:
        return rep, []
    if args.with_ref:
        other = load_refinement(args.with_ref, args.strict)
        orep = verify_refinement(other)
        rep.extend(orep)
        if not orep.ok:
            return rep, []
    else:
        other = identity_refinement(R.fine)
    bundle = build_morita_bundle(R, other)
    rep.extend(check_biprincipality(bundle))
    rep.info.update({"coarse_arrow_classes": bundle.gv.size, "other_arrow_classes": bundle.gw.size})
    if rep.ok:
        a, b = morita_invariants(bundle.gv), morita_invariants(bundle.gw)
        for name in ("quotient_points", "isotropy_labels", "inertia_components"):
            va, vb = getattr(a, name), getattr(b, name)
            rep.add(f"invariants.{name}", va == vb, "both ends of the bundle", None if va == vb else (va, vb))
    return rep, []


def cmd_roundtrip(args):
    rep = Report(f"roundtrip {args.path}")
    atlas = _checked_atlas(args.path, args.strict, rep)
    if atlas is None:
        return rep, []
    rrep, before, after = roundtrip_check(atlas)
    rep.extend(rrep)
    rep.info.update({"before": before.record(), "after": after.record()})
    return rep, []


def cmd_properties(args):
    """Seeded random checks of the tensor size law and the induced hom laws."""
    rng = random.Random(args.seed)
    groups = small_groups(8)
    rep = Report(f"properties seed={args.seed}")
    bad = None
    for n in range(args.count):
        N, M = random_torsor_pair(rng, groups)
        want = N.size * M.size // N.right_group.order
        got = tensor(N, M).size
        if got != want and bad is None:
            bad = (n, got, want)
    rep.add("properties.torsor_size", bad is None, f"{args.count} random pairs", bad)
    bad, done = None, 0
    while done < args.count:
        H, G = rng.choice(groups), rng.choice(groups)
        B = random_atlas_bimodule(rng, H, G)
        if B is None or not classify(B).ok:
            continue
        done += 1
        for m in B.carrier:
            lam = induced_hom(B, m)
            for h in H.elements:
                if induced_hom(B, B.left[h][m]).map != conjugate_hom(lam, h).map and bad is None:
                    bad = (done, m, h)
    rep.add("properties.induced_hom", bad is None, f"{args.count} random atlas bimodules", bad)
    rep.info["seed"] = args.seed
    return rep, []


def cmd_keys(args):
    if args.format == "machine":
        from .reports import CHECK_KEYS
        return None, [json.dumps({"key": k, "meaning": v}) for k, v in CHECK_KEYS.items()]
    return None, [key_table()]


# --- entry point -----------------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "machine"), default="human")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="reject unknown document fields (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false", help="ignore unknown document fields")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--verbose", action="store_true", help="list every passing check")

    p = argparse.ArgumentParser(prog="orbatlas", description="finite orbifold atlases and their groupoids")
    p.add_argument("--version", action="version", version=f"orbatlas {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check an atlas, groupoid or refinement document")
    s.add_argument("path")
    s.set_defaults(run=cmd_validate)
    s = sub.add_parser("groupoid", parents=[common], help="build the groupoid of fractions of an atlas")
    s.add_argument("path")
    s.set_defaults(run=cmd_groupoid)
    s = sub.add_parser("from-groupoid", parents=[common], help="extract an atlas from a groupoid model")
    s.add_argument("path")
    s.add_argument("--cover", help="cover name from the document")
    s.add_argument("--chart", action="append", metavar="NAME=obj,obj", help="cover chart (repeatable)")
    s.add_argument("--match", metavar="ATLAS", help="also test isomorphism with this atlas document")
    s.add_argument("-o", "--output", help="write the atlas document here instead of stdout")
    s.set_defaults(run=cmd_from_groupoid)
    s = sub.add_parser("compare", parents=[common], help="compare invariants of two atlases or groupoids")
    s.add_argument("left")
    s.add_argument("right")
    s.set_defaults(run=cmd_compare)
    s = sub.add_parser("refinement", parents=[common], help="verify a refinement and its bundle")
    s.add_argument("path")
    s.add_argument("--with", dest="with_ref", metavar="REFINEMENT",
                   help="second refinement out of the same fine atlas (default: its identity)")
    s.add_argument("--no-bundle", action="store_true", help="skip the bundle checks")
    s.set_defaults(run=cmd_refinement)
    s = sub.add_parser("roundtrip", parents=[common], help="atlas -> groupoid -> atlas -> groupoid")
    s.add_argument("path")
    s.set_defaults(run=cmd_roundtrip)
    s = sub.add_parser("properties", parents=[common], help="seeded random property checks")
    s.add_argument("--count", type=int, default=100)
    s.set_defaults(run=cmd_properties)
    s = sub.add_parser("keys", parents=[common], help="list every check key")
    s.set_defaults(run=cmd_keys)
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        rep, lines = args.run(args)
    except DocumentError as exc:
        print(f"document error: {exc}", file=err)
        return EXIT_DOCUMENT
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=err)
        if exc.witness is not None:
            print(f"witness: {exc.witness!r}", file=err)
        return EXIT_BREACH
    except OrbatlasError as exc:
        rep, lines = failure_report(exc, f"{args.command} {getattr(args, 'path', '')}".strip()), []

    # extracted documents go to stdout, so the report moves to stderr
    report_to = err if lines and rep is not None else out
    for line in lines:
        print(line, file=out)
    if rep is None:
        return EXIT_PASS
    print(rep.render_machine() if args.format == "machine" else rep.render_human(args.verbose), file=report_to)
    return EXIT_PASS if rep.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
