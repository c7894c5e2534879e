"""Check reports shared by every verifier.

Each check carries a stable key from ``CHECK_KEYS``; the table doubles as the
reference documentation printed by ``orbatlas keys``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

REPORT_SCHEMA = "orbatlas.report/1"

CHECK_KEYS = {
    # document-level algebra
    "group.laws": "declared group tables are associative with identity and inverses",
    "chart.action_laws": "declared actions are unital and compatible with multiplication",
    "bimodule.laws": "declared modules satisfy the action and compatibility laws",
    # charts and the concrete layer
    "chart.projection_invariant": "projection is constant on group orbits",
    "chart.fibers_are_orbits": "each projection fiber is exactly one orbit of the reduced group",
    "chart.projection_onto_support": "projection hits every point of the chart support",
    "chart.reduced_effective": "the reduced group acts faithfully on the samples",
    "satake.poset": "supports are distinct so inclusion is a partial order",
    "satake.local_compatibility": "every point of an overlap lies in a chart inside the overlap",
    "satake.overlap": "concrete embeddings with overlapping images differ by a chart symmetry",
    "satake.factorization": "an embedding into a larger chart factors through any intermediate chart it meets",
    "satake.strong_compatibility": "two embeddings meeting at a point are joined by a common smaller chart",
    "satake.con_projection": "concrete embeddings are injective and commute with the projections",
    "satake.con_atlas_bimodule": "concrete embeddings form an atlas bimodule over the reduced groups",
    "satake.con_composition": "composition of concrete embeddings induces a bijection on tensor classes",
    "satake.con_equivariant": "each concrete embedding is equivariant for the hom read off its torsor",
    # atlas data
    "atlas.abst_bimodule_laws": "abstract embedding modules satisfy the action and compatibility laws",
    "atlas.abst_atlas_bimodule": "abstract embedding modules are nonempty, left free and transitive, right free",
    "atlas.cells_balanced": "composition cells are balanced over the middle group",
    "atlas.cells_equivariant": "composition cells commute with the outer actions",
    "atlas.cells_bijective": "composition cells induce a bijection on tensor classes",
    "atlas.unit_iso": "unit cells are bimodule isomorphisms from the chart group",
    "atlas.pentagon": "composition cells are associative along every chain of four charts",
    "atlas.unit_coherence": "composing with a unit cell is the identity",
    "atlas.realization_surjective": "abstract embeddings cover every concrete embedding",
    "atlas.realization_equivariant": "the abstract-to-concrete map intertwines the group actions",
    "atlas.realization_kernel_transitive": "abstract embeddings with one concrete image differ by a chart group element",
    "atlas.realization_composition": "the abstract-to-concrete map respects composition",
    "atlas.realization_unit": "unit cells map to identity embeddings",
    "atlas.reduction_cell": "the tensor-level comparison cell is well defined, equivariant and surjective",
    "atlas.kernel_iso": "each induced hom restricts to an isomorphism between kernels of the chart actions",
    "atlas.left_cancel": "composition is cancellable on the left",
    "atlas.right_cancel": "composition is cancellable on the right",
    "atlas.interpolation": "overlapping embeddings factor uniquely through each other",
    "atlas.strong_compat_witness": "abstract embeddings meeting at a point have a common restriction",
    # embedding category and groupoid of fractions
    "category.laws": "embedding category is unital and associative",
    "category.ore": "every cospan of embeddings completes to a commuting square",
    "category.weak_cancellation": "parallel embeddings equalized after composition are equal",
    "groupoid.span_relation": "source and target are constant on span classes",
    "groupoid.laws": "groupoid laws hold on span classes",
    "groupoid.composition_witness_independent": "composition does not depend on the chosen witnesses",
    "groupoid.isotropy_fiber_iso": "isotropy groups over one quotient point are conjugate",
    "groupoid.inertia_piece_axiom": "modeling axiom: loops on one span piece lie in one inertia component",
    "groupoid.hausdorff": "Hausdorff arrow space: no finite content, not checked",
    # groupoid models
    "model.laws": "finite groupoid model satisfies the groupoid laws",
    "model.continuity": "declared sheet links respect units, inverses and composition",
    "model.translation_subset": "bisection evaluation is a bijection onto the restricted groupoid",
    "model.bisection_orbits": "bisection group orbits equal groupoid orbits on the subset",
    "model.evaluation_bijective": "local bisections evaluate bijectively onto arrows between subsets",
    "model.left_torsor": "local bisection modules are free and transitive on the left",
    "model.target_decomposition": "arrows into a subset split into inverted local bisections",
    "model.cover_objects": "cover subsets contain every object",
    "model.cover_local_compatibility": "every point of an overlap of cover quotients lies in a cover chart inside it",
    # refinements and bundles
    "refinement.quotient_match": "fine and coarse atlases share the quotient model",
    "refinement.supports": "every fine support sits inside a coarse support with concrete embeddings",
    "refinement.cover_condition": "every overlap point of a fine and a coarse chart lies in a fine chart inside both",
    "refinement.module_atlas_bimodule": "mixed modules are atlas bimodules",
    "refinement.realization_surjective": "mixed modules cover every concrete cross-embedding",
    "refinement.realization_equivariant": "mixed abstract-to-concrete maps intertwine the actions",
    "refinement.realization_kernel_transitive": "mixed modules with one concrete image differ by a fine group element",
    "refinement.fine_cell": "fine-side mixed cells are balanced, equivariant and bijective on tensor classes",
    "refinement.coarse_cell": "coarse-side mixed cells are balanced, equivariant and bijective on tensor classes",
    "refinement.concrete_cells": "concrete cross-embeddings are closed under composition, bijectively on classes",
    "refinement.realization_square_fine": "mixed abstract-to-concrete map respects fine-side composition",
    "refinement.realization_square_coarse": "mixed abstract-to-concrete map respects coarse-side composition",
    "refinement.pentagon_fine": "associativity along fine, fine, fine, coarse chains",
    "refinement.pentagon_mixed": "associativity along fine, fine, coarse, coarse chains",
    "refinement.pentagon_coarse": "associativity along fine, coarse, coarse, coarse chains",
    "refinement.unit_fine": "fine unit cells act as identities on mixed modules",
    "refinement.unit_coarse": "coarse unit cells act as identities on mixed modules",
    "bundle.anchor_surjective": "both bundle anchors are surjective on sample objects",
    "bundle.action_laws": "both arrow actions are unital and associative",
    "bundle.actions_commute": "left and right actions commute and preserve the opposite anchor",
    "bundle.principal_right": "(m, g) -> (m, m g) is a bijection",
    "bundle.principal_left": "(h, m) -> (h m, m) is a bijection",
    # invariants
    "invariants.quotient_points": "number of quotient points",
    "invariants.isotropy_labels": "isotropy isomorphism type over each quotient point",
    "invariants.inertia_components": "number of inertia components",
    "roundtrip.invariants_equal": "invariants survive groupoid, extraction, groupoid",
    "extraction.isomorphic": "the extracted atlas is isomorphic to the given atlas",
    "properties.torsor_size": "tensor of a right-free module has |N||M|/|H| classes",
    "properties.induced_hom": "induced homs are injective and conjugate along the left action",
    "document.construction": "the document describes data that can be built",
}


def _plain(x):
    """JSON-friendly rendering with pinned ordering."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((_plain(v) for v in x), key=repr)
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


@dataclass
class Check:
    key: str
    passed: bool
    detail: str = ""
    witness: object = None

    def record(self):
        rec = {"key": self.key, "status": "pass" if self.passed else "fail", "detail": self.detail}
        if self.witness is not None:
            rec["witness"] = _plain(self.witness)
        return rec


@dataclass
class Report:
    title: str = ""
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, key, passed, detail="", witness=None):
        if key not in CHECK_KEYS:
            raise KeyError(f"unregistered check key {key!r}")
        self.checks.append(Check(key, bool(passed), detail, witness))
        return passed

    def fail(self, key, detail="", witness=None):
        return self.add(key, False, detail, witness)

    def extend(self, other):
        self.checks.extend(other.checks)
        for k, v in other.info.items():
            self.info.setdefault(k, v)
        return self

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def failed_keys(self):
        return sorted({c.key for c in self.failures()})

    def passed(self, key):
        """True when every check with this key passed (and there was at least one)."""
        hits = [c for c in self.checks if c.key == key]
        return bool(hits) and all(c.passed for c in hits)

    def records(self):
        out = [{"schema": REPORT_SCHEMA, "kind": "check", **c.record()} for c in self.checks]
        out.append({"schema": REPORT_SCHEMA, "kind": "summary", "title": self.title,
                    "verdict": "pass" if self.ok else "fail",
                    "checks": len(self.checks), "failures": len(self.failures()),
                    "info": _plain(self.info)})
        return out

    def render_machine(self):
        return "\n".join(json.dumps(r, sort_keys=True, ensure_ascii=False) for r in self.records())

    def render_human(self, verbose=False):
        lines = [self.title] if self.title else []
        for k, v in _plain(self.info).items():
            lines.append(f"  {k}: {json.dumps(v, ensure_ascii=False)}")
        # collapse passing checks per key unless verbose
        seen = {}
        for c in self.checks:
            seen.setdefault(c.key, []).append(c)
        for key, cs in seen.items():
            bad = [c for c in cs if not c.passed]
            if not bad:
                if verbose:
                    for c in cs:
                        lines.append(f"  PASS {key} {c.detail}".rstrip())
                else:
                    lines.append(f"  PASS {key} ({len(cs)})")
            for c in bad:
                wit = f" witness={json.dumps(_plain(c.witness), ensure_ascii=False)}" if c.witness is not None else ""
                lines.append(f"  FAIL {key}: {c.detail}{wit}")
        lines.append(f"verdict: {'pass' if self.ok else 'fail'}")
        return "\n".join(lines)


def key_table():
    width = max(len(k) for k in CHECK_KEYS)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in CHECK_KEYS.items())
