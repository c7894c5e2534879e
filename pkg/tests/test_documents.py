import json

import pytest

from helpers import FIXTURES, atlas, fx
from orbatlas.atlas import find_atlas_isomorphism, verify_atlas
from orbatlas.documents import (atlas_from_document, atlas_to_document, dump, load_atlas, load_document,
                                load_refinement, parse_text)
from orbatlas.errors import DocumentError, RefinementError

ATLAS_FILES = sorted(p.name for p in FIXTURES.glob("*.json") if json.loads(p.read_text())["kind"] == "atlas")


@pytest.mark.parametrize("name", ATLAS_FILES)
def test_atlas_documents_roundtrip(name):
    a = load_atlas(fx(name))
    doc = atlas_to_document(a, "again")
    b = atlas_from_document(doc)
    assert atlas_to_document(b, "again") == doc
    if verify_atlas(a).ok:
        assert find_atlas_isomorphism(a, b) is not None


def test_dump_is_stable():
    doc = atlas_to_document(atlas("eq_b"), "eq_b")
    assert dump(doc) == dump(json.loads(dump(doc)))


def test_every_fixture_passes_the_schema():
    for p in sorted(FIXTURES.glob("*.json")):
        load_document(p)


def test_unknown_fields_are_strict_errors_only():
    doc = json.loads((FIXTURES / "eq_a.json").read_text())
    doc["colour"] = "blue"
    text = json.dumps(doc)
    with pytest.raises(DocumentError):
        parse_text(text, strict=True)
    assert parse_text(text, strict=False)["colour"] == "blue"


def test_bad_inputs_raise_document_errors(tmp_path):
    with pytest.raises(DocumentError):
        parse_text("{not json")
    with pytest.raises(DocumentError):
        load_document(tmp_path / "missing.json")
    with pytest.raises(DocumentError):
        parse_text(json.dumps({"format": "orbatlas/1", "kind": "atlas"}))
    with pytest.raises(DocumentError):
        load_document(fx("eq_a.json"), kind="groupoid")


def test_duplicate_chart_names(tmp_path):
    doc = json.loads((FIXTURES / "eq_a.json").read_text())
    doc["charts"][1]["name"] = doc["charts"][0]["name"]
    with pytest.raises(DocumentError) as err:
        atlas_from_document(doc)
    assert "/charts" in str(err.value)


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_refinement_reference_cycle(tmp_path):
    base = {"format": "orbatlas/1", "kind": "refinement", "construction": "compose"}
    _write(tmp_path, "a.json", dict(base, steps=["b.json"]))
    b = _write(tmp_path, "b.json", dict(base, steps=["a.json"]))
    with pytest.raises(DocumentError):
        load_refinement(b)


def test_refinement_missing_reference(tmp_path):
    doc = {"format": "orbatlas/1", "kind": "refinement", "construction": "identity",
           "fine": "nowhere.json", "coarse": "nowhere.json"}
    with pytest.raises(DocumentError):
        load_refinement(_write(tmp_path, "r.json", doc))


def test_identity_refinement_needs_one_atlas(tmp_path):
    for stem in ("eq_a", "eq_b"):
        (tmp_path / f"{stem}.json").write_text((FIXTURES / f"{stem}.json").read_text())
    doc = {"format": "orbatlas/1", "kind": "refinement", "construction": "identity",
           "fine": "eq_a.json", "coarse": "eq_b.json"}
    with pytest.raises(RefinementError):
        load_refinement(_write(tmp_path, "r.json", doc))


def test_refinement_unknown_cover(tmp_path):
    (tmp_path / "g.json").write_text((FIXTURES / "groupoid_G.json").read_text())
    doc = {"format": "orbatlas/1", "kind": "refinement", "construction": "groupoid",
           "groupoid": "g.json", "fine_cover": "fine", "coarse_cover": "middling"}
    with pytest.raises(DocumentError):
        load_refinement(_write(tmp_path, "r.json", doc))


def test_explicit_refinement_needs_realization_when_ambiguous(tmp_path):
    (tmp_path / "t.json").write_text((FIXTURES / "torsor_pair.json").read_text())
    doc = {"format": "orbatlas/1", "kind": "refinement", "construction": "explicit",
           "fine": "t.json", "coarse": "t.json",
           "modules": [{"fine": "B", "coarse": "A", "elements": ["x", "y", "z"],
                        "left": {"1": {"x": "y", "y": "z", "z": "x"}}, "right": {}}]}
    with pytest.raises(DocumentError) as err:
        load_refinement(_write(tmp_path, "r.json", doc))
    assert "give realization" in str(err.value)
