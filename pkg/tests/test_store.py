import itertools
import json

import numpy as np
import pytest

from gazeauth.catalog import catalog_features, default_tree, template_set
from gazeauth.enrollment import make_enrollment
from gazeauth.errors import InvariantViolation, NotFound, ParseError, StorageFailure
from gazeauth.shapes import SHAPE_IDS
from gazeauth.store import (
    StoreRoot,
    load,
    load_enrollment,
    load_store_catalog,
    load_template_set,
    load_tree_model,
    load_users,
    save,
    save_catalog,
    save_enrollment,
    save_template_set,
    save_tree_model,
)
from gazeauth.tree import classify_tree, tree_to_doc

FAST_ITERS = 1_000


@pytest.fixture
def root(tmp_path):
    return StoreRoot(tmp_path / "store").ensure()


class TestTemplateSetRoundTrip:
    def test_lossless(self, catalog, root):
        ts = template_set(catalog)
        save_template_set(root, ts)
        back = load_template_set(root, "global")
        assert back.provenance == ts.provenance and back.owner == ts.owner
        for sid in SHAPE_IDS:
            np.testing.assert_array_equal(back.templates[sid][0], ts.templates[sid][0])

    def test_tampered_document_rejected(self, catalog, root):
        ts = template_set(catalog)
        path = save_template_set(root, ts)
        doc = json.loads(path.read_text())
        del doc["templates"]["c"]
        path.write_text(json.dumps(doc))
        with pytest.raises(InvariantViolation):
            load_template_set(root, "global")

    def test_missing_owner(self, root):
        with pytest.raises(NotFound):
            load_template_set(root, "ghost")


class TestTreeModelRoundTrip:
    def test_lossless(self, catalog, root):
        model = default_tree(catalog)
        save_tree_model(root, model, "default")
        back = load_tree_model(root, "default")
        assert tree_to_doc(back) == tree_to_doc(model)
        data = catalog_features(catalog)
        for row in data.X:
            assert classify_tree(back, row) == classify_tree(model, row)

    def test_tampered_leaf_rejected(self, catalog, root):
        model = default_tree(catalog)
        path = save_tree_model(root, model, "default")
        doc = json.loads(path.read_text())
        node = doc["root"]
        while "label" not in node:
            node = node["right"]
        del node["label"]
        node["feature"] = 0  # now an internal node missing children
        path.write_text(json.dumps(doc))
        with pytest.raises(InvariantViolation):
            load_tree_model(root, "default")

    def test_bad_json_is_parse_error(self, root):
        (root.models_dir / "x.json").write_text("{broken")
        with pytest.raises(ParseError):
            load_tree_model(root, "x")


class TestEnrollmentStore:
    def test_round_trip(self, root):
        enr = make_enrollment("alice", ("l", "e", "c"), iterations=FAST_ITERS)
        save_enrollment(root, enr)
        back = load_enrollment(root, "alice")
        assert back == enr
        assert back.verify(("l", "e", "c"))

    def test_overwrite_replaces(self, root):
        save_enrollment(root, make_enrollment("alice", ("l", "e", "c"),
                                              iterations=FAST_ITERS))
        save_enrollment(root, make_enrollment("alice", ("a", "b", "d"),
                                              iterations=FAST_ITERS))
        back = load_enrollment(root, "alice")
        assert back.verify(("a", "b", "d")) and not back.verify(("l", "e", "c"))
        assert len(load_users(root)) == 1

    def test_unknown_user(self, root):
        with pytest.raises(NotFound):
            load_enrollment(root, "ghost")

    def test_no_plaintext_triple_on_disk(self, root, catalog):
        save_enrollment(root, make_enrollment("u1", ("l", "e", "c"),
                                              iterations=FAST_ITERS))
        save_enrollment(root, make_enrollment("u2", ("a", "a", "a"),
                                              iterations=FAST_ITERS))
        save_template_set(root, template_set(catalog))
        blob = b"".join(
            p.read_bytes() for p in sorted(root.base.rglob("*")) if p.is_file()
        )
        for triple in itertools.product(SHAPE_IDS, repeat=3):
            assert "|".join(triple).encode() not in blob


class TestCatalogStore:
    def test_round_trip(self, catalog, root):
        save_catalog(root, catalog)
        back = load_store_catalog(root)
        assert back.version == catalog.version
        np.testing.assert_array_equal(back.shapes[0].motion, catalog.shapes[0].motion)

    def test_missing(self, root):
        with pytest.raises(NotFound):
            load_store_catalog(root)


class TestAtomicity:
    def test_unwritable_target_leaves_no_partial_file(self, catalog, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        root = StoreRoot(blocker / "store")
        with pytest.raises(StorageFailure):
            save_template_set(root, template_set(catalog))
        assert blocker.is_file()  # nothing was created around it

    def test_overwrite_is_atomic_replace(self, catalog, root):
        ts = template_set(catalog)
        path = save_template_set(root, ts)
        before = path.read_bytes()
        save_template_set(root, ts)
        assert path.read_bytes() == before
        leftovers = [p for p in root.templates_dir.iterdir() if p.suffix == ".tmp"]
        assert not leftovers


class TestDispatchers:
    def test_save_and_load_by_kind(self, catalog, root):
        save(template_set(catalog), root)
        save(default_tree(catalog), root)
        save(make_enrollment("alice", ("l", "e", "c"), iterations=FAST_ITERS), root)
        save(catalog, root)
        assert load("template_set", root, "global").owner == "global"
        assert load("tree_model", root).n_samples == 12
        assert load("enrollment", root, "alice").user == "alice"
        assert load("catalog", root).version == catalog.version
        with pytest.raises(ValueError):
            load("nonsense", root)
        with pytest.raises(TypeError):
            save(42, root)
