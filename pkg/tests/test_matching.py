import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from gazeauth.errors import LengthMismatch, MissingShape
from gazeauth.geometry import normalize
from gazeauth.matching import (
    REJECTED,
    TemplateMatcher,
    TemplateSet,
    classify_template,
    path_distance,
    train_templates,
)
from gazeauth.shapes import SHAPE_IDS
from gazeauth.simulate import NoiseModel, derive_seed, noiseless, simulate_frame_trace
from oracles import naive_mean_distance


class TestPathDistance:
    def test_identity_is_zero(self):
        path = np.random.default_rng(0).uniform(-150, 150, (64, 2))
        assert path_distance(path, path) == 0.0

    def test_constant_offset_three_four_is_five(self):
        rng = np.random.default_rng(1)
        t = rng.uniform(-150, 150, (64, 2))
        c = t + np.array([3.0, 4.0])
        assert path_distance(c, t) == pytest.approx(5.0, abs=1e-12)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            a = rng.uniform(-150, 150, (64, 2))
            b = rng.uniform(-150, 150, (64, 2))
            got = path_distance(a, b)
            want = naive_mean_distance(a, b)
            assert got == pytest.approx(want, rel=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            path_distance(np.zeros((64, 2)), np.zeros((63, 2)))

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_symmetry_and_triangle_bound(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = rng.uniform(-150, 150, (3, 64, 2))
        assert path_distance(a, b) == pytest.approx(path_distance(b, a), rel=1e-12)
        assert path_distance(a, c) <= path_distance(a, b) + path_distance(b, c) + 1e-9


class TestClassifyTemplate:
    def test_self_match_at_zero(self, catalog_templates):
        tpl = catalog_templates.templates["a"][0]
        match = classify_template(tpl, catalog_templates, reject_threshold=75.0)
        assert match is not None
        assert match.shape == "a" and match.distance == 0.0

    def test_all_catalog_templates_self_classify(self, catalog_templates):
        for sid in SHAPE_IDS:
            match = classify_template(
                catalog_templates.templates[sid][0], catalog_templates, 75.0
            )
            assert match.shape == sid and match.distance < 1e-6

    def test_far_candidate_rejected(self, catalog_templates):
        candidate = np.zeros((64, 2))  # all points at the origin
        assert classify_template(candidate, catalog_templates, 75.0) is None
        # without a threshold the nearest shape is still assigned
        assert classify_template(candidate, catalog_templates, None) is not None

    def test_noisy_pursuit_recognized_in_90_percent_of_trials(
        self, catalog, catalog_templates
    ):
        hits = 0
        for trial in range(100):
            noise = NoiseModel(seed=derive_seed(777, 9, trial))
            trace = simulate_frame_trace(catalog, "c", noise)
            match = classify_template(normalize(trace), catalog_templates, 75.0)
            if match is not None and match.shape == "c":
                # exhaustive check: reported distance is the global minimum
                dists = [
                    path_distance(normalize(trace), t)
                    for sid in SHAPE_IDS
                    for t in catalog_templates.templates[sid]
                ]
                assert match.distance == pytest.approx(min(dists), rel=1e-12)
                hits += 1
        assert hits >= 90

    def test_tie_breaks_by_shape_id_order(self, catalog_templates):
        shared = catalog_templates.templates["k"][0]
        rigged = {sid: [shared] for sid in SHAPE_IDS}
        match = classify_template(shared, TemplateSet(rigged), 75.0)
        assert match.shape == "a" and match.distance == 0.0

    def test_deterministic(self, catalog, catalog_templates):
        trace = simulate_frame_trace(catalog, "g", NoiseModel(seed=5))
        first = classify_template(normalize(trace), catalog_templates, 75.0)
        second = classify_template(normalize(trace), catalog_templates, 75.0)
        assert first == second

    def test_source_scaling_translation_does_not_change_label(self, catalog, catalog_templates):
        rng = np.random.default_rng(21)
        for sid in ("b", "h", "j"):
            trace = simulate_frame_trace(catalog, sid, NoiseModel(seed=31))
            base = classify_template(normalize(trace), catalog_templates, 75.0)
            a = rng.uniform(0.5, 2.0)
            b = rng.uniform(-500.0, 500.0, 2)
            moved = classify_template(
                normalize(trace.points * a + b), catalog_templates, 75.0
            )
            assert moved.shape == base.shape


class TestTrainTemplates:
    def _traces(self, catalog, seeds=(0,)):
        return {
            sid: [
                simulate_frame_trace(catalog, sid, noiseless(derive_seed(3, 8, i, k)))
                for k in seeds
            ]
            for i, sid in enumerate(SHAPE_IDS)
        }

    def test_noiseless_training_closure(self, catalog):
        traces = self._traces(catalog)
        tset = train_templates(traces, owner="alice")
        assert tset.owner == "alice" and tset.provenance == "user-trained"
        for sid in SHAPE_IDS:
            match = classify_template(normalize(traces[sid][0]), tset, 75.0)
            assert match.shape == sid and match.distance < 10.0

    def test_missing_shape_listed(self, catalog):
        traces = self._traces(catalog)
        del traces["g"]
        with pytest.raises(MissingShape) as err:
            train_templates(traces, owner="alice")
        assert err.value.missing == ("g",)

    def test_two_traces_per_shape_gives_24_templates(self, catalog):
        tset = train_templates(self._traces(catalog, seeds=(0, 1)), owner="bob")
        assert tset.count() == 24
        assert all(len(tset.templates[sid]) == 2 for sid in SHAPE_IDS)

    def test_append_to_base(self, catalog, catalog_templates):
        tset = train_templates(self._traces(catalog), owner="bob",
                               base=catalog_templates)
        assert tset.count() == 24

    def test_template_set_requires_all_shapes(self):
        with pytest.raises(MissingShape):
            TemplateSet({"a": [np.zeros((64, 2))]})

    def test_template_set_rejects_wrong_point_count(self, catalog_templates):
        bad = dict(catalog_templates.templates)
        bad["a"] = [np.zeros((63, 2))]
        with pytest.raises(LengthMismatch):
            TemplateSet(bad)


class TestTemplateMatcherEstimator:
    def test_fit_predict_round_trip(self, catalog):
        X, y = [], []
        for sid in SHAPE_IDS:
            for trial in range(2):
                X.append(simulate_frame_trace(
                    catalog, sid, NoiseModel(seed=derive_seed(11, 7, trial))).points)
                y.append(sid)
        clf = TemplateMatcher().fit(X, y)
        assert clf.score(X, y) == 1.0
        assert list(clf.classes_) == sorted(set(y))

    def test_reject_threshold_emits_sentinel(self, catalog):
        X = [catalog.shape(sid).motion for sid in SHAPE_IDS]
        clf = TemplateMatcher(reject_threshold=75.0).fit(X, list(SHAPE_IDS))
        sawtooth = np.column_stack((np.linspace(0, 300, 64), np.tile([0.0, 300.0], 32)))
        assert clf.predict([sawtooth])[0] == REJECTED
        assert clf.predict([X[0]])[0] == "a"

    def test_clone_preserves_params(self):
        clf = TemplateMatcher(n_points=32, square_size=200.0, reject_threshold=50.0)
        again = clone(clf)
        assert again.get_params() == clf.get_params()
