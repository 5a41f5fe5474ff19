"""Synthetic smooth-pursuit traces and the benchmark harness.

Stands in for eye-tracker hardware: samples a shape's target position over a
frame, applies a fixed time lag, per-axis Gaussian jitter, and sample dropout.
Every trace is a pure function of its seed; per-trial seeds derive from
(master seed, stream, shape index, trial index), so adding shapes or trials
never perturbs existing trials' traces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .catalog import Catalog, FramePlan, ShapeSpec, default_tree, position_at, template_set
from .errors import ConfigError
from .features import trace_features
from .geometry import MIN_TRACE_SAMPLES, RawTrace, normalize
from .matching import TemplateSet, classify_template
from .metrics import ConfusionMatrix
from .shapes import SHAPE_IDS, SHAPE_INDEX
from .tree import LabeledDataset, TreeModel, classify_tree

# seed streams, so traces drawn for different purposes never collide
EVAL_STREAM = 0
TRAIN_STREAM = 1
USER_STREAM = 2


@dataclass(frozen=True)
class NoiseModel:
    """Tracker imperfection knobs; defaults model an entry-level device."""

    jitter_sigma: float = 15.0  # px, Gaussian per sample per axis
    lag_ms: float = 100.0  # pursuit trails the target by a pure time shift
    dropout_prob: float = 0.02
    sample_rate_hz: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.jitter_sigma < 0:
            raise ConfigError("jitter_sigma must be >= 0")
        if not (0 <= self.dropout_prob < 1):
            raise ConfigError("dropout_prob must lie in [0, 1)")
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz must be positive")
        if self.lag_ms < 0:
            raise ConfigError("lag_ms must be >= 0")

    def with_seed(self, seed: int) -> "NoiseModel":
        return replace(self, seed=seed)


def noiseless(seed: int = 0) -> NoiseModel:
    return NoiseModel(jitter_sigma=0.0, lag_ms=0.0, dropout_prob=0.0, seed=seed)


def derive_seed(master: int, stream: int, *key: int) -> int:
    seq = np.random.SeedSequence(master, spawn_key=(stream, *key))
    return int(seq.generate_state(1, np.uint64)[0])


def simulate_pursuit(shape: ShapeSpec, plan: FramePlan, noise: NoiseModel) -> RawTrace:
    """One frame's worth of gaze samples following a shape's motion path."""
    dt = 1000.0 / noise.sample_rate_hz
    n = int(round(plan.frame_duration_ms / dt)) + 1  # both endpoints sampled
    if n * (1.0 - noise.dropout_prob) < MIN_TRACE_SAMPLES:
        raise ConfigError(
            f"expected {n * (1 - noise.dropout_prob):.0f} samples after dropout, "
            f"need >= {MIN_TRACE_SAMPLES}; raise sample_rate_hz or frame duration"
        )
    t = np.arange(n) * dt
    u = np.clip((t - noise.lag_ms) / plan.frame_duration_ms, 0.0, 1.0)
    pos = position_at(shape, u)
    rng = np.random.default_rng(noise.seed)
    pos = pos + rng.normal(0.0, noise.jitter_sigma, pos.shape)
    keep = rng.random(n) >= noise.dropout_prob
    return RawTrace(t[keep], pos[keep])


def simulate_frame_trace(catalog: Catalog, shape_id: str, noise: NoiseModel) -> RawTrace:
    return simulate_pursuit(catalog.shape(shape_id), catalog.plan, noise)


@dataclass(frozen=True)
class AlgorithmResult:
    accuracy: float
    confusion: ConfusionMatrix
    median_latency_ms: float


@dataclass(frozen=True)
class BenchmarkResult:
    noise: NoiseModel
    trials_per_shape: int
    catalog_version: str
    template: Optional[AlgorithmResult]
    dtree: Optional[AlgorithmResult]

    def to_doc(self) -> dict:
        doc = {
            "config": {
                "noise": {
                    "jitter_sigma": self.noise.jitter_sigma,
                    "lag_ms": self.noise.lag_ms,
                    "dropout_prob": self.noise.dropout_prob,
                    "sample_rate_hz": self.noise.sample_rate_hz,
                    "seed": self.noise.seed,
                },
                "trials_per_shape": self.trials_per_shape,
                "catalog_version": self.catalog_version,
            },
            "accuracy": {},
            "confusion": {},
            "per_class_accuracy": {},
            "timing_ms": {},
        }
        for name, res in (("template", self.template), ("dtree", self.dtree)):
            if res is None:
                continue
            doc["accuracy"][name] = res.accuracy
            doc["confusion"][name] = res.confusion.to_lists()
            doc["per_class_accuracy"][name] = res.confusion.per_class_accuracy
            doc["timing_ms"][name] = res.median_latency_ms
        return doc


def simulated_training_set(catalog: Catalog, noise: NoiseModel,
                           trials_per_shape: int = 5) -> LabeledDataset:
    """Feature dataset from simulated pursuits, for training the tree under
    the same noise it will face."""
    rows, labels = [], []
    for sid in SHAPE_IDS:
        for trial in range(trials_per_shape):
            seed = derive_seed(noise.seed, TRAIN_STREAM, SHAPE_INDEX[sid], trial)
            trace = simulate_frame_trace(catalog, sid, noise.with_seed(seed))
            rows.append(trace_features(trace).as_array())
            labels.append(sid)
    return LabeledDataset(np.stack(rows), tuple(labels), source="simulated")


def simulate_user_dataset(catalog: Catalog, n_users: int = 6, seed: int = 0,
                          jitter_range: tuple[float, float] = (10.0, 25.0),
                          base: Optional[NoiseModel] = None) -> LabeledDataset:
    """Dataset shaped like a small user study: n_users x 12 shapes, one trace
    each, with per-user jitter drawn from ``jitter_range``."""
    base = base or NoiseModel()
    rows, labels = [], []
    for user in range(n_users):
        user_rng = np.random.default_rng(derive_seed(seed, USER_STREAM, user))
        jitter = float(user_rng.uniform(*jitter_range))
        for sid in SHAPE_IDS:
            trace_seed = derive_seed(seed, USER_STREAM, user, SHAPE_INDEX[sid])
            noise = replace(base, jitter_sigma=jitter, seed=trace_seed)
            trace = simulate_frame_trace(catalog, sid, noise)
            rows.append(trace_features(trace).as_array())
            labels.append(sid)
    return LabeledDataset(np.stack(rows), tuple(labels), source="simulated")


def run_benchmark(catalog: Catalog, noise: NoiseModel, trials_per_shape: int = 10,
                  algorithm: str = "both",
                  templates: Optional[TemplateSet] = None,
                  tree: Optional[TreeModel] = None) -> BenchmarkResult:
    """Classify simulated pursuits of every shape and report accuracy,
    confusion, and median per-classification latency per algorithm.

    Mirrors the evaluation protocol of the original study at desk scale:
    trials_per_shape traces per shape, each classified from its raw trace.
    The template algorithm always assigns the nearest shape here (no
    rejection); rejection is an authentication-level concern.
    """
    if algorithm not in ("template", "dtree", "both"):
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    run_template = algorithm in ("template", "both")
    run_dtree = algorithm in ("dtree", "both")
    if run_template and templates is None:
        templates = template_set(catalog)
    if run_dtree and tree is None:
        tree = default_tree(catalog)

    true_labels: list[str] = []
    pred = {"template": [], "dtree": []}
    lat = {"template": [], "dtree": []}
    for sid in SHAPE_IDS:
        for trial in range(trials_per_shape):
            seed = derive_seed(noise.seed, EVAL_STREAM, SHAPE_INDEX[sid], trial)
            trace = simulate_frame_trace(catalog, sid, noise.with_seed(seed))
            true_labels.append(sid)
            if run_template:
                t0 = time.perf_counter()
                match = classify_template(normalize(trace), templates,
                                          reject_threshold=None)
                lat["template"].append((time.perf_counter() - t0) * 1000.0)
                pred["template"].append(match.shape)
            if run_dtree:
                t0 = time.perf_counter()
                label = classify_tree(tree, trace_features(trace))
                lat["dtree"].append((time.perf_counter() - t0) * 1000.0)
                pred["dtree"].append(label)

    def result(name) -> Optional[AlgorithmResult]:
        if not pred[name]:
            return None
        confusion = ConfusionMatrix.from_pairs(true_labels, pred[name])
        return AlgorithmResult(
            accuracy=confusion.accuracy,
            confusion=confusion,
            median_latency_ms=float(np.median(lat[name])),
        )

    return BenchmarkResult(
        noise=noise,
        trials_per_shape=trials_per_shape,
        catalog_version=catalog.version,
        template=result("template"),
        dtree=result("dtree"),
    )
