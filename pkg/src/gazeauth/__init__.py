"""Authentication from smooth-pursuit trajectories over moving shapes.

A user picks three of twelve moving shapes as a password and authenticates by
following them with their gaze (or pointer), one per frame, over three
frames. Captured scan-paths are classified either by nearest-template
distance or by a decision tree over bounding-box features; a synthetic
pursuit simulator stands in for eye-tracker hardware.
"""

from .catalog import (
    Catalog,
    FramePlan,
    SeparationReport,
    ShapeSpec,
    catalog_features,
    default_tree,
    load_catalog,
    load_default_catalog,
    position_at,
    template_set,
    validate_catalog,
)
from .features import FEATURE_NAMES, BoundingBoxFeaturizer, FeatureVector, extract_features, trace_features
from .geometry import (
    N_POINTS,
    SQUARE_SIZE,
    PathNormalizer,
    RawTrace,
    normalize,
    read_trace_jsonl,
    resample,
    scale_to_square,
    translate_to_origin,
    write_trace_jsonl,
)
from .matching import (
    REJECT_THRESHOLD,
    REJECTED,
    TemplateMatch,
    TemplateMatcher,
    TemplateSet,
    classify_template,
    path_distance,
    train_templates,
)
from .metrics import ConfusionMatrix
from .shapes import SHAPE_IDS, SHAPE_NAMES
from .tree import (
    CartClassifier,
    CVResult,
    LabeledDataset,
    TreeModel,
    classify_tree,
    cross_validate,
    read_dataset_csv,
    train_tree,
    write_dataset_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
