"""Operator command line: enrollment, training, classification of trace
files, benchmarking, validation, simulation, and serving.

Exit codes: 0 success (authenticate: granted), 1 operational failure or a
denied authentication, 2 usage errors. Operational errors print one
machine-parsable line to stderr: ``error: <kind>: <message>``.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .auth import AuthEngine
from .catalog import (
    default_tree,
    load_catalog,
    load_default_catalog,
    template_set,
    validate_catalog,
)
from .errors import GazeAuthError, NotFound
from .geometry import normalize, read_trace_jsonl, write_trace_jsonl
from .matching import classify_template, train_templates
from .features import trace_features
from .simulate import NoiseModel, run_benchmark, simulate_frame_trace, simulate_user_dataset
from .store import (
    StoreRoot,
    DEFAULT_STORE_ENV,
    load_template_set,
    load_tree_model,
    save_template_set,
    save_tree_model,
    write_json_atomic,
)
from .tree import (
    LabeledDataset,
    classify_tree,
    cross_validate,
    read_dataset_csv,
    train_tree,
    write_dataset_csv,
)

CATALOG_ENV = "GAZEAUTH_CATALOG"
TRACE_NAME_RE = re.compile(r"^([a-l])(?:[._-].*)?\.jsonl$")


def _store_root(args) -> StoreRoot:
    base = args.store or os.environ.get(DEFAULT_STORE_ENV) or "gazeauth-store"
    return StoreRoot(Path(base))


def _catalog(args):
    source = getattr(args, "catalog", None) or os.environ.get(CATALOG_ENV)
    return load_catalog(source) if source else load_default_catalog()


def _noise(args) -> NoiseModel:
    return NoiseModel(
        jitter_sigma=args.noise_sigma,
        lag_ms=args.lag,
        dropout_prob=args.dropout,
        sample_rate_hz=args.rate,
        seed=args.seed,
    )


def _engine(args, catalog) -> AuthEngine:
    return AuthEngine(catalog, store=_store_root(args).ensure())


def _add_noise_flags(p, sigma=15.0, seed=0):
    p.add_argument("--noise-sigma", type=float, default=sigma, help="jitter sigma, px")
    p.add_argument("--lag", type=float, default=100.0, help="pursuit lag, ms")
    p.add_argument("--dropout", type=float, default=0.02, help="sample dropout probability")
    p.add_argument("--rate", type=float, default=30.0, help="sample rate, Hz")
    p.add_argument("--seed", type=int, default=seed)


def _add_common(p, store=True):
    p.add_argument("--catalog", help="catalog JSON path (default: shipped catalog)")
    if store:
        p.add_argument("--store", help=f"store directory (or ${DEFAULT_STORE_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazeauth", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enroll", help="store a user's 3-shape password")
    p.add_argument("--user", required=True)
    p.add_argument("--password", required=True, metavar="S1,S2,S3",
                   help="comma-separated shape ids, e.g. l,e,c")
    p.add_argument("--algo", choices=["template", "dtree"], default="template",
                   help="preferred classifier for this user's sessions")
    _add_common(p)

    p = sub.add_parser("train", help="build user templates and tree model from traces")
    p.add_argument("--user", required=True)
    p.add_argument("--traces", required=True, metavar="DIR",
                   help="directory of <shape>[._-]*.jsonl trace files")
    p.add_argument("--append", action="store_true",
                   help="add to the user's existing templates instead of replacing")
    _add_common(p)

    p = sub.add_parser("classify", help="classify one trace file")
    p.add_argument("--trace", required=True)
    p.add_argument("--algo", choices=["template", "dtree"], default="template")
    p.add_argument("--user", help="use this user's trained templates/model")
    p.add_argument("--tau", type=float, default=75.0,
                   help="rejection threshold for the template algorithm, px")
    _add_common(p)

    p = sub.add_parser("authenticate", help="run a 3-frame authentication from trace files")
    p.add_argument("--user", required=True)
    p.add_argument("--traces", required=True, nargs=3, metavar="FRAME")
    p.add_argument("--algo", choices=["template", "dtree"])
    _add_common(p)

    p = sub.add_parser("bench", help="simulated accuracy/latency benchmark")
    p.add_argument("--trials", type=int, default=10, help="trials per shape")
    p.add_argument("--algo", choices=["template", "dtree", "both"], default="both")
    p.add_argument("--out", help="write the JSON report here")
    _add_noise_flags(p, seed=42)
    _add_common(p, store=False)

    p = sub.add_parser("cross-validate", help="k-fold cross-validation of the tree")
    p.add_argument("--dataset", help="feature CSV (see docs); omit for --synthetic")
    p.add_argument("--synthetic", action="store_true",
                   help="generate the 6-user x 12-shape simulated dataset")
    p.add_argument("--users", type=int, default=6)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--export-dataset", help="also write the dataset as CSV")
    p.add_argument("--out", help="write the JSON report here")
    _add_common(p, store=False)

    p = sub.add_parser("validate-catalog", help="pairwise separation audit")
    p.add_argument("--min-separation", type=float, default=40.0)
    _add_common(p, store=False)

    p = sub.add_parser("simulate", help="write one synthetic pursuit trace")
    p.add_argument("--shape", required=True, metavar="ID")
    p.add_argument("--out", required=True)
    _add_noise_flags(p)
    _add_common(p, store=False)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("GAZEAUTH_PORT", "7411")))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--web-port", type=int, help="also serve WebSocket + static UI here")
    p.add_argument("--web-root", help="directory of built UI assets")
    _add_common(p)

    return parser


def cmd_enroll(args) -> int:
    catalog = _catalog(args)
    triple = tuple(s.strip() for s in args.password.split(","))
    engine = _engine(args, catalog)
    engine.enroll(args.user, triple, args.algo)
    print(f"enrolled {args.user}")
    return 0


def _load_trace_dir(directory: Path) -> dict[str, list]:
    by_shape: dict[str, list] = {}
    for entry in sorted(directory.iterdir()):
        m = TRACE_NAME_RE.match(entry.name)
        if m:
            by_shape.setdefault(m.group(1), []).append(read_trace_jsonl(entry))
    return by_shape


def cmd_train(args) -> int:
    catalog = _catalog(args)
    root = _store_root(args).ensure()
    directory = Path(args.traces)
    if not directory.is_dir():
        raise NotFound(f"{directory} is not a directory")
    traces = _load_trace_dir(directory)
    base = None
    if args.append:
        try:
            base = load_template_set(root, args.user)
        except NotFound:
            pass
    templates = train_templates(traces, owner=args.user, base=base)
    save_template_set(root, templates)
    features = [(trace_features(t), sid) for sid, ts in sorted(traces.items()) for t in ts]
    data = LabeledDataset(
        np.stack([fv.as_array() for fv, _ in features]),
        tuple(sid for _, sid in features),
        source="file",
    )
    model = train_tree(data)
    save_tree_model(root, model, args.user)
    print(f"trained {templates.count()} templates and a "
          f"{model.depth}-deep tree for {args.user}")
    return 0


def _classifier_state(args, catalog):
    templates = None
    tree = None
    if args.user:
        root = _store_root(args)
        try:
            templates = load_template_set(root, args.user)
        except NotFound:
            pass
        try:
            tree = load_tree_model(root, args.user)
        except NotFound:
            pass
    if templates is None:
        templates = template_set(catalog)
    if tree is None:
        tree = default_tree(catalog)
    return templates, tree


def cmd_classify(args) -> int:
    catalog = _catalog(args)
    trace = read_trace_jsonl(args.trace)
    templates, tree = _classifier_state(args, catalog)
    if args.algo == "template":
        match = classify_template(normalize(trace), templates, reject_threshold=None)
        if match.distance > args.tau:
            print(f"rejected {match.distance:.6f}")
        else:
            print(f"{match.shape} {match.distance:.6f}")
    else:
        label = classify_tree(tree, trace_features(trace))
        print(f"{label} none")
    return 0


def cmd_authenticate(args) -> int:
    catalog = _catalog(args)
    engine = _engine(args, catalog)
    traces = [read_trace_jsonl(f) for f in args.traces]
    decision = engine.authenticate(args.user, traces, args.algo)
    print("granted" if decision.granted else "denied")
    return 0 if decision.granted else 1


def cmd_bench(args) -> int:
    catalog = _catalog(args)
    result = run_benchmark(catalog, _noise(args), args.trials, args.algo)
    doc = result.to_doc()
    for name in ("template", "dtree"):
        if name in doc["accuracy"]:
            print(f"{name}: accuracy {doc['accuracy'][name]:.4f} "
                  f"median latency {doc['timing_ms'][name]:.3f} ms")
    if args.out:
        write_json_atomic(Path(args.out), doc)
        print(f"report written to {args.out}")
    return 0


def cmd_cross_validate(args) -> int:
    catalog = _catalog(args)
    if args.dataset:
        data = read_dataset_csv(args.dataset)
    else:  # synthetic is the default source
        data = simulate_user_dataset(catalog, n_users=args.users, seed=args.seed)
    if args.export_dataset:
        write_dataset_csv(data, args.export_dataset)
    result = cross_validate(data, k=args.folds, seed=args.seed)
    print(f"accuracy {result.accuracy:.4f} over {len(data)} samples, "
          f"{args.folds} folds, seed {args.seed}")
    if args.out:
        doc = {
            "config": {
                "folds": args.folds,
                "seed": args.seed,
                "source": args.dataset or f"synthetic:{args.users}x12",
                "samples": len(data),
            },
            "accuracy": result.accuracy,
            "confusion": result.confusion.to_lists(),
            "per_class_accuracy": result.confusion.per_class_accuracy,
        }
        write_json_atomic(Path(args.out), doc)
        print(f"report written to {args.out}")
    return 0


def cmd_validate_catalog(args) -> int:
    catalog = _catalog(args)
    report = validate_catalog(catalog, args.min_separation)
    print(f"minimum pairwise template distance: {report.min_distance:.2f} px "
          f"(pair {report.min_pair[0]}-{report.min_pair[1]}, "
          f"threshold {report.threshold:g})")
    for a, b, d in report.pairs_below:
        print(f"below threshold: {a}-{b} at {d:.2f} px")
    print("catalog:", "ok" if report.ok else "too-close")
    return 0 if report.ok else 1


def cmd_simulate(args) -> int:
    catalog = _catalog(args)
    trace = simulate_frame_trace(catalog, args.shape, _noise(args))
    write_trace_jsonl(trace, args.out)
    print(f"wrote {trace.n_samples} samples to {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import run_service

    catalog = _catalog(args)
    engine = _engine(args, catalog)
    web_root = Path(args.web_root).resolve() if args.web_root else None
    print(f"serving on tcp://{args.host}:{args.port}"
          + (f" and ws://{args.host}:{args.web_port}" if args.web_port else ""))
    try:
        run_service(engine, catalog, args.port, args.host, args.web_port, web_root)
    except KeyboardInterrupt:
        pass
    return 0


COMMANDS = {
    "enroll": cmd_enroll,
    "train": cmd_train,
    "classify": cmd_classify,
    "authenticate": cmd_authenticate,
    "bench": cmd_bench,
    "cross-validate": cmd_cross_validate,
    "validate-catalog": cmd_validate_catalog,
    "simulate": cmd_simulate,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (GazeAuthError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
