"""File-backed persistence for catalogs, template sets, tree models,
enrollments, and traces.

All documents are JSON written atomically (temp file + rename in the same
directory), so readers never observe partial writes. Floats round-trip
exactly through the standard JSON encoder.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import Catalog, catalog_to_doc, load_catalog
from .enrollment import Enrollment
from .errors import InvariantViolation, NotFound, ParseError, StorageFailure
from .matching import TemplateSet
from .tree import TreeModel, tree_from_doc, tree_to_doc

DEFAULT_STORE_ENV = "GAZEAUTH_STORE"


@dataclass(frozen=True)
class StoreRoot:
    base: Path

    def __post_init__(self):
        object.__setattr__(self, "base", Path(self.base))

    @property
    def catalog_file(self) -> Path:
        return self.base / "catalog.json"

    @property
    def templates_dir(self) -> Path:
        return self.base / "templates"

    @property
    def models_dir(self) -> Path:
        return self.base / "models"

    @property
    def users_file(self) -> Path:
        return self.base / "users.json"

    @property
    def traces_dir(self) -> Path:
        return self.base / "traces"

    def ensure(self) -> "StoreRoot":
        try:
            for d in (self.base, self.templates_dir, self.models_dir, self.traces_dir):
                d.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageFailure(f"cannot create store at {self.base}: {exc}") from exc
        return self


def write_json_atomic(path: Path, doc) -> Path:
    path = Path(path)
    tmp_name = None
    try:
        with tempfile.NamedTemporaryFile(
            "w", dir=path.parent, prefix=path.name + ".", suffix=".tmp",
            delete=False, encoding="utf-8",
        ) as tmp:
            tmp_name = tmp.name
            json.dump(doc, tmp, indent=1)
            tmp.write("\n")
        os.replace(tmp_name, path)
        tmp_name = None
    except OSError as exc:
        raise StorageFailure(f"cannot write {path}: {exc}") from exc
    finally:
        if tmp_name is not None:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
    return path


def read_json(path: Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise NotFound(f"{path} does not exist") from exc
    except OSError as exc:
        raise StorageFailure(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return doc


def template_set_to_doc(ts: TemplateSet) -> dict:
    return {
        "version": 1,
        "kind": "template_set",
        "owner": ts.owner,
        "provenance": ts.provenance,
        "n_points": ts.n_points,
        "templates": {
            sid: [np.asarray(p).tolist() for p in paths]
            for sid, paths in ts.templates.items()
        },
    }


def template_set_from_doc(doc: dict) -> TemplateSet:
    from .errors import GazeAuthError

    try:
        return TemplateSet(
            templates={sid: [np.asarray(p, dtype=float) for p in paths]
                       for sid, paths in doc["templates"].items()},
            provenance=str(doc.get("provenance", "user-trained")),
            owner=str(doc.get("owner", "global")),
            n_points=int(doc.get("n_points", 64)),
        )
    except (KeyError, TypeError, ValueError, GazeAuthError) as exc:
        raise InvariantViolation(f"bad template-set document: {exc}") from exc


def save_template_set(root: StoreRoot, ts: TemplateSet) -> Path:
    root.ensure()
    return write_json_atomic(root.templates_dir / f"{ts.owner}.json",
                             template_set_to_doc(ts))


def load_template_set(root: StoreRoot, owner: str) -> TemplateSet:
    return template_set_from_doc(read_json(root.templates_dir / f"{owner}.json"))


def save_tree_model(root: StoreRoot, model: TreeModel, name: str) -> Path:
    root.ensure()
    return write_json_atomic(root.models_dir / f"{name}.json", tree_to_doc(model))


def load_tree_model(root: StoreRoot, name: str) -> TreeModel:
    return tree_from_doc(read_json(root.models_dir / f"{name}.json"))


def _enrollment_to_doc(enr: Enrollment) -> dict:
    return {
        "salt": enr.salt.hex(),
        "secret": enr.secret.hex(),
        "iterations": enr.iterations,
        "algorithm": enr.algorithm,
        "created_at": enr.created_at,
    }


def _enrollment_from_doc(user: str, doc: dict) -> Enrollment:
    try:
        return Enrollment(
            user=user,
            salt=bytes.fromhex(doc["salt"]),
            secret=bytes.fromhex(doc["secret"]),
            iterations=int(doc["iterations"]),
            algorithm=str(doc.get("algorithm", "template")),
            created_at=float(doc.get("created_at", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolation(f"bad enrollment for {user}: {exc}") from exc


def load_users(root: StoreRoot) -> dict[str, Enrollment]:
    try:
        doc = read_json(root.users_file)
    except NotFound:
        return {}
    users = doc.get("users", {})
    if not isinstance(users, dict):
        raise ParseError(f"{root.users_file}: 'users' must be an object")
    return {uid: _enrollment_from_doc(uid, entry) for uid, entry in users.items()}


def save_enrollment(root: StoreRoot, enr: Enrollment) -> Path:
    """Insert or replace one user's enrollment inside users.json."""
    root.ensure()
    try:
        doc = read_json(root.users_file)
    except NotFound:
        doc = {"version": 1, "kind": "users", "users": {}}
    doc.setdefault("users", {})[enr.user] = _enrollment_to_doc(enr)
    return write_json_atomic(root.users_file, doc)


def load_enrollment(root: StoreRoot, user: str) -> Enrollment:
    users = load_users(root)
    if user not in users:
        raise NotFound(f"no enrollment for user {user!r}")
    return users[user]


def save_catalog(root: StoreRoot, catalog: Catalog) -> Path:
    root.ensure()
    doc = catalog_to_doc(catalog)
    doc["version_kind"] = "catalog"
    return write_json_atomic(root.catalog_file, doc)


def load_store_catalog(root: StoreRoot) -> Catalog:
    if not root.catalog_file.exists():
        raise NotFound(f"{root.catalog_file} does not exist")
    return load_catalog(root.catalog_file)


def save(entity, root: StoreRoot) -> Path:
    """Persist any supported entity under the store root."""
    if isinstance(entity, TemplateSet):
        return save_template_set(root, entity)
    if isinstance(entity, TreeModel):
        return save_tree_model(root, entity, "default")
    if isinstance(entity, Enrollment):
        return save_enrollment(root, entity)
    if isinstance(entity, Catalog):
        return save_catalog(root, entity)
    raise TypeError(f"cannot persist {type(entity).__name__}")


def load(kind: str, root: StoreRoot, key: str = ""):
    if kind == "template_set":
        return load_template_set(root, key)
    if kind == "tree_model":
        return load_tree_model(root, key or "default")
    if kind == "enrollment":
        return load_enrollment(root, key)
    if kind == "catalog":
        return load_store_catalog(root)
    raise ValueError(f"unknown entity kind {kind!r}")
