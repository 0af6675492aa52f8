"""On-disk store for embedding matrices, addressed by (dataset, model, kind).

Layout:

    root/<dataset_id>/<model_id>.<kind>.esf1
    root/manifest.json

The manifest lists every stored file with its whole-file checksum so an
archive can be audited cheaply. Writers take an exclusive lock file per
address; readers need no locks. Alignment joins two models' matrices over
the same dataset by key intersection, in the first argument's key order.
"""

from __future__ import annotations

import json
import os
import warnings
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import esf1
from .errors import NotFoundError, StoreError, ValidationError
from .kernels import xxh64
from .matrix import EmbeddingMatrix

_KIND_SUFFIXES = ("chunks", "queries")


@dataclass
class AlignedPair:
    """Row-aligned matrices for two models over one dataset."""

    model_a_rows: np.ndarray
    model_b_rows: np.ndarray
    shared_keys: list
    n_a: int
    n_b: int

    @property
    def n_shared(self) -> int:
        return len(self.shared_keys)


def align(a: EmbeddingMatrix, b: EmbeddingMatrix) -> AlignedPair:
    """Gather rows of both matrices onto their shared keys, in a's key order.

    Warns when the intersection is smaller than either input, which points
    at partially embedded corpora.
    """
    if a.dataset_id != b.dataset_id:
        raise ValidationError(
            f"dataset mismatch: {a.dataset_id!r} vs {b.dataset_id!r}"
        )
    if a.kind != b.kind:
        raise ValidationError(f"kind mismatch: {a.kind!r} vs {b.kind!r}")
    b_index = b.key_index()
    shared = [k for k in a.keys if k in b_index]
    if not shared:
        raise ValidationError(
            f"no shared keys between {a.model_id} and {b.model_id} on {a.dataset_id}"
        )
    if len(shared) < max(a.n, b.n):
        warnings.warn(
            f"aligning {a.model_id} (n={a.n}) with {b.model_id} (n={b.n}) "
            f"keeps only {len(shared)} shared keys",
            stacklevel=2,
        )
    a_index = a.key_index()
    ia = np.array([a_index[k] for k in shared], dtype=np.intp)
    ib = np.array([b_index[k] for k in shared], dtype=np.intp)
    return AlignedPair(
        model_a_rows=a.rows[ia],
        model_b_rows=b.rows[ib],
        shared_keys=shared,
        n_a=a.n,
        n_b=b.n,
    )


def _check_id(name: str, value: str) -> str:
    if not value or "/" in value or "\\" in value or "\x00" in value:
        raise ValidationError(f"invalid {name}: {value!r}")
    return value


class EmbeddingStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths ------------------------------------------------------------

    def path_for(self, dataset_id: str, model_id: str, kind: str) -> Path:
        _check_id("dataset_id", dataset_id)
        _check_id("model_id", model_id)
        if kind not in _KIND_SUFFIXES:
            raise ValidationError(f"kind must be one of {_KIND_SUFFIXES}, got {kind!r}")
        return self.root / dataset_id / f"{model_id}.{kind}.esf1"

    def _manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def chunks_path(self, dataset_id: str) -> Path:
        _check_id("dataset_id", dataset_id)
        return self.root / dataset_id / "chunks.jsonl"

    def checkpoint_dir(self, dataset_id: str, model_id: str, kind: str) -> Path:
        return self.root / ".checkpoints" / dataset_id / f"{model_id}.{kind}"

    # -- locking ----------------------------------------------------------

    @contextmanager
    def _write_lock(self, target: Path):
        lock = target.with_name(target.name + ".lock")
        lock.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreError(
                f"{target} is locked by another writer (lock file {lock})"
            ) from None
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield
        finally:
            lock.unlink(missing_ok=True)

    # -- manifest ---------------------------------------------------------

    def _load_manifest(self) -> dict:
        path = self._manifest_path()
        if not path.exists():
            return {"entries": {}}
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreError(f"corrupt manifest {path}: {exc}") from None

    def _write_manifest(self, manifest: dict) -> None:
        path = self._manifest_path()
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(
            json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
        tmp.replace(path)

    @staticmethod
    def _address(dataset_id: str, model_id: str, kind: str) -> str:
        return f"{dataset_id}/{model_id}.{kind}"

    # -- operations -------------------------------------------------------

    def exists(self, dataset_id: str, model_id: str, kind: str) -> bool:
        return self.path_for(dataset_id, model_id, kind).exists()

    def put(self, m: EmbeddingMatrix, overwrite: bool = False) -> str:
        """Persist a matrix; returns its manifest address."""
        m.validate()
        target = self.path_for(m.dataset_id, m.model_id, m.kind)
        if target.exists() and not overwrite:
            raise StoreError(f"entry already exists at {target}; pass overwrite=True")
        with self._write_lock(target):
            data = esf1.encode(m)
            tmp = target.with_name(target.name + ".tmp")
            tmp.write_bytes(data)
            tmp.replace(target)
            address = self._address(m.dataset_id, m.model_id, m.kind)
            with self._write_lock(self._manifest_path()):
                manifest = self._load_manifest()
                manifest["entries"][address] = {
                    "path": str(target.relative_to(self.root)),
                    "checksum": f"{xxh64(data):016x}",
                    "n": m.n,
                    "dim": m.dim,
                }
                self._write_manifest(manifest)
        return address

    def get(self, dataset_id: str, model_id: str, kind: str) -> EmbeddingMatrix:
        target = self.path_for(dataset_id, model_id, kind)
        if not target.exists():
            raise NotFoundError(
                f"no stored embeddings at {self._address(dataset_id, model_id, kind)}"
            )
        return esf1.read_file(target)

    def rebuild_manifest(self) -> dict:
        """Re-scan the tree, verifying and re-listing every esf1 file."""
        manifest = {"entries": {}}
        for path in sorted(self.root.glob("*/*.esf1")):
            m = esf1.read_file(path)
            data = path.read_bytes()
            address = self._address(m.dataset_id, m.model_id, m.kind)
            manifest["entries"][address] = {
                "path": str(path.relative_to(self.root)),
                "checksum": f"{xxh64(data):016x}",
                "n": m.n,
                "dim": m.dim,
            }
        with self._write_lock(self._manifest_path()):
            self._write_manifest(manifest)
        return manifest

    def verify(self) -> list[str]:
        """Audit files against the manifest; returns human-readable problems."""
        problems = []
        manifest = self._load_manifest()
        for address, entry in sorted(manifest["entries"].items()):
            path = self.root / entry["path"]
            if not path.exists():
                problems.append(f"{address}: file missing ({path})")
                continue
            actual = f"{xxh64(path.read_bytes()):016x}"
            if actual != entry["checksum"]:
                problems.append(
                    f"{address}: checksum mismatch "
                    f"(manifest {entry['checksum']}, file {actual})"
                )
        return problems
