"""Run manifests: config echo, versions, timestamps, hashed artifact index."""

from __future__ import annotations

import datetime
import hashlib
import json
import os
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


@dataclass
class RunManifest:
    config: dict
    versions: dict = field(default_factory=dict)
    started: str = field(default_factory=_now)
    finished: str | None = None
    artifacts: list[dict] = field(default_factory=list)
    headline: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.versions:
            from . import __version__
            self.versions = {"glperiod": __version__, "numpy": np.__version__,
                             "python": platform.python_version()}

    def add_artifact(self, path, base_dir) -> None:
        path = Path(path)
        self.artifacts.append({
            "path": str(path.relative_to(base_dir)),
            "sha256": sha256_of(path),
            "bytes": path.stat().st_size,
        })

    def finish(self) -> None:
        self.finished = _now()

    def as_dict(self) -> dict:
        return {"config": self.config, "versions": self.versions,
                "started": self.started, "finished": self.finished,
                "artifacts": self.artifacts, "headline": self.headline}

    def write(self, path) -> None:
        atomic_write_text(path, json.dumps(self.as_dict(), indent=2, sort_keys=True))


def load_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def verify_manifest(path) -> list[str]:
    """Re-hash every indexed artifact; returns a list of problems (empty when
    the manifest is intact)."""
    path = Path(path)
    manifest = load_manifest(path)
    base = path.parent
    problems = []
    for entry in manifest.get("artifacts", []):
        target = base / entry["path"]
        if not target.exists():
            problems.append(f"missing artifact: {entry['path']}")
            continue
        if sha256_of(target) != entry["sha256"]:
            problems.append(f"hash mismatch: {entry['path']}")
    return problems
