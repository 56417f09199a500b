"""Run manifests: what a command ran with and what it read.

Every mutating CLI command drops a JSON manifest next to its output. Input
files are identified by SHA-256 so a run can be audited later. Timestamps
default to wall clock; setting COMPFORGE_TIMESTAMP pins them, which makes
whole output directories byte-reproducible for testing.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from . import __version__

TIMESTAMP_ENV = "COMPFORGE_TIMESTAMP"


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_timestamp() -> str:
    override = os.environ.get(TIMESTAMP_ENV)
    if override:
        return override
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(
    path: str | Path,
    command: str,
    flags: Mapping[str, object],
    inputs: Mapping[str, str | Path],
    seed: int | None = None,
) -> None:
    doc = {
        "command": command,
        "flags": {k: flags[k] for k in sorted(flags)},
        "inputs": {name: sha256_file(p) for name, p in sorted(inputs.items())},
        "seed": seed,
        "tool_version": __version__,
        "timestamp": manifest_timestamp(),
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def manifest_path_for(output: str | Path) -> Path:
    out = Path(output)
    return out.with_name(out.name + ".manifest.json")
