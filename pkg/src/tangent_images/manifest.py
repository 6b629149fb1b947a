"""Run manifests: a small JSON record written alongside every file-producing
CLI run, capturing what was executed on which inputs."""

from __future__ import annotations

import hashlib
import json
import os
from typing import Dict, Optional

TOOL_VERSION = "0.1.0"


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def build_manifest(command: str, parameters: dict,
                   input_paths: Dict[str, str], wall_time_s: float) -> dict:
    hashes = {}
    for name, path in input_paths.items():
        if os.path.isdir(path):
            files = sorted(
                os.path.join(root, f)
                for root, _, names in os.walk(path) for f in names)
            agg = hashlib.sha256()
            for f in files:
                agg.update(os.path.relpath(f, path).encode())
                agg.update(bytes.fromhex(sha256_file(f)))
            hashes[name] = agg.hexdigest()
        else:
            hashes[name] = sha256_file(path)
    return {
        "command": command,
        "parameters": parameters,
        "input_hashes": hashes,
        "tool_version": TOOL_VERSION,
        "wall_time_s": wall_time_s,
    }


def write_manifest(manifest: dict, out_path: str) -> None:
    with open(out_path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def manifest_path_for(output: str) -> str:
    """manifest.json inside directory outputs, <name>.manifest.json beside
    file outputs."""
    if os.path.isdir(output):
        return os.path.join(output, "manifest.json")
    return output + ".manifest.json"
