"""Run manifests: what was run, with which inputs, producing which outputs."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

from . import __version__


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_digest(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, default=str).encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)    # path -> sha256
    outputs: list[str] = field(default_factory=list)
    seed: int | None = None
    version: str = __version__
    started: str = ""
    finished: str = ""

    def start(self):
        self.started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        return self

    def finish(self):
        self.finished = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        return self

    def add_input(self, path: str):
        if os.path.isdir(path):
            for name in sorted(os.listdir(path)):
                full = os.path.join(path, name)
                if os.path.isfile(full):
                    self.inputs[full] = file_digest(full)
        elif os.path.isfile(path):
            self.inputs[path] = file_digest(path)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "config_digest": config_digest(self.config),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
        }

    def write(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, sort_keys=True, indent=2)
            f.write("\n")
