"""Workspace: shared NETF definitions, default budgets, and the fresh-letter counter."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import InputError
from .netf import Document, parse

ENV_VAR = "RENET_WORKSPACE"
CONFIG = "renet.json"
STATE = ".renet-state.json"

DEFAULTS = {"budget": 16, "max_nodes": 4, "memory": "memory"}


@dataclass
class Workspace:
    root: Optional[Path] = None
    doc: Document = field(default_factory=Document)
    config: dict = field(default_factory=lambda: dict(DEFAULTS))

    @classmethod
    def load(cls, root=None) -> "Workspace":
        root = root or os.environ.get(ENV_VAR)
        if not root:
            return cls()
        path = Path(root)
        if not path.is_dir():
            raise InputError(f"workspace {path} is not a directory")
        doc = Document()
        for f in sorted(path.glob("*.netf")):
            doc = doc.merge(parse(f.read_text(), doc))
        config = dict(DEFAULTS)
        cfg = path / CONFIG
        if cfg.exists():
            try:
                config.update(json.loads(cfg.read_text()))
            except ValueError as e:
                raise InputError(f"{cfg}: {e}") from e
        return cls(path, doc, config)

    def default(self, key: str):
        return self.config.get(key, DEFAULTS.get(key))

    # the counter only ever moves forward
    def next_fresh(self, count: int = 1) -> int:
        if self.root is None:
            return 0
        state = self.root / STATE
        current = 0
        if state.exists():
            try:
                current = int(json.loads(state.read_text()).get("fresh", 0))
            except ValueError as e:
                raise InputError(f"{state}: {e}") from e
        state.write_text(json.dumps({"fresh": current + count}) + "\n")
        return current
