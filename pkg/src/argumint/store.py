"""Embedded file-backed document store.

One JSON file per (kind, id); writes are atomic via temp-file rename and the
latest write wins.  The interface is deliberately tiny so a real database can
replace it without touching the handlers.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
import time
from pathlib import Path
from typing import Protocol

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")

KIND_ESSAY = "essay"
KIND_ANALYSIS = "analysis"
KIND_SESSION = "session"


class DocumentStore(Protocol):
    def get(self, kind: str, doc_id: str) -> dict | None: ...

    def put(self, kind: str, doc_id: str, payload: dict) -> None: ...

    def list_ids(self, kind: str) -> list[str]: ...


class FileStore:
    """Directory-of-JSON store: ``<root>/<kind>/<id>.json``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, kind: str, doc_id: str) -> Path:
        if not _ID_PATTERN.match(kind) or not _ID_PATTERN.match(doc_id):
            raise ValueError(f"invalid store key {kind!r}/{doc_id!r}")
        return self.root / kind / f"{doc_id}.json"

    def get(self, kind: str, doc_id: str) -> dict | None:
        path = self._path(kind, doc_id)
        if not path.is_file():
            return None
        envelope = json.loads(path.read_text(encoding="utf-8"))
        return envelope["payload"]

    def put(self, kind: str, doc_id: str, payload: dict) -> None:
        path = self._path(kind, doc_id)
        envelope = {
            "kind": kind,
            "id": doc_id,
            "payload": payload,
            "updated_at": time.time(),
        }
        blob = json.dumps(envelope, ensure_ascii=False)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(blob)
                os.replace(tmp_name, path)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise

    def list_ids(self, kind: str) -> list[str]:
        folder = self.root / kind
        if not folder.is_dir():
            return []
        return sorted(p.stem for p in folder.glob("*.json"))
