"""Content-addressed JSON result cache with atomic writes."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Optional

import platformdirs

CACHE_ENV = "CSMM_CACHE_DIR"

log = logging.getLogger(__name__)


def canonical_json(obj: Any) -> str:
    """Deterministic serialization used for both cache keys and cached payloads."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(config: Any) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:24]


class ResultCache:
    """JSON files under ``root/<kind>/<key>.json``; writes go through a temp file and rename."""

    def __init__(self, root: Optional[os.PathLike] = None, enabled: bool = True):
        if root is None:
            root = os.environ.get(CACHE_ENV) or platformdirs.user_cache_dir("csmm")
        self.root = Path(root)
        self.enabled = enabled

    def path(self, kind: str, key: str) -> Path:
        return self.root / kind / f"{key}.json"

    def load(self, kind: str, key: str) -> Optional[Any]:
        if not self.enabled:
            return None
        p = self.path(kind, key)
        if not p.exists():
            return None
        try:
            return json.loads(p.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            log.warning("cache entry %s is unreadable (%s); recomputing", p, exc)
            return None

    def store(self, kind: str, key: str, payload: Any) -> None:
        if not self.enabled:
            return
        p = self.path(kind, key)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                # payload key order is kept so cache hits reproduce fresh output byte for byte
                fh.write(json.dumps(payload, separators=(",", ":"), ensure_ascii=False))
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
