"""Best-energy result cache.

A JSON map keyed by a content hash of (set definition, s, N).  Entries keep
the best energy ever seen together with its configuration, so later runs can
warm-start and the cached energy never increases.  Corrupt entries are
skipped with a warning, never fatal.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from datetime import datetime, timezone

from .geometry import set_hash

log = logging.getLogger(__name__)

_REQUIRED_FIELDS = {"energy", "configuration", "status", "timestamp"}


def cache_key(set_dict: dict, s: float, N: int) -> str:
    blob = json.dumps({"set": set_dict, "s": float(s), "N": int(N)},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class EnergyCache:
    """In-memory cache with explicit load/save to a JSON file."""

    def __init__(self, path=None):
        self.path = os.fspath(path) if path is not None else None
        self.entries: dict[str, dict] = {}
        # Keys re-annealed in this session; lets a refresh pass touch each
        # (set, s, N) once instead of once per enclosing solve.
        self.session_refreshed: set[str] = set()
        if self.path is not None and os.path.exists(self.path):
            self.load()

    def load(self) -> None:
        try:
            with open(self.path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            log.warning("cache file %s unreadable (%s); starting empty", self.path, exc)
            return
        if not isinstance(raw, dict):
            log.warning("cache file %s is not a JSON map; starting empty", self.path)
            return
        for key, entry in raw.items():
            if isinstance(entry, dict) and _REQUIRED_FIELDS <= set(entry):
                self.entries[key] = entry
            else:
                log.warning("skipping corrupt cache entry %s", key)

    def save(self) -> None:
        if self.path is None:
            return
        directory = os.path.dirname(os.path.abspath(self.path))
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(self.entries, fh, sort_keys=True)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def get(self, set_dict: dict, s: float, N: int) -> dict | None:
        return self.entries.get(cache_key(set_dict, s, N))

    def update(self, set_dict: dict, s: float, N: int, energy: float,
               configuration: dict, status: str, n1: int) -> bool:
        """Store the result iff it improves on the cached energy.

        Returns True when the entry was created or replaced.
        """
        key = cache_key(set_dict, s, N)
        existing = self.entries.get(key)
        if existing is not None and existing["energy"] <= energy:
            return False
        self.entries[key] = {
            "energy": float(energy),
            "configuration": configuration,
            "status": status,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "n1": int(n1),
            "set_hash": set_hash(set_dict),
            "s": float(s),
            "N": int(N),
        }
        return True
