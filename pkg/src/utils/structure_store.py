"""Two-level store (memory + diskcache) for validated build descriptors.

Built structures hold closures and are never serialized; the store keeps the
descriptor JSON under its content hash and callers rebuild from it.
"""

import hashlib
import json
import time
from pathlib import Path
from typing import Any, Dict, Optional

import diskcache as dc

from config.settings import load_settings
from utils.logger import get_enhanced_logger

logger = get_enhanced_logger(__name__)


def content_key(payload: Dict[str, Any]) -> str:
    """Stable hash of a JSON-compatible payload."""
    canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


class StructureStore:
    """Memory cache in front of a diskcache directory."""

    def __init__(self, cache_dir: Optional[str] = None, ttl: Optional[int] = None):
        config = load_settings().cache
        self.cache_dir = Path(cache_dir or config.cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.ttl = ttl if ttl is not None else config.cache_ttl_default

        self.memory_cache: Dict[str, Dict[str, Any]] = {}
        self.disk_cache = dc.Cache(str(self.cache_dir / 'descriptors'))

        self.stats = {'hits': 0, 'misses': 0, 'memory_hits': 0, 'disk_hits': 0}

    def put(self, payload: Dict[str, Any]) -> str:
        """Store a descriptor payload and return its key."""
        key = content_key(payload)
        entry = {'value': payload, 'timestamp': time.time(), 'ttl': self.ttl}
        self.memory_cache[key] = entry
        self.disk_cache.set(key, entry, expire=self.ttl)
        logger.debug("Descriptor stored", key=key)
        return key

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        """Look a descriptor up by key; None when absent or expired."""
        entry = self.memory_cache.get(key)
        if entry is not None and not self._is_expired(entry):
            self.stats['hits'] += 1
            self.stats['memory_hits'] += 1
            return entry['value']
        self.memory_cache.pop(key, None)

        entry = self.disk_cache.get(key)
        if entry is not None and not self._is_expired(entry):
            self.memory_cache[key] = entry
            self.stats['hits'] += 1
            self.stats['disk_hits'] += 1
            return entry['value']

        self.stats['misses'] += 1
        logger.debug("Descriptor not found", key=key)
        return None

    def delete(self, key: str) -> bool:
        found = self.memory_cache.pop(key, None) is not None
        return bool(self.disk_cache.delete(key)) or found

    def clear(self):
        self.memory_cache.clear()
        self.disk_cache.clear()

    def close(self):
        self.disk_cache.close()

    def get_stats(self) -> Dict[str, Any]:
        total = self.stats['hits'] + self.stats['misses']
        return {
            **self.stats,
            'total_requests': total,
            'hit_rate': round(self.stats['hits'] / total * 100, 2) if total else 0,
            'memory_size': len(self.memory_cache),
        }

    @staticmethod
    def _is_expired(entry: Dict[str, Any]) -> bool:
        return (time.time() - entry['timestamp']) > entry['ttl']
