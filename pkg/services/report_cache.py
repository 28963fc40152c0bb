"""
On-disk report cache
Content-addressed JSON documents, one file per key, guarded by file locks.
Writes go to a temporary file that is renamed into place, so readers never
see a half-written report even with several sweep workers on the same key.
"""

import hashlib
import json
import os
import tempfile
import threading
from contextlib import contextmanager
from typing import Any, Callable, Dict, Optional, Tuple
import logging

import numpy as np
from filelock import FileLock

logger = logging.getLogger(__name__)


def content_key(*parts: Any) -> str:
    """
    SHA-256 over an ordered list of parts.

    Arrays contribute dtype, shape and raw bytes; everything else its repr
    (strings and bytes as-is). Each part is length-prefixed so that
    ("ab", "c") and ("a", "bc") hash differently.
    """
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            array = np.ascontiguousarray(part)
            payload = f"{array.dtype.str}{array.shape}".encode() + array.tobytes()
        elif isinstance(part, bytes):
            payload = part
        elif isinstance(part, str):
            payload = part.encode('utf-8')
        else:
            payload = repr(part).encode('utf-8')
        digest.update(len(payload).to_bytes(8, 'little'))
        digest.update(payload)
    return digest.hexdigest()


def dumps_document(document: Dict[str, Any]) -> str:
    """Canonical JSON text: identical documents give identical bytes"""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class ReportCache:
    """
    Cache of JSON documents keyed by content hash
    Thread-safe; safe across processes through per-key lock files
    """

    def __init__(self, cache_dir: str, lock_timeout: float = 30.0):
        """
        Args:
            cache_dir (str): directory holding `<key>.json` files and a `locks/` folder
            lock_timeout (float): seconds to wait for a key lock
        """
        self.cache_dir = cache_dir
        self.lock_dir = os.path.join(cache_dir, 'locks')
        self.lock_timeout = lock_timeout
        self._locks: Dict[str, FileLock] = {}
        self._locks_guard = threading.Lock()
        self._stats_guard = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.writes = 0

        os.makedirs(self.lock_dir, exist_ok=True)

    def _path(self, key: str) -> str:
        return os.path.join(self.cache_dir, f"{key}.json")

    def _get_lock(self, key: str) -> FileLock:
        with self._locks_guard:
            if key not in self._locks:
                lock_path = os.path.join(self.lock_dir, f"{key}.lock")
                self._locks[key] = FileLock(lock_path, timeout=self.lock_timeout)
            return self._locks[key]

    @contextmanager
    def locked(self, key: str):
        """Hold the lock of one cache entry"""
        with self._get_lock(key):
            yield

    def _count(self, attribute: str):
        with self._stats_guard:
            setattr(self, attribute, getattr(self, attribute) + 1)

    def _read(self, key: str) -> Optional[Dict[str, Any]]:
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, encoding='utf-8') as handle:
                return json.load(handle)
        except (OSError, ValueError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path}: {e}")
            return None

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        document = self._read(key)
        self._count('hits' if document is not None else 'misses')
        return document

    def put(self, key: str, document: Dict[str, Any]):
        """Write-then-rename so the entry appears atomically"""
        path = self._path(key)
        fd, tmp_path = tempfile.mkstemp(prefix=f".{key}.", suffix='.tmp', dir=self.cache_dir)
        try:
            with os.fdopen(fd, 'w', encoding='utf-8') as handle:
                handle.write(dumps_document(document))
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
        self._count('writes')
        logger.debug(f"Cached {key[:12]} -> {path}")

    def get_or_compute(self, key: str,
                       compute: Callable[[], Dict[str, Any]]) -> Tuple[Dict[str, Any], bool]:
        """
        Return (document, hit). On a miss the document is computed and
        stored while the key lock is held, so concurrent callers compute once.
        """
        cached = self._read(key)
        if cached is None:
            with self.locked(key):
                cached = self._read(key)
                if cached is None:
                    self._count('misses')
                    document = compute()
                    # Round-trip through JSON so fresh and cached documents compare equal
                    document = json.loads(dumps_document(document))
                    self.put(key, document)
                    return document, False
        self._count('hits')
        return cached, True

    def keys(self):
        return sorted(name[:-5] for name in os.listdir(self.cache_dir) if name.endswith('.json'))

    def clear(self):
        for key in self.keys():
            os.remove(self._path(key))

    def stats(self) -> Dict[str, Any]:
        return {
            'cache_dir': self.cache_dir,
            'entries': len(self.keys()),
            'hits': self.hits,
            'misses': self.misses,
            'writes': self.writes,
        }
