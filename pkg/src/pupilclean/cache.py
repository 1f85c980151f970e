"""In-memory LRU cache of decoded recordings with a byte budget.

Decoding a multi-hundred-MB file is a one-time waiting cost; afterwards the
series is served from memory. Concurrent first requests for the same file
coalesce onto a single decode.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import Callable

from .model import Recording


def _recording_nbytes(r: Recording) -> int:
    total = r.timestamps_ms.nbytes
    for name in ("pupil_left", "pupil_right"):
        s = getattr(r, name)
        if s is not None:
            total += s.values.nbytes + s.present.nbytes
    for name in ("gaze_left", "gaze_right"):
        g = getattr(r, name)
        if g is not None:
            total += (g.x.values.nbytes + g.x.present.nbytes
                      + g.y.values.nbytes + g.y.present.nbytes)
    return total


class SeriesCache:
    def __init__(self, budget_bytes: int = 1 << 30):
        if budget_bytes <= 0:
            raise ValueError("cache budget must be positive")
        self.budget_bytes = budget_bytes
        self._lock = threading.Lock()
        self._entries: "OrderedDict[int, tuple[Recording, int]]" = OrderedDict()
        self._loading: dict[int, threading.Event] = {}
        self.hits = 0
        self.misses = 0

    @property
    def held_bytes(self) -> int:
        with self._lock:
            return sum(n for _, n in self._entries.values())

    def get_or_load(self, file_id: int, load: Callable[[], Recording]) -> Recording:
        while True:
            with self._lock:
                entry = self._entries.get(file_id)
                if entry is not None:
                    self._entries.move_to_end(file_id)
                    self.hits += 1
                    return entry[0]
                pending = self._loading.get(file_id)
                if pending is None:
                    event = threading.Event()
                    self._loading[file_id] = event
                    self.misses += 1
                    break
            pending.wait()

        try:
            recording = load()
        except BaseException:
            with self._lock:
                self._loading.pop(file_id, None).set()
            raise
        nbytes = _recording_nbytes(recording)
        with self._lock:
            if nbytes <= self.budget_bytes:
                self._entries[file_id] = (recording, nbytes)
                self._entries.move_to_end(file_id)
                self._evict_locked()
            self._loading.pop(file_id, None).set()
        return recording

    def _evict_locked(self) -> None:
        total = sum(n for _, n in self._entries.values())
        while total > self.budget_bytes and len(self._entries) > 1:
            _, (_, n) = self._entries.popitem(last=False)
            total -= n
        if total > self.budget_bytes:
            self._entries.clear()

    def invalidate(self, file_id: int) -> None:
        with self._lock:
            self._entries.pop(file_id, None)
