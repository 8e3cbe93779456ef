"""Fixed-capacity buffer pool with generation-tagged handles.

Acquisition failure is an explicit outcome (PoolExhausted), never a silent
null. Handles are (slot, generation) integer pairs so they can cross a
foreign-function boundary unchanged; a stale generation makes release and
storage access fail instead of corrupting a reused slot.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any

from .csp import CspId
from .errors import InvalidConfig, PoolExhausted, StaleHandle

_GEN_MASK = 0xFFFFFFFF  # 32-bit wrapping generation; desk-scale collision risk accepted


@dataclass(frozen=True)
class BufferHandle:
    slot: int
    generation: int


class BufferPool:
    """Preallocated packet buffers; thread-safe acquire/release."""

    def __init__(self, capacity: int, max_data_len: int):
        if capacity < 1:
            raise InvalidConfig("pool capacity must be >= 1")
        self.capacity = capacity
        self.max_data_len = max_data_len
        self._lock = threading.Lock()
        self._free = [True] * capacity
        self._generation = [0] * capacity
        self._storage = [bytearray(max_data_len) for _ in range(capacity)]

    def acquire(self) -> BufferHandle:
        """Take one free slot, or raise PoolExhausted with no state change."""
        with self._lock:
            for i, free in enumerate(self._free):
                if free:
                    self._free[i] = False
                    return BufferHandle(i, self._generation[i])
        raise PoolExhausted(f"all {self.capacity} buffers in use")

    def release(self, handle: BufferHandle) -> None:
        """Return a buffer; raise StaleHandle on double release or mismatch."""
        with self._lock:
            if not self._valid_locked(handle):
                raise StaleHandle(f"handle {handle} is not live")
            self._free[handle.slot] = True
            self._generation[handle.slot] = (
                self._generation[handle.slot] + 1
            ) & _GEN_MASK

    def storage(self, handle: BufferHandle) -> memoryview:
        """Writable view of the handle's buffer; bounds-checked by construction."""
        with self._lock:
            if not self._valid_locked(handle):
                raise StaleHandle(f"handle {handle} is not live")
            return memoryview(self._storage[handle.slot])

    def in_use(self) -> int:
        with self._lock:
            return sum(1 for free in self._free if not free)

    def _valid_locked(self, handle: BufferHandle) -> bool:
        return (
            isinstance(handle, BufferHandle)
            and 0 <= handle.slot < self.capacity
            and not self._free[handle.slot]
            and self._generation[handle.slot] == handle.generation
        )


@dataclass
class PacketBuf:
    """A delivered packet still living in its pool buffer (zero-copy unit).

    Whoever holds a PacketBuf owns the underlying buffer and must release()
    it exactly once when done.
    """

    source: Any  # object with storage(handle)/release(handle)
    handle: Any
    id: CspId
    length: int

    def data(self) -> bytes:
        return bytes(self.source.storage(self.handle)[: self.length])

    def release(self) -> None:
        self.source.release(self.handle)
