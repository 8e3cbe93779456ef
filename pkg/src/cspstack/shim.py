"""Foreign-callable receive boundary over host-supplied buffer callbacks.

The host provides three callbacks (acquire a buffer token, release one,
enqueue a finished packet) plus an opaque context. The reassembly engine
runs unchanged on top of them through a small adapter, so a delivered
packet's bytes live in host memory from the first copy: the token returned
by acquire is the same one handed back through enqueue.

The boundary never raises. Every entry point reports through ShimStatus:
0 ok, -1 invalid argument or uninitialized, -2 no buffer, -3 dropped.
State is a single module-level instance because the replaced C entry point
is a free function with no room for an instance parameter.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Optional

from .cfp import CanFrame, Delivered, Dropped, DropReason, RxEngine
from .config import Config, config_from_json
from .csp import Stats, encode_csp_header
from .errors import AlreadyInitialized, PoolExhausted


class ShimStatus(IntEnum):
    OK = 0
    INVALID_ARGUMENT = -1
    NO_BUFFER = -2
    DROPPED = -3


@dataclass
class HostEnv:
    """Host callback table.

    acquire_buffer(context) returns an opaque token or None on exhaustion;
    release_buffer(context, token) returns one; enqueue_packet(context,
    token, length, header_word) takes ownership of a delivered token.
    view_buffer(token) must yield a writable buffer of at least
    max_data_len bytes; None means the token itself is one (a bytearray).
    """

    acquire_buffer: Callable
    release_buffer: Callable
    enqueue_packet: Callable
    context: object = None
    view_buffer: Optional[Callable] = None


@dataclass(frozen=True)
class _HostHandle:
    token: object


class _HostPool:
    """Adapter giving the engine its acquire/release/storage surface."""

    def __init__(self, env: HostEnv):
        self.env = env

    def acquire(self) -> _HostHandle:
        token = self.env.acquire_buffer(self.env.context)
        if token is None:
            raise PoolExhausted("host acquire returned no buffer")
        return _HostHandle(token)

    def release(self, handle: _HostHandle) -> None:
        self.env.release_buffer(self.env.context, handle.token)

    def storage(self, handle: _HostHandle) -> memoryview:
        raw = handle.token
        if self.env.view_buffer is not None:
            raw = self.env.view_buffer(raw)
        # ctypes arrays expose format "<B"; normalize so byte slices assign.
        return memoryview(raw).cast("B")


class _ShimState:
    def __init__(self, env: HostEnv, cfg: Config):
        self.env = env
        self.cfg = cfg
        self.stats = Stats()
        self.engine = RxEngine(_HostPool(env), cfg, self.stats)
        self.clock = 0


_state: Optional[_ShimState] = None
_state_lock = threading.Lock()


def shim_init(env: HostEnv, cfg: Optional[Config] = None) -> None:
    """Construct the engine over the host environment; single-shot."""
    global _state
    with _state_lock:
        if _state is not None:
            raise AlreadyInitialized("shim already initialized")
        _state = _ShimState(env, cfg if cfg is not None else Config())


def shim_reset() -> None:
    """Tear down for tests; live reconfiguration is not a supported path."""
    global _state
    with _state_lock:
        _state = None


def shim_can2_rx(
    iface: object,
    ext_id: int,
    data: bytes,
    dlc: int,
    woken_out: Optional[list] = None,
) -> int:
    """Feed one frame across the boundary; never raises.

    The id is masked to 29 bits. A Delivered outcome fires enqueue_packet
    exactly once and transfers the token to the host; an accepted-but-
    incomplete frame is OK; drops map to NO_BUFFER or DROPPED.
    """
    if woken_out is not None and len(woken_out) > 0:
        woken_out[0] = False
    state = _state
    if state is None:
        return ShimStatus.INVALID_ARGUMENT
    if not isinstance(dlc, int) or not 0 <= dlc <= 8:
        return ShimStatus.INVALID_ARGUMENT
    if data is None:
        data = b""
    if len(data) < dlc:
        return ShimStatus.INVALID_ARGUMENT
    try:
        frame = CanFrame(int(ext_id) & 0x1FFFFFFF, dlc, bytes(data[:dlc]))
        state.clock += 1
        outcome = state.engine.can_rx(frame, state.clock)
    except Exception:
        return ShimStatus.DROPPED
    if isinstance(outcome, Delivered):
        packet = outcome.packet
        try:
            state.env.enqueue_packet(
                state.env.context,
                packet.handle.token,
                packet.length,
                encode_csp_header(packet.id),
            )
        except Exception:
            return ShimStatus.DROPPED
        return ShimStatus.OK
    if isinstance(outcome, Dropped):
        if outcome.reason is DropReason.NO_BUFFER:
            return ShimStatus.NO_BUFFER
        return ShimStatus.DROPPED
    return ShimStatus.OK


def init_from_addresses(
    acquire_addr: int,
    release_addr: int,
    enqueue_addr: int,
    context: int,
    config_json: Optional[str] = None,
) -> int:
    """C-side entry: build a HostEnv from raw function-pointer addresses.

    Tokens on this path are raw byte addresses; NULL from acquire means
    exhaustion. Returns a ShimStatus value instead of raising.
    """
    import ctypes

    try:
        if not (acquire_addr and release_addr and enqueue_addr):
            return ShimStatus.INVALID_ARGUMENT
        cfg = Config() if not config_json else config_from_json(config_json)
        acquire = ctypes.CFUNCTYPE(ctypes.c_void_p, ctypes.c_void_p)(acquire_addr)
        release = ctypes.CFUNCTYPE(None, ctypes.c_void_p, ctypes.c_void_p)(
            release_addr
        )
        enqueue = ctypes.CFUNCTYPE(
            None, ctypes.c_void_p, ctypes.c_void_p, ctypes.c_uint16, ctypes.c_uint32
        )(enqueue_addr)
        view_type = ctypes.c_ubyte * cfg.max_data_len

        env = HostEnv(
            acquire_buffer=lambda ctx: acquire(ctx),
            release_buffer=lambda ctx, token: release(ctx, token),
            enqueue_packet=lambda ctx, token, length, word: enqueue(
                ctx, token, length, word
            ),
            context=context,
            view_buffer=lambda token: view_type.from_address(token),
        )
        shim_init(env, cfg)
        return ShimStatus.OK
    except AlreadyInitialized:
        return ShimStatus.INVALID_ARGUMENT
    except Exception:
        return ShimStatus.DROPPED
