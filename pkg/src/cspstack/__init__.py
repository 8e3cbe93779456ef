"""Fixed-allocation packet stack: header codec, CAN fragmentation, KISS
framing, buffer pool, router, and a foreign-callable receive boundary.
"""

from .cfp import (
    BEGIN_OVERHEAD,
    KIND_BEGIN,
    KIND_MORE,
    CanFrame,
    CfpId,
    Consumed,
    Delivered,
    Dropped,
    DropReason,
    RxEngine,
    cfp_pack,
    cfp_unpack,
    format_frame,
    fragment,
    parse_frame_line,
    parse_frames_text,
)
from .config import MAX_ADDRESSABLE_DATA_LEN, Config, config_from_json, load_config
from .csp import (
    CspId,
    CspPacket,
    Stats,
    decode_csp_header,
    encode_csp_header,
    validate_packet,
)
from .errors import (
    AlreadyInitialized,
    CorruptCorpus,
    CspError,
    InvalidConfig,
    InvalidId,
    LengthExceedsBuffer,
    LengthMismatch,
    PoolExhausted,
    PortInUse,
    QueueFull,
    StaleHandle,
)
from .fuzz import (
    CorpusReport,
    FuzzReport,
    decode_frame_stream,
    encode_frame_stream,
    read_corpus,
    reference_reassemble,
    regression_cases,
    replay_corpus,
    run_fuzz_case,
    write_corpus,
)
from .kiss import (
    FEND,
    FESC,
    TFEND,
    TFESC,
    KissDecoder,
    KissDrop,
    KissDropReason,
    kiss_encode,
    parse_hex_stream,
)
from .pool import BufferHandle, BufferPool, PacketBuf
from .router import (
    DeliveredToPort,
    DroppedNotLocal,
    DroppedUnbound,
    Empty,
    GlobalQueue,
    Socket,
    SocketTable,
    csp_send,
    route_once,
)
from .shim import HostEnv, ShimStatus, init_from_addresses, shim_can2_rx, shim_init, shim_reset

__version__ = "0.1.0"

__all__ = [
    "BEGIN_OVERHEAD",
    "KIND_BEGIN",
    "KIND_MORE",
    "MAX_ADDRESSABLE_DATA_LEN",
    "FEND",
    "FESC",
    "TFEND",
    "TFESC",
    "AlreadyInitialized",
    "BufferHandle",
    "BufferPool",
    "CanFrame",
    "CfpId",
    "Config",
    "Consumed",
    "CorpusReport",
    "CorruptCorpus",
    "CspError",
    "CspId",
    "CspPacket",
    "Delivered",
    "DeliveredToPort",
    "DropReason",
    "Dropped",
    "DroppedNotLocal",
    "DroppedUnbound",
    "Empty",
    "FuzzReport",
    "GlobalQueue",
    "HostEnv",
    "InvalidConfig",
    "InvalidId",
    "KissDecoder",
    "KissDrop",
    "KissDropReason",
    "LengthExceedsBuffer",
    "LengthMismatch",
    "PacketBuf",
    "PoolExhausted",
    "PortInUse",
    "QueueFull",
    "RxEngine",
    "ShimStatus",
    "Socket",
    "SocketTable",
    "StaleHandle",
    "Stats",
    "cfp_pack",
    "cfp_unpack",
    "config_from_json",
    "csp_send",
    "decode_csp_header",
    "decode_frame_stream",
    "encode_csp_header",
    "encode_frame_stream",
    "format_frame",
    "fragment",
    "init_from_addresses",
    "kiss_encode",
    "load_config",
    "parse_frame_line",
    "parse_frames_text",
    "parse_hex_stream",
    "read_corpus",
    "reference_reassemble",
    "regression_cases",
    "replay_corpus",
    "route_once",
    "run_fuzz_case",
    "shim_can2_rx",
    "shim_init",
    "shim_reset",
    "validate_packet",
    "write_corpus",
]
