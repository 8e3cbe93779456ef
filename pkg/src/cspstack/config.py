"""Global stack configuration, loadable from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .errors import InvalidConfig

# Largest payload addressable by the 8-bit remain counter: 2 + 255*8.
MAX_ADDRESSABLE_DATA_LEN = 2042


@dataclass(frozen=True)
class Config:
    pool_capacity: int = 10
    max_data_len: int = 256
    rx_slot_count: int = 2
    reassembly_timeout_ms: int = 1000
    queue_depth: int = 16
    local_address: int = 1

    def __post_init__(self) -> None:
        if self.pool_capacity < 1:
            raise InvalidConfig("pool_capacity must be >= 1")
        if not 1 <= self.max_data_len <= MAX_ADDRESSABLE_DATA_LEN:
            raise InvalidConfig(
                f"max_data_len must be in 1..={MAX_ADDRESSABLE_DATA_LEN}"
            )
        if self.rx_slot_count < 1:
            raise InvalidConfig("rx_slot_count must be >= 1")
        if self.reassembly_timeout_ms < 0:
            raise InvalidConfig("reassembly_timeout_ms must be >= 0")
        if self.queue_depth < 1:
            raise InvalidConfig("queue_depth must be >= 1")
        if not 0 <= self.local_address <= 31:
            raise InvalidConfig("local_address must be in 0..=31")


_KEYS = {f.name for f in fields(Config)}


def config_from_json(text: str) -> Config:
    """Build a Config from a JSON object; missing keys default, unknown keys error."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidConfig("config JSON must be an object")
    unknown = set(raw) - _KEYS
    if unknown:
        raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
    return Config(**raw)


def load_config(path: str) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_json(fh.read())
