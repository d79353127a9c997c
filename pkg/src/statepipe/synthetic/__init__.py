"""Synthetic oracle worlds for offline runs and acceptance checks."""

from statepipe.synthetic.generator import (
    CONFIG_NAME,
    STUB_FIXTURE,
    CacheScript,
    SyntheticAction,
    SyntheticSpec,
    SyntheticVideo,
    SyntheticWorld,
    build_world,
    generate_synthetic,
    stub_fixture,
    write_world,
)

__all__ = [
    "CONFIG_NAME",
    "STUB_FIXTURE",
    "CacheScript",
    "SyntheticAction",
    "SyntheticSpec",
    "SyntheticVideo",
    "SyntheticWorld",
    "build_world",
    "generate_synthetic",
    "stub_fixture",
    "write_world",
]
