"""
On-disk artifact formats.

Feature file (little-endian):
    "FSQ1" | u32 version=1 | u32 T | u32 D | f32 fps | T*D f32 row-major

Label file: UTF-8 JSON with per-state run-length encoded assigned cells;
frames outside every run are Unassigned.

Checkpoint (little-endian):
    "SPW1" | u32 version=1 | u32 sections |
    per section: u32 name_len | name | u32 ndim | ndim*u32 dims | f32 payload
"""

import json
import logging
import struct
import sys
from pathlib import Path
from typing import Any

import numpy as np

from statepipe.core.exceptions import FormatError, ValidationError
from statepipe.models import (
    FeatureSequence,
    GroundTruthTimeline,
    PseudoLabelTimeline,
    StateDef,
    StateVocabulary,
    TernaryLabel,
)

logger = logging.getLogger(__name__)

FEATURE_MAGIC = b"FSQ1"
FEATURE_VERSION = 1
FEATURE_HEADER = struct.Struct("<4sIIIf")

CHECKPOINT_MAGIC = b"SPW1"
CHECKPOINT_VERSION = 1
_U32 = struct.Struct("<I")

_F32 = np.dtype("<f4")


# --------------------------------------------------------------------------- #
# Feature files
# --------------------------------------------------------------------------- #


def encode_feature_matrix(data: np.ndarray, fps: float = 1.0) -> bytes:
    """Serialize a T×D matrix into feature-file bytes."""
    if data.ndim != 2:  # noqa: PLR2004
        msg = f"feature matrix must be 2-D, got shape {data.shape}"
        raise ValidationError(msg, field="data")
    if not np.isfinite(data).all():
        msg = "feature matrix contains non-finite values"
        raise ValidationError(msg, field="data")
    rows, cols = data.shape
    header = FEATURE_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, rows, cols, fps)
    return header + np.ascontiguousarray(data, dtype=_F32).tobytes()


def decode_feature_matrix(raw: bytes, path: str | None = None) -> tuple[np.ndarray, float]:
    """Parse feature-file bytes into (T×D float32 matrix, fps)."""
    if len(raw) < FEATURE_HEADER.size:
        msg = (
            f"Truncated header: expected {FEATURE_HEADER.size} bytes, "
            f"got {len(raw)}"
        )
        raise FormatError(msg, path=path, offset=len(raw))
    magic, version, rows, cols, fps = FEATURE_HEADER.unpack_from(raw, 0)
    if magic != FEATURE_MAGIC:
        msg = f"Bad magic {magic!r}, expected {FEATURE_MAGIC!r}"
        raise FormatError(msg, path=path, offset=0)
    if version != FEATURE_VERSION:
        msg = f"Unsupported feature file version {version}"
        raise FormatError(msg, path=path, offset=4)
    expected = rows * cols * _F32.itemsize
    if expected > sys.maxsize:
        msg = f"Dimension overflow: {rows}x{cols} does not fit in memory"
        raise FormatError(msg, path=path, offset=8)
    payload = len(raw) - FEATURE_HEADER.size
    if payload < expected:
        msg = (
            f"Truncated payload: expected {expected} bytes for {rows}x{cols}, "
            f"got {payload}"
        )
        raise FormatError(msg, path=path, offset=len(raw))
    if payload > expected:
        msg = (
            f"Trailing data: expected {expected} payload bytes for "
            f"{rows}x{cols}, got {payload}"
        )
        raise FormatError(msg, path=path, offset=FEATURE_HEADER.size + expected)
    data = np.frombuffer(raw, dtype=_F32, count=rows * cols, offset=FEATURE_HEADER.size)
    return data.reshape(rows, cols).astype(np.float32), float(fps)


def read_feature_file(path: Path, video_id: str | None = None) -> FeatureSequence:
    """
    Read a feature file.

    Args:
        path: Feature file path
        video_id: Video identifier, defaults to the file stem

    Returns:
        The stored sequence

    Raises:
        FormatError: Bad magic, truncated payload or dimension overflow

    """
    data, fps = decode_feature_matrix(path.read_bytes(), path=str(path))
    return FeatureSequence(video_id=video_id or path.stem, data=data, fps=fps)


def write_feature_file(sequence: FeatureSequence, path: Path) -> None:
    """Write a feature sequence; non-finite values are rejected."""
    raw = encode_feature_matrix(np.asarray(sequence.data), sequence.fps)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(raw)


def read_matrix_file(path: Path) -> np.ndarray:
    """Read a bare T×K matrix stored in feature-file format (predictions, embeddings)."""
    data, _ = decode_feature_matrix(path.read_bytes(), path=str(path))
    return data


def write_matrix_file(data: np.ndarray, path: Path) -> None:
    """Write a bare matrix in feature-file format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_feature_matrix(np.asarray(data)))


# --------------------------------------------------------------------------- #
# Label files
# --------------------------------------------------------------------------- #


def _runs_for_column(labels: np.ndarray, provenance: np.ndarray) -> list[dict[str, Any]]:
    runs: list[dict[str, Any]] = []
    start = 0
    num_frames = len(labels)
    while start < num_frames:
        key = (int(labels[start]), provenance[start])
        end = start + 1
        while end < num_frames and (int(labels[end]), provenance[end]) == key:
            end += 1
        if key[0] != int(TernaryLabel.UNASSIGNED):
            runs.append(
                {
                    "start_frame": start,
                    "end_frame_exclusive": end,
                    "label": TernaryLabel(key[0]).tag,
                    "provenance": key[1],
                },
            )
        start = end
    return runs


def label_file_payload(
    timeline: PseudoLabelTimeline,
    vocab: StateVocabulary,
) -> dict[str, Any]:
    """Run-length encode a timeline into the label-file JSON structure."""
    if timeline.num_states != vocab.num_states:
        msg = (
            f"timeline has {timeline.num_states} states, vocabulary "
            f"{vocab.object_primary_name!r} has {vocab.num_states}"
        )
        raise ValidationError(msg, field="states")
    return {
        "video_id": timeline.video_id,
        "fps": 1.0,
        "object": vocab.object_primary_name,
        "states": vocab.state_names,
        "num_frames": timeline.num_frames,
        "runs": [
            _runs_for_column(timeline.labels[:, k], timeline.provenance[:, k])
            for k in range(timeline.num_states)
        ],
    }


def write_label_file(
    timeline: PseudoLabelTimeline,
    vocab: StateVocabulary,
    path: Path,
) -> None:
    """Write a timeline as a deterministic label file."""
    payload = label_file_payload(timeline, vocab)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_label_file(
    path: Path,
    vocab: StateVocabulary | None = None,
    *,
    ground_truth: bool = False,
) -> PseudoLabelTimeline:
    """
    Read a label file.

    Args:
        path: Label file path
        vocab: When given, the file's object and state order must match it
        ground_truth: Build a GroundTruthTimeline (rejects Unassigned frames)

    Returns:
        The decoded timeline

    Raises:
        FormatError: Malformed JSON, missing fields or out-of-range runs

    """
    source = str(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        video_id = str(payload["video_id"])
        states = [str(name) for name in payload["states"]]
        num_frames = int(payload["num_frames"])
        runs = payload["runs"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        msg = f"Malformed label file: {e}"
        raise FormatError(msg, path=source) from e

    if vocab is not None and (
        payload.get("object") != vocab.object_primary_name or states != vocab.state_names
    ):
        msg = (
            f"Label file is for {payload.get('object')!r} {states}, expected "
            f"{vocab.object_primary_name!r} {vocab.state_names}"
        )
        raise FormatError(msg, path=source)
    if len(runs) != len(states):
        msg = f"{len(runs)} run lists for {len(states)} states"
        raise FormatError(msg, path=source)

    labels = np.full((num_frames, len(states)), int(TernaryLabel.UNASSIGNED), dtype=np.int8)
    provenance = np.full((num_frames, len(states)), None, dtype=object)
    for k, state_runs in enumerate(runs):
        for run in state_runs:
            try:
                start = int(run["start_frame"])
                end = int(run["end_frame_exclusive"])
                label = TernaryLabel.from_tag(run["label"])
            except (KeyError, TypeError, ValueError) as e:
                msg = f"Malformed run for state {states[k]!r}: {e}"
                raise FormatError(msg, path=source) from e
            if not 0 <= start < end <= num_frames:
                msg = f"Run [{start}, {end}) outside [0, {num_frames}) for state {states[k]!r}"
                raise FormatError(msg, path=source)
            labels[start:end, k] = int(label)
            provenance[start:end, k] = run.get("provenance")

    model = GroundTruthTimeline if ground_truth else PseudoLabelTimeline
    try:
        return model(video_id=video_id, labels=labels, provenance=provenance)
    except ValueError as e:
        msg = f"Invalid timeline: {e}"
        raise FormatError(msg, path=source) from e


def label_vocabulary(directory: Path) -> StateVocabulary:
    """
    Vocabulary named by the first label file of a directory.

    Only the object name and state order are recorded in label files, so the
    state sentences are the generic "The <object> is <state>".

    Raises:
        FormatError: No label file, or the first one lacks object and states

    """
    video_ids = list_video_ids(directory, LABEL_SUFFIX)
    if not video_ids:
        msg = f"No label files in {directory}"
        raise FormatError(msg, path=str(directory))
    path = label_path(directory, video_ids[0])
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        object_name = str(payload["object"])
        states = [str(name) for name in payload["states"]]
        sentences = [f"The {object_name} is {name}" for name in states]
        return StateVocabulary(
            object_primary_name=object_name,
            states=tuple(StateDef(name=n, description=s, state_text=s) for n, s in zip(states, sentences, strict=True)),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        msg = f"Cannot read the vocabulary of a label file: {e}"
        raise FormatError(msg, path=str(path)) from e


# --------------------------------------------------------------------------- #
# Checkpoints
# --------------------------------------------------------------------------- #


def encode_checkpoint(sections: dict[str, np.ndarray]) -> bytes:
    """Serialize named arrays, in insertion order, as f32 sections."""
    chunks = [CHECKPOINT_MAGIC, _U32.pack(CHECKPOINT_VERSION), _U32.pack(len(sections))]
    for name, array in sections.items():
        encoded = name.encode("utf-8")
        chunks.append(_U32.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_U32.pack(array.ndim))
        chunks.extend(_U32.pack(dim) for dim in array.shape)
        chunks.append(np.ascontiguousarray(array, dtype=_F32).tobytes())
    return b"".join(chunks)


class _Cursor:
    """Bounds-checked reader over checkpoint bytes."""

    def __init__(self, raw: bytes, path: str | None) -> None:
        self.raw = raw
        self.path = path
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.raw):
            msg = (
                f"Truncated {what}: expected {size} bytes, "
                f"got {len(self.raw) - self.offset}"
            )
            raise FormatError(msg, path=self.path, offset=self.offset)
        chunk = self.raw[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def u32(self, what: str) -> int:
        return int(_U32.unpack(self.take(_U32.size, what))[0])


def decode_checkpoint(raw: bytes, path: str | None = None) -> dict[str, np.ndarray]:
    """Parse checkpoint bytes into named float32 arrays."""
    cursor = _Cursor(raw, path)
    magic = cursor.take(4, "magic")
    if magic != CHECKPOINT_MAGIC:
        msg = f"Bad magic {magic!r}, expected {CHECKPOINT_MAGIC!r}"
        raise FormatError(msg, path=path, offset=0)
    version = cursor.u32("version")
    if version != CHECKPOINT_VERSION:
        msg = f"Unsupported checkpoint version {version}"
        raise FormatError(msg, path=path, offset=4)

    sections: dict[str, np.ndarray] = {}
    for _ in range(cursor.u32("section count")):
        name_offset = cursor.offset
        try:
            name = cursor.take(cursor.u32("name length"), "name").decode("utf-8")
        except UnicodeDecodeError as e:
            msg = "Section name is not UTF-8"
            raise FormatError(msg, path=path, offset=name_offset) from e
        shape = tuple(cursor.u32("dimension") for _ in range(cursor.u32("rank")))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if count * _F32.itemsize > sys.maxsize:
            msg = f"Dimension overflow in section {name!r}: {shape}"
            raise FormatError(msg, path=path, offset=cursor.offset)
        payload = cursor.take(count * _F32.itemsize, f"payload of {name!r}")
        sections[name] = np.frombuffer(payload, dtype=_F32).reshape(shape).astype(np.float32)
    if cursor.offset != len(raw):
        msg = f"Trailing data: {len(raw) - cursor.offset} bytes after last section"
        raise FormatError(msg, path=path, offset=cursor.offset)
    return sections


def write_checkpoint(sections: dict[str, np.ndarray], path: Path) -> None:
    """Write named parameters to a checkpoint file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(sections))
    logger.debug("Wrote %d sections to %s", len(sections), path)


def read_checkpoint(path: Path) -> dict[str, np.ndarray]:
    """Read named parameters from a checkpoint file."""
    return decode_checkpoint(path.read_bytes(), path=str(path))


# --------------------------------------------------------------------------- #
# Directory layout
# --------------------------------------------------------------------------- #

FEATURE_SUFFIX = ".fsq"
LABEL_SUFFIX = ".labels.json"


def feature_path(directory: Path, video_id: str) -> Path:
    """``<directory>/<video_id>.fsq``."""
    return directory / f"{video_id}{FEATURE_SUFFIX}"


def label_path(directory: Path, video_id: str) -> Path:
    """``<directory>/<video_id>.labels.json``."""
    return directory / f"{video_id}{LABEL_SUFFIX}"


def list_video_ids(directory: Path, suffix: str) -> list[str]:
    """Sorted video ids of the ``*<suffix>`` files in a directory."""
    if not directory.is_dir():
        return []
    return sorted(p.name[: -len(suffix)] for p in directory.iterdir() if p.name.endswith(suffix))
