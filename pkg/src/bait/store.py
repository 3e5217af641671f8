"""Binary embedding-store format.

Layout (all little-endian):

    magic   4 bytes  42 41 49 54 ("BAIT")
    version u8       1
    space   u8       0 = SIM, 1 = NLI, 2 = params (checkpoints)
    unit    u8       0 = head, 1 = body (model kind for checkpoints)
    reserved u8      0
    dim     u32
    count   u32      number of records
    then per record: id u32, num_rows u16, num_rows*dim float32 values

Head stores must have num_rows = 1 in every record. All floats must be
finite; record ids must be unique.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    IntegrityError,
    StoreDimensionError,
    StoreFormatError,
    StoreMagicError,
    StoreTruncatedError,
    StoreValueError,
    StoreVersionError,
)

MAGIC = b"BAIT"
VERSION = 1
_HEADER = struct.Struct("<4sBBBBII")
_RECORD_HEAD = struct.Struct("<IH")
MAX_RECORD_ROWS = 0xFFFF


class Space(enum.IntEnum):
    SIM = 0
    NLI = 1
    PARAMS = 2


class Unit(enum.IntEnum):
    HEAD = 0
    BODY = 1


@dataclass
class EmbeddingStore:
    """Per-text-unit float matrices in one embedding space."""

    space: Space
    unit: Unit
    dim: int
    records: dict[int, np.ndarray]  # id -> (num_rows, dim) float32

    def __post_init__(self):
        for rid, matrix in self.records.items():
            if matrix.ndim != 2 or matrix.shape[1] != self.dim:
                raise StoreDimensionError(
                    f"record {rid} has shape {matrix.shape}, store dim is {self.dim}"
                )
            if self.unit == Unit.HEAD and matrix.shape[0] != 1:
                raise StoreFormatError(
                    f"head record {rid} has {matrix.shape[0]} rows, expected 1"
                )
            if not np.all(np.isfinite(matrix)):
                raise StoreValueError(f"record {rid} contains non-finite values")

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, rid: int) -> bool:
        return rid in self.records

    def matrix(self, rid: int) -> np.ndarray:
        try:
            return self.records[rid]
        except KeyError:
            raise IntegrityError(f"id {rid} missing from {self.space.name}-{self.unit.name} store") from None

    def vector(self, rid: int) -> np.ndarray:
        """The single row of a head record."""
        return self.matrix(rid)[0]


def write_store_file(path, space: int, unit: int, dim: int,
                     records: list[tuple[int, np.ndarray]]) -> None:
    """Write the raw container (shared by embedding stores and checkpoints)."""
    seen = set()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, space, unit, 0, dim, len(records)))
        for rid, matrix in records:
            if rid in seen:
                raise IntegrityError(f"duplicate record id {rid}")
            seen.add(rid)
            matrix = np.ascontiguousarray(matrix, dtype="<f4")
            if matrix.ndim != 2 or matrix.shape[1] != dim:
                raise StoreDimensionError(
                    f"record {rid} has shape {matrix.shape}, store dim is {dim}"
                )
            if matrix.shape[0] > MAX_RECORD_ROWS:
                raise StoreFormatError(
                    f"record {rid} has {matrix.shape[0]} rows; the format caps at {MAX_RECORD_ROWS}"
                )
            if not np.all(np.isfinite(matrix)):
                raise StoreValueError(f"record {rid} contains non-finite values")
            fh.write(_RECORD_HEAD.pack(rid, matrix.shape[0]))
            fh.write(matrix.tobytes())


def write_embedding_store(path, store: EmbeddingStore) -> None:
    if store.space not in (Space.SIM, Space.NLI):
        raise StoreFormatError(f"embedding stores must be SIM or NLI, got {store.space}")
    records = sorted(store.records.items())
    write_store_file(path, int(store.space), int(store.unit), store.dim, records)


def read_store_file(path) -> tuple[int, int, int, list[tuple[int, np.ndarray]]]:
    """Read the raw container; returns (space, unit, dim, records)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise StoreTruncatedError(f"{path}: file shorter than the header")
    magic, version, space, unit, reserved, dim, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise StoreMagicError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise StoreVersionError(f"{path}: unsupported version {version}")
    if reserved != 0:
        raise StoreFormatError(f"{path}: reserved byte is {reserved}")
    if dim == 0:
        raise StoreDimensionError(f"{path}: header dim is 0")
    offset = _HEADER.size
    records: list[tuple[int, np.ndarray]] = []
    seen = set()
    for _ in range(count):
        if offset + _RECORD_HEAD.size > len(blob):
            raise StoreTruncatedError(f"{path}: record header past end of file")
        rid, num_rows = _RECORD_HEAD.unpack_from(blob, offset)
        offset += _RECORD_HEAD.size
        nbytes = num_rows * dim * 4
        if offset + nbytes > len(blob):
            raise StoreTruncatedError(
                f"{path}: record {rid} declares {num_rows} rows but the payload ends early"
            )
        matrix = np.frombuffer(blob, dtype="<f4", count=num_rows * dim,
                               offset=offset).reshape(num_rows, dim).copy()
        offset += nbytes
        if rid in seen:
            raise IntegrityError(f"{path}: duplicate record id {rid}")
        seen.add(rid)
        if not np.all(np.isfinite(matrix)):
            raise StoreValueError(f"{path}: record {rid} contains non-finite values")
        records.append((rid, matrix))
    if offset != len(blob):
        raise StoreDimensionError(
            f"{path}: {len(blob) - offset} trailing bytes after the declared records "
            f"(record widths disagree with header dim {dim}?)"
        )
    return space, unit, dim, records


def load_embedding_store(path) -> EmbeddingStore:
    space, unit, dim, records = read_store_file(path)
    if space not in (int(Space.SIM), int(Space.NLI)):
        raise StoreFormatError(f"{path}: space byte {space} is not an embedding space")
    if unit not in (int(Unit.HEAD), int(Unit.BODY)):
        raise StoreFormatError(f"{path}: unknown unit byte {unit}")
    store = EmbeddingStore(Space(space), Unit(unit), dim, dict(records))
    return store


def write_sidecar(path, headlines: list[str]) -> None:
    """Headline id sidecar: line i (0-based) holds the text of headline id i."""
    with open(path, "w", encoding="utf-8") as fh:
        for text in headlines:
            if "\n" in text or "\r" in text:
                raise IntegrityError(f"headline contains a newline: {text!r}")
            fh.write(text + "\n")


def read_sidecar(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]
