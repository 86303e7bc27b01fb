"""Minimal ZIP reader for model archives.

PyTorch and Keras savers emit plain ZIP archives using only the stored and
deflate methods, so that is all this reader accepts; anything else is an
error rather than a skip, making unusual archives visible as findings.
No ZIP64 support.
"""

from __future__ import annotations

import posixpath
import struct
import zlib
from dataclasses import dataclass
from typing import List, Optional

EOCD_SIG = b"PK\x05\x06"
CENTRAL_SIG = b"PK\x01\x02"
LOCAL_SIG = b"PK\x03\x04"

METHOD_STORED = 0
METHOD_DEFLATE = 8

DEFAULT_ENTRY_CAP = 512 * 1024 * 1024  # per-entry decompressed bytes


class ArchiveError(Exception):
    pass


class CorruptArchive(ArchiveError):
    pass


class UnsupportedCompression(ArchiveError):
    def __init__(self, method: int, path: str):
        super().__init__(f"unsupported compression method {method} for {path!r}")
        self.method = method
        self.path = path


class PathTraversal(ArchiveError):
    def __init__(self, path: str):
        super().__init__(f"archive entry escapes root: {path!r}")
        self.path = path


class EntryTooLarge(ArchiveError):
    def __init__(self, path: str, declared: int, cap: int):
        super().__init__(f"entry {path!r} declares {declared} bytes, cap is {cap}")
        self.path = path


@dataclass(frozen=True)
class ArchiveEntry:
    path: str
    data: bytes
    declared_size: int

    def __post_init__(self):
        if len(self.data) != self.declared_size:
            raise CorruptArchive(
                f"entry {self.path!r}: got {len(self.data)} bytes, declared {self.declared_size}"
            )


@dataclass(frozen=True)
class _CentralRecord:
    path: str
    method: int
    crc32: int
    comp_size: int
    uncomp_size: int
    local_offset: int


def _find_eocd(data: bytes) -> tuple:
    # EOCD is at the end, possibly followed by a comment up to 64 KiB.
    tail_start = max(0, len(data) - 22 - 65535)
    idx = data.rfind(EOCD_SIG, tail_start)
    if idx < 0:
        raise CorruptArchive("end-of-central-directory record not found")
    if idx + 22 > len(data):
        raise CorruptArchive("truncated end-of-central-directory record")
    (total_entries, cd_size, cd_offset) = struct.unpack("<H I I", data[idx + 10 : idx + 20])
    return total_entries, cd_size, cd_offset


def _read_central_directory(data: bytes) -> List[_CentralRecord]:
    total_entries, cd_size, cd_offset = _find_eocd(data)
    if cd_offset + cd_size > len(data):
        raise CorruptArchive("central directory extends past end of file")
    records = []
    pos = cd_offset
    for _ in range(total_entries):
        if data[pos : pos + 4] != CENTRAL_SIG:
            raise CorruptArchive(f"bad central-directory signature at {pos}")
        if pos + 46 > len(data):
            raise CorruptArchive("truncated central-directory header")
        (method, crc, comp_size, uncomp_size, name_len, extra_len, comment_len, local_offset) = struct.unpack(
            "<10xH4xIII HHH 8x I", data[pos + 0 : pos + 46]
        )
        name_raw = data[pos + 46 : pos + 46 + name_len]
        if len(name_raw) != name_len:
            raise CorruptArchive("truncated central-directory entry name")
        path = name_raw.decode("utf-8", errors="replace")
        records.append(_CentralRecord(path, method, crc, comp_size, uncomp_size, local_offset))
        pos += 46 + name_len + extra_len + comment_len
    return records


def _normalize(path: str) -> str:
    norm = posixpath.normpath(path.replace("\\", "/"))
    if norm.startswith("/") or norm == ".." or norm.startswith("../"):
        raise PathTraversal(path)
    return norm


def _read_entry_data(data: bytes, rec: _CentralRecord, entry_cap: int) -> bytes:
    if rec.uncomp_size > entry_cap:
        raise EntryTooLarge(rec.path, rec.uncomp_size, entry_cap)
    pos = rec.local_offset
    if data[pos : pos + 4] != LOCAL_SIG:
        raise CorruptArchive(f"bad local header signature for {rec.path!r}")
    name_len, extra_len = struct.unpack("<HH", data[pos + 26 : pos + 30])
    start = pos + 30 + name_len + extra_len
    raw = data[start : start + rec.comp_size]
    if len(raw) != rec.comp_size:
        raise CorruptArchive(f"truncated data for {rec.path!r}")
    if rec.method == METHOD_STORED:
        payload = raw
    elif rec.method == METHOD_DEFLATE:
        try:
            d = zlib.decompressobj(-15)
            payload = d.decompress(raw, entry_cap + 1)
        except zlib.error as e:
            raise CorruptArchive(f"deflate error in {rec.path!r}: {e}") from e
        if len(payload) > entry_cap:
            raise EntryTooLarge(rec.path, len(payload), entry_cap)
    else:
        raise UnsupportedCompression(rec.method, rec.path)
    if len(payload) != rec.uncomp_size:
        raise CorruptArchive(
            f"entry {rec.path!r}: decompressed {len(payload)} bytes, declared {rec.uncomp_size}"
        )
    if zlib.crc32(payload) & 0xFFFFFFFF != rec.crc32:
        raise CorruptArchive(f"CRC mismatch for {rec.path!r}")
    return payload


def list_paths(zip_bytes: bytes) -> List[str]:
    """Entry paths in central-directory order (directories included)."""
    return [rec.path for rec in _read_central_directory(zip_bytes)]


def read_member(zip_bytes: bytes, path: str, entry_cap: int = DEFAULT_ENTRY_CAP) -> Optional[bytes]:
    """Extract one member by exact path, or None if absent."""
    for rec in _read_central_directory(zip_bytes):
        if rec.path == path:
            return _read_entry_data(zip_bytes, rec, entry_cap)
    return None


def extract_members(
    zip_bytes: bytes,
    suffix: str,
    entry_cap: int = DEFAULT_ENTRY_CAP,
) -> List[ArchiveEntry]:
    """Extract every member whose path ends with ``suffix``, in central-directory order."""
    entries = []
    for rec in _read_central_directory(zip_bytes):
        if rec.path.endswith("/"):
            continue
        norm = _normalize(rec.path)
        if not norm.endswith(suffix):
            continue
        payload = _read_entry_data(zip_bytes, rec, entry_cap)
        entries.append(ArchiveEntry(norm, payload, rec.uncomp_size))
    return entries


def extract_pickle_members(zip_bytes: bytes, entry_cap: int = DEFAULT_ENTRY_CAP) -> List[ArchiveEntry]:
    """Extract all ``.pkl`` members (any depth) from a model archive."""
    return extract_members(zip_bytes, ".pkl", entry_cap)
