"""String recovery from marshal code blobs, without a marshal decoder.

Lambda layers serialize their function as marshal bytecode.  The marshal
layout shifts between Python versions, so instead of decoding the object
graph we scan for the string-typed object codes and pull out everything
that decodes as printable text: co_names, co_consts strings, variable
names.  That is what the downstream API matching needs, and it works on
blobs produced by interpreter versions we have never seen.

For full decompilation by external tools, synthesize_pyc wraps a blob in
a .pyc header (magic + zeroed flags/date/size words).
"""

from __future__ import annotations

import importlib.util
import struct
from typing import List, Optional

# marshal object type codes that carry string payloads
_LONG_CODES = frozenset(b"sutaA")  # 4-byte little-endian length
_SHORT_CODES = frozenset(b"zZ")  # 1-byte length
_REF_FLAG = 0x80
_MAX_STRING = 1 << 20


def _printable(text: str) -> bool:
    return bool(text) and all(c.isprintable() or c in "\n\r\t " for c in text)


def extract_marshal_strings(blob: bytes, min_length: int = 1) -> List[str]:
    """Scan a marshal blob for string objects; tolerant of layout drift.

    Returns decoded strings in discovery order, deduplicated.  A scan
    position that does not look like a string object advances by one
    byte, so garbage between objects only costs time, never a crash.
    """
    out: List[str] = []
    seen = set()
    i = 0
    n = len(blob)
    while i < n:
        code = blob[i] & ~_REF_FLAG
        length: Optional[int] = None
        header = 0
        if code in _LONG_CODES and i + 5 <= n:
            length = int.from_bytes(blob[i + 1 : i + 5], "little")
            header = 5
        elif code in _SHORT_CODES and i + 2 <= n:
            length = blob[i + 1]
            header = 2
        if length is not None and 0 < length <= _MAX_STRING and i + header + length <= n:
            payload = blob[i + header : i + header + length]
            try:
                text = payload.decode("utf-8")
            except UnicodeDecodeError:
                text = ""
            if len(text) >= min_length and _printable(text):
                if text not in seen:
                    seen.add(text)
                    out.append(text)
                i += header + length
                continue
        i += 1
    return out


# importlib magic words by interpreter line; .pyc magic is the 16-bit word
# followed by b"\r\n"
_MAGIC_BY_VERSION = {
    "3.6": 3379,
    "3.7": 3394,
    "3.8": 3413,
    "3.9": 3425,
    "3.10": 3439,
    "3.11": 3495,
    "3.12": 3531,
    "3.13": 3571,
}


def magic_for_version(python_version: Optional[str]) -> bytes:
    if python_version:
        key = ".".join(python_version.split(".")[:2])
        word = _MAGIC_BY_VERSION.get(key)
        if word is not None:
            return struct.pack("<H", word) + b"\r\n"
    return importlib.util.MAGIC_NUMBER


def synthesize_pyc(blob: bytes, python_version: Optional[str] = None) -> bytes:
    """Wrap a marshal blob as a loadable .pyc file.

    Header layout is the 3.7+ one: magic, bit-field flags, source mtime,
    source size, all but the magic zeroed.  For 3.6 and older the flags
    word did not exist, so the header is 12 bytes instead of 16.
    """
    magic = magic_for_version(python_version)
    word = struct.unpack("<H", magic[:2])[0]
    if word < 3390:  # pre-3.7 header has no flags field
        return magic + b"\x00" * 8 + blob
    return magic + b"\x00" * 12 + blob
