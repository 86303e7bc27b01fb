"""Artifact format identification and code-injection vulnerability classes.

Formats are identified by magic bytes first and file extension second:
renamed files must not evade scanning, so magic always wins on conflict.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

ZIP_MAGIC = b"PK\x03\x04"
HDF5_MAGIC = b"\x89HDF\r\n\x1a\n"


class FormatKind(enum.Enum):
    PICKLE_RAW = "PickleRaw"
    PYTORCH_ZIP = "PyTorchZip"
    JOBLIB = "Joblib"
    DILL = "Dill"
    CLOUDPICKLE = "CloudPickle"
    MARSHAL = "Marshal"
    HDF5_KERAS = "Hdf5Keras"
    KERAS_ZIP = "KerasZip"
    SAVED_MODEL = "SavedModel"
    CHECKPOINT = "Checkpoint"
    TFLITE = "TfLite"
    GGUF = "Gguf"
    ONNX = "Onnx"
    JSON = "Json"
    MSGPACK = "MsgPack"
    SAFETENSORS = "Safetensors"
    NPY_NPZ = "NpyNpz"
    PYTHON_SCRIPT = "PythonScript"
    UNKNOWN = "Unknown"


class DetectedBy(enum.Enum):
    EXTENSION = "Extension"
    MAGIC = "Magic"
    BOTH = "Both"


class VulnLevel(enum.Enum):
    VULNERABLE = "Vulnerable"
    PARTIAL = "Partial"
    SAFE = "Safe"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ArtifactFormat:
    kind: FormatKind
    detected_by: Optional[DetectedBy] = None

    def __post_init__(self):
        if self.kind is FormatKind.UNKNOWN and self.detected_by is not None:
            raise ValueError("Unknown format cannot carry a detection method")


_EXTENSION_MAP = {
    ".pkl": FormatKind.PICKLE_RAW,
    ".pickle": FormatKind.PICKLE_RAW,
    ".joblib": FormatKind.JOBLIB,
    ".dill": FormatKind.DILL,
    # Hugging Face convention: .bin/.pt/.pth without ZIP magic is a raw pickle
    ".bin": FormatKind.PICKLE_RAW,
    ".pt": FormatKind.PICKLE_RAW,
    ".pth": FormatKind.PICKLE_RAW,
    ".pb": FormatKind.SAVED_MODEL,
    ".tflite": FormatKind.TFLITE,
    ".ckpt": FormatKind.CHECKPOINT,
    ".gguf": FormatKind.GGUF,
    ".onnx": FormatKind.ONNX,
    ".safetensors": FormatKind.SAFETENSORS,
    ".npy": FormatKind.NPY_NPZ,
    ".npz": FormatKind.NPY_NPZ,
    ".py": FormatKind.PYTHON_SCRIPT,
    ".json": FormatKind.JSON,
    ".msgpack": FormatKind.MSGPACK,
}

# Extensions considered consistent with a magic-identified kind; used only
# to decide Extension/Magic/Both attribution, never the kind itself.
_CONSISTENT_EXTENSIONS = {
    FormatKind.PYTORCH_ZIP: {".pt", ".pth", ".bin", ".zip"},
    FormatKind.KERAS_ZIP: {".keras"},
    FormatKind.HDF5_KERAS: {".h5", ".hdf5", ".keras"},
    FormatKind.PICKLE_RAW: {".pkl", ".pickle", ".pt", ".pth", ".bin"},
}

_VULN_MAP = {
    FormatKind.PICKLE_RAW: VulnLevel.VULNERABLE,
    FormatKind.PYTORCH_ZIP: VulnLevel.VULNERABLE,
    FormatKind.JOBLIB: VulnLevel.VULNERABLE,
    FormatKind.DILL: VulnLevel.VULNERABLE,
    FormatKind.CLOUDPICKLE: VulnLevel.VULNERABLE,
    FormatKind.MARSHAL: VulnLevel.VULNERABLE,
    FormatKind.HDF5_KERAS: VulnLevel.PARTIAL,
    FormatKind.KERAS_ZIP: VulnLevel.PARTIAL,
    FormatKind.SAVED_MODEL: VulnLevel.PARTIAL,
    FormatKind.CHECKPOINT: VulnLevel.PARTIAL,
    FormatKind.TFLITE: VulnLevel.PARTIAL,
    FormatKind.GGUF: VulnLevel.SAFE,
    FormatKind.ONNX: VulnLevel.SAFE,
    FormatKind.JSON: VulnLevel.SAFE,
    FormatKind.MSGPACK: VulnLevel.SAFE,
    FormatKind.SAFETENSORS: VulnLevel.SAFE,
    FormatKind.NPY_NPZ: VulnLevel.SAFE,
    FormatKind.PYTHON_SCRIPT: VulnLevel.UNKNOWN,
    FormatKind.UNKNOWN: VulnLevel.UNKNOWN,
}


def _extension_of(filename: str) -> str:
    name = filename.rsplit("/", 1)[-1].rsplit("\\", 1)[-1]
    dot = name.rfind(".")
    return name[dot:].lower() if dot >= 0 else ""


def _looks_like_pickle(head: bytes) -> bool:
    """Plausibility check for a pickle stream head.

    Protocol 2+ starts with PROTO (0x80, version 2..5).  Protocol 0/1
    streams start with a printable opcode; because single printable bytes
    collide with ordinary text, we require the head to decode as a short
    run of well-formed instructions before claiming pickle.
    """
    if not head:
        return False
    if head[0] == 0x80:
        return len(head) >= 2 and 2 <= head[1] <= 5
    from hubscan.pickle_scan.disasm import probe_prefix
    from hubscan.pickle_scan.opcodes import PROTO0_CODES

    if head[0] not in PROTO0_CODES:
        return False
    return probe_prefix(head, min_ops=2)


def identify_format(filename: str, head: bytes) -> ArtifactFormat:
    """Identify the artifact format from filename and leading bytes.

    ``head`` is the first bytes of the file (16 bytes suffice; shorter
    files pass what they have).  Magic checks take precedence over the
    extension; unidentifiable input maps to Unknown.
    """
    ext = _extension_of(filename)
    ext_kind = _EXTENSION_MAP.get(ext)

    magic_kind = None
    if head.startswith(ZIP_MAGIC):
        magic_kind = FormatKind.KERAS_ZIP if ext == ".keras" else FormatKind.PYTORCH_ZIP
    elif head.startswith(HDF5_MAGIC):
        magic_kind = FormatKind.HDF5_KERAS
    elif _looks_like_pickle(head):
        magic_kind = FormatKind.PICKLE_RAW

    if magic_kind is not None:
        consistent = _CONSISTENT_EXTENSIONS.get(magic_kind, set())
        by = DetectedBy.BOTH if ext in consistent else DetectedBy.MAGIC
        return ArtifactFormat(magic_kind, by)
    if ext_kind is not None:
        return ArtifactFormat(ext_kind, DetectedBy.EXTENSION)
    return ArtifactFormat(FormatKind.UNKNOWN)


def classify_vulnerability(fmt: ArtifactFormat) -> VulnLevel:
    """Map a format to its code-injection vulnerability class (total)."""
    return _VULN_MAP[fmt.kind]
