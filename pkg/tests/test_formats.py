"""Format identification from filename plus leading bytes."""

import pickle

from hubscan.formats import (
    DetectedBy,
    FormatKind,
    VulnLevel,
    classify_vulnerability,
    identify_format,
)

PICKLE_FAMILY = {
    FormatKind.PICKLE_RAW,
    FormatKind.PYTORCH_ZIP,
    FormatKind.JOBLIB,
    FormatKind.DILL,
    FormatKind.CLOUDPICKLE,
}


def test_pickle_by_extension_and_magic():
    fmt = identify_format("model.pkl", pickle.dumps([1, 2], protocol=4)[:512])
    assert fmt.kind == FormatKind.PICKLE_RAW
    assert fmt.detected_by == DetectedBy.BOTH
    assert classify_vulnerability(fmt) == VulnLevel.VULNERABLE


def test_pickle_magic_only_wins_over_unknown_extension():
    fmt = identify_format("weights-final", b"\x80\x04\x95\x03")
    assert fmt.kind == FormatKind.PICKLE_RAW
    assert fmt.detected_by == DetectedBy.MAGIC


def test_pickle_extension_only():
    fmt = identify_format("data.pkl", b"")
    assert fmt.kind == FormatKind.PICKLE_RAW
    assert fmt.detected_by == DetectedBy.EXTENSION


def test_pytorch_zip():
    fmt = identify_format("model.pt", b"PK\x03\x04" + b"\x00" * 20)
    assert fmt.kind == FormatKind.PYTORCH_ZIP
    assert classify_vulnerability(fmt) == VulnLevel.VULNERABLE


def test_pickle_variant_extensions_are_pickle_family():
    for name in ("m.joblib", "m.dill", "m.cloudpickle", "m.ckpt"):
        fmt = identify_format(name, b"\x80\x02}q\x00.")
        assert fmt.kind in PICKLE_FAMILY, name
        assert classify_vulnerability(fmt) == VulnLevel.VULNERABLE, name


def test_keras_formats_partial():
    h5 = identify_format("model.h5", b"\x89HDF\r\n\x1a\n")
    assert h5.kind == FormatKind.HDF5_KERAS
    assert classify_vulnerability(h5) == VulnLevel.PARTIAL

    kz = identify_format("model.keras", b"PK\x03\x04")
    assert kz.kind == FormatKind.KERAS_ZIP
    assert classify_vulnerability(kz) == VulnLevel.PARTIAL


def test_saved_model_protobufs():
    for name in ("saved_model.pb", "keras_metadata.pb"):
        fmt = identify_format(name, b"\x0a\x05hello")
        assert fmt.kind == FormatKind.SAVED_MODEL, name
        assert classify_vulnerability(fmt) == VulnLevel.PARTIAL


def test_safe_formats():
    safe = [
        ("x.safetensors", FormatKind.SAFETENSORS),
        ("x.gguf", FormatKind.GGUF),
        ("x.onnx", FormatKind.ONNX),
        ("x.msgpack", FormatKind.MSGPACK),
        ("x.npy", FormatKind.NPY_NPZ),
        ("config.json", FormatKind.JSON),
    ]
    for name, kind in safe:
        fmt = identify_format(name, b"")
        assert fmt.kind == kind, name
        assert classify_vulnerability(fmt) == VulnLevel.SAFE, name


def test_python_script():
    fmt = identify_format("loader.py", b"import os\n")
    assert fmt.kind == FormatKind.PYTHON_SCRIPT


def test_unknown():
    fmt = identify_format("weird.xyz", b"\x00\x01\x02")
    assert fmt.kind == FormatKind.UNKNOWN
    assert classify_vulnerability(fmt) == VulnLevel.UNKNOWN


def test_head_only_is_sufficient():
    # identification never needs more than the first 512 bytes
    big = pickle.dumps(list(range(10000)), protocol=2)
    assert identify_format("m.pkl", big[:512]).kind == FormatKind.PICKLE_RAW
    assert identify_format("m.pkl", big[:8]).kind == FormatKind.PICKLE_RAW
