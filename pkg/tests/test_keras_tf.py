"""Keras/TF artifact scanning: Lambda detection, payload decoding, operators.

The six model-config fixtures under fixtures/keras/ were generated with
real marshal payloads and committed together with their expected payload
counts (expected.json); container parsing is exercised by building H5 and
zip wrappers around the same configs at test time.
"""

import base64
import importlib.util
import io
import json
import marshal
import zipfile

import h5py
import pytest

from hubscan.keras_tf import (
    MalformedJson,
    MissingConfigJson,
    MissingModelConfig,
    NotHdf5,
    check_unsafe_operators,
    detect_lambda,
    extract_lambda_bytecode,
    extract_marshal_strings,
    layers_from_config_json,
    parse_h5_model_config,
    parse_keras_zip,
    scan_saved_model_full,
    synthesize_pyc,
)

KERAS_CASES = [
    "no_lambda",
    "one_lambda",
    "two_lambda",
    "read_file",
    "write_file",
    "both",
]


@pytest.fixture(scope="module")
def keras_expected(fixtures_dir):
    return json.loads((fixtures_dir / "keras" / "expected.json").read_text())


def load_case(fixtures_dir, name: str) -> str:
    return (fixtures_dir / "keras" / f"{name}.json").read_text()


def test_lambda_and_operator_detection_all_cases(fixtures_dir, keras_expected):
    for name in KERAS_CASES:
        layers = layers_from_config_json(load_case(fixtures_dir, name))
        finding = detect_lambda(layers)
        ops = check_unsafe_operators(layers, raw_strings=[load_case(fixtures_dir, name)])
        exp = keras_expected[name]
        assert finding.has_lambda == exp["has_lambda"], name
        assert len(finding.payloads) == exp["payloads"], name
        assert sorted(ops.ops) == sorted(exp["ops"]), name


def test_payload_forms_and_strings(fixtures_dir):
    layers = layers_from_config_json(load_case(fixtures_dir, "two_lambda"))
    finding = detect_lambda(layers)
    forms = {p.form for p in finding.payloads}
    assert forms == {"function.config.code", "function[0]"}
    for payload in finding.payloads:
        assert payload.error is None
        assert payload.bytecode
        assert any("marker" in s for s in payload.embedded_strings)


def test_h5_container_roundtrip(fixtures_dir, keras_expected):
    for name in KERAS_CASES:
        buf = io.BytesIO()
        with h5py.File(buf, "w") as f:
            f.attrs["model_config"] = load_case(fixtures_dir, name)
        layers = parse_h5_model_config(buf.getvalue())
        assert detect_lambda(layers).has_lambda == keras_expected[name]["has_lambda"], name
        assert all(l.source == "Hdf5ModelConfig" for l in layers)


def test_keras_zip_container_roundtrip(fixtures_dir, keras_expected):
    for name in KERAS_CASES:
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w") as zf:
            zf.writestr("metadata.json", "{}")
            zf.writestr("config.json", load_case(fixtures_dir, name))
        layers = parse_keras_zip(buf.getvalue())
        assert detect_lambda(layers).has_lambda == keras_expected[name]["has_lambda"], name


def test_h5_errors():
    with pytest.raises(NotHdf5):
        parse_h5_model_config(b"plainly not hdf5")
    buf = io.BytesIO()
    with h5py.File(buf, "w") as f:
        f.attrs["other"] = "x"
    with pytest.raises(MissingModelConfig):
        parse_h5_model_config(buf.getvalue())
    buf = io.BytesIO()
    with h5py.File(buf, "w") as f:
        f.attrs["model_config"] = "{not json"
    with pytest.raises(MalformedJson):
        parse_h5_model_config(buf.getvalue())


def test_zip_errors():
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("metadata.json", "{}")
    with pytest.raises(MissingConfigJson):
        parse_keras_zip(buf.getvalue())


def test_lambda_payload_bad_base64_degrades():
    layer_cfg = {
        "class_name": "Lambda",
        "name": "lam",
        "config": {
            "name": "lam",
            "function": {
                "class_name": "__lambda__",
                "config": {"code": "!!! not base64 !!!"},
            },
        },
    }
    doc = {"class_name": "Functional", "config": {"name": "m", "layers": [layer_cfg]}}
    layers = layers_from_config_json(json.dumps(doc))
    finding = detect_lambda(layers)
    assert finding.has_lambda
    (payload,) = finding.payloads
    assert payload.error is not None
    assert "base64" in payload.error
    assert payload.bytecode is None


def test_marshal_string_extraction():
    code = compile("__import__('os').system('echo MARKER-STRING')", "<fx>", "eval")
    blob = marshal.dumps(code)
    strings = extract_marshal_strings(blob)
    assert "echo MARKER-STRING" in strings
    assert "os" in strings
    # the length floor filters short fragments
    longer = extract_marshal_strings(blob, min_length=8)
    assert "os" not in longer
    assert "echo MARKER-STRING" in longer


def test_synthesize_pyc_loads_back():
    code = compile("1 + 1", "<fx>", "eval")
    blob = marshal.dumps(code)
    pyc = synthesize_pyc(blob)
    assert pyc[:4] == importlib.util.MAGIC_NUMBER
    # 16-byte header: magic, flags, mtime, size; marshal body follows
    restored = marshal.loads(pyc[16:])
    assert restored.co_consts == code.co_consts


def test_unsafe_operator_scan_from_strings():
    ops = check_unsafe_operators([], raw_strings=["calls tf.io.read_file here"])
    assert ops.ops == ["tf.io.read_file"]
    custom = check_unsafe_operators(
        [], raw_strings=["tf.raw_ops.DebugIdentity"], risky_ops=["tf.raw_ops.DebugIdentity"]
    )
    assert custom.ops == ["tf.raw_ops.DebugIdentity"]
    assert check_unsafe_operators([], raw_strings=["plain text"]).ops == []


# -- SavedModel wire format -----------------------------------------------


def _varint(n: int) -> bytes:
    out = bytearray()
    while True:
        bit = n & 0x7F
        n >>= 7
        if n:
            out.append(bit | 0x80)
        else:
            out.append(bit)
            return bytes(out)


def _field(number: int, payload: bytes) -> bytes:
    return _varint((number << 3) | 2) + _varint(len(payload)) + payload


def test_saved_model_wire_scan():
    lambda_json = json.dumps(
        {
            "class_name": "Lambda",
            "name": "lam",
            "config": {"name": "lam", "function": {"class_name": "__lambda__", "config": {"code": base64.b64encode(marshal.dumps(compile("x", "<fx>", "eval"))).decode()}}},
        }
    )
    inner = _field(2, lambda_json.encode()) + _field(3, b"tf.io.write_file")
    blob = _field(1, inner)
    scan = scan_saved_model_full(blob)
    assert not scan.degraded
    assert any(l.class_name == "Lambda" for l in scan.layers)
    assert any("tf.io.write_file" in s for s in scan.strings)
    ops = check_unsafe_operators(scan.layers, raw_strings=scan.strings)
    assert "tf.io.write_file" in ops.ops


def test_saved_model_malformed_degrades_with_raw_strings():
    blob = b"\xff\xff\xff garbage tf.io.read_file garbage \xff"
    scan = scan_saved_model_full(blob)
    assert scan.degraded
    assert any("tf.io.read_file" in s for s in scan.strings)
