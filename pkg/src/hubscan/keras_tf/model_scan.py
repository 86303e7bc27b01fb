"""Keras/TensorFlow model container analysis.

Covers the three container families: HDF5 (.h5/.hdf5, model_config root
attribute), the .keras v3 ZIP (config.json member), and SavedModel
protobufs (keras_metadata.pb / saved_model.pb).  The output of each
parser is a flat list of LayerConfig records; Lambda detection and the
risky-operator substring check run over those records uniformly.

No TF graph is ever loaded or executed.  Models using risky native ops
are flagged on name alone, and Lambda payloads are handed to the marshal
string extractor rather than being deserialized.
"""

from __future__ import annotations

import base64
import binascii
import io
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import h5py

from hubscan import ziparchive
from hubscan.keras_tf.marshal_strings import extract_marshal_strings
from hubscan.keras_tf.wireproto import MalformedWireFormat, collect_strings

HDF5_MAGIC = b"\x89HDF\r\n\x1a\n"

# Alg. default; the scanner config may extend this (op-name aliases like
# "ReadFile" are shipped in the default config file, not here)
DEFAULT_RISKY_OPS: Tuple[str, ...] = ("tf.io.read_file", "tf.io.write_file")


class KerasTfError(ValueError):
    pass


class NotHdf5(KerasTfError):
    pass


class MissingModelConfig(KerasTfError):
    pass


class MissingConfigJson(KerasTfError):
    pass


class MalformedJson(KerasTfError):
    pass


class MissingFunctionField(KerasTfError):
    pass


class Base64Error(KerasTfError):
    pass


@dataclass
class LayerConfig:
    class_name: str
    name: str
    config_json: dict
    source: str  # Hdf5ModelConfig | KerasZipConfig | SavedModelNode


@dataclass
class LambdaPayload:
    layer_name: str
    bytecode: Optional[bytes]
    embedded_strings: List[str] = field(default_factory=list)
    form: Optional[str] = None  # which serialization shape held the code
    error: Optional[str] = None


@dataclass
class LambdaFinding:
    has_lambda: bool
    payloads: List[LambdaPayload] = field(default_factory=list)


@dataclass
class UnsafeOperatorSet:
    ops: List[str] = field(default_factory=list)  # sorted, deduplicated


@dataclass
class SavedModelScan:
    layers: List[LayerConfig]
    strings: List[str]
    degraded: bool = False
    degraded_reason: Optional[str] = None


def _layer_name(entry: dict) -> str:
    cfg = entry.get("config")
    if isinstance(cfg, dict) and isinstance(cfg.get("name"), str):
        return cfg["name"]
    if isinstance(entry.get("name"), str):
        return entry["name"]
    return ""


def _walk_layer_entries(node: object, source: str, out: List[LayerConfig]) -> None:
    """Collect layer dicts from a model config, recursing into nested models."""
    if not isinstance(node, dict):
        return
    cfg = node.get("config")
    layers = cfg.get("layers") if isinstance(cfg, dict) else None
    if isinstance(layers, list):
        for entry in layers:
            if not isinstance(entry, dict):
                continue
            class_name = entry.get("class_name")
            if isinstance(class_name, str) and class_name:
                out.append(LayerConfig(class_name, _layer_name(entry), entry, source))
            _walk_layer_entries(entry, source, out)


def _layers_from_model_config(config: object, source: str) -> List[LayerConfig]:
    out: List[LayerConfig] = []
    _walk_layer_entries(config, source, out)
    if not out and isinstance(config, dict):
        class_name = config.get("class_name")
        if isinstance(class_name, str) and class_name:
            # a bare layer config, not a whole model
            out.append(LayerConfig(class_name, _layer_name(config), config, source))
    return out


def parse_h5_model_config(data: bytes) -> List[LayerConfig]:
    """Read the model_config JSON from an HDF5 model's root attributes."""
    if not data.startswith(HDF5_MAGIC):
        raise NotHdf5("missing HDF5 signature")
    try:
        h5 = h5py.File(io.BytesIO(data), "r")
    except Exception as exc:
        raise NotHdf5(f"unreadable HDF5 container: {exc}") from exc
    with h5:
        raw = h5.attrs.get("model_config")
    if raw is None:
        raise MissingModelConfig("no model_config attribute on the root group")
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", "replace")
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"model_config is not valid JSON: {exc}") from exc
    return _layers_from_model_config(config, "Hdf5ModelConfig")


def parse_keras_zip(data: bytes) -> List[LayerConfig]:
    """Read config.json from a .keras v3 archive."""
    member = ziparchive.read_member(data, "config.json")
    if member is None:
        raise MissingConfigJson("archive has no config.json")
    try:
        config = json.loads(member.decode("utf-8", "replace"))
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"config.json is not valid JSON: {exc}") from exc
    return _layers_from_model_config(config, "KerasZipConfig")


def layers_from_config_json(text: str, source: str = "ConfigJson") -> List[LayerConfig]:
    """Parse a bare model-config JSON document (container-independent)."""
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"not valid JSON: {exc}") from exc
    return _layers_from_model_config(config, source)


_RAW_STRING_RE = re.compile(rb"[\x20-\x7e]{4,}")


def scan_saved_model_full(data: bytes) -> SavedModelScan:
    """Walk a SavedModel/keras-metadata protobuf for layer configs and strings.

    Never fails: a malformed wire stream degrades to a raw byte scan for
    printable runs, keeping the operator check usable.
    """
    pairs, wire_err = collect_strings(data)
    strings = [text for text, _ in pairs]
    degraded = wire_err is not None
    if degraded:
        raw = [m.group().decode("ascii") for m in _RAW_STRING_RE.finditer(data)]
        known = set(strings)
        strings.extend(s for s in raw if s not in known)

    layers: List[LayerConfig] = []
    for text in strings:
        if not text.lstrip().startswith("{"):
            continue
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            continue
        if not isinstance(doc, dict):
            continue
        if isinstance(doc.get("class_name"), str) and doc["class_name"]:
            layers.append(
                LayerConfig(doc["class_name"], _layer_name(doc), doc, "SavedModelNode")
            )
        nested = _layers_from_model_config(doc, "SavedModelNode")
        known_ids = {id(l.config_json) for l in layers}
        layers.extend(l for l in nested if id(l.config_json) not in known_ids)

    return SavedModelScan(
        layers=layers,
        strings=strings,
        degraded=degraded,
        degraded_reason=str(wire_err) if wire_err else None,
    )


def scan_saved_model(data: bytes) -> List[LayerConfig]:
    return scan_saved_model_full(data).layers


def _find_code_field(config: dict):
    """Locate the serialized function payload across Keras schema variants."""
    fn = config.get("function")
    if fn is None:
        return None, None
    if isinstance(fn, dict):
        inner = fn.get("config")
        if isinstance(inner, dict) and isinstance(inner.get("code"), str):
            return inner["code"], "function.config.code"
        if isinstance(fn.get("code"), str):
            return fn["code"], "function.code"
        return None, None
    if isinstance(fn, (list, tuple)) and fn and isinstance(fn[0], str):
        return fn[0], "function[0]"
    if isinstance(fn, str):
        return fn, "function"
    return None, None


def extract_lambda_bytecode(layer: LayerConfig) -> LambdaPayload:
    """Decode the marshal payload of one Lambda layer.

    Keras serializes the function as base64 marshal bytes, but the exact
    key moved between versions; every known shape is probed and the one
    that matched is recorded on the payload.
    """
    entry = layer.config_json
    config = entry.get("config") if isinstance(entry.get("config"), dict) else entry
    code_b64, form = _find_code_field(config)
    if code_b64 is None:
        raise MissingFunctionField(
            f"Lambda layer {layer.name!r} has no serialized function payload"
        )
    try:
        blob = base64.b64decode(code_b64.encode("ascii", "replace"), validate=False)
    except (binascii.Error, ValueError) as exc:
        raise Base64Error(f"Lambda payload is not valid base64: {exc}") from exc
    strings = extract_marshal_strings(blob)
    return LambdaPayload(layer.name, blob, strings, form)


def detect_lambda(layers: Sequence[LayerConfig]) -> LambdaFinding:
    """Flag Lambda layers and pull each one's bytecode.

    All Lambda layers are processed, not just the first: the report must
    enumerate every payload.  Extraction failures become an opaque-payload
    record on the finding instead of aborting the scan.
    """
    finding = LambdaFinding(has_lambda=False)
    for layer in layers:
        if layer.class_name != "Lambda":
            continue
        finding.has_lambda = True
        try:
            finding.payloads.append(extract_lambda_bytecode(layer))
        except KerasTfError as exc:
            finding.payloads.append(
                LambdaPayload(layer.name, None, [], None, f"opaque Lambda payload: {exc}")
            )
    return finding


def check_unsafe_operators(
    layers: Sequence[LayerConfig],
    raw_strings: Iterable[str] = (),
    risky_ops: Sequence[str] = DEFAULT_RISKY_OPS,
) -> UnsafeOperatorSet:
    """Substring-match the risky-operator list against everything we saw."""
    found = set()
    texts = [json.dumps(layer.config_json) for layer in layers]
    texts.extend(raw_strings)
    for op in risky_ops:
        if any(op in text for text in texts):
            found.add(op)
    return UnsafeOperatorSet(ops=sorted(found))
