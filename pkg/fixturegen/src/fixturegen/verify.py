"""Oracle pass: re-load every generated artifact with the real deserializer.

Pickles go through ``pickle.Unpickler`` with ``find_class`` replaced by a
recording stub, so the reduce payload's shape is asserted without running
any effect. Lambda payloads round-trip through ``marshal`` and a
synthesized ``.pyc`` that the bytecode disassembler accepts. A corpus
that passes gets an ``oracle_ok`` stamp next to its manifest.
"""

import argparse
import base64
import dis
import importlib.util
import io
import json
import marshal
import pickle
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

import h5py

from fixturegen.manifest import STAMP_NAME, FixtureEntry, FixtureManifest, load_manifest
from fixturegen.pickles import reference_tokens


@dataclass
class OracleStatus:
    checked: int = 0
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


class _Recorder:
    def __init__(self):
        self.symbols: List[str] = []
        self.calls: List[Tuple[str, tuple]] = []


class _GuardedUnpickler(pickle.Unpickler):
    """Every class lookup returns a recording stub; nothing real loads."""

    def __init__(self, fh, recorder: _Recorder):
        super().__init__(fh)
        self._recorder = recorder

    def find_class(self, module, name):
        recorder = self._recorder
        dotted = f"{module}.{name}"
        recorder.symbols.append(dotted)

        # a class, not a function: NEWOBJ/NEWOBJ_EX insist on a type
        class Stub:
            def __new__(cls, *args, **kwargs):
                recorder.calls.append((dotted, args))
                return object.__new__(cls)

            def __init__(self, *args, **kwargs):
                pass

        return Stub

    def persistent_load(self, pid):
        self._recorder.symbols.append(f"persistent:{pid}")
        return None


def guarded_load(data: bytes) -> _Recorder:
    recorder = _Recorder()
    _GuardedUnpickler(io.BytesIO(data), recorder).load()
    return recorder


def _check_payload(entry: FixtureEntry, recorder: _Recorder, where: str, problems: List[str]) -> None:
    if not entry.payload_api:
        if recorder.symbols:
            problems.append(f"{where}: unexpected class references {recorder.symbols}")
        return
    if entry.payload_api not in recorder.symbols:
        problems.append(f"{where}: payload {entry.payload_api} not referenced")
        return
    if entry.payload_arg and not any(
        args and args[0] == entry.payload_arg for _dotted, args in recorder.calls
    ):
        problems.append(f"{where}: payload argument mismatch")


def _check_dump(root: Path, manifest: FixtureManifest, fixture: str, data: bytes, problems: List[str]) -> None:
    oracle = next(
        (a for a in manifest.aux_files if a.role == "disasm-oracle" and a.fixture == fixture), None
    )
    if oracle is None:
        problems.append(f"{fixture}: no reference disassembly dump")
        return
    doc = json.loads((root / oracle.path).read_text())
    if doc["tokens"] != reference_tokens(data):
        problems.append(f"{fixture}: reference dump does not match a fresh disassembly")


def _lambda_codes(node):
    if isinstance(node, dict):
        fn = node.get("function")
        if isinstance(fn, dict) and fn.get("class_name") == "__lambda__":
            code = (fn.get("config") or {}).get("code")
            if isinstance(code, str):
                yield code
        if isinstance(fn, list) and fn and isinstance(fn[0], str):
            yield fn[0]
        for value in node.values():
            yield from _lambda_codes(value)
    elif isinstance(node, list):
        for value in node:
            yield from _lambda_codes(value)


def _check_lambda_payloads(entry: FixtureEntry, config: dict, where: str, problems: List[str]) -> None:
    codes = list(_lambda_codes(config))
    if entry.payload_api != "lambda-bytecode":
        if codes:
            problems.append(f"{where}: unexpected serialized function")
        return
    if not codes:
        problems.append(f"{where}: no serialized function found")
        return
    for b64 in codes:
        blob = base64.b64decode(b64)
        code = marshal.loads(blob)
        if not list(dis.get_instructions(code)):
            problems.append(f"{where}: payload bytecode disassembles to nothing")
        # the manifest records the source; recompiling it must yield an
        # equal code object (raw marshal bytes vary with refcount flags)
        if entry.payload_arg:
            expected = compile(entry.payload_arg, "<fixture-lambda>", "eval")
            if code != expected:
                problems.append(f"{where}: payload differs from recompiled source")
        pyc = importlib.util.MAGIC_NUMBER + b"\x00" * 12 + blob
        if marshal.loads(pyc[16:]).co_code != code.co_code:
            problems.append(f"{where}: synthesized pyc body does not round-trip")


# -- schema-less wire reading (independent of the scanner) -------------------


def _read_varint(buf: bytes, i: int) -> Tuple[int, int]:
    shift = value = 0
    while True:
        if i >= len(buf):
            raise ValueError("truncated varint")
        byte = buf[i]
        i += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, i
        shift += 7


def _wire_leaves(buf: bytes) -> List[bytes]:
    """Length-delimited payloads, recursing while bytes stay well-formed."""
    i = 0
    fields = []
    while i < len(buf):
        key, i = _read_varint(buf, i)
        wire = key & 7
        if wire == 0:
            _, i = _read_varint(buf, i)
        elif wire == 1:
            i += 8
        elif wire == 5:
            i += 4
        elif wire == 2:
            size, i = _read_varint(buf, i)
            if i + size > len(buf):
                raise ValueError("truncated field")
            fields.append(buf[i : i + size])
            i += size
        else:
            raise ValueError(f"wire type {wire}")
    leaves = []
    for payload in fields:
        try:
            leaves.extend(_wire_leaves(payload))
        except ValueError:
            leaves.append(payload)
    return leaves


def _verify_pickle(root: Path, manifest: FixtureManifest, entry: FixtureEntry, problems: List[str]) -> None:
    data = (root / entry.path).read_bytes()
    try:
        recorder = guarded_load(data)
    except Exception as exc:
        problems.append(f"{entry.path}: unpickler rejected the stream: {exc}")
        return
    _check_payload(entry, recorder, entry.path, problems)
    _check_dump(root, manifest, entry.path, data, problems)


def _verify_torch_zip(root: Path, manifest: FixtureManifest, entry: FixtureEntry, problems: List[str]) -> None:
    with zipfile.ZipFile(root / entry.path) as zf:
        members = [n for n in zf.namelist() if n.endswith(".pkl")]
        if not members:
            problems.append(f"{entry.path}: archive has no pickle members")
        for member in members:
            blob = zf.read(member)
            where = f"{entry.path}::{member}"
            try:
                recorder = guarded_load(blob)
            except Exception as exc:
                problems.append(f"{where}: unpickler rejected the stream: {exc}")
                continue
            if member == "archive/data.pkl":
                _check_payload(entry, recorder, where, problems)
            elif recorder.symbols:
                problems.append(f"{where}: unexpected class references")
            _check_dump(root, manifest, where, blob, problems)


def _verify_h5(root: Path, entry: FixtureEntry, problems: List[str]) -> None:
    with h5py.File(root / entry.path, "r") as f:
        raw = f.attrs.get("model_config")
    if raw is None:
        problems.append(f"{entry.path}: missing model_config attribute")
        return
    config = json.loads(raw if isinstance(raw, str) else bytes(raw).decode("utf-8"))
    _check_lambda_payloads(entry, config, entry.path, problems)


def _verify_keras_zip(root: Path, entry: FixtureEntry, problems: List[str]) -> None:
    with zipfile.ZipFile(root / entry.path) as zf:
        config = json.loads(zf.read("config.json"))
    _check_lambda_payloads(entry, config, entry.path, problems)


def _verify_saved_metadata(root: Path, entry: FixtureEntry, problems: List[str]) -> None:
    leaves = _wire_leaves((root / entry.path).read_bytes())
    if not any(leaf == b"_tf_keras_layer" for leaf in leaves):
        problems.append(f"{entry.path}: no _tf_keras_layer node identifier")
    configs = []
    for leaf in leaves:
        try:
            doc = json.loads(leaf.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            continue
        if isinstance(doc, dict) and "class_name" in doc:
            configs.append(doc)
    if not any(doc.get("class_name") == "Lambda" for doc in configs):
        problems.append(f"{entry.path}: no Lambda node metadata")
    _check_lambda_payloads(entry, {"layers": configs}, entry.path, problems)


def _verify_script(root: Path, entry: FixtureEntry, problems: List[str]) -> None:
    source = (root / entry.path).read_text()
    try:
        compile(source, entry.path, "exec")
    except SyntaxError as exc:
        problems.append(f"{entry.path}: does not parse: {exc}")


def verify_oracles(corpusdir: Path) -> OracleStatus:
    root = Path(corpusdir)
    manifest = load_manifest(root)
    status = OracleStatus()
    for entry in manifest.fixtures:
        suffix = Path(entry.path).suffix
        if suffix == ".pkl":
            _verify_pickle(root, manifest, entry, status.problems)
        elif suffix == ".pt":
            _verify_torch_zip(root, manifest, entry, status.problems)
        elif suffix == ".h5":
            _verify_h5(root, entry, status.problems)
        elif suffix == ".keras":
            _verify_keras_zip(root, entry, status.problems)
        elif suffix == ".pb":
            _verify_saved_metadata(root, entry, status.problems)
        elif suffix == ".py":
            _verify_script(root, entry, status.problems)
        else:
            status.problems.append(f"{entry.path}: no oracle for suffix {suffix}")
        status.checked += 1
    if status.ok:
        (root / STAMP_NAME).write_text(f"ok fixtures={status.checked}\n")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixturegen-verify", description="re-load a generated corpus under guards"
    )
    parser.add_argument("corpusdir")
    args = parser.parse_args(argv)
    status = verify_oracles(Path(args.corpusdir))
    for problem in status.problems:
        print(f"problem: {problem}")
    print(f"checked {status.checked} fixture(s), {'ok' if status.ok else 'FAILED'}")
    return 0 if status.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
