"""Keras-format model fixtures: HDF5, .keras archives, SavedModel metadata.

The HDF5 container is written with h5py (the same library the framework
saver uses) with the architecture JSON in the root ``model_config``
attribute; the .keras archive carries ``config.json``; the metadata
protobuf is assembled as raw wire bytes holding a ``_tf_keras_layer``
node. Lambda payloads are real marshalled code objects whose only effect
would be an echo, and both serialized function layouts (mapping with
``config.code`` and the positional tuple) are covered.
"""

import base64
import json
import marshal
from pathlib import Path

import h5py

from fixturegen.manifest import FixtureEntry, FixtureManifest

# compiles to a code object whose co_consts carry the inner source string:
# an unsafe-API name plus a proof-of-concept marker, nothing runnable here
LAMBDA_SRC = "exec(\"import os; os.system('echo pwned by fixture')\")"


def lambda_code_b64() -> str:
    code = compile(LAMBDA_SRC, "<fixture-lambda>", "eval")
    return base64.b64encode(marshal.dumps(code)).decode("ascii")


def dense_layer(name: str = "dense", units: int = 4, **extra) -> dict:
    config = {"name": name, "units": units, "activation": "linear"}
    config.update(extra)
    return {"class_name": "Dense", "config": config}


def lambda_layer_mapping(name: str = "lam") -> dict:
    return {
        "class_name": "Lambda",
        "config": {
            "name": name,
            "function": {
                "class_name": "__lambda__",
                "config": {"code": lambda_code_b64(), "defaults": None, "closure": None},
            },
        },
    }


def lambda_layer_tuple(name: str = "lam") -> dict:
    return {
        "class_name": "Lambda",
        "config": {"name": name, "function": [lambda_code_b64(), None, None]},
    }


def model_config(layers: list, name: str = "sequential") -> str:
    return json.dumps(
        {"class_name": "Sequential", "config": {"name": name, "layers": layers}},
        sort_keys=True,
    )


def write_h5(path: Path, config_text: str) -> None:
    with h5py.File(path, "w") as f:
        f.attrs["model_config"] = config_text
        f.attrs["keras_version"] = "2.15.0"
        f.attrs["backend"] = "tensorflow"


def keras_zip_bytes(config_text: str) -> bytes:
    from fixturegen.pickles import zip_bytes

    metadata = json.dumps({"keras_version": "3.0.0"}, sort_keys=True)
    return zip_bytes(
        [("metadata.json", metadata.encode()), ("config.json", config_text.encode())]
    )


# -- minimal protobuf wire writer -------------------------------------------


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


def wire_field(number: int, payload: bytes) -> bytes:
    return _varint((number << 3) | 2) + _varint(len(payload)) + payload


def saved_metadata_bytes() -> bytes:
    lambda_meta = json.dumps(
        {
            "class_name": "Lambda",
            "name": "lam_meta",
            "config": lambda_layer_mapping("lam_meta")["config"],
        },
        sort_keys=True,
    )
    dense_meta = json.dumps(
        {"class_name": "Dense", "name": "dense_meta", "config": dense_layer("dense_meta")["config"]},
        sort_keys=True,
    )
    nodes = wire_field(3, b"_tf_keras_layer") + wire_field(4, lambda_meta.encode())
    nodes += wire_field(3, b"_tf_keras_layer") + wire_field(4, dense_meta.encode())
    return wire_field(1, nodes)


def gen_keras_models(outdir: Path, seed: int) -> FixtureManifest:
    outdir = Path(outdir)
    frag = FixtureManifest(seed=seed)

    def add(repo: str, name: str, data: bytes, entry: FixtureEntry) -> None:
        repo_dir = outdir / repo
        repo_dir.mkdir(parents=True, exist_ok=True)
        (repo_dir / name).write_bytes(data)
        entry.path = f"{repo}/{name}"
        frag.fixtures.append(entry)

    dense_only = model_config([dense_layer("dense_a"), dense_layer("dense_b", 2)])
    repo_dir = outdir / "keras-dense-h5"
    repo_dir.mkdir(parents=True, exist_ok=True)
    write_h5(repo_dir / "model.h5", dense_only)
    frag.fixtures.append(
        FixtureEntry(
            path="keras-dense-h5/model.h5",
            repo_kind="Model",
            label="Benign",
            expected_verdict="Clean",
            notes="architecture JSON without serialized functions",
        )
    )

    lambda_cfg = model_config([lambda_layer_mapping("lam_h5"), dense_layer("dense_tail")])
    repo_dir = outdir / "keras-lambda-h5"
    repo_dir.mkdir(parents=True, exist_ok=True)
    write_h5(repo_dir / "model.h5", lambda_cfg)
    frag.fixtures.append(
        FixtureEntry(
            path="keras-lambda-h5/model.h5",
            repo_kind="Model",
            label="Malicious",
            expected_findings=["LambdaLayer", "UnsafeApi"],
            expected_behavior="ProofOfConcept",
            expected_verdict="Malicious",
            payload_api="lambda-bytecode",
            payload_arg=LAMBDA_SRC,
            notes="serialized function in mapping form (config.code)",
        )
    )

    tuple_cfg = model_config([lambda_layer_tuple("lam_zip")])
    add(
        "keras-lambda-zip",
        "model.keras",
        keras_zip_bytes(tuple_cfg),
        FixtureEntry(
            path="",
            repo_kind="Model",
            label="Malicious",
            expected_findings=["LambdaLayer", "UnsafeApi"],
            expected_behavior="ProofOfConcept",
            expected_verdict="Malicious",
            payload_api="lambda-bytecode",
            payload_arg=LAMBDA_SRC,
            notes="serialized function in positional tuple form",
        ),
    )

    add(
        "keras-savedmodel-pb",
        "keras_metadata.pb",
        saved_metadata_bytes(),
        FixtureEntry(
            path="",
            repo_kind="Model",
            label="Malicious",
            expected_findings=["LambdaLayer", "UnsafeApi"],
            expected_behavior="ProofOfConcept",
            expected_verdict="Malicious",
            payload_api="lambda-bytecode",
            payload_arg=LAMBDA_SRC,
            notes="metadata node with identifier _tf_keras_layer",
        ),
    )

    readfile_cfg = model_config(
        [dense_layer("reader", preprocess_hint="tf.io.read_file")]
    )
    repo_dir = outdir / "keras-readfile-h5"
    repo_dir.mkdir(parents=True, exist_ok=True)
    write_h5(repo_dir / "model.h5", readfile_cfg)
    frag.fixtures.append(
        FixtureEntry(
            path="keras-readfile-h5/model.h5",
            repo_kind="Model",
            label="PoC",
            expected_findings=["UnsafeOperator"],
            expected_behavior="Unclassified",
            expected_verdict="Suspicious",
            notes="config text names a file-reading graph operator",
        )
    )
    return frag
