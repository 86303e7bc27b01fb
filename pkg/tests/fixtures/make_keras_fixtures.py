"""Regenerate the layer-config JSON fixtures under keras/.

The Lambda payloads are real marshal-serialized code objects (base64
encoded, as the framework stores them) whose constants carry an inert
marker string naming an unsafe API, so the string extractor has
something to find.  Nothing here is ever executed.
"""

from __future__ import annotations

import base64
import json
import marshal
from pathlib import Path

HERE = Path(__file__).parent
OUT = HERE / "keras"


def lambda_code_b64(body: str) -> str:
    code = compile(body, "<fixture>", "eval")
    return base64.b64encode(marshal.dumps(code)).decode("ascii")


def dense(name: str, extra: dict | None = None) -> dict:
    config = {"name": name, "units": 4, "activation": "relu"}
    if extra:
        config.update(extra)
    return {"class_name": "Dense", "config": config}


def lambda_modern(name: str, body: str) -> dict:
    return {
        "class_name": "Lambda",
        "config": {
            "name": name,
            "function": {
                "class_name": "__lambda__",
                "config": {"code": lambda_code_b64(body), "defaults": None, "closure": None},
            },
        },
    }


def lambda_legacy(name: str, body: str) -> dict:
    return {
        "class_name": "Lambda",
        "config": {"name": name, "function": [lambda_code_b64(body), None, None]},
    }


def model(layers: list) -> dict:
    return {
        "class_name": "Sequential",
        "config": {"name": "sequential", "layers": layers},
    }


def main() -> None:
    OUT.mkdir(exist_ok=True)
    marker = "len('os.system marker') + x"

    cases = {
        "no_lambda": model([dense("dense_a"), dense("dense_b")]),
        "one_lambda": model([dense("dense_a"), lambda_modern("lam_one", marker)]),
        "two_lambda": model(
            [
                lambda_modern("lam_first", marker),
                dense("dense_mid"),
                lambda_legacy("lam_second", "x + len('eval marker')"),
            ]
        ),
        "read_file": model(
            [dense("dense_reader", {"loader_op": "tf.io.read_file"}), dense("dense_b")]
        ),
        "write_file": model(
            [dense("dense_writer", {"saver_op": "tf.io.write_file"})]
        ),
        "both": model(
            [
                dense("dense_io", {"ops": ["tf.io.read_file", "tf.io.write_file"]}),
                lambda_modern("lam_io", marker),
            ]
        ),
    }
    expected = {
        "no_lambda": {"has_lambda": False, "payloads": 0, "ops": []},
        "one_lambda": {"has_lambda": True, "payloads": 1, "ops": []},
        "two_lambda": {"has_lambda": True, "payloads": 2, "ops": []},
        "read_file": {"has_lambda": False, "payloads": 0, "ops": ["tf.io.read_file"]},
        "write_file": {"has_lambda": False, "payloads": 0, "ops": ["tf.io.write_file"]},
        "both": {
            "has_lambda": True,
            "payloads": 1,
            "ops": ["tf.io.read_file", "tf.io.write_file"],
        },
    }
    for name, config in cases.items():
        (OUT / f"{name}.json").write_text(json.dumps(config, indent=1) + "\n")
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(cases)} configs to {OUT}")


if __name__ == "__main__":
    main()
