"""Corpus entry point: ``python -m fixturegen.generate --out DIR --seed N``.

Writes the fixture tree (one repo directory per fixture), the reference
disassembly dumps, and ``manifest.json``. Regenerating with the same seed
produces byte-identical files; archives carry zeroed timestamps.
"""

import argparse
import platform
from pathlib import Path

import h5py

from fixturegen.keras_models import gen_keras_models
from fixturegen.manifest import MANIFEST_NAME, STAMP_NAME, AuxFile, FixtureManifest
from fixturegen.pickles import gen_pickle_payloads
from fixturegen.scripts_gen import gen_loading_scripts

DEFAULT_SEED = 2026


def generate(outdir: Path, seed: int = DEFAULT_SEED) -> FixtureManifest:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = FixtureManifest(
        seed=seed,
        generator={
            "python": platform.python_version(),
            "h5py": h5py.__version__,
            "hdf5_layout": "model_config root attribute",
            "keras_archive_layout": "config.json inside a .keras zip",
            "saved_model_layout": "schema-less keras_metadata wire nodes",
        },
    )
    for fragment in (
        gen_pickle_payloads(outdir, seed),
        gen_keras_models(outdir, seed),
        gen_loading_scripts(outdir, seed),
    ):
        manifest.merge(fragment)
    manifest.aux_files.append(AuxFile(path=MANIFEST_NAME, role="manifest"))
    # the stamp is written later by verify_oracles; list it up front so the
    # manifest stays a complete map of the corpus tree
    manifest.aux_files.append(AuxFile(path=STAMP_NAME, role="stamp"))
    manifest.write(outdir)
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixturegen", description="generate the labeled scanner-test corpus"
    )
    parser.add_argument("--out", required=True, help="corpus output directory")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args(argv)
    manifest = generate(Path(args.out), args.seed)
    print(f"wrote {len(manifest.fixtures)} fixtures under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
