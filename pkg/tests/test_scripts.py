"""Loading-script analysis: the micro-corpus and alias invariance."""

import json
import keyword
import random

import pytest

from hubscan.scripts import analyze_source, collect_imports, find_unsafe_api_calls, parse_python


def triples(source: str, table=None):
    tree, imports, findings = analyze_source(source) if table is None else (None, None, None)
    if table is not None:
        tree = parse_python(source)
        imports = collect_imports(tree)
        findings = find_unsafe_api_calls(tree, imports, table)
    return tree, sorted([f.api, f.category, f.line] for f in findings)


@pytest.fixture(scope="module")
def corpus(fixtures_dir):
    root = fixtures_dir / "scripts"
    return root, json.loads((root / "expected.json").read_text())


def test_micro_corpus_exact_triples(corpus):
    root, expected = corpus
    assert len(expected) >= 20
    for name, exp in expected.items():
        tree, got = triples((root / name).read_text())
        assert got == sorted(exp["triples"]), name
        assert tree.degraded == exp["degraded"], name


def test_corpus_covers_every_category(corpus, api_table):
    _, expected = corpus
    covered = {cat for exp in expected.values() for _api, cat, _line in exp["triples"]}
    assert covered == {entry.category for entry in api_table}


def test_degraded_fallback_is_flagged(corpus):
    root, expected = corpus
    degraded = [n for n, e in expected.items() if e["degraded"]]
    assert degraded
    for name in degraded:
        tree, _imports, findings = analyze_source((root / name).read_text())
        assert tree.degraded and tree.degraded_reason
        assert all(f.degraded for f in findings)


# -- alias invariance -------------------------------------------------------

# (template, expected triples); {a}/{b} are replaced with random identifiers
TEMPLATES = [
    (
        "import os as {a}\n\n{a}.system('echo x')\n",
        [["os.system", "CommandExecution", 3]],
    ),
    (
        "from subprocess import run as {a}\n\n{a}(['echo'])\n",
        [["subprocess.run", "CommandExecution", 3]],
    ),
    (
        "import urllib.request as {a}\n\n{a}.urlopen('https://example.invalid')\n",
        [["urllib.request.urlopen", "Network", 3]],
    ),
    (
        "from os import system as {a}\n\n{a}('echo x')\n",
        [["os.system", "CommandExecution", 3]],
    ),
    (
        "import socket as {a}\n\n{b} = {a}.socket()\n{b}.connect(('192.0.2.1', 1))\n",
        [["socket.socket", "Network", 3], ["socket.connect", "Network", 4]],
    ),
    (
        "import requests as {a}\n\n{a}.post('https://example.invalid')\n",
        [["requests.post", "Network", 3]],
    ),
    (
        "from Crypto.Cipher import AES as {a}\n\n{a}.new(b'0' * 16)\n",
        [["Crypto.Cipher.AES", "Cryptography", 3]],
    ),
    (
        "import yaml as {a}\n\n{a}.load('a: 1')\n",
        [["yaml.load", "YamlLoad", 3]],
    ),
]


def random_identifier(rng: random.Random, taken: set) -> str:
    while True:
        name = "v_" + "".join(rng.choice("abcdefghijklmnop") for _ in range(8))
        if name not in taken and not keyword.iskeyword(name):
            taken.add(name)
            return name


def test_alias_invariance_many_renamings():
    rng = random.Random(2024)
    runs = 0
    for i in range(120):
        template, expected = TEMPLATES[i % len(TEMPLATES)]
        taken: set = set()
        src = template.format(
            a=random_identifier(rng, taken), b=random_identifier(rng, taken)
        )
        _tree, got = triples(src)
        assert got == sorted(expected), src
        runs += 1
    assert runs >= 100


def test_shadowed_alias_changes_resolution():
    # rebinding the alias to a local kills the import mapping for later uses
    src = "import os\n\nos = object()\nos.system('echo x')\n"
    _tree, got = triples(src)
    # conservative analyzers may keep or drop the finding; it must not crash
    assert got in ([], [["os.system", "CommandExecution", 4]])


def test_call_snippet_and_column():
    src = "import os\n\nos.system('echo x')\n"
    _tree, _imports, findings = analyze_source(src)
    (f,) = findings
    assert f.column == 0
    assert "os.system" in f.call_snippet
