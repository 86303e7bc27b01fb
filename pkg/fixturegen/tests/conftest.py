import pytest

from fixturegen.generate import generate
from fixturegen.verify import verify_oracles


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    manifest = generate(root, seed=2026)
    status = verify_oracles(root)
    return root, manifest, status
