"""Ground-truth corpus generator: real-format model and script fixtures
with a machine-readable label manifest, plus an oracle pass that re-loads
every artifact with the genuine deserializer (under a guard, never
executing payloads)."""

from fixturegen.generate import generate
from fixturegen.manifest import AuxFile, FixtureEntry, FixtureManifest, check_complete
from fixturegen.verify import OracleStatus, verify_oracles

__all__ = [
    "AuxFile",
    "FixtureEntry",
    "FixtureManifest",
    "OracleStatus",
    "check_complete",
    "generate",
    "verify_oracles",
]
