"""Supply-chain security scanner for machine-learning model hubs.

Detects malicious code poisoning in serialized model files (pickle
variants, Keras/TensorFlow containers) and in dataset loading scripts,
combining four stages: format identification and extraction, unsafe
API/opcode filtering, taint analysis, and heuristic pattern matching.
"""

__version__ = "0.1.0"

from hubscan.formats import ArtifactFormat, FormatKind, VulnLevel, classify_vulnerability, identify_format

__all__ = [
    "ArtifactFormat",
    "FormatKind",
    "VulnLevel",
    "classify_vulnerability",
    "identify_format",
    "__version__",
]
