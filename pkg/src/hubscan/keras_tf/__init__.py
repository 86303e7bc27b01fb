from hubscan.keras_tf.marshal_strings import extract_marshal_strings, synthesize_pyc
from hubscan.keras_tf.model_scan import (
    Base64Error,
    DEFAULT_RISKY_OPS,
    KerasTfError,
    LambdaFinding,
    LambdaPayload,
    LayerConfig,
    MalformedJson,
    MissingConfigJson,
    MissingFunctionField,
    MissingModelConfig,
    NotHdf5,
    SavedModelScan,
    UnsafeOperatorSet,
    check_unsafe_operators,
    detect_lambda,
    extract_lambda_bytecode,
    layers_from_config_json,
    parse_h5_model_config,
    parse_keras_zip,
    scan_saved_model,
    scan_saved_model_full,
)
from hubscan.keras_tf.wireproto import MalformedWireFormat

__all__ = [
    "Base64Error",
    "DEFAULT_RISKY_OPS",
    "KerasTfError",
    "LambdaFinding",
    "LambdaPayload",
    "LayerConfig",
    "MalformedJson",
    "MalformedWireFormat",
    "MissingConfigJson",
    "MissingFunctionField",
    "MissingModelConfig",
    "NotHdf5",
    "SavedModelScan",
    "UnsafeOperatorSet",
    "check_unsafe_operators",
    "detect_lambda",
    "extract_lambda_bytecode",
    "extract_marshal_strings",
    "layers_from_config_json",
    "parse_h5_model_config",
    "parse_keras_zip",
    "scan_saved_model",
    "scan_saved_model_full",
    "synthesize_pyc",
]
