"""Video CNN inference on sparse frame deltas with cached projections."""

from ._rrm import (
    ErrorModel,
    FormatError,
    InvalidArgument,
    NetworkModel,
    NumericError,
    ShapeError,
    SparseDelta,
    calibrate,
    dense_forward,
    densify,
    fit_error_model,
    generate_video,
    load_model,
    make_random_model,
    process_sequence,
    save_model,
    sparsify,
    subtract,
)

__all__ = [
    "ErrorModel",
    "FormatError",
    "InvalidArgument",
    "NetworkModel",
    "NumericError",
    "ShapeError",
    "SparseDelta",
    "calibrate",
    "dense_forward",
    "densify",
    "fit_error_model",
    "generate_video",
    "load_model",
    "make_random_model",
    "process_sequence",
    "save_model",
    "sparsify",
    "subtract",
]

__version__ = "0.1.0"
