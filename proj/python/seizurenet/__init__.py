from ._core import (
    ConfigError,
    DataError,
    InsufficientSeizures,
    IoError,
    Model,
    SeizurenetError,
    VerificationError,
    __version__,
    conv3d,
    crossval,
    effective_extent,
    generate_synthetic,
    metrics,
    parse_chbmit_summary,
    run_gradcheck,
    select_leading_seizures,
    slide_windows,
    stft_featurize,
)

__all__ = [
    "ConfigError",
    "DataError",
    "InsufficientSeizures",
    "IoError",
    "Model",
    "SeizurenetError",
    "VerificationError",
    "conv3d",
    "crossval",
    "effective_extent",
    "generate_synthetic",
    "metrics",
    "parse_chbmit_summary",
    "run_gradcheck",
    "select_leading_seizures",
    "slide_windows",
    "stft_featurize",
]
