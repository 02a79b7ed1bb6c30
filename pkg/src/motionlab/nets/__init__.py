"""Neural predictors: pluggable baselines plus deviation-feedback encoders."""

from .baselines import DctGcnBaseline, MixerBaseline, dct_matrix
from .bundle import (
    BundleConfig,
    PredictorBundle,
    load_checkpoint,
    save_checkpoint,
)
from .feedback import GruDeviationEncoder, MlpDeviationEncoder, zero_init_linear

__all__ = [
    "BundleConfig",
    "DctGcnBaseline",
    "GruDeviationEncoder",
    "MixerBaseline",
    "MlpDeviationEncoder",
    "PredictorBundle",
    "dct_matrix",
    "load_checkpoint",
    "save_checkpoint",
    "zero_init_linear",
]
