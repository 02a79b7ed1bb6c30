"""motionlab: consecutive human motion prediction with deviation feedback.

A desk-scale laboratory built around four ideas: pose sequences resampled
into semi-overlapping rounds, a velocity-space deviation signal comparing
each round's prediction to what was then observed, small encoder branches
that feed that signal back into a baseline predictor, and multi-round
rollout evaluation against a feedback-disabled control.
"""

from .config import ExperimentSpec, SpecError, derive_seed, load_spec, parse_spec
from .deviation import Deviation, DeviationError, compute_deviation, velocity, zero_deviation
from .estimator import ConsecutiveMotionPredictor
from .motion import MotionParseError, MotionSequence, load_motion, save_motion
from .nets import (
    BundleConfig,
    DctGcnBaseline,
    GruDeviationEncoder,
    MixerBaseline,
    MlpDeviationEncoder,
    PredictorBundle,
    load_checkpoint,
    save_checkpoint,
)
from .rollout import (
    ModeComparison,
    OracleStub,
    RolloutReport,
    compare_modes,
    evaluate,
    mpjpe,
    rollout_sample,
)
from .rounds import (
    RoundLayout,
    RoundLayoutError,
    RoundSample,
    TestSample,
    TrainSample,
    extract_rounds,
    make_test_samples,
    make_train_samples,
)
from .skeleton import SkeletonError, SkeletonSpec, chain_skeleton, default_skeleton
from .synthetic import SyntheticConfig, SyntheticConfigError, generate_synthetic
from .training import (
    LossBreakdown,
    TrainConfig,
    TrainingError,
    gradient_check,
    round_loss,
    train,
    train_sample_loss,
)

__version__ = "0.1.0"

__all__ = [
    "BundleConfig",
    "ConsecutiveMotionPredictor",
    "DctGcnBaseline",
    "Deviation",
    "DeviationError",
    "ExperimentSpec",
    "GruDeviationEncoder",
    "LossBreakdown",
    "MixerBaseline",
    "MlpDeviationEncoder",
    "ModeComparison",
    "MotionParseError",
    "MotionSequence",
    "OracleStub",
    "PredictorBundle",
    "RolloutReport",
    "RoundLayout",
    "RoundLayoutError",
    "RoundSample",
    "SkeletonError",
    "SkeletonSpec",
    "SpecError",
    "SyntheticConfig",
    "SyntheticConfigError",
    "TestSample",
    "TrainConfig",
    "TrainSample",
    "TrainingError",
    "chain_skeleton",
    "compare_modes",
    "compute_deviation",
    "default_skeleton",
    "derive_seed",
    "evaluate",
    "generate_synthetic",
    "gradient_check",
    "load_checkpoint",
    "load_motion",
    "load_spec",
    "make_test_samples",
    "make_train_samples",
    "mpjpe",
    "parse_spec",
    "rollout_sample",
    "round_loss",
    "save_checkpoint",
    "save_motion",
    "train",
    "train_sample_loss",
    "velocity",
    "zero_deviation",
]
