"""Scikit-learn style facade over the bundle/training/rollout stack.

ConsecutiveMotionPredictor is a thin estimator: ``fit`` cuts sequences
into two-round pairs and trains, ``predict`` forecasts one round per
observed window, ``rollout``/``score`` run the multi-round evaluation.
All heavy lifting stays in the functional modules; this class only holds
hyperparameters (sklearn convention: set in __init__, validated in fit).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .config import derive_seed
from .motion import MotionSequence
from .nets.bundle import BundleConfig, PredictorBundle
from .rollout import RolloutReport, evaluate
from .rounds import RoundLayout, TestSample, make_test_samples, make_train_samples
from .skeleton import skeleton_for_pose_dim
from .training import TrainConfig, train
from .validation import check_pose_array, check_sequence_list


class ConsecutiveMotionPredictor(BaseEstimator):
    """Round-by-round motion forecaster with optional deviation feedback.

    Parameters mirror the bundle, layout, and training configs. ``fit``
    expects a list of (frames, pose_dim) arrays or MotionSequence objects,
    each long enough for at least one two-round training pair
    (n_observed + 2 * n_predicted frames).
    """

    def __init__(self, n_observed: int = 10, n_predicted: int = 10,
                 max_rounds: int = 10, baseline: str = "mixer",
                 feedback: str | None = "mlp", wiring: str = "inserted",
                 width: int = 64, mixer_blocks: int = 2, feature_dim: int = 32,
                 gcn_blocks: int = 3, feedback_hidden: int = 64,
                 gru_hidden: int = 256, learning_rate: float | None = None,
                 epochs: int = 50, batch_size: int = 32,
                 stride: int | None = None, center_on_root: bool = True,
                 detach_deviation: bool = False, random_state: int = 0):
        self.n_observed = n_observed
        self.n_predicted = n_predicted
        self.max_rounds = max_rounds
        self.baseline = baseline
        self.feedback = feedback
        self.wiring = wiring
        self.width = width
        self.mixer_blocks = mixer_blocks
        self.feature_dim = feature_dim
        self.gcn_blocks = gcn_blocks
        self.feedback_hidden = feedback_hidden
        self.gru_hidden = gru_hidden
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.stride = stride
        self.center_on_root = center_on_root
        self.detach_deviation = detach_deviation
        self.random_state = random_state

    def _layout(self) -> RoundLayout:
        return RoundLayout(n_observed=self.n_observed,
                           n_predicted=self.n_predicted)

    def fit(self, X, y=None) -> "ConsecutiveMotionPredictor":
        """Train on a list of pose sequences; y is ignored (present for API)."""
        layout = self._layout()
        arrays = check_sequence_list(X, min_frames=layout.frames_needed(2))
        pose_dim = arrays[0].shape[1]
        skeleton = skeleton_for_pose_dim(pose_dim)
        feedback = None if self.feedback in (None, "none") else self.feedback

        sequences = [MotionSequence(skeleton=skeleton, frames=a, fps=1.0)
                     for a in arrays]
        samples = make_train_samples(sequences, layout, stride=self.stride)
        bundle = PredictorBundle(BundleConfig(
            n_observed=self.n_observed, n_predicted=self.n_predicted,
            pose_dim=pose_dim, baseline=self.baseline, feedback=feedback,
            wiring=self.wiring, width=self.width,
            mixer_blocks=self.mixer_blocks, feature_dim=self.feature_dim,
            gcn_blocks=self.gcn_blocks, feedback_hidden=self.feedback_hidden,
            gru_hidden=self.gru_hidden,
            init_seed=derive_seed(self.random_state, "init"),
        ))
        cfg = TrainConfig(
            learning_rate=self.learning_rate, epochs=self.epochs,
            batch_size=self.batch_size,
            seed=derive_seed(self.random_state, "shuffle"),
            center_on_root=self.center_on_root,
            detach_deviation=self.detach_deviation,
        )
        bundle, history = train(bundle, samples, cfg, skeleton)

        self.bundle_ = bundle
        self.layout_ = layout
        self.skeleton_ = skeleton
        self.history_ = history
        self.n_features_in_ = pose_dim
        return self

    def _check_fitted(self):
        if not hasattr(self, "bundle_"):
            raise RuntimeError("this predictor has not been fitted yet")

    def predict(self, X, deviations=None) -> np.ndarray:
        """Forecast one round per observed window.

        X is one (n_observed, K) window or a list of them; ``deviations``
        optionally carries one (n_predicted - 1, K) signal per window
        (None entries bypass the branch). Returns (n_windows, T, K).
        """
        self._check_fitted()
        if isinstance(X, np.ndarray) and X.ndim == 2:
            X = [X]
        windows = [check_pose_array(w, name=f"X[{i}]", n_frames=self.n_observed,
                                    pose_dim=self.n_features_in_)
                   for i, w in enumerate(X)]
        if deviations is None:
            deviations = [None] * len(windows)
        if len(deviations) != len(windows):
            raise ValueError(
                f"got {len(windows)} windows but {len(deviations)} deviations"
            )
        preds = [self.bundle_.predict_numpy(w, d)
                 for w, d in zip(windows, deviations)]
        return np.stack(preds)

    def _test_samples(self, X) -> list[TestSample]:
        layout = self.layout_
        arrays = check_sequence_list(X, min_frames=layout.frames_needed(2),
                                     pose_dim=self.n_features_in_)
        max_r = min(self.max_rounds,
                    min(layout.rounds_available(a.shape[0]) for a in arrays))
        if max_r < 2:
            raise ValueError(
                f"sequences too short for a multi-round rollout "
                f"(need {layout.frames_needed(2)} frames for 2 rounds)"
            )
        sequences = [MotionSequence(skeleton=self.skeleton_, frames=a, fps=1.0)
                     for a in arrays]
        return make_test_samples(sequences, layout, max_r=max_r)

    def rollout(self, X, mode: str = "deviation_on",
                testpoints: list[int] | None = None) -> RolloutReport:
        """Multi-round evaluation over full sequences."""
        self._check_fitted()
        if testpoints is None:
            testpoints = [self.n_predicted]
        return evaluate(self.bundle_, self._test_samples(X), testpoints, mode,
                        self.skeleton_)

    def score(self, X, y=None) -> float:
        """Negative mean per-round error at the horizon (higher is better)."""
        report = self.rollout(X, mode="deviation_on")
        return -float(np.mean([report.per_round_avg[r] for r in report.rounds]))
