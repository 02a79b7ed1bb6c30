"""Experiment specs: flat "key = value" files plus seed derivation.

A spec file is UTF-8 text, one assignment per line, '#' comments and
blank lines allowed. Keys mirror the config dataclasses they feed;
unknown or duplicate keys are errors so a spec can never silently drift.
All randomness flows from the single ``seed`` through named sub-seeds,
so a spec file fully determines every artifact a command writes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace

import numpy as np

from .nets.bundle import BundleConfig
from .rounds import RoundLayout
from .skeleton import SkeletonSpec, default_skeleton
from .synthetic import SyntheticConfig
from .training import TrainConfig

DATA_SOURCES = ("synthetic", "files")


class SpecError(ValueError):
    """Raised for unparseable or inconsistent experiment specs."""


def derive_seed(master: int, name: str) -> int:
    """A stable sub-seed for ``name``, independent across names."""
    digest = hashlib.sha256(f"{master}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one experiment needs, in declaration order by concern."""

    # identity and outputs
    seed: int = 0
    output_dir: str = "runs/exp"
    # data source
    data_source: str = "synthetic"
    motion_glob: str | None = None
    test_glob: str | None = None
    n_train_sequences: int = 200
    n_test_sequences: int = 50
    sequence_length: int = 120
    fps: float = 25.0
    motion_mode: str = "periodic"
    base_frequency: float = 3.0
    frequency_jitter: float = 0.3
    transition_frame: int | None = None
    # round layout
    n_observed: int = 10
    n_predicted: int = 10
    max_rounds: int = 10
    stride: int | None = None
    # predictor bundle
    baseline: str = "mixer"
    feedback: str = "mlp"
    wiring: str = "inserted"
    width: int = 64
    mixer_blocks: int = 2
    feature_dim: int = 32
    gcn_blocks: int = 3
    feedback_hidden: int = 64
    gru_hidden: int = 256
    # training
    learning_rate: float | None = None
    epochs: int = 50
    batch_size: int = 32
    center_on_root: bool = True
    detach_deviation: bool = False
    # evaluation
    testpoints: tuple[int, ...] = (2, 4, 8, 10)

    def __post_init__(self):
        if self.data_source not in DATA_SOURCES:
            raise SpecError(
                f"data_source must be one of {DATA_SOURCES}, got {self.data_source!r}"
            )
        if self.data_source == "files" and self.motion_glob is None:
            raise SpecError("data_source=files requires motion_glob")
        if not self.testpoints:
            raise SpecError("testpoints must not be empty")
        for frame in self.testpoints:
            if not 1 <= frame <= self.n_predicted:
                raise SpecError(
                    f"testpoint {frame} outside 1..{self.n_predicted}"
                )
        if self.transition_frame is not None:
            if self.motion_mode != "transition":
                raise SpecError("transition_frame requires motion_mode=transition")
            lo = self.n_observed + self.n_predicted
            hi = self.sequence_length - self.n_observed - self.n_predicted
            if not lo < self.transition_frame < hi:
                raise SpecError(
                    f"transition_frame {self.transition_frame} must lie strictly "
                    f"between {lo} and {hi} so transitions fall inside rollouts"
                )

    def skeleton(self) -> SkeletonSpec:
        return default_skeleton()

    def layout(self) -> RoundLayout:
        return RoundLayout(n_observed=self.n_observed, n_predicted=self.n_predicted)

    def feedback_or_none(self) -> str | None:
        return None if self.feedback == "none" else self.feedback

    def bundle_config(self, pose_dim: int) -> BundleConfig:
        return BundleConfig(
            n_observed=self.n_observed, n_predicted=self.n_predicted,
            pose_dim=pose_dim, baseline=self.baseline,
            feedback=self.feedback_or_none(), wiring=self.wiring,
            width=self.width, mixer_blocks=self.mixer_blocks,
            feature_dim=self.feature_dim, gcn_blocks=self.gcn_blocks,
            feedback_hidden=self.feedback_hidden, gru_hidden=self.gru_hidden,
            init_seed=derive_seed(self.seed, "init"),
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate, epochs=self.epochs,
            batch_size=self.batch_size, seed=derive_seed(self.seed, "shuffle"),
            center_on_root=self.center_on_root,
            detach_deviation=self.detach_deviation,
        )

    def synthetic_config(self, split: str, index: int) -> SyntheticConfig:
        """Per-sequence generator recipe keyed by split name and index.

        In transition mode with no explicit transition_frame, each
        sequence draws its own switch point so action changes land in
        different rounds, always strictly inside the evaluated rollout
        (between frames N+T and min(L-N-T, N + max_rounds*T)).
        """
        seq_seed = derive_seed(self.seed, f"data-{split}-{index}")
        transition = None
        if self.motion_mode == "transition":
            transition = self.transition_frame
            if transition is None:
                rng = np.random.default_rng(
                    derive_seed(self.seed, f"data-{split}-{index}-switch")
                )
                lo = self.n_observed + self.n_predicted + 1
                hi = min(self.sequence_length - self.n_observed - self.n_predicted,
                         self.n_observed + self.max_rounds * self.n_predicted) - 1
                if hi < lo:
                    raise SpecError(
                        f"no room for a transition inside the rollout: "
                        f"window [{lo}, {hi}] is empty for "
                        f"sequence_length={self.sequence_length}"
                    )
                transition = int(rng.integers(lo, hi + 1))
        return SyntheticConfig(
            skeleton=self.skeleton(), length=self.sequence_length, seed=seq_seed,
            motion_mode=self.motion_mode, base_frequencies=self.base_frequency,
            frequency_jitter=self.frequency_jitter, transition_frame=transition,
            fps=self.fps, label=self.motion_mode,
        )


def _to_int(text: str) -> int:
    return int(text)


def _to_float(text: str) -> float:
    return float(text)


def _to_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    raise ValueError(f"expected true or false, got {text!r}")


def _to_str(text: str) -> str:
    return text


def _optional(converter):
    def convert(text: str):
        return None if text.lower() == "none" else converter(text)
    return convert


def _to_testpoints(text: str) -> tuple[int, ...]:
    return tuple(int(part.strip()) for part in text.split(","))


_CONVERTERS = {
    "seed": _to_int,
    "output_dir": _to_str,
    "data_source": _to_str,
    "motion_glob": _optional(_to_str),
    "test_glob": _optional(_to_str),
    "n_train_sequences": _to_int,
    "n_test_sequences": _to_int,
    "sequence_length": _to_int,
    "fps": _to_float,
    "motion_mode": _to_str,
    "base_frequency": _to_float,
    "frequency_jitter": _to_float,
    "transition_frame": _optional(_to_int),
    "n_observed": _to_int,
    "n_predicted": _to_int,
    "max_rounds": _to_int,
    "stride": _optional(_to_int),
    "baseline": _to_str,
    "feedback": _to_str,
    "wiring": _to_str,
    "width": _to_int,
    "mixer_blocks": _to_int,
    "feature_dim": _to_int,
    "gcn_blocks": _to_int,
    "feedback_hidden": _to_int,
    "gru_hidden": _to_int,
    "learning_rate": _optional(_to_float),
    "epochs": _to_int,
    "batch_size": _to_int,
    "center_on_root": _to_bool,
    "detach_deviation": _to_bool,
    "testpoints": _to_testpoints,
}

assert set(_CONVERTERS) == {f.name for f in fields(ExperimentSpec)}


def parse_spec(text: str, base: ExperimentSpec | None = None) -> ExperimentSpec:
    """Parse spec text over ``base`` (or the defaults)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SpecError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = key.strip(), value.strip()
        if key not in _CONVERTERS:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise SpecError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    try:
        return replace(base or ExperimentSpec(), **values)
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def load_spec(path) -> ExperimentSpec:
    with open(path, encoding="utf-8") as handle:
        return parse_spec(handle.read())


def apply_overrides(spec: ExperimentSpec, overrides: list[str]) -> ExperimentSpec:
    """Apply ``key=value`` strings (CLI --set) on top of a parsed spec."""
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise SpecError(f"override must look like key=value, got {item!r}")
        spec = parse_spec(f"{key.strip()} = {value.strip()}", base=spec)
    return spec
