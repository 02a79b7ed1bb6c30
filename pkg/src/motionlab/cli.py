"""Config-driven experiment runner.

One entry point with four subcommands: ``generate`` synthesizes motion
files, ``train`` fits a predictor, ``evaluate`` rolls it out with and
without deviation feedback, ``ablate`` compares the two feedback wirings
against the isolated baseline. Every command is driven by a spec file;
flags only override spec fields, so spec + seed reproduce every artifact
byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import glob as globmod
import os
import shutil
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import torch

from .config import ExperimentSpec, SpecError, apply_overrides, load_spec
from .motion import MotionSequence, load_motion, save_motion
from .nets.bundle import PredictorBundle, load_checkpoint, save_checkpoint
from .rollout import (
    OracleStub,
    RolloutReport,
    evaluate,
    write_plot_csv,
    write_report_csv,
)
from .rounds import make_test_samples, make_train_samples
from .synthetic import generate_synthetic
from .training import train

OUTPUT_ROOT_ENV = "MOTIONLAB_OUTPUT_ROOT"


class CliError(RuntimeError):
    """Raised for runner-level failures; surfaces as exit status 1."""


def resolve_output_dir(spec: ExperimentSpec) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
    return root / spec.output_dir


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_sequences(paths: list[str]) -> list[MotionSequence]:
    sequences = [load_motion(p) for p in paths]
    widths = {seq.pose_dim for seq in sequences}
    if len(widths) > 1:
        raise CliError(f"mixed pose widths in data: {sorted(widths)}")
    return sequences


def _train_sequences(spec: ExperimentSpec, out: Path) -> list[MotionSequence]:
    if spec.data_source == "synthetic":
        paths = sorted(globmod.glob(str(out / "data" / "train" / "*.txt")))
        if not paths:
            raise CliError(
                f"no training data under {out / 'data' / 'train'}; run generate first"
            )
    else:
        paths = sorted(globmod.glob(spec.motion_glob))
        if not paths:
            raise CliError(f"motion_glob matched no files: {spec.motion_glob}")
    return _load_sequences(paths)


def _test_sequences(spec: ExperimentSpec, out: Path) -> list[MotionSequence]:
    if spec.data_source == "synthetic":
        paths = sorted(globmod.glob(str(out / "data" / "test" / "*.txt")))
        if not paths:
            raise CliError(
                f"no test data under {out / 'data' / 'test'}; run generate first"
            )
    else:
        if spec.test_glob is None:
            raise CliError("data_source=files needs test_glob for evaluation")
        paths = sorted(globmod.glob(spec.test_glob))
        if not paths:
            raise CliError(f"test_glob matched no files: {spec.test_glob}")
    return _load_sequences(paths)


def cmd_generate(spec: ExperimentSpec, force: bool = False) -> None:
    if spec.data_source != "synthetic":
        raise CliError("generate requires data_source=synthetic")
    layout = spec.layout()
    if spec.sequence_length < layout.frames_needed(2):
        raise CliError(
            f"sequence_length {spec.sequence_length} too short for a training "
            f"pair (needs {layout.frames_needed(2)})"
        )
    if spec.n_test_sequences > 0:
        needed = layout.frames_needed(spec.max_rounds)
        if spec.sequence_length < needed:
            raise CliError(
                f"sequence_length {spec.sequence_length} too short for "
                f"{spec.max_rounds}-round rollout (needs {needed})"
            )

    data_dir = resolve_output_dir(spec) / "data"
    if data_dir.exists() and any(data_dir.iterdir()):
        if not force:
            raise CliError(
                f"{data_dir} already contains data; pass --force to overwrite"
            )
        shutil.rmtree(data_dir)

    manifest_rows = []
    counts = {"train": spec.n_train_sequences, "test": spec.n_test_sequences}
    for split, count in counts.items():
        split_dir = data_dir / split
        split_dir.mkdir(parents=True, exist_ok=True)
        for i in range(count):
            cfg = spec.synthetic_config(split, i)
            seq = generate_synthetic(cfg)
            name = f"{split}/seq_{i:04d}.txt"
            save_motion(seq, data_dir / name)
            transition = "" if cfg.transition_frame is None else cfg.transition_frame
            manifest_rows.append([name, cfg.seed, cfg.motion_mode, transition,
                                  cfg.label or ""])
    _write_csv(data_dir / "manifest.csv",
               ["file", "seed", "motion_mode", "transition_frame", "label"],
               manifest_rows)
    print(f"wrote {counts['train']} train + {counts['test']} test sequences "
          f"to {data_dir}")


def cmd_train(spec: ExperimentSpec, out_override: str | None = None) -> None:
    out = Path(out_override) if out_override else resolve_output_dir(spec)
    sequences = _train_sequences(spec, resolve_output_dir(spec))
    skeleton = sequences[0].skeleton
    layout = spec.layout()
    samples = make_train_samples(sequences, layout, stride=spec.stride)
    if not samples:
        raise CliError(
            f"no training pairs: sequences shorter than {layout.frames_needed(2)} frames"
        )

    bundle = PredictorBundle(spec.bundle_config(skeleton.pose_dim))
    bundle, history = train(bundle, samples, spec.train_config(), skeleton)

    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(bundle, out / "checkpoint.npz")
    _write_csv(out / "history.csv",
               ["epoch", "loss_round1", "loss_round2", "total"],
               [[e, repr(h.loss_round1), repr(h.loss_round2), repr(h.total)]
                for e, h in enumerate(history, start=1)])
    final = history[-1]
    print(f"trained {spec.baseline}+{spec.feedback} on {len(samples)} pairs "
          f"for {spec.epochs} epochs")
    print(f"final loss: round1={final.loss_round1!r} round2={final.loss_round2!r} "
          f"total={final.total!r}")


def _print_report(report: RolloutReport, testpoints: tuple[int, ...]) -> None:
    print(f"mode {report.mode} (n={report.n_samples}):")
    header = "round " + "".join(f"f{frame:<9}" for frame in testpoints) + "avg"
    print(header)
    for r in report.rounds:
        cells = "".join(f"{value:<10.6f}" for _, value in report.per_round_mpjpe[r])
        print(f"{r:<6}{cells}{report.per_round_avg[r]:.6f}")


def _improvement(on: RolloutReport, off: RolloutReport) -> dict[int, float]:
    out = {}
    for r in on.rounds:
        off_avg = off.per_round_avg[r]
        out[r] = 0.0 if off_avg == 0 else (off_avg - on.per_round_avg[r]) / off_avg
    return out


def cmd_evaluate(spec: ExperimentSpec, checkpoint: str | None,
                 oracle_stub: bool = False) -> None:
    out = resolve_output_dir(spec)
    sequences = _test_sequences(spec, out)
    skeleton = sequences[0].skeleton
    layout = spec.layout()
    samples = make_test_samples(sequences, layout, max_r=spec.max_rounds)
    if not samples:
        raise CliError(
            f"no test sequence long enough for {spec.max_rounds} rounds "
            f"(needs {layout.frames_needed(spec.max_rounds)} frames)"
        )

    if oracle_stub:
        predictor = OracleStub.for_samples(samples)
    else:
        bundle = load_checkpoint(checkpoint)
        got = (bundle.config.n_observed, bundle.config.n_predicted,
               bundle.config.pose_dim)
        want = (spec.n_observed, spec.n_predicted, skeleton.pose_dim)
        if got != want:
            raise CliError(
                f"checkpoint layout (N={got[0]}, T={got[1]}, K={got[2]}) does not "
                f"match spec/data (N={want[0]}, T={want[1]}, K={want[2]})"
            )
        predictor = bundle

    testpoints = list(spec.testpoints)
    on = evaluate(predictor, samples, testpoints, "deviation_on", skeleton)
    off = evaluate(predictor, samples, testpoints, "deviation_off", skeleton)

    groups = [("all", on), ("all", off)]
    labels = sorted({s.label for s in samples if s.label is not None})
    if len(labels) > 1:
        for label in labels:
            subset = [s for s in samples if s.label == label]
            groups.append((label, evaluate(predictor, subset, testpoints,
                                           "deviation_on", skeleton)))
            groups.append((label, evaluate(predictor, subset, testpoints,
                                           "deviation_off", skeleton)))

    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(groups, out / "report.csv")
    write_plot_csv(on, off, out / "plot.csv")

    _print_report(on, spec.testpoints)
    _print_report(off, spec.testpoints)
    improvement = _improvement(on, off)
    line = " ".join(f"r{r} {improvement[r]:+.2%}" for r in on.rounds)
    print(f"improvement (off->on): {line}")
    print(f"wrote {out / 'report.csv'} and {out / 'plot.csv'}")


ABLATION_WIRINGS = ("inserted", "corrective", "isolated")


def cmd_ablate(spec: ExperimentSpec) -> None:
    if spec.feedback_or_none() is None:
        raise CliError("ablate needs a deviation branch; set feedback to mlp or gru")
    out = resolve_output_dir(spec)
    train_seqs = _train_sequences(spec, out)
    test_seqs = _test_sequences(spec, out)
    skeleton = train_seqs[0].skeleton
    layout = spec.layout()
    train_samples = make_train_samples(train_seqs, layout, stride=spec.stride)
    test_samples = make_test_samples(test_seqs, layout, max_r=spec.max_rounds)
    if not test_samples:
        raise CliError(
            f"no test sequence long enough for {spec.max_rounds} rounds "
            f"(needs {layout.frames_needed(spec.max_rounds)} frames)"
        )

    base = spec.bundle_config(skeleton.pose_dim)
    configs = {
        "inserted": replace(base, wiring="inserted"),
        "corrective": replace(base, wiring="corrective"),
        "isolated": base.without_feedback(),
    }

    # Same init seed must give identical baselines: the branch is built
    # after the baseline, so round-1 bypass predictions agree bit-exactly.
    probe = test_samples[0].rounds[0].observed
    fresh = {name: PredictorBundle(cfg) for name, cfg in configs.items()}
    reference = fresh["inserted"].predict_numpy(probe)
    for name, bundle in fresh.items():
        if not np.array_equal(bundle.predict_numpy(probe), reference):
            raise CliError(
                f"pre-training round-1 predictions diverge for {name}; "
                "shared-seed initialization is broken"
            )

    out.mkdir(parents=True, exist_ok=True)
    bundles = {}
    for name in ABLATION_WIRINGS:
        path = out / f"ablate_{name}.npz"
        if path.exists():
            bundles[name] = load_checkpoint(path)
        else:
            bundle, _ = train(fresh[name], train_samples, spec.train_config(),
                              skeleton)
            save_checkpoint(bundle, path)
            bundles[name] = bundle

    testpoints = list(spec.testpoints)
    reports = {}
    for name, bundle in bundles.items():
        mode = "deviation_off" if name == "isolated" else "deviation_on"
        reports[name] = evaluate(bundle, test_samples, testpoints, mode, skeleton)

    rows = []
    for name in ABLATION_WIRINGS:
        report = reports[name]
        for r in report.rounds:
            rows.append([name, r, repr(report.per_round_avg[r]), report.n_samples])
    _write_csv(out / "ablation.csv", ["wiring", "round", "avg_mpjpe", "n_samples"],
               rows)

    r2 = {name: reports[name].per_round_avg[2] for name in ABLATION_WIRINGS}
    print("round-2 average error: "
          + "  ".join(f"{name}={r2[name]:.6f}" for name in ABLATION_WIRINGS))
    print(f"wrote {out / 'ablation.csv'}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motionlab",
        description="Consecutive motion prediction experiments with deviation feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--spec", required=True, help="experiment spec file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a spec field (repeatable)")

    p = sub.add_parser("generate", help="write synthetic motion files")
    common(p)
    p.add_argument("--force", action="store_true",
                   help="overwrite an existing data directory")

    p = sub.add_parser("train", help="train a predictor from the spec")
    common(p)
    p.add_argument("--out", help="output directory override")

    p = sub.add_parser("evaluate", help="multi-round rollout evaluation")
    common(p)
    p.add_argument("--checkpoint", help="trained checkpoint (.npz)")
    p.add_argument("--oracle-stub", action="store_true",
                   help="score a ground-truth stub instead of a checkpoint")

    p = sub.add_parser("ablate", help="compare inserted, corrective, and isolated")
    common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "evaluate" and not args.oracle_stub and not args.checkpoint:
        print("error: evaluate needs --checkpoint (or --oracle-stub)",
              file=sys.stderr)
        return 1
    torch.set_num_threads(1)
    try:
        spec = load_spec(args.spec)
        spec = apply_overrides(spec, args.set)
        if args.command == "generate":
            cmd_generate(spec, force=args.force)
        elif args.command == "train":
            cmd_train(spec, out_override=args.out)
        elif args.command == "evaluate":
            cmd_evaluate(spec, checkpoint=args.checkpoint,
                         oracle_stub=args.oracle_stub)
        else:
            cmd_ablate(spec)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
