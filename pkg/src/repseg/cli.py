"""Command-line interface.

Subcommands: ``segment`` (run the pipeline on a sequence file),
``evaluate`` (batch accuracy table from a manifest), ``synth`` (render a
motion script), ``spectrum`` (kinematic-parameter spectra as CSV).  Exit
codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import InputError, NumericalError, RepsegError, StageError
from .evaluation import GroundTruth, accuracy, batch_evaluate
from .frequency import compute_spectra, attach_primary
from .pipeline import (PipelineConfig, SegmentationResult, run_pipeline,
                       save_result, spectra_csv, candidates_csv, clusters_csv,
                       timeline_csv, PipelineTrace)
from .sequence import load_sequence, load_truth, save_sequence, save_truth
from .synth import MotionScript, NoiseProfile, generate
from .ukf import four_pass_filter

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_json(Path(path).read_text())


def _cmd_segment(args) -> int:
    cfg = _load_config(args.config)
    seq = load_sequence(args.sequence)
    wants_trace = bool(args.dump_candidates or args.dump_clusters
                       or args.dump_spectra)
    result = run_pipeline(seq, cfg, keep_trace=wants_trace)

    if args.out:
        save_result(result, args.out, include_timing=args.timing)
    if args.dump_spectra:
        Path(args.dump_spectra).write_text(spectra_csv(result))
    if args.dump_candidates:
        Path(args.dump_candidates).write_text(candidates_csv(result))
    if args.dump_clusters:
        Path(args.dump_clusters).write_text(clusters_csv(result))

    truth = None
    if args.truth:
        boundaries, n_frames, source = load_truth(args.truth)
        truth = GroundTruth(boundaries=boundaries, n_frames=n_frames, source=source)
    if args.dump_timeline:
        Path(args.dump_timeline).write_text(timeline_csv(result, truth))

    print(f"outcome: {result.outcome}")
    if result.outcome == "ok":
        print(f"primary bin: {result.primary_bin}")
        print(f"selected parameters: {' '.join(result.selected)}")
        print(f"boundaries: {' '.join(str(b) for b in result.boundaries)}")
        print(f"segments: {len(result.segments)}")
        if truth is not None:
            report = accuracy(result, truth)
            alpha = "nan" if report.undefined else repr(report.alpha)
            print(f"accuracy: {alpha}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    cfg = _load_config(args.config)
    table = batch_evaluate(args.manifest, cfg)
    if args.out:
        Path(args.out).write_text(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK


def _cmd_synth(args) -> int:
    script = MotionScript.from_json(Path(args.script).read_text())
    if args.profile:
        noise = NoiseProfile.named(args.profile)
    else:
        payload_sigma = args.sigma if args.sigma is not None else 0.0
        noise = NoiseProfile(sigma=payload_sigma,
                             rate=args.rate or script.rate, label="custom")
    seq, truth = generate(script, noise)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    label = noise.label or "custom"
    seq_path = out_dir / f"{script.name}_{label}.seq"
    truth_path = out_dir / f"{script.name}_{label}.truth"
    save_sequence(seq, seq_path)
    save_truth(truth.boundaries, truth.n_frames, truth_path, source=seq.source)
    print(f"wrote {seq_path}")
    print(f"wrote {truth_path}")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    cfg = _load_config(args.config)
    seq = load_sequence(args.sequence)
    filtered = four_pass_filter(seq, cfg.ukf)
    spectra = attach_primary(compute_spectra(filtered.tracks))
    result = SegmentationResult(
        outcome="spectra", n_frames=seq.n_frames, rate=seq.rate,
        source=seq.source, config=cfg.to_dict(),
        primary_bin=spectra.primary_bin,
        trace=PipelineTrace(tracks=filtered.tracks, spectra=spectra))
    csv_text = spectra_csv(result)
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repseg",
        description="Segment repetitive skeletal motion into repetitions.")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one sequence file")
    seg.add_argument("sequence")
    seg.add_argument("--config", help="pipeline config JSON")
    seg.add_argument("--truth", help="ground-truth file for an accuracy line")
    seg.add_argument("--out", help="write the result JSON here")
    seg.add_argument("--timing", action="store_true",
                     help="include stage timings in the result file")
    seg.add_argument("--dump-spectra", metavar="CSV")
    seg.add_argument("--dump-candidates", metavar="CSV")
    seg.add_argument("--dump-clusters", metavar="CSV")
    seg.add_argument("--dump-timeline", metavar="CSV")
    seg.set_defaults(fn=_cmd_segment)

    ev = sub.add_parser("evaluate", help="score every sequence in a manifest")
    ev.add_argument("manifest", help="CSV with a sequence,truth header")
    ev.add_argument("--config")
    ev.add_argument("--out", help="write the table here instead of stdout")
    ev.set_defaults(fn=_cmd_evaluate)

    sy = sub.add_parser("synth", help="render a motion script to files")
    sy.add_argument("script", help="motion-script JSON")
    sy.add_argument("--profile", choices=["mocap", "kinect"])
    sy.add_argument("--sigma", type=float, help="custom noise std-dev, metres")
    sy.add_argument("--rate", type=float, help="custom output rate, Hz")
    sy.add_argument("--out-dir", default=".")
    sy.set_defaults(fn=_cmd_synth)

    sp = sub.add_parser("spectrum", help="parameter spectra as CSV")
    sp.add_argument("sequence")
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.set_defaults(fn=_cmd_spectrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except StageError as exc:
        code = EXIT_NUMERICAL if isinstance(exc.cause, NumericalError) else EXIT_INPUT
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (InputError, RepsegError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
