"""Segmentation accuracy against manual ground truth.

The score pairs detected with manual segments in temporal order and
averages ``1 - |len_detected - len_manual| / len_manual`` over the first
``min(counts)`` pairs.  A perfect match scores 1; the score is unbounded
below and reported as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class GroundTruth:
    """Manually marked repetition boundaries for one sequence."""

    boundaries: list
    n_frames: int
    source: str = ""

    def __post_init__(self):
        b = list(self.boundaries)
        if len(b) < 2:
            raise InputError("ground truth needs at least two boundaries")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise InputError("ground-truth boundaries must strictly increase")
        if b[0] < 0 or b[-1] > self.n_frames:
            raise InputError("ground-truth boundaries outside [0, n_frames]")
        object.__setattr__(self, "boundaries", b)

    def segments(self) -> list:
        b = self.boundaries
        return [(b[i], b[i + 1]) for i in range(len(b) - 1)]


@dataclass(frozen=True)
class AccuracyReport:
    alpha: float | None          # None when no detected segments exist
    undefined: bool
    compared: int                # number of paired segments
    errors: list                 # per-pair |length difference|, frames
    manual_lengths: list
    detected_count: int
    manual_count: int


def _segments_of(detected):
    segs = getattr(detected, "segments", detected)
    return [(int(s), int(e)) for s, e in segs]


def accuracy(detected, truth: GroundTruth) -> AccuracyReport:
    """Score a segmentation result (anything with ``.segments`` or a plain
    list of (start, end) pairs) against manual truth."""
    det = _segments_of(detected)
    manual = truth.segments()
    if not manual:
        raise InputError("ground truth has no segments")
    if not det:
        return AccuracyReport(alpha=None, undefined=True, compared=0, errors=[],
                              manual_lengths=[e - s for s, e in manual],
                              detected_count=0, manual_count=len(manual))
    d = min(len(det), len(manual))
    errors = []
    terms = []
    man_lengths = []
    for i in range(d):
        ld = det[i][1] - det[i][0]
        lm = manual[i][1] - manual[i][0]
        e = abs(ld - lm)
        errors.append(e)
        man_lengths.append(lm)
        terms.append(1.0 - e / lm)
    return AccuracyReport(alpha=float(np.mean(terms)), undefined=False,
                          compared=d, errors=errors, manual_lengths=man_lengths,
                          detected_count=len(det), manual_count=len(manual))


def format_table(rows) -> str:
    """CSV accuracy table with a final Average row.

    ``rows`` is a list of (name, AccuracyReport).  Undefined scores print
    as ``nan`` and are excluded from the average.
    """
    lines = ["sequence,alpha,detected_segments,manual_segments"]
    defined = []
    for name, report in rows:
        if report.undefined:
            alpha_text = "nan"
        else:
            alpha_text = repr(report.alpha)
            defined.append(report.alpha)
        lines.append(f"{name},{alpha_text},{report.detected_count},{report.manual_count}")
    avg = repr(float(np.mean(defined))) if defined else "nan"
    total_det = sum(r.detected_count for _, r in rows)
    total_man = sum(r.manual_count for _, r in rows)
    lines.append(f"Average,{avg},{total_det},{total_man}")
    return "\n".join(lines) + "\n"


def batch_evaluate(manifest_path, config=None) -> str:
    """Segment every sequence in a manifest and tabulate the scores.

    The manifest is a CSV with a ``sequence,truth`` header and one row of
    file paths (relative to the manifest) per sequence.
    """
    import csv
    from pathlib import Path

    from .pipeline import run_pipeline, PipelineConfig
    from .sequence import load_sequence, load_truth

    base = Path(manifest_path).parent
    rows = []
    with open(manifest_path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"sequence", "truth"} <= set(reader.fieldnames):
            raise InputError(f"{manifest_path}: manifest needs a 'sequence,truth' header")
        entries = list(reader)
    if not entries:
        raise InputError(f"{manifest_path}: manifest lists no sequences")
    cfg = config or PipelineConfig()
    for entry in entries:
        seq_path = base / entry["sequence"]
        truth_path = base / entry["truth"]
        seq = load_sequence(seq_path)
        boundaries, n_frames, source = load_truth(truth_path)
        truth = GroundTruth(boundaries=boundaries, n_frames=n_frames, source=source)
        result = run_pipeline(seq, cfg)
        rows.append((entry["sequence"], accuracy(result, truth)))
    return format_table(rows)
