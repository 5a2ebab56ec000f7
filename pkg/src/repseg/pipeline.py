"""End-to-end segmentation pipeline and result serialisation.

Stage order: four-pass filtering -> spectra / primary bin / representative
selection -> band-pass / velocity / candidate detection -> adaptive
k-means / boundary selection / segments.  A sequence without usable
periodic content is a regular outcome ("no-periodicity"), not an error.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import clustering, detection, frequency, ukf
from .errors import InputError, NoPeriodicityError, RepsegError, StageError
from .evaluation import GroundTruth
from .sequence import SkeletonSequence

RESULT_MAGIC = "repseg-result-v1"
# a primary bin below this has no room for a band-pass and cannot mark
# repetitions; such sequences are reported as non-periodic
MIN_PRIMARY_BIN = 2


@dataclass(frozen=True)
class PipelineConfig:
    ukf: ukf.UkfConfig = field(default_factory=ukf.UkfConfig)
    power_threshold: float = 0.9      # representative-selection power share
    band_width: float = detection.DEFAULT_WIDTH
    filter_order: int = detection.DEFAULT_ORDER
    k_cap: int = clustering.MAX_K
    seed: int = 0
    select_all: bool = False          # skip representative selection (ablation)
    full_sweep: bool = False          # scan every K instead of early stop

    def __post_init__(self):
        if not 0 < self.power_threshold <= 1:
            raise InputError("power threshold must lie in (0, 1]")
        if self.band_width < 1:
            raise InputError("band width must be >= 1 bin")
        if self.k_cap < 2:
            raise InputError("cluster-count cap must be >= 2")

    def to_dict(self) -> dict:
        return {
            "ukf": {
                "process_noise": [float(v) for v in self.ukf.process_noise],
                "observation_noise": float(self.ukf.observation_noise),
                "spread": float(self.ukf.spread),
                "distribution": float(self.ukf.distribution),
                "prior": float(self.ukf.prior),
                "initial_spread": [float(v) for v in self.ukf.initial_spread],
            },
            "power_threshold": float(self.power_threshold),
            "band_width": float(self.band_width),
            "filter_order": int(self.filter_order),
            "k_cap": int(self.k_cap),
            "seed": int(self.seed),
            "select_all": bool(self.select_all),
            "full_sweep": bool(self.full_sweep),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "PipelineConfig":
        payload = dict(payload)
        ukf_payload = dict(payload.pop("ukf", {}))
        profile = ukf_payload.pop("profile", None)
        try:
            cfg = (ukf.UkfConfig.for_profile(profile, **ukf_payload)
                   if profile else ukf.UkfConfig(**ukf_payload))
            return cls(ukf=cfg, **payload)
        except TypeError as exc:
            raise InputError(f"bad config field: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed config JSON: {exc}") from None


@dataclass(frozen=True)
class PipelineTrace:
    """Intermediate stage outputs, kept for CSV dumps and diagnostics."""

    tracks: list = None
    spectra: object = None
    filtered: list = None
    velocities: list = None
    velocity_sum: np.ndarray = None
    candidates: list = None
    model: object = None
    costs: dict = None
    selection: object = None


@dataclass(frozen=True)
class SegmentationResult:
    outcome: str                      # "ok" | "no-periodicity"
    n_frames: int
    rate: float
    source: str
    config: dict
    primary_bin: int | None = None
    selected: list = field(default_factory=list)
    candidate_frames: list = field(default_factory=list)
    cluster_count: int | None = None
    chosen_cluster: int | None = None
    cluster_spans: list = field(default_factory=list)
    boundaries: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    stage_seconds: dict = field(default_factory=dict)
    trace: PipelineTrace | None = None


class _Stage:
    """Context manager timing one stage and tagging its errors."""

    def __init__(self, name: str, timings: dict):
        self.name = name
        self.timings = timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = time.perf_counter() - self.t0
        if exc is not None and isinstance(exc, RepsegError) and not isinstance(
                exc, (StageError, NoPeriodicityError)):
            raise StageError(self.name, exc) from exc
        return False


def run_pipeline(seq: SkeletonSequence, cfg: PipelineConfig | None = None,
                 keep_trace: bool = False) -> SegmentationResult:
    """Segment one sequence into repetitions."""
    cfg = cfg or PipelineConfig()
    seq.validate()
    timings: dict = {}
    config_echo = cfg.to_dict()

    with _Stage("kinematic-filter", timings):
        filtered = ukf.four_pass_filter(seq, cfg.ukf)
        tracks = filtered.tracks

    try:
        with _Stage("frequency-analysis", timings):
            spectra = frequency.compute_spectra(tracks)
            primary = frequency.primary_frequency(spectra)
            spectra = replace(spectra, primary_bin=primary)
            if primary < MIN_PRIMARY_BIN:
                raise NoPeriodicityError(
                    f"primary bin {primary} is below {MIN_PRIMARY_BIN}")
            if cfg.select_all:
                selected = [t.id for t in tracks
                            if spectra.active[spectra.track_row(t.id)]]
            else:
                selected = frequency.select_representative(
                    spectra, cfg.power_threshold, primary)
    except NoPeriodicityError:
        return SegmentationResult(
            outcome="no-periodicity", n_frames=seq.n_frames, rate=seq.rate,
            source=seq.source, config=config_echo, stage_seconds=timings,
            trace=PipelineTrace(tracks=tracks) if keep_trace else None)

    with _Stage("candidate-detection", timings):
        spec = detection.BandpassSpec(center=primary, n_frames=seq.n_frames,
                                      rate=seq.rate, width=cfg.band_width,
                                      order=cfg.filter_order)
        by_id = {t.id: t for t in tracks}
        filtered_tracks = [detection.bandpass(by_id[tid], spec) for tid in selected]
        velocities = [detection.velocity(t) for t in filtered_tracks]
        candidates = detection.detect_candidates(
            velocities, primary, seq.n_frames, filtered_tracks)
        velocity_sum = detection.squared_velocity_sum(velocities)

    if len(candidates) < 2:
        return SegmentationResult(
            outcome="no-periodicity", n_frames=seq.n_frames, rate=seq.rate,
            source=seq.source, config=config_echo, primary_bin=primary,
            selected=list(selected), stage_seconds=timings,
            candidate_frames=[c.frame for c in candidates],
            trace=PipelineTrace(tracks=tracks, spectra=spectra,
                                filtered=filtered_tracks, velocities=velocities,
                                velocity_sum=velocity_sum,
                                candidates=candidates) if keep_trace else None)

    with _Stage("clustering", timings):
        model, costs = clustering.adaptive_k(
            candidates, seed=cfg.seed, k_cap=cfg.k_cap, full_sweep=cfg.full_sweep)
        selection = clustering.select_boundaries(
            model, candidates, seq.n_frames, primary)
        segments = clustering.boundaries_to_segments(selection, seq.n_frames)

    trace = None
    if keep_trace:
        trace = PipelineTrace(tracks=tracks, spectra=spectra,
                              filtered=filtered_tracks, velocities=velocities,
                              velocity_sum=velocity_sum, candidates=candidates,
                              model=model, costs=costs, selection=selection)
    return SegmentationResult(
        outcome="ok", n_frames=seq.n_frames, rate=seq.rate, source=seq.source,
        config=config_echo, primary_bin=primary, selected=list(selected),
        candidate_frames=[c.frame for c in candidates],
        cluster_count=selection.cluster_count,
        chosen_cluster=selection.chosen_cluster,
        cluster_spans=list(selection.spans),
        boundaries=list(selection.boundaries),
        segments=[(int(s), int(e)) for s, e in segments],
        stage_seconds=timings, trace=trace)


def save_result(result: SegmentationResult, path, include_timing: bool = False) -> None:
    """Write a result as JSON.  Timings are omitted by default so that runs
    with identical input and config produce byte-identical files."""
    payload = {
        "format": RESULT_MAGIC,
        "outcome": result.outcome,
        "n_frames": result.n_frames,
        "rate": result.rate,
        "source": result.source,
        "primary_bin": result.primary_bin,
        "selected": result.selected,
        "candidate_frames": result.candidate_frames,
        "cluster_count": result.cluster_count,
        "chosen_cluster": result.chosen_cluster,
        "cluster_spans": result.cluster_spans,
        "boundaries": result.boundaries,
        "segments": [list(seg) for seg in result.segments],
        "config": result.config,
        "stage_seconds": result.stage_seconds if include_timing else None,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_result(path) -> SegmentationResult:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed result JSON ({exc})") from None
    if payload.get("format") != RESULT_MAGIC:
        raise InputError(f"{path}: not a repseg result file")
    return SegmentationResult(
        outcome=payload["outcome"], n_frames=payload["n_frames"],
        rate=payload["rate"], source=payload.get("source", ""),
        config=payload.get("config", {}), primary_bin=payload.get("primary_bin"),
        selected=payload.get("selected", []),
        candidate_frames=payload.get("candidate_frames", []),
        cluster_count=payload.get("cluster_count"),
        chosen_cluster=payload.get("chosen_cluster"),
        cluster_spans=payload.get("cluster_spans", []),
        boundaries=payload.get("boundaries", []),
        segments=[tuple(seg) for seg in payload.get("segments", [])],
        stage_seconds=payload.get("stage_seconds") or {})


def _require_trace(result: SegmentationResult, what: str) -> PipelineTrace:
    if result.trace is None:
        raise InputError(f"{what} needs a result produced with keep_trace=True")
    return result.trace


def spectra_csv(result: SegmentationResult) -> str:
    """Per-track spectra plus the across-track power sum, one bin per row."""
    trace = _require_trace(result, "spectra dump")
    if trace.spectra is None:
        raise InputError("no spectra available (non-periodic before analysis)")
    sp = trace.spectra
    power_sum = sp.power[:, :].sum(axis=0)
    lines = ["bin,freq_hz," + ",".join(sp.ids) + ",power_sum"]
    scale = sp.rate / sp.n_frames
    for b in range(sp.amplitudes.shape[1]):
        amps = ",".join(repr(float(v)) for v in sp.amplitudes[:, b])
        lines.append(f"{b},{b * scale!r},{amps},{power_sum[b]!r}")
    return "\n".join(lines) + "\n"


def candidates_csv(result: SegmentationResult) -> str:
    """The squared-velocity-sum curve with candidate frames marked."""
    trace = _require_trace(result, "candidate dump")
    if trace.velocity_sum is None:
        raise InputError("no detection stage output available")
    marked = {c.frame for c in trace.candidates}
    lines = ["frame,velocity_sq_sum,is_candidate"]
    for t, v in enumerate(trace.velocity_sum):
        lines.append(f"{t},{float(v)!r},{int(t in marked)}")
    return "\n".join(lines) + "\n"


def clusters_csv(result: SegmentationResult) -> str:
    """Candidate cluster labels and feature vectors."""
    trace = _require_trace(result, "cluster dump")
    if trace.model is None:
        raise InputError("no clustering stage output available")
    n_features = trace.candidates[0].features.shape[0]
    header = "frame,cluster,selected," + ",".join(
        f"f{i}" for i in range(n_features))
    lines = [header]
    for point, label in zip(trace.candidates, trace.model.labels):
        feats = ",".join(repr(float(v)) for v in point.features)
        chosen = int(label == trace.selection.chosen_cluster)
        lines.append(f"{point.frame},{int(label)},{chosen},{feats}")
    return "\n".join(lines) + "\n"


def timeline_csv(result: SegmentationResult, truth: GroundTruth | None = None) -> str:
    """Per-frame detected segment index, optionally next to the truth's."""
    def index_of(frame, segments):
        for i, (s, e) in enumerate(segments):
            if s <= frame < e:
                return i
        return -1

    truth_segments = truth.segments() if truth is not None else None
    lines = ["frame,detected_segment" + (",truth_segment" if truth else "")]
    for t in range(result.n_frames):
        row = f"{t},{index_of(t, result.segments)}"
        if truth_segments is not None:
            row += f",{index_of(t, truth_segments)}"
        lines.append(row)
    return "\n".join(lines) + "\n"
