"""Band-pass filtering and zero-velocity-crossing candidate detection.

The selected parameter tracks are band-passed around the primary bin with
a zero-phase Butterworth filter (forward-backward, so candidate timing is
not skewed), differentiated, and scanned for windowed minima of the summed
squared velocity.  Each accepted minimum carries the filtered parameter
values at that frame as its clustering feature vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import InputError
from .frequency import ParameterTrack

DEFAULT_WIDTH = 3.0      # passband width, DFT bins
DEFAULT_ORDER = 4        # Butterworth order (doubled by the two-pass run)
MERGE_DISTANCE = 2       # candidates closer than this collapse to the lower-s one


@dataclass(frozen=True)
class BandpassSpec:
    """Passband [center - width/2, center + width/2] in DFT bins."""

    center: int            # primary bin, cycles per sequence
    n_frames: int
    rate: float
    width: float = DEFAULT_WIDTH
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if self.center < 1:
            raise InputError("passband centre must be a positive bin")
        if self.width < 1:
            raise InputError("passband width must be >= 1 bin")
        if self.order < 1:
            raise InputError("filter order must be >= 1")
        if self.low_bin <= 0:
            raise InputError(
                f"passband low edge {self.low_bin:.2f} bins is not positive; "
                f"centre {self.center} is too low for width {self.width}")
        if self.high_bin >= self.n_frames / 2:
            raise InputError(
                f"passband high edge {self.high_bin:.2f} bins reaches the "
                f"Nyquist bin {self.n_frames / 2:.1f}")

    @property
    def low_bin(self) -> float:
        return self.center - self.width / 2.0

    @property
    def high_bin(self) -> float:
        return self.center + self.width / 2.0

    def edges_hz(self):
        scale = self.rate / self.n_frames
        return self.low_bin * scale, self.high_bin * scale


@dataclass(frozen=True)
class CandidatePoint:
    """A zero-velocity-crossing candidate segmentation point."""

    frame: int
    features: np.ndarray     # filtered selected-parameter values at ``frame``
    window: tuple            # inclusive (t1, t2) window that produced it

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        t1, t2 = self.window
        if not t1 <= self.frame <= t2:
            raise InputError("candidate frame outside its window")


def bandpass(track: ParameterTrack, spec: BandpassSpec) -> ParameterTrack:
    """Zero-phase Butterworth band-pass of one track.

    The passband sits a few bins above DC, so the filter transient spans a
    large share of the clip.  The track is extended circularly (one full
    copy on each side) before the forward-backward run: repetition clips
    hold whole cycles, so wrapping supplies genuine preceding and
    following context and keeps events near the sequence edges in place.
    """
    if len(track) != spec.n_frames:
        raise InputError("track length does not match the band-pass spec")
    if track.rate != spec.rate:
        raise InputError("track rate does not match the band-pass spec")
    lo, hi = spec.edges_hz()
    sos = butter(spec.order, [lo, hi], btype="bandpass", fs=spec.rate, output="sos")
    n = len(track)
    extended = np.concatenate([track.samples, track.samples, track.samples])
    filtered = sosfiltfilt(sos, extended)[n:2 * n]
    return replace(track, samples=filtered)


def velocity(track: ParameterTrack) -> ParameterTrack:
    """First-order derivative in units per second (central differences
    inside, one-sided at the ends)."""
    if len(track) < 2:
        raise InputError("velocity needs at least 2 samples")
    deriv = np.gradient(track.samples, edge_order=1) * track.rate
    return replace(track, samples=deriv)


def squared_velocity_sum(velocities) -> np.ndarray:
    velocities = list(velocities)
    if not velocities:
        raise InputError("no velocity tracks; run the frequency selection first")
    n = len(velocities[0])
    if any(len(v) != n for v in velocities):
        raise InputError("velocity tracks differ in length")
    return np.sum([v.samples ** 2 for v in velocities], axis=0)


def window_length(n_frames: int, primary_bin: int) -> int:
    return max(3, n_frames // (2 * primary_bin))


def detect_candidates(velocities, primary_bin: int, n_frames: int,
                      values) -> list:
    """Windowed minima of the squared velocity sum.

    ``values`` supplies the band-passed tracks whose samples become the
    candidates' feature vectors (same order and length as ``velocities``).
    A window's argmin becomes a candidate only if it is a strict local
    minimum strictly inside the window; duplicates from overlapping
    windows are dropped and near-coincident candidates merge to the one
    with the smaller velocity sum.
    """
    if primary_bin < 1:
        raise InputError("primary bin must be >= 1")
    velocities = list(velocities)
    values = list(values)
    if len(values) != len(velocities):
        raise InputError("values and velocities must align")
    s = squared_velocity_sum(velocities)
    if len(s) != n_frames:
        raise InputError("track length does not match n_frames")

    length = window_length(n_frames, primary_bin)
    hop = max(1, length // 2)
    starts = list(range(0, n_frames - length + 1, hop))
    if starts[-1] != n_frames - length:
        starts.append(n_frames - length)

    feature_matrix = np.stack([v.samples for v in values], axis=1)
    found = {}
    for start in starts:
        seg = s[start:start + length]
        j = int(np.argmin(seg))
        t = start + j
        if j == 0 or j == length - 1:
            continue
        if not (s[t] < s[t - 1] and s[t] < s[t + 1]):
            continue
        if t not in found:
            found[t] = (start, start + length - 1)

    frames = sorted(found)
    merged = []
    for t in frames:
        if merged and t - merged[-1] <= MERGE_DISTANCE:
            if s[t] < s[merged[-1]]:
                merged[-1] = t
        else:
            merged.append(t)
    return [CandidatePoint(frame=t, features=feature_matrix[t], window=found[t])
            for t in merged]
