"""Skeleton sequence container and its on-disk text format.

A sequence file is self-describing: a small header naming the sampling
rate, source label and joint columns, followed by one whitespace-separated
row of ``3 * n_joints`` coordinates per frame.  Floats are written with
``repr`` so a save/load cycle is lossless and byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .kinematics import REQUIRED_JOINTS

MAGIC = "#repseg-sequence v1"
TRUTH_MAGIC = "#repseg-truth v1"
MAX_GAP = 5  # longest run of missing frames the loader will interpolate


@dataclass
class SkeletonSequence:
    """Per-frame 3D joint positions with sampling rate and joint map."""

    rate: float
    joints: list
    positions: np.ndarray          # (frames, joints, 3), metres
    source: str = ""
    interpolated: dict = field(default_factory=dict)  # joint -> list of frames

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 3 or self.positions.shape[2] != 3:
            raise InputError("positions must have shape (frames, joints, 3)")
        if self.positions.shape[1] != len(self.joints):
            raise InputError("joint map does not match position columns")
        if not self.rate > 0:
            raise InputError("rate must be positive")
        self._index = {name: i for i, name in enumerate(self.joints)}

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]

    def has_joint(self, name: str) -> bool:
        return name in self._index

    def joint_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InputError(f"sequence has no joint column {name!r}") from None

    def joint(self, name: str) -> np.ndarray:
        """(frames, 3) trajectory of one joint."""
        return self.positions[:, self.joint_index(name)]

    def validate(self) -> None:
        missing = [j for j in REQUIRED_JOINTS if j not in self._index]
        if missing:
            raise InputError(f"sequence is missing required joints: {missing}")
        if not np.all(np.isfinite(self.positions)):
            raise InputError("sequence contains non-finite values")
        if self.n_frames < 2:
            raise InputError("sequence must have at least 2 frames")


def _fill_gaps(values: np.ndarray, joint: str) -> list:
    """Linearly interpolate NaN runs of up to MAX_GAP frames in place.

    Returns the interpolated frame indices.  Runs longer than MAX_GAP, or
    runs touching either end of the sequence, are load errors.
    """
    bad = ~np.isfinite(values).all(axis=1)
    if not bad.any():
        return []
    idx = np.flatnonzero(bad)
    runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    filled = []
    for run in runs:
        lo, hi = int(run[0]), int(run[-1])
        if lo == 0 or hi == len(values) - 1:
            raise InputError(
                f"joint {joint!r} missing at sequence boundary "
                f"(frames {[int(t) for t in run]})")
        if len(run) > MAX_GAP:
            raise InputError(
                f"joint {joint!r} has a gap of {len(run)} frames "
                f"(> {MAX_GAP}) at frames {[int(t) for t in run]}")
        a, b = values[lo - 1], values[hi + 1]
        for k, t in enumerate(run, start=1):
            values[t] = a + (b - a) * (k / (len(run) + 1))
        filled.extend(int(t) for t in run)
    return filled


def save_sequence(seq: SkeletonSequence, path) -> None:
    lines = [MAGIC,
             f"rate: {seq.rate!r}",
             f"source: {seq.source}",
             "joints: " + " ".join(seq.joints),
             f"frames: {seq.n_frames}"]
    flat = seq.positions.reshape(seq.n_frames, -1)
    for row in flat:
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_sequence(path) -> SkeletonSequence:
    """Parse, gap-fill and validate a sequence file."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MAGIC:
        raise InputError(f"{path}: not a repseg sequence file")
    header = {}
    body_start = None
    for i, ln in enumerate(lines[1:], start=1):
        if ":" not in ln:
            body_start = i
            break
        key, _, value = ln.partition(":")
        header[key.strip()] = value.strip()
        if key.strip() == "frames":
            body_start = i + 1
            break
    for key in ("rate", "joints", "frames"):
        if key not in header:
            raise InputError(f"{path}: header is missing {key!r}")
    joints = header["joints"].split()
    n_frames = int(header["frames"])
    rows = [ln for ln in lines[body_start:] if ln.strip()]
    if len(rows) != n_frames:
        raise InputError(f"{path}: expected {n_frames} frame rows, got {len(rows)}")
    try:
        data = np.array([[float(v) for v in row.split()] for row in rows])
    except ValueError as exc:
        raise InputError(f"{path}: malformed frame row ({exc})") from None
    if data.shape[1] != 3 * len(joints):
        raise InputError(f"{path}: frame rows have {data.shape[1]} values, "
                         f"expected {3 * len(joints)}")
    positions = data.reshape(n_frames, len(joints), 3)
    interpolated = {}
    for j, name in enumerate(joints):
        filled = _fill_gaps(positions[:, j], name)
        if filled:
            interpolated[name] = filled
    seq = SkeletonSequence(rate=float(header["rate"]), joints=joints,
                           positions=positions, source=header.get("source", ""),
                           interpolated=interpolated)
    seq.validate()
    return seq


def save_truth(boundaries, n_frames: int, path, source: str = "") -> None:
    with open(path, "w") as fh:
        fh.write(TRUTH_MAGIC + "\n")
        fh.write(f"source: {source}\n")
        fh.write(f"frames: {n_frames}\n")
        fh.write("boundaries: " + " ".join(str(int(b)) for b in boundaries) + "\n")


def load_truth(path):
    """Returns (boundaries list, n_frames, source)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != TRUTH_MAGIC:
        raise InputError(f"{path}: not a repseg truth file")
    header = {}
    for ln in lines[1:]:
        if ":" in ln:
            key, _, value = ln.partition(":")
            header[key.strip()] = value.strip()
    if "boundaries" not in header or "frames" not in header:
        raise InputError(f"{path}: truth file is missing fields")
    boundaries = [int(v) for v in header["boundaries"].split()]
    return boundaries, int(header["frames"]), header.get("source", "")
