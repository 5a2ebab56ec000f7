"""Seeded generator of repetitive skeletal sequences with ground truth.

A motion script describes per-DoF sinusoidal angle trajectories over a
fixed number of repetitions.  The "paused" waveform warps time inside each
cycle so the motion slows down near the rest point (just after the nominal
cycle boundary) and once more late in the cycle, which is what produces
the extra zero-velocity candidates a segmenter has to consolidate.  The
sensor profile sets the additive position noise and the output frame rate;
a script authored at one rate is resampled to the profile's rate so the
same motion can be rendered as mocap-grade or depth-camera-grade data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import kinematics as kin
from .errors import InputError
from .evaluation import GroundTruth
from .sequence import SkeletonSequence

# sensor profiles: position noise (m) and frame rate (Hz)
PROFILES = {"mocap": (0.001, 120.0), "kinect": (0.03, 30.0)}

DEFAULT_LENGTHS = {
    "clavicle": 0.18, "humerus": 0.30, "radius": 0.26,
    "pelvic": 0.10, "femur": 0.42, "tibia": 0.41,
}

# rest-point offset into each cycle, as a cycle fraction
DEFAULT_ONSET = 0.04
# time-warp dip geometry: (centre, width, share of the pause budget)
_DIPS = ((DEFAULT_ONSET, 0.08, 0.7), (0.68, 0.10, 0.3))


@dataclass(frozen=True)
class NoiseProfile:
    sigma: float                  # isotropic position noise std-dev, metres
    rate: float                   # output frame rate, Hz
    label: str = ""

    def __post_init__(self):
        if self.sigma < 0:
            raise InputError("noise std-dev must be >= 0")
        if self.rate <= 0:
            raise InputError("profile rate must be positive")

    @classmethod
    def named(cls, label: str) -> "NoiseProfile":
        if label not in PROFILES:
            raise InputError(f"unknown noise profile {label!r}")
        sigma, rate = PROFILES[label]
        return cls(sigma=sigma, rate=rate, label=label)


@dataclass(frozen=True)
class DofSpec:
    """One angle trajectory: centre + amplitude * sin(2*pi*cycles*phase_fn + phase)."""

    dof: str
    amplitude: float
    center: float = 0.0
    cycles: float = 1.0           # oscillations per repetition
    phase: float = -np.pi / 2     # cosine-type by default: rest at the cycle start
    waveform: str = "sine"        # "sine" | "paused"
    pause_fraction: float = 0.0

    def __post_init__(self):
        if self.dof not in kin.ANGLE_IDS:
            raise InputError(f"unknown DoF id {self.dof!r}")
        if self.waveform not in ("sine", "paused"):
            raise InputError(f"waveform must be 'sine' or 'paused', got {self.waveform!r}")
        if not 0 <= self.pause_fraction < 0.4:
            raise InputError("pause fraction must lie in [0, 0.4)")
        if self.waveform == "sine" and self.pause_fraction:
            raise InputError("pause fraction requires the 'paused' waveform")


@dataclass(frozen=True)
class MotionScript:
    name: str
    reps: int
    frames: int
    rate: float
    seed: int
    dofs: tuple
    bone_lengths: dict = field(default_factory=lambda: dict(DEFAULT_LENGTHS))
    onset: float = DEFAULT_ONSET          # rest point, as a fraction of a cycle
    skew: float = 0.0                     # cycle-time asymmetry in [0, 1): positive
                                          # reaches the far pose early, glides back
    amplitude_jitter: float = 0.0         # per-rep depth variation (rel. std);
                                          # the rest pose itself never varies
    root_position: tuple = (0.0, 0.0, 1.0)
    root_sway: tuple = (0.0, 0.0, 0.0)    # sway amplitude per axis, metres
    root_sway_cycles: float = 1.0         # sway oscillations per repetition
    shoulder_halfwidth: float = 0.18
    shoulder_height: float = 0.50         # scapular anchors above the pelvis

    def __post_init__(self):
        object.__setattr__(self, "dofs", tuple(self.dofs))
        if self.reps < 1:
            raise InputError("a script needs at least one repetition")
        if self.frames < 2 * self.reps:
            raise InputError("too few frames for the requested repetitions")
        if self.rate <= 0:
            raise InputError("script rate must be positive")
        if not self.dofs:
            raise InputError("a script must drive at least one DoF")
        if not 0 <= self.onset < 0.5:
            raise InputError("onset must lie in [0, 0.5)")
        if not 0 <= self.skew < 1:
            raise InputError("skew must lie in [0, 1)")
        missing = set(DEFAULT_LENGTHS) - set(self.bone_lengths)
        if missing:
            raise InputError(f"bone_lengths is missing {sorted(missing)}")

    def to_json(self) -> str:
        payload = asdict(self)
        payload["dofs"] = [asdict(d) for d in self.dofs]
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MotionScript":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed script JSON: {exc}") from None
        try:
            payload["dofs"] = tuple(DofSpec(**d) for d in payload.get("dofs", []))
            for key in ("root_position", "root_sway"):
                if key in payload:
                    payload[key] = tuple(payload[key])
            return cls(**payload)
        except TypeError as exc:
            raise InputError(f"bad script field: {exc}") from None


def _warp(tau: np.ndarray, pause_fraction: float, onset: float,
          skew: float = 0.0) -> np.ndarray:
    """Cycle-phase warp.

    Two effects compose: raised-cosine slow-downs at the onset and late in
    the cycle (the pauses), and a sinusoidal speed skew that runs the
    outward half of the cycle fast and the return slowly.  Returns phase
    in [0, 1] with phase(0) = 0 and phase(1) = 1.
    """
    tau = np.asarray(tau, dtype=float)
    phase = tau.copy()
    if skew:
        # speed 1 + skew*cos(2*pi*(tau - onset - 1/4)): neutral at the rest
        # point, fastest a quarter-cycle after it
        shift = onset + 0.25
        phase = phase + (skew / (2 * np.pi)) * (
            np.sin(2 * np.pi * (tau - shift)) - np.sin(-2 * np.pi * shift))
    if pause_fraction == 0.0:
        return phase
    norm = 1.0
    dips = ((onset, _DIPS[0][1], _DIPS[0][2]), _DIPS[1])
    for centre, width, share in dips:
        depth = pause_fraction * share
        lo = centre - width / 2.0
        if lo < 0 or centre + width / 2.0 > 1.0:
            raise InputError("pause dip extends outside the cycle")
        # integral of the raised-cosine bump from 0 to tau
        rel = np.clip(tau, lo, lo + width) - centre
        bump_int = (rel + width / 2.0) / 2.0 + (width / (4 * np.pi)) * np.sin(
            2 * np.pi * rel / width)
        phase -= depth * bump_int
        norm -= depth * width / 2.0
    return phase / norm


def _dof_angle(spec: DofSpec, tau: np.ndarray, rep: np.ndarray,
               onset: float, skew: float = 0.0,
               depth: np.ndarray | None = None) -> np.ndarray:
    pause = spec.pause_fraction if spec.waveform == "paused" else 0.0
    phase_in_cycle = _warp(tau, pause, onset, skew)
    rest_phase = _warp(np.array([onset]), pause, onset, skew)[0]
    progress = rep + phase_in_cycle - rest_phase
    angle = spec.center + spec.amplitude * np.sin(
        2 * np.pi * spec.cycles * progress + spec.phase)
    if depth is not None:
        # scale each repetition's excursion around the unchanging rest pose
        rest_value = spec.center + spec.amplitude * np.sin(spec.phase)
        angle = rest_value + depth * (angle - rest_value)
    return angle


def build_states(script: MotionScript, n_frames: int):
    """Noise-free state matrix and anchor trajectories on a frame grid.

    Returns (states (n, 32), pelvis (n, 3), sca_l (n, 3), sca_r (n, 3)).
    """
    t = np.arange(n_frames)
    u = t * script.reps / n_frames
    rep = np.floor(u)
    tau = u - rep

    if script.amplitude_jitter > 0:
        factors = 1.0 + script.amplitude_jitter * np.clip(
            np.random.default_rng(script.seed + 1).standard_normal(script.reps),
            -3.0, 3.0)
        depth = factors[np.clip(rep, 0, script.reps - 1).astype(int)]
    else:
        depth = None

    states = np.zeros((n_frames, kin.STATE_DIM))
    idx = {name: i for i, name in enumerate(kin.STATE_IDS)}
    # multiple specs for the same DoF superpose (composite motions)
    for spec in script.dofs:
        states[:, idx[spec.dof]] += _dof_angle(spec, tau, rep, script.onset,
                                                script.skew, depth)
    bl = script.bone_lengths
    for side in ("l", "r"):
        states[:, idx[f"cla_{side}"]] = bl["clavicle"]
        states[:, idx[f"hum_{side}"]] = bl["humerus"]
        states[:, idx[f"rad_{side}"]] = bl["radius"]
        states[:, idx[f"pel_{side}"]] = bl["pelvic"]
        states[:, idx[f"fem_{side}"]] = bl["femur"]
        states[:, idx[f"tib_{side}"]] = bl["tibia"]

    sway = np.asarray(script.root_sway)[None, :] * np.sin(
        2 * np.pi * script.root_sway_cycles * u)[:, None]
    pelvis = np.asarray(script.root_position)[None, :] + sway
    shoulder = np.array([script.shoulder_halfwidth, 0.0, script.shoulder_height])
    sca_l = pelvis + shoulder * np.array([1.0, 1.0, 1.0])
    sca_r = pelvis + shoulder * np.array([-1.0, 1.0, 1.0])
    return states, pelvis, sca_l, sca_r


def example_script(name: str, seed: int = 1, reps: int = 5, frames: int = 600,
                   rate: float = 120.0, pause_fraction: float = 0.1) -> MotionScript:
    """Ready-made exercise scripts used by the demos and tests.

    ``squat``: whole-body sagittal squat with arm counter-swing.
    ``arm_raise``: upper-body raise, legs quiet.
    ``still``: no motion at all (zero amplitudes).
    The moving scripts hold the arm slightly elevated so no rotation axis
    degenerates onto a bone at rest.
    """
    waveform = "paused" if pause_fraction > 0 else "sine"

    def dof(name_, amp, center, cycles=1.0, phase=-np.pi / 2):
        return DofSpec(name_, amp, center=center, cycles=cycles, phase=phase,
                       waveform=waveform, pause_fraction=pause_fraction)

    posture = (
        DofSpec("sca_l_y", 0.0, center=-0.25),
        DofSpec("sca_r_y", 0.0, center=-0.25),
        DofSpec("sho_l_y", 0.0, center=0.35),
        DofSpec("sho_r_y", 0.0, center=0.35),
    )
    if name == "squat":
        dofs = (
            dof("kne_l", 0.5, 0.7), dof("kne_r", 0.5, 0.7),
            dof("hip_l_x", 0.4, 0.4), dof("hip_r_x", 0.4, 0.4),
            dof("elb_l", 0.35, 0.6), dof("elb_r", 0.35, 0.6),
            dof("sho_l_x", 0.3, 0.2), dof("sho_r_x", 0.3, 0.2),
        ) + posture
    elif name == "arm_raise":
        dofs = (
            dof("sho_l_x", 0.5, 0.3), dof("sho_r_x", 0.5, 0.3),
            dof("elb_l", 0.45, 0.7), dof("elb_r", 0.45, 0.7),
            dof("sca_l_x", 0.15, 0.1), dof("sca_r_x", 0.15, 0.1),
            DofSpec("kne_l", 0.0, center=0.3), DofSpec("kne_r", 0.0, center=0.3),
        ) + posture
    elif name == "still":
        # clearly bent joints keep every rotation axis off the bones, so a
        # static capture pins the whole state
        dofs = (DofSpec("kne_l", 0.0, center=0.9), DofSpec("kne_r", 0.0, center=0.9),
                DofSpec("hip_l_x", 0.0, center=0.4), DofSpec("hip_r_x", 0.0, center=0.4),
                DofSpec("elb_l", 0.0, center=0.9), DofSpec("elb_r", 0.0, center=0.9),
                ) + posture
    else:
        raise InputError(f"unknown example script {name!r}")
    return MotionScript(name=name, reps=reps, frames=frames, rate=rate,
                        seed=seed, dofs=dofs)


def generate(script: MotionScript, noise: NoiseProfile):
    """Render a script under a sensor profile.

    Returns ``(SkeletonSequence, GroundTruth)``; the truth boundaries are
    the exact cycle starts.  The sequence is deterministic in
    ``(script, noise)``: the noise stream is seeded from the script seed.
    """
    n = int(round(script.frames * noise.rate / script.rate))
    if n < 2 * script.reps:
        raise InputError("profile rate leaves too few frames per repetition")
    states, pelvis, sca_l, sca_r = build_states(script, n)
    obs = kin.observe_batch(states, pelvis, sca_l, sca_r)

    idx = {name: i for i, name in enumerate(kin.STATE_IDS)}
    hip_l = pelvis + np.stack([states[:, idx["pel_l"]],
                               np.zeros(n), np.zeros(n)], axis=1)
    hip_r = pelvis - np.stack([states[:, idx["pel_r"]],
                               np.zeros(n), np.zeros(n)], axis=1)

    joints = list(kin.ANCHOR_JOINTS) + list(kin.OBS_JOINTS) + ["hip_l", "hip_r"]
    positions = np.empty((n, len(joints), 3))
    positions[:, 0] = pelvis
    positions[:, 1] = sca_l
    positions[:, 2] = sca_r
    positions[:, 3:13] = obs.reshape(n, 10, 3)
    positions[:, 13] = hip_l
    positions[:, 14] = hip_r

    if noise.sigma > 0:
        rng = np.random.default_rng(script.seed)
        positions = positions + rng.normal(0.0, noise.sigma, positions.shape)

    label = noise.label or f"sigma={noise.sigma}"
    source = f"synth:{script.name}:{label}"
    seq = SkeletonSequence(rate=noise.rate, joints=joints, positions=positions,
                           source=source)
    boundaries = [int(round(k * n / script.reps)) for k in range(script.reps + 1)]
    truth = GroundTruth(boundaries=boundaries, n_frames=n, source=source)
    return seq, truth
