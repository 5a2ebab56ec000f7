"""Four-pass unscented Kalman filtering of joint-position sequences.

Each pass runs a random-walk UKF over the 32-entry kinematic state (20
angles + 12 segment lengths).  Passes 1 and 2 go forward and backward with
free lengths; the lengths are then fixed to their across-pass mean and
passes 3 and 4 repeat the sweep with the length entries removed from the
filtered state, which keeps them exactly constant.  Every pass starts from
the terminal state of the previous one.  The random-walk transition is the
identity, so the unscented transform is only needed for the observation
function.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, LinAlgError

from . import kinematics as kin
from .errors import InputError, NumericalError
from .frequency import ParameterTrack
from .sequence import SkeletonSequence

_LENGTH_SLICE = slice(kin.N_ANGLES, kin.STATE_DIM)

# default per-frame process noise (std-dev): angles rad, lengths metres
ANGLE_PROCESS_STD = 0.05
LENGTH_PROCESS_STD = 0.005
# default observation noise (std-dev, metres) per modality profile
OBSERVATION_STD = {"mocap": 0.002, "kinect": 0.03}
INITIAL_ANGLE_STD = 0.3
INITIAL_LENGTH_STD = 0.05
_COV_INFLATION = 1e-9


def default_process_noise() -> np.ndarray:
    q = np.full(kin.STATE_DIM, ANGLE_PROCESS_STD)
    q[_LENGTH_SLICE] = LENGTH_PROCESS_STD
    return q


def default_initial_spread() -> np.ndarray:
    p = np.full(kin.STATE_DIM, INITIAL_ANGLE_STD)
    p[_LENGTH_SLICE] = INITIAL_LENGTH_STD
    return p


@dataclass(frozen=True)
class UkfConfig:
    """Noise levels, sigma-point scaling and initialisation for one run.

    ``process_noise`` and ``initial_spread`` are per-entry standard
    deviations in the ``kinematics.STATE_IDS`` layout; ``observation_noise``
    is the per-coordinate position noise in metres.
    """

    process_noise: np.ndarray = field(default_factory=default_process_noise)
    observation_noise: float = OBSERVATION_STD["mocap"]
    spread: float = 1e-3          # sigma-point spread (the usual alpha)
    distribution: float = 2.0     # secondary scaling (beta)
    prior: float = 0.0            # prior-knowledge scaling (kappa)
    initial_state: kin.FullBodyState | None = None
    initial_spread: np.ndarray = field(default_factory=default_initial_spread)

    def __post_init__(self):
        object.__setattr__(self, "process_noise",
                           np.asarray(self.process_noise, dtype=float))
        object.__setattr__(self, "initial_spread",
                           np.asarray(self.initial_spread, dtype=float))
        if self.process_noise.shape != (kin.STATE_DIM,):
            raise InputError(f"process_noise must have {kin.STATE_DIM} entries")
        if self.initial_spread.shape != (kin.STATE_DIM,):
            raise InputError(f"initial_spread must have {kin.STATE_DIM} entries")
        if np.any(self.process_noise <= 0) or np.any(self.initial_spread <= 0):
            raise InputError("noise standard deviations must be positive")
        if self.observation_noise <= 0:
            raise InputError("observation noise must be positive")
        if self.spread <= 0:
            raise InputError("sigma-point spread must be positive")

    @classmethod
    def for_profile(cls, profile: str, **overrides) -> "UkfConfig":
        if profile not in OBSERVATION_STD:
            raise InputError(f"unknown noise profile {profile!r}")
        overrides.setdefault("observation_noise", OBSERVATION_STD[profile])
        return cls(**overrides)


@dataclass(frozen=True)
class StateTrack:
    """Per-frame state estimates of one filtering pass."""

    means: np.ndarray            # (frames, 32)
    cov_diag: np.ndarray         # (frames, 32) posterior variance diagonal
    pass_index: int              # 1..4
    direction: str               # "forward" | "backward"
    final_mean: np.ndarray       # (32,)
    final_cov: np.ndarray        # (n_active, n_active)

    @property
    def n_frames(self) -> int:
        return self.means.shape[0]

    def angle_tracks(self, rate: float) -> list:
        return [ParameterTrack(id=tid, samples=self.means[:, i], rate=rate)
                for i, tid in enumerate(kin.ANGLE_IDS)]

    def lengths(self) -> np.ndarray:
        return self.means[:, _LENGTH_SLICE]


@dataclass(frozen=True)
class FourPassResult:
    tracks: list                 # 20 ParameterTrack from the final pass
    bone_lengths: np.ndarray     # (12,) fixed lengths used by passes 3-4
    passes: list                 # the four StateTracks


def _observations(seq: SkeletonSequence):
    obs = np.concatenate([seq.joint(j) for j in kin.OBS_JOINTS], axis=1)
    anchors = (seq.joint("pelvis"), seq.joint("sca_l"), seq.joint("sca_r"))
    return obs, anchors


def _observation_cov(sigma: float) -> np.ndarray:
    """Observation covariance including the pass-through anchor noise.

    The root anchors come from the same capture as the joints, so each
    limb's joints share their anchor's position error: joints hanging off
    one anchor get a common extra noise term per axis (both legs hang off
    the pelvis).
    """
    r = np.eye(kin.OBS_DIM)
    anchor_groups = (("sho_l", "elb_l", "wri_l"),
                     ("sho_r", "elb_r", "wri_r"),
                     ("kne_l", "ank_l", "kne_r", "ank_r"))
    for group in anchor_groups:
        rows = [kin.OBS_JOINTS.index(j) for j in group]
        for a in rows:
            for b in rows:
                for axis in range(3):
                    r[3 * a + axis, 3 * b + axis] += 1.0
    return sigma ** 2 * r


def derive_initial_state(seq: SkeletonSequence,
                         observation_noise: float = 0.0) -> np.ndarray:
    """Initial filter state from the data.

    Hinge angles come from frame 0 through the interior-angle convention
    and other rotations start at zero.  Lengths come from inter-joint
    distances averaged over the whole clip, with the squared-norm noise
    bias removed (two noisy endpoints inflate a squared distance by six
    noise variances); a single noisy frame would be a poor anchor for the
    short pelvic offset.
    """
    raw = kin.raw_joint_angles(seq)
    vec = np.zeros(kin.STATE_DIM)
    idx = {name: i for i, name in enumerate(kin.STATE_IDS)}
    for hinge in ("elb_l", "elb_r", "kne_l", "kne_r"):
        vec[idx[hinge]] = np.pi - raw.angles[hinge][0]

    bias = 6.0 * observation_noise ** 2

    def seg_len(a, b):
        sq = ((seq.joint(a) - seq.joint(b)) ** 2).sum(axis=1).mean()
        return float(np.sqrt(max(sq - bias, 1e-6)))

    for side in ("l", "r"):
        vec[idx[f"cla_{side}"]] = seg_len(f"sho_{side}", f"sca_{side}")
        vec[idx[f"hum_{side}"]] = seg_len(f"elb_{side}", f"sho_{side}")
        vec[idx[f"rad_{side}"]] = seg_len(f"wri_{side}", f"elb_{side}")
        vec[idx[f"tib_{side}"]] = seg_len(f"ank_{side}", f"kne_{side}")
        if seq.has_joint(f"hip_{side}"):
            vec[idx[f"pel_{side}"]] = seg_len(f"hip_{side}", "pelvis")
            vec[idx[f"fem_{side}"]] = seg_len(f"kne_{side}", f"hip_{side}")
        else:
            rel = seq.joint(f"kne_{side}") - seq.joint("pelvis")
            lp = abs(float(rel[:, 0].mean()))
            vec[idx[f"pel_{side}"]] = max(lp, 1e-3)
            fem_sq = (rel ** 2).sum(axis=1).mean() - lp * lp - bias
            vec[idx[f"fem_{side}"]] = max(float(np.sqrt(max(fem_sq, 1e-6))), 1e-3)
    return vec


def random_walk_predict(mean: np.ndarray, cov: np.ndarray,
                        process_std: np.ndarray):
    """One prediction step of the random-walk transition: the mean passes
    through unchanged and the covariance grows by the process noise."""
    return mean, cov + np.diag(np.asarray(process_std, dtype=float) ** 2)


def _chol_or_recover(p: np.ndarray, frame: int) -> np.ndarray:
    try:
        return cholesky(p, lower=True)
    except LinAlgError:
        try:
            return cholesky(p + _COV_INFLATION * np.eye(len(p)), lower=True)
        except LinAlgError:
            raise NumericalError(
                f"covariance lost positive-definiteness at frame {frame}") from None


def ukf_pass(seq: SkeletonSequence, cfg: UkfConfig, direction: str,
             fixed_lengths: np.ndarray | None = None, *, pass_index: int = 1,
             start_mean: np.ndarray | None = None,
             start_cov: np.ndarray | None = None) -> StateTrack:
    """One filtering sweep over the sequence.

    When ``fixed_lengths`` is given the 12 length entries are pinned to it
    and only the 20 angles are filtered.  ``start_mean``/``start_cov``
    override the data-derived initialisation (used for pass chaining).
    """
    if direction not in ("forward", "backward"):
        raise InputError(f"direction must be 'forward' or 'backward', got {direction!r}")
    seq.validate()
    obs, (pelvis, sca_l, sca_r) = _observations(seq)
    n = seq.n_frames

    if start_mean is not None:
        mean = np.asarray(start_mean, dtype=float).copy()
    elif cfg.initial_state is not None:
        mean = kin.state_to_vector(cfg.initial_state)
    else:
        mean = derive_initial_state(seq, cfg.observation_noise)

    if fixed_lengths is None:
        active = np.arange(kin.STATE_DIM)
    else:
        fixed_lengths = np.asarray(fixed_lengths, dtype=float)
        if fixed_lengths.shape != (kin.N_LENGTHS,):
            raise InputError(f"fixed_lengths must have {kin.N_LENGTHS} entries")
        mean[_LENGTH_SLICE] = fixed_lengths
        active = np.arange(kin.N_ANGLES)
    na = len(active)

    if start_cov is not None:
        p = np.asarray(start_cov, dtype=float).copy()
        if p.shape != (na, na):
            raise InputError(f"start_cov must be ({na}, {na})")
    else:
        p = np.diag(cfg.initial_spread[active] ** 2)

    r = _observation_cov(cfg.observation_noise)

    # scaled sigma-point weights
    lam = cfg.spread ** 2 * (na + cfg.prior) - na
    c = na + lam
    wm = np.full(2 * na + 1, 1.0 / (2.0 * c))
    wc = wm.copy()
    wm[0] = lam / c
    wc[0] = lam / c + (1.0 - cfg.spread ** 2 + cfg.distribution)
    sqrt_c = np.sqrt(c)

    means = np.empty((n, kin.STATE_DIM))
    cov_diag = np.zeros((n, kin.STATE_DIM))
    order = range(n) if direction == "forward" else range(n - 1, -1, -1)
    states = np.tile(mean, (2 * na + 1, 1))

    process_std = cfg.process_noise[active]
    for step, t in enumerate(order):
        if step > 0:
            mean[active], p = random_walk_predict(mean[active], p, process_std)
        root = _chol_or_recover(p, t)
        chi = np.tile(mean[active], (2 * na + 1, 1))
        chi[1:na + 1] += sqrt_c * root.T
        chi[na + 1:] -= sqrt_c * root.T

        states[:, :] = mean
        states[:, active] = chi
        y_sig = kin.observe_batch(states, pelvis[t], sca_l[t], sca_r[t])
        y_mean = wm @ y_sig
        dy = y_sig - y_mean
        dx = chi - mean[active]
        s = (dy.T * wc) @ dy + r
        pxy = (dx.T * wc) @ dy
        try:
            gain = cho_solve(cho_factor(s), pxy.T).T
        except LinAlgError:
            raise NumericalError(
                f"innovation covariance not invertible at frame {t}") from None
        mean[active] = mean[active] + gain @ (obs[t] - y_mean)
        p = p - gain @ pxy.T
        p = 0.5 * (p + p.T)
        means[t] = mean
        cov_diag[t, active] = np.diag(p)

    return StateTrack(means=means, cov_diag=cov_diag, pass_index=pass_index,
                      direction=direction, final_mean=mean.copy(), final_cov=p)


def estimate_bone_lengths(pass1: StateTrack, pass2: StateTrack) -> np.ndarray:
    """Per-bone mean over all frames of both passes."""
    if pass1.n_frames != pass2.n_frames:
        raise InputError("passes cover different frame counts")
    both = np.concatenate([pass1.lengths(), pass2.lengths()], axis=0)
    return both.mean(axis=0)


def four_pass_filter(seq: SkeletonSequence, cfg: UkfConfig) -> FourPassResult:
    """Forward/backward with free lengths, fix the lengths to their mean,
    then forward/backward again.

    The output angle tracks average the two fixed-length passes: a causal
    pass lags the motion and an anti-causal pass leads it by the same
    amount, so the average is phase-neutral (consuming the last pass alone
    would shift every detected event early by the filter lag).
    """
    p1 = ukf_pass(seq, cfg, "forward", pass_index=1)
    p2 = ukf_pass(seq, cfg, "backward", pass_index=2,
                  start_mean=p1.final_mean, start_cov=p1.final_cov)
    lengths = estimate_bone_lengths(p1, p2)
    mean3 = p2.final_mean.copy()
    cov3 = p2.final_cov[:kin.N_ANGLES, :kin.N_ANGLES]
    p3 = ukf_pass(seq, cfg, "forward", fixed_lengths=lengths, pass_index=3,
                  start_mean=mean3, start_cov=cov3)
    p4 = ukf_pass(seq, cfg, "backward", fixed_lengths=lengths, pass_index=4,
                  start_mean=p3.final_mean, start_cov=p3.final_cov)
    fused = 0.5 * (p3.means + p4.means)
    tracks = [ParameterTrack(id=tid, samples=fused[:, i], rate=seq.rate)
              for i, tid in enumerate(kin.ANGLE_IDS)]
    return FourPassResult(tracks=tracks, bone_lengths=lengths,
                          passes=[p1, p2, p3, p4])
