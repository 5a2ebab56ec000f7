"""Full-body kinematic chain.

The body is modelled as four independent limb chains hanging off per-frame
root anchors.  Conventions used throughout the package:

* World/torso axes coincide: X is lateral (left = +X), Y anterior, Z up.
  Root anchors translate per frame; the torso frame does not rotate.
* Rest pose is a T-pose: zero angles put the arms along +/-X and the legs
  along -Z.
* Each rotational joint composes intrinsic Euler rotations in X -> Y -> Z
  order.  The scapula has X and Y rotations only.
* The elbow is a hinge about the local Z axis (side-signed so that a
  positive angle bends both elbows forward); the knee is a hinge about the
  local X axis (positive angle bends the heel backward, no side sign).
* The lower-limb anchor is a pelvis root shared by both legs; the hip
  centre sits at ``pelvis + side * pelvic_length * X``.  The pelvic segment
  itself does not rotate.

Upper chain:  anchor --clavicle--> shoulder --humerus--> elbow --radius--> wrist
Lower chain:  pelvis --pelvic (lateral offset)--> hip --femur--> knee --tibia--> ankle
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import InputError

if TYPE_CHECKING:  # pragma: no cover
    from .sequence import SkeletonSequence

# State vector layout used by the filter: 20 angles followed by 12 lengths.
ANGLE_IDS = (
    "sca_l_x", "sca_l_y", "sho_l_x", "sho_l_y", "sho_l_z", "elb_l",
    "sca_r_x", "sca_r_y", "sho_r_x", "sho_r_y", "sho_r_z", "elb_r",
    "hip_l_x", "hip_l_y", "hip_l_z", "kne_l",
    "hip_r_x", "hip_r_y", "hip_r_z", "kne_r",
)
LENGTH_IDS = (
    "cla_l", "hum_l", "rad_l", "cla_r", "hum_r", "rad_r",
    "pel_l", "fem_l", "tib_l", "pel_r", "fem_r", "tib_r",
)
STATE_IDS = ANGLE_IDS + LENGTH_IDS
N_ANGLES = len(ANGLE_IDS)
N_LENGTHS = len(LENGTH_IDS)
STATE_DIM = N_ANGLES + N_LENGTHS

# Joints observed by the filter, in the fixed concatenation order
# (left upper, right upper, left lower, right lower).
OBS_JOINTS = (
    "sho_l", "elb_l", "wri_l",
    "sho_r", "elb_r", "wri_r",
    "kne_l", "ank_l",
    "kne_r", "ank_r",
)
ANCHOR_JOINTS = ("pelvis", "sca_l", "sca_r")
REQUIRED_JOINTS = ANCHOR_JOINTS + OBS_JOINTS
OPTIONAL_JOINTS = ("hip_l", "hip_r")
OBS_DIM = 3 * len(OBS_JOINTS)

_DEGENERATE_EPS = 1e-6


def _check_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise InputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class UpperLimbParams:
    """One arm: scapular anchor, three segment lengths and six angles.

    ``side`` selects the rest direction of the chain (+X for "left",
    -X for "right").
    """

    side: str
    p_sca: np.ndarray          # (3,) scapular anchor, metres
    l_c: float                 # clavicle length
    l_h: float                 # humerus length
    l_r: float                 # radius length
    r_sca: np.ndarray          # (2,) scapula X/Y rotations, radians
    r_sho: np.ndarray          # (3,) shoulder X/Y/Z rotations
    r_elb: float               # elbow flexion, [0, pi] in canonical states

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise InputError(f"side must be 'left' or 'right', got {self.side!r}")
        object.__setattr__(self, "p_sca", np.asarray(self.p_sca, dtype=float))
        object.__setattr__(self, "r_sca", np.asarray(self.r_sca, dtype=float))
        object.__setattr__(self, "r_sho", np.asarray(self.r_sho, dtype=float))
        if self.p_sca.shape != (3,) or self.r_sca.shape != (2,) or self.r_sho.shape != (3,):
            raise InputError("upper-limb parameter arrays have wrong shape")
        for name in ("p_sca", "l_c", "l_h", "l_r", "r_sca", "r_sho", "r_elb"):
            _check_finite(name, getattr(self, name))
        if min(self.l_c, self.l_h, self.l_r) <= 0:
            raise InputError("upper-limb segment lengths must be positive")


@dataclass(frozen=True)
class LowerLimbParams:
    """One leg.  ``p_hip`` is the pelvic root anchor; the hip centre sits
    ``l_p`` along the side's lateral axis from it."""

    side: str
    p_hip: np.ndarray          # (3,) pelvic root anchor, metres
    l_p: float                 # pelvic lateral offset
    l_f: float                 # femur length
    l_t: float                 # tibia length
    r_hip: np.ndarray          # (3,) hip X/Y/Z rotations
    r_kne: float               # knee flexion, [0, pi] in canonical states

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise InputError(f"side must be 'left' or 'right', got {self.side!r}")
        object.__setattr__(self, "p_hip", np.asarray(self.p_hip, dtype=float))
        object.__setattr__(self, "r_hip", np.asarray(self.r_hip, dtype=float))
        if self.p_hip.shape != (3,) or self.r_hip.shape != (3,):
            raise InputError("lower-limb parameter arrays have wrong shape")
        for name in ("p_hip", "l_p", "l_f", "l_t", "r_hip", "r_kne"):
            _check_finite(name, getattr(self, name))
        if min(self.l_p, self.l_f, self.l_t) <= 0:
            raise InputError("lower-limb segment lengths must be positive")


@dataclass(frozen=True)
class FullBodyState:
    """All kinematic parameters of the four limbs (20 angle DoFs)."""

    upper_left: UpperLimbParams
    upper_right: UpperLimbParams
    lower_left: LowerLimbParams
    lower_right: LowerLimbParams

    def __post_init__(self):
        if self.upper_left.side != "left" or self.lower_left.side != "left":
            raise InputError("left limb params must have side='left'")
        if self.upper_right.side != "right" or self.lower_right.side != "right":
            raise InputError("right limb params must have side='right'")


@dataclass(frozen=True)
class JointObservation:
    """Positions of the ten observed joints (30 coordinates)."""

    sho_l: np.ndarray
    elb_l: np.ndarray
    wri_l: np.ndarray
    sho_r: np.ndarray
    elb_r: np.ndarray
    wri_r: np.ndarray
    kne_l: np.ndarray
    ank_l: np.ndarray
    kne_r: np.ndarray
    ank_r: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([getattr(self, j) for j in OBS_JOINTS])

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "JointObservation":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (OBS_DIM,):
            raise InputError(f"observation vector must have shape ({OBS_DIM},)")
        parts = {j: vec[3 * i:3 * i + 3] for i, j in enumerate(OBS_JOINTS)}
        return cls(**parts)


def _side_sign(side: str) -> float:
    return 1.0 if side == "left" else -1.0


def _rot_xy(ax, ay) -> np.ndarray:
    """Intrinsic X->Y rotation matrix, batched over leading dims."""
    ax, ay = np.asarray(ax, dtype=float), np.asarray(ay, dtype=float)
    ca, sa = np.cos(ax), np.sin(ax)
    cb, sb = np.cos(ay), np.sin(ay)
    out = np.empty(np.broadcast(ca, cb).shape + (3, 3))
    out[..., 0, 0] = cb
    out[..., 0, 1] = 0.0
    out[..., 0, 2] = sb
    out[..., 1, 0] = sa * sb
    out[..., 1, 1] = ca
    out[..., 1, 2] = -sa * cb
    out[..., 2, 0] = -ca * sb
    out[..., 2, 1] = sa
    out[..., 2, 2] = ca * cb
    return out


def _rot_xyz(ax, ay, az) -> np.ndarray:
    """Intrinsic X->Y->Z rotation matrix, batched over leading dims."""
    ax = np.asarray(ax, dtype=float)
    ay = np.asarray(ay, dtype=float)
    az = np.asarray(az, dtype=float)
    ca, sa = np.cos(ax), np.sin(ax)
    cb, sb = np.cos(ay), np.sin(ay)
    cc, sc = np.cos(az), np.sin(az)
    out = np.empty(np.broadcast(ca, cb, cc).shape + (3, 3))
    out[..., 0, 0] = cb * cc
    out[..., 0, 1] = -cb * sc
    out[..., 0, 2] = sb
    out[..., 1, 0] = ca * sc + sa * sb * cc
    out[..., 1, 1] = ca * cc - sa * sb * sc
    out[..., 1, 2] = -sa * cb
    out[..., 2, 0] = sa * sc - ca * sb * cc
    out[..., 2, 1] = sa * cc + ca * sb * sc
    out[..., 2, 2] = ca * cb
    return out


def _upper_chain(p_sca, l_c, l_h, l_r, sca_x, sca_y, sho_x, sho_y, sho_z,
                 elb, sign):
    """Batched arm chain.  Angle/length args broadcast over leading dims;
    returns (shoulder, elbow, wrist) with trailing dim 3."""
    frame1 = _rot_xy(sca_x, sca_y)
    sho = p_sca + np.expand_dims(sign * l_c, -1) * frame1[..., :, 0]
    frame2 = frame1 @ _rot_xyz(sho_x, sho_y, sho_z)
    elb_p = sho + np.expand_dims(sign * l_h, -1) * frame2[..., :, 0]
    ce, se = np.cos(elb), np.sin(elb)
    # column 0 of frame2 @ Rz(sign*elb)
    wri_dir = (np.expand_dims(ce, -1) * frame2[..., :, 0]
               + np.expand_dims(sign * se, -1) * frame2[..., :, 1])
    wri = elb_p + np.expand_dims(sign * l_r, -1) * wri_dir
    return sho, elb_p, wri


def _lower_chain(p_hip, l_p, l_f, l_t, hip_x, hip_y, hip_z, kne, sign):
    """Batched leg chain; returns (hip_centre, knee, ankle)."""
    offset = np.zeros(np.broadcast(np.asarray(l_p), np.asarray(hip_x)).shape + (3,))
    offset[..., 0] = sign * l_p
    hip_c = np.asarray(p_hip, dtype=float) + offset
    frame4 = _rot_xyz(hip_x, hip_y, hip_z)
    kne_p = hip_c - np.expand_dims(l_f, -1) * frame4[..., :, 2]
    ck, sk = np.cos(kne), np.sin(kne)
    # column 2 of frame4 @ Rx(-kne)
    ank_dir = (np.expand_dims(sk, -1) * frame4[..., :, 1]
               + np.expand_dims(ck, -1) * frame4[..., :, 2])
    ank = kne_p - np.expand_dims(l_t, -1) * ank_dir
    return hip_c, kne_p, ank


def forward_upper(params: UpperLimbParams):
    """Map one arm's parameters to (shoulder, elbow, wrist) positions."""
    sign = _side_sign(params.side)
    sho, elb, wri = _upper_chain(
        params.p_sca, params.l_c, params.l_h, params.l_r,
        params.r_sca[0], params.r_sca[1],
        params.r_sho[0], params.r_sho[1], params.r_sho[2],
        params.r_elb, sign)
    return sho, elb, wri


def forward_lower(params: LowerLimbParams):
    """Map one leg's parameters to (knee, ankle) positions."""
    sign = _side_sign(params.side)
    _, kne, ank = _lower_chain(
        params.p_hip, params.l_p, params.l_f, params.l_t,
        params.r_hip[0], params.r_hip[1], params.r_hip[2],
        params.r_kne, sign)
    return kne, ank


def hip_centre(params: LowerLimbParams) -> np.ndarray:
    """Hip joint centre implied by the pelvic offset."""
    sign = _side_sign(params.side)
    return params.p_hip + np.array([sign * params.l_p, 0.0, 0.0])


def full_body_forward(state: FullBodyState) -> JointObservation:
    """Concatenate the per-limb chains into the fixed observation order."""
    sho_l, elb_l, wri_l = forward_upper(state.upper_left)
    sho_r, elb_r, wri_r = forward_upper(state.upper_right)
    kne_l, ank_l = forward_lower(state.lower_left)
    kne_r, ank_r = forward_lower(state.lower_right)
    return JointObservation(sho_l=sho_l, elb_l=elb_l, wri_l=wri_l,
                            sho_r=sho_r, elb_r=elb_r, wri_r=wri_r,
                            kne_l=kne_l, ank_l=ank_l,
                            kne_r=kne_r, ank_r=ank_r)


def observe_batch(states: np.ndarray, pelvis: np.ndarray,
                  sca_l: np.ndarray, sca_r: np.ndarray) -> np.ndarray:
    """Vectorised forward kinematics for the filter.

    Parameters
    ----------
    states : (..., 32) array in the ``STATE_IDS`` layout.
    pelvis, sca_l, sca_r : (3,) per-frame root anchors.

    Returns
    -------
    (..., 30) array of observed joint coordinates in ``OBS_JOINTS`` order.
    """
    s = np.asarray(states, dtype=float)
    a = s[..., :N_ANGLES]
    ln = s[..., N_ANGLES:]
    sho_l, elb_l, wri_l = _upper_chain(
        sca_l, ln[..., 0], ln[..., 1], ln[..., 2],
        a[..., 0], a[..., 1], a[..., 2], a[..., 3], a[..., 4], a[..., 5], 1.0)
    sho_r, elb_r, wri_r = _upper_chain(
        sca_r, ln[..., 3], ln[..., 4], ln[..., 5],
        a[..., 6], a[..., 7], a[..., 8], a[..., 9], a[..., 10], a[..., 11], -1.0)
    _, kne_l, ank_l = _lower_chain(
        pelvis, ln[..., 6], ln[..., 7], ln[..., 8],
        a[..., 12], a[..., 13], a[..., 14], a[..., 15], 1.0)
    _, kne_r, ank_r = _lower_chain(
        pelvis, ln[..., 9], ln[..., 10], ln[..., 11],
        a[..., 16], a[..., 17], a[..., 18], a[..., 19], -1.0)
    return np.concatenate(
        [sho_l, elb_l, wri_l, sho_r, elb_r, wri_r, kne_l, ank_l, kne_r, ank_r],
        axis=-1)


def state_to_vector(state: FullBodyState) -> np.ndarray:
    """Flatten a FullBodyState into the 32-entry filter layout."""
    ul, ur = state.upper_left, state.upper_right
    ll, lr = state.lower_left, state.lower_right
    angles = np.concatenate([
        ul.r_sca, ul.r_sho, [ul.r_elb],
        ur.r_sca, ur.r_sho, [ur.r_elb],
        ll.r_hip, [ll.r_kne],
        lr.r_hip, [lr.r_kne],
    ])
    lengths = np.array([
        ul.l_c, ul.l_h, ul.l_r, ur.l_c, ur.l_h, ur.l_r,
        ll.l_p, ll.l_f, ll.l_t, lr.l_p, lr.l_f, lr.l_t,
    ])
    return np.concatenate([angles, lengths])


def vector_to_state(vec: np.ndarray, pelvis: np.ndarray,
                    sca_l: np.ndarray, sca_r: np.ndarray) -> FullBodyState:
    """Rebuild a FullBodyState from a flat vector plus frame anchors."""
    v = np.asarray(vec, dtype=float)
    if v.shape != (STATE_DIM,):
        raise InputError(f"state vector must have shape ({STATE_DIM},)")
    a, ln = v[:N_ANGLES], v[N_ANGLES:]
    return FullBodyState(
        upper_left=UpperLimbParams("left", sca_l, ln[0], ln[1], ln[2],
                                   a[0:2], a[2:5], a[5]),
        upper_right=UpperLimbParams("right", sca_r, ln[3], ln[4], ln[5],
                                    a[6:8], a[8:11], a[11]),
        lower_left=LowerLimbParams("left", pelvis, ln[6], ln[7], ln[8],
                                   a[12:15], a[15]),
        lower_right=LowerLimbParams("right", pelvis, ln[9], ln[10], ln[11],
                                    a[16:19], a[19]),
    )


def mirror_state(state: FullBodyState) -> FullBodyState:
    """Reflect a state across the sagittal (YZ) plane.

    Anchors flip in X, Y/Z rotations change sign, hinge angles and X
    rotations carry over, and the two sides swap.
    """
    flip = np.array([-1.0, 1.0, 1.0])

    def _mirror_upper(p: UpperLimbParams, new_side: str) -> UpperLimbParams:
        return UpperLimbParams(
            new_side, p.p_sca * flip, p.l_c, p.l_h, p.l_r,
            p.r_sca * np.array([1.0, -1.0]),
            p.r_sho * np.array([1.0, -1.0, -1.0]),
            p.r_elb)

    def _mirror_lower(p: LowerLimbParams, new_side: str) -> LowerLimbParams:
        return LowerLimbParams(
            new_side, p.p_hip * flip, p.l_p, p.l_f, p.l_t,
            p.r_hip * np.array([1.0, -1.0, -1.0]),
            p.r_kne)

    return FullBodyState(
        upper_left=_mirror_upper(state.upper_right, "left"),
        upper_right=_mirror_upper(state.upper_left, "right"),
        lower_left=_mirror_lower(state.lower_right, "left"),
        lower_right=_mirror_lower(state.lower_left, "right"),
    )


def interior_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Angle at b formed by points a-b-c, in [0, pi]."""
    u = np.asarray(a, dtype=float) - b
    v = np.asarray(c, dtype=float) - b
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < _DEGENERATE_EPS or nv < _DEGENERATE_EPS:
        raise ValueError("degenerate joint triplet")
    cosang = np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)
    return float(np.arccos(cosang))


@dataclass(frozen=True)
class RawAngles:
    """Hinge angles measured directly from joint positions.

    ``angles`` maps track id -> per-frame interior angle in [0, pi];
    ``flagged`` marks frames whose triplet was degenerate (the angle is
    carried forward from the previous valid frame there).
    """

    angles: dict
    flagged: dict


def raw_joint_angles(seq: "SkeletonSequence") -> RawAngles:
    """Interior elbow/knee angles straight from the input positions.

    The knee uses the hip joint column when the sequence provides one and
    falls back to the pelvis root otherwise (the fallback angle is then
    only an approximation of the hinge).
    """
    triplets = {
        "elb_l": ("sho_l", "elb_l", "wri_l"),
        "elb_r": ("sho_r", "elb_r", "wri_r"),
        "kne_l": ("hip_l" if seq.has_joint("hip_l") else "pelvis", "kne_l", "ank_l"),
        "kne_r": ("hip_r" if seq.has_joint("hip_r") else "pelvis", "kne_r", "ank_r"),
    }
    n = seq.n_frames
    angles: dict = {}
    flagged: dict = {}
    for track_id, (ja, jb, jc) in triplets.items():
        pa = seq.positions[:, seq.joint_index(ja)]
        pb = seq.positions[:, seq.joint_index(jb)]
        pc = seq.positions[:, seq.joint_index(jc)]
        out = np.empty(n)
        bad = np.zeros(n, dtype=bool)
        for t in range(n):
            try:
                out[t] = interior_angle(pa[t], pb[t], pc[t])
            except ValueError:
                bad[t] = True
                out[t] = np.nan
        if bad.all():
            raise InputError(f"all frames degenerate for {track_id}")
        # carry forward, backfilling a degenerate head from the first valid frame
        first_valid = int(np.flatnonzero(~bad)[0])
        out[:first_valid] = out[first_valid]
        for t in range(first_valid + 1, n):
            if bad[t]:
                out[t] = out[t - 1]
        angles[track_id] = out
        flagged[track_id] = bad
    return RawAngles(angles=angles, flagged=flagged)
