"""Independent reference implementations used to check the library.

Everything here is deliberately brute force and shares no code with the
package: homogeneous-transform forward kinematics, direct-summation DFT,
exhaustive minima scans, exhaustive k-means assignment enumeration, and
frame-by-frame span counting.
"""

import itertools

import numpy as np


# --- homogeneous-transform forward kinematics -------------------------------

def _hrot_x(a):
    c, s = np.cos(a), np.sin(a)
    m = np.eye(4)
    m[1, 1], m[1, 2], m[2, 1], m[2, 2] = c, -s, s, c
    return m


def _hrot_y(a):
    c, s = np.cos(a), np.sin(a)
    m = np.eye(4)
    m[0, 0], m[0, 2], m[2, 0], m[2, 2] = c, s, -s, c
    return m


def _hrot_z(a):
    c, s = np.cos(a), np.sin(a)
    m = np.eye(4)
    m[0, 0], m[0, 1], m[1, 0], m[1, 1] = c, -s, s, c
    return m


def _htrans(v):
    m = np.eye(4)
    m[:3, 3] = v
    return m


def _origin_of(m):
    return m[:3, 3].copy()


def fk_upper_oracle(p_sca, l_c, l_h, l_r, r_sca, r_sho, r_elb, side):
    """Arm chain by explicit 4x4 composition; returns (sho, elb, wri)."""
    sign = 1.0 if side == "left" else -1.0
    t = _htrans(p_sca) @ _hrot_x(r_sca[0]) @ _hrot_y(r_sca[1])
    t = t @ _htrans([sign * l_c, 0, 0])
    sho = _origin_of(t)
    t = t @ _hrot_x(r_sho[0]) @ _hrot_y(r_sho[1]) @ _hrot_z(r_sho[2])
    t = t @ _htrans([sign * l_h, 0, 0])
    elb = _origin_of(t)
    t = t @ _hrot_z(sign * r_elb) @ _htrans([sign * l_r, 0, 0])
    wri = _origin_of(t)
    return sho, elb, wri


def fk_lower_oracle(p_hip, l_p, l_f, l_t, r_hip, r_kne, side):
    """Leg chain by explicit 4x4 composition; returns (hip_centre, kne, ank)."""
    sign = 1.0 if side == "left" else -1.0
    t = _htrans(p_hip) @ _htrans([sign * l_p, 0, 0])
    hip_c = _origin_of(t)
    t = t @ _hrot_x(r_hip[0]) @ _hrot_y(r_hip[1]) @ _hrot_z(r_hip[2])
    t = t @ _htrans([0, 0, -l_f])
    kne = _origin_of(t)
    t = t @ _hrot_x(-r_kne) @ _htrans([0, 0, -l_t])
    ank = _origin_of(t)
    return hip_c, kne, ank


# --- direct-summation DFT ----------------------------------------------------

def dft_magnitudes_oracle(samples):
    """|X_k| for k = 0 .. floor(n/2) by the plain O(n^2) sum."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    mags = []
    for k in range(n // 2 + 1):
        acc = complex(0.0, 0.0)
        for t in range(n):
            acc += x[t] * np.exp(-2j * np.pi * k * t / n)
        mags.append(abs(acc))
    return np.array(mags)


# --- minima scans -------------------------------------------------------------

def strict_local_minima_oracle(s):
    """All t with s[t-1] > s[t] < s[t+1]."""
    s = np.asarray(s, dtype=float)
    return [t for t in range(1, len(s) - 1) if s[t] < s[t - 1] and s[t] < s[t + 1]]


def window_argmin_holds(s, t_c, window):
    """Eq-style check: t_c minimises s over its window."""
    lo, hi = window
    seg = np.asarray(s[lo:hi + 1], dtype=float)
    return np.all(s[t_c] <= seg)


# --- k-means assignment enumeration ------------------------------------------

def kmeans_enum_oracle(points, k):
    """Global minimum of the within-cluster squared-distance cost over all
    label assignments (centres at cluster means).  Exponential; N <= 10."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    best = np.inf
    best_labels = None
    for labels in itertools.product(range(k), repeat=n):
        cost = 0.0
        for c in range(k):
            members = pts[[i for i in range(n) if labels[i] == c]]
            if len(members):
                centre = members.mean(axis=0)
                cost += float(((members - centre) ** 2).sum())
        if cost < best - 1e-15:
            best = cost
            best_labels = labels
    return best, best_labels


def cluster_costs_oracle(points, labels, k):
    """(intra, inter) sums for a given assignment, straight from the
    definitions: intra over members vs their centre, inter over all ordered
    centre pairs."""
    pts = np.asarray(points, dtype=float)
    centres = []
    intra = 0.0
    for c in range(k):
        members = pts[[i for i in range(len(pts)) if labels[i] == c]]
        centre = members.mean(axis=0) if len(members) else np.zeros(pts.shape[1])
        centres.append(centre)
        intra += float(((members - centre) ** 2).sum())
    inter = 0.0
    for j in range(k):
        for c in range(k):
            inter += float(((centres[j] - centres[c]) ** 2).sum())
    return intra, inter


# --- span counting -------------------------------------------------------------

def span_count_oracle(members, n_frames, radius):
    """Number of frames strictly closer than ``radius`` to any member."""
    covered = np.zeros(n_frames, dtype=bool)
    for t_c in members:
        for f in range(n_frames):
            if abs(f - t_c) < radius:
                covered[f] = True
    return int(covered.sum())
