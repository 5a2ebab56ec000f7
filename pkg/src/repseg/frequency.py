"""Primary-frequency analysis and representative-parameter selection.

Frequencies are integer DFT bins, i.e. cycles per sequence.  The DC bin is
excluded both from normalisation and from the primary-frequency search, so
every result is invariant to constant offsets and positive rescaling of
the input tracks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError, NoPeriodicityError

INACTIVE_POWER = 1e-12  # total non-DC power below this marks a track inactive
MIN_SAMPLES = 8


@dataclass(frozen=True)
class ParameterTrack:
    """One kinematic parameter's time series."""

    id: str
    samples: np.ndarray
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.samples.ndim != 1 or len(self.samples) < MIN_SAMPLES:
            raise InputError(
                f"track {self.id!r} needs >= {MIN_SAMPLES} samples in one dimension")
        if not np.all(np.isfinite(self.samples)):
            raise InputError(f"track {self.id!r} contains non-finite samples")
        if not self.rate > 0:
            raise InputError("track rate must be positive")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SpectrumSet:
    """Per-track amplitude spectra over bins 0 .. floor(n/2).

    Amplitudes are normalised so each active track's power sums to one over
    the non-DC bins; inactive (near-constant) tracks are all-zero rows.
    """

    ids: tuple
    amplitudes: np.ndarray        # (n_tracks, n_bins)
    active: np.ndarray            # (n_tracks,) bool
    n_frames: int
    rate: float
    primary_bin: int | None = None

    @property
    def power(self) -> np.ndarray:
        return self.amplitudes ** 2

    def track_row(self, track_id: str) -> int:
        try:
            return self.ids.index(track_id)
        except ValueError:
            raise InputError(f"no spectrum for track {track_id!r}") from None


def compute_spectra(tracks) -> SpectrumSet:
    """DFT-magnitude spectra of a set of equal-length tracks."""
    tracks = list(tracks)
    if not tracks:
        raise InputError("no tracks given")
    n = len(tracks[0])
    if any(len(t) != n for t in tracks):
        raise InputError("all tracks must have the same length")
    rate = tracks[0].rate
    data = np.stack([t.samples for t in tracks])
    mags = np.abs(np.fft.rfft(data, axis=1))
    power = mags ** 2
    total = power[:, 1:].sum(axis=1)
    active = total >= INACTIVE_POWER
    amplitudes = np.zeros_like(mags)
    if active.any():
        amplitudes[active] = mags[active] / np.sqrt(total[active, None])
    amplitudes[:, 0] = 0.0
    return SpectrumSet(ids=tuple(t.id for t in tracks), amplitudes=amplitudes,
                       active=active, n_frames=n, rate=rate)


def primary_frequency(spectra: SpectrumSet) -> int:
    """Non-DC bin with the largest across-track power sum (ties -> lower bin)."""
    if not spectra.active.any():
        raise NoPeriodicityError("no track carries non-constant content")
    sums = spectra.power[:, 1:].sum(axis=0)
    return int(np.argmax(sums)) + 1


def attach_primary(spectra: SpectrumSet) -> SpectrumSet:
    """Copy of ``spectra`` with the primary bin filled in."""
    return replace(spectra, primary_bin=primary_frequency(spectra))


def select_representative(spectra: SpectrumSet, power_threshold: float,
                          primary_bin: int | None = None) -> list:
    """Smallest prefix of tracks (by power at the primary bin, descending)
    whose accumulated power share reaches ``power_threshold``.

    A share exactly equal to the threshold already satisfies it, so a
    0.5/0.4/0.1 split at 0.9 selects the first two tracks.
    """
    if not 0 < power_threshold <= 1:
        raise InputError("power threshold must lie in (0, 1]")
    if primary_bin is None:
        primary_bin = (spectra.primary_bin if spectra.primary_bin is not None
                       else primary_frequency(spectra))
    if primary_bin < 1 or primary_bin >= spectra.amplitudes.shape[1]:
        raise InputError(f"primary bin {primary_bin} out of range")
    p = spectra.power[:, primary_bin]
    total = p.sum()
    if total <= 0:
        raise NoPeriodicityError(f"no power at bin {primary_bin}")
    order = np.argsort(-p, kind="stable")
    share = np.cumsum(p[order]) / total
    over = np.flatnonzero(share >= power_threshold)
    if len(over):
        chosen = order[:over[0] + 1]
    else:
        chosen = order[p[order] > 0]
    return [spectra.ids[i] for i in chosen]
