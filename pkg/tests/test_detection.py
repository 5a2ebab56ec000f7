import numpy as np
import pytest
from scipy.signal import butter, sosfreqz

from repseg import detection as det
from repseg.errors import InputError
from repseg.frequency import ParameterTrack

from oracles import strict_local_minima_oracle, window_argmin_holds


def track(samples, tid="t0", rate=120.0):
    return ParameterTrack(id=tid, samples=np.asarray(samples, dtype=float), rate=rate)


def sine(n, cycles, amp=1.0, phase=0.0):
    t = np.arange(n)
    return amp * np.sin(2 * np.pi * cycles * t / n + phase)


class TestBandpassSpec:
    def test_low_centre_rejected(self):
        with pytest.raises(InputError):
            det.BandpassSpec(center=1, n_frames=600, rate=120.0)

    def test_near_nyquist_rejected(self):
        with pytest.raises(InputError):
            det.BandpassSpec(center=299, n_frames=600, rate=120.0)

    def test_edges_in_hz(self):
        spec = det.BandpassSpec(center=6, n_frames=600, rate=120.0)
        lo, hi = spec.edges_hz()
        assert abs(lo - 4.5 * 120 / 600) < 1e-12
        assert abs(hi - 7.5 * 120 / 600) < 1e-12


class TestBandpass:
    def test_centre_bin_amplitude_preserved(self):
        n = 600
        spec = det.BandpassSpec(center=6, n_frames=n, rate=120.0)
        out = det.bandpass(track(sine(n, 6)), spec)
        mid = out.samples[n // 4: 3 * n // 4]
        assert abs(np.max(np.abs(mid)) - 1.0) < 0.05

    def test_out_of_band_attenuated(self):
        # designed-filter response at 3x the centre frequency predicts the loss
        n = 600
        spec = det.BandpassSpec(center=6, n_frames=n, rate=120.0)
        lo, hi = spec.edges_hz()
        sos = butter(spec.order, [lo, hi], btype="bandpass", fs=spec.rate, output="sos")
        w, h = sosfreqz(sos, worN=[18 * spec.rate / n], fs=spec.rate)
        two_pass_gain = abs(h[0]) ** 2
        assert two_pass_gain < 0.1
        out = det.bandpass(track(sine(n, 18)), spec)
        mid = out.samples[n // 4: 3 * n // 4]
        assert np.max(np.abs(mid)) < 0.1

    def test_constant_rejected_to_zero(self):
        n = 400
        spec = det.BandpassSpec(center=5, n_frames=n, rate=100.0)
        out = det.bandpass(track(np.full(n, 3.7), rate=100.0), spec)
        assert np.max(np.abs(out.samples)) < 1e-6 * 3.7


class TestVelocity:
    def test_linear_ramp(self):
        x = 0.25 * np.arange(50)
        v = det.velocity(track(x, rate=10.0))
        np.testing.assert_allclose(v.samples, 2.5, atol=1e-12)

    def test_constant_gives_zeros(self):
        v = det.velocity(track(np.full(30, 1.5)))
        np.testing.assert_allclose(v.samples, 0.0, atol=1e-12)

    def test_sampled_sine_matches_analytic_derivative(self):
        n, cycles, rate = 400, 5, 100.0
        x = sine(n, cycles)
        v = det.velocity(track(x, rate=rate))
        t = np.arange(n)
        omega = 2 * np.pi * cycles / n
        analytic = omega * np.cos(omega * t) * rate
        # central differences are second order: error <= omega^2 * h^2 / 6 * max|f'''|
        bound = rate * omega ** 3 / 6 * 1.05
        interior_err = np.abs(v.samples[1:-1] - analytic[1:-1]).max()
        assert interior_err <= bound


class TestDetectCandidates:
    def test_rectified_sine_yields_two_per_cycle(self):
        n, primary = 600, 5
        # velocity whose squared sum is a shifted rectified sine: zeros at
        # 30 + 60k, all interior
        v = track(np.sin(np.pi * 2 * primary * (np.arange(n) - 30) / n))
        vals = track(np.zeros(n), "vals")
        cands = det.detect_candidates([v], primary, n, [vals])
        assert len(cands) == 2 * primary
        assert [c.frame for c in cands] == [30 + 60 * k for k in range(2 * primary)]

    def test_monotone_curve_has_no_candidates(self):
        n = 200
        v = track(np.linspace(1.0, 2.0, n))
        cands = det.detect_candidates([v], 4, n, [v])
        assert cands == []

    def test_all_candidates_are_window_argmins(self):
        rng = np.random.default_rng(3)
        n, primary = 480, 6
        v1 = track(sine(n, primary, 1.0, 0.3) + 0.05 * rng.normal(size=n), "a")
        v2 = track(sine(n, primary, 0.5, 1.2) + 0.05 * rng.normal(size=n), "b")
        cands = det.detect_candidates([v1, v2], primary, n, [v1, v2])
        s = det.squared_velocity_sum([v1, v2])
        minima = set(strict_local_minima_oracle(s))
        for c in cands:
            assert c.frame in minima
            assert window_argmin_holds(s, c.frame, c.window)

    def test_pause_script_counts_exceed_twice_reps(self):
        # synthetic five-rep pause sequence: candidate count >= 10 and every
        # candidate is a genuine local minimum
        from repseg import synth
        from repseg.ukf import UkfConfig, four_pass_filter
        from repseg import frequency as fq

        script = synth.example_script("squat", seed=2, pause_fraction=0.2)
        seq, _ = synth.generate(script, synth.NoiseProfile.named("mocap"))
        result = four_pass_filter(seq, UkfConfig.for_profile("mocap"))
        spectra = fq.compute_spectra(result.tracks)
        primary = fq.primary_frequency(spectra)
        chosen = fq.select_representative(spectra, 0.9, primary)
        spec = det.BandpassSpec(center=primary, n_frames=seq.n_frames, rate=seq.rate)
        by_id = {t.id: t for t in result.tracks}
        filtered = [det.bandpass(by_id[tid], spec) for tid in chosen]
        vels = [det.velocity(t) for t in filtered]
        cands = det.detect_candidates(vels, primary, seq.n_frames, filtered)
        assert len(cands) >= 2 * script.reps
        s = det.squared_velocity_sum(vels)
        minima = set(strict_local_minima_oracle(s))
        assert all(c.frame in minima for c in cands)

    def test_time_shift_equivariance(self):
        n, primary, shift = 600, 5, 57
        base = sine(n, primary, 1.0, 0.4) + 0.3 * sine(n, 2 * primary, 1.0, 1.0)
        rolled = np.roll(base, shift)
        c0 = det.detect_candidates([track(base)], primary, n, [track(base)])
        c1 = det.detect_candidates([track(rolled)], primary, n, [track(rolled)])
        f0 = {(c.frame + shift) % n for c in c0}
        f1 = {c.frame for c in c1}
        length = det.window_length(n, primary)
        interior = {f for f in f0 if length <= f < n - length}
        assert interior <= f1

    def test_empty_selection_rejected(self):
        with pytest.raises(InputError, match="frequency selection"):
            det.detect_candidates([], 5, 100, [])

    def test_near_coincident_candidates_merge(self):
        n, primary = 240, 4
        s_root = sine(n, primary, 1.0, 0.2)
        v = track(s_root)
        # inject a micro-dip 2 frames after each minimum of s
        sq = s_root ** 2
        minima = strict_local_minima_oracle(sq)
        perturbed = np.sqrt(np.maximum(sq, 0.0))
        for m in minima:
            if m + 2 < n:
                perturbed[m + 2] = perturbed[m] * 0.5
        vt = track(perturbed)
        cands = det.detect_candidates([vt], primary, n, [vt])
        frames = [c.frame for c in cands]
        assert all(b - a > det.MERGE_DISTANCE for a, b in zip(frames, frames[1:]))
