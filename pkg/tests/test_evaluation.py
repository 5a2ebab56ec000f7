import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repseg import evaluation as ev
from repseg.errors import InputError


def truth_of(boundaries, n_frames=None):
    return ev.GroundTruth(boundaries=boundaries,
                          n_frames=n_frames or boundaries[-1])


class TestGroundTruth:
    def test_segments(self):
        t = truth_of([0, 100, 200])
        assert t.segments() == [(0, 100), (100, 200)]

    def test_rejects_unsorted(self):
        with pytest.raises(InputError):
            truth_of([0, 100, 100])
        with pytest.raises(InputError):
            truth_of([100, 0], n_frames=200)


class TestAccuracy:
    def test_identity_scores_one(self):
        t = truth_of([0, 100, 200, 300])
        rep = ev.accuracy(t.segments(), t)
        assert rep.alpha == 1.0
        assert rep.compared == 3

    def test_worked_example(self):
        t = truth_of([0, 100, 200])
        rep = ev.accuracy([(0, 90), (90, 200)], t)
        assert abs(rep.alpha - 0.9) < 1e-12

    def test_empty_detection_is_undefined(self):
        rep = ev.accuracy([], truth_of([0, 100]))
        assert rep.undefined and rep.alpha is None
        assert rep.manual_count == 1

    def test_counts_and_pairing(self):
        t = truth_of([0, 100, 200, 300])
        rep = ev.accuracy([(0, 100), (100, 300)], t)
        assert rep.compared == 2
        assert rep.detected_count == 2 and rep.manual_count == 3
        assert rep.errors == [0, 100]

    def test_can_go_negative(self):
        rep = ev.accuracy([(0, 500)], truth_of([0, 100, 200], n_frames=500))
        assert rep.alpha < 0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 20), st.integers(0, 4))
def test_boundary_perturbation_bound(delta, which):
    boundaries = [0, 100, 200, 300, 400, 500]
    t = truth_of(boundaries)
    base = t.segments()
    moved = [list(seg) for seg in base]
    moved[which][1] += delta
    if which + 1 < len(moved):
        moved[which + 1][0] += delta
    rep0 = ev.accuracy(base, t)
    rep1 = ev.accuracy([tuple(seg) for seg in moved], t)
    d = rep0.compared
    min_len = min(e - s for s, e in t.segments())
    assert abs(rep1.alpha - rep0.alpha) <= 2 * delta / (d * min_len) + 1e-12


class TestTable:
    def _report(self, alpha, detected=5, manual=5):
        return ev.AccuracyReport(alpha=alpha, undefined=alpha is None,
                                 compared=min(detected, manual),
                                 errors=[], manual_lengths=[],
                                 detected_count=detected, manual_count=manual)

    def test_single_row(self):
        table = ev.format_table([("a.seq", self._report(0.9))])
        lines = table.strip().split("\n")
        assert lines[0] == "sequence,alpha,detected_segments,manual_segments"
        assert lines[1].startswith("a.seq,0.9,")
        assert lines[2].startswith("Average,0.9,")

    def test_average_of_two(self):
        table = ev.format_table([("a", self._report(1.0)), ("b", self._report(0.8))])
        assert "Average,0.9," in table

    def test_undefined_is_nan_and_skipped_in_average(self):
        table = ev.format_table([("a", self._report(None, detected=0)),
                                 ("b", self._report(0.8))])
        lines = table.strip().split("\n")
        assert lines[1].startswith("a,nan,0,")
        assert lines[-1].startswith("Average,0.8,")

    def test_permuting_rows_keeps_average(self):
        rows = [("a", self._report(1.0)), ("b", self._report(0.7)),
                ("c", self._report(0.85))]
        t1 = ev.format_table(rows)
        t2 = ev.format_table(rows[::-1])
        assert t1.strip().split("\n")[-1] == t2.strip().split("\n")[-1]
