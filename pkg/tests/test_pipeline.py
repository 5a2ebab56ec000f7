import json

import numpy as np
import pytest

from repseg import pipeline, synth
from repseg.errors import InputError
from repseg.evaluation import GroundTruth, accuracy, batch_evaluate
from repseg.sequence import save_sequence, save_truth
from repseg.ukf import UkfConfig


def mocap_cfg(seed=1, **kw):
    return pipeline.PipelineConfig(ukf=UkfConfig.for_profile("mocap"), seed=seed, **kw)


def kinect_cfg(seed=1, **kw):
    return pipeline.PipelineConfig(ukf=UkfConfig.for_profile("kinect"), seed=seed, **kw)


@pytest.fixture(scope="module")
def clean_run():
    script = synth.example_script("squat", seed=1)
    seq, truth = synth.generate(script, synth.NoiseProfile(0.0, 120.0, "clean"))
    result = pipeline.run_pipeline(seq, mocap_cfg(), keep_trace=True)
    return seq, truth, result


class TestRunPipeline:
    def test_noise_free_five_reps(self, clean_run):
        _, truth, result = clean_run
        assert result.outcome == "ok"
        assert result.primary_bin == 5
        assert len(result.segments) == 5
        report = accuracy(result, truth)
        assert report.alpha >= 0.97

    def test_kinect_grade_single_run(self):
        script = synth.example_script("squat", seed=2)
        seq, truth = synth.generate(script, synth.NoiseProfile.named("kinect"))
        result = pipeline.run_pipeline(seq, kinect_cfg(seed=2))
        assert len(result.segments) == 5
        assert accuracy(result, truth).alpha >= 0.80

    def test_static_sequence_is_non_periodic(self):
        script = synth.example_script("still", seed=1)
        seq, _ = synth.generate(script, synth.NoiseProfile(0.0, 120.0, "clean"))
        result = pipeline.run_pipeline(seq, mocap_cfg())
        assert result.outcome == "no-periodicity"
        assert result.segments == []

    def test_static_noisy_sequence_is_non_periodic(self):
        script = synth.example_script("still", seed=3)
        seq, _ = synth.generate(script, synth.NoiseProfile.named("kinect"))
        result = pipeline.run_pipeline(seq, kinect_cfg(seed=3))
        assert result.outcome == "no-periodicity"

    def test_segments_partition_frames(self, clean_run):
        _, _, result = clean_run
        assert result.segments[0][0] == 0
        assert result.segments[-1][1] == result.n_frames
        for (a, b), (c, d) in zip(result.segments, result.segments[1:]):
            assert b == c

    def test_config_echo_reproduces_run(self, clean_run):
        seq, _, result = clean_run
        cfg = pipeline.PipelineConfig.from_dict(result.config)
        again = pipeline.run_pipeline(seq, cfg)
        assert again.boundaries == result.boundaries
        assert again.segments == result.segments


class TestDeterminism:
    def test_byte_identical_results_and_dumps(self, tmp_path, clean_run):
        seq, _, _ = clean_run
        files = {}
        for tag in ("a", "b"):
            result = pipeline.run_pipeline(seq, mocap_cfg(), keep_trace=True)
            base = tmp_path / tag
            pipeline.save_result(result, base.with_suffix(".json"))
            (base.with_suffix(".spectra")).write_text(pipeline.spectra_csv(result))
            (base.with_suffix(".cand")).write_text(pipeline.candidates_csv(result))
            (base.with_suffix(".clus")).write_text(pipeline.clusters_csv(result))
            files[tag] = [base.with_suffix(s).read_bytes()
                          for s in (".json", ".spectra", ".cand", ".clus")]
        assert files["a"] == files["b"]


class TestResultFiles:
    def test_save_load_round_trip(self, tmp_path, clean_run):
        _, _, result = clean_run
        path = tmp_path / "r.json"
        pipeline.save_result(result, path)
        loaded = pipeline.load_result(path)
        assert loaded.boundaries == result.boundaries
        assert loaded.segments == [tuple(s) for s in result.segments]
        assert loaded.primary_bin == result.primary_bin
        assert loaded.config == result.config

    def test_timing_excluded_by_default(self, tmp_path, clean_run):
        _, _, result = clean_run
        path = tmp_path / "r.json"
        pipeline.save_result(result, path)
        payload = json.loads(path.read_text())
        assert payload["stage_seconds"] is None
        pipeline.save_result(result, path, include_timing=True)
        payload = json.loads(path.read_text())
        assert payload["stage_seconds"]


class TestDumps:
    def test_spectra_csv_schema(self, clean_run):
        _, _, result = clean_run
        lines = pipeline.spectra_csv(result).strip().split("\n")
        header = lines[0].split(",")
        assert header[:2] == ["bin", "freq_hz"]
        assert header[-1] == "power_sum"
        assert len(lines) == 1 + result.n_frames // 2 + 1

    def test_candidates_csv_schema(self, clean_run):
        _, _, result = clean_run
        lines = pipeline.candidates_csv(result).strip().split("\n")
        assert lines[0] == "frame,velocity_sq_sum,is_candidate"
        assert len(lines) == 1 + result.n_frames
        flagged = [int(ln.split(",")[0]) for ln in lines[1:]
                   if ln.split(",")[2] == "1"]
        assert flagged == result.candidate_frames

    def test_clusters_csv_schema(self, clean_run):
        _, _, result = clean_run
        lines = pipeline.clusters_csv(result).strip().split("\n")
        assert lines[0].startswith("frame,cluster,selected,f0")
        assert len(lines) == 1 + len(result.candidate_frames)

    def test_timeline_rows_match_frames(self, clean_run):
        _, truth, result = clean_run
        lines = pipeline.timeline_csv(result, truth).strip().split("\n")
        assert lines[0] == "frame,detected_segment,truth_segment"
        assert len(lines) == 1 + result.n_frames

    def test_dumps_need_trace(self, clean_run):
        seq, _, _ = clean_run
        result = pipeline.run_pipeline(seq, mocap_cfg())
        with pytest.raises(InputError, match="keep_trace"):
            pipeline.spectra_csv(result)


class TestBatchEvaluate:
    def test_two_sequence_manifest(self, tmp_path):
        rows = ["sequence,truth"]
        for seed in (1, 2):
            script = synth.example_script("squat", seed=seed)
            seq, truth = synth.generate(script, synth.NoiseProfile(0.0, 120.0, "c"))
            save_sequence(seq, tmp_path / f"s{seed}.seq")
            save_truth(truth.boundaries, truth.n_frames, tmp_path / f"s{seed}.truth")
            rows.append(f"s{seed}.seq,s{seed}.truth")
        manifest = tmp_path / "corpus.csv"
        manifest.write_text("\n".join(rows) + "\n")
        table = batch_evaluate(manifest, mocap_cfg())
        lines = table.strip().split("\n")
        assert lines[0] == "sequence,alpha,detected_segments,manual_segments"
        assert lines[-1].startswith("Average,")
        assert len(lines) == 4
        table2 = batch_evaluate(manifest, mocap_cfg())
        assert table == table2

    def test_bad_manifest_rejected(self, tmp_path):
        manifest = tmp_path / "bad.csv"
        manifest.write_text("foo,bar\nx,y\n")
        with pytest.raises(InputError, match="header"):
            batch_evaluate(manifest)


class TestConfigParsing:
    def test_round_trip(self):
        cfg = kinect_cfg(seed=9, power_threshold=0.8)
        back = pipeline.PipelineConfig.from_dict(cfg.to_dict())
        assert back.to_dict() == cfg.to_dict()

    def test_profile_shortcut(self):
        cfg = pipeline.PipelineConfig.from_json(
            '{"ukf": {"profile": "kinect"}, "seed": 3}')
        assert cfg.ukf.observation_noise == 0.03
        assert cfg.seed == 3

    def test_bad_json_rejected(self):
        with pytest.raises(InputError):
            pipeline.PipelineConfig.from_json("{nope")
        with pytest.raises(InputError):
            pipeline.PipelineConfig.from_json('{"power_threshold": 2.0}')
