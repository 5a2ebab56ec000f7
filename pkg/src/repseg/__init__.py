"""Unsupervised segmentation of repetitive skeletal motion into repetitions.

The pipeline filters joint trajectories through a four-pass unscented
Kalman filter over a full-body kinematic chain, picks the dominant
repetition frequency and the parameters that carry it, detects candidate
segmentation points at zero-velocity crossings, and consolidates them with
adaptive k-means.  A seeded synthetic-motion generator and a ground-truth
accuracy metric support end-to-end verification.
"""

from .clustering import (BoundarySelection, ClusterModel, adaptive_k,
                         boundaries_to_segments, clustering_cost, kmeans,
                         select_boundaries)
from .detection import (BandpassSpec, CandidatePoint, bandpass,
                        detect_candidates, squared_velocity_sum, velocity)
from .errors import (InputError, NoPeriodicityError, NumericalError,
                     RepsegError, StageError)
from .evaluation import AccuracyReport, GroundTruth, accuracy, batch_evaluate
from .frequency import (ParameterTrack, SpectrumSet, compute_spectra,
                        primary_frequency, select_representative)
from .kinematics import (FullBodyState, JointObservation, LowerLimbParams,
                         UpperLimbParams, forward_lower, forward_upper,
                         full_body_forward, mirror_state, raw_joint_angles)
from .pipeline import (PipelineConfig, SegmentationResult, load_result,
                       run_pipeline, save_result)
from .sequence import SkeletonSequence, load_sequence, load_truth, save_sequence, save_truth
from .synth import (DofSpec, MotionScript, NoiseProfile, example_script,
                    generate)
from .ukf import (FourPassResult, StateTrack, UkfConfig, estimate_bone_lengths,
                  four_pass_filter, ukf_pass)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport", "BandpassSpec", "BoundarySelection", "CandidatePoint",
    "ClusterModel", "DofSpec", "FourPassResult", "FullBodyState",
    "GroundTruth", "InputError", "JointObservation", "LowerLimbParams",
    "MotionScript", "NoPeriodicityError", "NoiseProfile", "NumericalError",
    "ParameterTrack", "PipelineConfig", "RepsegError", "SegmentationResult",
    "SkeletonSequence", "SpectrumSet", "StageError", "StateTrack",
    "UkfConfig", "UpperLimbParams", "accuracy", "adaptive_k", "bandpass",
    "batch_evaluate", "boundaries_to_segments", "clustering_cost",
    "compute_spectra", "detect_candidates", "estimate_bone_lengths",
    "example_script", "forward_lower", "forward_upper", "four_pass_filter",
    "full_body_forward", "generate", "kmeans", "load_result", "load_sequence",
    "load_truth", "mirror_state", "primary_frequency", "raw_joint_angles",
    "run_pipeline", "save_result", "save_sequence", "save_truth",
    "select_boundaries", "select_representative", "squared_velocity_sum",
    "ukf_pass", "velocity",
]
