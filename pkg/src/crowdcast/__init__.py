"""crowdcast: social-aware multi-agent trajectory forecasting."""

from .scene import (
    AgentTrack, PredictionInstance, Scene, SceneParseError, WindowConfig,
    denormalize_instance, denormalize_points, instance_at, load_scene,
    normalize_instance, sample_windows, save_scene, synth_scene,
)
from .grouping import (
    DEFAULT_DISTANCE_THRESHOLD, GroupConfig, GroupDetector, GroupSet,
    group_members, kernel, long_term_distance, scaled_threshold,
)
from .conception import (
    ConceptionConfig, ConceptionVector, FovConception, PartitionAssignment,
    assign_partition, conception_vector, moving_direction, partition_assignments,
    wrap_angle,
)
from .model import (
    FeatureBundle, ModelConfig, PredictionSet, TrajectoryForecaster,
    best_of_k_loss, linear_fit_extrapolate,
)
from .evaluation import (
    AttentionReport, ContributionReport, InterventionResult, MetricReport,
    RoleConstraintError, SceneEdit, contribution_ratios, evaluate_forecaster,
    metric_report, min_ade, min_fde, partition_attention, run_ablation,
    run_intervention,
)

__version__ = "0.1.0"
