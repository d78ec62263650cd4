"""Metrics, feature-contribution analysis and experiment drivers.

minADE / minFDE follow the best-of-K convention: only the closest of the K
candidate futures is scored.  Contribution ratios measure how much signal
each feature block pushes through the fusion layer; partition attention does
the same for the three perception partitions through the first embedding
layer.  Both are normalized shares that sum to one (degenerate all-zero
inputs are flagged instead of divided).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import clone

from .conception import PARTITION_SLOTS, ConceptionVector
from .grouping import long_term_distance
from .model import FeatureBundle, PredictionSet, TrajectoryForecaster
from .scene import PredictionInstance

log = logging.getLogger(__name__)


# -- displacement metrics ------------------------------------------------------

def min_ade(truth, candidates) -> float:
    """Best-of-K mean per-step displacement."""
    truth_a, cand_a = _check_metric_shapes(truth, candidates)
    steps = np.linalg.norm(cand_a - truth_a, axis=2)   # [K, n_f]
    return float(steps.mean(axis=1).min())


def min_fde(truth, candidates) -> float:
    """Best-of-K final-step displacement."""
    truth_a, cand_a = _check_metric_shapes(truth, candidates)
    return float(np.linalg.norm(cand_a[:, -1, :] - truth_a[-1], axis=1).min())


def _check_metric_shapes(truth, candidates):
    truth_a = np.asarray(truth, dtype=np.float64)
    cand_a = np.asarray(candidates, dtype=np.float64)
    if truth_a.ndim != 2 or truth_a.shape[1] != 2:
        raise ValueError(f"truth must be (n_f, 2), got {truth_a.shape}")
    if cand_a.ndim != 3 or cand_a.shape[1:] != truth_a.shape:
        raise ValueError(f"candidates must be (K, {truth_a.shape[0]}, 2), got {cand_a.shape}")
    return truth_a, cand_a


@dataclass(frozen=True)
class MetricReport:
    k: int
    per_instance_ade: tuple[float, ...]
    per_instance_fde: tuple[float, ...]

    @property
    def mean_min_ade(self) -> float:
        return float(np.mean(self.per_instance_ade))

    @property
    def mean_min_fde(self) -> float:
        return float(np.mean(self.per_instance_fde))

    def row(self) -> dict:
        return {"k": self.k, "min_ade": self.mean_min_ade, "min_fde": self.mean_min_fde,
                "instances": len(self.per_instance_ade)}


def metric_report(truths, candidate_sets, k: int | None = None) -> MetricReport:
    ades, fdes = [], []
    for truth, cands in zip(truths, candidate_sets):
        ades.append(min_ade(truth, cands))
        fdes.append(min_fde(truth, cands))
    k = k if k is not None else (np.asarray(candidate_sets[0]).shape[0] if len(candidate_sets) else 0)
    return MetricReport(k, tuple(ades), tuple(fdes))


def evaluate_forecaster(model: TrajectoryForecaster, instances) -> MetricReport:
    instances = [i for i in instances if i.future_truth is not None]
    if not instances:
        raise ValueError("no instances with ground-truth futures to evaluate")
    sets = model.predict(instances)
    truths = []
    for inst in instances:
        # compare in original coordinates; predictions are denormalized
        truths.append(np.asarray(inst.future_truth) if not inst.normalized
                      else np.asarray(inst.future_truth) - inst.origin_offset)
    return metric_report(truths, [s.trajectories for s in sets], k=model.n_modes)


# -- contribution and attention shares -----------------------------------------

@dataclass(frozen=True)
class ContributionReport:
    r_self: float
    r_group: float
    r_con: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {"self": self.r_self, "group": self.r_group, "conception": self.r_con,
                "degenerate": self.degenerate}


@dataclass(frozen=True)
class AttentionReport:
    right: float
    left: float
    rear: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {"right": self.right, "left": self.left, "rear": self.rear,
                "degenerate": self.degenerate}


def contribution_ratios(bundle: FeatureBundle, fuse_weights: np.ndarray) -> ContributionReport:
    """Energy share of each feature block through the fusion layer.

    The block's energy is the L2 norm of its rows mapped through the matching
    input-slice of the fusion weights; the concat order is (conception, self,
    group).  All-zero total is reported as (1, 0, 0) with the degenerate flag.
    """
    two_d = bundle.f_con.shape[1]
    d = bundle.f_self.shape[1]
    w = np.asarray(fuse_weights)
    if w.shape[0] != two_d + 2 * d:
        raise ValueError(f"fusion weights expect input {w.shape[0]}, features give {two_d + 2 * d}")
    w_con, w_self, w_group = w[:two_d], w[two_d:two_d + d], w[two_d + d:]
    e_con = float(np.linalg.norm(bundle.f_con @ w_con))
    e_self = float(np.linalg.norm(bundle.f_self @ w_self))
    e_group = float(np.linalg.norm(bundle.f_group @ w_group))
    total = e_self + e_group + e_con
    if total == 0.0:
        return ContributionReport(1.0, 0.0, 0.0, degenerate=True)
    return ContributionReport(e_self / total, e_group / total, e_con / total)


def partition_attention(conception: ConceptionVector | np.ndarray, embed_weights: np.ndarray) -> AttentionReport:
    """Share of perception signal per partition through the first embed layer.

    A partition's energy is the norm of its input rows of the embedding
    weights scaled by the corresponding vector slots.  All-zero input (e.g.
    perception disabled) yields the all-zero degenerate report.
    """
    values = conception.as_array() if isinstance(conception, ConceptionVector) else np.asarray(conception, dtype=np.float64)
    w = np.asarray(embed_weights)
    if w.shape[0] != 7 or values.shape != (7,):
        raise ValueError("expected a 7-slot perception vector and matching weights")
    energies = {}
    for part, slots in PARTITION_SLOTS.items():
        energies[part] = float(np.linalg.norm(w[list(slots)] * values[list(slots), None]))
    total = sum(energies.values())
    if total == 0.0:
        return AttentionReport(0.0, 0.0, 0.0, degenerate=True)
    return AttentionReport(energies["right"] / total, energies["left"] / total, energies["rear"] / total)


def analysis_reports(model: TrajectoryForecaster, pset: PredictionSet) -> tuple[ContributionReport, AttentionReport]:
    contribution = contribution_ratios(pset.feature_bundle, model.fuse_weight_)
    attention = partition_attention(pset.conception, model.conception_input_weight_)
    return contribution, attention


# -- ablation -------------------------------------------------------------------

ABLATION_FLAGS = {
    "v0": {"disable_conception": False, "disable_group": False},
    "v1": {"disable_conception": True, "disable_group": False},
    "v2": {"disable_conception": False, "disable_group": True},
    "v3": {"disable_conception": True, "disable_group": True},
}


def run_ablation(train_set, eval_set, base_model: TrajectoryForecaster,
                 variants=("v0", "v1", "v2", "v3")) -> dict[str, MetricReport]:
    """Train/evaluate the four feature-flag variants with identical seeds."""
    if not train_set:
        raise ValueError("ablation needs a non-empty training set")
    out: dict[str, MetricReport] = {}
    for name in variants:
        variant: TrajectoryForecaster = clone(base_model)
        variant.set_params(**ABLATION_FLAGS[name])
        variant.fit(train_set)
        out[name] = evaluate_forecaster(variant, eval_set)
        log.info("ablation %s: min_ade %.4f min_fde %.4f", name,
                 out[name].mean_min_ade, out[name].mean_min_fde)
    return out


def ablation_table(reports: dict[str, MetricReport]) -> str:
    lines = ["variant  min_ade    min_fde"]
    for name, rep in reports.items():
        lines.append(f"{name:7s} {rep.mean_min_ade:9.4f} {rep.mean_min_fde:9.4f}")
    return "\n".join(lines)


# -- intervention ----------------------------------------------------------------

class RoleConstraintError(ValueError):
    """An edit's track violates the long-term distance constraint of its role."""


@dataclass(frozen=True)
class SceneEdit:
    role: str                   # "neighbor" | "group-member"
    track: np.ndarray           # (n_past, 2) positions over the observed window
    agent_id: str = ""


@dataclass(frozen=True)
class InterventionResult:
    before: PredictionSet
    after: PredictionSet
    before_attention: AttentionReport
    after_attention: AttentionReport
    before_contribution: ContributionReport
    after_contribution: ContributionReport


def apply_edits(inst: PredictionInstance, edits: list[SceneEdit], distance_threshold: float) -> PredictionInstance:
    """Add edit agents as neighbours after validating their role constraint."""
    neighbors = dict(inst.neighbors)
    for i, edit in enumerate(edits):
        track = np.asarray(edit.track, dtype=np.float64)
        if track.shape != inst.observed.shape:
            raise ValueError(f"edit track must cover the observed window {inst.observed.shape}, got {track.shape}")
        distance = long_term_distance(inst.observed, track)
        if edit.role == "group-member":
            if distance > distance_threshold:
                raise RoleConstraintError(
                    f"edit {i}: long-term distance {distance:.2f} exceeds the group threshold "
                    f"{distance_threshold:.2f}; a group member must stay within it")
        elif edit.role == "neighbor":
            if distance <= distance_threshold:
                raise RoleConstraintError(
                    f"edit {i}: long-term distance {distance:.2f} is within the group threshold "
                    f"{distance_threshold:.2f}; an unrelated neighbor must exceed it")
        else:
            raise ValueError(f"edit {i}: unknown role {edit.role!r}")
        agent_id = edit.agent_id or f"edit-{i}"
        if agent_id in neighbors:
            raise ValueError(f"edit {i}: agent id {agent_id!r} already present")
        neighbors[agent_id] = track
    return replace(inst, neighbors=neighbors)


def run_intervention(inst: PredictionInstance, edits: list[SceneEdit],
                     model: TrajectoryForecaster) -> InterventionResult:
    """Forecast and analyze an instance before and after scene edits."""
    edited = apply_edits(inst, edits, model.distance_threshold)
    before = model.forward(inst)
    after = model.forward(edited)
    b_con, b_att = analysis_reports(model, before)
    a_con, a_att = analysis_reports(model, after)
    return InterventionResult(before, after, b_att, a_att, b_con, a_con)
