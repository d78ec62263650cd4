"""Trajectory forecaster: fused social features into an attention predictor.

Per instance three feature blocks are built over the observed steps (the
target's own trajectory, the averaged group-member embedding, and the
perception-vector embedding), fused through one tanh layer, self-attended by
a transformer encoder, and decoded against a least-squares linear
extrapolation of the observed track.  K parallel output heads emit candidate
futures as residuals on top of that extrapolation; training scores only the
closest candidate (best-of-K).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import nn
from .conception import ConceptionConfig, ConceptionVector, conception_vector
from .grouping import GroupConfig, GroupSet, group_members
from .nn.tensor import Tensor, take_along_axis
from .scene import PredictionInstance, WindowConfig, denormalize_points, normalize_instance
from .validation import as_points

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 32
    model_dim: int = 128
    encoder_layers: int = 2
    decoder_layers: int = 2
    heads: int = 4
    n_modes: int = 20
    ff_dim: int | None = None
    disable_group: bool = False
    disable_conception: bool = False

    def __post_init__(self):
        if self.model_dim % self.heads != 0:
            raise ValueError("model_dim must be divisible by heads")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")

    @property
    def hidden_ff(self) -> int:
        return self.ff_dim if self.ff_dim is not None else 2 * self.model_dim


@dataclass(frozen=True)
class FeatureBundle:
    """Per-instance feature blocks; disabled blocks are exactly zero."""

    f_self: np.ndarray   # (n_past, embed_dim)
    f_group: np.ndarray  # (n_past, embed_dim)
    f_con: np.ndarray    # (n_past, 2*embed_dim)
    fused: np.ndarray    # (n_past, model_dim)


@dataclass(frozen=True)
class PredictionSet:
    """K candidate futures for one target, in original scene coordinates."""

    target_id: str
    trajectories: np.ndarray        # (n_modes, n_future, 2), denormalized
    linear_fit: np.ndarray          # (n_future, 2), denormalized
    feature_bundle: FeatureBundle
    groups: GroupSet
    conception: ConceptionVector
    scene_id: str = ""
    window_start: int = 0


def linear_fit_extrapolate(observed, cfg: WindowConfig) -> np.ndarray:
    """Least-squares line through the observed steps, evaluated at the future steps.

    x(t) and y(t) are fitted independently over step indices 0..n_past-1 and
    evaluated at n_past..n_past+n_future-1.
    """
    pts = as_points(observed, name="observed")
    n_p = pts.shape[0]
    t = np.arange(n_p, dtype=np.float64)
    t_mean = t.mean()
    centered_t = t - t_mean
    denom = (centered_t * centered_t).sum()
    p_mean = pts.mean(axis=0)
    slope = (centered_t[:, None] * (pts - p_mean)).sum(axis=0) / denom
    intercept = p_mean - slope * t_mean
    future_t = np.arange(n_p, n_p + cfg.n_future, dtype=np.float64)
    return intercept + np.outer(future_t, slope)


def best_of_k_loss(truth, candidates):
    """min over candidates of the L2 distance (root of summed squared diffs).

    Differentiable through the selected candidate only when given Tensors;
    plain arrays return a float.
    """
    if isinstance(candidates, Tensor) or isinstance(truth, Tensor):
        truth_t = truth if isinstance(truth, Tensor) else Tensor(truth)
        cand_t = candidates if isinstance(candidates, Tensor) else Tensor(candidates)
        per = _candidate_distances(cand_t.reshape((1,) + cand_t.shape), truth_t.reshape((1,) + truth_t.shape))
        idx = np.argmin(per.data, axis=1)[:, None]
        return take_along_axis(per, idx, 1).mean()
    truth_a = np.asarray(truth, dtype=np.float64)
    cand_a = np.asarray(candidates, dtype=np.float64)
    if cand_a.shape[1:] != truth_a.shape:
        raise ValueError(f"candidate shape {cand_a.shape} does not match truth {truth_a.shape}")
    return float(np.sqrt(((cand_a - truth_a) ** 2).sum(axis=(1, 2))).min())


def _candidate_distances(cands: Tensor, truth: Tensor) -> Tensor:
    """[B,K,n_f,2] x [B,n_f,2] -> [B,K] L2 distances."""
    diff = cands - truth.reshape(truth.shape[0], 1, truth.shape[1], 2)
    sq = diff * diff
    return sq.sum(axis=3).sum(axis=2).sqrt()


class ForecastNetwork(nn.Module):
    """All trainable pieces, assembled for a fixed window size."""

    def __init__(self, cfg: ModelConfig, window: WindowConfig, rng: np.random.Generator):
        d, dm = cfg.embed_dim, cfg.model_dim
        self.cfg = cfg
        self.window = window
        self.embed_self = nn.TwoLayerEncoder(2, d, rng, "embed_self")
        self.embed_group = nn.TwoLayerEncoder(4, d, rng, "embed_group")
        self.embed_con = nn.TwoLayerEncoder(7, 2 * d, rng, "embed_con")
        self.fuse = nn.Linear(4 * d, dm, rng, "fuse")
        self.encoder = [nn.EncoderLayer(dm, cfg.heads, cfg.hidden_ff, rng, f"encoder{i}")
                        for i in range(cfg.encoder_layers)]
        self.lin_channel = nn.Linear(2, dm, rng, "linfit_channel")
        self.lin_time = nn.Parameter(nn.xavier_uniform(rng, window.n_future, window.n_past), "linfit_time.w")
        self.decoder = [nn.DecoderLayer(dm, cfg.heads, cfg.hidden_ff, rng, f"decoder{i}")
                        for i in range(cfg.decoder_layers)]
        self.head = nn.Linear(window.n_past * dm, cfg.n_modes * window.n_future * 2, rng, "head")
        self.pos = nn.positional_encoding(window.n_past, dm)

    def forward(self, batch: "Batch", collect_features: bool = False):
        cfg, window = self.cfg, self.window
        n_b = batch.observed.shape[0]
        n_p, d, dm = window.n_past, cfg.embed_dim, cfg.model_dim

        obs = Tensor(batch.observed)
        f_self = self.embed_self(obs)

        if cfg.disable_group or batch.member_pairs is None:
            f_group = Tensor(np.zeros((n_b, n_p, d)))
        else:
            pair_emb = self.embed_group(Tensor(batch.member_pairs))
            f_group = (pair_emb * Tensor(batch.member_mask)).sum(axis=1) * Tensor(batch.member_inv_counts)

        if cfg.disable_conception:
            f_con = Tensor(np.zeros((n_b, n_p, 2 * d)))
        else:
            tiled = nn.broadcast_to(Tensor(batch.conception).reshape(n_b, 1, 7), (n_b, n_p, 7))
            f_con = self.embed_con(tiled)

        fused = self.fuse(nn.concat([f_con, f_self, f_group], axis=-1)).tanh()
        _check_finite(fused, "fuse")

        x = fused + Tensor(self.pos)
        for i, layer in enumerate(self.encoder):
            x = layer(x)
        _check_finite(x, "encoder")

        vlin = self.lin_channel(Tensor(batch.linear_fit))          # [B, n_f, dm]
        vlin = (vlin.transpose(0, 2, 1) @ self.lin_time).transpose(0, 2, 1)  # [B, n_p, dm]
        state = vlin
        for layer in self.decoder:
            state = layer(x, state)
        _check_finite(state, "decoder")

        flat = state.reshape(n_b, n_p * dm)
        offsets = self.head(flat).reshape(n_b, cfg.n_modes, window.n_future, 2)
        candidates = offsets + Tensor(batch.linear_fit.reshape(n_b, 1, window.n_future, 2))
        _check_finite(candidates, "head")

        if collect_features:
            return candidates, (f_self, f_group, f_con, fused)
        return candidates


def _check_finite(t: Tensor, layer: str):
    if not np.isfinite(t.data).all():
        raise FloatingPointError(f"non-finite intermediate in layer {layer!r}")


@dataclass
class EncodedInstance:
    """Normalized instance plus everything the network consumes."""

    instance: PredictionInstance
    observed: np.ndarray
    member_pairs: np.ndarray          # (n_members, n_past, 4)
    conception_values: np.ndarray     # (7,)
    linear_fit: np.ndarray            # (n_future, 2) in normalized frame
    truth: np.ndarray | None
    groups: GroupSet
    conception: ConceptionVector


def encode_instance(inst: PredictionInstance, gcfg: GroupConfig, ccfg: ConceptionConfig,
                    window: WindowConfig) -> EncodedInstance:
    if inst.observed.shape[0] != window.n_past:
        raise ValueError(f"instance has {inst.observed.shape[0]} observed steps, expected {window.n_past}")
    norm = normalize_instance(inst)
    groups = group_members(norm, gcfg)
    con = conception_vector(norm, groups, ccfg)
    member_ids = sorted(groups.member_ids)
    pairs = np.zeros((len(member_ids), window.n_past, 4))
    for i, mid in enumerate(member_ids):
        pairs[i, :, :2] = norm.observed
        pairs[i, :, 2:] = norm.neighbors[mid]
    truth = None
    if norm.future_truth is not None:
        if norm.future_truth.shape[0] != window.n_future:
            raise ValueError(f"instance has {norm.future_truth.shape[0]} future steps, expected {window.n_future}")
        truth = np.asarray(norm.future_truth)
    return EncodedInstance(
        instance=norm,
        observed=np.asarray(norm.observed),
        member_pairs=pairs,
        conception_values=con.as_array(),
        linear_fit=linear_fit_extrapolate(norm.observed, window),
        truth=truth,
        groups=groups,
        conception=con,
    )


@dataclass
class Batch:
    observed: np.ndarray                    # [B, n_p, 2]
    member_pairs: np.ndarray | None         # [B, M, n_p, 4] or None when no members at all
    member_mask: np.ndarray | None          # [B, M, 1, 1]
    member_inv_counts: np.ndarray | None    # [B, 1, 1]
    conception: np.ndarray                  # [B, 7]
    linear_fit: np.ndarray                  # [B, n_f, 2]
    truth: np.ndarray | None                # [B, n_f, 2]


def collate(encoded: list[EncodedInstance]) -> Batch:
    n_b = len(encoded)
    observed = np.stack([e.observed for e in encoded])
    counts = [e.member_pairs.shape[0] for e in encoded]
    m_max = max(counts)
    if m_max == 0:
        member_pairs = member_mask = inv_counts = None
    else:
        n_p = observed.shape[1]
        member_pairs = np.zeros((n_b, m_max, n_p, 4))
        member_mask = np.zeros((n_b, m_max, 1, 1))
        inv_counts = np.zeros((n_b, 1, 1))
        for i, e in enumerate(encoded):
            if counts[i]:
                member_pairs[i, :counts[i]] = e.member_pairs
                member_mask[i, :counts[i]] = 1.0
                inv_counts[i] = 1.0 / counts[i]
    conception = np.stack([e.conception_values for e in encoded])
    linear_fit = np.stack([e.linear_fit for e in encoded])
    truth = None
    if all(e.truth is not None for e in encoded):
        truth = np.stack([e.truth for e in encoded])
    return Batch(observed, member_pairs, member_mask, inv_counts, conception, linear_fit, truth)


def batch_loss(net: ForecastNetwork, batch: Batch) -> Tensor:
    """Mean best-of-K loss over a batch (normalized frame)."""
    candidates = net.forward(batch)
    per = _candidate_distances(candidates, Tensor(batch.truth))
    idx = np.argmin(per.data, axis=1)[:, None]
    return take_along_axis(per, idx, 1).mean()


class TrajectoryForecaster(BaseEstimator):
    """sklearn-style estimator around the forecaster network.

    fit(X) trains on a list of PredictionInstance with ground-truth futures;
    predict(X) returns one PredictionSet per instance.  All hyperparameters
    are constructor arguments so get_params/set_params/clone work as usual.
    """

    def __init__(self, embed_dim: int = 32, model_dim: int = 128, encoder_layers: int = 2,
                 decoder_layers: int = 2, heads: int = 4, n_modes: int = 20, ff_dim: int | None = None,
                 disable_group: bool = False, disable_conception: bool = False,
                 distance_threshold: float = 20.0, fov_degrees: float = 180.0,
                 n_past: int = 8, n_future: int = 12,
                 epochs: int = 50, batch_size: int = 1000, learning_rate: float = 0.0002,
                 seed: int = 0):
        self.embed_dim = embed_dim
        self.model_dim = model_dim
        self.encoder_layers = encoder_layers
        self.decoder_layers = decoder_layers
        self.heads = heads
        self.n_modes = n_modes
        self.ff_dim = ff_dim
        self.disable_group = disable_group
        self.disable_conception = disable_conception
        self.distance_threshold = distance_threshold
        self.fov_degrees = fov_degrees
        self.n_past = n_past
        self.n_future = n_future
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    # -- config plumbing ----------------------------------------------------

    def model_config(self) -> ModelConfig:
        return ModelConfig(self.embed_dim, self.model_dim, self.encoder_layers, self.decoder_layers,
                           self.heads, self.n_modes, self.ff_dim,
                           self.disable_group, self.disable_conception)

    def window_config(self) -> WindowConfig:
        return WindowConfig(self.n_past, self.n_future)

    def group_config(self) -> GroupConfig:
        return GroupConfig(self.distance_threshold, enabled=not self.disable_group)

    def conception_config(self) -> ConceptionConfig:
        return ConceptionConfig(self.fov_degrees, enabled=not self.disable_conception)

    def config_dict(self) -> dict:
        keys = ("embed_dim", "model_dim", "encoder_layers", "decoder_layers", "heads", "n_modes",
                "ff_dim", "disable_group", "disable_conception", "distance_threshold",
                "fov_degrees", "n_past", "n_future")
        return {k: getattr(self, k) for k in keys}

    def _require_fitted(self):
        if not hasattr(self, "net_"):
            raise NotFittedError("this TrajectoryForecaster has not been fitted yet")

    def _init_network(self, rng: np.random.Generator):
        self.net_ = ForecastNetwork(self.model_config(), self.window_config(), rng)

    # -- training -------------------------------------------------------------

    def fit(self, X, y=None):
        instances = list(X)
        if not instances:
            raise ValueError("cannot fit on an empty dataset")
        rng = np.random.default_rng(self.seed)
        self._init_network(rng)
        encoded = self.encode(instances)
        if any(e.truth is None for e in encoded):
            raise ValueError("all training instances need a ground-truth future")
        params = self.net_.parameters()
        adam = nn.AdamConfig(learning_rate=self.learning_rate)
        self.history_ = []
        n = len(encoded)
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            losses = []
            for lo in range(0, n, self.batch_size):
                chunk = [encoded[i] for i in order[lo:lo + self.batch_size]]
                loss = batch_loss(self.net_, collate(chunk))
                nn.zero_grads(params)
                loss.backward()
                nn.adam_step(params, adam)
                losses.append(float(loss.data))
            epoch_loss = float(np.mean(losses))
            self.history_.append(epoch_loss)
            log.info("epoch %d/%d: loss %.6f", epoch + 1, self.epochs, epoch_loss)
        return self

    # -- inference --------------------------------------------------------------

    def encode(self, instances) -> list[EncodedInstance]:
        gcfg, ccfg, window = self.group_config(), self.conception_config(), self.window_config()
        return [encode_instance(inst, gcfg, ccfg, window) for inst in instances]

    def forward(self, inst: PredictionInstance) -> PredictionSet:
        return self.predict([inst])[0]

    def predict(self, X) -> list[PredictionSet]:
        self._require_fitted()
        instances = list(X)
        encoded = self.encode(instances)
        out: list[PredictionSet] = []
        with nn.no_grad():
            for lo in range(0, len(encoded), max(self.batch_size, 1)):
                chunk = encoded[lo:lo + max(self.batch_size, 1)]
                cands, feats = self.net_.forward(collate(chunk), collect_features=True)
                f_self, f_group, f_con, fused = feats
                for i, enc in enumerate(chunk):
                    inst = enc.instance
                    out.append(PredictionSet(
                        target_id=inst.target_id,
                        trajectories=denormalize_points(cands.data[i].reshape(-1, 2), inst)
                        .reshape(self.n_modes, self.n_future, 2),
                        linear_fit=denormalize_points(enc.linear_fit, inst),
                        feature_bundle=FeatureBundle(f_self.data[i].copy(), f_group.data[i].copy(),
                                                     f_con.data[i].copy(), fused.data[i].copy()),
                        groups=enc.groups,
                        conception=enc.conception,
                        scene_id=inst.scene_id,
                        window_start=inst.window_start,
                    ))
        return out

    def predict_normalized(self, X) -> np.ndarray:
        """Candidates in the normalized frame, stacked [B, K, n_f, 2]."""
        self._require_fitted()
        encoded = self.encode(list(X))
        with nn.no_grad():
            return self.net_.forward(collate(encoded)).data.copy()

    def score(self, X, y=None) -> float:
        """Negative mean best-of-K average displacement error (higher is better)."""
        from .evaluation import evaluate_forecaster

        return -evaluate_forecaster(self, list(X)).mean_min_ade

    # -- persistence ------------------------------------------------------------

    @property
    def fuse_weight_(self) -> np.ndarray:
        self._require_fitted()
        return self.net_.fuse.w.data

    @property
    def conception_input_weight_(self) -> np.ndarray:
        self._require_fitted()
        return self.net_.embed_con.l1.w.data

    def save(self, path) -> None:
        self._require_fitted()
        nn.save_checkpoint(path, self.net_.parameters(), self.config_dict(),
                           extra={"history": getattr(self, "history_", []),
                                  "training": {"epochs": self.epochs, "batch_size": self.batch_size,
                                               "learning_rate": self.learning_rate, "seed": self.seed}})

    @classmethod
    def load(cls, path) -> "TrajectoryForecaster":
        loaded = nn.load_checkpoint(path)
        cfg = loaded["config"]
        training = loaded["extra"].get("training", {})
        est = cls(**cfg, **{k: training[k] for k in ("epochs", "batch_size", "learning_rate", "seed") if k in training})
        est._init_network(np.random.default_rng(est.seed))
        nn.restore_parameters(est.net_.parameters(), loaded)
        est.history_ = loaded["extra"].get("history", [])
        return est

    def checkpoint_hash(self) -> str:
        return nn.config_hash(self.config_dict())
