"""Deterministic linear SVM trained by primal subgradient descent.

The objective is J(w, b) = 0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i * (w.x_i + b)),
minimized by per-sample subgradient steps with a decaying learning rate.
Everything downstream depends on bit-for-bit reproducibility, so the
only randomness is the seeded shuffle of the visiting order and inputs
are standardized with statistics stored inside the model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .errors import DataError, FormatError

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one SVM fit.

    ``c`` weighs the summed hinge loss against the regularizer; the step
    size at update ``k`` (counting every per-sample step) is
    ``lr0 / (1 + lr_decay * k)``. Training stops early once the relative
    improvement of the epoch objective drops below ``tol``.
    """

    c: float = 1.0
    epochs: int = 200
    lr0: float = 0.01
    lr_decay: float = 0.001
    seed: int = 0
    shuffle: bool = True
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if self.lr0 <= 0:
            raise ValueError(f"lr0 must be positive, got {self.lr0}")
        if self.lr_decay < 0:
            raise ValueError(f"lr_decay must be non-negative, got {self.lr_decay}")
        if self.tol < 0:
            raise ValueError(f"tol must be non-negative, got {self.tol}")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)

    def digest(self) -> str:
        """Stable fingerprint of the hyperparameters, stored with models."""
        payload = json.dumps(
            {
                "c": self.c,
                "epochs": self.epochs,
                "lr0": self.lr0,
                "lr_decay": self.lr_decay,
                "seed": self.seed,
                "shuffle": self.shuffle,
                "tol": self.tol,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(eq=False)
class LinearModel:
    """Weights, bias, and the standardization the weights were fit under.

    ``objective_history`` records the epoch-end objective values of the
    fit that produced the model; it is diagnostic only and deliberately
    not serialized.
    """

    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    train_config_digest: str = ""
    objective_history: list[float] = field(default_factory=list, repr=False, compare=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearModel):
            return NotImplemented
        return (
            self.bias == other.bias
            and self.train_config_digest == other.train_config_digest
            and self.weights.tobytes() == other.weights.tobytes()
            and self.mean.tobytes() == other.mean.tobytes()
            and self.std.tobytes() == other.std.tobytes()
        )

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.std = np.asarray(self.std, dtype=np.float64).reshape(-1)
        d = self.weights.shape[0]
        if self.mean.shape[0] != d or self.std.shape[0] != d:
            raise DataError("weights, mean and std must share one dimension")
        if np.any(self.std <= 0):
            raise DataError("standardization std must be positive")
        self.bias = float(self.bias)

    @classmethod
    def raw(cls, weights: Iterable[float], bias: float) -> "LinearModel":
        """Model with identity standardization, for fixtures and tests."""
        w = np.asarray(list(weights), dtype=np.float64)
        return cls(w, bias, np.zeros_like(w), np.ones_like(w))

    @property
    def feature_dim(self) -> int:
        return int(self.weights.shape[0])

    def transform(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.shape[-1] != self.feature_dim:
            raise DataError(
                f"feature dimension mismatch: got {x.shape[-1]}, model expects {self.feature_dim}"
            )
        return (x - self.mean) / self.std

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "feature_dim": self.feature_dim,
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "train_config_digest": self.train_config_digest,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "LinearModel":
        try:
            model = cls(
                weights=np.asarray(raw["weights"], dtype=np.float64),
                bias=float(raw["bias"]),
                mean=np.asarray(raw["mean"], dtype=np.float64),
                std=np.asarray(raw["std"], dtype=np.float64),
                train_config_digest=str(raw.get("train_config_digest", "")),
            )
        except KeyError as exc:
            raise FormatError(f"model JSON missing field {exc}") from None
        declared = raw.get("feature_dim")
        if declared is not None and declared != model.feature_dim:
            raise FormatError(
                f"model JSON declares feature_dim {declared} but carries {model.feature_dim} weights"
            )
        return model


def _check_training_inputs(features: np.ndarray, labels: np.ndarray) -> None:
    if features.ndim != 2:
        raise DataError(f"features must be a 2-D matrix, got {features.ndim}-D")
    n, d = features.shape
    if n < 2 or d < 1:
        raise DataError(f"need at least 2 samples and 1 feature, got shape {features.shape}")
    if labels.shape != (n,):
        raise DataError(f"labels must have shape ({n},), got {labels.shape}")
    if not np.isfinite(features).all():
        raise DataError("non-finite value in training features")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise DataError("labels must be +1 (attack) or -1 (bonafide)")
    if np.unique(labels).size < 2:
        raise DataError("single-class data: training needs both labels")


def train_linear_svm(
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig = TrainConfig(),
) -> LinearModel:
    """Fit a linear SVM on (n, d) features with labels in {+1, -1}.

    Features are standardized per dimension first (constant dimensions
    keep scale 1 instead of dividing by zero) and the statistics ride
    along in the returned model. Identical inputs and config produce a
    bit-for-bit identical model.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    _check_training_inputs(x, y)
    n, d = x.shape

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    xs = (x - mean) / std

    w = np.zeros(d, dtype=np.float64)
    b = 0.0
    rng = np.random.default_rng(config.seed)

    def objective() -> float:
        margins = y * (xs @ w + b)
        return float(0.5 * (w @ w) + config.c * np.maximum(0.0, 1.0 - margins).sum())

    history = [objective()]
    step = 0
    for _ in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        for i in order:
            eta = config.lr0 / (1.0 + config.lr_decay * step)
            margin = y[i] * (xs[i] @ w + b)
            # subgradient of 0.5||w||^2 / n + C * hinge_i, stepped in place
            w *= 1.0 - eta / n
            if margin < 1.0:
                w += (eta * config.c * y[i]) * xs[i]
                b += eta * config.c * y[i]
            step += 1
        value = objective()
        history.append(value)
        previous = history[-2]
        if abs(previous - value) <= config.tol * max(1.0, abs(previous)):
            break

    return LinearModel(
        weights=w,
        bias=b,
        mean=mean,
        std=std,
        train_config_digest=config.digest(),
        objective_history=history,
    )


def svm_score(model: LinearModel, features: np.ndarray) -> float:
    """Signed distance surrogate for one sample; higher means attack."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise DataError(f"svm_score takes one 1-D sample, got {x.ndim}-D")
    return float(model.transform(x) @ model.weights + model.bias)


def svm_scores(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Scores for an (n, d) batch."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DataError(f"svm_scores takes an (n, d) matrix, got {x.ndim}-D")
    return model.transform(x) @ model.weights + model.bias


def hinge_objective(
    model: LinearModel,
    features: np.ndarray,
    labels: np.ndarray,
    c: float = 1.0,
) -> float:
    """J(w, b) on the given (already unstandardized) features."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise DataError("hinge_objective needs (n, d) features and (n,) labels")
    margins = y * (model.transform(x) @ model.weights + model.bias)
    return float(0.5 * (model.weights @ model.weights) + c * np.maximum(0.0, 1.0 - margins).sum())


def hinge_subgradient(
    model: LinearModel,
    features: np.ndarray,
    labels: np.ndarray,
    c: float = 1.0,
) -> tuple[np.ndarray, float]:
    """Full-batch subgradient of J at the model's (w, b).

    At hinge kinks (margin exactly 1) the loss term contributes zero,
    matching the one-sided derivative from the satisfied side.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise DataError("hinge_subgradient needs (n, d) features and (n,) labels")
    xs = model.transform(x)
    margins = y * (xs @ model.weights + model.bias)
    active = margins < 1.0
    grad_w = model.weights - c * (y[active][:, None] * xs[active]).sum(axis=0)
    grad_b = -c * float(y[active].sum())
    return grad_w, grad_b


def save_model(model: LinearModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)
        fh.write("\n")


def load_model(path) -> LinearModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not valid JSON: {exc}") from None
    return LinearModel.from_dict(raw)
