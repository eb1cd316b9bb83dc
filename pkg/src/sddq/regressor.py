"""Feed-forward quality regressor trained with Huber loss.

Architecture is input -> tanh hidden layer -> scalar output. Training is
plain mini-batch gradient descent with a fixed learning rate; runs are
bitwise reproducible given the same config. Predictions are clamped to the
[0, 100] score range; the output bias starts at the range midpoint so the
network only has to learn deviations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DivergenceError, ValidationError

MODEL_FORMAT_VERSION = 1
SCORE_MIN = 0.0
SCORE_MAX = 100.0


@dataclass(frozen=True)
class TrainConfig:
    zeta: float = 1.0
    learning_rate: float = 0.06
    epochs: int = 500
    batch_size: int = 64
    seed: int = 1234
    hidden_width: int = 64

    def __post_init__(self) -> None:
        if self.zeta <= 0:
            raise ValidationError(f"zeta must be positive, got {self.zeta}")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1 or self.hidden_width < 1:
            raise ValidationError("epochs, batch_size, hidden_width must be >= 1")


@dataclass
class RegressorModel:
    """Two-layer network d -> h -> 1 with a tanh hidden nonlinearity."""

    w_hidden: np.ndarray  # (h, d)
    b_hidden: np.ndarray  # (h,)
    w_out: np.ndarray  # (h,)
    b_out: float
    activation: str = "tanh"

    @property
    def d(self) -> int:
        return self.w_hidden.shape[1]

    @property
    def h(self) -> int:
        return self.w_hidden.shape[0]

    def validate(self) -> None:
        if self.w_hidden.shape != (self.h, self.d):
            raise ValidationError("hidden weight shape mismatch")
        if self.b_hidden.shape != (self.h,) or self.w_out.shape != (self.h,):
            raise ValidationError("parameter shapes do not chain")
        for arr in (self.w_hidden, self.b_hidden, self.w_out):
            if not np.isfinite(arr).all():
                raise ValidationError("non-finite model parameter")
        if not np.isfinite(self.b_out):
            raise ValidationError("non-finite model parameter")
        if self.activation != "tanh":
            raise ValidationError(f"unsupported activation {self.activation!r}")


@dataclass
class ParameterGradients:
    w_hidden: np.ndarray
    b_hidden: np.ndarray
    w_out: np.ndarray
    b_out: float


def huber_loss(pred: float, target: float, zeta: float) -> float:
    """Quadratic for |residual| <= zeta, linear beyond; continuous at the joint."""
    if zeta <= 0:
        raise ValidationError(f"zeta must be positive, got {zeta}")
    r = abs(target - pred)
    if r <= zeta:
        return 0.5 * r * r
    return zeta * r - 0.5 * zeta * zeta


def _huber_vec(residuals: np.ndarray, zeta: float) -> np.ndarray:
    a = np.abs(residuals)
    return np.where(a <= zeta, 0.5 * a * a, zeta * a - 0.5 * zeta * zeta)


def init_model(d: int, hidden_width: int, seed: int) -> RegressorModel:
    rng = np.random.default_rng(seed)
    return RegressorModel(
        w_hidden=rng.normal(0.0, 1.0, size=(hidden_width, d)) / np.sqrt(d),
        b_hidden=np.zeros(hidden_width),
        w_out=rng.normal(0.0, 1.0, size=hidden_width) / np.sqrt(hidden_width),
        b_out=0.5 * (SCORE_MIN + SCORE_MAX),
    )


def forward(model: RegressorModel, x: np.ndarray) -> float:
    """Raw (unclamped) network output for one input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.d,):
        raise ValidationError(f"expected input of shape ({model.d},), got {x.shape}")
    hidden = np.tanh(model.w_hidden @ x + model.b_hidden)
    return float(model.w_out @ hidden + model.b_out)


def _forward_batch(model: RegressorModel, xs: np.ndarray) -> np.ndarray:
    hidden = np.tanh(xs @ model.w_hidden.T + model.b_hidden)
    return hidden @ model.w_out + model.b_out


def predict(model: RegressorModel, features: np.ndarray) -> np.ndarray:
    """Forward per row, clamped to [0, 100]; empty input gives empty output."""
    xs = np.asarray(features, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs.reshape(1, -1)
    if xs.size == 0:
        return np.zeros(0)
    if xs.shape[1] != model.d:
        raise ValidationError(f"expected {model.d}-dim rows, got {xs.shape[1]}")
    return np.clip(_forward_batch(model, xs), SCORE_MIN, SCORE_MAX)


def loss_gradient(
    model: RegressorModel, xs: np.ndarray, targets: np.ndarray, zeta: float
) -> ParameterGradients:
    """Analytic gradient of the mean Huber loss over a batch.

    The Huber derivative with respect to the prediction is the residual
    clipped to [-zeta, zeta], which keeps every step bounded.
    """
    xs = np.asarray(xs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValidationError("batch must be a nonempty 2-D array")
    if xs.shape[0] != targets.shape[0]:
        raise ValidationError("batch features and targets must align")
    hidden = np.tanh(xs @ model.w_hidden.T + model.b_hidden)
    preds = hidden @ model.w_out + model.b_out
    dpred = np.clip(preds - targets, -zeta, zeta) / xs.shape[0]
    dhidden = np.outer(dpred, model.w_out) * (1.0 - hidden**2)
    return ParameterGradients(
        w_hidden=dhidden.T @ xs,
        b_hidden=dhidden.sum(axis=0),
        w_out=hidden.T @ dpred,
        b_out=float(dpred.sum()),
    )


def derive_init_seed(seed: int) -> int:
    # keep weight init and shuffling on separate streams of the same seed
    return (seed ^ 0xA5A5A5A5A5A5A5A5) & 0xFFFFFFFFFFFFFFFF


def train(
    features: np.ndarray, targets: np.ndarray, cfg: TrainConfig
) -> tuple[RegressorModel, np.ndarray]:
    """Mini-batch gradient descent; returns the model and per-epoch mean loss.

    Shuffling is seeded by ``cfg.seed`` and the logged loss is the mean of
    pre-update batch losses within each epoch. Raises DivergenceError naming
    the epoch if the loss ever turns non-finite.
    """
    xs = np.asarray(features, dtype=np.float64)
    ys = np.asarray(targets, dtype=np.float64)
    if xs.ndim != 2:
        raise ValidationError("features must be a 2-D array")
    if xs.shape[0] != ys.shape[0]:
        raise ValidationError("features and targets must align")
    if xs.shape[0] < cfg.batch_size:
        raise ValidationError(
            f"need at least batch_size={cfg.batch_size} labeled samples, "
            f"got {xs.shape[0]}"
        )
    n = xs.shape[0]
    rng = np.random.default_rng(cfg.seed)
    model = init_model(xs.shape[1], cfg.hidden_width, seed=derive_init_seed(cfg.seed))
    lr = cfg.learning_rate
    history = np.zeros(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = xs[idx], ys[idx]
            hidden = np.tanh(xb @ model.w_hidden.T + model.b_hidden)
            preds = hidden @ model.w_out + model.b_out
            epoch_loss += float(_huber_vec(yb - preds, cfg.zeta).sum())
            dpred = np.clip(preds - yb, -cfg.zeta, cfg.zeta) / len(idx)
            dhidden = np.outer(dpred, model.w_out) * (1.0 - hidden**2)
            model.w_hidden -= lr * (dhidden.T @ xb)
            model.b_hidden -= lr * dhidden.sum(axis=0)
            model.w_out -= lr * (hidden.T @ dpred)
            model.b_out -= lr * float(dpred.sum())
        mean_loss = epoch_loss / n
        if not np.isfinite(mean_loss):
            raise DivergenceError(f"non-finite training loss at epoch {epoch}")
        history[epoch] = mean_loss
    return model, history


def save_model(model: RegressorModel, path: str | Path, config: TrainConfig | None = None) -> None:
    model.validate()
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "d": model.d,
        "h": model.h,
        "activation": model.activation,
        "w_hidden": model.w_hidden.tolist(),
        "b_hidden": model.b_hidden.tolist(),
        "w_out": model.w_out.tolist(),
        "b_out": model.b_out,
        "train_config": None
        if config is None
        else {
            "zeta": config.zeta,
            "learning_rate": config.learning_rate,
            "epochs": config.epochs,
            "batch_size": config.batch_size,
            "seed": config.seed,
            "hidden_width": config.hidden_width,
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path) -> RegressorModel:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"unsupported model format version {payload.get('format_version')!r}"
        )
    model = RegressorModel(
        w_hidden=np.asarray(payload["w_hidden"], dtype=np.float64),
        b_hidden=np.asarray(payload["b_hidden"], dtype=np.float64),
        w_out=np.asarray(payload["w_out"], dtype=np.float64),
        b_out=float(payload["b_out"]),
        activation=payload.get("activation", "tanh"),
    )
    model.validate()
    return model
