"""Hybrid learning: least squares for consequents, gradient descent for premises.

Each epoch solves the consequent parameters exactly by least squares at the
current premise parameters, measures the training cost

    E = sqrt( sum_k (y_k - yhat_k)^2 / (2P) )

and then takes one batch gradient step on the premise parameters using the
exact derivative of ``E`` (square root included).
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
import scipy.linalg

from . import metrics
from .data import Dataset
from .errors import ConfigurationError, NumericError, ShapeError
from .membership import FuzzyVariable, repair_params
from .model import AnfisModel, Layers, _design, compute_layers, predict_batch, rule_outputs

__all__ = [
    "Fixed",
    "StepDecay",
    "JangAdaptive",
    "TrainConfig",
    "EpochRecord",
    "StopReason",
    "TrainTrace",
    "lse_solve",
    "premise_parameters",
    "with_premise_parameters",
    "premise_gradient",
    "gd_step",
    "train_epoch",
    "adapt_eta",
    "fit",
]

log = logging.getLogger(__name__)

COST_GUARD = 1e-12


@dataclass(frozen=True)
class Fixed:
    label = "fixed"


@dataclass(frozen=True)
class StepDecay:
    """Multiply the rate by ``factor`` after every ``every`` epochs."""

    factor: float = 0.2
    every: int = 5
    label = "step"

    def __post_init__(self):
        if not 0 < self.factor or self.every < 1:
            raise ConfigurationError("step decay needs factor > 0 and every >= 1")


@dataclass(frozen=True)
class JangAdaptive:
    """Grow after four straight declines, shrink after two up/down pairs."""

    up_factor: float = 1.1
    down_factor: float = 0.9
    label = "jang"

    def __post_init__(self):
        if not self.up_factor > 1:
            raise ConfigurationError(f"up_factor must exceed 1, got {self.up_factor}")
        if not 0 < self.down_factor < 1:
            raise ConfigurationError(f"down_factor must lie in (0, 1), got {self.down_factor}")


EtaPolicy = Union[Fixed, StepDecay, JangAdaptive]


@dataclass(frozen=True)
class TrainConfig:
    """Training hyper-parameters.

    ``check_every`` sets how often the check set is scored (always also on
    the last epoch). ``patience`` is the number of consecutive rises of the
    check RMSE that stops training; ``None`` disables early stopping while
    still tracking the best check snapshot.
    """

    eta0: float = 0.002
    eta_policy: EtaPolicy = field(default_factory=Fixed)
    max_epochs: int = 1000
    error_goal: float = 1e-5
    check_every: int = 10
    patience: int | None = 5
    seed: int = 0
    sigma_min_scale: float = 1e-4

    def __post_init__(self):
        if not (self.eta0 >= 0 and math.isfinite(self.eta0)):
            raise ConfigurationError(f"learning rate must be finite and >= 0, got {self.eta0}")
        if self.max_epochs < 1:
            raise ConfigurationError(f"max_epochs must be positive, got {self.max_epochs}")
        if not self.error_goal >= 0:
            raise ConfigurationError(f"error goal must be >= 0, got {self.error_goal}")
        if self.check_every < 1:
            raise ConfigurationError(f"check_every must be >= 1, got {self.check_every}")
        if self.patience is not None and self.patience < 0:
            raise ConfigurationError(f"patience must be >= 0, got {self.patience}")
        if not self.sigma_min_scale > 0:
            raise ConfigurationError("sigma_min_scale must be positive")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_rmse: float
    check_rmse: float | None
    eta: float
    seconds: float


class StopReason(str, Enum):
    ERROR_GOAL = "error_goal"
    MAX_EPOCHS = "max_epochs"
    EARLY_STOP = "early_stop"
    DIVERGED = "diverged"


@dataclass
class TrainTrace:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stopped_reason: StopReason = StopReason.MAX_EPOCHS

    @property
    def epochs(self) -> int:
        return len(self.records)

    @property
    def train_rmse(self) -> np.ndarray:
        return np.array([r.train_rmse for r in self.records])

    @property
    def check_rmse(self) -> np.ndarray:
        """Check RMSE per epoch, NaN where the check set was not scored."""
        return np.array([np.nan if r.check_rmse is None else r.check_rmse for r in self.records])

    @property
    def mean_epoch_seconds(self) -> float:
        return float(np.mean([r.seconds for r in self.records])) if self.records else 0.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_rmse", "check_rmse", "eta", "seconds"])
            for r in self.records:
                writer.writerow([
                    r.epoch,
                    repr(r.train_rmse),
                    "" if r.check_rmse is None else repr(r.check_rmse),
                    repr(r.eta),
                    repr(r.seconds),
                ])


# --------------------------------------------------------------------------
# least squares


def lse_solve(design, targets) -> np.ndarray:
    """Minimum-norm least-squares solution of ``design @ theta ~= targets``.

    Uses LAPACK ``gelsy`` (complete orthogonal factorization via QR with
    column pivoting), so rank-deficient systems get the minimum-norm answer.
    """
    A = np.asarray(design, dtype=float)
    b = np.asarray(targets, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeError(f"design must be a non-empty matrix, got shape {A.shape}")
    if A.shape[0] != b.size:
        raise ShapeError(f"design has {A.shape[0]} rows but {b.size} targets")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise NumericError("least-squares system contains non-finite entries")
    theta, *_ = scipy.linalg.lstsq(A, b, lapack_driver="gelsy", check_finite=False)
    return theta


# --------------------------------------------------------------------------
# premise parameters


def premise_parameters(model: AnfisModel) -> np.ndarray:
    """All membership parameters, input-major then set-major then declared order."""
    return np.array([p for v in model.inputs for mf in v.mfs for p in mf.params], dtype=float)


def with_premise_parameters(model: AnfisModel, theta, sigma_min_scale: float | None = None) -> AnfisModel:
    """Replace the premise parameters; optionally project onto valid values first."""
    theta = np.asarray(theta, dtype=float)
    if theta.size != model.n_premise_params:
        raise ShapeError(f"expected {model.n_premise_params} premise parameters, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise NumericError("premise parameters became non-finite")
    pos = 0
    inputs = []
    for var in model.inputs:
        mfs = []
        for mf in var.mfs:
            k = len(mf.params)
            p = theta[pos:pos + k].tolist()
            pos += k
            if sigma_min_scale is not None:
                p = repair_params(mf.family, p, var.sigma_min(sigma_min_scale))
            mfs.append(mf.with_params(p))
        inputs.append(FuzzyVariable(var.name, var.lo, var.hi, tuple(mfs)))
    return model.replace(inputs=tuple(inputs))


def _cost_gradient(model: AnfisModel, X: np.ndarray, layers: Layers, f: np.ndarray,
                   y_model: np.ndarray, err: np.ndarray, cost: float) -> np.ndarray:
    """dE/dtheta for every premise parameter, chained through the rule layers."""
    P = X.shape[0]
    grad = np.zeros(model.n_premise_params)
    if cost < COST_GUARD:
        return grad
    # dE/dy_k = -e_k / (2 P E); dy/dw_i = (f_i - y) / S, zero under the guard
    dE_dy = -err / (2.0 * P * cost)
    scale = np.where(layers.guarded, 0.0, dE_dy / np.where(layers.guarded, 1.0, layers.total))
    A = (scale[:, None] * (f - y_model[:, None])).reshape((P,) + model.mf_counts)

    n = model.n_inputs
    pos = 0
    for j, var in enumerate(model.inputs):
        B = A
        for l in range(n):
            if l == j:
                continue
            shape = [P] + [1] * n
            shape[l + 1] = model.mf_counts[l]
            B = B * layers.mu[l].reshape(shape)
        axes = tuple(a for a in range(1, n + 1) if a != j + 1)
        dE_dmu = B.sum(axis=axes) if axes else B  # (P, m_j)
        for k, mf in enumerate(var.mfs):
            g = layers.dmu[j][k]  # (P, arity)
            size = g.shape[1]
            grad[pos:pos + size] = (dE_dmu[:, k, None] * g).sum(axis=0)
            pos += size
    return grad


@dataclass
class _Pass:
    model: AnfisModel   # premises unchanged, consequents from LSE
    cost: float         # training-cost RMSE, 1/(2P) form
    grad: np.ndarray


def _hybrid_pass(model: AnfisModel, X: np.ndarray, y: np.ndarray) -> _Pass:
    layers = compute_layers(model, X, with_gradients=True)
    theta = lse_solve(_design(model, X, layers.normalized), y)
    fitted = model.set_consequent_vector(theta)
    f = rule_outputs(fitted, X)
    y_model = (layers.normalized * f).sum(axis=1)
    err = y - y_model
    cost = metrics.rmse(y, y_model, metrics.RmseForm.EQ1)
    grad = _cost_gradient(fitted, X, layers, f, y_model, err, cost) if math.isfinite(cost) else None
    return _Pass(fitted, cost, grad)


def _require_data(data: Dataset, model: AnfisModel, what: str = "dataset") -> None:
    if len(data) == 0:
        raise ConfigurationError(f"{what} is empty")
    if data.n_inputs != model.n_inputs:
        raise ShapeError(f"{what} has {data.n_inputs} inputs, model expects {model.n_inputs}")


def premise_gradient(model: AnfisModel, data: Dataset) -> np.ndarray:
    """Gradient of the training cost with respect to the premise parameters,
    holding the model's current consequents fixed.

    Returns zeros when the cost is below ``COST_GUARD``.
    """
    _require_data(data, model)
    X, y = data.X, data.y
    layers = compute_layers(model, X, with_gradients=True)
    f = rule_outputs(model, X)
    y_model = (layers.normalized * f).sum(axis=1)
    err = y - y_model
    cost = metrics.rmse(y, y_model, metrics.RmseForm.EQ1)
    if not math.isfinite(cost):
        raise NumericError("training cost is not finite")
    return _cost_gradient(model, X, layers, f, y_model, err, cost)


def gd_step(model: AnfisModel, grad, eta: float, sigma_min_scale: float = 1e-4) -> AnfisModel:
    """``theta <- theta - eta * grad`` on the premise parameters, then clamp
    widths at ``sigma_min_scale * (hi - lo)`` and restore ordering."""
    grad = np.asarray(grad, dtype=float)
    if grad.size != model.n_premise_params:
        raise ShapeError(f"gradient has {grad.size} entries, model has {model.n_premise_params}")
    if eta == 0 or not np.any(grad):
        return model
    theta = premise_parameters(model) - eta * grad
    return with_premise_parameters(model, theta, sigma_min_scale)


def train_epoch(model: AnfisModel, train: Dataset, eta: float,
                sigma_min_scale: float = 1e-4) -> tuple[AnfisModel, float]:
    """One hybrid epoch. Returns the updated model and the cost measured after
    the least-squares step, before the gradient step."""
    _require_data(train, model, "training set")
    step = _hybrid_pass(model, train.X, train.y)
    if step.grad is None:
        raise NumericError("training cost is not finite")
    return gd_step(step.model, step.grad, eta, sigma_min_scale), step.cost


# --------------------------------------------------------------------------
# learning-rate schedule


def adapt_eta(history, eta: float, up_factor: float = 1.1, down_factor: float = 0.9) -> float:
    """Jang's step-size heuristic over the cost values since the last change.

    Four strict decreases in a row multiply ``eta`` by ``up_factor``; two
    consecutive (increase, decrease) pairs multiply it by ``down_factor``.
    The caller restarts ``history`` from the latest value after a change.
    """
    h = list(history)
    if len(h) < 5:
        return eta
    moves = np.diff(h[-5:])
    if np.all(moves < 0):
        return eta * up_factor
    if moves[0] > 0 and moves[1] < 0 and moves[2] > 0 and moves[3] < 0:
        return eta * down_factor
    return eta


class _Schedule:
    def __init__(self, policy: EtaPolicy, eta0: float):
        self.policy = policy
        self.eta = eta0
        self.window: list[float] = []

    def update(self, epoch: int, cost: float) -> None:
        p = self.policy
        if isinstance(p, StepDecay):
            if epoch % p.every == 0:
                self.eta *= p.factor
        elif isinstance(p, JangAdaptive):
            self.window.append(cost)
            new = adapt_eta(self.window, self.eta, p.up_factor, p.down_factor)
            if new != self.eta:
                self.eta = new
                self.window = [cost]


# --------------------------------------------------------------------------
# training loop


def _score(model: AnfisModel, data: Dataset) -> float:
    return metrics.rmse(data.y, predict_batch(model, data.X), metrics.RmseForm.EQ1)


def fit(model: AnfisModel, train: Dataset, check: Dataset,
        config: TrainConfig = TrainConfig()) -> tuple[AnfisModel, TrainTrace]:
    """Run hybrid epochs and return the snapshot with the lowest check RMSE.

    Epoch ``e`` is recorded for the model right after its least-squares
    step; that is the model scored on the check set and kept as a snapshot.
    RMSE values in the trace use the halved-mean training form.
    """
    _require_data(train, model, "training set")
    _require_data(check, model, "check set")
    trace = TrainTrace()
    schedule = _Schedule(config.eta_policy, config.eta0)
    best_model, best_check = None, math.inf
    last_good, last_good_epoch = None, 0
    prev_check, rises = None, 0
    reason = StopReason.MAX_EPOCHS
    stop_after = config.patience if config.patience is None else max(config.patience, 1)

    for epoch in range(1, config.max_epochs + 1):
        eta = schedule.eta
        t0 = time.perf_counter()
        try:
            step = _hybrid_pass(model, train.X, train.y)
        except (NumericError, np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
            log.warning("epoch %d: least-squares step failed: %s", epoch, exc)
            trace.records.append(EpochRecord(epoch, math.nan, None, eta, time.perf_counter() - t0))
            reason = StopReason.DIVERGED
            break
        cost = step.cost
        if not math.isfinite(cost):
            trace.records.append(EpochRecord(epoch, cost, None, eta, time.perf_counter() - t0))
            reason = StopReason.DIVERGED
            break
        last_good, last_good_epoch = step.model, epoch

        reached_goal = cost < config.error_goal
        final = reached_goal or epoch == config.max_epochs
        next_model, diverged = None, False
        if not reached_goal:
            try:
                next_model = gd_step(step.model, step.grad, eta, config.sigma_min_scale)
            except NumericError:
                diverged = True
        seconds = time.perf_counter() - t0

        check_rmse = None
        if epoch % config.check_every == 0 or final or diverged:
            check_rmse = _score(step.model, check)
            if check_rmse < best_check:
                best_model, best_check = step.model, check_rmse
                trace.best_epoch = epoch
            if prev_check is not None and check_rmse > prev_check:
                rises += 1
            else:
                rises = 0
            prev_check = check_rmse
        trace.records.append(EpochRecord(epoch, cost, check_rmse, eta, seconds))

        if diverged:
            reason = StopReason.DIVERGED
            break
        if reached_goal:
            reason = StopReason.ERROR_GOAL
            break
        if stop_after is not None and rises >= stop_after:
            reason = StopReason.EARLY_STOP
            break
        schedule.update(epoch, cost)
        model = next_model

    trace.stopped_reason = reason
    if best_model is None:
        best_model = last_good if last_good is not None else model
        trace.best_epoch = last_good_epoch
    log.debug("fit stopped after %d epochs (%s), best epoch %d",
              trace.epochs, reason.value, trace.best_epoch)
    return best_model, trace
