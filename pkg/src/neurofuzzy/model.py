"""Grid-partitioned Takagi-Sugeno model and its five-layer forward pass.

Layers: fuzzification, product T-norm firing strengths, normalization,
per-rule Sugeno consequents, weighted sum. Rules enumerate the full
Cartesian grid of membership choices with the last input varying fastest,
so rule ``i`` corresponds to ``np.unravel_index(i, mf_counts)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ShapeError
from .membership import Family, FuzzyVariable, evaluate

__all__ = [
    "Order",
    "AnfisModel",
    "ForwardRecord",
    "UNDERFLOW_GUARD",
    "firing_strengths",
    "normalize",
    "forward",
    "design_row",
    "design_matrix",
    "predict_batch",
    "save_model",
    "load_model",
]

UNDERFLOW_GUARD = 1e-12
FORMAT_TAG = "neurofuzzy-anfis"
FORMAT_VERSION = 1


class Order(IntEnum):
    ZERO = 0
    FIRST = 1


@dataclass(frozen=True, eq=False)
class AnfisModel:
    """Rule base over the full grid of input fuzzy sets.

    ``consequents`` has one row per rule: ``[p_1, ..., p_n, r]`` so the rule
    output is ``p . x + r``. Zero-order models keep every ``p`` at 0.
    """

    inputs: tuple[FuzzyVariable, ...]
    order: Order
    consequents: np.ndarray

    def __post_init__(self):
        inputs = tuple(self.inputs)
        order = Order(int(self.order))
        if not inputs:
            raise ConfigurationError("a model needs at least one input")
        n = len(inputs)
        R = int(np.prod([len(v.mfs) for v in inputs]))
        cons = np.array(self.consequents, dtype=float)
        if cons.shape != (R, n + 1):
            raise ShapeError(f"consequents must have shape ({R}, {n + 1}), got {cons.shape}")
        if order is Order.ZERO and np.any(cons[:, :-1] != 0.0):
            raise ConfigurationError("zero-order model has non-zero linear consequent terms")
        cons.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "consequents", cons)

    @classmethod
    def from_data(cls, X, names=None, mfs_per_input=3, family=Family.GAUSSIAN,
                  order=Order.FIRST) -> "AnfisModel":
        """Grid-initialized model spanning the observed range of each column."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ShapeError("need a non-empty 2-D input matrix to size the grid")
        n = X.shape[1]
        names = list(names) if names is not None else [f"x{j + 1}" for j in range(n)]
        counts = [mfs_per_input] * n if np.isscalar(mfs_per_input) else list(mfs_per_input)
        inputs = []
        for j in range(n):
            lo, hi = float(X[:, j].min()), float(X[:, j].max())
            if lo == hi:
                lo, hi = lo - 0.5, hi + 0.5
            inputs.append(FuzzyVariable.grid(names[j], lo, hi, counts[j], family))
        return cls.with_zero_consequents(inputs, order)

    @classmethod
    def with_zero_consequents(cls, inputs, order=Order.FIRST) -> "AnfisModel":
        R = int(np.prod([len(v.mfs) for v in inputs]))
        return cls(tuple(inputs), order, np.zeros((R, len(inputs) + 1)))

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    @property
    def mf_counts(self) -> tuple[int, ...]:
        return tuple(len(v.mfs) for v in self.inputs)

    @property
    def n_rules(self) -> int:
        return self.consequents.shape[0]

    @property
    def n_consequent_params(self) -> int:
        return self.consequents.size if self.order is Order.FIRST else self.n_rules

    @property
    def n_premise_params(self) -> int:
        return sum(len(mf.params) for v in self.inputs for mf in v.mfs)

    def rule_index(self, i: int) -> tuple[int, ...]:
        """Membership choice per input for rule ``i``."""
        return tuple(int(k) for k in np.unravel_index(i, self.mf_counts))

    def replace(self, inputs=None, consequents=None) -> "AnfisModel":
        return AnfisModel(
            self.inputs if inputs is None else inputs,
            self.order,
            self.consequents if consequents is None else consequents,
        )

    def set_consequent_vector(self, theta) -> "AnfisModel":
        """Model with consequents taken from a flat LSE solution vector."""
        theta = np.asarray(theta, dtype=float)
        if self.order is Order.FIRST:
            cons = theta.reshape(self.n_rules, self.n_inputs + 1)
        else:
            cons = np.zeros((self.n_rules, self.n_inputs + 1))
            cons[:, -1] = theta
        return self.replace(consequents=cons)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "version": FORMAT_VERSION,
            "order": int(self.order),
            "inputs": [v.to_dict() for v in self.inputs],
            "consequents": self.consequents.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnfisModel":
        if d.get("format") != FORMAT_TAG:
            raise ConfigurationError(f"not a model document (format={d.get('format')!r})")
        if d.get("version") != FORMAT_VERSION:
            raise ConfigurationError(f"unsupported model version {d.get('version')!r}")
        inputs = tuple(FuzzyVariable.from_dict(v) for v in d["inputs"])
        return cls(inputs, Order(d["order"]), np.array(d["consequents"], dtype=float))

    def __call__(self, X):
        return predict_batch(self, X)


@dataclass(frozen=True)
class ForwardRecord:
    firing: np.ndarray
    normalized: np.ndarray
    rule_outputs: np.ndarray
    output: float


@dataclass
class Layers:
    """Intermediate activations for a batch, reused by the trainer."""

    mu: list          # per input: (P, m_j) degrees
    dmu: list         # per input: (P, m_j, arity) parameter gradients
    firing: np.ndarray       # (P, R)
    total: np.ndarray        # (P,)
    normalized: np.ndarray   # (P, R)
    guarded: np.ndarray      # (P,) True where the underflow fallback fired


def _as_batch(model: AnfisModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, model.n_inputs)
    if X.ndim != 2 or X.shape[1] != model.n_inputs:
        raise ShapeError(f"expected inputs with {model.n_inputs} columns, got shape {X.shape}")
    return X


def _grid_product(mu: list) -> np.ndarray:
    w = mu[0]
    P = w.shape[0]
    for m in mu[1:]:
        w = (w[:, :, None] * m[:, None, :]).reshape(P, -1)
    return w


def _normalize(w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    total = w.sum(axis=-1)
    guarded = total < UNDERFLOW_GUARD
    safe = np.where(guarded, 1.0, total)
    wbar = np.where(guarded[..., None], 1.0 / w.shape[-1], w / safe[..., None])
    return total, wbar, guarded


def compute_layers(model: AnfisModel, X, with_gradients: bool = False) -> Layers:
    X = _as_batch(model, X)
    mu, dmu = [], []
    for j, var in enumerate(model.inputs):
        cols, grads = [], []
        for mf in var.mfs:
            m, g = evaluate(mf, X[:, j])
            cols.append(np.clip(m, 0.0, 1.0))
            grads.append(g)
        mu.append(np.stack(cols, axis=1) if cols else np.zeros((X.shape[0], 0)))
        if with_gradients:
            dmu.append(grads)
    w = _grid_product(mu)
    total, wbar, guarded = _normalize(w)
    return Layers(mu, dmu, w, total, wbar, guarded)


def rule_outputs(model: AnfisModel, X: np.ndarray) -> np.ndarray:
    """Per-rule consequent values, shape (P, R)."""
    c = model.consequents
    f = np.broadcast_to(c[:, -1], (X.shape[0], c.shape[0])).copy()
    if model.order is Order.FIRST:
        for j in range(model.n_inputs):
            f += X[:, j, None] * c[:, j]
    return f


def firing_strengths(model: AnfisModel, x) -> np.ndarray:
    """Product T-norm firing strength of every rule; (R,) for one input
    vector, (P, R) for a batch."""
    single = np.ndim(x) == 1
    w = compute_layers(model, x).firing
    return w[0] if single else w


def normalize(w) -> np.ndarray:
    """Share of each rule in the total firing strength.

    Falls back to uniform weights when the total is below
    ``UNDERFLOW_GUARD``.
    """
    w = np.asarray(w, dtype=float)
    return _normalize(w)[1]


def forward(model: AnfisModel, x) -> ForwardRecord:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError(f"forward takes one input vector, got shape {x.shape}")
    X = _as_batch(model, x)
    layers = compute_layers(model, X)
    f = rule_outputs(model, X)
    out = (layers.normalized * f).sum(axis=1)
    return ForwardRecord(layers.firing[0], layers.normalized[0], f[0], float(out[0]))


def _design(model: AnfisModel, X: np.ndarray, wbar: np.ndarray) -> np.ndarray:
    if model.order is Order.ZERO:
        return wbar
    P = X.shape[0]
    ext = np.concatenate([X, np.ones((P, 1))], axis=1)
    return (wbar[:, :, None] * ext[:, None, :]).reshape(P, -1)


def design_matrix(model: AnfisModel, X) -> np.ndarray:
    """Rows of the linear system solved for the consequents.

    Row layout is rule-major: ``w̄_i * (x_1, ..., x_n, 1)`` for each rule
    (first order) or just ``w̄_i`` (zero order).
    """
    X = _as_batch(model, X)
    return _design(model, X, compute_layers(model, X).normalized)


def design_row(model: AnfisModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError(f"design_row takes one input vector, got shape {x.shape}")
    return design_matrix(model, x)[0]


def predict_batch(model: AnfisModel, X) -> np.ndarray:
    X = _as_batch(model, X)
    if X.shape[0] == 0:
        return np.zeros(0)
    layers = compute_layers(model, X)
    return (layers.normalized * rule_outputs(model, X)).sum(axis=1)


def save_model(model: AnfisModel, path) -> None:
    """Write the model as indented JSON; floats use shortest round-trip repr."""
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_model(path) -> AnfisModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not a valid model document ({exc})") from None
    return AnfisModel.from_dict(doc)
