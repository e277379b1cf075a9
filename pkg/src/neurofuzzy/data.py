"""Datasets, CSV ingestion, splitting and benchmark generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, IngestionError, MissingColumnError, ShapeError

__all__ = [
    "Dataset",
    "MgSeries",
    "load_csv",
    "read_columns",
    "save_csv",
    "split",
    "split_ordered",
    "mackey_glass",
    "embed",
    "synth_function",
    "synth_benchmark",
]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Input matrix ``X`` (P x n) with a target column ``y``.

    Arrays are copied and frozen on construction.
    """

    X: np.ndarray
    y: np.ndarray
    input_names: tuple[str, ...]
    target_name: str = "y"
    notes: str = field(default="", compare=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        names = tuple(self.input_names)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, len(names))
        if X.ndim != 2:
            raise ShapeError(f"inputs must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ShapeError(f"{X.shape[0]} input rows but {y.shape[0]} targets")
        if X.shape[1] != len(names):
            raise ShapeError(f"{X.shape[1]} input columns but {len(names)} names")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise IngestionError("dataset values must be finite")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "input_names", names)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.X.shape[1]

    def take(self, index) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return Dataset(self.X[index], self.y[index], self.input_names, self.target_name, self.notes)

    def head(self, count: int) -> "Dataset":
        return self.take(np.arange(min(count, len(self))))

    def concat(self, other: "Dataset") -> "Dataset":
        if other.input_names != self.input_names:
            raise ShapeError("cannot concatenate datasets with different columns")
        return Dataset(np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]),
                       self.input_names, self.target_name, self.notes)


def _parse_float(text: str, lineno: int, column: str, path) -> float:
    try:
        value = float(text)
    except ValueError:
        raise IngestionError(f"{path}:{lineno}: column {column!r}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise IngestionError(f"{path}:{lineno}: column {column!r}: non-finite value {text!r}")
    return value


def read_columns(path, columns) -> np.ndarray:
    """Read the named columns of a headed, comma-separated file as floats."""
    path = Path(path)
    columns = list(columns)
    if not path.is_file():
        raise IngestionError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path}: empty file, expected a header row") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise MissingColumnError(
                f"{path}: missing column(s) {', '.join(map(repr, missing))}; header has {header}"
            )
        idx = [header.index(c) for c in columns]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise IngestionError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append([_parse_float(row[i].strip(), lineno, c, path) for i, c in zip(idx, columns)])
    return np.array(rows, dtype=float).reshape(len(rows), len(columns))


def load_csv(path, input_columns, target_column) -> Dataset:
    """Dataset from the selected columns of a CSV file, in the requested order."""
    input_columns = tuple(input_columns)
    if not input_columns:
        raise ConfigurationError("at least one input column is required")
    data = read_columns(path, [*input_columns, target_column])
    return Dataset(data[:, :-1], data[:, -1], input_columns, target_column)


def save_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*ds.input_names, ds.target_name])
        for xs, t in zip(ds.X.tolist(), ds.y.tolist()):
            writer.writerow([repr(v) for v in xs] + [repr(t)])


def split(ds: Dataset, train_fraction: float, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Shuffle and cut into (train, check).

    The permutation is ``numpy.random.default_rng(seed).permutation(P)``
    (PCG64); the first ``floor(train_fraction * P)`` permuted rows train.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigurationError(f"train fraction must lie in (0, 1), got {train_fraction}")
    P = len(ds)
    if P == 0:
        raise ConfigurationError("cannot split an empty dataset")
    perm = np.random.default_rng(seed).permutation(P)
    n_train = math.floor(train_fraction * P)
    return ds.take(perm[:n_train]), ds.take(perm[n_train:])


def split_ordered(ds: Dataset, n_train: int, n_check: int) -> tuple[Dataset, Dataset]:
    """Consecutive rows: the first ``n_train`` train, the next ``n_check`` check."""
    if n_train < 1 or n_check < 1:
        raise ConfigurationError("train and check counts must be positive")
    if n_train + n_check > len(ds):
        raise ConfigurationError(f"need {n_train + n_check} rows, dataset has {len(ds)}")
    return ds.take(np.arange(n_train)), ds.take(np.arange(n_train, n_train + n_check))


# --------------------------------------------------------------------------
# Mackey-Glass


@dataclass(frozen=True, eq=False)
class MgSeries:
    """Solution sampled on ``t = 0, h, 2h, ...``."""

    step: float
    values: np.ndarray
    tau: float = 17.0
    x0: float = 1.2

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.step

    def at_integers(self) -> np.ndarray:
        """Values at t = 0, 1, 2, ..."""
        per_unit = int(round(1.0 / self.step))
        return self.values[::per_unit]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x"])
            for t, x in enumerate(self.at_integers().tolist()):
                writer.writerow([t, repr(x)])

    @classmethod
    def from_csv(cls, path) -> "MgSeries":
        data = read_columns(path, ["t", "x"])
        t = data[:, 0]
        if t.size and not np.array_equal(t, np.arange(t.size)):
            raise IngestionError(f"{path}: expected consecutive integer times starting at 0")
        return cls(1.0, data[:, 1])


def _mg_rhs(x, xd):
    return 0.2 * xd / (1.0 + xd ** 10) - 0.1 * x


def mackey_glass(tau: float = 17.0, horizon: float = 2000.0, h: float = 0.1, x0: float = 1.2) -> MgSeries:
    """Integrate ``x' = 0.2 x(t-tau) / (1 + x(t-tau)^10) - 0.1 x(t)`` with RK4.

    The history is constant, ``x(t) = x0`` for ``t <= 0``. Delayed values at
    full steps are read from the stored grid; at half steps they come from
    the cubic Hermite interpolant of the stored values and slopes.
    """
    per_unit = 1.0 / h if h > 0 else float("nan")
    if not (h > 0 and abs(per_unit - round(per_unit)) < 1e-9 and round(per_unit) >= 1):
        raise ConfigurationError(f"step h must divide 1, got {h}")
    lag = tau / h
    if abs(lag - round(lag)) > 1e-9 or round(lag) < 1:
        raise ConfigurationError(f"tau/h must be a positive integer, got {tau}/{h}")
    if horizon <= 0:
        raise ConfigurationError(f"horizon must be positive, got {horizon}")
    d = int(round(lag))
    n = int(math.ceil(horizon / h - 1e-9))

    x = np.empty(n + 1)
    slope = np.zeros(n + 1)
    x[0] = x0
    half = 0.5 * h
    for i in range(n):
        j = i - d
        xd0 = x[j] if j >= 0 else x0
        xd1 = x[j + 1] if j + 1 >= 0 else x0
        sd0 = slope[j] if j >= 0 else 0.0
        sd1 = slope[j + 1] if j + 1 >= 0 else 0.0
        xdh = 0.5 * (xd0 + xd1) + h * (sd0 - sd1) / 8.0
        xi = x[i]
        k1 = _mg_rhs(xi, xd0)
        slope[i] = k1
        k2 = _mg_rhs(xi + half * k1, xdh)
        k3 = _mg_rhs(xi + half * k2, xdh)
        k4 = _mg_rhs(xi + h * k3, xd1)
        x[i + 1] = xi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    x.setflags(write=False)
    return MgSeries(float(h), x, float(tau), float(x0))


def embed(series, lags=(-12, -6, 0), horizon: int = 6) -> Dataset:
    """Lag-embedded forecasting pairs, one row per valid integer t.

    Inputs are ``x(t + lag)`` for each lag; the target is ``x(t + horizon)``.
    ``series`` may be an ``MgSeries`` or an array of integer-time samples.
    """
    values = series.at_integers() if isinstance(series, MgSeries) else np.asarray(series, dtype=float)
    lags = tuple(int(l) for l in lags)
    start = -min(min(lags), 0)
    stop = values.size - max(horizon, max(lags), 0)
    if stop <= start:
        raise ConfigurationError(
            f"series of length {values.size} too short for lags {lags} and horizon {horizon}"
        )
    t = np.arange(start, stop)
    X = np.column_stack([values[t + l] for l in lags])
    y = values[t + horizon]

    def name(off):
        return "x(t)" if off == 0 else f"x(t{off:+d})"

    return Dataset(X, y, tuple(name(l) for l in lags), name(horizon))


# --------------------------------------------------------------------------
# synthetic three-input benchmark


def synth_function(x, y, z):
    """``(1 + x**0.5 + 1/y + z**-1.5)**2``, defined for positive arguments."""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    if np.any(x <= 0) or np.any(y <= 0) or np.any(z <= 0):
        raise DomainError("synthetic benchmark is defined only for positive inputs")
    return (1.0 + np.sqrt(x) + 1.0 / y + z ** -1.5) ** 2


def synth_benchmark(lo: float = 1.0, hi: float = 6.0, points: int = 6) -> Dataset:
    """Full Cartesian grid sample of :func:`synth_function` on ``[lo, hi]^3``."""
    if lo <= 0 or hi <= 0:
        raise DomainError(f"grid bounds must be positive, got [{lo}, {hi}]")
    if not lo < hi or points < 2:
        raise ConfigurationError("need lo < hi and at least 2 points per axis")
    axis = np.linspace(lo, hi, points)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    X = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    y = synth_function(X[:, 0], X[:, 1], X[:, 2])
    return Dataset(X, y, ("x", "y", "z"), "f",
                   notes="substitute benchmark (1 + x^0.5 + 1/y + z^-1.5)^2")
