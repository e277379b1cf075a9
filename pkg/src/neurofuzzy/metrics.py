"""Error measures, goodness of fit and parity-plot export."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DomainError, ShapeError

__all__ = ["RmseForm", "EvalReport", "rmse", "r_squared", "evaluate", "parity_export", "read_parity"]

_SQRT2 = math.sqrt(2.0)


class RmseForm(str, Enum):
    EQ1 = "eq1"            # sqrt(sum(e^2) / (2P)), the training cost
    STANDARD = "standard"  # sqrt(sum(e^2) / P)


def _pair(y_obs, y_model, min_len=1):
    a = np.asarray(y_obs, dtype=float).ravel()
    b = np.asarray(y_model, dtype=float).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.size} observed vs {b.size} predicted")
    if a.size < min_len:
        raise ShapeError(f"need at least {min_len} samples, got {a.size}")
    return a, b


def rmse(y_obs, y_model, form: RmseForm | str = RmseForm.STANDARD) -> float:
    """Root mean square error.

    ``RmseForm.EQ1`` halves the mean before the root (the hybrid-training cost);
    it is computed as the standard value divided by sqrt(2) so the two forms
    differ by exactly that factor.
    """
    a, b = _pair(y_obs, y_model)
    e = a - b
    std = math.sqrt(float(np.mean(e * e)))
    return std / _SQRT2 if RmseForm(form) is RmseForm.EQ1 else std


def r_squared(y_obs, y_model) -> float:
    """Coefficient of determination, ``(SS_tot - SS_res) / SS_tot``.

    Negative when the model does worse than the observed mean.
    """
    a, b = _pair(y_obs, y_model, min_len=2)
    dev = a - a.mean()
    ss_tot = float(np.sum(dev * dev))
    if ss_tot == 0.0:
        raise DomainError("r_squared undefined for constant observations")
    res = a - b
    ss_res = float(np.sum(res * res))
    return (ss_tot - ss_res) / ss_tot


@dataclass(frozen=True)
class EvalReport:
    rmse_eq1: float
    rmse_std: float
    r_squared: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(y_obs, y_model) -> EvalReport:
    a, b = _pair(y_obs, y_model)
    std = rmse(a, b, RmseForm.STANDARD)
    r2 = r_squared(a, b) if a.size >= 2 and np.ptp(a) > 0 else float("nan")
    return EvalReport(std / _SQRT2, std, r2, int(a.size))


def parity_export(y_obs, y_model, path) -> float:
    """Write ``observed,predicted`` pairs preceded by a ``# r_squared=`` line.

    Returns the R² that was written.
    """
    a, b = _pair(y_obs, y_model, min_len=0)
    r2 = r_squared(a, b) if a.size >= 2 and np.ptp(a) > 0 else float("nan")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# r_squared={r2!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["observed", "predicted"])
        for o, p in zip(a.tolist(), b.tolist()):
            writer.writerow([repr(o), repr(p)])
    return r2


def read_parity(path) -> tuple[np.ndarray, np.ndarray, float]:
    r2 = float("nan")
    obs, pred = [], []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if first.startswith("# r_squared="):
            r2 = float(first.split("=", 1)[1])
        else:
            fh.seek(0)
        reader = csv.DictReader(fh)
        for row in reader:
            obs.append(float(row["observed"]))
            pred.append(float(row["predicted"]))
    return np.array(obs), np.array(pred), r2
