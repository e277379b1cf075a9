"""Parametric membership functions and grid initialization.

Every family is evaluated in closed form and exposes analytic partial
derivatives with respect to its own parameters, which the premise-gradient
step chains through the rule layers. Family tags serialize as the MATLAB
Fuzzy Logic Toolbox names (``gaussmf``, ``trimf``, ...).

Parameter order per family::

    gaussmf   (c, sigma)
    trimf     (a, b, c)            feet a, c; peak b
    trapmf    (a, b, c, d)         feet a, d; shoulders b, c
    gbellmf   (a, b, c)            half-width a, slope b, center c
    pimf      (a, b, c, d)         S-ramp a->b times Z-ramp c->d
    dsigmf    (a1, c1, a2, c2)     |sig(a1(x-c1)) - sig(a2(x-c2))|
    psigmf    (a1, c1, a2, c2)     sig(a1(x-c1)) * sig(a2(x-c2))
    gauss2mf  (c1, sigma1, c2, sigma2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .errors import ConfigurationError, ParameterError

__all__ = [
    "Family",
    "MembershipFunction",
    "FuzzyVariable",
    "eval_mf",
    "mf_param_gradients",
    "init_grid",
    "repair_params",
    "WIDTH_PARAMS",
]


class Family(str, Enum):
    GAUSSIAN = "gaussmf"
    TRIANGULAR = "trimf"
    TRAPEZOIDAL = "trapmf"
    GENERALIZED_BELL = "gbellmf"
    PI_SHAPED = "pimf"
    SIGMOID_DIFFERENCE = "dsigmf"
    SIGMOID_PRODUCT = "psigmf"
    TWO_SIDED_GAUSSIAN = "gauss2mf"

    @classmethod
    def parse(cls, value: "Family | str") -> "Family":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ConfigurationError(
                f"unknown membership family {value!r}; expected one of {names}"
            ) from None


ARITY = {
    Family.GAUSSIAN: 2,
    Family.TRIANGULAR: 3,
    Family.TRAPEZOIDAL: 4,
    Family.GENERALIZED_BELL: 3,
    Family.PI_SHAPED: 4,
    Family.SIGMOID_DIFFERENCE: 4,
    Family.SIGMOID_PRODUCT: 4,
    Family.TWO_SIDED_GAUSSIAN: 4,
}

# Indices of strictly positive width parameters, clamped at sigma_min.
WIDTH_PARAMS = {
    Family.GAUSSIAN: (1,),
    Family.GENERALIZED_BELL: (0,),
    Family.TWO_SIDED_GAUSSIAN: (1, 3),
}

# Families whose parameters must be non-decreasing.
_ORDERED = (Family.TRIANGULAR, Family.TRAPEZOIDAL, Family.PI_SHAPED)


@dataclass(frozen=True)
class MembershipFunction:
    """A fuzzy set: family tag plus its parameter tuple.

    Calling the instance evaluates the membership degree elementwise.
    """

    family: Family
    params: tuple[float, ...]

    def __post_init__(self):
        family = Family.parse(self.family)
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", params)
        _validate(family, params)

    def __call__(self, x):
        return eval_mf(self, x)

    def gradients(self, x) -> np.ndarray:
        return mf_param_gradients(self, x)

    def with_params(self, params) -> "MembershipFunction":
        return MembershipFunction(self.family, tuple(params))

    def to_dict(self) -> dict:
        return {"family": self.family.value, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "MembershipFunction":
        return cls(Family.parse(d["family"]), tuple(d["params"]))


@dataclass(frozen=True)
class FuzzyVariable:
    """A named input with its universe of discourse and ordered fuzzy sets."""

    name: str
    lo: float
    hi: float
    mfs: tuple[MembershipFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "mfs", tuple(self.mfs))
        if not self.lo < self.hi:
            raise ConfigurationError(
                f"variable {self.name!r}: range requires lo < hi, got [{self.lo}, {self.hi}]"
            )
        if not self.mfs:
            raise ConfigurationError(f"variable {self.name!r} has no membership functions")

    @classmethod
    def grid(cls, name: str, lo: float, hi: float, count: int = 3,
             family: Family | str = Family.GAUSSIAN) -> "FuzzyVariable":
        return cls(name, lo, hi, tuple(init_grid((lo, hi), count, family)))

    def sigma_min(self, scale: float = 1e-4) -> float:
        return scale * (self.hi - self.lo)

    def memberships(self, x) -> np.ndarray:
        """Degrees of every set at ``x``; shape ``x.shape + (len(mfs),)``."""
        x = np.asarray(x, dtype=float)
        return np.stack([eval_mf(mf, x) for mf in self.mfs], axis=-1)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "range": [self.lo, self.hi],
            "mfs": [mf.to_dict() for mf in self.mfs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FuzzyVariable":
        lo, hi = d["range"]
        return cls(d["name"], lo, hi, tuple(MembershipFunction.from_dict(m) for m in d["mfs"]))


def _validate(family: Family, p: tuple[float, ...]) -> None:
    arity = ARITY[family]
    if len(p) != arity:
        raise ParameterError(f"{family.value} requires exactly {arity} parameters, got {len(p)}")
    if not all(math.isfinite(v) for v in p):
        raise ParameterError(f"{family.value} parameters must be finite, got {p}")
    for i in WIDTH_PARAMS.get(family, ()):
        if not p[i] > 0:
            raise ParameterError(f"{family.value} width parameter #{i} must be > 0, got {p[i]}")
    if family in _ORDERED and any(p[i] > p[i + 1] for i in range(len(p) - 1)):
        raise ParameterError(f"{family.value} parameters must be non-decreasing, got {p}")


def repair_params(family: Family, params, sigma_min: float) -> tuple[float, ...]:
    """Project raw parameters (e.g. after a gradient step) onto the valid set."""
    p = [float(v) for v in params]
    if family in _ORDERED:
        p.sort()
    for i in WIDTH_PARAMS.get(family, ()):
        p[i] = max(p[i], sigma_min)
    return tuple(p)


# --------------------------------------------------------------------------
# closed forms; each returns (mu, grads) with grads shaped x.shape + (arity,)


def _gauss(x, c, s):
    d = x - c
    mu = np.exp(-(d * d) / (2.0 * s * s))
    return mu, np.stack([mu * d / (s * s), mu * d * d / (s * s * s)], axis=-1)


def _ramp_up(x, a, b):
    """Rising edge 0 at a, 1 at b; derivative w.r.t. (a, b) inside (a, b) only."""
    inside = (x > a) & (x < b)
    width = np.where(inside, b - a, 1.0)
    val = np.where(x >= b, 1.0, np.where(inside, (x - a) / width, 0.0))
    da = np.where(inside, (x - b) / (width * width), 0.0)
    db = np.where(inside, -(x - a) / (width * width), 0.0)
    return val, da, db


def _ramp_down(x, c, d):
    inside = (x > c) & (x < d)
    width = np.where(inside, d - c, 1.0)
    val = np.where(x <= c, 1.0, np.where(inside, (d - x) / width, 0.0))
    dc = np.where(inside, (d - x) / (width * width), 0.0)
    dd = np.where(inside, (x - c) / (width * width), 0.0)
    return val, dc, dd


def _trap(x, a, b, c, d):
    up, da, db = _ramp_up(x, a, b)
    down, dc, dd = _ramp_down(x, c, d)
    mu = np.minimum(up, down)
    zero = np.zeros_like(mu)
    use_up = up < down
    use_down = down < up
    grads = np.stack([
        np.where(use_up, da, zero),
        np.where(use_up, db, zero),
        np.where(use_down, dc, zero),
        np.where(use_down, dd, zero),
    ], axis=-1)
    return mu, grads


def _tri(x, a, b, c):
    mu, g = _trap(x, a, b, b, c)
    grads = np.stack([g[..., 0], g[..., 1] + g[..., 2], g[..., 3]], axis=-1)
    return mu, grads


def _bell(x, a, b, c):
    u = (x - c) / a
    au = np.abs(u)
    nz = au > 0
    safe = np.where(nz, au, 1.0)
    t = np.where(nz, safe ** (2.0 * b), 0.0)
    mu = 1.0 / (1.0 + t)
    mu2 = mu * mu
    da = 2.0 * b * t * mu2 / a
    db = np.where(nz, -2.0 * np.log(safe) * t * mu2, 0.0)
    dc = np.where(nz, 2.0 * b * t * mu2 / (np.where(nz, u, 1.0) * a), 0.0)
    return mu, np.stack([da, db, dc], axis=-1)


def _smf(x, a, b):
    """S-shaped spline ramp from 0 at a to 1 at b, with (d/da, d/db)."""
    if a >= b:
        val = np.where(x >= 0.5 * (a + b), 1.0, 0.0)
        zero = np.zeros_like(val)
        return val, zero, zero
    L = b - a
    m = 0.5 * (a + b)
    lower = (x > a) & (x <= m)
    upper = (x > m) & (x < b)
    u = (x - a) / L
    v = (x - b) / L
    val = np.where(x <= a, 0.0, np.where(lower, 2 * u * u, np.where(upper, 1 - 2 * v * v, 1.0)))
    du_a = (x - b) / (L * L)
    du_b = -(x - a) / (L * L)
    da = np.where(lower, 4 * u * du_a, np.where(upper, -4 * v * du_a, 0.0))
    db = np.where(lower, 4 * u * du_b, np.where(upper, -4 * v * du_b, 0.0))
    return val, da, db


def _pi(x, a, b, c, d):
    s, sa, sb = _smf(x, a, b)
    z, zc, zd = _smf(x, c, d)
    z, zc, zd = 1.0 - z, -zc, -zd
    return s * z, np.stack([sa * z, sb * z, s * zc, s * zd], axis=-1)


def _sig(x, a, c):
    s = expit(a * (x - c))
    ds = s * (1.0 - s)
    return s, ds * (x - c), -a * ds


def _dsig(x, a1, c1, a2, c2):
    s1, s1a, s1c = _sig(x, a1, c1)
    s2, s2a, s2c = _sig(x, a2, c2)
    diff = s1 - s2
    sgn = np.sign(diff)
    mu = np.abs(diff)
    return mu, np.stack([sgn * s1a, sgn * s1c, -sgn * s2a, -sgn * s2c], axis=-1)


def _psig(x, a1, c1, a2, c2):
    s1, s1a, s1c = _sig(x, a1, c1)
    s2, s2a, s2c = _sig(x, a2, c2)
    return s1 * s2, np.stack([s1a * s2, s1c * s2, s1 * s2a, s1 * s2c], axis=-1)


def _gauss2(x, c1, s1, c2, s2):
    g1, dg1 = _gauss(x, c1, s1)
    g2, dg2 = _gauss(x, c2, s2)
    left = x < c1
    right = x > c2
    lv = np.where(left, g1, 1.0)
    rv = np.where(right, g2, 1.0)
    zero = np.zeros_like(g1)
    grads = np.stack([
        np.where(left, dg1[..., 0], zero) * rv,
        np.where(left, dg1[..., 1], zero) * rv,
        np.where(right, dg2[..., 0], zero) * lv,
        np.where(right, dg2[..., 1], zero) * lv,
    ], axis=-1)
    return lv * rv, grads


_FORMS = {
    Family.GAUSSIAN: _gauss,
    Family.TRIANGULAR: _tri,
    Family.TRAPEZOIDAL: _trap,
    Family.GENERALIZED_BELL: _bell,
    Family.PI_SHAPED: _pi,
    Family.SIGMOID_DIFFERENCE: _dsig,
    Family.SIGMOID_PRODUCT: _psig,
    Family.TWO_SIDED_GAUSSIAN: _gauss2,
}


def evaluate(mf: MembershipFunction, x) -> tuple[np.ndarray, np.ndarray]:
    """Degree and parameter gradients in a single pass."""
    x = np.asarray(x, dtype=float)
    return _FORMS[mf.family](x, *mf.params)


def eval_mf(mf: MembershipFunction, x):
    """Membership degree of ``x`` (scalar or array) in ``mf``."""
    mu, _ = evaluate(mf, x)
    mu = np.clip(mu, 0.0, 1.0)
    return float(mu) if mu.ndim == 0 else mu


def mf_param_gradients(mf: MembershipFunction, x) -> np.ndarray:
    """Partial derivatives of the degree with respect to each parameter.

    The last axis follows the declared parameter order. At the corners of
    piecewise-linear families the subgradient 0 is returned.
    """
    _, grads = evaluate(mf, x)
    return grads


# --------------------------------------------------------------------------
# grid initialization

_HALF_HEIGHT = 2.0 * math.sqrt(2.0 * math.log(2.0))


def _sigmoid_bump_halfwidth(slope: float, half_gap: float, product: bool) -> float:
    """Offset h of the two sigmoid centers from the bump center so that the
    bump passes through 0.5 exactly ``half_gap`` away from its center."""
    m = half_gap

    def excess(h):
        s1 = expit(slope * (h - m))
        s2 = expit(slope * (h + m))
        val = s1 * s2 if product else s1 - (1.0 - s2)
        return val - 0.5

    hi = m + 40.0 / slope
    return brentq(excess, 0.0, hi, xtol=1e-15 * max(1.0, hi), rtol=4 * np.finfo(float).eps)


def init_grid(range_, count: int, family: Family | str = Family.GAUSSIAN) -> list[MembershipFunction]:
    """Equally spaced sets whose neighbours cross at degree 0.5.

    Centers sit at ``lo + k*d`` with ``d = (hi - lo)/(count - 1)``; widths are
    chosen per family so the half-height points of adjacent sets coincide at
    the midpoints between centers, which gives epsilon-completeness with
    epsilon = 0.5 over the whole range.
    """
    family = Family.parse(family)
    lo, hi = (float(v) for v in range_)
    if count < 2:
        raise ConfigurationError(f"grid initialization needs count >= 2, got {count}")
    if not lo < hi:
        raise ConfigurationError(f"grid initialization needs lo < hi, got [{lo}, {hi}]")
    d = (hi - lo) / (count - 1)
    centers = [lo + k * d for k in range(count)]

    if family is Family.GAUSSIAN:
        sigma = d / _HALF_HEIGHT
        params = [(c, sigma) for c in centers]
    elif family is Family.TRIANGULAR:
        params = [(c - d, c, c + d) for c in centers]
    elif family is Family.TRAPEZOIDAL:
        params = [(c - 0.75 * d, c - 0.25 * d, c + 0.25 * d, c + 0.75 * d) for c in centers]
    elif family is Family.GENERALIZED_BELL:
        params = [(0.5 * d, 2.0, c) for c in centers]
    elif family is Family.PI_SHAPED:
        params = [(c - d, c, c, c + d) for c in centers]
    elif family in (Family.SIGMOID_DIFFERENCE, Family.SIGMOID_PRODUCT):
        # each edge rises from 0.1 to 0.9 over half the center spacing
        slope = 4.0 * math.log(9.0) / d
        product = family is Family.SIGMOID_PRODUCT
        h = _sigmoid_bump_halfwidth(slope, 0.5 * d, product)
        a2 = -slope if product else slope
        params = [(slope, c - h, a2, c + h) for c in centers]
    else:  # TWO_SIDED_GAUSSIAN: flat top of width d/4, flanks cross at midpoints
        sigma = 0.75 * d / _HALF_HEIGHT
        params = [(c - d / 8, sigma, c + d / 8, sigma) for c in centers]
    return [MembershipFunction(family, p) for p in params]
