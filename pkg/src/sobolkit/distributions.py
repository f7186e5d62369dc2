"""Marginal input distributions and the inverse-CDF transform.

Unit-hypercube designs are mapped to physical input space column by column
through the inverse CDF of each input's marginal law.  Supported kinds:

* ``uniform``      params ``lower``, ``upper``        (bounds of X)
* ``normal``       params ``mean``, ``std``           (moments of X)
* ``log_uniform``  params ``lower``, ``upper``        (bounds of ln X)
* ``log_normal``   params ``mean``, ``std``           (moments of ln X)

Each kind accepts an optional truncation to ``[lower, upper]`` in physical
units, implemented exactly by CDF rescaling::

    F_trunc^-1(u) = F^-1( F(a) + u * (F(b) - F(a)) )

which keeps the transform a deterministic, monotone function of u and so
preserves the shared-jitter replication structure of the designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

KINDS = ("uniform", "normal", "log_uniform", "log_normal")

# Acklam's rational approximation of the standard normal quantile, refined
# below by one Halley step; absolute error in u-space well under 1e-12.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def standard_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def standard_normal_quantile(u: float) -> float:
    """Inverse CDF of N(0, 1) on [0, 1); -inf at u = 0."""
    if u == 0.0:
        return -math.inf
    if u < _P_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif u <= 1.0 - _P_LOW:
        q = u - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - u))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # one Halley refinement against the erfc-based CDF; the residual is formed
    # tail-side to avoid cancellation (1 - u is exact for u >= 0.5)
    if u > 0.5:
        # Phi(x) - u = (1 - u) - Q(x) with Q the upper-tail CDF, both small
        e = (1.0 - u) - 0.5 * math.erfc(x / math.sqrt(2.0))
    else:
        e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - u
    if e != 0.0 and 0.5 * x * x < 700.0:
        du = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
        x = x - du / (1.0 + 0.5 * x * du)
    return x


@dataclass(frozen=True)
class MarginalDistribution:
    """A 1-D input law with inverse-CDF capability."""

    kind: str
    params: dict
    truncation: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown marginal kind {self.kind!r}")
        p = self.params
        try:
            if self.kind in ("uniform", "log_uniform"):
                lo, hi = float(p["lower"]), float(p["upper"])
                if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                    raise ConfigurationError(
                        f"{self.kind}: need finite lower < upper, got [{lo}, {hi}]")
            else:
                mean, std = float(p["mean"]), float(p["std"])
                if not (math.isfinite(mean) and math.isfinite(std) and std > 0):
                    raise ConfigurationError(
                        f"{self.kind}: need finite mean and std > 0, got ({mean}, {std})")
        except KeyError as exc:
            raise ConfigurationError(f"{self.kind}: missing parameter {exc}") from exc
        if self.truncation is not None:
            a, b = self.truncation
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ConfigurationError(f"truncation bounds must satisfy a < b, got [{a}, {b}]")
            mass = self._base_cdf(b) - self._base_cdf(a)
            if mass <= 0.0:
                raise ConfigurationError(
                    f"truncation [{a}, {b}] carries no probability mass for {self.kind}")

    # -- untruncated law -------------------------------------------------

    def _base_cdf(self, x: float) -> float:
        p = self.params
        if self.kind == "uniform":
            lo, hi = p["lower"], p["upper"]
            return min(1.0, max(0.0, (x - lo) / (hi - lo)))
        if self.kind == "normal":
            return standard_normal_cdf((x - p["mean"]) / p["std"])
        if x <= 0.0:
            return 0.0
        lx = math.log(x)
        if self.kind == "log_uniform":
            lo, hi = p["lower"], p["upper"]
            return min(1.0, max(0.0, (lx - lo) / (hi - lo)))
        return standard_normal_cdf((lx - p["mean"]) / p["std"])  # log_normal

    def _base_quantile(self, u: float) -> float:
        p = self.params
        if self.kind == "uniform":
            return p["lower"] + u * (p["upper"] - p["lower"])
        if self.kind == "normal":
            return p["mean"] + p["std"] * standard_normal_quantile(u)
        if self.kind == "log_uniform":
            return math.exp(p["lower"] + u * (p["upper"] - p["lower"]))
        return math.exp(p["mean"] + p["std"] * standard_normal_quantile(u))

    # -- public surface ---------------------------------------------------

    def cdf(self, x: float) -> float:
        if self.truncation is None:
            return self._base_cdf(x)
        a, b = self.truncation
        fa, fb = self._base_cdf(a), self._base_cdf(b)
        if x <= a:
            return 0.0
        if x >= b:
            return 1.0
        return (self._base_cdf(x) - fa) / (fb - fa)

    def quantile(self, u: float) -> float:
        if not 0.0 <= u < 1.0:  # also rejects NaN
            raise DomainError(f"u must lie in [0, 1), got {u}")
        if self.truncation is None:
            return self._base_quantile(u)
        a, b = self.truncation
        fa, fb = self._base_cdf(a), self._base_cdf(b)
        x = self._base_quantile(fa + u * (fb - fa))
        # rescaling is exact up to floating point; never escape the bounds
        return min(b, max(a, x))

    # -- problem-spec JSON ------------------------------------------------

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": dict(self.params)}
        if self.truncation is not None:
            out["truncation"] = {"lower": self.truncation[0], "upper": self.truncation[1]}
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MarginalDistribution":
        trunc = None
        if obj.get("truncation") is not None:
            t = obj["truncation"]
            trunc = (float(t["lower"]), float(t["upper"]))
        return cls(kind=obj["kind"], params=dict(obj["params"]), truncation=trunc)


def inverse_cdf(dist: MarginalDistribution, u: float) -> float:
    """F^-1(u) of the (possibly truncated) marginal; monotone in u."""
    return dist.quantile(float(u))


def transform_points(unit: np.ndarray, marginals) -> np.ndarray:
    """Apply each marginal's inverse CDF to the corresponding column."""
    unit = np.asarray(unit, dtype=float)
    if unit.ndim != 2 or unit.shape[1] != len(marginals):
        raise ConfigurationError(
            f"design has {unit.shape[1] if unit.ndim == 2 else '?'} columns "
            f"but {len(marginals)} marginals were given")
    if np.isnan(unit).any() or (unit < 0.0).any() or (unit >= 1.0).any():
        raise DomainError("unit design entries must lie in [0, 1)")
    cols = []
    for j, dist in enumerate(marginals):
        if dist.kind == "uniform" and dist.truncation is None:
            lo, hi = dist.params["lower"], dist.params["upper"]
            cols.append(lo + unit[:, j] * (hi - lo))
        else:
            cols.append(np.array([dist.quantile(u) for u in unit[:, j]]))
    return np.column_stack(cols)


def transform_design(unit, marginals):
    """Map a unit-space design to physical space, preserving its provenance.

    Returns a new design in ``physical`` space; permutations, jitter
    reference and identity chain are carried over unchanged.
    """
    from .designs import DesignMatrix

    if unit.space != "unit":
        raise ConfigurationError(f"expected a unit-space design, got {unit.space!r}")
    points = transform_points(unit.points, marginals)
    return DesignMatrix(
        id=unit.id + "@phys",
        space="physical",
        points=points,
        levels=unit.levels,
        column_perms=unit.column_perms,
        jitter=unit.jitter,
    )
