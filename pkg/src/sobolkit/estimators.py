"""Sobol' index estimators on aligned simulation batches.

All estimators are correlation-type statistics standardized by moments pooled
over the batches they consume (every batch has the output distribution of Y,
so pooling improves the moment estimates).  With batches x, w and the
pick-freeze partner w_minus_i of input i, all of length N:

* Oracle 2 (pooled):   sum_k (x_k - mu)(wmi_k - mu) / (N sigma2)
  with mu, sigma2 pooled over {x, wmi};
* Oracle 2 (Pearson):  the plain empirical correlation of x and wmi;
* Oracle 1:            sum_k (x_k - mu)(wmi_k - w_k) / (N sigma2)
  with mu, sigma2 pooled over the three batches;
* total order:         1 - sum_k (w_k - mu)(wmi_k - mu) / (N sigma2)
  with mu, sigma2 pooled over {w, wmi}.

Pooled variance uses the biased 1/N normalizer, computed elementwise as
mean over k of (sum of squares across batches / m) minus mu^2, which makes
the two-batch estimators exactly symmetric in their arguments.

On replicated-LHD families the three-batch estimators take the roles
x = outputs at X, w = outputs at Z_i (independent column i, partner rows
elsewhere) and wmi = W's outputs reordered to match X's column i.  The
averaged (triple) variants reuse the same 3N simulations under the three
admissible row alignments and average the component values.

Estimates can be negative when the true index is near zero; values are
reported as computed, with clamping to [0, 1] available but off by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .designs import RlhdFamily, SimulationBatch
from .errors import (ConfigurationError, DegenerateModelError, DomainError,
                     InvariantViolation, PreconditionError)

KINDS = ("oracle2_pooled", "oracle2_pearson", "oracle1", "oracle1_triple",
         "oracle2_averaged", "oracle2_triple", "total_order")


# ---------------------------------------------------------------------------
# pooled moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PooledMoments:
    mean: float
    variance: float
    pool_size: int

    @property
    def is_degenerate(self) -> bool:
        return self.variance == 0.0


def _as_arrays(batches) -> list[np.ndarray]:
    arrays = [b.outputs if isinstance(b, SimulationBatch) else np.asarray(b, float)
              for b in batches]
    if not arrays:
        raise DomainError("need at least one batch")
    n = arrays[0].size
    if any(a.ndim != 1 or a.size != n for a in arrays):
        raise ConfigurationError("batches must be 1-D and of equal length")
    return arrays


def pooled_moments(batches) -> PooledMoments:
    """Grand mean and biased (1/N) grand variance over equal-length batches.

    The variance is the grand mean of squares minus the squared mean,
    evaluated in centered form (algebraically identical, no cancellation).
    """
    arrays = _as_arrays(batches)
    n = arrays[0].size
    if n < 2:
        raise DomainError("pooled moments need N >= 2")
    m = len(arrays)
    mean = sum(float(a.mean()) for a in arrays) / m
    var = sum(float(np.dot(a - mean, a - mean)) for a in arrays) / (m * n)
    return PooledMoments(mean=mean, variance=var, pool_size=m)


def _require_spread(moments: PooledMoments):
    if moments.is_degenerate:
        raise DegenerateModelError("pooled output variance is zero (constant model?)")


def _cross(a: np.ndarray, b: np.ndarray, mom: PooledMoments) -> float:
    return float(np.dot(a - mom.mean, b - mom.mean) / a.size) / mom.variance


def _diff(base: np.ndarray, plus: np.ndarray, minus: np.ndarray,
          mom: PooledMoments) -> float:
    return float(np.dot(base - mom.mean, plus - minus) / base.size) / mom.variance


# ---------------------------------------------------------------------------
# core values on aligned arrays (used directly by bootstrap closures)
# ---------------------------------------------------------------------------

def oracle2_value(x, wmi, moments: PooledMoments | None = None) -> float:
    x, wmi = _as_arrays([x, wmi])
    mom = pooled_moments([x, wmi]) if moments is None else moments
    _require_spread(mom)
    return _cross(x, wmi, mom)


def oracle2_pearson_value(x, wmi) -> float:
    x, wmi = _as_arrays([x, wmi])
    cx, cw = x - x.mean(), wmi - wmi.mean()
    denom = float(np.sqrt(np.dot(cx, cx) * np.dot(cw, cw)))
    if denom == 0.0:
        raise DegenerateModelError("a batch has zero variance")
    return float(np.dot(cx, cw)) / denom

def oracle1_value(x, w, wmi, moments: PooledMoments | None = None) -> float:
    x, w, wmi = _as_arrays([x, w, wmi])
    mom = pooled_moments([x, w, wmi]) if moments is None else moments
    _require_spread(mom)
    return _diff(x, wmi, w, mom)


def total_order_value(w, wmi) -> float:
    w, wmi = _as_arrays([w, wmi])
    mom = pooled_moments([w, wmi])
    _require_spread(mom)
    return 1.0 - _cross(w, wmi, mom)


# ---------------------------------------------------------------------------
# estimates with provenance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    replicates: int

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper,
                "level": self.level, "B": self.replicates}

    @classmethod
    def from_json(cls, obj) -> "ConfidenceInterval | None":
        if obj is None:
            return None
        return cls(lower=obj["lower"], upper=obj["upper"],
                   level=obj["level"], replicates=obj["B"])


@dataclass(frozen=True)
class SobolEstimate:
    """One index estimate with its estimator kind and provenance."""

    input_index: int
    kind: str
    value: float
    ci: ConfidenceInterval | None = None
    components: tuple[float, ...] | None = None
    batches_used: tuple[str, ...] = ()
    evaluations_charged: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown estimator kind {self.kind!r}")

    def with_ci(self, ci: ConfidenceInterval) -> "SobolEstimate":
        return SobolEstimate(self.input_index, self.kind, self.value, ci,
                             self.components, self.batches_used,
                             self.evaluations_charged)

    def to_json(self) -> dict:
        return {
            "input": self.input_index,
            "kind": self.kind,
            "value": self.value,
            "ci": self.ci.to_json() if self.ci else None,
            "components": list(self.components) if self.components else None,
            "batches_used": list(self.batches_used),
            "evaluations_charged": self.evaluations_charged,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SobolEstimate":
        return cls(
            input_index=obj["input"],
            kind=obj["kind"],
            value=obj["value"],
            ci=ConfidenceInterval.from_json(obj.get("ci")),
            components=tuple(obj["components"]) if obj.get("components") else None,
            batches_used=tuple(obj.get("batches_used", ())),
            evaluations_charged=obj.get("evaluations_charged", 0),
        )


def _clamp(v: float, on: bool) -> float:
    return min(1.0, max(0.0, v)) if on else v


def oracle2(x: SimulationBatch, wmi: SimulationBatch, input_index: int = 0,
            clamp: bool = False) -> SobolEstimate:
    value = oracle2_value(x.outputs, wmi.outputs)
    return SobolEstimate(input_index, "oracle2_pooled", _clamp(value, clamp),
                         batches_used=(x.design_id, wmi.design_id),
                         evaluations_charged=2 * x.n)


def oracle2_pearson(x: SimulationBatch, wmi: SimulationBatch, input_index: int = 0,
                    clamp: bool = False) -> SobolEstimate:
    value = oracle2_pearson_value(x.outputs, wmi.outputs)
    return SobolEstimate(input_index, "oracle2_pearson", _clamp(value, clamp),
                         batches_used=(x.design_id, wmi.design_id),
                         evaluations_charged=2 * x.n)


def oracle1(x: SimulationBatch, w: SimulationBatch, wmi: SimulationBatch,
            input_index: int = 0, clamp: bool = False) -> SobolEstimate:
    value = oracle1_value(x.outputs, w.outputs, wmi.outputs)
    return SobolEstimate(input_index, "oracle1", _clamp(value, clamp),
                         batches_used=(x.design_id, w.design_id, wmi.design_id),
                         evaluations_charged=3 * x.n)


def total_order(w: SimulationBatch, wmi: SimulationBatch, input_index: int = 0,
                clamp: bool = False) -> SobolEstimate:
    value = total_order_value(w.outputs, wmi.outputs)
    return SobolEstimate(input_index, "total_order", _clamp(value, clamp),
                         batches_used=(w.design_id, wmi.design_id),
                         evaluations_charged=2 * w.n)


# ---------------------------------------------------------------------------
# replicated-design estimators (reuse the same simulations under reordering)
# ---------------------------------------------------------------------------

def _root_name(batch_or_id) -> str:
    did = batch_or_id.design_id if isinstance(batch_or_id, SimulationBatch) else batch_or_id
    tail = did.split(":", 1)[1] if ":" in did else did
    return tail.split("~", 1)[0]


def triple_aligned_arrays(family: RlhdFamily, i: int,
                          batches: dict[str, SimulationBatch]):
    """The five aligned output vectors used by the averaged Oracle 1 estimator.

    Returns (x, wmi, z, x_tilde, w_tilde) in the common row frame of the
    pick-freeze partner view, all derived from the X / W / Z<i> batches by
    row reordering only.
    """
    zi_name = f"Z{i}"
    if not family.has_z(i) or zi_name not in batches:
        raise PreconditionError(
            f"Z{i} must be created and evaluated before a triple estimator")
    for name in ("X", "W"):
        if name not in batches:
            raise ConfigurationError(f"missing batch for design {name}")
    x = batches["X"].outputs
    z = batches[zi_name].outputs
    wmi = family.outputs_for(family.wmi(i), batches).outputs
    xt = family.outputs_for(family.x_tilde(i), batches).outputs
    wt = family.outputs_for(family.w_tilde(i), batches).outputs
    return x, wmi, z, xt, wt


def triple_oracle1_components(x, wmi, z, xt, wt) -> tuple[float, float, float]:
    """The three reordered Oracle 1 values from one aligned array set.

    One pooled moment set serves all three components: the batches pooled
    are the same 3N simulation values whichever alignment is used.
    """
    mom = pooled_moments([x, wmi, z])
    _require_spread(mom)
    c1 = _diff(x, wmi, z, mom)
    c2 = _diff(xt, z, wmi, mom)
    c3 = _diff(wt, z, wmi, mom)
    return c1, c2, c3


def triple_oracle1(family: RlhdFamily, i: int, batches: dict[str, SimulationBatch],
                   clamp: bool = False) -> SobolEstimate:
    """Averaged (triple) Oracle 1: mean of the three reordered estimators.

    Costs nothing beyond the three batches; the component values are kept
    for inspection.
    """
    arrays = triple_aligned_arrays(family, i, batches)
    comps = triple_oracle1_components(*arrays)
    value = (comps[0] + comps[1] + comps[2]) / 3.0
    n = family.n
    return SobolEstimate(i, "oracle1_triple", _clamp(value, clamp), components=comps,
                         batches_used=(batches["X"].design_id, batches["W"].design_id,
                                       batches[f"Z{i}"].design_id),
                         evaluations_charged=3 * n)


def averaged_oracle2(family: RlhdFamily, x: SimulationBatch,
                     partners: dict[str, SimulationBatch], i: int,
                     clamp: bool = False) -> SobolEstimate:
    """Mean of the simple Oracle 2 estimators of index i over all partners.

    Admissible partners of X are W and any Z<j>: their permutation sets are
    drawn independently of X's.  A W-Z pair is not admissible (Z's non-fresh
    columns are rows of W), and is rejected as an invariant violation.
    """
    if _root_name(x) != "X":
        raise InvariantViolation("the base batch of averaged_oracle2 must be X's")
    if not partners:
        raise DomainError("need at least one partner batch")
    comps = []
    used = [x.design_id]
    for name, batch in partners.items():
        if not (name == "W" or name.startswith("Z")):
            raise InvariantViolation(
                f"{name} is not an admissible partner of X (independence required)")
        matched = family.matched_to_x(name, i)
        aligned = family.outputs_for(matched, {name: batch})
        comps.append(oracle2_value(x.outputs, aligned.outputs))
        used.append(batch.design_id)
    value = float(np.mean(comps))
    return SobolEstimate(i, "oracle2_averaged", _clamp(value, clamp),
                         components=tuple(comps), batches_used=tuple(used),
                         evaluations_charged=(1 + len(partners)) * family.n)


def triple_oracle2_self(family: RlhdFamily, i: int,
                        batches: dict[str, SimulationBatch],
                        clamp: bool = False) -> SobolEstimate:
    """Averaged (triple) Oracle 2 for index i from the X / W / Z<i> batches.

    Components: (x, wmi), (x reordered to Z<i>, z) and (wmi, z reordered to
    the partner view).  Each component is a plain pooled Oracle 2 with its
    own two-batch moments.
    """
    zi_name = f"Z{i}"
    if not family.has_z(i) or zi_name not in batches:
        raise PreconditionError(
            f"Z{i} must be created and evaluated before a triple estimator")
    x = batches["X"].outputs
    z = batches[zi_name].outputs
    wmi = family.outputs_for(family.wmi(i), batches).outputs
    xt = family.outputs_for(family.x_tilde(i), batches).outputs
    z_w = family.outputs_for(family.z_matched_to_wmi(i), batches).outputs
    comps = (oracle2_value(x, wmi), oracle2_value(xt, z), oracle2_value(wmi, z_w))
    value = (comps[0] + comps[1] + comps[2]) / 3.0
    return SobolEstimate(i, "oracle2_triple", _clamp(value, clamp), components=comps,
                         batches_used=(batches["X"].design_id, batches["W"].design_id,
                                       batches[zi_name].design_id),
                         evaluations_charged=3 * family.n)
