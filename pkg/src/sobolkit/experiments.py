"""Replication studies: RMSE curves, box-plot batteries, variance crossover.

Every study is deterministic under a fixed seed (per-replication substreams)
and emits plain tables; plotting is out of scope.  Evaluation-count
accounting follows the per-index cost of each estimator class (2N for the
two-design estimators, 3N for the three-design ones) so that curves over
``n_runs`` compare estimators at equal simulation effort.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .designs import RlhdFamily, SimulationBatch
from .errors import ConfigurationError
from .estimators import (PooledMoments, oracle1, oracle2, oracle2_pearson,
                         triple_oracle1, triple_oracle2_self, oracle1_value,
                         oracle2_value)
from .models import analytic_indices, get_model
from .campaign import AutoPolicy, auto_policy_run
from .runner import ProblemSpec
from .rng import substream

TWO_DESIGN_KINDS = ("oracle2", "oracle2_pearson")
THREE_DESIGN_KINDS = ("oracle1", "oracle1_triple", "oracle2_triple")
STUDY_KINDS = TWO_DESIGN_KINDS + THREE_DESIGN_KINDS


def _child_seed(seed: int, *labels) -> int:
    return int(substream(seed, *labels).integers(0, 2**62))


def _family_batches(model, n: int, d: int, seed: int, with_z: bool):
    family = RlhdFamily.make_pair(n, d, seed)
    batches = {name: SimulationBatch(design.id, model(design.points), model.id)
               for name, design in family.members.items()}
    if with_z:
        for i in range(1, d + 1):
            z = family.make_z(i)
            batches[f"Z{i}"] = SimulationBatch(z.id, model(z.points), model.id)
    return family, batches


def _estimate(kind: str, family, batches, i: int) -> float:
    x = batches["X"]
    if kind == "oracle2":
        wmi = family.outputs_for(family.wmi(i), batches)
        return oracle2(x, wmi, input_index=i).value
    if kind == "oracle2_pearson":
        wmi = family.outputs_for(family.wmi(i), batches)
        return oracle2_pearson(x, wmi, input_index=i).value
    if kind == "oracle1":
        wmi = family.outputs_for(family.wmi(i), batches)
        return oracle1(x, batches[f"Z{i}"], wmi, input_index=i).value
    if kind == "oracle1_triple":
        return triple_oracle1(family, i, batches).value
    if kind == "oracle2_triple":
        return triple_oracle2_self(family, i, batches).value
    raise ConfigurationError(f"unknown study estimator kind {kind!r}")


# ---------------------------------------------------------------------------
# RMSE curves over the evaluation budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StudyTable:
    rows: list
    config: dict

    def write_csv(self, path):
        cols = list(self.rows[0].keys())
        with open(path, "w") as fh:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in self.config.items()) + "\n")
            fh.write(",".join(cols) + "\n")
            for row in self.rows:
                fh.write(",".join(str(row[c]) for c in cols) + "\n")


def rmse_study(model_id: str, kinds, n_runs_grid, n_reps: int, seed: int) -> StudyTable:
    """Empirical RMSE against analytic truth, per estimator kind and index,
    on a shared evaluation axis (n_runs = 2N or 3N depending on the kind)."""
    model = get_model(model_id)
    truth = analytic_indices(model).first_order
    d = model.dimension
    kinds = tuple(kinds)
    unknown = set(kinds) - set(STUDY_KINDS)
    if unknown:
        raise ConfigurationError(f"unknown estimator kinds {sorted(unknown)}")
    rows = []
    for n_runs in n_runs_grid:
        sq_err = {(k, i): 0.0 for k in kinds for i in range(1, d + 1)}
        for rep in range(n_reps):
            fam2 = bat2 = fam3 = bat3 = None
            if any(k in TWO_DESIGN_KINDS for k in kinds):
                fam2, bat2 = _family_batches(
                    model, n_runs // 2, d, _child_seed(seed, "rmse2", n_runs, rep),
                    with_z=False)
            if any(k in THREE_DESIGN_KINDS for k in kinds):
                fam3, bat3 = _family_batches(
                    model, n_runs // 3, d, _child_seed(seed, "rmse3", n_runs, rep),
                    with_z=True)
            for kind in kinds:
                fam, bat = (fam2, bat2) if kind in TWO_DESIGN_KINDS else (fam3, bat3)
                for i in range(1, d + 1):
                    err = _estimate(kind, fam, bat, i) - truth[i - 1]
                    sq_err[(kind, i)] += err * err
        for kind in kinds:
            n_design = n_runs // 2 if kind in TWO_DESIGN_KINDS else n_runs // 3
            for i in range(1, d + 1):
                rows.append({"kind": kind, "input": i, "n_runs": n_runs,
                             "n_design": n_design,
                             "rmse": float(np.sqrt(sq_err[(kind, i)] / n_reps))})
    return StudyTable(rows, {"study": "rmse", "model": model_id, "seed": seed,
                             "n_reps": n_reps})


# ---------------------------------------------------------------------------
# box-plot batteries (one-shot vs adaptive strategy)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxplotResult:
    samples: np.ndarray          # (n_reps, d) final first-order estimates
    flagged: np.ndarray          # (n_reps,) bool, some watched index above cutoff
    config: dict

    @property
    def flagged_fraction(self) -> float:
        return float(self.flagged.mean())

    def table(self) -> StudyTable:
        d = self.samples.shape[1]
        rows = [{"rep": r, **{f"s{i + 1}": self.samples[r, i] for i in range(d)},
                 "flagged": bool(self.flagged[r])}
                for r in range(len(self.samples))]
        return StudyTable(rows, self.config)


def boxplot_study(model_id: str, strategy: str, n: int, n_reps: int, seed: int,
                  steps: int = 0, flag_indices=None,
                  flag_cutoff: float = 0.10) -> BoxplotResult:
    """Replicated final estimates under one strategy.

    ``strategy`` is ``one_shot`` (Oracle 2 at size n) or ``adaptive`` (stage
    one at size n followed by ``steps`` second-stage loops).  A replication
    is flagged when any watched index estimate exceeds the cutoff; by
    default the watched indices are the model's additive-tail inputs.
    """
    model = get_model(model_id)
    d = model.dimension
    if flag_indices is None:
        flag_indices = tuple(range(len(model.a) + 1, d + 1))
    samples = np.empty((n_reps, d))
    for rep in range(n_reps):
        child = _child_seed(seed, "boxplot", strategy, rep)
        if strategy == "one_shot":
            family, batches = _family_batches(model, n, d, child, with_z=False)
            x = batches["X"]
            for i in range(1, d + 1):
                wmi = family.outputs_for(family.wmi(i), batches)
                samples[rep, i - 1] = oracle2(x, wmi, input_index=i).value
        elif strategy == "adaptive":
            spec = ProblemSpec.for_builtin(model_id, n, child)
            state = auto_policy_run(spec, AutoPolicy(max_steps=steps),
                                    bootstrap=None)
            vals = state.current_values()
            samples[rep] = [vals[i] for i in range(1, d + 1)]
        else:
            raise ConfigurationError(f"unknown strategy {strategy!r}")
    if flag_indices:
        flagged = (samples[:, [i - 1 for i in flag_indices]] > flag_cutoff).any(axis=1)
    else:
        flagged = np.zeros(n_reps, dtype=bool)
    return BoxplotResult(samples, flagged, {
        "study": "boxplot", "model": model_id, "strategy": strategy, "n": n,
        "steps": steps, "n_reps": n_reps, "seed": seed,
        "flag_cutoff": flag_cutoff})


# ---------------------------------------------------------------------------
# estimator-variance crossover on an additive two-part model
# ---------------------------------------------------------------------------

def crossover_study(s_grid, n: int, n_reps: int, seed: int, d: int = 4) -> StudyTable:
    """Empirical variances of the oracle-moment Oracle 1 / Oracle 2
    estimators on y = alpha * x1 + (x2 + ... + xd), with alpha tuned so the
    first input's index hits each grid target.

    The model is additive (no interactions), the setting in which the
    spurious-correlation comparison predicts Oracle 1 wins below target 1/2
    and loses above it.  That variance algebra assumes i.i.d. pick-freeze
    sampling and *known* output moments, so the study plugs in the analytic
    mean and variance of the test model rather than pooled estimates.
    """
    rows = []
    crossing = None
    targets = sorted(float(s) for s in s_grid)
    for target in targets:
        if not 0.0 < target < 1.0:
            raise ConfigurationError(f"target index must lie in (0, 1), got {target}")
        alpha = float(np.sqrt(target / (1.0 - target) * (d - 1)))
        true_moments = PooledMoments(mean=(alpha + (d - 1)) / 2.0,
                                     variance=(alpha ** 2 + (d - 1)) / 12.0,
                                     pool_size=0)
        stream = substream(seed, "crossover", repr(target))
        o1 = np.empty(n_reps)
        o2 = np.empty(n_reps)
        for rep in range(n_reps):
            a = stream.random((n, d))
            w = stream.random((n, d))
            wmi = w.copy()
            wmi[:, 0] = a[:, 0]
            y = lambda pts: alpha * pts[:, 0] + pts[:, 1:].sum(axis=1)
            ya, yw, ywmi = y(a), y(w), y(wmi)
            o1[rep] = oracle1_value(ya, yw, ywmi, moments=true_moments)
            o2[rep] = oracle2_value(ya, ywmi, moments=true_moments)
        rows.append({"target": target, "alpha": alpha,
                     "var_oracle1": float(o1.var()), "var_oracle2": float(o2.var()),
                     "mean_oracle1": float(o1.mean()), "mean_oracle2": float(o2.mean())})
    for lo, hi in zip(rows, rows[1:]):
        d_lo = lo["var_oracle1"] - lo["var_oracle2"]
        d_hi = hi["var_oracle1"] - hi["var_oracle2"]
        if d_lo <= 0.0 <= d_hi:
            t = d_lo / (d_lo - d_hi) if d_lo != d_hi else 0.5
            crossing = lo["target"] + t * (hi["target"] - lo["target"])
            break
    return StudyTable(rows, {"study": "crossover", "n": n, "n_reps": n_reps,
                             "seed": seed, "d": d,
                             "crossover": None if crossing is None else float(crossing)})
