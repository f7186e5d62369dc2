"""The two-stage adaptive estimation campaign.

Stage one estimates every first-order index by pooled Oracle 2 from one pair
of replicated randomized LHDs (2N evaluations total).  Stage two then
re-estimates chosen small/moderate indices one at a time: each step runs the
model at one fresh design Z_i (+N evaluations), replaces that index's
estimate by the averaged (triple) Oracle 1, refreshes every not-yet
re-estimated index with the averaged Oracle 2 over the grown partner set,
recomputes bootstrap intervals, and adds a total-order estimate for the
stepped index, which costs nothing extra.

After m steps the consumed budget is exactly N(m + 2); with m = d it matches
the classic one-shot cost N(d + 2) for all first- and total-order indices.

The state machine is explicit and resumable: every transition appends to the
decision log, and a campaign directory (when given) persists designs,
batches, ledger and state so that a reloaded campaign replays subsequent
transitions bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bootstrap import BootstrapConfig, bootstrap_ci
from .designs import RlhdFamily, SimulationBatch
from .errors import PreconditionError
from .estimators import (ConfidenceInterval, SobolEstimate, oracle2, oracle2_value,
                         total_order, total_order_value, triple_aligned_arrays,
                         triple_oracle1, triple_oracle1_components, averaged_oracle2)
from .runner import BudgetLedger, CampaignStore, Evaluator, ProblemSpec

STAGES = ("fresh", "stage1_done", "stage2_active", "closed")

# moderate design sizes work best for stage one: large enough for usable
# Oracle 2 estimates, small enough to leave budget for second-stage steps
RECOMMENDED_N_RANGE = (200, 400)


@dataclass(frozen=True)
class Thresholds:
    """Campaign heuristics.

    ``large_cutoff`` separates the "large" indices (kept on Oracle 2) from
    re-estimation candidates; the additive-model variance comparison puts
    the crossover at 1/2.  ``flag_cutoff`` is the highlighting threshold for
    suspiciously large small-index estimates.  The exit rule fires when the
    sum of large + re-estimated indices is within ``exit_band`` of 1 and,
    when intervals are available, their combined half-width is below
    ``ci_halfwidth_bound``.
    """

    large_cutoff: float = 0.5
    flag_cutoff: float = 0.10
    exit_band: float = 0.05
    ci_halfwidth_bound: float = 0.05

    def to_json(self) -> dict:
        return {"large_cutoff": self.large_cutoff, "flag_cutoff": self.flag_cutoff,
                "exit_band": self.exit_band,
                "ci_halfwidth_bound": self.ci_halfwidth_bound}

    @classmethod
    def from_json(cls, obj) -> "Thresholds":
        return cls(**obj) if obj else cls()


@dataclass
class CampaignState:
    stage: str
    spec: ProblemSpec
    family: RlhdFamily
    evaluator: Evaluator
    thresholds: Thresholds
    batches: dict[str, SimulationBatch]
    estimates: dict[int, list[SobolEstimate]] = field(default_factory=dict)
    totals: dict[int, SobolEstimate] = field(default_factory=dict)
    reestimated: list[int] = field(default_factory=list)
    step_count: int = 0
    decision_log: list[dict] = field(default_factory=list)
    bootstrap: BootstrapConfig | None = None
    store: CampaignStore | None = None

    @property
    def ledger(self) -> BudgetLedger:
        return self.evaluator.ledger

    def current(self, i: int) -> SobolEstimate:
        return self.estimates[i][-1]

    def current_values(self) -> dict[int, float]:
        return {i: h[-1].value for i, h in self.estimates.items()}

    def _log(self, action: str, **payload):
        event = {"action": action, "stage": self.stage, "step": self.step_count,
                 "timestamp": time.time(), **payload}
        self.decision_log.append(event)
        if self.store is not None:
            self.store.append_event(event)

    def _persist(self):
        if self.store is None:
            return
        self.store.save_problem(self.spec)
        self.store.save_family(self.family, self.spec.input_names)
        self.store.save_ledger(self.ledger)
        self.store.save_state_blob(state_to_json(self))


# ---------------------------------------------------------------------------
# confidence-interval plumbing
# ---------------------------------------------------------------------------

def _ci(state: CampaignState, estimator, arrays, i: int, kind: str) -> ConfidenceInterval | None:
    if state.bootstrap is None:
        return None
    cfg = replace(state.bootstrap, seed=state.spec.seed,
                  labels=("ci", state.step_count, i, kind))
    lo, hi = bootstrap_ci(estimator, arrays, cfg)
    return ConfidenceInterval(lower=lo, upper=hi, level=cfg.level,
                              replicates=cfg.replicates)


def _oracle2_closure(arrays):
    return oracle2_value(arrays[0], arrays[1])


def _averaged_o2_closure(arrays):
    base = arrays[0]
    return float(np.mean([oracle2_value(base, p) for p in arrays[1:]]))


def _triple_o1_closure(arrays):
    comps = triple_oracle1_components(*arrays)
    return (comps[0] + comps[1] + comps[2]) / 3.0


def _total_closure(arrays):
    return total_order_value(arrays[0], arrays[1])


# ---------------------------------------------------------------------------
# transitions
# ---------------------------------------------------------------------------

def stage_one(spec: ProblemSpec, store: CampaignStore | None = None,
              thresholds: Thresholds | None = None,
              bootstrap: BootstrapConfig | None = BootstrapConfig()) -> CampaignState:
    """Generate X and W, run them (2N evaluations), estimate every index by
    pooled Oracle 2, and attach bootstrap intervals."""
    family = RlhdFamily.make_pair(spec.n, spec.d, spec.seed)
    evaluator = Evaluator(spec, store_dir=None if store is None else store.root)
    state = CampaignState(stage="fresh", spec=spec, family=family,
                          evaluator=evaluator,
                          thresholds=thresholds or Thresholds(),
                          batches={}, bootstrap=bootstrap, store=store)
    state.batches["X"] = evaluator.evaluate_design(family.x)
    state.batches["W"] = evaluator.evaluate_design(family.w)
    x = state.batches["X"]
    for i in range(1, spec.d + 1):
        wmi = family.outputs_for(family.wmi(i), state.batches)
        est = oracle2(x, wmi, input_index=i)
        est = est.with_ci(_ci(state, _oracle2_closure, [x.outputs, wmi.outputs],
                              i, est.kind)) if state.bootstrap else est
        state.estimates[i] = [est]
    state.stage = "stage1_done"
    state._log("stage_one", n=spec.n, d=spec.d, evaluations=state.ledger.total,
               recommended_n=list(RECOMMENDED_N_RANGE),
               n_in_recommended_range=bool(
                   RECOMMENDED_N_RANGE[0] <= spec.n <= RECOMMENDED_N_RANGE[1]))
    state._persist()
    return state


def candidates(state: CampaignState) -> list[int]:
    """Re-estimation candidates: below the large cutoff and not yet
    re-estimated, ordered by estimate descending (ties: input index)."""
    if state.stage not in ("stage1_done", "stage2_active"):
        raise PreconditionError(f"no candidates in stage {state.stage!r}")
    vals = state.current_values()
    done = set(state.reestimated)
    pool = [i for i, v in vals.items()
            if i not in done and v < state.thresholds.large_cutoff]
    return sorted(pool, key=lambda i: (-vals[i], i))


def stage_two_step(state: CampaignState, i: int) -> CampaignState:
    """One second-stage loop for input i (one new design, +N evaluations)."""
    if state.stage not in ("stage1_done", "stage2_active"):
        raise PreconditionError(f"cannot step in stage {state.stage!r}")
    if i in state.reestimated:
        raise PreconditionError(f"input {i} was already re-estimated")
    if i not in candidates(state):
        raise PreconditionError(f"input {i} is not a re-estimation candidate")

    family, spec = state.family, state.spec
    z_design = family.make_z(i)
    state.batches[f"Z{i}"] = state.evaluator.evaluate_design(z_design)
    state.step_count += 1

    arrays = triple_aligned_arrays(family, i, state.batches)
    est_i = triple_oracle1(family, i, state.batches)
    est_i = est_i.with_ci(_ci(state, _triple_o1_closure, list(arrays),
                              i, est_i.kind)) if state.bootstrap else est_i
    state.estimates[i].append(est_i)
    state.reestimated.append(i)

    # refresh every index still on Oracle 2 with the grown partner set
    partners = {"W": state.batches["W"]}
    partners.update({f"Z{t}": state.batches[f"Z{t}"] for t in state.reestimated})
    x = state.batches["X"]
    done = set(state.reestimated)
    for j in sorted(state.estimates):
        if j in done:
            continue
        est_j = averaged_oracle2(family, x, partners, j)
        if state.bootstrap:
            aligned = [x.outputs] + [
                family.outputs_for(family.matched_to_x(name, j),
                                   {name: batch}).outputs
                for name, batch in partners.items()]
            est_j = est_j.with_ci(_ci(state, _averaged_o2_closure, aligned,
                                      j, est_j.kind))
        state.estimates[j].append(est_j)

    # total-order index of the stepped input, free of extra evaluations
    wmi = family.outputs_for(family.wmi(i), state.batches)
    z = state.batches[f"Z{i}"]
    tot = total_order(z, wmi, input_index=i)
    tot = tot.with_ci(_ci(state, _total_closure, [z.outputs, wmi.outputs],
                          i, tot.kind)) if state.bootstrap else tot
    state.totals[i] = tot

    state.stage = "stage2_active"
    state._log("stage_two_step", index=i, estimate=est_i.value,
               total_order=tot.value, evaluations=state.ledger.total)
    state._persist()
    return state


def exit_hint(state: CampaignState, band: float | None = None) -> dict:
    """Advisory exit signal: is the accounted variance share close to 1?

    Sums the current estimates of large and re-estimated indices; suggests
    exiting when that sum lies within the band around 1 and (when intervals
    are present) the combined half-width is small enough.  The decision is
    left to the practitioner or the auto policy.
    """
    if state.stage not in ("stage1_done", "stage2_active", "closed"):
        raise PreconditionError(f"no exit hint in stage {state.stage!r}")
    band = state.thresholds.exit_band if band is None else band
    done = set(state.reestimated)
    accounted = []
    for i, hist in state.estimates.items():
        est = hist[-1]
        if i in done or est.value >= state.thresholds.large_cutoff:
            accounted.append(est)
    total = float(sum(e.value for e in accounted))
    half_widths = [0.5 * (e.ci.upper - e.ci.lower) for e in accounted if e.ci]
    combined = float(np.sqrt(np.sum(np.square(half_widths)))) if half_widths else None
    accurate = combined is None or combined <= state.thresholds.ci_halfwidth_bound
    return {
        "sum_of_estimates": total,
        "combined_ci_halfwidth": combined,
        "suggests_exit": bool(abs(total - 1.0) <= band and accurate),
    }


def close_campaign(state: CampaignState) -> CampaignState:
    if state.stage == "closed":
        raise PreconditionError("campaign is already closed")
    state.stage = "closed"
    state._log("exit", evaluations=state.ledger.total)
    state._persist()
    return state


@dataclass(frozen=True)
class AutoPolicy:
    """Non-interactive stand-in for the practitioner: step through the
    candidate list in order until it is exhausted, the step budget is spent,
    or (when ``exit_band`` is set) the exit hint fires."""

    max_steps: int
    exit_band: float | None = None


def auto_policy_run(spec: ProblemSpec, policy: AutoPolicy,
                    store: CampaignStore | None = None,
                    thresholds: Thresholds | None = None,
                    bootstrap: BootstrapConfig | None = BootstrapConfig()) -> CampaignState:
    state = stage_one(spec, store=store, thresholds=thresholds, bootstrap=bootstrap)
    while state.step_count < policy.max_steps:
        pool = candidates(state)
        if not pool:
            break
        if policy.exit_band is not None and exit_hint(state, policy.exit_band)["suggests_exit"]:
            break
        stage_two_step(state, pool[0])
    return state


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def state_to_json(state: CampaignState) -> dict:
    return {
        "stage": state.stage,
        "step_count": state.step_count,
        "reestimated": list(state.reestimated),
        "thresholds": state.thresholds.to_json(),
        "bootstrap": None if state.bootstrap is None else {
            "replicates": state.bootstrap.replicates, "level": state.bootstrap.level},
        "estimates": {str(i): [e.to_json() for e in hist]
                      for i, hist in state.estimates.items()},
        "totals": {str(i): e.to_json() for i, e in state.totals.items()},
        "decision_log": state.decision_log,
    }


def load_campaign(store: CampaignStore) -> CampaignState:
    """Rebuild a campaign from its directory; subsequent transitions replay
    exactly as they would have in the uninterrupted run."""
    blob = store.load_state_blob()
    if blob is None:
        raise PreconditionError(f"{store.root} holds no campaign state")
    spec = store.load_problem()
    family = store.load_family(spec.seed)
    evaluator = Evaluator(spec, store_dir=store.root, ledger=store.load_ledger())
    boot = blob.get("bootstrap")
    state = CampaignState(
        stage=blob["stage"], spec=spec, family=family, evaluator=evaluator,
        thresholds=Thresholds.from_json(blob.get("thresholds")),
        batches={}, bootstrap=None if boot is None else BootstrapConfig(
            replicates=boot["replicates"], level=boot["level"]),
        store=store)
    state.step_count = blob["step_count"]
    state.reestimated = [int(i) for i in blob["reestimated"]]
    state.estimates = {int(i): [SobolEstimate.from_json(e) for e in hist]
                       for i, hist in blob["estimates"].items()}
    state.totals = {int(i): SobolEstimate.from_json(e)
                    for i, e in blob["totals"].items()}
    state.decision_log = list(blob.get("decision_log", []))
    for name in family.members:
        state.batches[name] = evaluator.evaluate_design(family.members[name])
    return state
