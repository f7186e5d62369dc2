// Pure view-model construction: everything displayed derives from the last
// server snapshot plus transient UI state (in-flight flag, notices). No
// client-side state may influence decisions, so a reload reproduces the view.

import type { EstimateJson, StateJson } from "./types.js";

export type BarClass = "large" | "flagged" | "reestimated" | "negative" | "plain";

export interface TotalBadgeVM {
  value: number;
  kind: string;
  ciText: string | null;
}

export interface BarVM {
  input: number;
  name: string;
  kind: string;
  value: number;
  valueText: string;
  ciText: string | null;
  ciLevel: number | null;
  barClass: BarClass;
  // percentages along the shared axis
  barLeftPct: number;
  barWidthPct: number;
  whiskerLeftPct: number | null;
  whiskerWidthPct: number | null;
  zeroPct: number;
  total: TotalBadgeVM | null;
  isCandidate: boolean;
}

export interface CandidateVM {
  input: number;
  name: string;
  value: number;
  projectedTotal: number;
}

export interface BudgetVM {
  total: number;
  stepCost: number;
  saltelliBound: number;
  projectedIfAllCandidates: number;
}

export interface ExitVM {
  sum: number;
  sumText: string;
  band: number;
  inBand: boolean;
  suggestsExit: boolean;
  halfWidthText: string | null;
}

export interface ViewModel {
  stage: string;
  stepCount: number;
  bars: BarVM[];
  candidates: CandidateVM[];
  budget: BudgetVM;
  exit: ExitVM;
  stepping: boolean;
  closed: boolean;
  notice: string | null;
}

export function classify(est: EstimateJson, large: number, flag: number): BarClass {
  if (est.reestimated) return "reestimated";
  if (est.value >= large) return "large";
  if (est.value < 0) return "negative";
  if (est.value >= flag) return "flagged";
  return "plain";
}

function ciText(est: EstimateJson): string | null {
  if (!est.ci) return null;
  const pct = Math.round(est.ci.level * 100);
  return `${pct}% CI [${est.ci.lower.toFixed(4)}, ${est.ci.upper.toFixed(4)}]`;
}

export function buildViewModel(
  state: StateJson,
  ui: { notice?: string | null; inFlight?: boolean } = {},
): ViewModel {
  const { large_cutoff, flag_cutoff, exit_band } = state.thresholds;
  const lows = state.estimates.map((e) => (e.ci ? e.ci.lower : e.value));
  const highs = state.estimates.map((e) => (e.ci ? e.ci.upper : e.value));
  const axisMin = Math.min(0, ...lows);
  const axisMax = Math.max(1, ...highs);
  const span = axisMax - axisMin;
  const toPct = (x: number) => ((x - axisMin) / span) * 100;

  const totalsByInput = new Map(state.totals.map((t) => [t.input, t]));
  const candidateSet = new Set(state.candidates);

  const bars: BarVM[] = state.estimates.map((est) => {
    const total = totalsByInput.get(est.input);
    const lo = Math.min(est.value, 0);
    const hi = Math.max(est.value, 0);
    return {
      input: est.input,
      name: est.name,
      kind: est.kind,
      value: est.value,
      valueText: est.value.toFixed(4),
      ciText: ciText(est),
      ciLevel: est.ci ? est.ci.level : null,
      barClass: classify(est, large_cutoff, flag_cutoff),
      barLeftPct: toPct(lo),
      barWidthPct: toPct(hi) - toPct(lo),
      whiskerLeftPct: est.ci ? toPct(est.ci.lower) : null,
      whiskerWidthPct: est.ci ? toPct(est.ci.upper) - toPct(est.ci.lower) : null,
      zeroPct: toPct(0),
      total: total
        ? { value: total.value, kind: total.kind, ciText: ciText(total) }
        : null,
      isCandidate: candidateSet.has(est.input),
    };
  });

  const byInput = new Map(state.estimates.map((e) => [e.input, e]));
  const candidates: CandidateVM[] = state.candidates.map((input, rank) => ({
    input,
    name: state.input_names[input - 1],
    value: byInput.get(input)?.value ?? NaN,
    projectedTotal: state.ledger.total + state.ledger.step_cost * (rank + 1),
  }));

  const hint = state.exit_hint;
  return {
    stage: state.stage,
    stepCount: state.step_count,
    bars,
    candidates,
    budget: {
      total: state.ledger.total,
      stepCost: state.ledger.step_cost,
      saltelliBound: state.ledger.saltelli_bound,
      projectedIfAllCandidates: state.ledger.projected_if_all_candidates,
    },
    exit: {
      sum: hint.sum_of_estimates,
      sumText: hint.sum_of_estimates.toFixed(4),
      band: exit_band,
      inBand: Math.abs(hint.sum_of_estimates - 1) <= exit_band,
      suggestsExit: hint.suggests_exit,
      halfWidthText:
        hint.combined_ci_halfwidth == null
          ? null
          : hint.combined_ci_halfwidth.toFixed(4),
    },
    stepping: state.stepping || Boolean(ui.inFlight),
    closed: state.stage === "closed",
    notice: ui.notice ?? null,
  };
}
