// Wire types of the campaign service (GET /state, POST /step, GET /events).

export interface CiJson {
  lower: number;
  upper: number;
  level: number;
  B: number;
}

export interface EstimateJson {
  input: number;
  name: string;
  kind: string;
  value: number;
  ci: CiJson | null;
  components: number[] | null;
  batches_used: string[];
  evaluations_charged: number;
  reestimated: boolean;
}

export interface LedgerJson {
  total: number;
  step_cost: number;
  saltelli_bound: number;
  projected_if_all_candidates: number;
}

export interface ExitHintJson {
  sum_of_estimates: number;
  combined_ci_halfwidth: number | null;
  suggests_exit: boolean;
}

export interface ThresholdsJson {
  large_cutoff: number;
  flag_cutoff: number;
  exit_band: number;
  ci_halfwidth_bound: number;
}

export interface StateJson {
  stage: string;
  n: number;
  d: number;
  seed: number;
  input_names: string[];
  estimates: EstimateJson[];
  totals: EstimateJson[];
  candidates: number[];
  reestimated: number[];
  exit_hint: ExitHintJson;
  thresholds: ThresholdsJson;
  ledger: LedgerJson;
  step_count: number;
  stepping: boolean;
}

export interface EventJson {
  seq: number;
  action: string;
  [key: string]: unknown;
}

export interface EventsResponse {
  events: EventJson[];
  next: number;
}
