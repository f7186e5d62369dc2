"""Batch command-line entry point.

Subcommands: design generation (``design new``, ``design z``), one-off
estimation (``estimate``), campaign driving (``campaign init|status|step|
auto|exit``), replication studies (``bench rmse|boxplot|crossover``) and the
console service (``serve``).  Exit codes: 0 success, 2 usage error,
3 evaluation failure, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bootstrap import BootstrapConfig, bootstrap_ci
from .campaign import (Thresholds, candidates, close_campaign, exit_hint,
                       load_campaign, stage_one, stage_two_step)
from .designs import JitterArray, Permutation, RlhdFamily
from .errors import (ConfigurationError, DegenerateModelError, DomainError,
                     EvaluationError, InvariantViolation, PreconditionError,
                     SobolkitError, UnsupportedModelError)
from .estimators import (ConfidenceInterval, oracle1, oracle1_value, oracle2,
                         oracle2_pearson, oracle2_pearson_value, oracle2_value,
                         total_order, total_order_value, triple_aligned_arrays,
                         triple_oracle1, triple_oracle1_components,
                         triple_oracle2_self)
from .experiments import boxplot_study, crossover_study, rmse_study
from .runner import CampaignStore, Evaluator, ProblemSpec, load_problem

USAGE_ERRORS = (ConfigurationError, DomainError, UnsupportedModelError,
                FileNotFoundError, KeyError, json.JSONDecodeError)
EVAL_ERRORS = (EvaluationError, DegenerateModelError)
INVARIANT_ERRORS = (InvariantViolation, PreconditionError)


def _write_json(obj, out: str | None):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# design commands
# ---------------------------------------------------------------------------

def _family_from_perm_file(path) -> RlhdFamily:
    with open(path) as fh:
        blob = json.load(fh)
    base = int(blob.get("base", 0))
    members = {}
    for name, cols in blob.items():
        if name in ("base", "jitter", "seed"):
            continue
        members[name] = [Permutation(np.asarray(col, dtype=np.int64) + (1 - base))
                         for col in cols]
    any_member = next(iter(members.values()))
    n, d = any_member[0].n, len(any_member)
    if "jitter" in blob:
        jitter = JitterArray(values=np.asarray(blob["jitter"], float),
                             seed=int(blob.get("seed", 0)))
    else:
        jitter = JitterArray.sample(n, d, int(blob.get("seed", 0)))
    return RlhdFamily.from_permutations(jitter, members, seed=int(blob.get("seed", 0)))


def cmd_design_new(args) -> int:
    if args.perms:
        family = _family_from_perm_file(args.perms)
    else:
        family = RlhdFamily.make_pair(args.n, args.d, args.seed)
    store = CampaignStore(args.out)
    names = [f"x{j + 1}" for j in range(family.d)]
    store.save_family(family, names)
    print(f"wrote designs {sorted(family.members)} (N={family.n}, d={family.d}) "
          f"to {args.out}")
    return 0


def cmd_design_z(args) -> int:
    store = CampaignStore(args.dir)
    family = store.load_family(seed=args.seed)
    if family is None:
        raise ConfigurationError(f"{args.dir} holds no designs")
    family.make_z(args.index)
    store.save_family(family, [f"x{j + 1}" for j in range(family.d)])
    print(f"wrote design Z{args.index} to {args.dir}")
    return 0


# ---------------------------------------------------------------------------
# one-off estimation
# ---------------------------------------------------------------------------

ESTIMATE_KINDS = ("oracle2", "oracle2-pearson", "oracle1", "triple-oracle1",
                  "triple-oracle2", "total")


def cmd_estimate(args) -> int:
    spec = load_problem(args.spec)
    i = args.index
    if not 1 <= i <= spec.d:
        raise DomainError(f"--index {i} out of range 1..{spec.d}")
    family = RlhdFamily.make_pair(spec.n, spec.d, spec.seed)
    evaluator = Evaluator(spec, store_dir=args.dir)
    batches = {}

    def batch(name):
        if name not in batches:
            if name.startswith("Z"):
                family.make_z(int(name[1:]))
            batches[name] = evaluator.evaluate_design(family.members[name])
        return batches[name]

    def aligned(design):
        batch(design.root.id.split(":", 1)[1])
        return family.outputs_for(design, batches)

    kind = args.kind
    if kind == "oracle2":
        est = oracle2(batch("X"), aligned(family.wmi(i)), input_index=i)
        ci_arrays = [batch("X").outputs, aligned(family.wmi(i)).outputs]
        closure = lambda a: oracle2_value(a[0], a[1])
    elif kind == "oracle2-pearson":
        est = oracle2_pearson(batch("X"), aligned(family.wmi(i)), input_index=i)
        ci_arrays = [batch("X").outputs, aligned(family.wmi(i)).outputs]
        closure = lambda a: oracle2_pearson_value(a[0], a[1])
    elif kind == "oracle1":
        batch("X"), batch("W"), batch(f"Z{i}")
        est = oracle1(batch("X"), batch(f"Z{i}"), aligned(family.wmi(i)),
                      input_index=i)
        ci_arrays = [batch("X").outputs, batch(f"Z{i}").outputs,
                     aligned(family.wmi(i)).outputs]
        closure = lambda a: oracle1_value(a[0], a[1], a[2])
    elif kind == "triple-oracle1":
        batch("X"), batch("W"), batch(f"Z{i}")
        est = triple_oracle1(family, i, batches)
        ci_arrays = list(triple_aligned_arrays(family, i, batches))
        closure = lambda a: float(np.mean(triple_oracle1_components(*a)))
    elif kind == "triple-oracle2":
        batch("X"), batch("W"), batch(f"Z{i}")
        est = triple_oracle2_self(family, i, batches)
        ci_arrays = [batch("X").outputs,
                     aligned(family.wmi(i)).outputs,
                     aligned(family.x_tilde(i)).outputs,
                     batch(f"Z{i}").outputs,
                     aligned(family.z_matched_to_wmi(i)).outputs]
        closure = lambda a: (oracle2_value(a[0], a[1]) + oracle2_value(a[2], a[3])
                             + oracle2_value(a[1], a[4])) / 3.0
    else:  # total
        batch("W"), batch(f"Z{i}")
        est = total_order(batch(f"Z{i}"), aligned(family.wmi(i)), input_index=i)
        ci_arrays = [batch(f"Z{i}").outputs, aligned(family.wmi(i)).outputs]
        closure = lambda a: total_order_value(a[0], a[1])

    if not args.no_ci:
        cfg = BootstrapConfig(replicates=args.replicates, level=args.level,
                              seed=spec.seed, labels=("estimate", kind, i))
        lo, hi = bootstrap_ci(closure, ci_arrays, cfg)
        est = est.with_ci(ConfidenceInterval(lo, hi, args.level, args.replicates))
    record = est.to_json()
    record["ledger_total"] = evaluator.ledger.total
    _write_json(record, args.out)
    return 0


# ---------------------------------------------------------------------------
# campaign commands
# ---------------------------------------------------------------------------

def _boot(args) -> BootstrapConfig | None:
    if getattr(args, "no_ci", False):
        return None
    return BootstrapConfig(replicates=args.replicates, level=args.level)


def cmd_campaign_init(args) -> int:
    spec = load_problem(args.spec)
    if args.n:
        spec = ProblemSpec(inputs=spec.inputs, model=spec.model, n=args.n,
                           seed=spec.seed, name=spec.name)
    store = CampaignStore(args.dir)
    with store.acquire_lock():
        thresholds = Thresholds(large_cutoff=args.large_cutoff,
                                flag_cutoff=args.flag_cutoff)
        state = stage_one(spec, store=store, thresholds=thresholds,
                          bootstrap=_boot(args))
    print(f"stage one done: {spec.d} estimates, {state.ledger.total} evaluations")
    return 0


def _print_status(state):
    done = set(state.reestimated)
    print(f"stage: {state.stage}   evaluations: {state.ledger.total}   "
          f"steps: {state.step_count}")
    print(f"{'input':>6} {'name':>8} {'kind':>18} {'estimate':>10} {'95% CI':>22}")
    for i in sorted(state.estimates):
        est = state.current(i)
        ci = f"[{est.ci.lower:+.4f}, {est.ci.upper:+.4f}]" if est.ci else ""
        mark = "*" if i in done else " "
        print(f"{i:>6} {state.spec.input_names[i - 1]:>8} {est.kind:>18} "
              f"{est.value:>+10.4f} {ci:>22} {mark}")
    for i in sorted(state.totals):
        tot = state.totals[i]
        ci = f"[{tot.ci.lower:+.4f}, {tot.ci.upper:+.4f}]" if tot.ci else ""
        print(f"{i:>6} {state.spec.input_names[i - 1]:>8} {'total_order':>18} "
              f"{tot.value:>+10.4f} {ci:>22}")
    hint = exit_hint(state)
    print(f"candidates: {candidates(state) if state.stage != 'closed' else []}")
    print(f"accounted sum: {hint['sum_of_estimates']:.4f}   "
          f"suggests exit: {hint['suggests_exit']}")


def cmd_campaign_status(args) -> int:
    state = load_campaign(CampaignStore(args.dir))
    _print_status(state)
    return 0


def cmd_campaign_step(args) -> int:
    store = CampaignStore(args.dir)
    with store.acquire_lock():
        state = load_campaign(store)
        stage_two_step(state, args.index)
    est = state.current(args.index)
    tot = state.totals[args.index]
    print(f"re-estimated input {args.index}: {est.value:+.4f} "
          f"(total order {tot.value:+.4f}); evaluations {state.ledger.total}")
    return 0


def cmd_campaign_auto(args) -> int:
    store = CampaignStore(args.dir)
    with store.acquire_lock():
        state = load_campaign(store)
        steps = 0
        while steps < args.max_steps:
            pool = candidates(state)
            if not pool:
                break
            if args.exit_band is not None and \
                    exit_hint(state, args.exit_band)["suggests_exit"]:
                break
            stage_two_step(state, pool[0])
            steps += 1
    print(f"ran {steps} steps; evaluations {state.ledger.total}")
    _print_status(state)
    return 0


def cmd_campaign_exit(args) -> int:
    store = CampaignStore(args.dir)
    with store.acquire_lock():
        state = load_campaign(store)
        close_campaign(state)
    print(f"campaign closed after {state.ledger.total} evaluations")
    return 0


# ---------------------------------------------------------------------------
# bench commands
# ---------------------------------------------------------------------------

def cmd_bench_rmse(args) -> int:
    table = rmse_study(args.model, tuple(args.kinds), tuple(args.grid),
                       n_reps=args.reps, seed=args.seed)
    table.write_csv(args.out)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return 0


def cmd_bench_boxplot(args) -> int:
    res = boxplot_study(args.model, args.strategy, n=args.n, n_reps=args.reps,
                        steps=args.steps, seed=args.seed)
    res.table().write_csv(args.out)
    print(f"flagged fraction: {res.flagged_fraction:.4f}; wrote {args.out}")
    return 0


def cmd_bench_crossover(args) -> int:
    table = crossover_study(tuple(args.targets), n=args.n, n_reps=args.reps,
                            seed=args.seed)
    table.write_csv(args.out)
    print(f"crossover located at {table.config['crossover']}; wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(args.dir), host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sobolkit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    design = sub.add_parser("design", help="generate replicated designs")
    dsub = design.add_subparsers(dest="design_cmd", required=True)
    new = dsub.add_parser("new", help="sample an rLHD pair (X, W)")
    new.add_argument("--n", type=int, required=True)
    new.add_argument("--d", type=int, required=True)
    new.add_argument("--seed", type=int, default=0)
    new.add_argument("--out", required=True)
    new.add_argument("--perms", help="JSON file with explicit permutations")
    new.set_defaults(func=cmd_design_new)
    dz = dsub.add_parser("z", help="add the Z design for one input")
    dz.add_argument("--dir", required=True)
    dz.add_argument("--index", type=int, required=True)
    dz.add_argument("--seed", type=int, default=0)
    dz.set_defaults(func=cmd_design_z)

    est = sub.add_parser("estimate", help="estimate one index from a problem spec")
    est.add_argument("--spec", required=True)
    est.add_argument("--kind", choices=ESTIMATE_KINDS, required=True)
    est.add_argument("--index", type=int, required=True)
    est.add_argument("--out")
    est.add_argument("--dir", help="cache/bridge directory")
    est.add_argument("--no-ci", action="store_true")
    est.add_argument("--replicates", type=int, default=1000)
    est.add_argument("--level", type=float, default=0.95)
    est.set_defaults(func=cmd_estimate)

    camp = sub.add_parser("campaign", help="drive an adaptive campaign directory")
    csub = camp.add_subparsers(dest="campaign_cmd", required=True)
    cinit = csub.add_parser("init", help="run stage one into a directory")
    cinit.add_argument("--spec", required=True)
    cinit.add_argument("--dir", required=True)
    cinit.add_argument("--n", type=int, help="override the spec's design size")
    cinit.add_argument("--no-ci", action="store_true")
    cinit.add_argument("--replicates", type=int, default=1000)
    cinit.add_argument("--level", type=float, default=0.95)
    cinit.add_argument("--large-cutoff", type=float, default=0.5)
    cinit.add_argument("--flag-cutoff", type=float, default=0.10)
    cinit.set_defaults(func=cmd_campaign_init)
    cstat = csub.add_parser("status")
    cstat.add_argument("--dir", required=True)
    cstat.set_defaults(func=cmd_campaign_status)
    cstep = csub.add_parser("step", help="re-estimate one input")
    cstep.add_argument("--dir", required=True)
    cstep.add_argument("--index", type=int, required=True)
    cstep.set_defaults(func=cmd_campaign_step)
    cauto = csub.add_parser("auto", help="step candidates in order")
    cauto.add_argument("--dir", required=True)
    cauto.add_argument("--max-steps", type=int, required=True)
    cauto.add_argument("--exit-band", type=float)
    cauto.set_defaults(func=cmd_campaign_auto)
    cexit = csub.add_parser("exit")
    cexit.add_argument("--dir", required=True)
    cexit.set_defaults(func=cmd_campaign_exit)

    bench = sub.add_parser("bench", help="replication studies")
    bsub = bench.add_subparsers(dest="bench_cmd", required=True)
    brmse = bsub.add_parser("rmse")
    brmse.add_argument("--model", required=True)
    brmse.add_argument("--reps", type=int, default=200)
    brmse.add_argument("--seed", type=int, default=0)
    brmse.add_argument("--out", required=True)
    brmse.add_argument("--grid", type=int, nargs="+", default=[600, 1200, 2400])
    brmse.add_argument("--kinds", nargs="+",
                       default=["oracle2", "oracle1", "oracle1_triple",
                                "oracle2_triple"])
    brmse.set_defaults(func=cmd_bench_rmse)
    bbox = bsub.add_parser("boxplot")
    bbox.add_argument("--model", required=True)
    bbox.add_argument("--strategy", choices=["one_shot", "adaptive"],
                      default="one_shot")
    bbox.add_argument("--n", type=int, default=200)
    bbox.add_argument("--steps", type=int, default=0)
    bbox.add_argument("--reps", type=int, default=200)
    bbox.add_argument("--seed", type=int, default=0)
    bbox.add_argument("--out", required=True)
    bbox.set_defaults(func=cmd_bench_boxplot)
    bcross = bsub.add_parser("crossover")
    bcross.add_argument("--targets", type=float, nargs="+",
                        default=[0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65,
                                 0.75, 0.85, 0.95])
    bcross.add_argument("--n", type=int, default=500)
    bcross.add_argument("--reps", type=int, default=2000)
    bcross.add_argument("--seed", type=int, default=0)
    bcross.add_argument("--out", required=True)
    bcross.set_defaults(func=cmd_bench_crossover)

    serve = sub.add_parser("serve", help="start the console HTTP service")
    serve.add_argument("--dir", required=True)
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EVAL_ERRORS as exc:
        print(f"evaluation failed: {exc}", file=sys.stderr)
        return 3
    except INVARIANT_ERRORS as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except SobolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
