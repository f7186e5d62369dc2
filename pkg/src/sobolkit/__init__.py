"""Variance-based global sensitivity analysis on replicated Latin hypercube
designs: Oracle 1 / Oracle 2 Sobol' index estimators, bootstrap intervals,
benchmark models with analytic indices, and a two-stage adaptive campaign
with batch (CLI) and interactive (HTTP console) front ends."""

__version__ = "0.1.0"

from .bootstrap import BootstrapConfig, bootstrap_ci
from .campaign import (AutoPolicy, CampaignState, Thresholds, auto_policy_run,
                       candidates, close_campaign, exit_hint, load_campaign,
                       stage_one, stage_two_step)
from .designs import (DesignMatrix, JitterArray, Permutation, RlhdFamily,
                      SimulationBatch, build_randomized_lhd, is_replicated,
                      latin_property_holds, make_rlhd_pair, make_z_design,
                      match_permutation, reorder_outputs, reorder_to_match,
                      sample_permutation)
from .distributions import MarginalDistribution, inverse_cdf, transform_design
from .estimators import (ConfidenceInterval, PooledMoments, SobolEstimate,
                         averaged_oracle2, oracle1, oracle2, oracle2_pearson,
                         pooled_moments, total_order, triple_oracle1,
                         triple_oracle2_self)
from .models import (REGISTRY, AnalyticIndices, GProductModel, analytic_indices,
                     brute_force_indices, g_sobol, get_model, modified_g,
                     modified_g_linear)
from .runner import (BudgetLedger, CampaignStore, Evaluator, InputSpec,
                     ModelBinding, ProblemSpec, external_bridge, load_problem)

__all__ = [name for name in dir() if not name.startswith("_")]
